#include "pdpaudit/lower_bound.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace pdpaudit {

TransitionConstants transition_constants(const DiffusionSchedule& sched, int t) {
  TransitionConstants c;
  c.c1 = sched.mu_plus(t) * sched.mu_bar_plus(t - 1) / sched.mu_bar_plus(t);
  c.c2 = sched.mu_minus(t) * sched.mu_bar_minus(t - 1) / sched.mu_bar_plus(t);
  c.c1t = sched.mu_plus(t) * sched.mu_bar_minus(t - 1) / sched.mu_bar_minus(t);
  c.c2t = sched.mu_minus(t) * sched.mu_bar_plus(t - 1) / sched.mu_bar_minus(t);
  return c;
}

std::pair<CategoricalDataset, CategoricalDataset> worst_pair(std::int64_t s) {
  if (s < 2) throw std::invalid_argument("worst pair: s must be at least 2");
  CategoricalDataset v0(2, 2), v1(2, 2);
  const std::vector<int> zero{0, 0}, one{1, 1};
  for (std::int64_t r = 0; r < s - 1; ++r) {
    v0.append_row(zero);
    v1.append_row(zero);
  }
  v0.append_row(one);
  v0.append_row(one);
  v1.append_row(one);
  return {std::move(v0), std::move(v1)};
}

SimplifiedLowerBound simplified_bound(const DiffusionSchedule& sched, std::int64_t s) {
  if (sched.T() < 2) throw std::invalid_argument("lower bound: needs T >= 2");
  const int T = sched.T();
  const double rb1_sq = std::exp(2.0 * sched.log_ratio_bar(1));

  // S = G~_1 + F~_1 G~_2 + ... + F~_1 ... F~_{T-2} G~_{T-1}
  double S = rb1_sq / s;
  double decay = 1.0;
  for (int t = 2; t <= T - 1; ++t) {
    TransitionConstants prev = transition_constants(sched, t - 1);
    decay *= prev.c1 * (prev.c1 - prev.c1t);
    TransitionConstants cur = transition_constants(sched, t);
    double g = 2.0 * (cur.c2t - cur.c2) / std::exp(2.0 * sched.log_ratio_bar(t));
    S += decay * g;
  }

  double delta_min = std::numeric_limits<double>::infinity();
  for (int t = 1; t <= T; ++t) {
    TransitionConstants c = transition_constants(sched, t);
    delta_min = std::min(delta_min, (c.c2 + c.c1t + 2.0 * c.c1t * c.c2) / 4.0);
  }

  SimplifiedLowerBound out;
  out.S = S;
  out.epsilon0 = std::log1p(S / (2.0 * (1.0 + rb1_sq * delta_min)));
  out.delta_lb = S / s;
  return out;
}

double full_recursion_bound(const DiffusionSchedule& sched, std::int64_t s) {
  if (sched.T() < 2) throw std::invalid_argument("lower bound: needs T >= 2");
  const int T = sched.T();
  const double sd = static_cast<double>(s);
  const double rb1_sq = std::exp(2.0 * sched.log_ratio_bar(1));

  auto decay_factor = [&](int t) {
    TransitionConstants c = transition_constants(sched, t);
    const double bp = sched.mu_bar_plus(t);
    const double bm = sched.mu_bar_minus(t);
    const double p = ((sd - 1.0) * c.c1t + 2.0 * c.c1) * ((sd - 1.0) * c.c1 + 2.0 * c.c2t);
    const double sq = (sd + 1.0) * (sd + 1.0);
    const double a = sq * c.c1 * c.c1 - p;
    const double b = sq * c.c1t * c.c1 - p;
    const double cc = sq * c.c1t * c.c1t - p;
    const double num = 4.0 * std::pow(bp, 4) * a +
                       4.0 * (sd - 1.0) * bp * bp * bm * bm * b +
                       (sd - 1.0) * (sd - 1.0) * std::pow(bm, 4) * cc;
    const double den = sq * std::pow(2.0 * bp * bp + (sd - 1.0) * bm * bm, 2);
    return num / den;
  };

  auto gain = [&](int t) {
    TransitionConstants c = transition_constants(sched, t);
    const double bp = sched.mu_bar_plus(t);
    const double bm = sched.mu_bar_minus(t);
    const double lead = (sd - 1.0) * (c.c2t - c.c2) * bp * bp * bm * bm;
    const double inner = 4.0 * c.c2t * std::pow(bm, 4) +
                         3.0 * (sd - 1.0) * (c.c2 + c.c2t) * bp * bp * bm * bm +
                         2.0 * (sd - 1.0) * (sd - 1.0) * c.c2 * std::pow(bp, 4);
    const double den = std::pow((sd - 1.0) * bp * bp + 2.0 * bm * bm, 2) *
                       std::pow((sd - 1.0) * bp * bp + bm * bm, 2);
    return lead * inner / den;
  };

  double value = rb1_sq * (sd - 1.0) /
                 ((1.0 + (sd - 1.0) * rb1_sq) * (2.0 + (sd - 1.0) * rb1_sq));
  double decay = 1.0;
  for (int t = 2; t <= T - 1; ++t) {
    decay *= decay_factor(t - 1);
    value += decay * gain(t);
  }
  return value;
}

ExactGap exact_gap(const DiffusionSchedule& sched, std::int64_t s, int release_step) {
  auto [v0, v1] = worst_pair(s);
  ExactChainDistribution p0 = exact_generated_distribution(v0, sched, release_step);
  ExactChainDistribution p1 = exact_generated_distribution(v1, sched, release_step);
  const std::int64_t one_one = encode_state({1, 1}, 2);
  ExactGap out;
  out.p0 = p0.prob[one_one];
  out.p1 = p1.prob[one_one];
  out.gap = out.p0 - out.p1;
  return out;
}

}  // namespace pdpaudit
