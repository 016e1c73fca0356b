#include "pdpaudit/skew.hpp"

#include <cmath>
#include <stdexcept>

namespace pdpaudit {

namespace {

double share_prob(const SkewParams& params) { return (1.0 - params.p) / (params.k - 1); }

void check_params(const SkewParams& params) {
  if (params.p < 1.0 / params.k - 1e-12 || params.p >= 1.0) {
    throw std::invalid_argument("skew: p must lie in [1/k, 1)");
  }
  if (params.n < 1 || params.k < 2) throw std::invalid_argument("skew: bad dimensions");
}

double coefficient(const DiffusionSchedule& sched, int t) {
  if (t == 1) return 1.0 / sched.mu_bar_plus(1);
  return (sched.alpha_bar(t - 1) - sched.alpha_bar(t)) /
         (sched.k() * sched.mu_bar_plus(t) * sched.mu_bar_minus(t));
}

}  // namespace

double skew_tau(const SkewParams& params, const DiffusionSchedule& sched, int t) {
  check_params(params);
  const double q = share_prob(params);
  return q + (sched.mu_bar_minus(t) / sched.mu_bar_plus(t)) * (1.0 - q);
}

double asymptotic_psi(const SkewParams& params, const DiffusionSchedule& sched, int t) {
  check_params(params);
  const double q = share_prob(params);
  const double tau = skew_tau(params, sched, t);
  const int n = params.n;
  const double a = coefficient(sched, t);
  if (t == 1) {
    // the b / ratio_bar_0^2 ratio collapses to 1 in the limit
    return a / (std::pow(tau, 2 * n - 1) * q);
  }
  const double rp2 = std::exp(2.0 * sched.log_ratio_bar(t - 1));
  const double b = std::expm1(2.0 * sched.log_ratio_bar(t - 1));
  return a * b / (rp2 * std::pow(tau, 2 * n - 1) * q + std::pow(tau, 2 * n));
}

EtaResult sufficient_radii(const SkewParams& params, const DiffusionSchedule& sched,
                           int t, std::int64_t s) {
  check_params(params);
  const int n = params.n;
  const double q = share_prob(params);
  const double log_rb = sched.log_ratio_bar(t);
  const double bm = sched.mu_bar_minus(t);

  // concentration surrogate for the radius condition
  const double log_s_sqrt_a = std::log(static_cast<double>(s)) + 0.5 * std::log(coefficient(sched, t));
  const double log_skew = std::log((params.k - 1) / (1.0 - params.p));
  const double log_decay = std::log(std::max(1.0 / (n * bm), 1.0));  // 0 in the noisy regime
  const double denom = 2.0 * log_skew / log_decay + 1.0;  // +inf when log_decay = 0
  const double eta_rhs = n - std::max((n - log_s_sqrt_a / log_rb) / denom, 0.0);

  int eta = n;
  for (int cand = 1; cand <= n; ++cand) {
    if (static_cast<double>(cand) >= eta_rhs) {
      eta = cand;
      break;
    }
  }

  const double ce = (n - eta) / static_cast<double>(eta);
  const double log_e_bm = std::log(1.0 / (M_E * bm));
  const double c_rhs = ce - (std::log(1.0 / (2.0 * M_E)) + ce * log_e_bm) /
                                (log_skew + log_e_bm);
  int j = n - eta;
  for (int cand = 0; cand <= n - eta; ++cand) {
    if (static_cast<double>(cand) / eta >= c_rhs) {
      j = cand;
      break;
    }
  }
  return {eta, j, eta + j};
}

std::vector<SkewPoint> predict_leakage_vs_skew(const std::vector<double>& p_grid,
                                               const SkewDesign& design) {
  const int majority = 0;
  DiffusionSchedule sched = DiffusionSchedule::linear(design.T, design.k, design.decay);
  std::vector<int> target = non_majority_point(design.n, design.k, majority);

  std::vector<SkewPoint> out;
  for (double p : p_grid) {
    SkewPoint point;
    point.p = p;
    point.radius_by_t.assign(design.T + 1, 0.0);
    point.psi_by_t.assign(design.T + 1, 0.0);
    point.main_by_t.assign(design.T + 1, 0.0);

    for (int rep = 0; rep < design.num_seeds; ++rep) {
      std::uint64_t seed = design.seed + 7919ull * static_cast<std::uint64_t>(rep);
      CategoricalDataset data =
          sample_skewed(design.s - 1, design.n, design.k, p, majority, seed);
      data.append_row(target);

      PointAudit audit = per_instance_delta(data, data.size() - 1, sched, design.epsilon,
                                            design.m, design.release_step);
      point.mean_delta += audit.delta;
      for (const RadiusTrace& tr : audit.trace) {
        point.mean_main_term += tr.clamp * tr.psi_term;
        point.radius_by_t[tr.t] += static_cast<double>(tr.radius);
        point.psi_by_t[tr.t] += tr.psi_term;
        point.main_by_t[tr.t] += tr.clamp * tr.psi_term;
      }
    }
    point.mean_delta /= design.num_seeds;
    point.mean_main_term /= design.num_seeds;
    for (double& r : point.radius_by_t) r /= design.num_seeds;
    for (double& r : point.psi_by_t) r /= design.num_seeds;
    for (double& r : point.main_by_t) r /= design.num_seeds;
    out.push_back(std::move(point));
  }
  return out;
}

}  // namespace pdpaudit
