#include "pdpaudit/dp_bound.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace pdpaudit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double log1p_exp(double x) {
  if (x > 36.0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

// Coefficient mu_t^+ (alpha_bar_{t-1} - alpha_bar_t)/(k mu_bar^+ mu_bar^-);
// equal to 1 at t = 1.
double cal_a(const DiffusionSchedule& sched, int t) {
  if (t == 1) return sched.mu_plus(1) / sched.mu_bar_plus(1);
  return sched.mu_plus(t) * (sched.alpha_bar(t - 1) - sched.alpha_bar(t)) /
         (sched.k() * sched.mu_bar_plus(t) * sched.mu_bar_minus(t));
}

}  // namespace

double worst_psi(const DiffusionSchedule& sched, int t, std::int64_t s, int n) {
  if (s <= n) throw std::invalid_argument("dp bound: requires s > n");
  const double log_rb = sched.log_ratio_bar(t);
  // extremal similarity profile: one overlapping row per column at distance
  // n-1, everything else at full distance n
  const double sim_far = std::exp(-n * log_rb) * static_cast<double>(s - n);
  const double sim_near = std::exp(-(n - 1) * log_rb);
  const double coeff = cal_a(sched, t) / (1.0 + sim_far + sim_near);

  if (t == 1) {
    // limit of B_t / (ratio_bar_0^2 sim_near + ...) as ratio_bar_0 -> infinity
    return coeff * log1p_exp((n - 1) * log_rb);
  }
  const double rp2 = std::exp(2.0 * sched.log_ratio_bar(t - 1));
  const double b = std::expm1(2.0 * sched.log_ratio_bar(t - 1));
  return coeff * std::log1p(b / (rp2 * sim_near + sim_far + sim_near + 1.0));
}

double worst_count(std::int64_t s, int n, int eta) {
  if (eta >= n) return 0.0;
  if (eta == n - 1) return static_cast<double>(s) / n;
  return static_cast<double>(s);
}

namespace {

// Worst-case slack: single inequality
//   c >= ((1/eta) log h(eta + j) + 3/2) / (log(1/mu_bar^-) - 1)
// with h(n) = 0 making the last grid point always admissible.
int worst_c_star(const DiffusionSchedule& sched, int t, std::int64_t s, int n, int eta,
                 bool literal_main_text) {
  const double mu = literal_main_text ? sched.mu_minus(t) : sched.mu_bar_minus(t);
  const double denom = std::log(1.0 / mu) - 1.0;
  for (int j = 0; j <= n - eta; ++j) {
    double h = worst_count(s, n, eta + j);
    if (h == 0.0) return j;
    double numer = std::log(h) / eta + 1.5;
    bool ok = (denom <= 0.0) ? (numer <= 0.0)
                             : (static_cast<double>(j) / eta >= numer / denom);
    if (ok) return j;
  }
  return n - eta;
}

bool worst_eta_admissible(const DiffusionSchedule& sched, int t, std::int64_t s, int n,
                          int eta, int radius, bool literal_main_text) {
  const double h_eta = worst_count(s, n, eta);
  // kappa threshold: worst case of N_radius / (s - N_eta) is 1 / h(eta)
  double tail_threshold = (h_eta == 0.0) ? kInf : 1.0 / h_eta;
  int kappa = (tail_threshold == kInf)
                  ? 0
                  : binomial_tail_kappa(n, sched.mu_bar_plus(t), tail_threshold);
  if (kappa == n + 1) return false;

  double bracket;
  if (h_eta == 0.0) {
    bracket = 0.0;
  } else if (t == 1) {
    return false;  // B_1 diverges; only h = 0 passes
  } else {
    const double b = std::expm1(2.0 * sched.log_ratio_bar(t - 1));
    if (b == 0.0) {
      bracket = 0.0;
    } else {
      const double w = worst_psi(sched, t, s, n);
      const double s_psi = 1.0 / w;
      const double log_denom =
          literal_main_text ? std::log(sched.ratio(t)) : sched.log_ratio_bar(t);
      double val =
          (std::log(h_eta) + std::log(cal_a(sched, t) * b * s_psi)) / (2.0 * log_denom);
      bracket = std::max(val, 0.0);
    }
  }
  if (bracket == kInf) return false;
  (void)radius;
  return static_cast<double>(eta) >= kappa + bracket - 2.0;
}

}  // namespace

EtaResult worst_radii(const DiffusionSchedule& sched, int t, std::int64_t s, int n,
                      bool literal_main_text) {
  if (s <= n) throw std::invalid_argument("dp bound: requires s > n");
  for (int eta = 1; eta <= n; ++eta) {
    int j = worst_c_star(sched, t, s, n, eta, literal_main_text);
    if (worst_eta_admissible(sched, t, s, n, eta, eta + j, literal_main_text)) {
      return {eta, j, eta + j};
    }
  }
  return {n, 0, n};  // unreachable: h(n) = 0 admits eta = n
}

double rho(const DiffusionSchedule& sched, int t) {
  const double c1 = sched.mu_plus(t) * sched.mu_bar_plus(t - 1) / sched.mu_bar_plus(t);
  const double decay_prev = 1.0 - 1.0 / sched.ratio_bar(t - 1);           // 1 at t = 1
  const double decay_step = 1.0 - sched.ratio_bar(t) / sched.ratio_bar(t - 1);
  return (1.0 - c1) * decay_prev + c1 * decay_step;
}

DpResult dp_delta(const DiffusionSchedule& sched, std::int64_t s, int n, double epsilon,
                  std::int64_t m, int release_step) {
  if (epsilon <= 0.0) throw std::invalid_argument("dp bound: epsilon must be positive");
  if (s <= n) throw std::invalid_argument("dp bound: requires s > n");
  if (m < 0) throw std::invalid_argument("dp bound: sample count must be non-negative");
  const int T = sched.T();
  const double s2 = static_cast<double>(s) * static_cast<double>(s);

  DpResult out;
  double total = 0.0;
  for (int t = std::max(release_step, 0) + 1; t <= T; ++t) {
    DpStepTrace tr;
    tr.t = t;
    tr.psi = worst_psi(sched, t, s, n);
    EtaResult sel = worst_radii(sched, t, s, n);
    tr.eta = sel.eta;
    tr.c_star = static_cast<double>(sel.c_star_num) / sel.eta;
    tr.radius = sel.radius;
    tr.varrho = rho(sched, t);
    tr.main_term = n * tr.psi;
    tr.second_term = n * tr.varrho / s2;
    total += tr.main_term + tr.second_term;
    out.trace.push_back(tr);
  }
  out.delta = std::max(0.0, m * total / (epsilon * -std::expm1(-epsilon)));
  return out;
}

}  // namespace pdpaudit
