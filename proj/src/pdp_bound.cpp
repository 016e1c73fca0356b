#include "pdpaudit/pdp_bound.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>
#include <unordered_map>

namespace pdpaudit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// log(1 + e^x) without overflow
double log1p_exp(double x) {
  if (x > 36.0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

// Coefficient (alpha_bar_{t-1} - alpha_bar_t) / (k mu_bar_t^+ mu_bar_t^-),
// evaluated as its analytic limit 1 / mu_bar_1^+ at t = 1.
double psi_coefficient(const DiffusionSchedule& sched, int t) {
  if (t == 1) return 1.0 / sched.mu_bar_plus(1);
  return (sched.alpha_bar(t - 1) - sched.alpha_bar(t)) /
         (sched.k() * sched.mu_bar_plus(t) * sched.mu_bar_minus(t));
}

}  // namespace

double vartheta(std::int64_t count_a, std::int64_t count_b, std::int64_t s) {
  if (count_b == 0) return kInf;
  return static_cast<double>(s - count_a) / static_cast<double>(count_b);
}

PsiTerm psi_term(const NeighborTable& table, const DiffusionSchedule& sched, int t) {
  const int n = table.n();
  const double log_rb = sched.log_ratio_bar(t);
  const double sim = table.similarity(log_rb);
  const double coeff = psi_coefficient(sched, t);

  PsiTerm out;
  if (t == 1) {
    // limit of the ratio argument as ratio_bar_0 -> infinity
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
      double log_res = table.log_restricted_similarity(i, log_rb);
      if (!std::isfinite(log_res) && log_res < 0.0) {
        out.support_isolated = true;
        out.value = kInf;
        return out;
      }
      sum += log1p_exp(-log_res);
    }
    out.value = coeff * sum / (1.0 + sim);
    return out;
  }

  // ratio_bar_{t-1} is finite and, with the alpha floor, exp-safe
  const double rp2 = std::exp(2.0 * sched.log_ratio_bar(t - 1));
  const double b = std::expm1(2.0 * sched.log_ratio_bar(t - 1));
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    double res = table.restricted_similarity(i, log_rb);
    sum += std::log1p(b / (rp2 * res + sim + 1.0));
  }
  out.value = coeff * sum / (1.0 + sim);
  return out;
}

int binomial_tail_kappa(int n, double mu_bar_plus, double threshold) {
  if (threshold >= 1.0) return 0;
  const double lq = std::log(mu_bar_plus);
  const double lp = std::log1p(-mu_bar_plus);  // log(1 - mu_bar_plus)
  std::vector<double> term(n + 1);
  const double lgn = std::lgamma(n + 1.0);
  for (int j = 0; j <= n; ++j) {
    double lchoose = lgn - std::lgamma(j + 1.0) - std::lgamma(n - j + 1.0);
    term[j] = std::exp(lchoose + j * lp + (n - j) * lq);
  }
  double tail = 0.0;
  std::vector<double> suffix(n + 2, 0.0);
  for (int j = n; j >= 0; --j) {
    tail += term[j];
    suffix[j] = tail;
  }
  for (int kappa = 0; kappa <= n; ++kappa) {
    if (suffix[kappa] <= threshold) return kappa;
  }
  return n + 1;
}

namespace {

// Admissibility of one grid point c = j/eta under the inequality
//   c >= ((1/eta) log vartheta(eta + j) + shift) / denom.
// A zero vartheta at the candidate radius short-circuits to admissible.
bool radius_admissible(double theta, int eta, int j, double shift, double denom) {
  if (theta == 0.0) return true;
  double numer = std::log(theta) / eta + shift;
  if (denom <= 0.0) return numer <= 0.0;
  return static_cast<double>(j) / eta >= numer / denom;
}

}  // namespace

int find_c_star(const NeighborTable& table, const DiffusionSchedule& sched, int t,
                int eta, const BoundOptions& opts) {
  const int n = table.n();
  const std::int64_t s = table.s();
  auto theta_at = [&](int radius) {
    std::int64_t cnt = table.cumulative(radius);
    return vartheta(cnt, cnt, s);
  };

  if (opts.literal_main_text) {
    const double denom = std::log(1.0 / sched.mu_minus(t)) - 1.0;
    for (int j = 0; j <= n - eta; ++j) {
      if (radius_admissible(theta_at(eta + j), eta, j, 1.5, denom)) return j;
    }
    return n - eta;  // unreachable: vartheta(n) = 0
  }

  const double log_inv = -std::log(sched.mu_bar_minus(t));
  // branch condition 1/vartheta(2 eta) > (2 e mu_bar^-)^eta; a full 2 eta-ball
  // forces the first branch, an empty one the second
  const std::int64_t n2 = table.cumulative(std::min(2 * eta, n));
  bool first_branch;
  if (n2 == s) {
    first_branch = true;
  } else if (n2 == 0) {
    first_branch = false;
  } else {
    double lhs = static_cast<double>(n2) / static_cast<double>(s - n2);
    double rhs = std::exp(eta * std::log(2.0 * M_E * sched.mu_bar_minus(t)));
    first_branch = lhs > rhs;
  }

  if (first_branch) {
    const int jmax = std::min(eta - 1, n - eta);
    for (int j = 0; j <= jmax; ++j) {
      if (radius_admissible(theta_at(eta + j), eta, j, 1.0 + std::log(2.0), log_inv)) {
        return j;
      }
    }
    // fall through to the looser inequality on the rest of the grid
  }
  for (int j = eta; j <= n - eta; ++j) {
    if (radius_admissible(theta_at(eta + j), eta, j, 0.0, log_inv - 1.0)) return j;
  }
  return n - eta;  // unreachable: vartheta(n) = 0
}

namespace {

// Main-mode radius condition, Hamming radius term by term.
bool eta_admissible_main(const NeighborTable& table, const DiffusionSchedule& sched,
                         int t, int eta, double psi_value) {
  const int n = table.n();
  const std::int64_t s = table.s();
  const std::int64_t n_eta = table.cumulative(eta);
  const double theta = vartheta(n_eta, n_eta, s);
  if (theta == kInf) return false;  // empty ball, both condition terms diverge

  const double d1 = -std::log(n * (1.0 - sched.mu_bar_plus(t)));
  double term1;
  if (d1 > 0.0) {
    term1 = (theta == 0.0) ? -kInf : std::log(theta) / d1;
  } else {
    // the distance-decay factor saturates at 1; the term only helps when the
    // ball already holds at least half the points
    term1 = (theta == 0.0 || std::log(theta) <= 0.0) ? 0.0 : kInf;
  }
  if (term1 == kInf) return false;

  double term2;
  if (theta == 0.0) {
    term2 = 0.0;
  } else {
    const double s_psi = n / psi_value;  // psi = +inf collapses this to zero
    const double arg = theta * psi_coefficient(sched, t) * s_psi;
    if (arg == 0.0) {
      term2 = 0.0;
    } else {
      term2 = std::max(std::log(arg) / (2.0 * sched.log_ratio_bar(t)) - 2.0, 0.0);
    }
  }
  if (term2 == kInf) return false;
  return static_cast<double>(eta) >= term1 + term2;
}

// Relaxed-mode radius condition; needs the slack radius already chosen.
bool eta_admissible_relaxed(const NeighborTable& table, const DiffusionSchedule& sched,
                            int t, int eta, int radius, double psi_value,
                            const BoundOptions& opts) {
  const int n = table.n();
  const std::int64_t s = table.s();
  const std::int64_t n_eta = table.cumulative(eta);
  const std::int64_t n_rad = table.cumulative(radius);

  double tail_threshold =
      (s - n_eta == 0) ? kInf
                       : static_cast<double>(n_rad) / static_cast<double>(s - n_eta);
  int kappa = (tail_threshold == kInf)
                  ? 0
                  : binomial_tail_kappa(n, sched.mu_bar_plus(t), tail_threshold);
  if (kappa == n + 1) return false;

  const double theta_p = vartheta(n_eta, n_rad, s);
  double bracket;
  if (theta_p == 0.0) {
    bracket = 0.0;
  } else if (t == 1) {
    return false;  // ratio_bar_0 = inf makes the bracket diverge
  } else {
    const double b = std::expm1(2.0 * sched.log_ratio_bar(t - 1));
    if (b == 0.0) {
      bracket = 0.0;
    } else {
      const double cal_a = sched.mu_plus(t) * psi_coefficient(sched, t);
      const double s_psi = n / psi_value;
      const double log_denom = opts.literal_main_text
                                   ? std::log(sched.ratio(t))
                                   : sched.log_ratio_bar(t);
      double val = std::log(theta_p * cal_a * b * s_psi) / (2.0 * log_denom);
      bracket = std::max(val, 0.0);
    }
  }
  if (bracket == kInf) return false;
  return static_cast<double>(eta) >= kappa + bracket - 2.0;
}

}  // namespace

EtaResult find_eta(const NeighborTable& table, const DiffusionSchedule& sched, int t,
                   double psi_value, const BoundOptions& opts) {
  const int n = table.n();
  for (int eta = 1; eta <= n; ++eta) {
    int j = find_c_star(table, sched, t, eta, opts);
    bool ok = (opts.mode == BoundMode::kMain)
                  ? eta_admissible_main(table, sched, t, eta, psi_value)
                  : eta_admissible_relaxed(table, sched, t, eta, eta + j, psi_value, opts);
    if (ok) return {eta, j, eta + j};
  }
  return {n, 0, n};  // unreachable: eta = n always passes (vartheta(n) = 0)
}

double error_term(const DiffusionSchedule& sched, int t, int n, double gamma_t,
                  double gamma_tilde_t) {
  double f1 = 0.0, f2 = 0.0;
  if (gamma_t > 0.0) {
    double num = sched.k() * std::pow(sched.mu_plus(t) * sched.mu_bar_plus(t - 1), 2);
    double den = sched.mu_bar_plus(t) * sched.mu_minus(t) * sched.mu_bar_minus(t - 1);
    f1 = num / den * std::sqrt(2.0 * gamma_t);
  }
  if (gamma_tilde_t > 0.0) {
    f2 = 2.0 *
         std::log(sched.mu_plus(t) * sched.mu_bar_plus(t - 1) /
                  (sched.mu_minus(t) * sched.mu_bar_minus(t - 1))) *
         gamma_tilde_t;
  }
  return n * (f1 + f2);
}

double second_term(const DiffusionSchedule& sched, int t, std::int64_t s, int n) {
  double contraction = 1.0 - 1.0 / sched.ratio_bar(t - 1);  // 1 at t = 1
  return n * contraction / (static_cast<double>(s) * static_cast<double>(s));
}

namespace {

PointAudit audit_table(const NeighborTable& table, const std::vector<int>& values,
                       std::int64_t row, const CategoricalDataset& data,
                       const DiffusionSchedule& sched, double epsilon, std::int64_t m,
                       int release_step, const BoundOptions& opts) {
  if (epsilon <= 0.0) throw std::invalid_argument("audit: epsilon must be positive");
  if (m < 0) throw std::invalid_argument("audit: sample count must be non-negative");
  const int T = sched.T();
  const int n = data.n();
  const std::int64_t s = table.s();

  PointAudit out;
  out.row = row;
  out.values = values;

  auto gamma_at = [](const std::vector<double>& g, int t) {
    return (t < static_cast<int>(g.size())) ? g[t] : 0.0;
  };

  double total = 0.0;
  for (int t = std::max(release_step, 0) + 1; t <= T; ++t) {
    PsiTerm psi = psi_term(table, sched, t);
    if (psi.support_isolated) out.support_isolated = true;

    EtaResult sel = find_eta(table, sched, t, psi.value, opts);
    double clamp = std::min(4.0 * table.cumulative(sel.radius) / static_cast<double>(s), 1.0);
    double second = second_term(sched, t, s, n);
    double err = error_term(sched, t, n, gamma_at(opts.gamma, t),
                            gamma_at(opts.gamma_tilde, t));
    double step = clamp * psi.value + second + err;
    // clamp = 0 with psi = +inf can only arise with an empty neighbourhood;
    // charge the full divergence rather than letting 0 * inf poison the sum
    if (std::isnan(step)) step = kInf;

    RadiusTrace tr;
    tr.t = t;
    tr.eta = sel.eta;
    tr.c_star = static_cast<double>(sel.c_star_num) / sel.eta;
    tr.radius = sel.radius;
    tr.psi_term = psi.value;
    tr.clamp = clamp;
    tr.second_term = second;
    tr.step_total = step;
    out.trace.push_back(tr);
    total += step;
  }

  out.delta = std::max(0.0, m * total / (epsilon * -std::expm1(-epsilon)));
  return out;
}

}  // namespace

PointAudit per_instance_delta(const CategoricalDataset& data, std::int64_t target_row,
                              const DiffusionSchedule& sched, double epsilon,
                              std::int64_t m, int release_step,
                              const BoundOptions& opts) {
  NeighborTable table(data, target_row);
  return audit_table(table, data.row_copy(target_row), target_row, data, sched, epsilon,
                     m, release_step, opts);
}

PointAudit per_instance_delta_external(const CategoricalDataset& data,
                                       const std::vector<int>& target,
                                       const DiffusionSchedule& sched, double epsilon,
                                       std::int64_t m, int release_step,
                                       const BoundOptions& opts) {
  NeighborTable table(data, target);
  return audit_table(table, target, -1, data, sched, epsilon, m, release_step, opts);
}

std::vector<PointAudit> audit_all(const CategoricalDataset& data,
                                  const DiffusionSchedule& sched, double epsilon,
                                  std::int64_t m, int release_step,
                                  const BoundOptions& opts, int threads) {
  const std::int64_t s = data.size();
  const int n = data.n();

  struct RowHash {
    std::size_t operator()(const std::vector<int>& v) const {
      std::size_t h = 1469598103934665603ull;
      for (int x : v) {
        h ^= static_cast<std::size_t>(x);
        h *= 1099511628211ull;
      }
      return h;
    }
  };
  std::unordered_map<std::vector<int>, std::int64_t, RowHash> first_index;
  std::vector<std::int64_t> distinct;
  for (std::int64_t r = 0; r < s; ++r) {
    auto [it, inserted] = first_index.emplace(data.row_copy(r), r);
    if (inserted) distinct.push_back(r);
  }

  std::vector<PointAudit> results(distinct.size());
  auto work = [&](std::int64_t idx) {
    results[idx] = per_instance_delta(data, distinct[idx], sched, epsilon, m,
                                      release_step, opts);
  };

  threads = std::max(1, threads);
  if (threads == 1 || distinct.size() < 2) {
    for (std::size_t i = 0; i < distinct.size(); ++i) work(i);
  } else {
    std::atomic<std::int64_t> next{0};
    std::vector<std::thread> pool;
    const std::int64_t count = static_cast<std::int64_t>(distinct.size());
    for (int w = 0; w < threads; ++w) {
      pool.emplace_back([&] {
        for (std::int64_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) work(i);
      });
    }
    for (auto& th : pool) th.join();
  }

  std::sort(results.begin(), results.end(), [](const PointAudit& a, const PointAudit& b) {
    if (a.delta != b.delta) return a.delta > b.delta;
    return a.row < b.row;
  });
  (void)n;
  return results;
}

}  // namespace pdpaudit
