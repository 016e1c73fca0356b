#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pdpaudit/dataset.hpp"
#include "pdpaudit/schedule.hpp"

namespace pdpaudit {

// Per-instance privacy accounting. For a target row v* in dataset V0 the
// neighbouring dataset V1 = V0 \ {v*} drops exactly one occurrence. The
// bound walks the reverse process and charges every step a term controlled
// by a Hamming radius around v*.

enum class BoundMode { kMain, kRelaxed };

struct BoundOptions {
  BoundMode mode = BoundMode::kMain;
  // Use the looser main-text radius fallback (single inequality, unbarred
  // per-step probabilities) instead of the branch form.
  bool literal_main_text = false;
  // Optional per-step approximation slack; index t in [1, T], empty = exact.
  std::vector<double> gamma;
  std::vector<double> gamma_tilde;
};

// (s - N_a) / N_b from cumulative neighbour counts; +infinity when N_b = 0.
double vartheta(std::int64_t count_a, std::int64_t count_b, std::int64_t s);

struct PsiTerm {
  double value = 0.0;            // n / s^{psi_t}
  bool support_isolated = false; // some column of v* shares its value with no other row
};

// Dispersion term of one reverse step. At t = 1 the generic expression
// degenerates and the analytic limit is used; if v* is support-isolated the
// limit diverges and value is +infinity with the flag set.
PsiTerm psi_term(const NeighborTable& table, const DiffusionSchedule& sched, int t);

// Smallest kappa in [0, n] whose upper binomial tail
//   sum_{j>=kappa} C(n,j) (1-q)^j q^{n-j}   with q = mu_bar_plus
// drops to the threshold or below. Returns n+1 if even kappa = n fails.
int binomial_tail_kappa(int n, double mu_bar_plus, double threshold);

// Radius slack: scans c = j/eta over the integer grid j = 0..n-eta and
// returns the smallest admissible j.
int find_c_star(const NeighborTable& table, const DiffusionSchedule& sched, int t,
                int eta, const BoundOptions& opts);

struct EtaResult {
  int eta = 0;
  int c_star_num = 0;  // c* = c_star_num / eta
  int radius = 0;      // eta + c_star_num
};

// Smallest admissible base radius at step t. psi_value is the precomputed
// n / s^{psi_t} for this target (may be +infinity at an isolated t = 1).
EtaResult find_eta(const NeighborTable& table, const DiffusionSchedule& sched, int t,
                   double psi_value, const BoundOptions& opts);

// Residual slack from running the per-step comparison with approximation
// budgets gamma, gamma_tilde; zero when both are zero.
double error_term(const DiffusionSchedule& sched, int t, int n, double gamma_t,
                  double gamma_tilde_t);

// n (1 - 1/ratio_bar_{t-1}) / s^2; equals n / s^2 at t = 1.
double second_term(const DiffusionSchedule& sched, int t, std::int64_t s, int n);

struct RadiusTrace {
  int t = 0;
  int eta = 0;
  double c_star = 0.0;
  int radius = 0;
  double psi_term = 0.0;    // n / s^{psi_t}
  double clamp = 0.0;       // min(4 N_radius / s, 1)
  double second_term = 0.0;
  double step_total = 0.0;  // clamp * psi + second + error
};

struct PointAudit {
  std::int64_t row = -1;        // -1 for an external target
  std::vector<int> values;
  double delta = 0.0;
  bool support_isolated = false;
  std::vector<RadiusTrace> trace;
};

// Leakage bound for removing one occurrence of the given target. Steps run
// from max(release_step, 0) + 1 up to T; m is the number of released
// synthetic samples.
PointAudit per_instance_delta(const CategoricalDataset& data, std::int64_t target_row,
                              const DiffusionSchedule& sched, double epsilon,
                              std::int64_t m, int release_step,
                              const BoundOptions& opts = {});

// Same bound for a point that need not be a dataset row; the neighbour
// counts are taken over all of data.
PointAudit per_instance_delta_external(const CategoricalDataset& data,
                                       const std::vector<int>& target,
                                       const DiffusionSchedule& sched, double epsilon,
                                       std::int64_t m, int release_step,
                                       const BoundOptions& opts = {});

// Audits every distinct row; duplicates share one computation and one
// result entry per row. Deterministic for any thread count.
std::vector<PointAudit> audit_all(const CategoricalDataset& data,
                                  const DiffusionSchedule& sched, double epsilon,
                                  std::int64_t m, int release_step,
                                  const BoundOptions& opts = {}, int threads = 1);

}  // namespace pdpaudit
