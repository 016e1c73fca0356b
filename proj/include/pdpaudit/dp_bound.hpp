#pragma once

#include <cstdint>
#include <vector>

#include "pdpaudit/pdp_bound.hpp"
#include "pdpaudit/schedule.hpp"

namespace pdpaudit {

// Dataset-free worst case of the per-instance machinery: the neighbour
// profile is replaced by the extremal configuration of s points inside an
// n-column, k-category space, giving a classical (eps, delta)-DP statement.

// Worst-case value of n^{-1} * (n / s^{psi_t}), i.e. 1 / s^{psi_t} with every
// similarity at its minimum.
double worst_psi(const DiffusionSchedule& sched, int t, std::int64_t s, int n);

// Worst-case cumulative count bound used in place of N_eta:
// s for eta <= n-2, s/n for eta = n-1, 0 for eta = n.
double worst_count(std::int64_t s, int n, int eta);

// Radius selection against worst_count instead of dataset counts.
EtaResult worst_radii(const DiffusionSchedule& sched, int t, std::int64_t s, int n,
                      bool literal_main_text = false);

struct DpStepTrace {
  int t = 0;
  double psi = 0.0;  // 1 / s^{Psi_t}
  int eta = 0;
  double c_star = 0.0;
  int radius = 0;
  double varrho = 0.0;
  double main_term = 0.0;    // n * psi (clamp factor fixed at 1)
  double second_term = 0.0;  // n * varrho / s^2
};

struct DpResult {
  double delta = 0.0;
  std::vector<DpStepTrace> trace;
};

// Per-step contraction coefficient in [0, 1] for the second term.
double rho(const DiffusionSchedule& sched, int t);

// (eps, delta)-DP for releasing m samples with the given release step.
// Requires s > n.
DpResult dp_delta(const DiffusionSchedule& sched, std::int64_t s, int n, double epsilon,
                  std::int64_t m, int release_step);

}  // namespace pdpaudit
