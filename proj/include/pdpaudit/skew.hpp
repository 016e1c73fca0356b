#pragma once

#include <cstdint>
#include <vector>

#include "pdpaudit/dataset.hpp"
#include "pdpaudit/pdp_bound.hpp"
#include "pdpaudit/schedule.hpp"

namespace pdpaudit {

// Behaviour of the bound on skewed product data: every column is the
// majority category with probability p, anything else uniformly. The target
// is the all-non-majority point, the hardest row to hide.

struct SkewParams {
  double p = 0.5;
  int n = 0;
  int k = 0;
};

// Expected per-row similarity factor per column,
//   tau_t = (1-p)/(k-1) + (mu_bar_t^- / mu_bar_t^+)(1 - (1-p)/(k-1)).
// Lies in ((1-p)/(k-1), 1].
double skew_tau(const SkewParams& params, const DiffusionSchedule& sched, int t);

// s -> infinity limit of psi_term * s^2 / n for the non-majority target:
// the empirical similarities concentrate at s*tau^eta and the dispersion
// term becomes an explicit function of tau. At t = 1 the ratio_bar(0)
// factors cancel symbolically and the finite limit is returned.
double asymptotic_psi(const SkewParams& params, const DiffusionSchedule& sched, int t);

// Closed-form sufficient radii (no dataset scan): smallest grid values
// satisfying the concentration conditions. Valid once s is large enough
// for the tail events to be negligible.
EtaResult sufficient_radii(const SkewParams& params, const DiffusionSchedule& sched,
                           int t, std::int64_t s);

struct SkewDesign {
  int n = 5;
  int k = 5;
  int T = 20;
  std::int64_t s = 1000;
  double decay = 1.0;      // linear schedule
  double epsilon = 10.0;
  std::int64_t m = 1;
  int release_step = 0;
  std::uint64_t seed = 1;
  int num_seeds = 1;
};

struct SkewPoint {
  double p = 0.0;
  double mean_delta = 0.0;      // averaged over seeds
  double mean_main_term = 0.0;  // sum over t of clamp * psi, averaged
  // per-step means over seeds, index t in [1, T]
  std::vector<double> radius_by_t;
  std::vector<double> psi_by_t;
  std::vector<double> main_by_t;
};

// Audits the non-majority point over freshly sampled skewed datasets for
// each p in the grid.
std::vector<SkewPoint> predict_leakage_vs_skew(const std::vector<double>& p_grid,
                                               const SkewDesign& design);

}  // namespace pdpaudit
