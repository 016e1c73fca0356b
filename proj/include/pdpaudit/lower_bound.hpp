#pragma once

#include <cstdint>
#include <utility>

#include "pdpaudit/dataset.hpp"
#include "pdpaudit/ddm.hpp"
#include "pdpaudit/schedule.hpp"

namespace pdpaudit {

// Unavoidable-leakage analysis on a hard two-column pair of datasets:
// V0 has s-1 copies of [0,0] and two copies of [1,1]; V1 drops one [1,1].
// The probability the model emits [1,1] separates the two and yields an
// explicit failure of (eps0, delta)-pDP for small delta.

// Reverse-posterior entries for one column at step t. c1/c2 condition on
// v_t equal to the clean value, c1t/c2t on v_t different from it.
struct TransitionConstants {
  double c1 = 0.0;   // v_{t-1} = v_t = v_0
  double c2 = 0.0;   // v_{t-1} != v_t = v_0
  double c1t = 0.0;  // v_{t-1} = v_t != v_0
  double c2t = 0.0;  // v_{t-1} = v_0 != v_t
};

TransitionConstants transition_constants(const DiffusionSchedule& sched, int t);

// (V0, V1) for the given s; n = 2, k = 2.
std::pair<CategoricalDataset, CategoricalDataset> worst_pair(std::int64_t s);

struct SimplifiedLowerBound {
  double S = 0.0;        // accumulated separation
  double epsilon0 = 0.0; // log(1 + S / (2 (1 + ratio_bar_1^2 Delta)))
  double delta_lb = 0.0; // S / s; pDP fails for every delta < delta_lb at eps0
};

// Closed-form recursion with the per-step gains and decay factors reduced
// to their leading terms.
SimplifiedLowerBound simplified_bound(const DiffusionSchedule& sched, std::int64_t s);

// Same recursion with the exact per-step gains G_t and decay F_t.
double full_recursion_bound(const DiffusionSchedule& sched, std::int64_t s);

struct ExactGap {
  double p0 = 0.0;  // probability V0-model emits [1,1]
  double p1 = 0.0;  // probability V1-model emits [1,1]
  double gap = 0.0; // p0 - p1
};

// Enumerates both chains (k^n = 4 states) and measures the separation at
// the release step.
ExactGap exact_gap(const DiffusionSchedule& sched, std::int64_t s, int release_step = 0);

}  // namespace pdpaudit
