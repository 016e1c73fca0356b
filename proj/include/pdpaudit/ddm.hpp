#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pdpaudit/dataset.hpp"
#include "pdpaudit/schedule.hpp"

namespace pdpaudit {

// Forward corruption, the empirical reverse process, sampling, and exact
// enumeration oracles for small state spaces.

// q(v_t | v_0) for whole rows under the cumulative kernel at step t.
double forward_marginal_prob(const std::vector<int>& v0, const std::vector<int>& vt,
                             const DiffusionSchedule& sched, int t);

// q(v_{t-1}^i | v_t^i, v_0^i): length-k distribution over the previous value
// of one column. At t = 1 this is a point mass at v0.
std::vector<double> posterior(int v0, int vt, const DiffusionSchedule& sched, int t);

// Denoiser implied by perfect training on the empirical data distribution:
//   P(v_0^i = l | v_t) proportional to sum over rows v with v^i = l of
//   ratio_bar_t^{-hamming(v, v_t)}.
// Returns an n*k row-major matrix of per-column distributions. Computed in
// log space with max subtraction so large ratios cannot overflow.
std::vector<double> empirical_denoiser(const CategoricalDataset& data,
                                       const std::vector<int>& vt,
                                       const DiffusionSchedule& sched, int t);

// One reverse step: per-column distribution of v_{t-1} given v_t,
//   P(v_{t-1}^i) = sum_l posterior(l, v_t^i)_{v_{t-1}^i} * denoiser(i, l).
// n*k row-major.
std::vector<double> reverse_step(const CategoricalDataset& data,
                                 const std::vector<int>& vt,
                                 const DiffusionSchedule& sched, int t);

// Ancestral sampling: start uniform at t = T, run reverse steps down to
// t = release_step + 1, return the samples at the release step. Each sample
// uses its own counter-derived RNG stream, so results do not depend on
// how samples are scheduled across threads.
CategoricalDataset generate(const CategoricalDataset& data, const DiffusionSchedule& sched,
                            std::int64_t num_samples, int release_step,
                            std::uint64_t seed, int threads = 1);

// Exact distribution of the generated point over all k^n states.
struct ExactChainDistribution {
  int n = 0;
  int k = 0;
  int release_step = 0;
  // probabilities indexed by mixed-radix code (column 0 most significant)
  std::vector<double> prob;
};

std::int64_t encode_state(const std::vector<int>& v, int k);
std::vector<int> decode_state(std::int64_t code, int n, int k);

// Enumerates the full reverse chain. Throws std::runtime_error if k^n
// exceeds max_states.
ExactChainDistribution exact_generated_distribution(const CategoricalDataset& data,
                                                    const DiffusionSchedule& sched,
                                                    int release_step,
                                                    std::int64_t max_states = 4096);

// max over both directions of sum_x (P_i(x) - e^eps P_j(x))_+
double exact_pdp_delta(const ExactChainDistribution& p0, const ExactChainDistribution& p1,
                       double epsilon);

// Per-step symmetric divergence between the reverse processes trained on two
// datasets, summed over columns:
//   sum_{v_t} [ q0(v_t) KL(rev0 || rev1) + q1(v_t) KL(rev1 || rev0) ]
// where q_j is the forward marginal of dataset j at step t and rev_j the
// per-column reverse-step distribution. Enumerates v_t, so the same
// max_states cap applies.
double stepwise_symmetric_kl(const CategoricalDataset& d0, const CategoricalDataset& d1,
                             const DiffusionSchedule& sched, int t,
                             std::int64_t max_states = 4096);

// Symmetric KL between two enumerated output distributions.
double symmetric_kl(const ExactChainDistribution& p0, const ExactChainDistribution& p1);

// KL-to-delta conversion: tau / (eps (1 - e^{-eps})).
double kl_to_pdp(double tau, double epsilon);

}  // namespace pdpaudit
