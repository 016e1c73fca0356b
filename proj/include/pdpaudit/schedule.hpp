#pragma once

#include <cstddef>
#include <vector>

namespace pdpaudit {

// Coefficient schedule for the uniform categorical corruption kernel
//   Q_t = alpha_t * I + (1 - alpha_t) * 11^T / k.
//
// Per-step and cumulative kernel entries:
//   mu_plus(t)      = (1 + (k-1) alpha_t) / k     stay probability
//   mu_minus(t)     = (1 - alpha_t) / k           probability of each other category
//   mu_bar_plus(t)  = (1 + (k-1) alpha_bar_t) / k
//   mu_bar_minus(t) = (1 - alpha_bar_t) / k
//   ratio(t)        = mu_plus / mu_minus
//   ratio_bar(t)    = mu_bar_plus / mu_bar_minus
//
// alpha_bar_0 = 1, so mu_bar_minus(0) = 0 and ratio_bar(0) = +infinity.
// The infinity is deliberate: bound formulas take their analytic limit at
// t = 1 instead of dividing by it.
//
// alpha values are clamped into [1e-9, 1 - 1e-9] so that every derived
// quantity at t >= 1 stays finite and positive.
class DiffusionSchedule {
 public:
  static constexpr double kAlphaFloor = 1e-9;

  static DiffusionSchedule linear(int T, int k, double decay);
  static DiffusionSchedule sigmoid(int T, int k, double decay);
  static DiffusionSchedule cosine(int T, int k, double offset = 0.008);
  // Takes raw alpha values for t = 1..T (clamped like the builders).
  static DiffusionSchedule custom(int k, const std::vector<double>& alphas);

  int T() const { return static_cast<int>(alpha_.size()) - 1; }
  int k() const { return k_; }

  // t in [1, T]
  double alpha(int t) const { return alpha_[check_step(t)]; }
  double mu_plus(int t) const { return mu_from_alpha_plus(alpha_[check_step(t)]); }
  double mu_minus(int t) const { return mu_from_alpha_minus(alpha_[check_step(t)]); }
  double ratio(int t) const { return mu_plus(t) / mu_minus(t); }

  // t in [0, T]
  double alpha_bar(int t) const { return alpha_bar_[check_bar_step(t)]; }
  double mu_bar_plus(int t) const { return mu_from_alpha_plus(alpha_bar_[check_bar_step(t)]); }
  double mu_bar_minus(int t) const { return mu_from_alpha_minus(alpha_bar_[check_bar_step(t)]); }
  double ratio_bar(int t) const;      // +infinity at t = 0
  double log_ratio_bar(int t) const;  // +infinity at t = 0

  // Name of the builder that produced this schedule, for report metadata.
  const char* family() const { return family_; }

 private:
  DiffusionSchedule(int k, std::vector<double> alphas, const char* family);

  double mu_from_alpha_plus(double a) const { return (1.0 + (k_ - 1) * a) / k_; }
  double mu_from_alpha_minus(double a) const { return (1.0 - a) / k_; }
  int check_step(int t) const;
  int check_bar_step(int t) const;

  int k_;
  const char* family_;
  std::vector<double> alpha_;      // alpha_[t], t = 1..T; index 0 unused
  std::vector<double> alpha_bar_;  // alpha_bar_[t], t = 0..T
};

}  // namespace pdpaudit
