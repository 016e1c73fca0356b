#include "pdpaudit/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace pdpaudit {

namespace {

double clamp_alpha(double a) {
  return std::clamp(a, DiffusionSchedule::kAlphaFloor, 1.0 - DiffusionSchedule::kAlphaFloor);
}

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

DiffusionSchedule::DiffusionSchedule(int k, std::vector<double> alphas, const char* family)
    : k_(k), family_(family) {
  if (k < 2) throw std::invalid_argument("schedule: k must be at least 2");
  if (alphas.empty()) throw std::invalid_argument("schedule: T must be at least 1");
  alpha_.resize(alphas.size() + 1);
  alpha_[0] = std::numeric_limits<double>::quiet_NaN();  // t = 0 has no per-step alpha
  alpha_bar_.resize(alphas.size() + 1);
  alpha_bar_[0] = 1.0;
  for (std::size_t t = 1; t < alpha_.size(); ++t) {
    alpha_[t] = clamp_alpha(alphas[t - 1]);
    alpha_bar_[t] = alpha_bar_[t - 1] * alpha_[t];
  }
}

DiffusionSchedule DiffusionSchedule::linear(int T, int k, double decay) {
  if (T < 1) throw std::invalid_argument("schedule: T must be at least 1");
  std::vector<double> a(T);
  for (int t = 1; t <= T; ++t) a[t - 1] = 1.0 - decay * t / T;
  return DiffusionSchedule(k, std::move(a), "linear");
}

DiffusionSchedule DiffusionSchedule::sigmoid(int T, int k, double decay) {
  if (T < 1) throw std::invalid_argument("schedule: T must be at least 1");
  const double top = logistic(3.0 * decay);
  std::vector<double> a(T);
  for (int t = 1; t <= T; ++t) {
    a[t - 1] = (top - logistic(3.0 * t / T * decay)) / (top - 0.5);
  }
  return DiffusionSchedule(k, std::move(a), "sigmoid");
}

DiffusionSchedule DiffusionSchedule::cosine(int T, int k, double offset) {
  if (T < 1) throw std::invalid_argument("schedule: T must be at least 1");
  auto f = [&](double t) {
    double c = std::cos((t / T + offset) / (1.0 + offset) * (M_PI / 2.0));
    return c * c;
  };
  // The builder prescribes the cumulative product; per-step alphas are the
  // successive ratios, re-accumulated after clamping.
  std::vector<double> a(T);
  double prev = 1.0;
  for (int t = 1; t <= T; ++t) {
    double bar = f(static_cast<double>(t)) / f(0.0);
    a[t - 1] = bar / prev;
    prev = bar;
  }
  return DiffusionSchedule(k, std::move(a), "cosine");
}

DiffusionSchedule DiffusionSchedule::custom(int k, const std::vector<double>& alphas) {
  return DiffusionSchedule(k, alphas, "custom");
}

double DiffusionSchedule::ratio_bar(int t) const {
  check_bar_step(t);
  if (t == 0) return std::numeric_limits<double>::infinity();
  return mu_bar_plus(t) / mu_bar_minus(t);
}

double DiffusionSchedule::log_ratio_bar(int t) const {
  check_bar_step(t);
  if (t == 0) return std::numeric_limits<double>::infinity();
  return std::log(mu_bar_plus(t)) - std::log(mu_bar_minus(t));
}

int DiffusionSchedule::check_step(int t) const {
  if (t < 1 || t > T()) throw std::out_of_range("schedule: step index out of range");
  return t;
}

int DiffusionSchedule::check_bar_step(int t) const {
  if (t < 0 || t > T()) throw std::out_of_range("schedule: step index out of range");
  return t;
}

}  // namespace pdpaudit
