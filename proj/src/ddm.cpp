#include "pdpaudit/ddm.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <thread>

namespace pdpaudit {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

double unit_double(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

int sample_categorical(const double* probs, int k, double u) {
  double acc = 0.0;
  for (int j = 0; j < k; ++j) {
    acc += probs[j];
    if (u < acc) return j;
  }
  return k - 1;  // guard against accumulated rounding
}

}  // namespace

double forward_marginal_prob(const std::vector<int>& v0, const std::vector<int>& vt,
                             const DiffusionSchedule& sched, int t) {
  const double lp = std::log(sched.mu_bar_plus(t));
  const double lm = std::log(sched.mu_bar_minus(t));
  const int n = static_cast<int>(v0.size());
  int d = hamming(v0.data(), vt.data(), n);
  return std::exp((n - d) * lp + d * lm);
}

std::vector<double> posterior(int v0, int vt, const DiffusionSchedule& sched, int t) {
  const int k = sched.k();
  // Bayes over the chain; at t = 1 the t-1 entries are exactly 1 and 0 and
  // the result collapses to a point mass at v0.
  const double mp = sched.mu_plus(t);
  const double mm = sched.mu_minus(t);
  const double bp_prev = sched.mu_bar_plus(t - 1);
  const double bm_prev = sched.mu_bar_minus(t - 1);
  const double den = (vt == v0) ? sched.mu_bar_plus(t) : sched.mu_bar_minus(t);
  std::vector<double> out(k);
  for (int l = 0; l < k; ++l) {
    out[l] = ((l == vt) ? mp : mm) * ((l == v0) ? bp_prev : bm_prev) / den;
  }
  return out;
}

std::vector<double> empirical_denoiser(const CategoricalDataset& data,
                                       const std::vector<int>& vt,
                                       const DiffusionSchedule& sched, int t) {
  const int n = data.n();
  const int k = data.k();
  const std::int64_t s = data.size();
  const double log_ratio = sched.log_ratio_bar(t);

  int min_d = n + 1;
  std::vector<int> dist(s);
  for (std::int64_t r = 0; r < s; ++r) {
    dist[r] = hamming(data.row(r), vt.data(), n);
    min_d = std::min(min_d, dist[r]);
  }

  std::vector<double> num(static_cast<std::size_t>(n) * k, 0.0);
  double den = 0.0;
  for (std::int64_t r = 0; r < s; ++r) {
    double w = std::exp(-static_cast<double>(dist[r] - min_d) * log_ratio);
    den += w;
    const int* v = data.row(r);
    for (int i = 0; i < n; ++i) num[static_cast<std::size_t>(i) * k + v[i]] += w;
  }
  for (double& x : num) x /= den;
  return num;
}

std::vector<double> reverse_step(const CategoricalDataset& data,
                                 const std::vector<int>& vt,
                                 const DiffusionSchedule& sched, int t) {
  const int n = data.n();
  const int k = data.k();
  std::vector<double> denoiser = empirical_denoiser(data, vt, sched, t);
  // posterior matrices reused across columns with the same observed value
  std::vector<std::vector<double>> post(k);
  std::vector<double> out(static_cast<std::size_t>(n) * k, 0.0);
  for (int i = 0; i < n; ++i) {
    const int vti = vt[i];
    if (post[vti].empty()) {
      post[vti].resize(static_cast<std::size_t>(k) * k);
      for (int l = 0; l < k; ++l) {
        std::vector<double> p = posterior(l, vti, sched, t);
        std::copy(p.begin(), p.end(), post[vti].begin() + static_cast<std::size_t>(l) * k);
      }
    }
    const double* pm = post[vti].data();
    const double* dn = denoiser.data() + static_cast<std::size_t>(i) * k;
    double* row = out.data() + static_cast<std::size_t>(i) * k;
    for (int l = 0; l < k; ++l) {
      for (int j = 0; j < k; ++j) row[j] += dn[l] * pm[l * k + j];
    }
  }
  return out;
}

CategoricalDataset generate(const CategoricalDataset& data, const DiffusionSchedule& sched,
                            std::int64_t num_samples, int release_step,
                            std::uint64_t seed, int threads) {
  const int n = data.n();
  const int k = data.k();
  const int T = sched.T();
  if (release_step < 0 || release_step > T) {
    throw std::invalid_argument("generate: release step out of range");
  }
  std::vector<int> buffer(static_cast<std::size_t>(num_samples) * n);

  auto run_sample = [&](std::int64_t idx) {
    std::mt19937_64 rng(splitmix64(seed ^ (0x632BE59BD9B4E019ull * (idx + 1))));
    std::vector<int> v(n);
    for (int i = 0; i < n; ++i) {
      v[i] = std::min(static_cast<int>(unit_double(rng) * k), k - 1);
    }
    for (int t = T; t > release_step; --t) {
      std::vector<double> dist = reverse_step(data, v, sched, t);
      for (int i = 0; i < n; ++i) {
        v[i] = sample_categorical(dist.data() + static_cast<std::size_t>(i) * k, k,
                                  unit_double(rng));
      }
    }
    std::copy(v.begin(), v.end(), buffer.begin() + static_cast<std::size_t>(idx) * n);
  };

  threads = std::max(1, threads);
  if (threads == 1 || num_samples < 2) {
    for (std::int64_t idx = 0; idx < num_samples; ++idx) run_sample(idx);
  } else {
    std::atomic<std::int64_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int w = 0; w < threads; ++w) {
      pool.emplace_back([&] {
        for (std::int64_t idx = next.fetch_add(1); idx < num_samples;
             idx = next.fetch_add(1)) {
          run_sample(idx);
        }
      });
    }
    for (auto& th : pool) th.join();
  }

  CategoricalDataset out(n, k);
  for (std::int64_t idx = 0; idx < num_samples; ++idx) {
    out.append_row(buffer.data() + static_cast<std::size_t>(idx) * n);
  }
  return out;
}

std::int64_t encode_state(const std::vector<int>& v, int k) {
  std::int64_t code = 0;
  for (int x : v) code = code * k + x;
  return code;
}

std::vector<int> decode_state(std::int64_t code, int n, int k) {
  std::vector<int> v(n);
  for (int i = n - 1; i >= 0; --i) {
    v[i] = static_cast<int>(code % k);
    code /= k;
  }
  return v;
}

namespace {

std::int64_t checked_state_count(int n, int k, std::int64_t max_states) {
  std::int64_t states = 1;
  for (int i = 0; i < n; ++i) {
    states *= k;
    if (states > max_states) {
      throw std::runtime_error("exact enumeration: k^n exceeds the state cap of " +
                               std::to_string(max_states));
    }
  }
  return states;
}

}  // namespace

ExactChainDistribution exact_generated_distribution(const CategoricalDataset& data,
                                                    const DiffusionSchedule& sched,
                                                    int release_step,
                                                    std::int64_t max_states) {
  const int n = data.n();
  const int k = data.k();
  const int T = sched.T();
  if (release_step < 0 || release_step > T) {
    throw std::invalid_argument("exact enumeration: release step out of range");
  }
  const std::int64_t states = checked_state_count(n, k, max_states);

  ExactChainDistribution out;
  out.n = n;
  out.k = k;
  out.release_step = release_step;
  out.prob.assign(states, 1.0 / states);

  std::vector<double> next(states);
  for (int t = T; t > release_step; --t) {
    std::fill(next.begin(), next.end(), 0.0);
    for (std::int64_t x = 0; x < states; ++x) {
      if (out.prob[x] == 0.0) continue;
      std::vector<int> vx = decode_state(x, n, k);
      std::vector<double> dist = reverse_step(data, vx, sched, t);
      for (std::int64_t y = 0; y < states; ++y) {
        std::vector<int> vy = decode_state(y, n, k);
        double p = 1.0;
        for (int i = 0; i < n; ++i) p *= dist[static_cast<std::size_t>(i) * k + vy[i]];
        next[y] += out.prob[x] * p;
      }
    }
    out.prob.swap(next);
  }
  return out;
}

double exact_pdp_delta(const ExactChainDistribution& p0, const ExactChainDistribution& p1,
                       double epsilon) {
  if (p0.prob.size() != p1.prob.size()) {
    throw std::invalid_argument("exact delta: distributions have different state spaces");
  }
  const double lift = std::exp(epsilon);
  double d01 = 0.0, d10 = 0.0;
  for (std::size_t x = 0; x < p0.prob.size(); ++x) {
    d01 += std::max(0.0, p0.prob[x] - lift * p1.prob[x]);
    d10 += std::max(0.0, p1.prob[x] - lift * p0.prob[x]);
  }
  return std::max(d01, d10);
}

namespace {

double kl_divergence(const double* a, const double* b, int k) {
  double acc = 0.0;
  for (int j = 0; j < k; ++j) {
    if (a[j] > 0.0) acc += a[j] * (std::log(a[j]) - std::log(b[j]));
  }
  return acc;
}

std::vector<double> forward_mixture(const CategoricalDataset& data,
                                    const DiffusionSchedule& sched, int t,
                                    std::int64_t states) {
  const std::int64_t s = data.size();
  std::vector<double> q(states, 0.0);
  for (std::int64_t x = 0; x < states; ++x) {
    std::vector<int> vx = decode_state(x, data.n(), data.k());
    double acc = 0.0;
    for (std::int64_t r = 0; r < s; ++r) {
      acc += forward_marginal_prob(data.row_copy(r), vx, sched, t);
    }
    q[x] = acc / s;
  }
  return q;
}

}  // namespace

double stepwise_symmetric_kl(const CategoricalDataset& d0, const CategoricalDataset& d1,
                             const DiffusionSchedule& sched, int t,
                             std::int64_t max_states) {
  if (d0.n() != d1.n() || d0.k() != d1.k()) {
    throw std::invalid_argument("stepwise divergence: datasets have different shapes");
  }
  const int n = d0.n();
  const int k = d0.k();
  const std::int64_t states = checked_state_count(n, k, max_states);
  std::vector<double> q0 = forward_mixture(d0, sched, t, states);
  std::vector<double> q1 = forward_mixture(d1, sched, t, states);

  double acc = 0.0;
  for (std::int64_t x = 0; x < states; ++x) {
    std::vector<int> vx = decode_state(x, n, k);
    std::vector<double> r0 = reverse_step(d0, vx, sched, t);
    std::vector<double> r1 = reverse_step(d1, vx, sched, t);
    for (int i = 0; i < n; ++i) {
      const double* a = r0.data() + static_cast<std::size_t>(i) * k;
      const double* b = r1.data() + static_cast<std::size_t>(i) * k;
      acc += q0[x] * kl_divergence(a, b, k) + q1[x] * kl_divergence(b, a, k);
    }
  }
  return acc;
}

double symmetric_kl(const ExactChainDistribution& p0, const ExactChainDistribution& p1) {
  if (p0.prob.size() != p1.prob.size()) {
    throw std::invalid_argument("symmetric divergence: distributions have different state spaces");
  }
  double acc = 0.0;
  for (std::size_t x = 0; x < p0.prob.size(); ++x) {
    double a = p0.prob[x], b = p1.prob[x];
    if (a > 0.0) acc += a * (std::log(a) - std::log(b));
    if (b > 0.0) acc += b * (std::log(b) - std::log(a));
  }
  return acc;
}

double kl_to_pdp(double tau, double epsilon) {
  return tau / (epsilon * -std::expm1(-epsilon));
}

}  // namespace pdpaudit
