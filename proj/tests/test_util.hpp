#pragma once

// Shared helpers for the test suite. The oracle functions here recompute
// library quantities from their definitions by direct summation so the
// optimized implementations have something independent to agree with.

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "pdpaudit/dataset.hpp"

namespace testutil {

inline pdpaudit::CategoricalDataset make_dataset(const std::vector<std::vector<int>>& rows,
                                                 int k) {
  pdpaudit::CategoricalDataset data(static_cast<int>(rows.front().size()), k);
  for (const auto& r : rows) data.append_row(r);
  return data;
}

inline pdpaudit::CategoricalDataset random_dataset(std::mt19937& rng, std::int64_t s, int n,
                                                   int k) {
  pdpaudit::CategoricalDataset data(n, k);
  std::uniform_int_distribution<int> cat(0, k - 1);
  std::vector<int> row(n);
  for (std::int64_t r = 0; r < s; ++r) {
    for (int i = 0; i < n; ++i) row[i] = cat(rng);
    data.append_row(row);
  }
  return data;
}

inline int oracle_hamming(const std::vector<int>& a, const std::vector<int>& b) {
  int d = 0;
  for (size_t i = 0; i < a.size(); ++i) d += a[i] != b[i];
  return d;
}

// Distance histogram of data \ {skip_row} around target, one slot per
// distance 0..n.
inline std::vector<std::int64_t> oracle_counts(const pdpaudit::CategoricalDataset& data,
                                               const std::vector<int>& target,
                                               std::int64_t skip_row) {
  std::vector<std::int64_t> counts(data.n() + 1, 0);
  for (std::int64_t r = 0; r < data.size(); ++r) {
    if (r == skip_row) continue;
    ++counts[oracle_hamming(data.row_copy(r), target)];
  }
  return counts;
}

// sum over rows != skip_row of exp(-hamming * log_ratio)
inline double oracle_similarity(const pdpaudit::CategoricalDataset& data,
                                const std::vector<int>& target, double log_ratio,
                                std::int64_t skip_row) {
  double sum = 0.0;
  for (std::int64_t r = 0; r < data.size(); ++r) {
    if (r == skip_row) continue;
    sum += std::exp(-oracle_hamming(data.row_copy(r), target) * log_ratio);
  }
  return sum;
}

// same sum restricted to rows agreeing with target in column col
inline double oracle_restricted_similarity(const pdpaudit::CategoricalDataset& data,
                                           const std::vector<int>& target, int col,
                                           double log_ratio, std::int64_t skip_row) {
  double sum = 0.0;
  for (std::int64_t r = 0; r < data.size(); ++r) {
    if (r == skip_row) continue;
    if (data.cell(r, col) != target[col]) continue;
    sum += std::exp(-oracle_hamming(data.row_copy(r), target) * log_ratio);
  }
  return sum;
}

// Relative closeness check that also accepts two infinities of equal sign.
inline bool close_rel(double a, double b, double tol) {
  if (std::isinf(a) || std::isinf(b)) return a == b;
  double scale = std::max({std::fabs(a), std::fabs(b), 1e-300});
  return std::fabs(a - b) / scale <= tol;
}

}  // namespace testutil
