#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace pdpaudit {

// Dense categorical dataset: s rows, n columns, every cell in [0, k).
// k is shared across columns (the maximum per-column cardinality after
// ingestion; smaller columns simply never use the top codes).
class CategoricalDataset {
 public:
  CategoricalDataset() = default;
  CategoricalDataset(int n, int k) : n_(n), k_(k) {}

  int n() const { return n_; }
  int k() const { return k_; }
  std::int64_t size() const { return n_ == 0 ? 0 : static_cast<std::int64_t>(cells_.size()) / n_; }

  const int* row(std::int64_t r) const { return cells_.data() + r * n_; }
  int cell(std::int64_t r, int i) const { return cells_[r * n_ + i]; }

  void append_row(const std::vector<int>& values);
  void append_row(const int* values);
  // Removes one occurrence of row r (duplicates elsewhere are kept).
  CategoricalDataset without_row(std::int64_t r) const;

  std::vector<int> row_copy(std::int64_t r) const;

  // FNV-1a over dimensions and cell values, for report provenance.
  std::uint64_t fingerprint() const;

 private:
  int n_ = 0;
  int k_ = 0;
  std::vector<int> cells_;  // row-major
};

int hamming(const int* a, const int* b, int n);

// Column metadata recorded while ingesting a CSV.
struct ColumnCodec {
  std::string name;
  bool numeric = false;
  // categorical: code -> original string, sorted order
  std::vector<std::string> categories;
  // numeric: right bin edges (equal-frequency quantiles); code = first edge >= value
  std::vector<double> bin_edges;
  bool has_missing_code = false;  // last code stands for a missing cell

  // Inverse of the ingestion map: the original category, the bin's right edge
  // (shortest round-trip form), or "" for the missing code. Codes the column
  // never uses (possible in partially denoised samples) come back as the bare
  // integer.
  std::string decode(int code) const;
};

struct IngestOptions {
  int max_bins = 5;
  bool allow_missing = false;  // otherwise a missing cell is a hard error
};

struct IngestResult {
  CategoricalDataset data;
  std::vector<ColumnCodec> codecs;
};

// Reads a CSV with a header row. String columns become dense codes in sorted
// order of the distinct values; numeric columns are quantile-binned into at
// most max_bins equal-frequency bins. Throws std::runtime_error on ragged
// rows or, without allow_missing, on empty cells.
IngestResult ingest_csv(const std::string& path, const IngestOptions& opts = {});

std::string codecs_to_json(const std::vector<ColumnCodec>& codecs);

// Distance profile of one target row against a dataset with that row removed.
// Everything the radius selection needs is precomputed here once per target:
// distance histogram, cumulative counts, and per-column histograms restricted
// to rows that agree with the target in that column.
class NeighborTable {
 public:
  // Profile of dataset \ {target_row} around the removed row.
  NeighborTable(const CategoricalDataset& data, std::int64_t target_row);
  // Same profile for an external target point (nothing is removed).
  NeighborTable(const CategoricalDataset& data, const std::vector<int>& target);

  int n() const { return n_; }
  std::int64_t s() const { return s_; }  // rows counted (|V| - 1 resp. |V|)

  // N_eta: rows at Hamming distance <= eta. eta is clamped into [0, n].
  std::int64_t cumulative(int eta) const;
  // rows at distance exactly d
  std::int64_t count_at(int d) const { return counts_[d]; }
  // rows agreeing with the target in column i, at distance exactly d
  std::int64_t restricted_count_at(int i, int d) const { return restricted_[i][d]; }
  // total rows agreeing with the target in column i
  std::int64_t restricted_total(int i) const;

  // sum over counted rows v of ratio^{-hamming(v, target)}
  double similarity(double log_ratio) const;
  // same sum over rows agreeing with the target in column i
  double restricted_similarity(int i, double log_ratio) const;
  // log of the sums above, stable when the plain value underflows
  double log_similarity(double log_ratio) const;
  double log_restricted_similarity(int i, double log_ratio) const;

 private:
  void build(const CategoricalDataset& data, const int* target, std::int64_t skip_row);

  int n_ = 0;
  std::int64_t s_ = 0;
  std::vector<std::int64_t> counts_;                   // [0..n]
  std::vector<std::int64_t> cum_;                      // [0..n]
  std::vector<std::vector<std::int64_t>> restricted_;  // [n][0..n]
};

// sum over rows of ratio^{-hamming(row, target)} without building a table
double similarity(const CategoricalDataset& data, const std::vector<int>& target,
                  double ratio);

// Skewed product sampler: each column takes the majority category with
// probability p and otherwise one of the remaining k-1 uniformly.
// Requires p in [1/k, 1).
CategoricalDataset sample_skewed(std::int64_t s, int n, int k, double p,
                                 int majority_category, std::uint64_t seed);

// The point whose every column avoids the majority category (smallest
// non-majority code in each column).
std::vector<int> non_majority_point(int n, int k, int majority_category);

}  // namespace pdpaudit
