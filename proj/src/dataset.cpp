#include "pdpaudit/dataset.hpp"

#include <algorithm>
#include <cassert>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace pdpaudit {

void CategoricalDataset::append_row(const std::vector<int>& values) {
  assert(static_cast<int>(values.size()) == n_);
  cells_.insert(cells_.end(), values.begin(), values.end());
}

void CategoricalDataset::append_row(const int* values) {
  cells_.insert(cells_.end(), values, values + n_);
}

CategoricalDataset CategoricalDataset::without_row(std::int64_t r) const {
  CategoricalDataset out(n_, k_);
  out.cells_.reserve(cells_.size() - n_);
  const std::int64_t s = size();
  for (std::int64_t i = 0; i < s; ++i) {
    if (i == r) continue;
    out.append_row(row(i));
  }
  return out;
}

std::vector<int> CategoricalDataset::row_copy(std::int64_t r) const {
  return std::vector<int>(row(r), row(r) + n_);
}

std::uint64_t CategoricalDataset::fingerprint() const {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](std::uint64_t x) {
    for (int b = 0; b < 8; ++b) {
      h ^= (x >> (8 * b)) & 0xff;
      h *= 1099511628211ull;
    }
  };
  mix(static_cast<std::uint64_t>(n_));
  mix(static_cast<std::uint64_t>(k_));
  for (int c : cells_) mix(static_cast<std::uint64_t>(c));
  return h;
}

int hamming(const int* a, const int* b, int n) {
  int d = 0;
  for (int i = 0; i < n; ++i) d += (a[i] != b[i]);
  return d;
}

// ---------------------------------------------------------------------------
// CSV ingestion

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (char ch : line) {
    if (ch == '"') {
      quoted = !quoted;
    } else if (ch == ',' && !quoted) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  out.push_back(trim(cur));
  return out;
}

bool parse_double(const std::string& s, double& out) {
  const char* b = s.data();
  const char* e = b + s.size();
  auto res = std::from_chars(b, e, out);
  return res.ec == std::errc() && res.ptr == e;
}

}  // namespace

IngestResult ingest_csv(const std::string& path, const IngestOptions& opts) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);

  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path + ": empty file");
  std::vector<std::string> header = split_csv_line(line);
  const int n = static_cast<int>(header.size());

  std::vector<std::vector<std::string>> cols(n);
  std::int64_t row_no = 1;
  while (std::getline(in, line)) {
    ++row_no;
    if (line.empty() && in.peek() == EOF) break;  // trailing newline
    std::vector<std::string> fields = split_csv_line(line);
    if (static_cast<int>(fields.size()) != n) {
      throw std::runtime_error(path + ": row " + std::to_string(row_no) + " has " +
                               std::to_string(fields.size()) + " fields, expected " +
                               std::to_string(n));
    }
    for (int i = 0; i < n; ++i) {
      if (fields[i].empty() && !opts.allow_missing) {
        throw std::runtime_error(path + ": row " + std::to_string(row_no) + " column " +
                                 header[i] + " is missing");
      }
      cols[i].push_back(std::move(fields[i]));
    }
  }
  const std::int64_t s = static_cast<std::int64_t>(cols.empty() ? 0 : cols[0].size());
  if (s == 0) throw std::runtime_error(path + ": no data rows");

  IngestResult result;
  result.codecs.resize(n);
  std::vector<std::vector<int>> codes(n, std::vector<int>(s));
  int k = 2;

  for (int i = 0; i < n; ++i) {
    ColumnCodec& codec = result.codecs[i];
    codec.name = header[i];

    bool numeric = true;
    double tmp;
    for (const std::string& v : cols[i]) {
      if (v.empty()) continue;
      if (!parse_double(v, tmp)) {
        numeric = false;
        break;
      }
    }
    codec.numeric = numeric;

    int missing_code = -1;
    if (numeric) {
      std::vector<double> values;
      values.reserve(s);
      for (const std::string& v : cols[i]) {
        if (!v.empty()) {
          parse_double(v, tmp);
          values.push_back(tmp);
        }
      }
      if (values.empty()) throw std::runtime_error(path + ": column " + header[i] + " is all missing");
      std::sort(values.begin(), values.end());
      // equal-frequency right edges; duplicates collapse into one bin
      for (int b = 1; b <= opts.max_bins; ++b) {
        std::size_t idx = values.size() * b / opts.max_bins;
        if (idx == 0) continue;  // fewer values than bins
        double edge = values[std::min(idx, values.size()) - 1];
        if (codec.bin_edges.empty() || edge > codec.bin_edges.back()) {
          codec.bin_edges.push_back(edge);
        }
      }
      int cardinality = static_cast<int>(codec.bin_edges.size());
      if (opts.allow_missing) {
        missing_code = cardinality;
        codec.has_missing_code = true;
        ++cardinality;
      }
      for (std::int64_t r = 0; r < s; ++r) {
        const std::string& v = cols[i][r];
        if (v.empty()) {
          codes[i][r] = missing_code;
        } else {
          parse_double(v, tmp);
          auto it = std::lower_bound(codec.bin_edges.begin(), codec.bin_edges.end(), tmp);
          codes[i][r] = static_cast<int>(it - codec.bin_edges.begin());
        }
      }
      k = std::max(k, cardinality);
    } else {
      std::vector<std::string> uniq;
      for (const std::string& v : cols[i]) {
        if (!v.empty()) uniq.push_back(v);
      }
      std::sort(uniq.begin(), uniq.end());
      uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
      codec.categories = uniq;
      int cardinality = static_cast<int>(uniq.size());
      if (opts.allow_missing) {
        missing_code = cardinality;
        codec.has_missing_code = true;
        ++cardinality;
      }
      std::unordered_map<std::string, int> lookup;
      for (int c = 0; c < static_cast<int>(uniq.size()); ++c) lookup[uniq[c]] = c;
      for (std::int64_t r = 0; r < s; ++r) {
        const std::string& v = cols[i][r];
        codes[i][r] = v.empty() ? missing_code : lookup[v];
      }
      k = std::max(k, cardinality);
    }
  }

  result.data = CategoricalDataset(n, k);
  std::vector<int> rowbuf(n);
  for (std::int64_t r = 0; r < s; ++r) {
    for (int i = 0; i < n; ++i) rowbuf[i] = codes[i][r];
    result.data.append_row(rowbuf);
  }
  return result;
}

std::string ColumnCodec::decode(int code) const {
  const int cardinality =
      static_cast<int>(numeric ? bin_edges.size() : categories.size());
  if (code >= 0 && code < cardinality) {
    if (!numeric) return categories[code];
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, bin_edges[code]);
    return std::string(buf, res.ptr);
  }
  if (has_missing_code && code == cardinality) return "";
  return std::to_string(code);
}

std::string codecs_to_json(const std::vector<ColumnCodec>& codecs) {
  std::ostringstream out;
  out << "{\"columns\":[";
  for (std::size_t i = 0; i < codecs.size(); ++i) {
    const ColumnCodec& c = codecs[i];
    if (i) out << ",";
    out << "{\"name\":\"" << c.name << "\",\"kind\":\"" << (c.numeric ? "numeric" : "categorical")
        << "\",\"missing_code\":" << (c.has_missing_code ? "true" : "false");
    if (c.numeric) {
      out << ",\"bin_edges\":[";
      for (std::size_t j = 0; j < c.bin_edges.size(); ++j) {
        if (j) out << ",";
        out << c.bin_edges[j];
      }
      out << "]";
    } else {
      out << ",\"categories\":[";
      for (std::size_t j = 0; j < c.categories.size(); ++j) {
        if (j) out << ",";
        out << "\"" << c.categories[j] << "\"";
      }
      out << "]";
    }
    out << "}";
  }
  out << "]}";
  return out.str();
}

// ---------------------------------------------------------------------------
// Neighbour tables

NeighborTable::NeighborTable(const CategoricalDataset& data, std::int64_t target_row) {
  build(data, data.row(target_row), target_row);
}

NeighborTable::NeighborTable(const CategoricalDataset& data, const std::vector<int>& target) {
  if (static_cast<int>(target.size()) != data.n()) {
    throw std::invalid_argument("neighbour table: target arity mismatch");
  }
  build(data, target.data(), -1);
}

void NeighborTable::build(const CategoricalDataset& data, const int* target,
                          std::int64_t skip_row) {
  n_ = data.n();
  counts_.assign(n_ + 1, 0);
  restricted_.assign(n_, std::vector<std::int64_t>(n_ + 1, 0));
  const std::int64_t total = data.size();
  for (std::int64_t r = 0; r < total; ++r) {
    if (r == skip_row) continue;
    const int* v = data.row(r);
    int d = hamming(v, target, n_);
    ++counts_[d];
    for (int i = 0; i < n_; ++i) {
      if (v[i] == target[i]) ++restricted_[i][d];
    }
  }
  cum_.assign(n_ + 1, 0);
  std::int64_t acc = 0;
  for (int d = 0; d <= n_; ++d) {
    acc += counts_[d];
    cum_[d] = acc;
  }
  s_ = acc;
}

std::int64_t NeighborTable::cumulative(int eta) const {
  if (eta < 0) return 0;
  return cum_[std::min(eta, n_)];
}

std::int64_t NeighborTable::restricted_total(int i) const {
  std::int64_t acc = 0;
  for (int d = 0; d <= n_; ++d) acc += restricted_[i][d];
  return acc;
}

namespace {

double histogram_similarity(const std::vector<std::int64_t>& counts, double log_ratio) {
  double acc = 0.0;
  for (std::size_t d = 0; d < counts.size(); ++d) {
    if (counts[d]) acc += counts[d] * std::exp(-static_cast<double>(d) * log_ratio);
  }
  return acc;
}

double histogram_log_similarity(const std::vector<std::int64_t>& counts, double log_ratio) {
  // logsumexp over log(count_d) - d * log_ratio
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t d = 0; d < counts.size(); ++d) {
    if (counts[d]) best = std::max(best, std::log(static_cast<double>(counts[d])) - d * log_ratio);
  }
  if (!std::isfinite(best)) return -std::numeric_limits<double>::infinity();
  double acc = 0.0;
  for (std::size_t d = 0; d < counts.size(); ++d) {
    if (counts[d]) {
      acc += std::exp(std::log(static_cast<double>(counts[d])) - d * log_ratio - best);
    }
  }
  return best + std::log(acc);
}

}  // namespace

double NeighborTable::similarity(double log_ratio) const {
  return histogram_similarity(counts_, log_ratio);
}

double NeighborTable::restricted_similarity(int i, double log_ratio) const {
  return histogram_similarity(restricted_[i], log_ratio);
}

double NeighborTable::log_similarity(double log_ratio) const {
  return histogram_log_similarity(counts_, log_ratio);
}

double NeighborTable::log_restricted_similarity(int i, double log_ratio) const {
  return histogram_log_similarity(restricted_[i], log_ratio);
}

double similarity(const CategoricalDataset& data, const std::vector<int>& target,
                  double ratio) {
  const double log_ratio = std::log(ratio);
  const std::int64_t s = data.size();
  double acc = 0.0;
  for (std::int64_t r = 0; r < s; ++r) {
    acc += std::exp(-hamming(data.row(r), target.data(), data.n()) * log_ratio);
  }
  return acc;
}

// ---------------------------------------------------------------------------
// Skewed product sampling

namespace {

double unit_double(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace

CategoricalDataset sample_skewed(std::int64_t s, int n, int k, double p,
                                 int majority_category, std::uint64_t seed) {
  if (p < 1.0 / k - 1e-12 || p >= 1.0) {
    throw std::invalid_argument("sample_skewed: p must lie in [1/k, 1)");
  }
  if (majority_category < 0 || majority_category >= k) {
    throw std::invalid_argument("sample_skewed: majority category out of range");
  }
  CategoricalDataset data(n, k);
  std::mt19937_64 rng(seed);
  std::vector<int> rowbuf(n);
  for (std::int64_t r = 0; r < s; ++r) {
    for (int i = 0; i < n; ++i) {
      if (unit_double(rng) < p) {
        rowbuf[i] = majority_category;
      } else {
        int other = static_cast<int>(unit_double(rng) * (k - 1));
        other = std::min(other, k - 2);
        rowbuf[i] = other >= majority_category ? other + 1 : other;
      }
    }
    data.append_row(rowbuf);
  }
  return data;
}

std::vector<int> non_majority_point(int n, int k, int majority_category) {
  return std::vector<int>(n, majority_category == 0 ? 1 : 0);
}

}  // namespace pdpaudit
