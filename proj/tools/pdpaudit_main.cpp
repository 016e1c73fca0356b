// pdpaudit: per-instance privacy bounds for synthetic categorical data.
//
// Subcommands:
//   audit        per-row leakage bounds for a CSV dataset
//   curate       iterative removal of the most exposed rows
//   generate     sample synthetic rows from the fitted reverse chain
//   lower-bound  unavoidable leakage on the hard two-column pair
//   dp           dataset-free worst-case bound
//   synth        leakage of a planted point against class skew
//   schedule     print the derived schedule table
//
// Exit codes: 0 success, 1 usage, 2 bad input, 3 non-finite results under
// --strict. Every subcommand is deterministic given its flags and seed.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "pdpaudit/dataset.hpp"
#include "pdpaudit/ddm.hpp"
#include "pdpaudit/dp_bound.hpp"
#include "pdpaudit/lower_bound.hpp"
#include "pdpaudit/pdp_bound.hpp"
#include "pdpaudit/report.hpp"
#include "pdpaudit/schedule.hpp"
#include "pdpaudit/skew.hpp"

namespace {

using json = nlohmann::ordered_json;

constexpr int kExitUsage = 1;
constexpr int kExitInput = 2;
constexpr int kExitNumeric = 3;

struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Flags that steer execution or output routing without affecting report
// content. Kept out of the embedded flag string so reruns with a different
// thread count or destination produce identical bytes.
bool is_operational_flag(const std::string& arg) {
  static const char* names[] = {"--threads", "--out", "--trace-csv", "--codec-out"};
  for (const char* name : names) {
    if (arg == name) return true;
    if (arg.rfind(std::string(name) + "=", 0) == 0) return true;
  }
  return false;
}

std::string join_flags(int argc, char** argv) {
  std::string out;
  for (int i = 1; i < argc; ++i) {
    std::string arg = argv[i];
    if (is_operational_flag(arg)) {
      if (arg.find('=') == std::string::npos && i + 1 < argc) ++i;
      continue;
    }
    if (!out.empty()) out += ' ';
    out += arg;
  }
  return out;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Non-finite doubles have no JSON literal; encode them as strings the same
// way the report module does.
json json_real(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "NaN";
  return v > 0 ? "Infinity" : "-Infinity";
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot open output file: " + path);
  out << text;
  if (!out) throw InputError("write failed: " + path);
}

std::vector<double> parse_double_list(const std::string& text, const char* what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    try {
      size_t pos = 0;
      double v = std::stod(item, &pos);
      while (pos < item.size() && std::isspace(static_cast<unsigned char>(item[pos]))) ++pos;
      if (pos != item.size()) throw std::invalid_argument(item);
      out.push_back(v);
    } catch (const std::exception&) {
      throw InputError(std::string("bad value in ") + what + ": '" + item + "'");
    }
  }
  if (out.empty()) throw InputError(std::string(what) + " is empty");
  return out;
}

// -------- schedule construction shared by every subcommand --------

struct ScheduleArgs {
  std::string family = "linear";
  int T = 10;
  double decay = 1.0;
  double offset = 0.008;
  std::string alpha_file;
};

void add_schedule_options(CLI::App* cmd, ScheduleArgs* a) {
  cmd->add_option("--schedule", a->family, "Schedule family: linear, sigmoid, cosine, custom")
      ->default_val(a->family);
  cmd->add_option("-T,--steps", a->T, "Number of diffusion steps")->default_val(a->T);
  cmd->add_option("--decay", a->decay, "Decay parameter for linear and sigmoid")
      ->default_val(a->decay);
  cmd->add_option("--offset", a->offset, "Offset for the cosine family")->default_val(a->offset);
  cmd->add_option("--alpha-file", a->alpha_file,
                  "File with one alpha per line, t = 1..T (family custom)");
}

std::vector<double> read_alpha_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open alpha file: " + path);
  std::vector<double> alphas;
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
    if (line.empty()) continue;
    try {
      alphas.push_back(std::stod(line));
    } catch (const std::exception&) {
      throw InputError("bad alpha value: '" + line + "'");
    }
  }
  if (alphas.empty()) throw InputError("alpha file is empty: " + path);
  return alphas;
}

pdpaudit::DiffusionSchedule build_schedule(const ScheduleArgs& a, int k) {
  if (a.family == "linear") return pdpaudit::DiffusionSchedule::linear(a.T, k, a.decay);
  if (a.family == "sigmoid") return pdpaudit::DiffusionSchedule::sigmoid(a.T, k, a.decay);
  if (a.family == "cosine") return pdpaudit::DiffusionSchedule::cosine(a.T, k, a.offset);
  if (a.family == "custom") {
    if (a.alpha_file.empty()) throw InputError("family custom needs --alpha-file");
    return pdpaudit::DiffusionSchedule::custom(k, read_alpha_file(a.alpha_file));
  }
  throw InputError("unknown schedule family: " + a.family);
}

// Two columns per line, gamma_t and gamma_tilde_t, T data rows. A header
// line is skipped if the first field is not numeric.
void read_gamma_file(const std::string& path, int T, std::vector<double>* gamma,
                     std::vector<double>* gamma_tilde) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open gamma file: " + path);
  gamma->assign(1, 0.0);
  gamma_tilde->assign(1, 0.0);
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string f0, f1;
    std::getline(ss, f0, ',');
    std::getline(ss, f1, ',');
    double g, gt;
    try {
      g = std::stod(f0);
      gt = std::stod(f1);
    } catch (const std::exception&) {
      if (first) {
        first = false;
        continue;  // header
      }
      throw InputError("bad gamma line: '" + line + "'");
    }
    first = false;
    gamma->push_back(g);
    gamma_tilde->push_back(gt);
  }
  if (static_cast<int>(gamma->size()) != T + 1)
    throw InputError("gamma file must have exactly T = " + std::to_string(T) + " rows");
}

pdpaudit::BoundMode parse_mode(const std::string& mode) {
  if (mode == "main") return pdpaudit::BoundMode::kMain;
  if (mode == "relaxed") return pdpaudit::BoundMode::kRelaxed;
  throw InputError("unknown mode: " + mode + " (expected main or relaxed)");
}

// -------- audit --------

struct AuditArgs {
  std::string csv;
  ScheduleArgs sched;
  double epsilon = 1.0;
  std::int64_t m = 1;
  int release_step = 0;
  std::string mode = "main";
  bool literal_main_text = false;
  std::string gamma_file;
  int max_bins = 5;
  bool allow_missing = false;
  int threads = 1;
  std::string out;
  std::string trace_csv;
  std::string codec_out;
  bool strict = false;
};

void add_audit_options(CLI::App* cmd, AuditArgs* a) {
  cmd->add_option("csv", a->csv, "Input CSV with a header row")->required();
  add_schedule_options(cmd, &a->sched);
  cmd->add_option("--epsilon", a->epsilon, "Privacy parameter epsilon")->default_val(a->epsilon);
  cmd->add_option("-m,--samples", a->m, "Number of released synthetic samples")
      ->default_val(a->m);
  cmd->add_option("--release-step", a->release_step, "Reverse step at which samples are taken")
      ->default_val(a->release_step);
  cmd->add_option("--mode", a->mode, "Radius selection mode: main or relaxed")
      ->default_val(a->mode);
  cmd->add_flag("--literal-main-text", a->literal_main_text,
                "Use the looser single-inequality radius fallback");
  cmd->add_option("--gamma-file", a->gamma_file,
                  "CSV with per-step approximation budgets gamma_t,gamma_tilde_t");
  cmd->add_option("--max-bins", a->max_bins, "Quantile bins for numeric columns")
      ->default_val(a->max_bins);
  cmd->add_flag("--allow-missing", a->allow_missing,
                "Treat empty cells as an extra category instead of failing");
  cmd->add_option("--threads", a->threads, "Worker threads")->default_val(a->threads);
  cmd->add_option("--out", a->out, "Report JSON path (default stdout)");
  cmd->add_option("--trace-csv", a->trace_csv, "Also write the per-step trace as CSV");
  cmd->add_option("--codec-out", a->codec_out, "Write the column codecs as JSON");
  cmd->add_flag("--strict", a->strict, "Exit 3 if any bound is non-finite");
}

pdpaudit::BoundOptions bound_options(const AuditArgs& a, int T) {
  pdpaudit::BoundOptions opts;
  opts.mode = parse_mode(a.mode);
  opts.literal_main_text = a.literal_main_text;
  if (!a.gamma_file.empty()) read_gamma_file(a.gamma_file, T, &opts.gamma, &opts.gamma_tilde);
  return opts;
}

pdpaudit::ReportMeta make_meta(const pdpaudit::DiffusionSchedule& sched,
                               const pdpaudit::CategoricalDataset& data, const AuditArgs& a,
                               const std::string& flags) {
  pdpaudit::ReportMeta meta;
  meta.schedule_family = sched.family();
  meta.T = sched.T();
  meta.k = data.k();
  meta.n = data.n();
  meta.s = data.size();
  meta.epsilon = a.epsilon;
  meta.m = a.m;
  meta.release_step = a.release_step;
  meta.mode = a.mode;
  meta.literal_main_text = a.literal_main_text;
  meta.dataset_fingerprint = data.fingerprint();
  meta.flags = flags;
  return meta;
}

bool any_non_finite(const std::vector<pdpaudit::PointAudit>& points) {
  for (const auto& p : points)
    if (!std::isfinite(p.delta)) return true;
  return false;
}

std::string trace_to_csv(const std::vector<pdpaudit::PointAudit>& points) {
  std::string out = "row,t,eta,c_star,radius,psi_term,clamp,second_term,step_total\n";
  for (const auto& p : points) {
    for (const auto& tr : p.trace) {
      out += std::to_string(p.row);
      out += ',' + std::to_string(tr.t);
      out += ',' + std::to_string(tr.eta);
      out += ',' + format_double(tr.c_star);
      out += ',' + std::to_string(tr.radius);
      out += ',' + format_double(tr.psi_term);
      out += ',' + format_double(tr.clamp);
      out += ',' + format_double(tr.second_term);
      out += ',' + format_double(tr.step_total);
      out += '\n';
    }
  }
  return out;
}

int cmd_audit(const AuditArgs& a, const std::string& flags) {
  pdpaudit::IngestOptions iopts;
  iopts.max_bins = a.max_bins;
  iopts.allow_missing = a.allow_missing;
  pdpaudit::IngestResult ingest = pdpaudit::ingest_csv(a.csv, iopts);

  pdpaudit::DiffusionSchedule sched = build_schedule(a.sched, ingest.data.k());
  pdpaudit::BoundOptions opts = bound_options(a, sched.T());

  pdpaudit::PdpReport report;
  report.meta = make_meta(sched, ingest.data, a, flags);
  report.points = pdpaudit::audit_all(ingest.data, sched, a.epsilon, a.m, a.release_step,
                                      opts, a.threads);
  pdpaudit::sort_points(report);

  write_text(a.out, pdpaudit::report_to_json(report) + "\n");
  if (!a.trace_csv.empty()) write_text(a.trace_csv, trace_to_csv(report.points));
  if (!a.codec_out.empty())
    write_text(a.codec_out, pdpaudit::codecs_to_json(ingest.codecs) + "\n");

  if (a.strict && any_non_finite(report.points)) {
    std::cerr << "pdpaudit: non-finite bounds present\n";
    return kExitNumeric;
  }
  return 0;
}

// -------- curate --------

// One curation round removes enough of the previously most exposed rows to
// reach the next removal ratio (relative to the original size), then the
// whole audit is recomputed on the reduced dataset.
struct CurationRound {
  double ratio = 0.0;
  std::int64_t size = 0;
  double mean_delta = 0.0;
  double max_delta = 0.0;
};

std::uint64_t row_key(const int* row, int n) {
  std::uint64_t h = 1469598103934665603ull;
  for (int i = 0; i < n; ++i) {
    h ^= static_cast<std::uint64_t>(row[i]) + 0x9e3779b97f4a7c15ull;
    h *= 1099511628211ull;
  }
  return h;
}

void report_stats(const pdpaudit::CategoricalDataset& data,
                  const std::vector<pdpaudit::PointAudit>& points, double* mean_delta,
                  double* max_delta) {
  // Occurrence-weighted mean: each dataset row contributes its audit value.
  std::unordered_map<std::uint64_t, double> delta_by_key;
  for (const auto& p : points) delta_by_key[row_key(p.values.data(), data.n())] = p.delta;
  double sum = 0.0, mx = 0.0;
  for (std::int64_t r = 0; r < data.size(); ++r) {
    double d = delta_by_key.at(row_key(data.row(r), data.n()));
    sum += d;
    mx = std::max(mx, d);
  }
  *mean_delta = data.size() > 0 ? sum / static_cast<double>(data.size()) : 0.0;
  *max_delta = mx;
}

int cmd_curate(const AuditArgs& a, const std::string& ratios_text, const std::string& flags) {
  std::vector<double> ratios = parse_double_list(ratios_text, "--ratios");
  for (size_t i = 0; i < ratios.size(); ++i) {
    if (ratios[i] <= 0.0 || ratios[i] >= 1.0)
      throw InputError("removal ratios must lie in (0, 1)");
    if (i > 0 && ratios[i] <= ratios[i - 1])
      throw InputError("removal ratios must be strictly ascending");
  }
  (void)flags;

  pdpaudit::IngestOptions iopts;
  iopts.max_bins = a.max_bins;
  iopts.allow_missing = a.allow_missing;
  pdpaudit::IngestResult ingest = pdpaudit::ingest_csv(a.csv, iopts);
  pdpaudit::CategoricalDataset data = ingest.data;

  pdpaudit::DiffusionSchedule sched = build_schedule(a.sched, data.k());
  pdpaudit::BoundOptions opts = bound_options(a, sched.T());

  const std::int64_t s0 = data.size();
  const int n = data.n();
  std::int64_t removed_total = 0;

  const auto by_delta = [](const pdpaudit::PointAudit& x, const pdpaudit::PointAudit& y) {
    if (x.delta != y.delta) return x.delta > y.delta;
    return x.row < y.row;
  };
  std::vector<pdpaudit::PointAudit> points =
      pdpaudit::audit_all(data, sched, a.epsilon, a.m, a.release_step, opts, a.threads);
  std::sort(points.begin(), points.end(), by_delta);

  std::vector<CurationRound> rounds;
  for (double ratio : ratios) {
    std::int64_t target = static_cast<std::int64_t>(ratio * static_cast<double>(s0));
    std::int64_t need = target - removed_total;
    if (need <= 0)
      throw InputError("ratio " + format_double(ratio) + " removes no additional rows");
    if (need >= data.size()) throw InputError("removal ratios exhaust the dataset");

    // points are sorted by delta descending; drop occurrences of the worst
    // rows until the quota for this round is met.
    std::vector<char> remove(data.size(), 0);
    std::int64_t taken = 0;
    for (const auto& p : points) {
      if (taken >= need) break;
      for (std::int64_t r = 0; r < data.size() && taken < need; ++r) {
        if (remove[r]) continue;
        if (std::equal(p.values.begin(), p.values.end(), data.row(r))) {
          remove[r] = 1;
          ++taken;
        }
      }
    }

    pdpaudit::CategoricalDataset next(n, data.k());
    for (std::int64_t r = 0; r < data.size(); ++r)
      if (!remove[r]) next.append_row(data.row(r));
    data = std::move(next);
    removed_total += taken;

    points = pdpaudit::audit_all(data, sched, a.epsilon, a.m, a.release_step, opts, a.threads);
    std::sort(points.begin(), points.end(), by_delta);

    CurationRound round;
    round.ratio = ratio;
    round.size = data.size();
    report_stats(data, points, &round.mean_delta, &round.max_delta);
    rounds.push_back(round);
  }

  std::string out = "ratio,size,mean_delta,max_delta\n";
  for (const auto& r : rounds) {
    char ratio_buf[32];
    std::snprintf(ratio_buf, sizeof(ratio_buf), "%g", r.ratio);  // echo of user input
    out += ratio_buf;
    out += ',' + std::to_string(r.size);
    out += ',' + format_double(r.mean_delta);
    out += ',' + format_double(r.max_delta);
    out += '\n';
  }
  write_text(a.out, out);

  if (a.strict) {
    for (const auto& r : rounds)
      if (!std::isfinite(r.mean_delta) || !std::isfinite(r.max_delta)) {
        std::cerr << "pdpaudit: non-finite bounds present\n";
        return kExitNumeric;
      }
  }
  return 0;
}

// -------- generate --------

struct GenerateArgs {
  std::string csv;
  ScheduleArgs sched;
  std::int64_t m = 1;
  int release_step = 0;
  std::uint64_t seed = 1;
  int threads = 1;
  int max_bins = 5;
  bool allow_missing = false;
  std::string out;
  std::string codec_out;
};

int cmd_generate(const GenerateArgs& a) {
  pdpaudit::IngestOptions iopts;
  iopts.max_bins = a.max_bins;
  iopts.allow_missing = a.allow_missing;
  pdpaudit::IngestResult ingest = pdpaudit::ingest_csv(a.csv, iopts);

  pdpaudit::DiffusionSchedule sched = build_schedule(a.sched, ingest.data.k());
  pdpaudit::CategoricalDataset samples =
      pdpaudit::generate(ingest.data, sched, a.m, a.release_step, a.seed, a.threads);

  auto field = [](const std::string& value) {
    if (value.find(',') == std::string::npos) return value;
    return '"' + value + '"';
  };
  std::string out;
  for (size_t i = 0; i < ingest.codecs.size(); ++i) {
    if (i > 0) out += ',';
    out += field(ingest.codecs[i].name);
  }
  out += '\n';
  for (std::int64_t r = 0; r < samples.size(); ++r) {
    for (int i = 0; i < samples.n(); ++i) {
      if (i > 0) out += ',';
      out += field(ingest.codecs[i].decode(samples.cell(r, i)));
    }
    out += '\n';
  }
  write_text(a.out, out);
  if (!a.codec_out.empty())
    write_text(a.codec_out, pdpaudit::codecs_to_json(ingest.codecs) + "\n");
  return 0;
}

// -------- lower-bound --------

int cmd_lower_bound(const ScheduleArgs& sa, std::int64_t s, bool exact, int release_step,
                    const std::string& out_path) {
  pdpaudit::DiffusionSchedule sched = build_schedule(sa, 2);
  pdpaudit::SimplifiedLowerBound lb = pdpaudit::simplified_bound(sched, s);
  double full = pdpaudit::full_recursion_bound(sched, s);

  json j;
  j["schema"] = "pdp-lower-bound/1";
  j["schedule"] = sched.family();
  j["T"] = sched.T();
  j["s"] = s;
  j["epsilon"] = json_real(lb.epsilon0);
  j["delta_lb"] = json_real(lb.delta_lb);
  j["full_recursion"] = json_real(full);
  if (exact) {
    pdpaudit::ExactGap gap = pdpaudit::exact_gap(sched, s, release_step);
    j["exact_gap"] = json_real(gap.gap);
    j["exact_p0"] = json_real(gap.p0);
    j["exact_p1"] = json_real(gap.p1);
  }
  write_text(out_path, j.dump(2) + "\n");
  return 0;
}

// -------- dp --------

int cmd_dp(const ScheduleArgs& sa, std::int64_t s, int n, int k, double epsilon,
           std::int64_t m, int release_step, bool strict, const std::string& out_path) {
  pdpaudit::DiffusionSchedule sched = build_schedule(sa, k);
  pdpaudit::DpResult res = pdpaudit::dp_delta(sched, s, n, epsilon, m, release_step);

  json j;
  j["schema"] = "pdp-dp-bound/1";
  j["schedule"] = sched.family();
  j["T"] = sched.T();
  j["k"] = k;
  j["n"] = n;
  j["s"] = s;
  j["epsilon"] = epsilon;
  j["m"] = m;
  j["release_step"] = release_step;
  j["delta"] = json_real(res.delta);
  json trace = json::array();
  for (const auto& tr : res.trace) {
    json row;
    row["t"] = tr.t;
    row["psi"] = json_real(tr.psi);
    row["eta"] = tr.eta;
    row["c_star"] = json_real(tr.c_star);
    row["radius"] = tr.radius;
    row["varrho"] = json_real(tr.varrho);
    row["main_term"] = json_real(tr.main_term);
    row["second_term"] = json_real(tr.second_term);
    trace.push_back(row);
  }
  j["trace"] = trace;
  write_text(out_path, j.dump(2) + "\n");

  if (strict && !std::isfinite(res.delta)) {
    std::cerr << "pdpaudit: non-finite bounds present\n";
    return kExitNumeric;
  }
  return 0;
}

// -------- synth --------

void apply_design_string(const std::string& text, pdpaudit::SkewDesign* d) {
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    auto eq = item.find('=');
    if (eq == std::string::npos) throw InputError("bad --design entry: '" + item + "'");
    std::string key = item.substr(0, eq);
    std::string val = item.substr(eq + 1);
    try {
      if (key == "n") d->n = std::stoi(val);
      else if (key == "k") d->k = std::stoi(val);
      else if (key == "T") d->T = std::stoi(val);
      else if (key == "s") d->s = std::stoll(val);
      else if (key == "decay") d->decay = std::stod(val);
      else if (key == "eps" || key == "epsilon") d->epsilon = std::stod(val);
      else if (key == "m") d->m = std::stoll(val);
      else if (key == "release") d->release_step = std::stoi(val);
      else if (key == "seed") d->seed = std::stoull(val);
      else if (key == "seeds") d->num_seeds = std::stoi(val);
      else throw InputError("unknown --design key: '" + key + "'");
    } catch (const InputError&) {
      throw;
    } catch (const std::exception&) {
      throw InputError("bad --design value: '" + item + "'");
    }
  }
}

int cmd_synth(const std::string& p_grid_text, const pdpaudit::SkewDesign& design, bool strict,
              const std::string& out_path) {
  std::vector<double> p_grid = parse_double_list(p_grid_text, "--p-grid");
  std::vector<pdpaudit::SkewPoint> points = pdpaudit::predict_leakage_vs_skew(p_grid, design);

  std::string out = "p,t,psi_term,radius,main_term\n";
  for (const auto& pt : points) {
    for (int t = 1; t <= design.T; ++t) {
      out += format_double(pt.p);
      out += ',' + std::to_string(t);
      out += ',' + format_double(pt.psi_by_t[t]);
      out += ',' + format_double(pt.radius_by_t[t]);
      out += ',' + format_double(pt.main_by_t[t]);
      out += '\n';
    }
  }
  write_text(out_path, out);

  if (strict) {
    for (const auto& pt : points)
      if (!std::isfinite(pt.mean_delta)) {
        std::cerr << "pdpaudit: non-finite bounds present\n";
        return kExitNumeric;
      }
  }
  return 0;
}

// -------- schedule --------

int cmd_schedule(const ScheduleArgs& sa, int k, const std::string& out_path) {
  pdpaudit::DiffusionSchedule sched = build_schedule(sa, k);
  std::string out =
      "t,alpha,alpha_bar,mu_plus,mu_minus,mu_bar_plus,mu_bar_minus,ratio,ratio_bar\n";
  for (int t = 1; t <= sched.T(); ++t) {
    out += std::to_string(t);
    out += ',' + format_double(sched.alpha(t));
    out += ',' + format_double(sched.alpha_bar(t));
    out += ',' + format_double(sched.mu_plus(t));
    out += ',' + format_double(sched.mu_minus(t));
    out += ',' + format_double(sched.mu_bar_plus(t));
    out += ',' + format_double(sched.mu_bar_minus(t));
    out += ',' + format_double(sched.ratio(t));
    out += ',' + format_double(sched.ratio_bar(t));
    out += '\n';
  }
  write_text(out_path, out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Per-instance privacy bounds for synthetic categorical data"};
  app.require_subcommand(0, 1);
  std::string flags = join_flags(argc, argv);

  AuditArgs audit_args;
  CLI::App* audit = app.add_subcommand("audit", "Audit every row of a dataset");
  add_audit_options(audit, &audit_args);

  AuditArgs curate_args;
  std::string ratios_text;
  CLI::App* curate =
      app.add_subcommand("curate", "Iteratively remove the most exposed rows");
  add_audit_options(curate, &curate_args);
  curate->add_option("--ratios", ratios_text,
                     "Comma-separated cumulative removal ratios, ascending in (0, 1)")
      ->required();

  GenerateArgs gen_args;
  CLI::App* generate = app.add_subcommand("generate", "Sample synthetic rows");
  generate->add_option("csv", gen_args.csv, "Input CSV with a header row")->required();
  add_schedule_options(generate, &gen_args.sched);
  generate->add_option("-m,--samples", gen_args.m, "Number of samples")->default_val(gen_args.m);
  generate->add_option("--release-step", gen_args.release_step,
                       "Reverse step at which samples are taken")
      ->default_val(gen_args.release_step);
  generate->add_option("--seed", gen_args.seed, "RNG seed")->default_val(gen_args.seed);
  generate->add_option("--threads", gen_args.threads, "Worker threads")
      ->default_val(gen_args.threads);
  generate->add_option("--max-bins", gen_args.max_bins, "Quantile bins for numeric columns")
      ->default_val(gen_args.max_bins);
  generate->add_flag("--allow-missing", gen_args.allow_missing,
                     "Treat empty cells as an extra category");
  generate->add_option("--out", gen_args.out, "Output CSV path (default stdout)");
  generate->add_option("--codec-out", gen_args.codec_out, "Write the column codecs as JSON");

  ScheduleArgs lb_sched;
  std::int64_t lb_s = 20;
  bool lb_exact = false;
  int lb_release = 0;
  std::string lb_out;
  CLI::App* lower =
      app.add_subcommand("lower-bound", "Unavoidable leakage on the hard two-column pair");
  add_schedule_options(lower, &lb_sched);
  lower->add_option("--s", lb_s, "Dataset size of the larger neighbour")->default_val(lb_s);
  lower->add_flag("--exact", lb_exact, "Also enumerate the exact output gap");
  lower->add_option("--release-step", lb_release, "Release step for the exact gap")
      ->default_val(lb_release);
  lower->add_option("--out", lb_out, "Output JSON path (default stdout)");

  ScheduleArgs dp_sched;
  std::int64_t dp_s = 1000, dp_m = 1;
  int dp_n = 5, dp_k = 5, dp_release = 0;
  double dp_eps = 1.0;
  bool dp_strict = false;
  std::string dp_out;
  CLI::App* dp = app.add_subcommand("dp", "Dataset-free worst-case bound");
  add_schedule_options(dp, &dp_sched);
  dp->add_option("--s", dp_s, "Dataset size")->default_val(dp_s);
  dp->add_option("--n", dp_n, "Number of columns")->default_val(dp_n);
  dp->add_option("--k", dp_k, "Categories per column")->default_val(dp_k);
  dp->add_option("--epsilon", dp_eps, "Privacy parameter epsilon")->default_val(dp_eps);
  dp->add_option("-m,--samples", dp_m, "Number of released synthetic samples")
      ->default_val(dp_m);
  dp->add_option("--release-step", dp_release, "Reverse step at which samples are taken")
      ->default_val(dp_release);
  dp->add_flag("--strict", dp_strict, "Exit 3 if the bound is non-finite");
  dp->add_option("--out", dp_out, "Output JSON path (default stdout)");

  std::string synth_p_grid = "0.3,0.5,0.7,0.9";
  std::string synth_design_text;
  pdpaudit::SkewDesign synth_design;
  bool synth_strict = false;
  std::string synth_out;
  CLI::App* synth =
      app.add_subcommand("synth", "Leakage of the planted non-majority point vs class skew");
  synth->add_option("--p-grid", synth_p_grid, "Comma-separated majority probabilities")
      ->default_val(synth_p_grid);
  synth->add_option("--design", synth_design_text,
                    "Comma-separated key=value list: n,k,T,s,decay,eps,m,release,seed,seeds");
  synth->add_flag("--strict", synth_strict, "Exit 3 if any mean bound is non-finite");
  synth->add_option("--out", synth_out, "Output CSV path (default stdout)");

  ScheduleArgs sched_args;
  int sched_k = 2;
  std::string sched_out;
  CLI::App* schedule = app.add_subcommand("schedule", "Print the derived schedule table");
  add_schedule_options(schedule, &sched_args);
  schedule->add_option("--k", sched_k, "Categories per column")->default_val(sched_k);
  schedule->add_option("--out", sched_out, "Output CSV path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  if (app.get_subcommands().empty()) {
    std::cout << app.help();
    return kExitUsage;
  }

  try {
    if (audit->parsed()) return cmd_audit(audit_args, flags);
    if (curate->parsed()) return cmd_curate(curate_args, ratios_text, flags);
    if (generate->parsed()) return cmd_generate(gen_args);
    if (lower->parsed()) return cmd_lower_bound(lb_sched, lb_s, lb_exact, lb_release, lb_out);
    if (dp->parsed())
      return cmd_dp(dp_sched, dp_s, dp_n, dp_k, dp_eps, dp_m, dp_release, dp_strict, dp_out);
    if (synth->parsed()) {
      if (!synth_design_text.empty()) apply_design_string(synth_design_text, &synth_design);
      return cmd_synth(synth_p_grid, synth_design, synth_strict, synth_out);
    }
    if (schedule->parsed()) return cmd_schedule(sched_args, sched_k, sched_out);
  } catch (const InputError& e) {
    std::cerr << "pdpaudit: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "pdpaudit: " << e.what() << "\n";
    return kExitInput;
  }
  return 0;
}
