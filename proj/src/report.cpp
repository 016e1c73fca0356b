#include "pdpaudit/report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace pdpaudit {

namespace {

using nlohmann::ordered_json;

// JSON has no literal for non-finite values; encode them as strings so a
// diverging delta survives a round trip.
ordered_json encode_real(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "NaN";
  return v > 0 ? "Infinity" : "-Infinity";
}

double decode_real(const ordered_json& j) {
  if (j.is_number()) return j.get<double>();
  const std::string s = j.get<std::string>();
  if (s == "Infinity") return std::numeric_limits<double>::infinity();
  if (s == "-Infinity") return -std::numeric_limits<double>::infinity();
  if (s == "NaN") return std::numeric_limits<double>::quiet_NaN();
  throw std::runtime_error("report: unrecognised numeric encoding '" + s + "'");
}

std::string fingerprint_hex(std::uint64_t fp) {
  std::ostringstream out;
  out << "0x" << std::hex << fp;
  return out.str();
}

std::uint64_t parse_fingerprint(const std::string& s) {
  return std::stoull(s, nullptr, 16);
}

}  // namespace

void sort_points(PdpReport& report) {
  std::sort(report.points.begin(), report.points.end(),
            [](const PointAudit& a, const PointAudit& b) {
              if (a.delta != b.delta) return a.delta > b.delta;
              return a.row < b.row;
            });
}

std::string report_to_json(const PdpReport& report) {
  ordered_json j;
  j["schema"] = "pdp-report/1";
  ordered_json meta;
  meta["schedule"] = report.meta.schedule_family;
  meta["T"] = report.meta.T;
  meta["k"] = report.meta.k;
  meta["n"] = report.meta.n;
  meta["s"] = report.meta.s;
  meta["epsilon"] = report.meta.epsilon;
  meta["m"] = report.meta.m;
  meta["release_step"] = report.meta.release_step;
  meta["mode"] = report.meta.mode;
  meta["literal_main_text"] = report.meta.literal_main_text;
  meta["dataset_fingerprint"] = fingerprint_hex(report.meta.dataset_fingerprint);
  meta["flags"] = report.meta.flags;
  j["meta"] = std::move(meta);

  ordered_json points = ordered_json::array();
  for (const PointAudit& p : report.points) {
    ordered_json jp;
    jp["row"] = p.row;
    jp["values"] = p.values;
    jp["delta"] = encode_real(p.delta);
    ordered_json flags = ordered_json::array();
    if (p.support_isolated) flags.push_back("support-isolated");
    jp["flags"] = std::move(flags);
    ordered_json trace = ordered_json::array();
    for (const RadiusTrace& tr : p.trace) {
      ordered_json jt;
      jt["t"] = tr.t;
      jt["eta"] = tr.eta;
      jt["c_star"] = tr.c_star;
      jt["radius"] = tr.radius;
      jt["psi_term"] = encode_real(tr.psi_term);
      jt["clamp"] = tr.clamp;
      jt["second_term"] = tr.second_term;
      jt["step_total"] = encode_real(tr.step_total);
      trace.push_back(std::move(jt));
    }
    jp["trace"] = std::move(trace);
    points.push_back(std::move(jp));
  }
  j["points"] = std::move(points);
  return j.dump(2);
}

PdpReport report_from_json(const std::string& text) {
  ordered_json j = ordered_json::parse(text);
  if (j.at("schema").get<std::string>() != "pdp-report/1") {
    throw std::runtime_error("report: unsupported schema");
  }
  PdpReport report;
  const ordered_json& meta = j.at("meta");
  report.meta.schedule_family = meta.at("schedule").get<std::string>();
  report.meta.T = meta.at("T").get<int>();
  report.meta.k = meta.at("k").get<int>();
  report.meta.n = meta.at("n").get<int>();
  report.meta.s = meta.at("s").get<std::int64_t>();
  report.meta.epsilon = meta.at("epsilon").get<double>();
  report.meta.m = meta.at("m").get<std::int64_t>();
  report.meta.release_step = meta.at("release_step").get<int>();
  report.meta.mode = meta.at("mode").get<std::string>();
  report.meta.literal_main_text = meta.at("literal_main_text").get<bool>();
  report.meta.dataset_fingerprint =
      parse_fingerprint(meta.at("dataset_fingerprint").get<std::string>());
  report.meta.flags = meta.at("flags").get<std::string>();

  for (const ordered_json& jp : j.at("points")) {
    PointAudit p;
    p.row = jp.at("row").get<std::int64_t>();
    p.values = jp.at("values").get<std::vector<int>>();
    p.delta = decode_real(jp.at("delta"));
    for (const ordered_json& f : jp.at("flags")) {
      if (f.get<std::string>() == "support-isolated") p.support_isolated = true;
    }
    for (const ordered_json& jt : jp.at("trace")) {
      RadiusTrace tr;
      tr.t = jt.at("t").get<int>();
      tr.eta = jt.at("eta").get<int>();
      tr.c_star = jt.at("c_star").get<double>();
      tr.radius = jt.at("radius").get<int>();
      tr.psi_term = decode_real(jt.at("psi_term"));
      tr.clamp = jt.at("clamp").get<double>();
      tr.second_term = jt.at("second_term").get<double>();
      tr.step_total = decode_real(jt.at("step_total"));
      p.trace.push_back(tr);
    }
    report.points.push_back(std::move(p));
  }
  return report;
}

void write_report(const PdpReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("report: cannot write " + path);
  out << report_to_json(report) << "\n";
}

PdpReport read_report(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("report: cannot read " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return report_from_json(buf.str());
}

}  // namespace pdpaudit
