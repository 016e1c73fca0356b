#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pdpaudit/pdp_bound.hpp"

namespace pdpaudit {

// JSON audit report, schema "pdp-report/1". Points are sorted by delta
// descending (ties by row index) so the most exposed instances lead.

struct ReportMeta {
  std::string schedule_family;
  int T = 0;
  int k = 0;
  int n = 0;
  std::int64_t s = 0;
  double epsilon = 0.0;
  std::int64_t m = 1;
  int release_step = 0;
  std::string mode;  // "main" or "relaxed"
  bool literal_main_text = false;
  std::uint64_t dataset_fingerprint = 0;
  std::string flags;  // the command line that produced the report
};

struct PdpReport {
  ReportMeta meta;
  std::vector<PointAudit> points;
};

void sort_points(PdpReport& report);

std::string report_to_json(const PdpReport& report);
PdpReport report_from_json(const std::string& text);

void write_report(const PdpReport& report, const std::string& path);
PdpReport read_report(const std::string& path);

}  // namespace pdpaudit
