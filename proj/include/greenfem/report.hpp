#pragma once

#include <string>
#include <utility>
#include <vector>

namespace greenfem {

// Outcome of one verification check: named quantities, the thresholds they
// were held against, and a per-level trace for refinement studies.
struct VerificationReport {
  std::string kind;
  std::string inputs;
  std::vector<std::pair<std::string, double>> values;
  std::vector<std::pair<std::string, double>> thresholds;
  bool pass = false;
  std::vector<std::pair<std::string, std::vector<std::pair<std::string, double>>>> trace;
  std::string note;

  void value(const std::string& k, double v) { values.emplace_back(k, v); }
  void threshold(const std::string& k, double v) { thresholds.emplace_back(k, v); }
  double get(const std::string& k) const;  // throws if absent
};

// Human-readable block.
std::string format_report(const VerificationReport& r);
// Flat CSV rows: kind,section,key,value,pass.  `section` is "value",
// "threshold", or the trace level label.
std::string report_csv(const VerificationReport& r);
std::string report_csv_header();

}  // namespace greenfem
