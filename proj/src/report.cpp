#include "greenfem/report.hpp"

#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace greenfem {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

}  // namespace

double VerificationReport::get(const std::string& k) const {
  for (const auto& [key, v] : values)
    if (key == k) return v;
  throw std::out_of_range("report '" + kind + "' has no value '" + k + "'");
}

std::string format_report(const VerificationReport& r) {
  std::ostringstream os;
  os << "check " << r.kind << (r.pass ? "  PASS" : "  FAIL") << "\n";
  if (!r.inputs.empty()) os << "  inputs: " << r.inputs << "\n";
  for (const auto& [k, v] : r.values) os << "  " << k << " = " << fmt(v) << "\n";
  for (const auto& [k, v] : r.thresholds)
    os << "  threshold " << k << " = " << fmt(v) << "\n";
  for (const auto& [label, kvs] : r.trace) {
    os << "  [" << label << "]";
    for (const auto& [k, v] : kvs) os << " " << k << "=" << fmt(v);
    os << "\n";
  }
  if (!r.note.empty()) os << "  note: " << r.note << "\n";
  return os.str();
}

std::string report_csv_header() { return "kind,section,key,value\n"; }

std::string report_csv(const VerificationReport& r) {
  std::ostringstream os;
  const std::string k = csv_quote(r.kind);
  if (!r.inputs.empty())
    os << k << ",inputs,," << csv_quote(r.inputs) << "\n";
  for (const auto& [key, v] : r.values)
    os << k << ",value," << csv_quote(key) << "," << fmt(v) << "\n";
  for (const auto& [key, v] : r.thresholds)
    os << k << ",threshold," << csv_quote(key) << "," << fmt(v) << "\n";
  for (const auto& [label, kvs] : r.trace)
    for (const auto& [key, v] : kvs)
      os << k << "," << csv_quote(label) << "," << csv_quote(key) << "," << fmt(v)
         << "\n";
  if (!r.note.empty()) os << k << ",note,," << csv_quote(r.note) << "\n";
  os << k << ",result,pass," << (r.pass ? 1 : 0) << "\n";
  return os.str();
}

}  // namespace greenfem
