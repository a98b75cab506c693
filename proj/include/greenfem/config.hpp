#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "greenfem/geometry.hpp"
#include "greenfem/operators.hpp"

namespace greenfem {

// Flat `key = value` run configuration; dotted keys stay one level deep.
struct RunConfig {
  std::string domain_file;
  std::string op = "laplace";  // laplace | lame | tensor
  int m = 1;                   // tensor operators only; lame forces 2
  std::string mu = "1";
  std::string lambda = "1";
  std::vector<std::string> tensor;  // 4 m^2 entry expressions for op=tensor
  std::string f;                    // ';'-separated component expressions
  std::string f_N;
  double h = 0.05;
  double rho = 0.0;         // 0 -> the 4h policy
  double R = 0.0;           // free-space enclosure radius; 0 -> least allowed
  std::string bc = "auto";  // auto | mixed | neumann
  std::vector<Vec2> poles;
  std::vector<Vec2> eval_points;
  std::vector<std::string> checks;
  std::vector<double> levels;
  std::string out;
  unsigned seed = 1;
};

// Applies one `key = value` assignment; unknown keys are errors.
void apply_config_entry(RunConfig& cfg, const std::string& key,
                        const std::string& value);
RunConfig parse_config(std::istream& is);
RunConfig read_config_file(const std::string& path);

// Canonical serialization: fixed key order, 17-digit floats.  Covers the
// keys that determine results (the output path is presentation, not
// configuration), so the hash fingerprints the computation.
std::string canonical_config(const RunConfig& cfg);
std::string config_hash(const RunConfig& cfg);  // 16 hex digits

// Coefficients named by the configuration.
CoefficientField make_coefficients(const RunConfig& cfg);
// ';'-separated component expressions -> data callback; an empty spec gives
// an empty function, a single expression broadcasts over all m components.
std::function<void(Vec2, double*)> make_data(const std::string& spec, int m);
// "x,y; x,y" -> point list.
std::vector<Vec2> parse_points(const std::string& s);

}  // namespace greenfem
