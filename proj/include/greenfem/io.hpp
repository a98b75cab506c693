#pragma once

#include <iosfwd>
#include <string>
#include <utility>

#include <Eigen/Dense>

#include "greenfem/geometry.hpp"
#include "greenfem/mesh.hpp"

namespace greenfem {

inline constexpr const char* kVersion = "0.1.0";

// First line of every produced file: version, configuration hash, seed.
std::string provenance_line(const std::string& config_hash, unsigned seed);

// read_domain with the missing-file case reported as a configuration error.
Domain read_domain_file(const std::string& path);

// Nodal solution CSV: node,y1,y2,u_0,...,u_{m-1}; one row per mesh node.
void write_solution(std::ostream& os, const Mesh& mesh, int m,
                    const Eigen::VectorXd& dofs);
// Returns (m, dofs) ordered node-major; leading '#' lines are skipped.
std::pair<int, Eigen::VectorXd> read_solution(std::istream& is);

}  // namespace greenfem
