#include "greenfem/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace greenfem {

namespace {

void put(std::ostream& os, double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  os << buf;
}

}  // namespace

std::string provenance_line(const std::string& config_hash, unsigned seed) {
  std::ostringstream os;
  os << "# greenfem " << kVersion << " config=" << config_hash
     << " seed=" << seed << "\n";
  return os.str();
}

Domain read_domain_file(const std::string& path) {
  {
    std::ifstream probe(path);
    if (!probe)
      throw std::runtime_error("config: domain file not found: " + path);
  }
  return read_domain(path);
}

void write_solution(std::ostream& os, const Mesh& mesh, int m,
                    const Eigen::VectorXd& dofs) {
  if (dofs.size() != static_cast<Eigen::Index>(mesh.nodes.size()) * m)
    throw std::invalid_argument("write_solution: dof count mismatch");
  os << "node,y1,y2";
  for (int a = 0; a < m; ++a) os << ",u_" << a;
  os << "\n";
  for (size_t i = 0; i < mesh.nodes.size(); ++i) {
    os << i << ',';
    put(os, mesh.nodes[i].x);
    os << ',';
    put(os, mesh.nodes[i].y);
    for (int a = 0; a < m; ++a) {
      os << ',';
      put(os, dofs[static_cast<Eigen::Index>(i) * m + a]);
    }
    os << "\n";
  }
}

std::pair<int, Eigen::VectorXd> read_solution(std::istream& is) {
  std::string line;
  while (std::getline(is, line) && (line.empty() || line[0] == '#')) {
  }
  std::istringstream hs(line);
  std::vector<std::string> cols;
  std::string cell;
  while (std::getline(hs, cell, ',')) cols.push_back(cell);
  if (cols.size() < 4 || cols[0] != "node" || cols[1] != "y1" ||
      cols[2] != "y2" || cols[3] != "u_0")
    throw std::runtime_error("not a solution CSV: bad header");
  const int m = static_cast<int>(cols.size()) - 3;
  std::vector<double> vals;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    for (char& c : line)
      if (c == ',') c = ' ';
    std::istringstream ls(line);
    long node = 0;
    double y1 = 0.0, y2 = 0.0;
    if (!(ls >> node >> y1 >> y2))
      throw std::runtime_error("malformed solution row: " + line);
    for (int a = 0; a < m; ++a) {
      double v = 0.0;
      if (!(ls >> v))
        throw std::runtime_error("malformed solution row: " + line);
      vals.push_back(v);
    }
  }
  Eigen::VectorXd dofs(static_cast<Eigen::Index>(vals.size()));
  for (size_t i = 0; i < vals.size(); ++i)
    dofs[static_cast<Eigen::Index>(i)] = vals[i];
  return {m, dofs};
}

}  // namespace greenfem
