#include "greenfem/config.hpp"

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "greenfem/expr.hpp"

namespace greenfem {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::istringstream is(s);
  std::string item;
  while (std::getline(is, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double to_real(const std::string& s, const std::string& key) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != s.size())
    throw std::runtime_error("config: bad number for " + key + ": " + s);
  return v;
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string join_points(const std::vector<Vec2>& pts) {
  std::string s;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (i) s += ";";
    s += fmt17(pts[i].x) + "," + fmt17(pts[i].y);
  }
  return s;
}

std::string join(const std::vector<std::string>& v, const char* sep) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += sep;
    s += v[i];
  }
  return s;
}

}  // namespace

std::vector<Vec2> parse_points(const std::string& s) {
  std::vector<Vec2> pts;
  for (const std::string& pair : split(s, ';')) {
    const auto xy = split(pair, ',');
    if (xy.size() != 2)
      throw std::runtime_error("config: bad point (want x,y): " + pair);
    pts.push_back({to_real(xy[0], "point"), to_real(xy[1], "point")});
  }
  return pts;
}

void apply_config_entry(RunConfig& cfg, const std::string& key,
                        const std::string& value) {
  if (key == "domain") {
    cfg.domain_file = value;
  } else if (key == "h") {
    cfg.h = to_real(value, key);
  } else if (key == "rho") {
    cfg.rho = to_real(value, key);
  } else if (key == "R") {
    cfg.R = to_real(value, key);
  } else if (key == "bc") {
    if (value != "auto" && value != "mixed" && value != "neumann")
      throw std::runtime_error("config: bc must be auto, mixed, or neumann");
    cfg.bc = value;
  } else if (key == "out") {
    cfg.out = value;
  } else if (key == "seed") {
    const double v = to_real(value, key);
    if (v < 0 || v != static_cast<double>(static_cast<unsigned>(v)))
      throw std::runtime_error("config: seed must be a nonnegative integer");
    cfg.seed = static_cast<unsigned>(v);
  } else if (key == "f") {
    cfg.f = value;
  } else if (key == "f_N") {
    cfg.f_N = value;
  } else if (key == "poles") {
    cfg.poles = parse_points(value);
  } else if (key == "eval") {
    cfg.eval_points = parse_points(value);
  } else if (key == "checks") {
    cfg.checks = split(value, ',');
  } else if (key == "levels") {
    cfg.levels.clear();
    for (const std::string& s : split(value, ','))
      cfg.levels.push_back(to_real(s, key));
  } else if (key == "coeff.kind") {
    if (value != "laplace" && value != "lame" && value != "tensor")
      throw std::runtime_error(
          "config: coeff.kind must be laplace, lame, or tensor");
    cfg.op = value;
  } else if (key == "coeff.m") {
    const double v = to_real(value, key);
    if (v < 1 || v != static_cast<double>(static_cast<int>(v)))
      throw std::runtime_error("config: coeff.m must be a positive integer");
    cfg.m = static_cast<int>(v);
  } else if (key == "coeff.mu") {
    cfg.mu = value;
  } else if (key == "coeff.lambda") {
    cfg.lambda = value;
  } else if (key == "coeff.tensor") {
    std::string body = trim(value);
    if (body.size() < 2 || body.front() != '[' || body.back() != ']')
      throw std::runtime_error("config: coeff.tensor wants [e0, e1, ...]");
    cfg.tensor = split(body.substr(1, body.size() - 2), ',');
  } else {
    throw std::runtime_error("config: unknown key " + key);
  }
}

RunConfig parse_config(std::istream& is) {
  RunConfig cfg;
  std::string line;
  while (std::getline(is, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("config: expected key = value, got: " + line);
    apply_config_entry(cfg, trim(line.substr(0, eq)),
                       trim(line.substr(eq + 1)));
  }
  return cfg;
}

RunConfig read_config_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("config: config file not found: " + path);
  return parse_config(f);
}

std::string canonical_config(const RunConfig& cfg) {
  std::ostringstream os;
  os << "bc = " << cfg.bc << "\n";
  os << "checks = " << join(cfg.checks, ",") << "\n";
  os << "coeff.kind = " << cfg.op << "\n";
  os << "coeff.lambda = " << cfg.lambda << "\n";
  os << "coeff.m = " << cfg.m << "\n";
  os << "coeff.mu = " << cfg.mu << "\n";
  os << "coeff.tensor = [" << join(cfg.tensor, ", ") << "]\n";
  os << "domain = " << cfg.domain_file << "\n";
  os << "eval = " << join_points(cfg.eval_points) << "\n";
  os << "f = " << cfg.f << "\n";
  os << "f_N = " << cfg.f_N << "\n";
  os << "h = " << fmt17(cfg.h) << "\n";
  std::string lv;
  for (std::size_t i = 0; i < cfg.levels.size(); ++i)
    lv += (i ? "," : "") + fmt17(cfg.levels[i]);
  os << "levels = " << lv << "\n";
  os << "poles = " << join_points(cfg.poles) << "\n";
  os << "R = " << fmt17(cfg.R) << "\n";
  os << "rho = " << fmt17(cfg.rho) << "\n";
  os << "seed = " << cfg.seed << "\n";
  return os.str();
}

std::string config_hash(const RunConfig& cfg) {
  const std::string text = canonical_config(cfg);
  std::uint64_t h = 1469598103934665603ull;  // FNV-1a
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

CoefficientField make_coefficients(const RunConfig& cfg) {
  if (cfg.op == "laplace") {
    if (cfg.m != 1)
      throw std::runtime_error("config: laplace coefficients are scalar");
    return laplace_coefficients();
  }
  if (cfg.op == "lame") return coefficients_from_spec("lame", cfg.mu, cfg.lambda);
  const int n = 4 * cfg.m * cfg.m;
  if (static_cast<int>(cfg.tensor.size()) != n)
    throw std::runtime_error("config: coeff.tensor wants " +
                             std::to_string(n) + " entries for m=" +
                             std::to_string(cfg.m));
  std::vector<Expr> entries;
  entries.reserve(cfg.tensor.size());
  for (const std::string& src : cfg.tensor) entries.push_back(Expr::parse(src));
  CoefficientField cf;
  cf.m = cfg.m;
  cf.desc = "tensor m=" + std::to_string(cfg.m);
  cf.tensor = [entries](Vec2 p, double* A) {
    for (std::size_t i = 0; i < entries.size(); ++i) A[i] = entries[i](p);
  };
  return cf;
}

std::function<void(Vec2, double*)> make_data(const std::string& spec, int m) {
  const auto parts = split(spec, ';');
  if (parts.empty()) return {};
  if (parts.size() != 1 && static_cast<int>(parts.size()) != m)
    throw std::runtime_error("config: data wants 1 or " + std::to_string(m) +
                             " component expressions");
  std::vector<Expr> comps;
  comps.reserve(parts.size());
  for (const std::string& src : parts) comps.push_back(Expr::parse(src));
  return [comps, m](Vec2 p, double* out) {
    for (int a = 0; a < m; ++a)
      out[a] = comps[comps.size() == 1 ? 0 : a](p);
  };
}

}  // namespace greenfem
