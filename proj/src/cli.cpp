#include "greenfem/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

#include <CLI11.hpp>

#include "greenfem/analysis.hpp"
#include "greenfem/config.hpp"
#include "greenfem/geometry.hpp"
#include "greenfem/green.hpp"
#include "greenfem/io.hpp"
#include "greenfem/mesh.hpp"
#include "greenfem/neumann.hpp"
#include "greenfem/operators.hpp"
#include "greenfem/report.hpp"
#include "greenfem/solve.hpp"

namespace greenfem {

namespace {

// A check that legitimately fails maps to exit code 1; configuration and
// usage problems surface as generic exceptions and map to exit code 2.
struct CheckFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct CliOpts {
  std::string config_file, domain_file, out, bc, f, fn, checks, mesh_out;
  std::string report_input;
  double h = -1.0, rho = -1.0, R = -1.0;
  long long seed = -1;
  std::vector<std::string> poles;
  std::vector<double> levels;
};

void add_common(CLI::App* cmd, CliOpts& o) {
  // The default help flag claims -h, which the mesh-size option needs free.
  cmd->set_help_flag("--help", "print this help and exit");
  cmd->add_option("--config", o.config_file, "key = value configuration file");
  cmd->add_option("--domain", o.domain_file, "polygonal boundary file");
  cmd->add_option("--out", o.out, "output file (default: stdout)");
  cmd->add_option("--h", o.h, "target mesh size");
  cmd->add_option("--rho", o.rho, "pole averaging radius (default 4h)");
  cmd->add_option("--pole", o.poles, "pole position x,y (repeatable)");
  cmd->add_option("--bc", o.bc, "boundary handling: auto, mixed, or neumann");
  cmd->add_option("--checks", o.checks, "comma-separated check names, or all");
  cmd->add_option("--seed", o.seed, "sampling seed");
  cmd->add_option("--levels", o.levels, "mesh sizes for multi-level checks")
      ->delimiter(',');
  cmd->add_option("--f", o.f, "volume data expressions, ;-separated");
  cmd->add_option("--fn", o.fn, "flux data expressions, ;-separated");
  cmd->add_option("--R", o.R, "free-space disk radius");
  cmd->add_option("--mesh-out", o.mesh_out, "also write the mesh to this file");
}

RunConfig resolve(const CliOpts& o) {
  RunConfig cfg;
  if (!o.config_file.empty()) cfg = read_config_file(o.config_file);
  if (!o.domain_file.empty()) cfg.domain_file = o.domain_file;
  if (o.h >= 0.0) cfg.h = o.h;
  if (o.rho >= 0.0) cfg.rho = o.rho;
  if (o.R >= 0.0) cfg.R = o.R;
  if (o.seed >= 0) cfg.seed = static_cast<unsigned>(o.seed);
  if (!o.bc.empty()) apply_config_entry(cfg, "bc", o.bc);
  if (!o.out.empty()) cfg.out = o.out;
  if (!o.f.empty()) cfg.f = o.f;
  if (!o.fn.empty()) cfg.f_N = o.fn;
  if (!o.checks.empty()) apply_config_entry(cfg, "checks", o.checks);
  if (!o.levels.empty()) cfg.levels = o.levels;
  if (!o.poles.empty()) {
    cfg.poles.clear();
    for (const std::string& s : o.poles)
      for (Vec2 p : parse_points(s)) cfg.poles.push_back(p);
  }
  return cfg;
}

Domain load_domain(const RunConfig& cfg) {
  if (cfg.domain_file.empty())
    throw std::runtime_error("config: no domain file given");
  Domain dom = read_domain_file(cfg.domain_file);
  if (!(cfg.h > 0.0) || cfg.h >= dom.r0())
    throw std::runtime_error("config: h must lie in (0, r0)");
  return dom;
}

double resolve_rho(const RunConfig& cfg) {
  const double rho = cfg.rho > 0.0 ? cfg.rho : 4.0 * cfg.h;
  if (rho < 4.0 * cfg.h * (1.0 - 1e-12))
    throw std::runtime_error("rho under-resolved (rho < 4h)");
  return rho;
}

// Mixed solves need a Dirichlet part; the whole-boundary-flux path needs its
// absence.  "auto" picks by the boundary tags.
bool use_neumann(const RunConfig& cfg, const Domain& dom) {
  const bool has_D = dom.has_tag(BoundaryTag::D);
  if (cfg.bc == "mixed") {
    if (!has_D)
      throw std::runtime_error("config: bc = mixed needs a Dirichlet part");
    return false;
  }
  if (cfg.bc == "neumann") {
    if (has_D)
      throw std::runtime_error(
          "config: bc = neumann needs an all-flux boundary");
    return true;
  }
  return !has_D;
}

void require_pole_inside(const Domain& dom, Vec2 x) {
  if (!dom.contains(x))
    throw std::runtime_error("config: pole (" + fmt(x.x) + ", " + fmt(x.y) +
                             ") lies outside the domain");
}

void emit_file(const std::string& path, const std::string& text) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("config: cannot write " + path);
  f << text;
}

void emit(const RunConfig& cfg, const std::string& body) {
  const std::string text = provenance_line(config_hash(cfg), cfg.seed) + body;
  if (cfg.out.empty())
    std::cout << text;
  else
    emit_file(cfg.out, text);
}

std::vector<Vec2> node_points(const Mesh& mesh) {
  std::vector<Vec2> pts;
  pts.reserve(mesh.nodes.size());
  for (const Vec2& p : mesh.nodes) pts.push_back(p);
  return pts;
}

// The averaging radius can be too large for a domain to hold the poles a
// check needs; under "--checks all" that demotes the check to a skip.
struct InfeasibleDraw : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Seeded rejection sampling: interior points with clearance 2*rho from the
// boundary and pairwise separation sep*rho.
std::vector<Vec2> draw_poles(const Domain& dom, double rho, int count,
                             double sep, unsigned seed) {
  double xlo = 1e300, xhi = -1e300, ylo = 1e300, yhi = -1e300;
  for (const Vec2& v : dom.vertices()) {
    xlo = std::min(xlo, v.x);
    xhi = std::max(xhi, v.x);
    ylo = std::min(ylo, v.y);
    yhi = std::max(yhi, v.y);
  }
  std::mt19937 rng(seed + 17u);
  std::uniform_real_distribution<double> ux(xlo, xhi), uy(ylo, yhi);
  std::vector<Vec2> pts;
  int stall = 0;
  for (int tries = 0; tries < 200000 && static_cast<int>(pts.size()) < count;
       ++tries) {
    // An early accepted point can make the rest unplaceable; restart the
    // set after a long stall instead of freezing it.
    if (++stall > 2000) {
      pts.clear();
      stall = 0;
    }
    const Vec2 p{ux(rng), uy(rng)};
    if (!dom.contains(p) || dom.dist_to_boundary(p) <= 2.0 * rho) continue;
    bool ok = true;
    for (const Vec2 q : pts)
      if (std::hypot(p.x - q.x, p.y - q.y) < sep * rho) ok = false;
    if (ok) {
      pts.push_back(p);
      stall = 0;
    }
  }
  if (static_cast<int>(pts.size()) < count) {
    char s[16];
    std::snprintf(s, sizeof s, "%g", sep);
    throw InfeasibleDraw("config: could not place " + std::to_string(count) +
                         " poles at separation " + s + "*rho; shrink rho or h");
  }
  return pts;
}

// ---- subcommands ----

int cmd_solve(const CliOpts& o) {
  RunConfig cfg = resolve(o);
  const Domain dom = load_domain(cfg);
  const CoefficientField coef = make_coefficients(cfg);
  const auto f = make_data(cfg.f, coef.m);
  const auto fN = make_data(cfg.f_N, coef.m);
  if (!f && !fN) throw std::runtime_error("config: solve needs f or f_N data");
  const Mesh mesh = triangulate(dom, cfg.h);
  const Eigen::VectorXd load = assemble_load(mesh, coef.m, f, fN);
  FemSolution u;
  if (use_neumann(cfg, dom)) {
    const NeumannEngine eng(mesh, coef);
    try {
      u = eng.solve(load);
    } catch (const std::runtime_error& e) {
      if (std::string(e.what()).find("incompatible") != std::string::npos)
        throw CheckFailure(std::string("solve: ") + e.what());
      throw;
    }
  } else {
    const MixedEngine eng(mesh, coef);
    u = eng.solve(load);
  }
  std::ostringstream body;
  write_solution(body, mesh, coef.m, u.dofs);
  emit(cfg, body.str());
  if (!o.mesh_out.empty())
    emit_file(o.mesh_out,
              provenance_line(config_hash(cfg), cfg.seed) + format_mesh(mesh));
  return 0;
}

int cmd_green(const CliOpts& o, bool force_neumann) {
  RunConfig cfg = resolve(o);
  const Domain dom = load_domain(cfg);
  const CoefficientField coef = make_coefficients(cfg);
  const double rho = resolve_rho(cfg);
  if (cfg.poles.empty())
    throw std::runtime_error(
        "config: green needs at least one pole (--pole x,y)");
  if (force_neumann && dom.has_tag(BoundaryTag::D))
    throw std::runtime_error(
        "config: neumann-green needs an all-flux boundary");
  const bool neumann = force_neumann || use_neumann(cfg, dom);
  for (const Vec2 x : cfg.poles) require_pole_inside(dom, x);
  const Mesh mesh = triangulate(dom, cfg.h);
  const std::vector<Vec2> pts =
      cfg.eval_points.empty() ? node_points(mesh) : cfg.eval_points;
  GreenTable gt;
  if (neumann) {
    const NeumannEngine eng(mesh, coef);
    for (const Vec2 x : cfg.poles)
      append_green(gt, neumann_green(eng, x, rho), pts);
  } else {
    const MixedEngine eng(mesh, coef);
    for (const Vec2 x : cfg.poles)
      append_green(gt, approximate_green(eng, x, rho), pts);
  }
  std::ostringstream body;
  write_green_table(body, gt);
  emit(cfg, body.str());
  return 0;
}

int cmd_fundamental(const CliOpts& o) {
  RunConfig cfg = resolve(o);
  const CoefficientField coef = make_coefficients(cfg);
  const Vec2 x = cfg.poles.empty() ? Vec2{0.0, 0.0} : cfg.poles[0];
  const double rho = cfg.rho > 0.0 ? cfg.rho : 0.5;
  const GreenField gf = fundamental_solution(coef, x, rho, cfg.R);
  std::vector<Vec2> pts = cfg.eval_points;
  if (pts.empty()) {
    // Rings clear of the averaging region and well inside the disk.
    for (const double s : {2.2, 2.6, 3.0, 3.5, 4.0})
      for (int k = 0; k < 16; ++k) {
        const double th = 2.0 * M_PI * k / 16.0;
        pts.push_back({x.x + s * rho * std::cos(th),
                       x.y + s * rho * std::sin(th)});
      }
  }
  const GreenTable gt = tabulate_green(gf, pts);
  std::ostringstream body;
  write_green_table(body, gt);
  emit(cfg, body.str());
  return 0;
}

// ---- verify ----

VerificationReport check_green_identity(const RunConfig& cfg,
                                        const Domain& dom,
                                        const CoefficientField& coef) {
  if (!dom.has_tag(BoundaryTag::D))
    throw std::runtime_error("config: green_identity needs a Dirichlet part");
  const Mesh mesh = triangulate(dom, cfg.h);
  const MixedEngine eng(mesh, coef);
  const int n = mesh.num_nodes() * coef.m;
  std::mt19937 rng(cfg.seed);
  std::normal_distribution<double> gauss;
  double worst = 0.0;
  const int samples = 20;
  for (int s = 0; s < samples; ++s) {
    Eigen::VectorXd lf(n), lg(n);
    for (int i = 0; i < n; ++i) lf[i] = gauss(rng);
    for (int i = 0; i < n; ++i) lg[i] = gauss(rng);
    const FemSolution u = eng.solve(lf);
    const FemSolution w = eng.solve_adjoint(lg);
    worst = std::max(worst, verify_green_identity(u, w, lf, lg));
  }
  VerificationReport rep;
  rep.kind = "green_identity";
  rep.inputs = coef.desc + ", h=" + fmt(cfg.h) + ", samples=" +
               std::to_string(samples);
  rep.value("max_defect", worst);
  rep.threshold("max_defect", 1e-8);
  rep.pass = std::isfinite(worst) && worst <= 1e-8;
  return rep;
}

VerificationReport check_symmetry(const RunConfig& cfg, const Domain& dom,
                                  const CoefficientField& coef, bool neumann) {
  const double rho = resolve_rho(cfg);
  const int need = neumann ? 4 : 2;
  std::vector<Vec2> pts = cfg.poles;
  if (!pts.empty() && static_cast<int>(pts.size()) < need)
    throw std::runtime_error("config: symmetry needs " + std::to_string(need) +
                             " poles here");
  // Opposite poles must sit four averaging radii apart.
  if (pts.empty()) pts = draw_poles(dom, rho, need, 4.2, cfg.seed);
  for (const Vec2 p : pts) require_pole_inside(dom, p);
  const Mesh mesh = triangulate(dom, cfg.h);
  std::vector<GreenField> primal, adjoint;
  if (neumann) {
    const NeumannEngine eng(mesh, coef);
    primal.push_back(neumann_green(eng, pts[0], rho));
    primal.push_back(neumann_green(eng, pts[2], rho));
    adjoint.push_back(neumann_green(eng, pts[1], rho, true));
    adjoint.push_back(neumann_green(eng, pts[3], rho, true));
  } else {
    const MixedEngine eng(mesh, coef);
    primal.push_back(approximate_green(eng, pts[0], rho));
    adjoint.push_back(approximate_green(eng, pts[1], rho, true));
  }
  return verify_symmetry(primal, adjoint, 5e-3);
}

VerificationReport check_representation(const RunConfig& cfg,
                                        const Domain& dom,
                                        const CoefficientField& coef,
                                        bool neumann) {
  const double rho = resolve_rho(cfg);
  std::vector<Vec2> poles = cfg.poles;
  if (poles.empty())
    poles = draw_poles(dom, rho, 3, 2.0, cfg.seed);
  else
    for (const Vec2 p : poles) require_pole_inside(dom, p);
  const Mesh mesh = triangulate(dom, cfg.h);
  const auto f = make_data(cfg.f.empty() ? "1" : cfg.f, coef.m);
  if (neumann) {
    const NeumannEngine eng(mesh, coef);
    const Eigen::VectorXd load = assemble_load(mesh, coef.m, f, {});
    const Eigen::VectorXd defect = eng.compatibility_defect(load);
    // The pairing identity is only claimed for compatible volume data, so a
    // load with a dominant kernel component is a configuration error.
    if (defect.norm() > 0.5 * std::max(load.norm(), 1e-14))
      throw std::runtime_error(
          "config: representation on an all-flux boundary needs compatible f "
          "data");
    return verify_representation(eng, f, poles, rho);
  }
  const MixedEngine eng(mesh, coef);
  return verify_representation(eng, f, make_data(cfg.f_N, coef.m), poles, rho);
}

VerificationReport check_meyers(const RunConfig& cfg, const Domain& dom,
                                const CoefficientField& coef) {
  std::vector<double> levels = cfg.levels;
  if (levels.empty()) levels = {cfg.h, 0.5 * cfg.h, 0.25 * cfg.h};
  const auto f = make_data(cfg.f.empty() ? "1" : cfg.f, coef.m);
  return meyers_exponent(dom, coef, f, levels,
                         {2.5, 3.0, 3.5, 4.0, 4.5, 5.0, 6.0});
}

const std::set<std::string>& battery_kinds() {
  static const std::set<std::string> kinds = {
      "poincare_D", "sobolev_poincare", "poincare",    "morrey",
      "boundary_poincare", "korn",      "caccioppoli", "energy",
      "atomic_linf", "lt_estimates"};
  return kinds;
}

VerificationReport run_check(const std::string& name, const RunConfig& cfg,
                             const Domain& dom, const CoefficientField& coef,
                             bool neumann) {
  if (battery_kinds().count(name))
    return verify_inequality(name, dom, coef, cfg.h, cfg.seed);
  if (name == "green_identity") return check_green_identity(cfg, dom, coef);
  if (name == "symmetry") return check_symmetry(cfg, dom, coef, neumann);
  if (name == "representation")
    return check_representation(cfg, dom, coef, neumann);
  if (name == "meyers") return check_meyers(cfg, dom, coef);
  throw std::runtime_error("config: unknown check " + name);
}

// Checks runnable on this domain/coefficient combination; the rest are
// listed with the hypothesis they lack.
std::vector<std::string> applicable_checks(const Domain& dom,
                                           const CoefficientField& coef,
                                           const RunConfig& cfg, bool neumann,
                                           std::vector<std::string>* skipped) {
  const bool D = dom.has_tag(BoundaryTag::D);
  const bool N = dom.has_tag(BoundaryTag::N);
  std::vector<std::string> names;
  auto take = [&](const char* n) { names.push_back(n); };
  auto skip = [&](const std::string& why) { skipped->push_back(why); };
  if (D)
    take("poincare_D");
  else
    skip("poincare_D (needs a Dirichlet part)");
  take("sobolev_poincare");
  take("poincare");
  take("morrey");
  take("boundary_poincare");
  if (coef.m == 2)
    take("korn");
  else
    skip("korn (needs a two-component field)");
  if (D && N)
    take("caccioppoli");
  else
    skip("caccioppoli (needs both Dirichlet and flux parts)");
  for (const char* n : {"energy", "atomic_linf", "lt_estimates"}) {
    if (D)
      take(n);
    else
      skip(std::string(n) + " (needs a Dirichlet part)");
  }
  if (D)
    take("green_identity");
  else
    skip("green_identity (needs a Dirichlet part)");
  take("symmetry");
  if (!neumann || !cfg.f.empty())
    take("representation");
  else
    skip("representation (an all-flux boundary needs compatible f data)");
  if (D)
    take("meyers");
  else
    skip("meyers (needs a Dirichlet part)");
  return names;
}

int cmd_verify(const CliOpts& o) {
  RunConfig cfg = resolve(o);
  const Domain dom = load_domain(cfg);
  const CoefficientField coef = make_coefficients(cfg);
  const bool neumann = use_neumann(cfg, dom);
  std::vector<std::string> names = cfg.checks;
  std::vector<std::string> skipped;
  const bool auto_list =
      names.empty() || (names.size() == 1 && names[0] == "all");
  if (auto_list) names = applicable_checks(dom, coef, cfg, neumann, &skipped);
  std::vector<VerificationReport> reps;
  reps.reserve(names.size());
  for (const std::string& name : names) {
    if (!auto_list) {
      reps.push_back(run_check(name, cfg, dom, coef, neumann));
      continue;
    }
    try {
      reps.push_back(run_check(name, cfg, dom, coef, neumann));
    } catch (const InfeasibleDraw& e) {
      std::string why = e.what();
      if (why.rfind("config: ", 0) == 0) why = why.substr(8);
      skipped.push_back(name + " (" + why + ")");
    }
  }
  std::ostringstream text, csv;
  csv << report_csv_header();
  int failed = 0;
  for (const VerificationReport& r : reps) {
    text << format_report(r) << "\n";
    csv << report_csv(r);
    if (!r.pass) ++failed;
  }
  for (const std::string& s : skipped) text << "skip " << s << "\n";
  if (!skipped.empty()) text << "\n";
  text << "verify: " << reps.size() << " checks, "
       << (reps.size() - static_cast<size_t>(failed)) << " passed, " << failed
       << " failed\n";
  const std::string prov = provenance_line(config_hash(cfg), cfg.seed);
  if (cfg.out.empty()) {
    std::cout << prov << text.str();
  } else {
    emit_file(cfg.out, prov + text.str());
    emit_file(cfg.out + ".csv", prov + csv.str());
  }
  if (failed > 0) {
    std::cerr << "verify: " << failed << " of " << reps.size()
              << " checks failed\n";
    return 1;
  }
  return 0;
}

// ---- report ----

std::vector<std::string> split_csv_row(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  bool quoted = false;
  for (size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      cells.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  cells.push_back(cur);
  return cells;
}

double row_number(const std::string& s, const std::string& line) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != s.size())
    throw std::runtime_error("config: malformed report row: " + line);
  return v;
}

int cmd_report(const CliOpts& o) {
  std::ifstream fs(o.report_input);
  if (!fs)
    throw std::runtime_error("config: report file not found: " +
                             o.report_input);
  std::string line, prov;
  bool seen_header = false;
  std::vector<std::string> order;
  std::map<std::string, VerificationReport> reps;
  while (std::getline(fs, line)) {
    if (!line.empty() && line[0] == '#') {
      if (prov.empty() && line.rfind("# greenfem", 0) == 0) prov = line + "\n";
      continue;
    }
    if (line.empty()) continue;
    const std::vector<std::string> cells = split_csv_row(line);
    if (!seen_header) {
      if (cells.size() != 4 || cells[0] != "kind" || cells[1] != "section" ||
          cells[2] != "key" || cells[3] != "value")
        throw std::runtime_error("config: not a report CSV: bad header");
      seen_header = true;
      continue;
    }
    if (cells.size() != 4)
      throw std::runtime_error("config: malformed report row: " + line);
    auto it = reps.find(cells[0]);
    if (it == reps.end()) {
      order.push_back(cells[0]);
      it = reps.emplace(cells[0], VerificationReport{}).first;
      it->second.kind = cells[0];
    }
    VerificationReport& r = it->second;
    const std::string& sec = cells[1];
    if (sec == "inputs") {
      r.inputs = cells[3];
    } else if (sec == "note") {
      r.note = cells[3];
    } else if (sec == "result") {
      r.pass = cells[3] == "1";
    } else if (sec == "value") {
      r.value(cells[2], row_number(cells[3], line));
    } else if (sec == "threshold") {
      r.threshold(cells[2], row_number(cells[3], line));
    } else {
      if (r.trace.empty() || r.trace.back().first != sec)
        r.trace.emplace_back(sec,
                             std::vector<std::pair<std::string, double>>{});
      r.trace.back().second.emplace_back(cells[2],
                                         row_number(cells[3], line));
    }
  }
  if (!seen_header)
    throw std::runtime_error("config: not a report CSV: no header row");
  std::ostringstream os;
  int failed = 0;
  for (const std::string& k : order) {
    os << format_report(reps[k]) << "\n";
    if (!reps[k].pass) ++failed;
  }
  os << "report: " << order.size() << " checks, " << (order.size() - failed)
     << " passed, " << failed << " failed\n";
  if (prov.empty()) prov = provenance_line(config_hash(RunConfig{}), 0);
  if (o.out.empty())
    std::cout << prov << os.str();
  else
    emit_file(o.out, prov + os.str());
  return 0;
}

}  // namespace

int run_command(int argc, const char* const* argv) {
  CLI::App app{"P1 finite-element engine for divergence-form systems"};
  app.require_subcommand(1);
  CliOpts o;
  CLI::App* s_solve =
      app.add_subcommand("solve", "solve a boundary-value problem");
  CLI::App* s_green =
      app.add_subcommand("green", "tabulate pole-averaged Green fields");
  CLI::App* s_ngreen = app.add_subcommand(
      "neumann-green", "Green fields on an all-flux boundary");
  CLI::App* s_fund = app.add_subcommand(
      "fundamental", "free-space fundamental solution on a large disk");
  CLI::App* s_verify =
      app.add_subcommand("verify", "run verification checks");
  CLI::App* s_report =
      app.add_subcommand("report", "render a verification CSV as text");
  for (CLI::App* s : {s_solve, s_green, s_ngreen, s_fund, s_verify})
    add_common(s, o);
  s_report->add_option("input", o.report_input, "verification CSV file")
      ->required();
  s_report->add_option("--out", o.out, "output file (default: stdout)");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }
  try {
    if (app.got_subcommand(s_solve)) return cmd_solve(o);
    if (app.got_subcommand(s_green)) return cmd_green(o, false);
    if (app.got_subcommand(s_ngreen)) return cmd_green(o, true);
    if (app.got_subcommand(s_fund)) return cmd_fundamental(o);
    if (app.got_subcommand(s_verify)) return cmd_verify(o);
    if (app.got_subcommand(s_report)) return cmd_report(o);
  } catch (const CheckFailure& e) {
    std::cerr << "check failed: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}

int run_command(const std::vector<std::string>& args) {
  std::vector<std::string> full;
  full.reserve(args.size() + 1);
  full.push_back("greenfem");
  full.insert(full.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  argv.reserve(full.size());
  for (const std::string& s : full) argv.push_back(s.c_str());
  return run_command(static_cast<int>(argv.size()), argv.data());
}

}  // namespace greenfem
