#include "greenfem/green.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace greenfem {

namespace {

double longest_edge(const Mesh& mesh, int t) {
  double e = 0.0;
  for (int k = 0; k < 3; ++k) {
    const Vec2 a = mesh.nodes[mesh.tris[t][k]];
    const Vec2 b = mesh.nodes[mesh.tris[t][(k + 1) % 3]];
    e = std::max(e, std::hypot(b.x - a.x, b.y - a.y));
  }
  return e;
}

void require_resolved(const Mesh& mesh, const Locator& loc, Vec2 x,
                      double rho) {
  if (!(rho > 0.0)) throw std::invalid_argument("averaging radius must be positive");
  const double local = longest_edge(mesh, loc.locate(x));
  if (rho < 2.0 * local * (1.0 - 1e-12))
    throw std::invalid_argument(
        "averaging radius " + std::to_string(rho) +
        " is under-resolved: local mesh size at the pole is " +
        std::to_string(local));
}

GreenBC mixed_bc_label(const Mesh& mesh) {
  for (const auto& be : mesh.bedges)
    if (be.tag == BoundaryTag::N) return GreenBC::Mixed;
  return GreenBC::Dirichlet;
}

}  // namespace

const char* to_string(GreenBC bc) {
  switch (bc) {
    case GreenBC::Mixed: return "mixed";
    case GreenBC::Dirichlet: return "dirichlet";
    case GreenBC::Neumann: return "neumann";
    case GreenBC::Free: return "free";
  }
  return "mixed";
}

static GreenBC bc_from_string(const std::string& s) {
  if (s == "mixed") return GreenBC::Mixed;
  if (s == "dirichlet") return GreenBC::Dirichlet;
  if (s == "neumann") return GreenBC::Neumann;
  if (s == "free") return GreenBC::Free;
  throw std::invalid_argument("unknown boundary-condition label: " + s);
}

Eigen::MatrixXd GreenField::eval(Vec2 y) const {
  Eigen::MatrixXd v(m, m);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) v(a, b) = columns[a].eval(y, b);
  return v;
}

GreenField approximate_green(const MixedEngine& eng, Vec2 x, double rho,
                             bool of_adjoint) {
  const Mesh& mesh = eng.mesh();
  require_resolved(mesh, *eng.locator(), x, rho);
  GreenField gf;
  gf.bc = mixed_bc_label(mesh);
  gf.pole = x;
  gf.rho = rho;
  gf.m = eng.m();
  gf.of_adjoint = of_adjoint;
  for (int a = 0; a < gf.m; ++a) {
    // The averaging functional enters through the same sign convention as a
    // volume load, so the column reproduces the log kernel with its
    // negative interior values.
    const Eigen::VectorXd g = -average_functional(mesh, gf.m, x, rho, a);
    gf.columns.push_back(of_adjoint ? eng.solve(g) : eng.solve_adjoint(g));
  }
  return gf;
}

GreenField neumann_green(const NeumannEngine& eng, Vec2 x, double rho,
                         bool of_adjoint) {
  const Mesh& mesh = eng.mesh();
  require_resolved(mesh, *eng.locator(), x, rho);
  GreenField gf;
  gf.bc = GreenBC::Neumann;
  gf.pole = x;
  gf.rho = rho;
  gf.m = eng.m();
  gf.of_adjoint = of_adjoint;
  for (int a = 0; a < gf.m; ++a) {
    const Eigen::VectorXd g = -average_functional(mesh, gf.m, x, rho, a);
    Eigen::VectorXd lam;
    gf.columns.push_back(of_adjoint ? eng.solve(g, &lam, true)
                                    : eng.solve_adjoint(g, &lam, true));
    // Stored so that the kernel datum compensates +g in the compatibility
    // pairing (unit-mass data carries the positive constant).
    gf.lambda.push_back(-lam);
  }
  return gf;
}

GreenField fundamental_solution(const CoefficientField& coef, Vec2 x,
                                double rho, double R, double h_near) {
  if (!(rho > 0.0) || rho > 1.0)
    throw std::invalid_argument("fundamental-solution radius must lie in (0, 1]");
  if (R <= 0.0) R = 4.0 / rho;
  if (R < 4.0 / rho * (1.0 - 1e-12))
    throw std::invalid_argument(
        "disk radius too small: the compensating annulus needs R >= 4/rho");
  if (h_near <= 0.0) h_near = rho / 8.0;

  // Graded 256-gon disk: size halves with each halving of the distance to
  // the pole, from R/8 far out down to h_near at the pole.
  const Domain dom = regular_polygon_disk(x, R, 256, BoundaryTag::D, 4.0, R);
  const double h_far = R / 8.0;
  const int levels =
      h_far <= h_near
          ? 0
          : static_cast<int>(std::ceil(std::log2(h_far / h_near) - 1e-12));
  auto mesh = std::make_shared<Mesh>(triangulate(dom, h_far));
  refine_toward(*mesh, dom, x, levels);

  MixedEngine eng(*mesh, coef);
  GreenField gf;
  gf.bc = GreenBC::Free;
  gf.pole = x;
  gf.rho = rho;
  gf.m = eng.m();
  gf.R = R;
  gf.owned_mesh = mesh;

  // Self-equilibrated data: unit average on B_rho against the compensating
  // annulus charge; exact clipped moments make the total mass vanish.
  const std::vector<double> mom_near = hat_moments(*mesh, x, rho);
  const std::vector<double> mom_in = hat_moments(*mesh, x, 1.0 / rho);
  const std::vector<double> mom_out = hat_moments(*mesh, x, 2.0 / rho);
  const double c_near = 1.0 / (M_PI * rho * rho);
  const double c_ann = rho * rho / (3.0 * M_PI);
  const int n = mesh->num_nodes();
  for (int a = 0; a < gf.m; ++a) {
    Eigen::VectorXd l = Eigen::VectorXd::Zero(n * gf.m);
    for (int i = 0; i < n; ++i)
      l[i * gf.m + a] =
          -(c_near * mom_near[i] - c_ann * (mom_out[i] - mom_in[i]));
    FemSolution u = eng.solve_adjoint(l);
    // Representative with zero mean over B_1(x), per scalar component.
    for (int b = 0; b < gf.m; ++b) {
      const Eigen::VectorXd avg = average_functional(*mesh, gf.m, x, 1.0, b);
      const double mean = avg.dot(u.dofs);
      for (int i = 0; i < n; ++i) u.dofs[i * gf.m + b] -= mean;
    }
    gf.columns.push_back(std::move(u));
  }
  return gf;
}

Eigen::MatrixXd evaluate_green(const GreenField& gf, Vec2 y) {
  return gf.eval(y);
}

Eigen::VectorXd representation_value(const GreenField& gf,
                                     const Eigen::VectorXd& load) {
  Eigen::VectorXd r(gf.m);
  for (int a = 0; a < gf.m; ++a) {
    if (load.size() != gf.columns[a].dofs.size())
      throw std::invalid_argument("load size does not match the field's mesh");
    // The load carries the weak-form minus; undoing it here makes the value
    // the volume pairing with the columns minus the boundary pairing.
    r[a] = -load.dot(gf.columns[a].dofs);
  }
  return r;
}

Eigen::MatrixXd representation_solve(
    const std::vector<GreenField>& fields,
    const std::function<void(Vec2, double*)>& f,
    const std::function<void(Vec2, double*)>& f_N) {
  Eigen::MatrixXd out(static_cast<int>(fields.size()),
                      fields.empty() ? 0 : fields[0].m);
  std::map<const Mesh*, Eigen::VectorXd> loads;
  for (size_t k = 0; k < fields.size(); ++k) {
    const Mesh* mesh = &fields[k].mesh();
    auto it = loads.find(mesh);
    if (it == loads.end())
      it = loads.emplace(mesh, assemble_load(*mesh, fields[k].m, f, f_N)).first;
    out.row(static_cast<int>(k)) =
        representation_value(fields[k], it->second).transpose();
  }
  return out;
}

GreenTable tabulate_green(const GreenField& gf, const std::vector<Vec2>& pts) {
  GreenTable gt;
  gt.rho = gf.rho;
  gt.h = gf.mesh().target_h;
  gt.bc = gf.bc;
  append_green(gt, gf, pts);
  return gt;
}

void append_green(GreenTable& gt, const GreenField& gf,
                  const std::vector<Vec2>& pts) {
  if (gt.rows.empty()) {
    gt.rho = gf.rho;
    gt.h = gf.mesh().target_h;
    gt.bc = gf.bc;
  }
  for (const Vec2 y : pts) {
    if (std::hypot(y.x - gf.pole.x, y.y - gf.pole.y) < 2.0 * gf.rho) continue;
    gt.rows.push_back({gf.pole, y, gf.eval(y)});
  }
}

static void put(std::ostream& os, double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  os << buf;
}

void write_green_table(std::ostream& os, const GreenTable& gt) {
  os << "pole_x,pole_y,y1,y2,alpha,beta,value,rho,h,bc\n";
  for (const auto& r : gt.rows)
    for (int a = 0; a < r.val.rows(); ++a)
      for (int b = 0; b < r.val.cols(); ++b) {
        put(os, r.pole.x);
        os << ',';
        put(os, r.pole.y);
        os << ',';
        put(os, r.y.x);
        os << ',';
        put(os, r.y.y);
        os << ',' << a << ',' << b << ',';
        put(os, r.val(a, b));
        os << ',';
        put(os, gt.rho);
        os << ',';
        put(os, gt.h);
        os << ',' << to_string(gt.bc) << '\n';
      }
}

GreenTable read_green_table(std::istream& is) {
  std::string line;
  // Provenance and comment lines may precede the header.
  while (std::getline(is, line) && (line.empty() || line[0] == '#')) {
  }
  if (line != "pole_x,pole_y,y1,y2,alpha,beta,value,rho,h,bc")
    throw std::runtime_error("not a Green-table CSV: bad header");
  struct Entry {
    double px, py, y1, y2, v;
    int a, b;
  };
  std::vector<Entry> entries;
  GreenTable gt;
  int m = 1;
  bool first = true;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    Entry e{};
    char c;
    double rho, h;
    std::string bc;
    if (!(ls >> e.px >> c >> e.py >> c >> e.y1 >> c >> e.y2 >> c >> e.a >> c >>
          e.b >> c >> e.v >> c >> rho >> c >> h >> c) ||
        !std::getline(ls, bc))
      throw std::runtime_error("malformed Green-table row: " + line);
    if (first) {
      gt.rho = rho;
      gt.h = h;
      gt.bc = bc_from_string(bc);
      first = false;
    }
    m = std::max({m, e.a + 1, e.b + 1});
    entries.push_back(e);
  }
  std::map<std::array<double, 4>, int> index;
  for (const auto& e : entries) {
    const std::array<double, 4> key{e.px, e.py, e.y1, e.y2};
    auto it = index.find(key);
    if (it == index.end()) {
      it = index.emplace(key, static_cast<int>(gt.rows.size())).first;
      gt.rows.push_back(
          {{e.px, e.py}, {e.y1, e.y2}, Eigen::MatrixXd::Zero(m, m)});
    }
    gt.rows[it->second].val(e.a, e.b) = e.v;
  }
  return gt;
}

}  // namespace greenfem
