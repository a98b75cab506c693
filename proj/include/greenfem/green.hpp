#pragma once

#include <iosfwd>
#include <memory>
#include <vector>

#include "greenfem/neumann.hpp"
#include "greenfem/solve.hpp"

namespace greenfem {

enum class GreenBC { Mixed, Dirichlet, Neumann, Free };

const char* to_string(GreenBC bc);

// Approximate Green function at a pole: one adjoint (or primal) solve per
// component with the exactly normalized local average as data.  Column a is
// the field y -> G^{a.}(x, y); entry (a, b) of an evaluation is component b
// of column a.
struct GreenField {
  GreenBC bc = GreenBC::Mixed;
  Vec2 pole{0.0, 0.0};
  double rho = 0.0;
  int m = 1;
  // Built from primal solves, i.e. the Green function of the adjoint
  // operator; used for the symmetry cross-checks.
  bool of_adjoint = false;
  std::vector<FemSolution> columns;     // size m
  std::vector<Eigen::VectorXd> lambda;  // pure Neumann: kernel datum, per column
  double R = 0.0;                       // free space: disk radius used
  std::shared_ptr<const Mesh> owned_mesh;  // free space: the disk mesh

  const Mesh& mesh() const { return *columns.at(0).mesh; }
  Eigen::MatrixXd eval(Vec2 y) const;
};

// Green field of the engine's operator (or, with of_adjoint, of its adjoint)
// at pole x with averaging radius rho.  Requires rho >= 2 * (local mesh size
// at x) so the averaging region is resolved.
GreenField approximate_green(const MixedEngine& eng, Vec2 x, double rho,
                             bool of_adjoint = false);

// Pure-Neumann variant: data is compatibility-projected, solves are gauged;
// the projection coefficients are kept as the kernel datum.
GreenField neumann_green(const NeumannEngine& eng, Vec2 x, double rho,
                         bool of_adjoint = false);

// Planar fundamental solution via a Dirichlet solve on a 256-gon disk of
// radius R about x with self-equilibrated data: a unit average on B_rho(x)
// against a compensating charge on the annulus rho^{-1} <= |y-x| <= 2/rho.
// Each scalar component is normalized to mean zero over B_1(x).  Defaults:
// R = 4/rho (the least admissible radius), h_near = rho/8.
GreenField fundamental_solution(const CoefficientField& coef, Vec2 x,
                                double rho, double R = 0.0,
                                double h_near = 0.0);

Eigen::MatrixXd evaluate_green(const GreenField& gf, Vec2 y);

// Exact discrete counterpart of the representation formula: entry a is the
// a-average over the pole region of the solution driven by `load`.
Eigen::VectorXd representation_value(const GreenField& gf,
                                     const Eigen::VectorXd& load);

// u(pole_k) estimates from the representation formula; row k pairs the data
// with the k-th field's columns.
Eigen::MatrixXd representation_solve(
    const std::vector<GreenField>& fields,
    const std::function<void(Vec2, double*)>& f,
    const std::function<void(Vec2, double*)>& f_N);

// Sampled Green values with provenance.
struct GreenTable {
  struct Row {
    Vec2 pole{0.0, 0.0};
    Vec2 y{0.0, 0.0};
    Eigen::MatrixXd val;
  };
  std::vector<Row> rows;
  double rho = 0.0;
  double h = 0.0;
  GreenBC bc = GreenBC::Mixed;
};

// Tabulates values at the points with |y - pole| >= 2 rho; closer points are
// skipped (the local average is not pointwise meaningful there).
GreenTable tabulate_green(const GreenField& gf, const std::vector<Vec2>& pts);
void append_green(GreenTable& gt, const GreenField& gf,
                  const std::vector<Vec2>& pts);

// CSV round-trip: pole_x, pole_y, y1, y2, alpha, beta, value, rho, h, bc.
void write_green_table(std::ostream& os, const GreenTable& gt);
GreenTable read_green_table(std::istream& is);

}  // namespace greenfem
