#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "greenfem/green.hpp"
#include "greenfem/neumann.hpp"
#include "greenfem/report.hpp"
#include "greenfem/solve.hpp"

namespace greenfem {

// ---- Local-region integrals of P1 fields ----

// Integral of |grad u|^t over B_rho(c) clipped to the mesh.  Exact: P1
// gradients are constant per triangle and the clipped areas are exact.
double region_grad_lt(const FemSolution& u, Vec2 c, double rho, double t);

// Integral of sum_alpha |u^alpha - shift[alpha]|^t over the clipped region
// by the composite region rule (exact through quadratic integrands).
double region_dev_lt(const FemSolution& u, Vec2 c, double rho, double t,
                     const Eigen::VectorXd& shift);

// Component averages over B_rho(c) under the Dirichlet-adapted convention:
// identically zero as soon as the region closure reaches a D arc.
Eigen::VectorXd region_average(const FemSolution& u, const Domain& dom, Vec2 c,
                               double rho);

// ---- Atoms ----

// Two-cell sign pattern on the local region at (x, rho): bounded by
// 1/|region|, with quadrature-exact zero mean whenever the plain average
// applies.  Regions reaching a Dirichlet arc carry the one-cell variant,
// for which the adapted average is zero by convention.
struct Atom {
  LocalDomain ld;
  Vec2 split;  // unit normal of the dividing line through the center
  double vplus = 0.0;
  double vminus = 0.0;
  int component = 0;
  double area = 0.0;  // clipped region area

  double density(Vec2 p, int alpha) const {
    if (alpha != component) return 0.0;
    return dot(p - ld.center, split) >= 0.0 ? vplus : vminus;
  }
};

Atom make_atom(const Mesh& mesh, const Domain& dom, Vec2 x, double rho,
               double angle, int component = 0);
// Weak-form load vector of the atom density (same sign convention as
// assemble_load).
Eigen::VectorXd atom_load(const Mesh& mesh, int m, const Atom& atom);
// Integral of u^component * atom over the region.
double atom_pairing(const FemSolution& u, const Atom& atom);

// ---- Oscillation seminorm ----

struct BmoResult {
  double oscillation = 0.0;  // sup of local mean oscillations
  double atomic = 0.0;       // max |<u, atom>| over the generated family
  int centers = 0;
  int radii = 0;
};

// Sampled seminorm of one solution component: centers are the mesh nodes
// nearest to a grid x grid lattice over the domain box, radii run
// dyadically down from r0/2 while staying >= 4h.  Oscillations use the
// Dirichlet-adapted average; the atom family pairs the same regions.
BmoResult bmo_norm(const FemSolution& u, const Domain& dom, int grid,
                   int component = 0);

// ---- Fits ----

struct LogFit {
  Eigen::VectorXd slope;  // per diagonal component
  Eigen::VectorXd intercept;
  Eigen::VectorXd r_squared;
};

// Least-squares fit of circle-averaged diagonal values at distance r from
// the pole against log r.  Requires at least four radii.
LogFit fit_log_singularity(const GreenField& gf,
                           const std::vector<double>& radii);

// Log-log least-squares slope of value against distance.  Pairs with a
// nonpositive distance or value are dropped; fewer than four survivors is
// an error.
double fit_decay_exponent(const std::vector<std::pair<double, double>>& values);

// ---- Verification drivers ----

// Randomized one-sided check of the named integral inequality on dom:
// LHS/RHS ratios over 20 seeded samples at mesh size h and h/2; pass means
// every ratio is finite and the max grows at most 1.5x under refinement.
// Kinds: poincare_D, sobolev_poincare, poincare, morrey, boundary_poincare,
// korn, caccioppoli, energy, atomic_linf, lt_estimates.
VerificationReport verify_inequality(const std::string& kind,
                                     const Domain& dom,
                                     const CoefficientField& coef, double h,
                                     unsigned seed = 1);

// Gradient integrability threshold: solves the load problem on every mesh
// level, classifies each t by the growth of integral |grad u|^t under
// refinement (stable < 5% per level, growing >= 20%), and brackets the
// threshold exponent between the last stable and first growing t.
VerificationReport meyers_exponent(const Domain& dom,
                                   const CoefficientField& coef,
                                   const std::function<void(Vec2, double*)>& f,
                                   std::vector<double> h_levels,
                                   const std::vector<double>& t_grid);

// Pole symmetry of Green fields; pairs are (primal[i], adjoint[i]) with the
// adjoint list built for the transposed operator.  Fields with a Dirichlet
// part compare pointwise at the opposite poles; whole-boundary flux and
// free-space fields compare double differences over pole pairs, which
// cancels the additive normalization freedom.
VerificationReport verify_symmetry(const std::vector<GreenField>& primal,
                                   const std::vector<GreenField>& adjoint,
                                   double tol);

// Direct solve against Green-representation values at the poles, relative
// to the solution sup; tol covers the averaged-vs-pointwise gap of the
// mollified pole data.
VerificationReport verify_representation(
    const MixedEngine& eng, const std::function<void(Vec2, double*)>& f,
    const std::function<void(Vec2, double*)>& f_N,
    const std::vector<Vec2>& poles, double rho, double tol = 0.02);
// Whole-boundary-flux variant with volume data only; the load is routed
// through the compatibility projection.
VerificationReport verify_representation(
    const NeumannEngine& eng, const std::function<void(Vec2, double*)>& f,
    const std::vector<Vec2>& poles, double rho, double tol = 0.02);

// Relative defect of the duality pairing of a primal solution (with its
// load) against an adjoint solution (with its load) on one mesh:
// |<load_g, u> - <load_f, w>| / (|lhs| + |rhs| + 1e-14).
double verify_green_identity(const FemSolution& u, const FemSolution& w,
                             const Eigen::VectorXd& load_f,
                             const Eigen::VectorXd& load_g);

}  // namespace greenfem
