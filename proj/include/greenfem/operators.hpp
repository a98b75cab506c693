#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <functional>
#include <string>
#include <vector>

#include "greenfem/expr.hpp"
#include "greenfem/geometry.hpp"
#include "greenfem/mesh.hpp"
#include "greenfem/report.hpp"

namespace greenfem {

// Divergence-form coefficient tensor a_{alpha beta}^{i j}(y): i, j are the
// gradient directions, alpha, beta the solution components.  Flat layout
// A[((i*m + alpha)*2 + j)*m + beta], 4*m*m entries.
struct CoefficientField {
  int m = 1;
  std::function<void(Vec2, double*)> tensor;
  std::function<double(Vec2)> mu, lambda;  // set for elasticity coefficients
  bool is_elasticity = false;
  std::string desc;

  int tensor_size() const { return 4 * m * m; }
  int idx(int i, int alpha, int j, int beta) const {
    return ((i * m + alpha) * 2 + j) * m + beta;
  }
};

// Scalar Laplacian: m=1, identity tensor.
CoefficientField laplace_coefficients();

// Planar elasticity with variable Lame moduli:
//   a_{alpha beta}^{i j} = mu (d_ij d_ab + d_ja d_ib) + lambda d_ia d_jb.
CoefficientField elasticity_coefficients(Expr mu, Expr lambda);

// "laplace" or "lame" plus modulus expressions (evaluated in y1, y2).
CoefficientField coefficients_from_spec(const std::string& op,
                                        const std::string& mu,
                                        const std::string& lambda);

// Legendre-Hadamard constant over sampled points/directions; for elasticity
// additionally min mu and min (mu - max(0,-lambda)).
VerificationReport verify_ellipticity(const CoefficientField& coef,
                                      const Domain& dom, double c0 = 1e-8);

struct AssembledSystem {
  int m = 1;
  Eigen::SparseMatrix<double> K;       // row = test dof, col = trial dof
  Eigen::SparseMatrix<double> Mb_all;  // boundary mass, whole boundary
  Eigen::SparseMatrix<double> Mb_N;    // boundary mass, Neumann part
  std::vector<char> on_D;              // per node
};

AssembledSystem assemble(const Mesh& mesh, const CoefficientField& coef);

// Load functional  phi -> -<f, phi> + <f_N, phi>_N  as a dof vector.
// Either argument may be empty; f fills m components at a point.
Eigen::VectorXd assemble_load(const Mesh& mesh, int m,
                              const std::function<void(Vec2, double*)>& f,
                              const std::function<void(Vec2, double*)>& f_N);

// Functional  v -> average of v^alpha over the local region at (c, rho),
// as a dof vector (exact P1 moments of the clipped region).
Eigen::VectorXd average_functional(const Mesh& mesh, int m, Vec2 c, double rho,
                                   int alpha);

// Per-triangle constant strain and stress of a displacement field (m=2):
// row-major 2x2 entries.
void strain_stress(const Mesh& mesh, const CoefficientField& coef,
                   const Eigen::VectorXd& u, int t, double strain[4],
                   double stress[4]);

}  // namespace greenfem
