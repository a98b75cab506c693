#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "greenfem/solve.hpp"

namespace greenfem {

// Discrete kernels of the operator and its adjoint, columns orthonormal in
// the boundary inner product.
struct KernelBasis {
  int m = 1;
  Eigen::MatrixXd V;      // null(K): fields with vanishing energy
  Eigen::MatrixXd Vstar;  // null(K^T): test-side kernel
  double sigma_max = 0.0;
  double sigma_kernel_max = 0.0;  // largest singular value inside the kernel
  double sigma_next = 0.0;        // first singular value above the kernel
};

// Detects both kernels by shift-inverted subspace iteration; errors out when
// the primal/adjoint dimensions differ or the spectral gap above the kernel
// is thin.
KernelBasis compute_kernel(const AssembledSystem& sys);

// Solver for the pure-Neumann problem: the operator is singular, so loads
// split into a compatible part and a kernel-carried multiplier.  Solutions
// are gauged orthogonal to the kernel in the boundary inner product.
class NeumannEngine {
 public:
  NeumannEngine(const Mesh& mesh, const CoefficientField& coef);

  const Mesh& mesh() const { return *mesh_; }
  const AssembledSystem& system() const { return sys_; }
  const CoefficientField& coefficients() const { return coef_; }
  const KernelBasis& kernel() const { return kb_; }
  int m() const { return sys_.m; }
  const std::shared_ptr<const Locator>& locator() const { return locator_; }

  // Coefficients of the load's incompatible part (adjoint-kernel basis for
  // primal solves, primal-kernel basis for adjoint solves).
  Eigen::VectorXd compatibility_defect(const Eigen::VectorXd& load,
                                       bool adjoint = false) const;

  // Solve the gauged saddle problem.  Incompatible loads are refused unless
  // allow_projection is set, in which case the kernel-carried part is
  // absorbed by the multiplier (returned through *multiplier).
  FemSolution solve(const Eigen::VectorXd& load,
                    Eigen::VectorXd* multiplier = nullptr,
                    bool allow_projection = false) const;
  FemSolution solve_adjoint(const Eigen::VectorXd& load,
                            Eigen::VectorXd* multiplier = nullptr,
                            bool allow_projection = false) const;

  // Multiplier coefficients as a nodal field (values of the kernel
  // combination carrying the incompatibility).
  Eigen::VectorXd multiplier_field(const Eigen::VectorXd& coeffs,
                                   bool adjoint = false) const;

  double energy_product(const Eigen::VectorXd& u, const Eigen::VectorXd& v) const;

 private:
  const Mesh* mesh_;
  CoefficientField coef_;
  AssembledSystem sys_;
  KernelBasis kb_;
  std::shared_ptr<const Locator> locator_;
  Eigen::SparseMatrix<double> MbVstar_, MbV_;  // coupling columns
  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu_,
      lu_t_;

  FemSolution saddle_solve(const Eigen::VectorXd& load, bool adjoint,
                           Eigen::VectorXd* multiplier,
                           bool allow_projection) const;
};

}  // namespace greenfem
