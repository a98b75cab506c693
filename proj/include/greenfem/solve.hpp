#pragma once

#include <Eigen/Sparse>
#include <memory>

#include "greenfem/operators.hpp"

namespace greenfem {

// Piecewise-linear vector field on a mesh; component layout dof = node*m + a.
struct FemSolution {
  const Mesh* mesh = nullptr;
  int m = 1;
  Eigen::VectorXd dofs;
  double residual = 0.0;
  std::shared_ptr<const Locator> locator;

  double eval(Vec2 p, int alpha) const;
  // Gradient of component alpha, constant on each triangle.
  Vec2 eval_grad(Vec2 p, int alpha) const;
  Vec2 grad_on_tri(int t, int alpha) const;
};

// integral of |grad u|^t (Frobenius norm over components; exact per triangle).
double grad_lt_power(const Mesh& mesh, int m, const Eigen::VectorXd& u, double t);
// integral of |u|^t by the edge-midpoint rule.
double field_lt_power(const Mesh& mesh, int m, const Eigen::VectorXd& u, double t);

// Zero-Dirichlet solver for meshes with a nonempty Dirichlet part: caches
// the factorizations of the constrained operator and its transpose.
class MixedEngine {
 public:
  MixedEngine(const Mesh& mesh, const CoefficientField& coef);

  const Mesh& mesh() const { return *mesh_; }
  const AssembledSystem& system() const { return sys_; }
  const CoefficientField& coefficients() const { return coef_; }
  int m() const { return sys_.m; }
  const std::shared_ptr<const Locator>& locator() const { return locator_; }

  // A(u, phi) = load(phi) for all test phi vanishing on the Dirichlet part.
  FemSolution solve(const Eigen::VectorXd& load) const;
  // A(phi, w) = load(phi): the adjoint problem.
  FemSolution solve_adjoint(const Eigen::VectorXd& load) const;

  double energy_product(const Eigen::VectorXd& u, const Eigen::VectorXd& v) const;

 private:
  const Mesh* mesh_;
  CoefficientField coef_;
  AssembledSystem sys_;
  std::shared_ptr<const Locator> locator_;
  std::vector<int> free_of_dof_;  // dof -> free index or -1
  std::vector<int> dof_of_free_;
  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu_,
      lu_t_;

  FemSolution back_substitute(const Eigen::VectorXd& load, bool transpose) const;
};

}  // namespace greenfem
