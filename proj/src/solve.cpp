#include "greenfem/solve.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace greenfem {

double FemSolution::eval(Vec2 p, int alpha) const {
  std::array<double, 3> l{};
  const int t = locator->locate(p, &l);
  const auto& v = mesh->tris[t];
  double s = 0.0;
  for (int k = 0; k < 3; ++k) s += l[k] * dofs[v[k] * m + alpha];
  return s;
}

Vec2 FemSolution::eval_grad(Vec2 p, int alpha) const {
  return grad_on_tri(locator->locate(p), alpha);
}

Vec2 FemSolution::grad_on_tri(int t, int alpha) const {
  const auto& v = mesh->tris[t];
  const Vec2 p0 = mesh->nodes[v[0]], p1 = mesh->nodes[v[1]], p2 = mesh->nodes[v[2]];
  const double twoA = cross(p1 - p0, p2 - p0);
  Vec2 g{0, 0};
  for (int k = 0; k < 3; ++k) {
    const Vec2 gk = (1.0 / twoA) * perp(mesh->nodes[v[(k + 2) % 3]] -
                                        mesh->nodes[v[(k + 1) % 3]]);
    g = g + dofs[v[k] * m + alpha] * gk;
  }
  return g;
}

double grad_lt_power(const Mesh& mesh, int m, const Eigen::VectorXd& u, double t) {
  double s = 0.0;
  for (int tri = 0; tri < mesh.num_tris(); ++tri) {
    const auto& v = mesh.tris[tri];
    const Vec2 p0 = mesh.nodes[v[0]], p1 = mesh.nodes[v[1]], p2 = mesh.nodes[v[2]];
    const double twoA = cross(p1 - p0, p2 - p0);
    double frob2 = 0.0;
    for (int a = 0; a < m; ++a) {
      Vec2 g{0, 0};
      for (int k = 0; k < 3; ++k) {
        const Vec2 gk = (1.0 / twoA) * perp(mesh.nodes[v[(k + 2) % 3]] -
                                            mesh.nodes[v[(k + 1) % 3]]);
        g = g + u[v[k] * m + a] * gk;
      }
      frob2 += dot(g, g);
    }
    s += 0.5 * twoA * std::pow(frob2, 0.5 * t);
  }
  return s;
}

double field_lt_power(const Mesh& mesh, int m, const Eigen::VectorXd& u, double t) {
  double s = 0.0;
  for (int tri = 0; tri < mesh.num_tris(); ++tri) {
    const auto& v = mesh.tris[tri];
    const double w = tri_area(mesh, tri) / 3.0;
    for (int e = 0; e < 3; ++e) {
      double mag2 = 0.0;
      for (int a = 0; a < m; ++a) {
        const double ua =
            0.5 * (u[v[e] * m + a] + u[v[(e + 1) % 3] * m + a]);
        mag2 += ua * ua;
      }
      s += w * std::pow(mag2, 0.5 * t);
    }
  }
  return s;
}

MixedEngine::MixedEngine(const Mesh& mesh, const CoefficientField& coef)
    : mesh_(&mesh), coef_(coef), sys_(assemble(mesh, coef)) {
  locator_ = std::make_shared<Locator>(mesh);
  const int n = mesh.num_nodes(), m = sys_.m;
  free_of_dof_.assign(n * m, -1);
  for (int i = 0; i < n; ++i) {
    if (sys_.on_D[i]) continue;
    for (int a = 0; a < m; ++a) {
      free_of_dof_[i * m + a] = static_cast<int>(dof_of_free_.size());
      dof_of_free_.push_back(i * m + a);
    }
  }
  if (dof_of_free_.empty() || dof_of_free_.size() == static_cast<std::size_t>(n) * m)
    throw std::runtime_error(
        "constrained solver needs a nonempty proper Dirichlet part");
  const int nf = static_cast<int>(dof_of_free_.size());
  std::vector<Eigen::Triplet<double>> tf, tft;
  for (int col = 0; col < sys_.K.outerSize(); ++col) {
    const int fc = free_of_dof_[col];
    if (fc < 0) continue;
    for (Eigen::SparseMatrix<double>::InnerIterator it(sys_.K, col); it; ++it) {
      const int fr = free_of_dof_[it.row()];
      if (fr < 0) continue;
      tf.emplace_back(fr, fc, it.value());
      tft.emplace_back(fc, fr, it.value());
    }
  }
  Eigen::SparseMatrix<double> Kff(nf, nf), Kfft(nf, nf);
  Kff.setFromTriplets(tf.begin(), tf.end());
  Kfft.setFromTriplets(tft.begin(), tft.end());
  lu_.compute(Kff);
  if (lu_.info() != Eigen::Success)
    throw std::runtime_error("factorization of the constrained operator failed");
  lu_t_.compute(Kfft);
  if (lu_t_.info() != Eigen::Success)
    throw std::runtime_error(
        "factorization of the transposed constrained operator failed");
}

FemSolution MixedEngine::back_substitute(const Eigen::VectorXd& load,
                                         bool transpose) const {
  const int nf = static_cast<int>(dof_of_free_.size());
  if (load.size() != static_cast<Eigen::Index>(free_of_dof_.size()))
    throw std::invalid_argument("load vector has the wrong size");
  Eigen::VectorXd bf(nf);
  for (int k = 0; k < nf; ++k) bf[k] = load[dof_of_free_[k]];
  Eigen::VectorXd xf = transpose ? Eigen::VectorXd(lu_t_.solve(bf))
                                 : Eigen::VectorXd(lu_.solve(bf));
  FemSolution sol;
  sol.mesh = mesh_;
  sol.m = sys_.m;
  sol.locator = locator_;
  sol.dofs = Eigen::VectorXd::Zero(free_of_dof_.size());
  // Residual of the constrained rows, relative to the load scale; a couple
  // of refinement passes recover the digits conditioning eats on fine
  // near-unconstrained systems.
  const double scale = std::max(1e-30, bf.lpNorm<Eigen::Infinity>());
  Eigen::VectorXd rf(nf);
  double rmax = 0.0;
  for (int pass = 0;; ++pass) {
    for (int k = 0; k < nf; ++k) sol.dofs[dof_of_free_[k]] = xf[k];
    const Eigen::VectorXd r_full =
        transpose ? Eigen::VectorXd(sys_.K.transpose() * sol.dofs)
                  : Eigen::VectorXd(sys_.K * sol.dofs);
    rmax = 0.0;
    for (int k = 0; k < nf; ++k) {
      rf[k] = bf[k] - r_full[dof_of_free_[k]];
      rmax = std::max(rmax, std::abs(rf[k]));
    }
    if (rmax <= 1e-12 * scale || pass == 2) break;
    xf += transpose ? Eigen::VectorXd(lu_t_.solve(rf))
                    : Eigen::VectorXd(lu_.solve(rf));
  }
  sol.residual = rmax / scale;
  if (!(sol.residual <= 1e-10)) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", sol.residual);
    throw std::runtime_error(std::string("solver residual exceeds tolerance: ") +
                             buf);
  }
  return sol;
}

FemSolution MixedEngine::solve(const Eigen::VectorXd& load) const {
  return back_substitute(load, false);
}

FemSolution MixedEngine::solve_adjoint(const Eigen::VectorXd& load) const {
  return back_substitute(load, true);
}

double MixedEngine::energy_product(const Eigen::VectorXd& u,
                                   const Eigen::VectorXd& v) const {
  return u.dot(sys_.K * v);
}

}  // namespace greenfem
