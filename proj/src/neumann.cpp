#include "greenfem/neumann.hpp"

#include <Eigen/SparseCholesky>
#include <cmath>
#include <random>
#include <stdexcept>

namespace greenfem {

namespace {

// Deterministic gaussians: raw mt19937_64 bits plus explicit Box-Muller, so
// results are identical across standard libraries.
class DetGauss {
 public:
  explicit DetGauss(uint64_t seed) : g_(seed) {}
  double operator()() {
    if (have_) {
      have_ = false;
      return spare_;
    }
    double u1 = 0.0;
    while (u1 <= 1e-300) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    have_ = true;
    spare_ = r * std::sin(2.0 * M_PI * u2);
    return r * std::cos(2.0 * M_PI * u2);
  }

 private:
  std::mt19937_64 g_;
  bool have_ = false;
  double spare_ = 0.0;
  double uniform() { return static_cast<double>(g_() >> 11) * 0x1.0p-53; }
};

double power_sigma_max(const Eigen::SparseMatrix<double>& K) {
  const Eigen::Index n = K.rows();
  DetGauss rng(0x5eed5eed1234abcdull);
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = rng();
  v.normalize();
  double s2 = 0.0;
  for (int it = 0; it < 60; ++it) {
    Eigen::VectorXd w = K.transpose() * (K * v);
    s2 = v.dot(w);
    const double nw = w.norm();
    if (nw <= 0.0) return 0.0;
    v = w / nw;
  }
  return std::sqrt(std::max(0.0, s2));
}

// Smallest singular pairs of K via shift-inverted subspace iteration on
// K^T K (or K K^T when transpose is set).
struct SmallSpace {
  Eigen::MatrixXd vectors;          // candidates, ordered by singular value
  Eigen::VectorXd sigma;
};

SmallSpace smallest_space(const Eigen::SparseMatrix<double>& K, bool transpose,
                          double sigma_max, int p, uint64_t seed) {
  const Eigen::Index n = K.rows();
  Eigen::SparseMatrix<double> B;
  if (!transpose)
    B = Eigen::SparseMatrix<double>(K.transpose()) * K;
  else
    B = K * Eigen::SparseMatrix<double>(K.transpose());
  const double shift = std::pow(1e-6 * std::max(sigma_max, 1e-30), 2);
  Eigen::SparseMatrix<double> Bs = B;
  for (Eigen::Index i = 0; i < n; ++i) Bs.coeffRef(i, i) += shift;
  Bs.makeCompressed();
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(Bs);
  if (ldlt.info() != Eigen::Success)
    throw std::runtime_error("kernel detection: shifted factorization failed");
  DetGauss rng(seed);
  Eigen::MatrixXd X(n, p);
  for (Eigen::Index i = 0; i < n; ++i)
    for (int j = 0; j < p; ++j) X(i, j) = rng();
  for (int it = 0; it < 30; ++it) {
    X = ldlt.solve(X);
    // Thin orthonormalization.
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(X);
    X = qr.householderQ() * Eigen::MatrixXd::Identity(n, p);
  }
  const Eigen::MatrixXd S = X.transpose() * (B * X);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (S + S.transpose()));
  SmallSpace out;
  out.vectors = X * es.eigenvectors();
  out.sigma = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return out;
}

}  // namespace

KernelBasis compute_kernel(const AssembledSystem& sys) {
  KernelBasis kb;
  kb.m = sys.m;
  kb.sigma_max = power_sigma_max(sys.K);
  const double thr = 1e-8 * kb.sigma_max;
  const int p = 8;
  const SmallSpace prim = smallest_space(sys.K, false, kb.sigma_max, p,
                                         0xc0ffee1122334455ull);
  const SmallSpace adj = smallest_space(sys.K, true, kb.sigma_max, p,
                                        0xdeadbeef99887766ull);
  int kp = 0, ka = 0;
  while (kp < p && prim.sigma[kp] <= thr) ++kp;
  while (ka < p && adj.sigma[ka] <= thr) ++ka;
  if (kp != ka)
    throw std::runtime_error(
        "kernel detection: primal and adjoint kernel dimensions differ (" +
        std::to_string(kp) + " vs " + std::to_string(ka) + ")");
  if (kp == 0)
    throw std::runtime_error("kernel detection: no kernel found (operator "
                             "looks nonsingular)");
  if (kp >= p)
    throw std::runtime_error("kernel detection: kernel fills the search space");
  kb.sigma_kernel_max = std::max(prim.sigma[kp - 1], adj.sigma[ka - 1]);
  kb.sigma_next = std::min(prim.sigma[kp], adj.sigma[ka]);
  if (kb.sigma_next < 10.0 * thr)
    throw std::runtime_error(
        "kernel detection: spectral gap above the kernel is too thin");
  kb.V = prim.vectors.leftCols(kp);
  kb.Vstar = adj.vectors.leftCols(ka);
  return kb;
}

namespace {

// Orthonormalize columns in the inner product given by M (boundary mass).
void m_orthonormalize(Eigen::MatrixXd& V, const Eigen::SparseMatrix<double>& M) {
  const Eigen::MatrixXd G = V.transpose() * (M * V);
  Eigen::LLT<Eigen::MatrixXd> llt(G);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error(
        "kernel basis degenerates on the boundary (Gram factorization failed)");
  V = V * Eigen::MatrixXd(llt.matrixL()).inverse().transpose();
}

}  // namespace

NeumannEngine::NeumannEngine(const Mesh& mesh, const CoefficientField& coef)
    : mesh_(&mesh), coef_(coef), sys_(assemble(mesh, coef)) {
  for (const auto& be : mesh.bedges)
    if (be.tag == BoundaryTag::D)
      throw std::runtime_error(
          "pure-Neumann solver used on a mesh with a Dirichlet part");
  locator_ = std::make_shared<Locator>(mesh);
  kb_ = compute_kernel(sys_);
  m_orthonormalize(kb_.V, sys_.Mb_all);
  m_orthonormalize(kb_.Vstar, sys_.Mb_all);
  const int N = static_cast<int>(sys_.K.rows());
  const int k = static_cast<int>(kb_.V.cols());
  MbVstar_ = (sys_.Mb_all * kb_.Vstar).sparseView(1.0, 1e-300);
  MbV_ = (sys_.Mb_all * kb_.V).sparseView(1.0, 1e-300);
  // Augmented operator [K, Mb V*; V^T Mb, 0] and its adjoint twin.
  std::vector<Eigen::Triplet<double>> tp, tt;
  for (int col = 0; col < sys_.K.outerSize(); ++col)
    for (Eigen::SparseMatrix<double>::InnerIterator it(sys_.K, col); it; ++it) {
      tp.emplace_back(static_cast<int>(it.row()), col, it.value());
      tt.emplace_back(col, static_cast<int>(it.row()), it.value());
    }
  for (int j = 0; j < k; ++j) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(MbVstar_, j); it; ++it) {
      tp.emplace_back(static_cast<int>(it.row()), N + j, it.value());
      tt.emplace_back(N + j, static_cast<int>(it.row()), it.value());
    }
    for (Eigen::SparseMatrix<double>::InnerIterator it(MbV_, j); it; ++it) {
      tp.emplace_back(N + j, static_cast<int>(it.row()), it.value());
      tt.emplace_back(static_cast<int>(it.row()), N + j, it.value());
    }
  }
  Eigen::SparseMatrix<double> Ap(N + k, N + k), At(N + k, N + k);
  Ap.setFromTriplets(tp.begin(), tp.end());
  At.setFromTriplets(tt.begin(), tt.end());
  lu_.compute(Ap);
  if (lu_.info() != Eigen::Success)
    throw std::runtime_error("gauged Neumann operator factorization failed");
  lu_t_.compute(At);
  if (lu_t_.info() != Eigen::Success)
    throw std::runtime_error(
        "gauged adjoint Neumann operator factorization failed");
}

Eigen::VectorXd NeumannEngine::compatibility_defect(const Eigen::VectorXd& load,
                                                    bool adjoint) const {
  if (adjoint) return kb_.V.transpose() * load;
  return kb_.Vstar.transpose() * load;
}

Eigen::VectorXd NeumannEngine::multiplier_field(const Eigen::VectorXd& coeffs,
                                                bool adjoint) const {
  if (adjoint) return kb_.V * coeffs;
  return kb_.Vstar * coeffs;
}

FemSolution NeumannEngine::saddle_solve(const Eigen::VectorXd& load,
                                        bool adjoint,
                                        Eigen::VectorXd* multiplier,
                                        bool allow_projection) const {
  const int N = static_cast<int>(sys_.K.rows());
  const int k = static_cast<int>(kb_.V.cols());
  if (load.size() != N) throw std::invalid_argument("load vector size mismatch");
  const Eigen::VectorXd defect = compatibility_defect(load, adjoint);
  const double scale = std::max(1e-30, load.lpNorm<Eigen::Infinity>());
  if (!allow_projection && defect.lpNorm<Eigen::Infinity>() > 1e-8 * scale)
    throw std::runtime_error(
        "incompatible load for the pure-Neumann problem (defect " +
        std::to_string(defect.lpNorm<Eigen::Infinity>() / scale) + " relative)");
  Eigen::VectorXd rhs(N + k);
  rhs.head(N) = load;
  rhs.tail(k).setZero();
  const Eigen::VectorXd x = adjoint ? lu_t_.solve(rhs) : lu_.solve(rhs);
  FemSolution sol;
  sol.mesh = mesh_;
  sol.m = sys_.m;
  sol.locator = locator_;
  sol.dofs = x.head(N);
  const Eigen::VectorXd lam = x.tail(k);
  // Residual over the augmented system.
  Eigen::VectorXd r(N + k);
  if (!adjoint) {
    r.head(N) = sys_.K * sol.dofs + MbVstar_ * lam - load;
    r.tail(k) = MbV_.transpose() * sol.dofs;
  } else {
    r.head(N) = sys_.K.transpose() * sol.dofs + MbV_ * lam - load;
    r.tail(k) = MbVstar_.transpose() * sol.dofs;
  }
  sol.residual = r.lpNorm<Eigen::Infinity>() / scale;
  if (!(sol.residual <= 1e-10))
    throw std::runtime_error("gauged Neumann solve residual too large: " +
                             std::to_string(sol.residual));
  if (multiplier) *multiplier = lam;
  return sol;
}

FemSolution NeumannEngine::solve(const Eigen::VectorXd& load,
                                 Eigen::VectorXd* multiplier,
                                 bool allow_projection) const {
  return saddle_solve(load, false, multiplier, allow_projection);
}

FemSolution NeumannEngine::solve_adjoint(const Eigen::VectorXd& load,
                                         Eigen::VectorXd* multiplier,
                                         bool allow_projection) const {
  return saddle_solve(load, true, multiplier, allow_projection);
}

double NeumannEngine::energy_product(const Eigen::VectorXd& u,
                                     const Eigen::VectorXd& v) const {
  return u.dot(sys_.K * v);
}

}  // namespace greenfem
