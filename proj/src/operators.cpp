#include "greenfem/operators.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace greenfem {

CoefficientField laplace_coefficients() {
  CoefficientField c;
  c.m = 1;
  c.desc = "laplace";
  c.tensor = [](Vec2, double* A) {
    A[0] = 1.0;  // i=0,j=0
    A[1] = 0.0;  // i=0,j=1
    A[2] = 0.0;  // i=1,j=0
    A[3] = 1.0;  // i=1,j=1
  };
  return c;
}

CoefficientField elasticity_coefficients(Expr mu, Expr lambda) {
  CoefficientField c;
  c.m = 2;
  c.is_elasticity = true;
  c.mu = [mu](Vec2 y) { return mu(y); };
  c.lambda = [lambda](Vec2 y) { return lambda(y); };
  c.desc = "lame mu=" + mu.source() + " lambda=" + lambda.source();
  c.tensor = [mu, lambda](Vec2 y, double* A) {
    const double m_ = mu(y), l_ = lambda(y);
    const int m = 2;
    auto idx = [m](int i, int a, int j, int b) {
      return ((i * m + a) * 2 + j) * m + b;
    };
    for (int i = 0; i < 2; ++i)
      for (int a = 0; a < 2; ++a)
        for (int j = 0; j < 2; ++j)
          for (int b = 0; b < 2; ++b)
            A[idx(i, a, j, b)] = m_ * ((i == j && a == b ? 1.0 : 0.0) +
                                       (j == a && i == b ? 1.0 : 0.0)) +
                                 l_ * (i == a && j == b ? 1.0 : 0.0);
  };
  return c;
}

CoefficientField coefficients_from_spec(const std::string& op,
                                        const std::string& mu,
                                        const std::string& lambda) {
  if (op == "laplace") return laplace_coefficients();
  if (op == "lame")
    return elasticity_coefficients(Expr::parse(mu.empty() ? "1" : mu),
                                   Expr::parse(lambda.empty() ? "1" : lambda));
  throw std::invalid_argument("unknown operator '" + op +
                              "' (expected laplace or lame)");
}

VerificationReport verify_ellipticity(const CoefficientField& coef,
                                      const Domain& dom, double c0) {
  VerificationReport rep;
  rep.kind = "ellipticity";
  rep.inputs = coef.desc;
  const int m = coef.m;
  std::vector<double> A(coef.tensor_size());
  double min_lh = std::numeric_limits<double>::infinity();
  double min_mu = std::numeric_limits<double>::infinity();
  double min_gap = std::numeric_limits<double>::infinity();
  // Sample lattice over the domain.
  Vec2 lo{1e300, 1e300}, hi{-1e300, -1e300};
  for (const Vec2& p : dom.vertices()) {
    lo.x = std::min(lo.x, p.x);
    lo.y = std::min(lo.y, p.y);
    hi.x = std::max(hi.x, p.x);
    hi.y = std::max(hi.y, p.y);
  }
  const int ns = 32, na = 16;
  int samples = 0;
  for (int iy = 0; iy < ns; ++iy) {
    for (int ix = 0; ix < ns; ++ix) {
      const Vec2 y{lo.x + (hi.x - lo.x) * (ix + 0.5) / ns,
                   lo.y + (hi.y - lo.y) * (iy + 0.5) / ns};
      if (!dom.contains(y, -1e-9)) continue;
      ++samples;
      coef.tensor(y, A.data());
      for (int kx = 0; kx < na; ++kx) {
        const double tx = M_PI * kx / na;
        const double xi[2] = {std::cos(tx), std::sin(tx)};
        for (int ke = 0; ke < (m == 1 ? 1 : na); ++ke) {
          const double te = M_PI * ke / na;
          double eta[2] = {std::cos(te), std::sin(te)};
          if (m == 1) eta[0] = 1.0;
          double q = 0.0;
          for (int i = 0; i < 2; ++i)
            for (int a = 0; a < m; ++a)
              for (int j = 0; j < 2; ++j)
                for (int b = 0; b < m; ++b)
                  q += A[coef.idx(i, a, j, b)] * xi[i] * xi[j] *
                       (m == 1 ? 1.0 : eta[a] * eta[b]);
          min_lh = std::min(min_lh, q);
        }
      }
      if (coef.is_elasticity) {
        const double mv = coef.mu(y), lv = coef.lambda(y);
        min_mu = std::min(min_mu, mv);
        min_gap = std::min(min_gap, mv - std::max(0.0, -lv));
      }
    }
  }
  rep.value("samples", samples);
  rep.value("min_legendre_hadamard", min_lh);
  rep.threshold("min_legendre_hadamard", c0);
  bool ok = samples > 0 && min_lh >= c0;
  if (coef.is_elasticity) {
    rep.value("min_mu", min_mu);
    rep.value("min_mu_minus_lambda_neg", min_gap);
    rep.threshold("min_mu", c0);
    rep.threshold("min_mu_minus_lambda_neg", c0);
    ok = ok && min_mu >= c0 && min_gap >= c0;
  }
  rep.pass = ok;
  return rep;
}

AssembledSystem assemble(const Mesh& mesh, const CoefficientField& coef) {
  AssembledSystem sys;
  const int m = sys.m = coef.m;
  const int n = mesh.num_nodes();
  std::vector<double> A(coef.tensor_size());
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<std::size_t>(mesh.num_tris()) * 9 * m * m);
  for (int t = 0; t < mesh.num_tris(); ++t) {
    const auto& v = mesh.tris[t];
    const Vec2 p[3] = {mesh.nodes[v[0]], mesh.nodes[v[1]], mesh.nodes[v[2]]};
    const double twoA = cross(p[1] - p[0], p[2] - p[0]);
    const double area = 0.5 * twoA;
    Vec2 g[3];
    for (int k = 0; k < 3; ++k) g[k] = (1.0 / twoA) * perp(p[(k + 2) % 3] - p[(k + 1) % 3]);
    coef.tensor(tri_centroid(mesh, t), A.data());
    for (int I = 0; I < 3; ++I) {
      for (int J = 0; J < 3; ++J) {
        for (int a = 0; a < m; ++a) {
          for (int b = 0; b < m; ++b) {
            double val = 0.0;
            for (int i = 0; i < 2; ++i)
              for (int j = 0; j < 2; ++j)
                val += A[coef.idx(i, a, j, b)] * (&g[I].x)[i] * (&g[J].x)[j];
            trips.emplace_back(v[I] * m + a, v[J] * m + b, val * area);
          }
        }
      }
    }
  }
  sys.K.resize(n * m, n * m);
  sys.K.setFromTriplets(trips.begin(), trips.end());
  sys.K.makeCompressed();

  std::vector<Eigen::Triplet<double>> tall, tn;
  for (const auto& be : mesh.bedges) {
    const double len = dist(mesh.nodes[be.a], mesh.nodes[be.b]);
    const int id[2] = {be.a, be.b};
    for (int I = 0; I < 2; ++I)
      for (int J = 0; J < 2; ++J)
        for (int a = 0; a < m; ++a) {
          const double val = len / 6.0 * (I == J ? 2.0 : 1.0);
          tall.emplace_back(id[I] * m + a, id[J] * m + a, val);
          if (be.tag == BoundaryTag::N)
            tn.emplace_back(id[I] * m + a, id[J] * m + a, val);
        }
  }
  sys.Mb_all.resize(n * m, n * m);
  sys.Mb_all.setFromTriplets(tall.begin(), tall.end());
  sys.Mb_all.makeCompressed();
  sys.Mb_N.resize(n * m, n * m);
  sys.Mb_N.setFromTriplets(tn.begin(), tn.end());
  sys.Mb_N.makeCompressed();
  sys.on_D = nodes_on_tag(mesh, BoundaryTag::D);
  return sys;
}

Eigen::VectorXd assemble_load(const Mesh& mesh, int m,
                              const std::function<void(Vec2, double*)>& f,
                              const std::function<void(Vec2, double*)>& f_N) {
  Eigen::VectorXd b = Eigen::VectorXd::Zero(mesh.num_nodes() * m);
  std::vector<double> val(m);
  if (f) {
    for (int t = 0; t < mesh.num_tris(); ++t) {
      const auto& v = mesh.tris[t];
      const double w = tri_area(mesh, t) / 3.0;
      for (int e = 0; e < 3; ++e) {
        const Vec2 mid = 0.5 * (mesh.nodes[v[e]] + mesh.nodes[v[(e + 1) % 3]]);
        f(mid, val.data());
        // phi = 1/2 at the two vertices of edge e.
        for (int a = 0; a < m; ++a) {
          b[v[e] * m + a] -= w * 0.5 * val[a];
          b[v[(e + 1) % 3] * m + a] -= w * 0.5 * val[a];
        }
      }
    }
  }
  if (f_N) {
    const double g = 0.5 / std::sqrt(3.0);
    for (const auto& be : mesh.bedges) {
      if (be.tag != BoundaryTag::N) continue;
      const Vec2 A = mesh.nodes[be.a], B = mesh.nodes[be.b];
      const double w = 0.5 * dist(A, B);
      for (double s : {0.5 - g, 0.5 + g}) {
        const Vec2 p = A + s * (B - A);
        f_N(p, val.data());
        for (int a = 0; a < m; ++a) {
          b[be.a * m + a] += w * (1.0 - s) * val[a];
          b[be.b * m + a] += w * s * val[a];
        }
      }
    }
  }
  return b;
}

Eigen::VectorXd average_functional(const Mesh& mesh, int m, Vec2 c, double rho,
                                   int alpha) {
  if (alpha < 0 || alpha >= m)
    throw std::invalid_argument("average_functional: component out of range");
  const std::vector<double> hm = hat_moments(mesh, c, rho);
  double area = 0.0;
  for (double w : hm) area += w;
  if (area <= 0.0)
    throw std::runtime_error("average_functional: empty local region");
  Eigen::VectorXd g = Eigen::VectorXd::Zero(mesh.num_nodes() * m);
  for (int i = 0; i < mesh.num_nodes(); ++i) g[i * m + alpha] = hm[i] / area;
  return g;
}

void strain_stress(const Mesh& mesh, const CoefficientField& coef,
                   const Eigen::VectorXd& u, int t, double strain[4],
                   double stress[4]) {
  if (coef.m != 2)
    throw std::invalid_argument("strain_stress requires a two-component field");
  const auto& v = mesh.tris[t];
  const Vec2 p[3] = {mesh.nodes[v[0]], mesh.nodes[v[1]], mesh.nodes[v[2]]};
  const double twoA = cross(p[1] - p[0], p[2] - p[0]);
  double grad[4] = {0, 0, 0, 0};  // grad[a*2+j] = d u^a / d y_j
  for (int k = 0; k < 3; ++k) {
    const Vec2 g = (1.0 / twoA) * perp(p[(k + 2) % 3] - p[(k + 1) % 3]);
    for (int a = 0; a < 2; ++a) {
      grad[a * 2 + 0] += u[v[k] * 2 + a] * g.x;
      grad[a * 2 + 1] += u[v[k] * 2 + a] * g.y;
    }
  }
  for (int a = 0; a < 2; ++a)
    for (int j = 0; j < 2; ++j)
      strain[a * 2 + j] = 0.5 * (grad[a * 2 + j] + grad[j * 2 + a]);
  const Vec2 cen = tri_centroid(mesh, t);
  const double mv = coef.mu(cen), lv = coef.lambda(cen);
  const double tr = strain[0] + strain[3];
  for (int k = 0; k < 4; ++k) stress[k] = 2.0 * mv * strain[k];
  stress[0] += lv * tr;
  stress[3] += lv * tr;
}

}  // namespace greenfem
