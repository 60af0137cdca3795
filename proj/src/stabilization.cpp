#include "fcm/stabilization.hpp"

#include <Eigen/Eigenvalues>
#include <vector>

#include "fcm/quadrature.hpp"

namespace fcm::stabilization {

namespace {

double ipow(double x, int k) {
  double r = 1.0;
  for (int i = 0; i < k; ++i) r *= x;
  return r;
}

// d/dxi of xi^k
double dpow(double x, int k) { return k == 0 ? 0.0 : k * ipow(x, k - 1); }

double max_eigenvalue(const Eigen::MatrixXd& M) {
  if (M.rows() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M, Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

}  // namespace

GeneralizedEigenvalue max_generalized_eigenvalue(const Eigen::MatrixXd& B, const Eigen::MatrixXd& V,
                                                 double pivot_tol, double kernel_tol) {
  std::vector<int> keep;
  for (int i = 0; i < V.rows(); ++i)
    if (V(i, i) > 0.0) keep.push_back(i);
  const int k = static_cast<int>(keep.size());
  Eigen::MatrixXd Vs(k, k), Bs(k, k);
  for (int a = 0; a < k; ++a)
    for (int b = 0; b < k; ++b) {
      const double s = 1.0 / std::sqrt(V(keep[a], keep[a]) * V(keep[b], keep[b]));
      Vs(a, b) = V(keep[a], keep[b]) * s;
      Bs(a, b) = B(keep[a], keep[b]) * s;
    }
  GeneralizedEigenvalue out;
  Eigen::LLT<Eigen::MatrixXd> llt(Vs);
  bool ok = llt.info() == Eigen::Success;
  if (ok) {
    const auto L = llt.matrixL();
    for (int i = 0; i < k; ++i) {
      const double d = llt.matrixLLT()(i, i);
      if (!(d * d >= pivot_tol)) {
        ok = false;
        break;
      }
    }
    if (ok) {
      Eigen::MatrixXd X = L.solve(Bs);                  // L^{-1} B
      Eigen::MatrixXd Y = L.solve(X.transpose());        // L^{-1} B^T L^{-T}
      out.lambda_max = max_eigenvalue(0.5 * (Y + Y.transpose()));
      out.rank = k;
      return out;
    }
  }
  out.fallback = true;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Vs);
  const Eigen::VectorXd& lam = es.eigenvalues();
  const double top = k > 0 ? lam.maxCoeff() : 0.0;
  std::vector<int> range;
  for (int i = 0; i < k; ++i)
    if (lam[i] > kernel_tol * top) range.push_back(i);
  Eigen::MatrixXd W(k, range.size());
  for (std::size_t j = 0; j < range.size(); ++j)
    W.col(j) = es.eigenvectors().col(range[j]) / std::sqrt(lam[range[j]]);
  const Eigen::MatrixXd Cm = W.transpose() * Bs * W;
  out.lambda_max = max_eigenvalue(0.5 * (Cm + Cm.transpose()));
  out.rank = static_cast<int>(range.size());
  return out;
}

Vec2 center_of_mass(const geometry::TrimmedCell& cell) {
  double w = 0.0, x = 0.0, y = 0.0;
  for (const auto& q : cell.volume) {
    w += q.weight;
    x += q.weight * q.x.x;
    y += q.weight * q.x.y;
  }
  return {x / w, y / w};
}

PoissonConstant poisson_constant(const geometry::TrimmedCell& cell, int p, double h,
                                 const DirichletTest& dirichlet) {
  std::vector<std::pair<int, int>> rho;
  for (int ry = 0; ry <= p; ++ry)
    for (int rx = 0; rx <= p; ++rx)
      if (rx + ry > 0) rho.emplace_back(rx, ry);
  const int n = static_cast<int>(rho.size());
  const Vec2 c = center_of_mass(cell);
  Eigen::MatrixXd V = Eigen::MatrixXd::Zero(n, n), B = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd gx(n), gy(n);
  auto grads = [&](Vec2 x) {
    const double sx = (x.x - c.x) / h, sy = (x.y - c.y) / h;
    for (int a = 0; a < n; ++a) {
      gx[a] = dpow(sx, rho[a].first) * ipow(sy, rho[a].second);
      gy[a] = ipow(sx, rho[a].first) * dpow(sy, rho[a].second);
    }
  };
  for (const auto& q : cell.volume) {
    grads(q.x);
    V.noalias() += q.weight * (gx * gx.transpose() + gy * gy.transpose());
  }
  for (const auto& b : cell.boundary) {
    if (!dirichlet(b.piece)) continue;
    grads(b.x);
    const Eigen::VectorXd dn = b.normal.x * gx + b.normal.y * gy;
    B.noalias() += b.weight * dn * dn.transpose();
  }
  const auto g = max_generalized_eigenvalue(B, V);
  // the 1/h factors of both forms cancel in the quotient
  return {g.lambda_max, g.fallback};
}

double poisson_constant_1d(double lo, double hi, int p, bool dirichlet_lo, bool dirichlet_hi) {
  const double c = 0.5 * (lo + hi), len = hi - lo;
  Eigen::MatrixXd V = Eigen::MatrixXd::Zero(p, p), B = Eigen::MatrixXd::Zero(p, p);
  Eigen::VectorXd g(p);
  auto grads = [&](double x) {
    for (int r = 1; r <= p; ++r) g[r - 1] = dpow((x - c) / len, r);
  };
  const auto& rule = quadrature::gauss_legendre(p + 1);
  for (std::size_t q = 0; q < rule.points.size(); ++q) {
    grads(lo + len * rule.points[q]);
    V.noalias() += rule.weights[q] * len * g * g.transpose();
  }
  if (dirichlet_lo) {
    grads(lo);
    B.noalias() += g * g.transpose();
  }
  if (dirichlet_hi) {
    grads(hi);
    B.noalias() += g * g.transpose();
  }
  return max_generalized_eigenvalue(B, V).lambda_max;
}

ElasticityConstants elasticity_constants(const geometry::TrimmedCell& cell, int p, double h,
                                         const DirichletTest& dirichlet) {
  struct Mono {
    int comp, rx, ry;
  };
  std::vector<Mono> mono;
  for (int comp = 0; comp < 2; ++comp)
    for (int ry = 0; ry <= p; ++ry)
      for (int rx = 0; rx <= p; ++rx)
        if (rx + ry > 0) mono.push_back({comp, rx, ry});
  const int n = static_cast<int>(mono.size());
  const Vec2 c = center_of_mass(cell);
  Eigen::VectorXd div(n), exx(n), eyy(n), exy(n);
  auto strains = [&](Vec2 x) {
    const double sx = (x.x - c.x) / h, sy = (x.y - c.y) / h;
    for (int a = 0; a < n; ++a) {
      const double dx = dpow(sx, mono[a].rx) * ipow(sy, mono[a].ry);
      const double dy = ipow(sx, mono[a].rx) * dpow(sy, mono[a].ry);
      if (mono[a].comp == 0) {
        exx[a] = dx;
        eyy[a] = 0.0;
        exy[a] = 0.5 * dy;
        div[a] = dx;
      } else {
        exx[a] = 0.0;
        eyy[a] = dy;
        exy[a] = 0.5 * dx;
        div[a] = dy;
      }
    }
  };
  Eigen::MatrixXd Vl = Eigen::MatrixXd::Zero(n, n), Bl = Vl, Vm = Vl, Bm = Vl;
  for (const auto& q : cell.volume) {
    strains(q.x);
    Vl.noalias() += q.weight * div * div.transpose();
    Vm.noalias() += q.weight * (exx * exx.transpose() + eyy * eyy.transpose() +
                                2.0 * exy * exy.transpose());
  }
  for (const auto& b : cell.boundary) {
    if (!dirichlet(b.piece)) continue;
    strains(b.x);
    Bl.noalias() += b.weight * div * div.transpose();
    const Eigen::VectorXd tx = b.normal.x * exx + b.normal.y * exy;
    const Eigen::VectorXd ty = b.normal.x * exy + b.normal.y * eyy;
    Bm.noalias() += b.weight * (tx * tx.transpose() + ty * ty.transpose());
  }
  // both volume forms have nontrivial kernels (divergence-free fields, rotations),
  // so the pseudo-inverse path is taken unconditionally
  const double force = 2.0;
  return {max_generalized_eigenvalue(Bl, Vl, force, 1e-12).lambda_max,
          max_generalized_eigenvalue(Bm, Vm, force, 1e-12).lambda_max};
}

}  // namespace fcm::stabilization
