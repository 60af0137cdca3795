#include "fcm/basis.hpp"

#include <algorithm>
#include <string>

namespace fcm::basis {

namespace {

// Cox-de Boor with the degree-0 indicator fixed to knot interval `span`, so the
// polynomial piece of that interval is evaluated even slightly outside it.
void cox_de_boor(std::span<const double> t, int p, int span, double x, std::vector<double>& N,
                 std::vector<double>& dN) {
  const int m = static_cast<int>(t.size()) - 1;
  std::vector<double> cur(m, 0.0), prev;
  if (span >= 0 && span < m) cur[span] = 1.0;
  for (int k = 1; k <= p; ++k) {
    prev = cur;
    if (k == p) {
      dN.assign(m - p, 0.0);
      for (int i = 0; i < m - p; ++i) {
        const double d1 = t[i + p] - t[i];
        const double d2 = t[i + p + 1] - t[i + 1];
        if (d1 > 0.0) dN[i] += p / d1 * prev[i];
        if (d2 > 0.0) dN[i] -= p / d2 * prev[i + 1];
      }
    }
    for (int i = 0; i < m - k; ++i) {
      double v = 0.0;
      const double d1 = t[i + k] - t[i];
      const double d2 = t[i + k + 1] - t[i + 1];
      if (d1 > 0.0) v += (x - t[i]) / d1 * prev[i];
      if (d2 > 0.0) v += (t[i + k + 1] - x) / d2 * prev[i + 1];
      cur[i] = v;
    }
  }
  N.assign(cur.begin(), cur.begin() + (m - p));
  if (p == 0) dN.assign(m, 0.0);
}

}  // namespace

void bspline_1d(std::span<const double> knots, int p, double x, std::vector<double>& values,
                std::vector<double>& derivatives) {
  const int m = static_cast<int>(knots.size()) - 1;
  if (p < 0 || m < p + 1) throw std::invalid_argument("bspline_1d: too few knots");
  // last nonempty interval containing x
  int span = -1;
  for (int i = 0; i < m; ++i)
    if (knots[i] < knots[i + 1] && knots[i] <= x) span = i;
  if (span < 0 || x > knots[m]) {
    values.assign(m - p, 0.0);
    derivatives.assign(m - p, 0.0);
    return;
  }
  cox_de_boor(knots, p, span, x, values, derivatives);
}

void uniform_bspline_local(int p, double xi, double* values, double* derivatives) {
  double knots[2 * 4 + 2];
  for (int j = 0; j <= 2 * p + 1; ++j) knots[j] = j - p;
  std::vector<double> N, dN;
  cox_de_boor(std::span<const double>(knots, 2 * p + 2), p, p, xi, N, dN);
  for (int a = 0; a <= p; ++a) {
    values[a] = N[a];
    derivatives[a] = dN[a];
  }
}

void lagrange_local(int p, double xi, double* values, double* derivatives) {
  for (int a = 0; a <= p; ++a) {
    const double xa = static_cast<double>(a) / p;
    double v = 1.0, d = 0.0;
    for (int k = 0; k <= p; ++k) {
      if (k == a) continue;
      const double xk = static_cast<double>(k) / p;
      const double f = (xi - xk) / (xa - xk);
      d = d * f + v / (xa - xk);
      v *= f;
    }
    values[a] = v;
    derivatives[a] = d;
  }
}

BasisSpace BasisSpace::build(const geometry::CartesianMesh& mesh,
                             std::span<const geometry::TrimmedCell> cells, Family family, int p,
                             int components) {
  if (p < 1 || p > 4) throw std::invalid_argument("basis order must be in 1..4, got " + std::to_string(p));
  if (components < 1 || components > 2) throw std::invalid_argument("components must be 1 or 2");
  BasisSpace s;
  s.mesh_ = mesh;
  s.family_ = family;
  s.p_ = p;
  s.components_ = components;

  const int stride = family == Family::bspline ? 1 : p;
  const int wx = (mesh.nx - 1) * stride + p + 1;
  const int wy = (mesh.ny - 1) * stride + p + 1;
  std::vector<int> number(static_cast<std::size_t>(wx) * wy, -1);

  s.position_.assign(mesh.cell_count(), -1);
  for (const auto& c : cells) {
    s.position_[c.index] = static_cast<int>(s.cell_index_.size());
    s.cell_index_.push_back(c.index);
    const auto [ix, iy] = mesh.lattice_index(c.index);
    for (int ay = 0; ay <= p; ++ay)
      for (int ax = 0; ax <= p; ++ax) number[(ix * stride + ax) + wx * (iy * stride + ay)] = 0;
  }
  // row-major numbering of used lattice entries
  for (int ly = 0; ly < wy; ++ly) {
    for (int lx = 0; lx < wx; ++lx) {
      int& n = number[lx + wx * ly];
      if (n < 0) continue;
      n = static_cast<int>(s.anchors_.size());
      if (family == Family::bspline)
        s.anchors_.push_back({mesh.origin.x + (lx - p + 0.5 * (p + 1)) * mesh.h,
                              mesh.origin.y + (ly - p + 0.5 * (p + 1)) * mesh.h});
      else
        s.anchors_.push_back({mesh.origin.x + lx * mesh.h / p, mesh.origin.y + ly * mesh.h / p});
    }
  }
  for (int idx : s.cell_index_) {
    const auto [ix, iy] = mesh.lattice_index(idx);
    std::vector<int> f;
    f.reserve((p + 1) * (p + 1));
    for (int ay = 0; ay <= p; ++ay)
      for (int ax = 0; ax <= p; ++ax) f.push_back(number[(ix * stride + ax) + wx * (iy * stride + ay)]);
    s.cell_functions_.push_back(std::move(f));
  }
  return s;
}

std::span<const int> BasisSpace::cell_functions(int position) const {
  if (position < 0 || position >= cell_count()) throw std::out_of_range("inactive cell");
  return cell_functions_[position];
}

std::vector<int> BasisSpace::cell_dofs(int position) const {
  const auto f = cell_functions(position);
  std::vector<int> dofs;
  dofs.reserve(f.size() * components_);
  for (int a : f)
    for (int c = 0; c < components_; ++c) dofs.push_back(components_ * a + c);
  return dofs;
}

int BasisSpace::position_of(int mesh_index) const {
  if (mesh_index < 0 || mesh_index >= static_cast<int>(position_.size())) return -1;
  return position_[mesh_index];
}

CellValues BasisSpace::evaluate(int position, std::span<const Vec2> points) const {
  if (position < 0 || position >= cell_count()) throw std::out_of_range("evaluate: inactive cell");
  const Box box = mesh_.cell_box(cell_index_[position]);
  const int n1 = p_ + 1;
  const int nloc = n1 * n1;
  const int npts = static_cast<int>(points.size());
  CellValues out{Eigen::MatrixXd(nloc, npts), Eigen::MatrixXd(nloc, npts), Eigen::MatrixXd(nloc, npts)};
  double vx[5], dxv[5], vy[5], dyv[5];
  const double inv_h = 1.0 / mesh_.h;
  for (int q = 0; q < npts; ++q) {
    const double xi = (points[q].x - box.lo.x) * inv_h;
    const double eta = (points[q].y - box.lo.y) * inv_h;
    if (family_ == Family::bspline) {
      uniform_bspline_local(p_, xi, vx, dxv);
      uniform_bspline_local(p_, eta, vy, dyv);
    } else {
      lagrange_local(p_, xi, vx, dxv);
      lagrange_local(p_, eta, vy, dyv);
    }
    for (int ay = 0; ay < n1; ++ay)
      for (int ax = 0; ax < n1; ++ax) {
        const int a = ax + n1 * ay;
        out.values(a, q) = vx[ax] * vy[ay];
        out.dx(a, q) = dxv[ax] * vy[ay] * inv_h;
        out.dy(a, q) = vx[ax] * dyv[ay] * inv_h;
      }
  }
  return out;
}

double BasisSpace::field(int position, std::span<const double> coeffs, Vec2 x, int component) const {
  const auto ev = evaluate(position, std::span<const Vec2>(&x, 1));
  const auto f = cell_functions(position);
  double v = 0.0;
  for (std::size_t a = 0; a < f.size(); ++a) v += coeffs[components_ * f[a] + component] * ev.values(a, 0);
  return v;
}

}  // namespace fcm::basis
