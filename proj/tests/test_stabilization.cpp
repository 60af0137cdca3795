#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <random>
#include <vector>

#include "fcm/basis.hpp"
#include "fcm/experiments.hpp"
#include "fcm/stabilization.hpp"

using namespace fcm;
using namespace fcm::stabilization;

namespace {

struct RawCell {
  Eigen::MatrixXd B, V;  // Poisson forms in the raw local basis
  Eigen::MatrixXd Bl, Vl, Bm, Vm;  // elasticity forms, dofs interleaved (x, y) per function
  geometry::TrimmedCell cell;
  double h = 0.0;
};

// Trimmed cells of the rotating square with volume fraction in (lo, hi).
std::vector<RawCell> raw_cells(int p, double lo, double hi, int want) {
  const double h = 1.0 / 8.0;
  const auto domain = experiments::rotating_square_domain(0.3, h, 0.05);
  const auto mesh = geometry::CartesianMesh::covering(domain.bounds(), h);
  const auto cells = geometry::tessellate(domain, mesh, {.max_depth = 2, .quad_order = p + 1});
  const auto space = basis::BasisSpace::build(mesh, cells, basis::Family::bspline, p);
  const int n = (p + 1) * (p + 1);
  std::vector<RawCell> out;
  for (int pos = 0; pos < space.cell_count() && static_cast<int>(out.size()) < want; ++pos) {
    const auto& c = cells[pos];
    if (c.boundary.empty() || c.eta <= lo || c.eta >= hi) continue;
    RawCell r;
    r.cell = c;
    r.h = h;
    r.B = r.V = Eigen::MatrixXd::Zero(n, n);
    r.Bl = r.Vl = r.Bm = r.Vm = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    std::vector<Vec2> pts;
    for (const auto& q : c.volume) pts.push_back(q.x);
    auto ev = space.evaluate(pos, pts);
    for (std::size_t q = 0; q < pts.size(); ++q) {
      const double w = c.volume[q].weight;
      r.V += w * (ev.dx.col(q) * ev.dx.col(q).transpose() + ev.dy.col(q) * ev.dy.col(q).transpose());
      Eigen::VectorXd div(2 * n), exx = Eigen::VectorXd::Zero(2 * n), eyy = exx, exy = exx;
      for (int a = 0; a < n; ++a) {
        div[2 * a] = exx[2 * a] = ev.dx(a, q);
        div[2 * a + 1] = eyy[2 * a + 1] = ev.dy(a, q);
        exy[2 * a] = 0.5 * ev.dy(a, q);
        exy[2 * a + 1] = 0.5 * ev.dx(a, q);
      }
      r.Vl += w * div * div.transpose();
      r.Vm += w * (exx * exx.transpose() + eyy * eyy.transpose() + 2.0 * exy * exy.transpose());
    }
    pts.clear();
    for (const auto& b : c.boundary) pts.push_back(b.x);
    ev = space.evaluate(pos, pts);
    for (std::size_t q = 0; q < pts.size(); ++q) {
      const auto& b = c.boundary[q];
      const Eigen::VectorXd dn = b.normal.x * ev.dx.col(q) + b.normal.y * ev.dy.col(q);
      r.B += b.weight * dn * dn.transpose();
      Eigen::VectorXd div(2 * n), tx = Eigen::VectorXd::Zero(2 * n), ty = tx;
      for (int a = 0; a < n; ++a) {
        div[2 * a] = ev.dx(a, q);
        div[2 * a + 1] = ev.dy(a, q);
        // eps n with eps = sym grad of phi_a e_x, phi_a e_y
        tx[2 * a] = b.normal.x * ev.dx(a, q) + b.normal.y * 0.5 * ev.dy(a, q);
        ty[2 * a] = b.normal.x * 0.5 * ev.dy(a, q);
        tx[2 * a + 1] = b.normal.y * 0.5 * ev.dx(a, q);
        ty[2 * a + 1] = b.normal.x * 0.5 * ev.dx(a, q) + b.normal.y * ev.dy(a, q);
      }
      r.Bl += b.weight * div * div.transpose();
      r.Bm += b.weight * (tx * tx.transpose() + ty * ty.transpose());
    }
    out.push_back(std::move(r));
  }
  return out;
}

// max B x = lambda V x on range(V), by explicit projection onto the dominant eigenvectors of V.
double raw_oracle(const Eigen::MatrixXd& B, const Eigen::MatrixXd& V, double rel_kernel) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(V);
  const double top = es.eigenvalues().maxCoeff();
  std::vector<int> keep;
  for (int i = 0; i < V.rows(); ++i)
    if (es.eigenvalues()[i] > rel_kernel * top) keep.push_back(i);
  Eigen::MatrixXd W(V.rows(), keep.size());
  for (std::size_t j = 0; j < keep.size(); ++j)
    W.col(j) = es.eigenvectors().col(keep[j]) / std::sqrt(es.eigenvalues()[keep[j]]);
  const Eigen::MatrixXd M = W.transpose() * B * W;
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(0.5 * (M + M.transpose())).eigenvalues().maxCoeff();
}

const DirichletTest all_dirichlet = [](int) { return true; };

}  // namespace

TEST_CASE("1D linear element with one Dirichlet end has C = 1") {
  CHECK(poisson_constant_1d(0.0, 1.0, 1, true, false) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(poisson_constant_1d(0.0, 1.0, 1, true, true) == doctest::Approx(2.0).epsilon(1e-14));
  // C scales with 1/length
  CHECK(poisson_constant_1d(2.0, 2.25, 1, false, true) == doctest::Approx(4.0).epsilon(1e-14));
  // quadratic: v' is linear, max v'(0)^2 / int v'^2 = 1 + 3 (Legendre expansion)
  CHECK(poisson_constant_1d(0.0, 1.0, 2, true, false) == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(poisson_constant_1d(0.0, 1.0, 2, false, false) == 0.0);
}

TEST_CASE("generalized eigenvalue solver: Cholesky path and pseudo-inverse fallback") {
  Eigen::Matrix2d V, B;
  V << 4.0, 0.0, 0.0, 1.0;
  B << 2.0, 0.0, 0.0, 3.0;
  auto g = max_generalized_eigenvalue(B, V);
  CHECK_FALSE(g.fallback);
  CHECK(g.lambda_max == doctest::Approx(3.0));
  // rank-one V: only the direction (1,1) is in range
  V << 1.0, 1.0, 1.0, 1.0;
  B << 1.0, 0.0, 0.0, 1.0;
  g = max_generalized_eigenvalue(B, V);
  CHECK(g.fallback);
  CHECK(g.rank == 1);
  CHECK(g.lambda_max == doctest::Approx(0.5));  // x = (1,1): x^T B x / x^T V x = 2/4
  // zero diagonal rows are dropped
  Eigen::Matrix3d V3 = Eigen::Matrix3d::Zero(), B3 = Eigen::Matrix3d::Identity();
  V3(0, 0) = 2.0;
  V3(2, 2) = 1.0;
  g = max_generalized_eigenvalue(B3, V3);
  CHECK(g.rank == 2);
  CHECK(g.lambda_max == doctest::Approx(1.0));
}

TEST_CASE("monomial constant equals the raw-basis constant on trimmed cells") {
  const auto cells = raw_cells(2, 0.15, 0.9, 6);
  REQUIRE(cells.size() >= 3);
  for (const auto& r : cells) {
    const double oracle = raw_oracle(r.B, r.V, 1e-10);
    const auto pc = poisson_constant(r.cell, 2, r.h, all_dirichlet);
    CHECK(pc.C == doctest::Approx(oracle).epsilon(1e-6));
    CHECK(pc.C >= 0.0);
    CHECK(std::isfinite(pc.C));
  }
}

TEST_CASE("local constants bound the Rayleigh quotients of random local fields") {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> g;
  for (int p = 1; p <= 3; ++p) {
    const auto cells = raw_cells(p, 1e-4, 1.0, 8);
    REQUIRE(!cells.empty());
    for (const auto& r : cells) {
      const auto pc = poisson_constant(r.cell, p, r.h, all_dirichlet);
      const auto ec = elasticity_constants(r.cell, p, r.h, all_dirichlet);
      CHECK(ec.C_lambda >= 0.0);
      CHECK(ec.C_mu >= 0.0);
      for (int k = 0; k < 20; ++k) {
        Eigen::VectorXd x(r.V.rows()), u(r.Vl.rows());
        for (int i = 0; i < x.size(); ++i) x[i] = g(rng);
        for (int i = 0; i < u.size(); ++i) u[i] = g(rng);
        const double vx = x.dot(r.V * x);
        if (vx > 0.0) CHECK(x.dot(r.B * x) <= (1.0 + 1e-8) * pc.C * vx);
        const double vl = u.dot(r.Vl * u), vm = u.dot(r.Vm * u);
        if (vl > 0.0) CHECK(u.dot(r.Bl * u) <= (1.0 + 1e-8) * ec.C_lambda * vl);
        if (vm > 0.0) CHECK(u.dot(r.Bm * u) <= (1.0 + 1e-8) * ec.C_mu * vm);
      }
    }
  }
}

TEST_CASE("no Dirichlet boundary gives C = 0") {
  const auto cells = raw_cells(2, 0.1, 0.9, 1);
  REQUIRE(cells.size() == 1);
  const auto pc = poisson_constant(cells[0].cell, 2, cells[0].h, [](int) { return false; });
  CHECK(pc.C == 0.0);
}

TEST_CASE("centre of mass of a full cell is its midpoint") {
  geometry::TrimmedCell c;
  c.volume = {{{0.0, 0.0}, 1.0}, {{1.0, 0.0}, 1.0}, {{1.0, 2.0}, 1.0}, {{0.0, 2.0}, 1.0}};
  const Vec2 m = center_of_mass(c);
  CHECK(m.x == doctest::Approx(0.5));
  CHECK(m.y == doctest::Approx(1.0));
}
