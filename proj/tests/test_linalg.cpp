#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <cmath>
#include <random>
#include <vector>

#include "fcm/assembly.hpp"
#include "fcm/experiments.hpp"
#include "fcm/linalg.hpp"

using namespace fcm;
using namespace fcm::linalg;

namespace {

Csr to_csr(const Eigen::MatrixXd& D) {
  Csr A = D.sparseView();
  A.makeCompressed();
  return A;
}

Eigen::MatrixXd random_orthogonal(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Eigen::MatrixXd M(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) M(i, j) = g(rng);
  return Eigen::HouseholderQR<Eigen::MatrixXd>(M).householderQ();
}

Eigen::MatrixXd with_spectrum(const Eigen::VectorXd& lambda, std::uint64_t seed) {
  const Eigen::MatrixXd Q = random_orthogonal(static_cast<int>(lambda.size()), seed);
  return Q * lambda.asDiagonal() * Q.transpose();
}

Csr diagonal(const std::vector<double>& d) {
  Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(d.data(), d.size());
  return to_csr(v.asDiagonal().toDenseMatrix());
}

// Small trimmed FCM matrix from the rotating-square family.
Csr small_fcm_matrix(double angle, double h, double eta_r = 5e-3) {
  experiments::ScenarioConfig cfg;
  cfg.h = h;
  cfg.eta_r = eta_r;
  cfg.order = 2;
  return experiments::build_square_case(cfg, angle).system.matrix();
}

}  // namespace

TEST_CASE("CG on the identity converges in one step with x = b") {
  const Csr I = diagonal(std::vector<double>(20, 1.0));
  Vector b = Vector::LinSpaced(20, -2.0, 5.0);
  const auto r = cg_solve(sparse::make_operator(I), b);
  CHECK(r.report.iterations == 1);
  CHECK(r.report.reason == Termination::rel_tol);
  CHECK((r.x - b).norm() == 0.0);
}

TEST_CASE("CG converges in at most k iterations for k distinct eigenvalues") {
  for (int k = 1; k <= 5; ++k) {
    Eigen::VectorXd lam(50);
    for (int i = 0; i < 50; ++i) lam[i] = 1.0 + 3.0 * (i % k);
    const Csr A = to_csr(with_spectrum(lam, 40 + k));
    const Vector b = Vector::Ones(50);
    CgOptions opt;
    opt.rel_tol = 1e-8;
    const auto r = cg_solve(sparse::make_operator(A), b, opt);
    CHECK(r.report.iterations <= k);
    CHECK(r.report.reason == Termination::rel_tol);
  }
}

TEST_CASE("CG residual and energy histories obey the error bounds") {
  Eigen::VectorXd lam(60);
  for (int i = 0; i < 60; ++i) lam[i] = std::pow(10.0, 4.0 * i / 59.0);  // kappa = 1e4
  const Eigen::MatrixXd D = with_spectrum(lam, 8);
  const Csr A = to_csr(D);
  const Vector x = Vector::LinSpaced(60, 1.0, 2.0);
  const Vector b = D * x;
  CgOptions opt;
  opt.rel_tol = 1e-12;
  const auto r = cg_solve(sparse::make_operator(A), b, opt, &x);
  const double kappa = 1e4, normA = 1e4;
  REQUIRE(r.report.reason == Termination::rel_tol);
  REQUIRE(r.report.residuals.size() == r.report.energy_errors.size());
  const double e0 = r.report.energy_errors[0];
  const double q = (std::sqrt(kappa) - 1.0) / (std::sqrt(kappa) + 1.0);
  for (std::size_t i = 0; i < r.report.residuals.size(); ++i) {
    const double res = r.report.residuals[i], err = r.report.energy_errors[i];
    CHECK(res >= 0.0);
    CHECK(err * err <= kappa * res * res / normA * (1.0 + 1e-8) + 1e-28);
    CHECK(err <= 10.0 * 2.0 * std::pow(q, static_cast<double>(i)) * e0);
  }
  CHECK(r.report.residuals.back() <= opt.rel_tol * b.norm());
  CHECK((r.x - x).norm() < 1e-7 * x.norm());
}

TEST_CASE("CG termination reasons") {
  const Csr A = diagonal({1.0, 10.0, 100.0, 1000.0});
  const Vector b = Vector::Ones(4);
  CgOptions opt;
  opt.max_iter = 2;
  const auto r = cg_solve(sparse::make_operator(A), b, opt);
  CHECK(r.report.reason == Termination::max_iter);
  CHECK(r.report.iterations == 2);
  opt.max_iter = 100;
  opt.abs_tol = 1e3;
  CHECK(cg_solve(sparse::make_operator(A), b, opt).report.reason == Termination::abs_tol);
  CHECK(cg_solve(sparse::make_operator(A), Vector::Zero(4)).report.iterations == 0);
  CHECK(std::string(to_string(Termination::max_iter)) == "max_iter");
  CHECK_THROWS_AS(cg_solve(sparse::make_operator(A), Vector::Ones(3)), std::invalid_argument);
}

TEST_CASE("power iteration") {
  SUBCASE("diag(1,2,3)") {
    const auto e = power_iteration(sparse::make_operator(diagonal({1.0, 2.0, 3.0})));
    CHECK(e.converged);
    CHECK(e.value == doctest::Approx(3.0).epsilon(1e-6));
  }
  SUBCASE("rank one y y^T") {
    const Eigen::Vector4d y(1.0, -2.0, 0.5, 3.0);
    const Csr A = to_csr(y * y.transpose());
    const auto e = power_iteration(sparse::make_operator(A));
    CHECK(e.value == doctest::Approx(y.squaredNorm()).epsilon(1e-14));
    // one power step lands on y; the remaining iteration only confirms the quotient
    CHECK(e.iterations <= 3);
  }
  SUBCASE("random 50x50 SPD against a dense eigensolver") {
    std::mt19937_64 rng(12);
    std::normal_distribution<double> g;
    Eigen::MatrixXd M(50, 50);
    for (int i = 0; i < 50; ++i)
      for (int j = 0; j < 50; ++j) M(i, j) = g(rng);
    const Eigen::MatrixXd D = M * M.transpose() + 0.1 * Eigen::MatrixXd::Identity(50, 50);
    const double oracle = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(D).eigenvalues().maxCoeff();
    const auto e = power_iteration(sparse::make_operator(to_csr(D)));
    CHECK(e.value == doctest::Approx(oracle).epsilon(1e-5));
  }
  SUBCASE("start vector is seeded") {
    CHECK(start_vector(10, 3) == start_vector(10, 3));
    CHECK(start_vector(10, 3) != start_vector(10, 4));
    CHECK(start_vector(10, 3).norm() == doctest::Approx(1.0));
  }
}

TEST_CASE("inverse power iteration and condition numbers") {
  SUBCASE("diag(1,2,3)") {
    const Csr A = diagonal({1.0, 2.0, 3.0});
    const auto e = smallest_eigenvalue(sipic_inverse(A), 3);
    CHECK(e.value == doctest::Approx(1.0).epsilon(1e-6));
  }
  SUBCASE("identity") {
    const auto c = condition_number(diagonal(std::vector<double>(7, 1.0)));
    CHECK(c.kappa == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("diag(1..1e6)") {
    std::vector<double> d;
    for (int i = 0; i <= 6; ++i) d.push_back(std::pow(10.0, i));
    const auto c = condition_number(diagonal(d));
    CHECK(c.kappa == doctest::Approx(1e6).epsilon(1e-4));
  }
  SUBCASE("2x2 degenerate pair: kappa = 2/eps^2 - 1") {
    const double eps = 1e-3;
    const double a12 = 1.0 - eps * eps;
    Eigen::Matrix2d D;
    D << 1.0, a12, a12, 1.0;
    const auto c = condition_number(to_csr(D));
    CHECK(c.kappa == doctest::Approx(2.0 / (1.0 - a12) - 1.0).epsilon(1e-6));
  }
  SUBCASE("machine-singular matrix is reported distinctly") {
    Eigen::Matrix2d D;
    D << 1.0, 1.0, 1.0, 1.0;
    CHECK_THROWS_AS(condition_number(to_csr(D)), MachineSingularError);
  }
}

TEST_CASE("FCM matrix extremal eigenvalues match a dense oracle") {
  // moderate eta (about 0.026); the symmetric angle 0 has a clustered bottom spectrum
  const Csr A = small_fcm_matrix(0.35, 1.0 / 8.0, 0.05);
  REQUIRE(A.rows() <= 2000);
  const Eigen::MatrixXd D(A);
  const auto ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(D).eigenvalues();
  const auto c = condition_number(A);
  CHECK(c.converged);
  CHECK(c.lambda_max == doctest::Approx(ev.maxCoeff()).epsilon(1e-3));
  CHECK(c.lambda_min == doctest::Approx(ev.minCoeff()).epsilon(1e-3).scale(0.0));
  CHECK(c.kappa == doctest::Approx(ev.maxCoeff() / ev.minCoeff()).epsilon(2e-3));

  // Rayleigh quotients of 100 random vectors are bounded by the extremal eigenvalues
  std::mt19937_64 rng(21);
  std::normal_distribution<double> g;
  for (int k = 0; k < 100; ++k) {
    Vector y(A.rows());
    for (int i = 0; i < y.size(); ++i) y[i] = g(rng);
    const double rq = y.dot(A * y) / y.squaredNorm();
    CHECK(rq >= ev.minCoeff() * (1.0 - 1e-12));
    CHECK(rq <= ev.maxCoeff() * (1.0 + 1e-12));
  }
}

TEST_CASE("CG on an FCM system satisfies the convergence bound") {
  const Csr A = small_fcm_matrix(0.15, 1.0 / 8.0);
  const Eigen::MatrixXd D(A);
  const auto ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(D).eigenvalues();
  const double kappa = ev.maxCoeff() / ev.minCoeff();
  const Vector x = Vector::Ones(A.rows());
  const Vector b = A * x;
  CgOptions opt;
  opt.rel_tol = 1e-12;
  opt.max_iter = 5000;
  const auto r = cg_solve(sparse::make_operator(A), b, opt, &x);
  const double q = (std::sqrt(kappa) - 1.0) / (std::sqrt(kappa) + 1.0);
  const double e0 = r.report.energy_errors[0];
  for (std::size_t i = 0; i < r.report.energy_errors.size(); ++i) {
    const double err = r.report.energy_errors[i], res = r.report.residuals[i];
    CHECK(err <= 10.0 * 2.0 * std::pow(q, static_cast<double>(i)) * e0);
    CHECK(err * err <= kappa * res * res / ev.maxCoeff() * 10.0);
  }
}
