#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "fcm/sparse.hpp"

using namespace fcm::sparse;

namespace {

// Banded symmetric random matrix, large enough to take the parallel path.
Csr banded(int n, int band, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<Eigen::Triplet<double>> t;
  for (int i = 0; i < n; ++i) {
    t.emplace_back(i, i, 2.0 * band + 1.0);
    for (int k = 1; k <= band && i + k < n; ++k) {
      const double v = u(rng);
      t.emplace_back(i, i + k, v);
      t.emplace_back(i + k, i, v);
    }
  }
  Csr A(n, n);
  A.setFromTriplets(t.begin(), t.end());
  return A;
}

}  // namespace

TEST_CASE("serial and parallel spmv give identical bits") {
  const Csr A = banded(10000, 4, 1);
  Vector x = Vector::LinSpaced(A.rows(), -1.0, 3.0);
  Vector y1(A.rows()), y2(A.rows());
  spmv_serial(A, x.data(), y1.data());
  spmv(A, x.data(), y2.data(), Execution::parallel);
  CHECK(y1 == y2);
  const Vector ref = A * x;
  CHECK((ref - y1).lpNorm<Eigen::Infinity>() < 1e-12 * ref.lpNorm<Eigen::Infinity>());
}

TEST_CASE("serial and parallel dot give identical bits") {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> g;
  for (int n : {1, 100, 2047, 2048, 9000, 100001}) {
    Vector a(n), b(n);
    for (int i = 0; i < n; ++i) {
      a[i] = g(rng);
      b[i] = g(rng);
    }
    const double s = dot_serial({a.data(), a.size()}, {b.data(), b.size()});
    CHECK(dot(a, b, Execution::parallel) == s);
    CHECK(dot(a, b, Execution::serial) == s);
    CHECK(s == doctest::Approx(a.dot(b)).epsilon(1e-12).scale(std::sqrt(n)));
  }
}

TEST_CASE("nonzero counting and symmetry checks") {
  Csr A = banded(50, 2, 3);
  CHECK(structurally_symmetric(A));
  CHECK(asymmetry(A) == 0.0);
  CHECK(count_nonzeros(A) == static_cast<std::size_t>(A.nonZeros()));
  CHECK(max_abs(A) == doctest::Approx(5.0));
  A.coeffRef(0, 1) += 1.0;
  CHECK(asymmetry(A) == doctest::Approx(1.0));
  A.coeffRef(3, 3) = 0.0;
  CHECK(count_nonzeros(A) == static_cast<std::size_t>(A.nonZeros()) - 1);

  Csr B(3, 3);
  B.insert(0, 2) = 1.0;
  B.makeCompressed();
  CHECK_FALSE(structurally_symmetric(B));
  CHECK_THROWS_AS(SparseSymMatrix{B}, std::invalid_argument);
  CHECK_THROWS_AS(SparseSymMatrix{Csr(2, 3)}, std::invalid_argument);
  Csr C(2, 2);
  C.insert(0, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(SparseSymMatrix{C}, std::invalid_argument);
  const SparseSymMatrix ok(banded(20, 1, 4));
  CHECK(ok.n() == 20);
}

TEST_CASE("congruence S A S^T is symmetric and matches the dense product") {
  const Csr A = banded(30, 3, 5);
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<Eigen::Triplet<double>> t;
  for (int i = 0; i < 25; ++i)
    for (int j = 0; j <= i + 5 && j < 30; ++j)
      if ((i + j) % 3 == 0) t.emplace_back(i, j, u(rng));
  Csr S(25, 30);
  S.setFromTriplets(t.begin(), t.end());
  const Csr M = congruence(S, A);
  CHECK(M.rows() == 25);
  CHECK(asymmetry(M) == 0.0);
  const Eigen::MatrixXd dense = Eigen::MatrixXd(S) * Eigen::MatrixXd(A) * Eigen::MatrixXd(S).transpose();
  CHECK((Eigen::MatrixXd(M) - dense).cwiseAbs().maxCoeff() < 1e-12 * dense.cwiseAbs().maxCoeff());
  CHECK_THROWS_AS(congruence(Csr(3, 4), A), std::invalid_argument);
}

TEST_CASE("operator wrapper applies A") {
  const Csr A = banded(40, 2, 7);
  const auto op = make_operator(A, Execution::serial);
  CHECK(op.n == 40);
  Vector x = Vector::Ones(40), y;
  op.apply(x, y);
  CHECK((y - A * x).norm() < 1e-13);
}
