#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>

#include "fcm/geometry.hpp"

namespace fcm::sparse {

using geometry::Execution;
using Csr = Eigen::SparseMatrix<double, Eigen::RowMajor, int>;
using Vector = Eigen::VectorXd;

/// y = A x. The parallel path splits rows across threads; every row is summed in
/// the same order as the serial path, so both give identical bits.
void spmv(const Csr& A, const double* x, double* y, Execution exec = Execution::parallel);
void spmv_serial(const Csr& A, const double* x, double* y);

/// Dot product summed in fixed blocks, independent of the thread count.
double dot(std::span<const double> a, std::span<const double> b,
           Execution exec = Execution::parallel);
double dot_serial(std::span<const double> a, std::span<const double> b);
inline double dot(const Vector& a, const Vector& b, Execution exec = Execution::parallel) {
  return dot(std::span<const double>(a.data(), a.size()), std::span<const double>(b.data(), b.size()),
             exec);
}
inline double norm2(const Vector& a, Execution exec = Execution::parallel) {
  return std::sqrt(dot(a, a, exec));
}

/// Number of stored entries whose value is not exactly zero.
std::size_t count_nonzeros(const Csr& A);
bool structurally_symmetric(const Csr& A);
double max_abs(const Csr& A);
/// max |A - A^T| over all entries.
double asymmetry(const Csr& A);

/// S A S^T, symmetrized as (M + M^T)/2 to remove round-off asymmetry.
Csr congruence(const Csr& S, const Csr& A);

/// Square sparse matrix with symmetric structure and finite entries (full storage).
class SparseSymMatrix {
 public:
  SparseSymMatrix() = default;
  explicit SparseSymMatrix(Csr m);

  int n() const { return static_cast<int>(m_.rows()); }
  std::size_t nnz() const { return count_nonzeros(m_); }
  const Csr& csr() const { return m_; }
  void apply(const double* x, double* y, Execution exec = Execution::parallel) const {
    spmv(m_, x, y, exec);
  }

 private:
  Csr m_;
};

/// Symmetric operator x -> y of dimension n.
struct LinearOperator {
  int n = 0;
  std::function<void(const Vector&, Vector&)> apply;
};

LinearOperator make_operator(const Csr& A, Execution exec = Execution::parallel);

}  // namespace fcm::sparse
