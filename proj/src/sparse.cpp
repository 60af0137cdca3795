#include "fcm/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace fcm::sparse {

namespace {
constexpr std::ptrdiff_t kDotBlock = 2048;

inline double row_dot(const Csr& A, int i, const double* x) {
  const int* idx = A.innerIndexPtr();
  const double* val = A.valuePtr();
  const int begin = A.outerIndexPtr()[i];
  const int end = A.isCompressed() ? A.outerIndexPtr()[i + 1] : begin + A.innerNonZeroPtr()[i];
  double s = 0.0;
  for (int k = begin; k < end; ++k) s += val[k] * x[idx[k]];
  return s;
}

inline double block_sum(const double* a, const double* b, std::ptrdiff_t lo, std::ptrdiff_t hi) {
  double s = 0.0;
  for (std::ptrdiff_t i = lo; i < hi; ++i) s += a[i] * b[i];
  return s;
}
}  // namespace

void spmv_serial(const Csr& A, const double* x, double* y) {
  for (int i = 0; i < A.rows(); ++i) y[i] = row_dot(A, i, x);
}

void spmv(const Csr& A, const double* x, double* y, Execution exec) {
  if (exec == Execution::serial) return spmv_serial(A, x, y);
  const int n = static_cast<int>(A.rows());
#pragma omp parallel for schedule(static) if (n > 2000)
  for (int i = 0; i < n; ++i) y[i] = row_dot(A, i, x);
}

double dot_serial(std::span<const double> a, std::span<const double> b) {
  const auto n = static_cast<std::ptrdiff_t>(a.size());
  double total = 0.0;
  for (std::ptrdiff_t lo = 0; lo < n; lo += kDotBlock)
    total += block_sum(a.data(), b.data(), lo, std::min(n, lo + kDotBlock));
  return total;
}

double dot(std::span<const double> a, std::span<const double> b, Execution exec) {
  if (a.size() != b.size()) throw std::invalid_argument("dot: size mismatch");
  const auto n = static_cast<std::ptrdiff_t>(a.size());
  const std::ptrdiff_t nblocks = (n + kDotBlock - 1) / kDotBlock;
  if (exec == Execution::serial || nblocks < 4) return dot_serial(a, b);
  std::vector<double> partial(nblocks);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t k = 0; k < nblocks; ++k)
    partial[k] = block_sum(a.data(), b.data(), k * kDotBlock, std::min(n, (k + 1) * kDotBlock));
  double total = 0.0;
  for (double p : partial) total += p;
  return total;
}

std::size_t count_nonzeros(const Csr& A) {
  std::size_t n = 0;
  for (int i = 0; i < A.outerSize(); ++i)
    for (Csr::InnerIterator it(A, i); it; ++it)
      if (it.value() != 0.0) ++n;
  return n;
}

bool structurally_symmetric(const Csr& A) {
  if (A.rows() != A.cols()) return false;
  for (int i = 0; i < A.outerSize(); ++i)
    for (Csr::InnerIterator it(A, i); it; ++it) {
      const int j = static_cast<int>(it.col());
      if (j == i) continue;
      // binary search row j for column i
      const int* idx = A.innerIndexPtr();
      const int b = A.outerIndexPtr()[j];
      const int e = A.isCompressed() ? A.outerIndexPtr()[j + 1] : b + A.innerNonZeroPtr()[j];
      if (!std::binary_search(idx + b, idx + e, i)) return false;
    }
  return true;
}

double max_abs(const Csr& A) {
  double m = 0.0;
  for (int i = 0; i < A.outerSize(); ++i)
    for (Csr::InnerIterator it(A, i); it; ++it) m = std::max(m, std::abs(it.value()));
  return m;
}

double asymmetry(const Csr& A) {
  const Csr At = A.transpose();
  const Csr d = A - At;
  return max_abs(d);
}

Csr congruence(const Csr& S, const Csr& A) {
  if (S.cols() != A.rows() || A.rows() != A.cols())
    throw std::invalid_argument("congruence: dimension mismatch");
  // S A rows of a near-dependent group cancel heavily; rounding them to double
  // costs about eps |S|^2 |A| on the result, so accumulate in long double
  using LCsr = Eigen::SparseMatrix<long double, Eigen::RowMajor>;
  const LCsr Sl = S.cast<long double>();
  const LCsr SA = Sl * A.cast<long double>();
  const LCsr M = SA * LCsr(Sl.transpose());
  const LCsr Mt = M.transpose();
  const LCsr sym = 0.5L * (M + Mt);
  Csr out = sym.cast<double>();
  out.makeCompressed();
  return out;
}

LinearOperator make_operator(const Csr& A, Execution exec) {
  return {static_cast<int>(A.rows()), [&A, exec](const Vector& x, Vector& y) {
            y.resize(A.rows());
            spmv(A, x.data(), y.data(), exec);
          }};
}

SparseSymMatrix::SparseSymMatrix(Csr m) : m_(std::move(m)) {
  m_.makeCompressed();
  if (m_.rows() != m_.cols()) throw std::invalid_argument("SparseSymMatrix: not square");
  for (int k = 0; k < m_.nonZeros(); ++k)
    if (!std::isfinite(m_.valuePtr()[k])) throw std::invalid_argument("SparseSymMatrix: non-finite entry");
  if (!structurally_symmetric(m_)) throw std::invalid_argument("SparseSymMatrix: structure not symmetric");
}

}  // namespace fcm::sparse
