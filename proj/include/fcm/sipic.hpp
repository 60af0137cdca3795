#pragma once

#include <iosfwd>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

#include "fcm/sparse.hpp"

namespace fcm::sipic {

using sparse::Csr;
using sparse::Vector;

struct BuildError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  double gamma = 0.9;
  double epsilon = 1e2 * std::numeric_limits<double>::epsilon();
  int max_passes = 10;
  std::ostream* log = nullptr;  // JSON lines, one per group and pass
};

struct Preconditioner {
  Csr S;                 // m x n
  Csr SASt;              // explicit S A S^T (m x m)
  double gamma = 0.9;
  double epsilon = 0.0;
  std::vector<int> retained;    // row r of S -> original index
  std::vector<int> eliminated;  // original indices, ascending
  std::vector<std::vector<int>> groups;  // final groups in Gram-Schmidt order
  int passes = 0;
  double fill_in = 0.0;

  int rows() const { return static_cast<int>(S.rows()); }
  int cols() const { return static_cast<int>(S.cols()); }
};

/// D_aa = 1/sqrt(A_aa); throws if a diagonal entry is not positive.
Vector scale(const Csr& A);

/// Pairs (alpha, beta), alpha > beta, with |M_ab| > gamma.
std::vector<std::pair<int, int>> identify(const Csr& M, double gamma);

/// Connected components of the pairs; members ordered by row nnz of A, then index.
std::vector<std::vector<int>> group(const std::vector<std::pair<int, int>>& pairs, const Csr& A);

struct GroupFactor {
  Eigen::MatrixXd S;            // lower triangular in group order, eliminated rows zero
  std::vector<bool> eliminated;
};

/// Modified Gram-Schmidt on the dense group block; S A S^T = I on the retained rows.
GroupFactor orthonormalize(const Eigen::MatrixXd& A_sigma, double epsilon);

Preconditioner build_sipic(const Csr& A, const Options& options = {});

/// Relative growth of the structural nonzero count: (nnz(SAS^T) - nnz(A)) / nnz(A).
/// Both matrices must be compressed.
double fill_in(const Csr& A, const Csr& SASt);

/// Operator form of S A S^T with the reduced right-hand side S b.
struct PreconditionedSystem {
  sparse::LinearOperator op;
  Vector rhs;
};
PreconditionedSystem apply_preconditioned(const Csr& A, const Vector& b, const Preconditioner& P,
                                          sparse::Execution exec = sparse::Execution::parallel);
/// x = S^T xbar; eliminated functions get zero coefficients.
Vector recover(const Preconditioner& P, const Vector& xbar);

}  // namespace fcm::sipic
