#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include "fcm/sipic.hpp"
#include "fcm/sparse.hpp"

namespace fcm::linalg {

using sparse::Csr;
using sparse::Execution;
using sparse::LinearOperator;
using sparse::Vector;

enum class Termination { rel_tol, abs_tol, max_iter };
const char* to_string(Termination t);

struct CgOptions {
  double rel_tol = 1e-10;
  double abs_tol = 0.0;
  int max_iter = 100000;
  Execution execution = Execution::parallel;
};

struct CgReport {
  int iterations = 0;
  std::vector<double> residuals;      // ||b - A x_i||, entry 0 is ||b|| (x0 = 0)
  std::vector<double> energy_errors;  // ||x_ref - x_i||_A when a reference is supplied
  Termination reason = Termination::max_iter;
};

struct CgResult {
  Vector x;
  CgReport report;
};

/// Conjugate gradients from x0 = 0. Terminates on ||r|| <= rel_tol*||b||, ||r|| <= abs_tol
/// or max_iter (returning the last iterate).
CgResult cg_solve(const LinearOperator& A, const Vector& b, const CgOptions& options = {},
                  const Vector* reference = nullptr);

struct EigenEstimate {
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Seeded start vector: ones plus a uniform perturbation of size 0.1, normalized.
Vector start_vector(int n, std::uint64_t seed);

/// Largest eigenvalue by power iteration; stops when two consecutive Rayleigh
/// quotients differ by less than rel_tol relative.
EigenEstimate power_iteration(const LinearOperator& A, double rel_tol = 1e-6, int max_iter = 100000,
                              std::uint64_t seed = 17);

/// Thrown when the smallest eigenvalue is lost to machine precision.
struct MachineSingularError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// z = A^{-1} v (approximately).
using InverseSolver = std::function<Vector(const Vector&)>;

/// Smallest eigenvalue by inverse power iteration driven by `solve`.
EigenEstimate smallest_eigenvalue(const InverseSolver& solve, int n, double rel_tol = 1e-6,
                                  int max_iter = 100000, std::uint64_t seed = 29);

struct InnerSolveOptions {
  double rel_tol = 1e-10;
  int max_iter = 100000;
  double gamma = 0.9;
  Execution execution = Execution::parallel;
};

/// Inverse of A through x = S^T (S A S^T)^{-1} S v with the SIPIC factor of A.
/// Throws MachineSingularError if SIPIC eliminated any function.
InverseSolver sipic_inverse(const Csr& A, const InnerSolveOptions& options = {});

struct ConditionEstimate {
  double lambda_max = 0.0;
  double lambda_min = 0.0;
  double kappa = 0.0;
  bool converged = false;
};

/// kappa_2(A) = lambda_max / lambda_min with power and inverse power iteration.
ConditionEstimate condition_number(const Csr& A, const InnerSolveOptions& options = {});
/// kappa_2(S A S^T) using the explicit product stored in the preconditioner.
ConditionEstimate condition_number(const sipic::Preconditioner& P,
                                   const InnerSolveOptions& options = {});

}  // namespace fcm::linalg
