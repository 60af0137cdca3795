#include "fcm/linalg.hpp"

#include <cmath>
#include <memory>
#include <random>

namespace fcm::linalg {

const char* to_string(Termination t) {
  switch (t) {
    case Termination::rel_tol:
      return "rel_tol";
    case Termination::abs_tol:
      return "abs_tol";
    case Termination::max_iter:
      return "max_iter";
  }
  return "?";
}

CgResult cg_solve(const LinearOperator& A, const Vector& b, const CgOptions& opt,
                  const Vector* reference) {
  const int n = A.n;
  if (b.size() != n) throw std::invalid_argument("cg_solve: dimension mismatch");
  const Execution ex = opt.execution;
  CgResult out;
  out.x = Vector::Zero(n);
  Vector r = b, p = b, Ap(n), Ax(n), e, Ae(n);
  double rr = sparse::dot(r, r, ex);
  const double bnorm = std::sqrt(rr);
  auto record_energy = [&]() {
    if (!reference) return;
    e = *reference - out.x;
    A.apply(e, Ae);
    out.report.energy_errors.push_back(std::sqrt(std::max(0.0, sparse::dot(e, Ae, ex))));
  };
  auto converged = [&](double res) {
    if (res <= opt.rel_tol * bnorm) {
      out.report.reason = Termination::rel_tol;
      return true;
    }
    if (res <= opt.abs_tol) {
      out.report.reason = Termination::abs_tol;
      return true;
    }
    return false;
  };
  out.report.residuals.push_back(bnorm);
  record_energy();
  if (bnorm == 0.0 || converged(bnorm)) {
    if (bnorm == 0.0) out.report.reason = Termination::abs_tol;
    return out;
  }
  for (int it = 1; it <= opt.max_iter; ++it) {
    A.apply(p, Ap);
    const double pAp = sparse::dot(p, Ap, ex);
    if (!(pAp > 0.0)) break;  // breakdown in a semi-definite direction
    const double alpha = rr / pAp;
    out.x += alpha * p;
    r -= alpha * Ap;
    const double rr_new = sparse::dot(r, r, ex);
    out.report.iterations = it;
    // history and termination use the true residual b - A x_i, not the recurrence
    A.apply(out.x, Ax);
    const double res = sparse::norm2(Vector(b - Ax), ex);
    out.report.residuals.push_back(res);
    record_energy();
    if (converged(res)) return out;
    p = r + (rr_new / rr) * p;
    rr = rr_new;
  }
  out.report.reason = Termination::max_iter;
  return out;
}

Vector start_vector(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-0.1, 0.1);
  Vector v(n);
  for (int i = 0; i < n; ++i) v[i] = 1.0 + u(rng);
  return v / v.norm();
}

EigenEstimate power_iteration(const LinearOperator& A, double rel_tol, int max_iter,
                              std::uint64_t seed) {
  Vector v = start_vector(A.n, seed), w(A.n);
  EigenEstimate est;
  double prev = 0.0;
  for (int it = 1; it <= max_iter; ++it) {
    A.apply(v, w);
    const double rq = sparse::dot(v, w);
    est.value = rq;
    est.iterations = it;
    if (it > 1 && std::abs(rq - prev) < rel_tol * std::abs(rq)) {
      est.converged = true;
      break;
    }
    prev = rq;
    const double nw = sparse::norm2(w);
    if (nw == 0.0) {
      est.converged = true;
      break;
    }
    v = w / nw;
  }
  return est;
}

EigenEstimate smallest_eigenvalue(const InverseSolver& solve, int n, double rel_tol, int max_iter,
                                  std::uint64_t seed) {
  Vector v = start_vector(n, seed);
  EigenEstimate est;
  double prev = 0.0;
  for (int it = 1; it <= max_iter; ++it) {
    const Vector z = solve(v);
    const double mu = sparse::dot(v, z);  // Rayleigh quotient of A^{-1}
    if (!(mu > 0.0) || !std::isfinite(mu))
      throw MachineSingularError("inverse power iteration: non-positive Rayleigh quotient");
    const double lam = 1.0 / mu;
    est.value = lam;
    est.iterations = it;
    if (it > 1 && std::abs(lam - prev) < rel_tol * lam) {
      est.converged = true;
      break;
    }
    prev = lam;
    v = z / sparse::norm2(z);
  }
  return est;
}

InverseSolver sipic_inverse(const Csr& A, const InnerSolveOptions& options) {
  sipic::Options so;
  so.gamma = options.gamma;
  auto P = std::make_shared<sipic::Preconditioner>(sipic::build_sipic(A, so));
  if (!P->eliminated.empty())
    throw MachineSingularError("matrix singular to machine precision (" +
                               std::to_string(P->eliminated.size()) + " functions eliminated)");
  CgOptions cg;
  cg.rel_tol = options.rel_tol;
  cg.max_iter = options.max_iter;
  cg.execution = options.execution;
  return [P, cg](const Vector& v) {
    const Vector rhs = P->S * v;
    const auto res = cg_solve(sparse::make_operator(P->SASt, cg.execution), rhs, cg);
    return Vector(P->S.transpose() * res.x);
  };
}

namespace {
ConditionEstimate estimate(const Csr& M, const InnerSolveOptions& options) {
  ConditionEstimate c;
  const InverseSolver solve = sipic_inverse(M, options);
  const auto hi = power_iteration(sparse::make_operator(M, options.execution));
  const auto lo = smallest_eigenvalue(solve, static_cast<int>(M.rows()));
  c.lambda_max = hi.value;
  c.lambda_min = lo.value;
  c.kappa = hi.value / lo.value;
  c.converged = hi.converged && lo.converged;
  return c;
}
}  // namespace

ConditionEstimate condition_number(const Csr& A, const InnerSolveOptions& options) {
  return estimate(A, options);
}

ConditionEstimate condition_number(const sipic::Preconditioner& P,
                                   const InnerSolveOptions& options) {
  return estimate(P.SASt, options);
}

}  // namespace fcm::linalg
