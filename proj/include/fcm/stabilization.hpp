#pragma once

#include <Eigen/Dense>
#include <functional>

#include "fcm/geometry.hpp"

namespace fcm::stabilization {

struct GeneralizedEigenvalue {
  double lambda_max = 0.0;
  bool fallback = false;  // Cholesky of the scaled V failed, pseudo-inverse used
  int rank = 0;
};

/// Largest lambda of B x = lambda V x on range(V). V is diagonally scaled first;
/// rows with zero diagonal are dropped. If a Cholesky pivot falls below
/// `pivot_tol` the eigen-decomposition of V is used instead, keeping eigenvalues
/// above kernel_tol * max.
GeneralizedEigenvalue max_generalized_eigenvalue(const Eigen::MatrixXd& B, const Eigen::MatrixXd& V,
                                                 double pivot_tol = 1e-14,
                                                 double kernel_tol = 1e-14);

using DirichletTest = std::function<bool(int piece)>;

/// Centre of mass of the trimmed cell.
Vec2 center_of_mass(const geometry::TrimmedCell& cell);

struct PoissonConstant {
  double C = 0.0;
  bool fallback = false;
};

/// max over Q_p of int_{Gamma^D} (d_n v)^2 / int |grad v|^2 on one trimmed cell, in the
/// centred monomial basis prod ((x_j - xhat_j)/h)^{rho_j}, 0 <= rho_j <= p.
PoissonConstant poisson_constant(const geometry::TrimmedCell& cell, int p, double h,
                                 const DirichletTest& dirichlet);

/// Same on the interval [lo, hi] with Dirichlet ends selected by the flags.
double poisson_constant_1d(double lo, double hi, int p, bool dirichlet_lo, bool dirichlet_hi);

struct ElasticityConstants {
  double C_lambda = 0.0;  // int_Gamma div^2 <= C int div^2
  double C_mu = 0.0;      // int_Gamma |eps n|^2 <= C int |eps|^2
};

ElasticityConstants elasticity_constants(const geometry::TrimmedCell& cell, int p, double h,
                                         const DirichletTest& dirichlet);

}  // namespace fcm::stabilization
