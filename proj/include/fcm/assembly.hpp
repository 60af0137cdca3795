#pragma once

#include <functional>
#include <span>
#include <vector>

#include "fcm/basis.hpp"
#include "fcm/geometry.hpp"
#include "fcm/sparse.hpp"
#include "fcm/stabilization.hpp"

namespace fcm::assembly {

using sparse::Csr;
using sparse::Vector;

enum class StabMode { local, global };
enum class BcType { dirichlet, neumann };

struct AssemblyOptions {
  StabMode mode = StabMode::local;
  double beta_multiplier = 2.0;  // beta_i = multiplier * C_i
  geometry::Execution execution = geometry::Execution::parallel;
  bool keep_parts = false;  // also store F1, F2, F3 separately
};

/// Boundary pieces not listed default to Neumann.
struct PoissonProblem {
  std::vector<BcType> pieces;
  std::function<double(Vec2)> source;                     // f, may be empty
  std::function<double(Vec2)> dirichlet;                  // g^D, may be empty (zero)
  std::function<double(Vec2, Vec2 normal)> neumann;       // g^N, may be empty (zero)

  bool is_dirichlet(int piece) const {
    return piece >= 0 && piece < static_cast<int>(pieces.size()) && pieces[piece] == BcType::dirichlet;
  }
};

struct ElasticityProblem {
  std::vector<BcType> pieces;
  double lambda = 1.0;
  double mu = 1.0;
  std::function<Vec2(Vec2)> dirichlet;              // g^D
  std::function<Vec2(Vec2, Vec2 normal)> traction;  // g^N
  std::function<Vec2(Vec2)> body_force;

  bool is_dirichlet(int piece) const {
    return piece >= 0 && piece < static_cast<int>(pieces.size()) && pieces[piece] == BcType::dirichlet;
  }
};

struct CellStabilization {
  int position = -1;  // in the active cell list
  int cell = -1;      // mesh index
  double eta = 0.0;
  double C = 0.0;  // Poisson; C_lambda for elasticity
  double beta = 0.0;
  double C_mu = 0.0;
  double beta_mu = 0.0;
  bool fallback = false;
};

struct FcmSystem {
  sparse::SparseSymMatrix A;
  Vector b;
  std::vector<CellStabilization> stabilization;  // Dirichlet-adjacent cells only
  StabMode mode = StabMode::local;
  double global_beta = 0.0;     // max beta (global mode)
  double global_beta_mu = 0.0;  // elasticity
  Csr F1, F2, F3;               // when keep_parts

  const Csr& matrix() const { return A.csr(); }
};

/// F(v,u) = int grad v . grad u + int_{Gamma^D} (beta v u - v d_n u - u d_n v),
/// l(v) = int f v + int_{Gamma^N} g^N v + int_{Gamma^D} (beta g^D v - g^D d_n v).
FcmSystem assemble_poisson(std::span<const geometry::TrimmedCell> cells,
                           const basis::BasisSpace& space, const PoissonProblem& problem,
                           const AssemblyOptions& options = {});

/// Plane-strain linear elasticity with Nitsche terms
/// -int (v . sigma(u) n + u . sigma(v) n) + int (beta_l (v.n)(u.n) + beta_m v.u).
FcmSystem assemble_elasticity_2d(std::span<const geometry::TrimmedCell> cells,
                                 const basis::BasisSpace& space, const ElasticityProblem& problem,
                                 const AssemblyOptions& options = {});

/// Per-cell stabilization for every Dirichlet-adjacent cell.
std::vector<CellStabilization> poisson_stabilization(std::span<const geometry::TrimmedCell> cells,
                                                     const basis::BasisSpace& space,
                                                     const PoissonProblem& problem,
                                                     const AssemblyOptions& options);

/// F(v_h, v_h) evaluated by direct quadrature of the field with coefficients y.
double poisson_form(std::span<const geometry::TrimmedCell> cells, const basis::BasisSpace& space,
                    const PoissonProblem& problem, const FcmSystem& system, const Vector& y);

/// Strain energy of u_h - u: 0.5 int eps(e) : sigma(e), with exact gradient supplied.
double strain_energy_error(std::span<const geometry::TrimmedCell> cells,
                           const basis::BasisSpace& space, const ElasticityProblem& problem,
                           const Vector& coeffs,
                           const std::function<void(Vec2, double grad[2][2])>& exact_gradient);

}  // namespace fcm::assembly
