#pragma once

#include <Eigen/Dense>
#include <span>
#include <stdexcept>
#include <vector>

#include "fcm/geometry.hpp"

namespace fcm::basis {

enum class Family { bspline, lagrange };

/// Values and first derivatives of all B-splines of degree p on `knots` at x
/// (Cox-de Boor). Works for uniform and open knot vectors; the last knot span is
/// closed on the right.
void bspline_1d(std::span<const double> knots, int p, double x, std::vector<double>& values,
                std::vector<double>& derivatives);

/// The p+1 uniform B-spline pieces that are nonzero on the reference interval,
/// at local coordinate xi in [0,1]. Entry a belongs to the function whose support
/// starts a-p intervals to the left.
void uniform_bspline_local(int p, double xi, double* values, double* derivatives);

/// Equispaced Lagrange polynomials of degree p on [0,1].
void lagrange_local(int p, double xi, double* values, double* derivatives);

/// Basis functions (rows) at points (columns) of one cell, gradients in physical coordinates.
struct CellValues {
  Eigen::MatrixXd values;
  Eigen::MatrixXd dx;
  Eigen::MatrixXd dy;
};

/// Scalar tensor-product space on the active cells of a Cartesian mesh; vector
/// spaces interleave components (global dof = components*alpha + c).
class BasisSpace {
 public:
  static BasisSpace build(const geometry::CartesianMesh& mesh,
                          std::span<const geometry::TrimmedCell> cells, Family family, int p,
                          int components = 1);

  Family family() const { return family_; }
  int order() const { return p_; }
  int components() const { return components_; }
  int scalar_size() const { return static_cast<int>(anchors_.size()); }
  int size() const { return scalar_size() * components_; }
  int local_scalar_count() const { return (p_ + 1) * (p_ + 1); }
  int cell_count() const { return static_cast<int>(cell_functions_.size()); }
  const geometry::CartesianMesh& mesh() const { return mesh_; }

  /// Global scalar indices supported on the cell at `position` in the active list;
  /// local index a = ax + (p+1)*ay.
  std::span<const int> cell_functions(int position) const;
  /// Global dofs on the cell, local dof = components*a + c.
  std::vector<int> cell_dofs(int position) const;
  /// Position of a mesh cell in the active list, or -1.
  int position_of(int mesh_index) const;

  /// Greville abscissa (B-splines) or node (Lagrange) of a scalar function.
  Vec2 anchor(int scalar_index) const { return anchors_[scalar_index]; }

  CellValues evaluate(int position, std::span<const Vec2> points) const;
  /// Sum over the cell's supported functions of coeffs[dof]*phi at x (scalar field, component c).
  double field(int position, std::span<const double> coeffs, Vec2 x, int component = 0) const;

 private:
  geometry::CartesianMesh mesh_;
  Family family_ = Family::bspline;
  int p_ = 1;
  int components_ = 1;
  std::vector<int> cell_index_;                 // position -> mesh index
  std::vector<int> position_;                   // mesh index -> position or -1
  std::vector<std::vector<int>> cell_functions_;
  std::vector<Vec2> anchors_;
};

}  // namespace fcm::basis
