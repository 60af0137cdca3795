#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

namespace fcm {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  constexpr Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  constexpr Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  constexpr Vec2 operator*(double s) const { return {x * s, y * s}; }
  constexpr double dot(Vec2 o) const { return x * o.x + y * o.y; }
  double norm() const { return std::hypot(x, y); }
};

inline Vec2 rotate(Vec2 p, double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  return {c * p.x - s * p.y, s * p.x + c * p.y};
}

struct Box {
  Vec2 lo;
  Vec2 hi;
  double width() const { return hi.x - lo.x; }
  std::array<Vec2, 4> corners() const {  // counter-clockwise
    return {Vec2{lo.x, lo.y}, Vec2{hi.x, lo.y}, Vec2{hi.x, hi.y}, Vec2{lo.x, hi.y}};
  }
};

}  // namespace fcm

namespace fcm::geometry {

/// Thrown when an operation has no active cells to work on.
struct EmptyDomainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class BoxClass { inside, outside, cut };

/// Elementary level set. The physical domain is the intersection of the
/// sets {value >= 0} of all its primitives.
class Primitive {
 public:
  /// {x : normal . x <= offset}; `normal` is the outward unit normal.
  static Primitive half_plane(Vec2 normal, double offset, int piece);
  /// Points outside the closed disk (a circular exclusion).
  static Primitive disk_exterior(Vec2 center, double radius, int piece);
  /// Points inside the disk.
  static Primitive disk_interior(Vec2 center, double radius, int piece);

  double value(Vec2 p) const;
  /// Outward unit normal of the domain at (or near) the zero set.
  Vec2 outward_normal(Vec2 p) const;
  /// Exact classification of an axis-aligned box; `tol` absorbs round-off at touching boundaries.
  BoxClass classify(const Box& box, double tol) const;
  Primitive rotated(double angle) const;

  int piece() const { return piece_; }
  bool is_linear() const { return kind_ == Kind::half_plane; }

 private:
  enum class Kind { half_plane, disk_exterior, disk_interior };
  Kind kind_ = Kind::half_plane;
  Vec2 normal_{};
  double offset_ = 0.0;
  Vec2 center_{};
  double radius_ = 0.0;
  int piece_ = -1;
};

/// Domain described as an intersection of primitives, rigidly rotated about the origin.
class ImplicitDomain {
 public:
  ImplicitDomain() = default;

  /// Rectangle centred at `center` with half-widths; boundary pieces get ids
  /// first_piece .. first_piece+3 (right, top, left, bottom).
  static ImplicitDomain rectangle(Vec2 center, Vec2 half_widths, int first_piece = 0);

  /// Boolean difference with a closed disk.
  ImplicitDomain minus_disk(Vec2 center, double radius, int piece) const;

  /// Rigid rotation about the origin; angles accumulate.
  ImplicitDomain rotated(double angle) const;

  bool inside(Vec2 p) const;
  Box bounds() const;
  double angle() const { return angle_; }
  std::span<const Primitive> primitives() const { return primitives_; }
  int piece_count() const;

 private:
  std::vector<Primitive> primitives_;
  std::vector<Vec2> hull_;  // polygon enclosing the domain, used for bounds
  double angle_ = 0.0;
};

/// Uniform Cartesian grid of square cells.
struct CartesianMesh {
  Vec2 origin;  // lower-left vertex
  double h = 1.0;
  int nx = 0;
  int ny = 0;

  /// Grid of size h with vertices on the lattice h*Z^2 covering `box`.
  static CartesianMesh covering(const Box& box, double h);

  int cell_count() const { return nx * ny; }
  int linear_index(int ix, int iy) const { return ix + nx * iy; }
  std::pair<int, int> lattice_index(int linear) const { return {linear % nx, linear / nx}; }
  Box cell_box(int linear) const;
  double cell_volume() const { return h * h; }
};

struct QuadraturePoint {
  Vec2 x;
  double weight;
};

struct BoundaryPoint {
  Vec2 x;
  double weight;
  Vec2 normal;  // outward unit normal of the domain
  int piece;
};

/// Intersection of one mesh cell with the domain, with quadrature rules.
struct TrimmedCell {
  int index = -1;  // linear mesh cell index
  std::vector<QuadraturePoint> volume;
  std::vector<BoundaryPoint> boundary;
  double eta = 0.0;               // volume fraction |cell ∩ Ω| / h^d
  double boundary_measure = 0.0;  // |Γ_i|

  bool is_trimmed() const { return eta < 1.0 - 1e-12 || !boundary.empty(); }
  bool touches_piece(int piece) const;
};

enum class Execution { serial, parallel };

struct TessellationOptions {
  int max_depth = 2;
  int quad_order = 3;  // Gauss points per direction on untrimmed (sub)cells
  Execution execution = Execution::parallel;
};

/// Number of Gauss points per direction used on triangles and boundary segments
/// for a given `quad_order`; exact for the degree-4p integrands of Q_p spaces.
inline int simplex_order(int quad_order) { return 2 * quad_order - 1; }

/// Recursive-bisection tessellation of all mesh cells; returns the cells with
/// eta > 1e-16 in ascending index order.
std::vector<TrimmedCell> tessellate(const ImplicitDomain& domain, const CartesianMesh& mesh,
                                    const TessellationOptions& options);

/// Tessellation of a single cell; std::nullopt-like empty result has eta == 0.
TrimmedCell tessellate_cell(const ImplicitDomain& domain, const CartesianMesh& mesh, int linear,
                            const TessellationOptions& options);

struct MinVolumeFraction {
  double eta;
  int position;    // position in the cell list
  int cell_index;  // mesh index
};

/// Smallest volume fraction (first occurrence on ties). Throws EmptyDomainError on empty input.
MinVolumeFraction min_volume_fraction(std::span<const TrimmedCell> cells);

/// Debug dump `x,y,weight,kind` with kind in {volume, boundary}.
void write_quadrature_csv(std::ostream& out, std::span<const TrimmedCell> cells);

}  // namespace fcm::geometry
