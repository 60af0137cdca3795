#include "fcm/geometry.hpp"

#include <algorithm>
#include <limits>
#include <ostream>

#include "fcm/quadrature.hpp"

namespace fcm::geometry {

// ---------------------------------------------------------------- primitives

Primitive Primitive::half_plane(Vec2 normal, double offset, int piece) {
  Primitive p;
  p.kind_ = Kind::half_plane;
  const double len = normal.norm();
  p.normal_ = normal * (1.0 / len);
  p.offset_ = offset / len;
  p.piece_ = piece;
  return p;
}

Primitive Primitive::disk_exterior(Vec2 center, double radius, int piece) {
  Primitive p;
  p.kind_ = Kind::disk_exterior;
  p.center_ = center;
  p.radius_ = radius;
  p.piece_ = piece;
  return p;
}

Primitive Primitive::disk_interior(Vec2 center, double radius, int piece) {
  Primitive p = disk_exterior(center, radius, piece);
  p.kind_ = Kind::disk_interior;
  return p;
}

double Primitive::value(Vec2 x) const {
  switch (kind_) {
    case Kind::half_plane:
      return offset_ - normal_.dot(x);
    case Kind::disk_exterior:
      return (x - center_).norm() - radius_;
    case Kind::disk_interior:
      return radius_ - (x - center_).norm();
  }
  return 0.0;
}

Vec2 Primitive::outward_normal(Vec2 x) const {
  if (kind_ == Kind::half_plane) return normal_;
  const Vec2 d = x - center_;
  const double r = d.norm();
  const Vec2 radial = r > 0.0 ? d * (1.0 / r) : Vec2{1.0, 0.0};
  return kind_ == Kind::disk_exterior ? radial * -1.0 : radial;
}

BoxClass Primitive::classify(const Box& box, double tol) const {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  if (kind_ == Kind::half_plane) {
    for (const Vec2& c : box.corners()) {
      const double v = value(c);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  } else {
    // distance range from the centre to the box
    const double cx = std::clamp(center_.x, box.lo.x, box.hi.x);
    const double cy = std::clamp(center_.y, box.lo.y, box.hi.y);
    const double dmin = (Vec2{cx, cy} - center_).norm();
    double dmax = 0.0;
    for (const Vec2& c : box.corners()) dmax = std::max(dmax, (c - center_).norm());
    if (kind_ == Kind::disk_exterior) {
      lo = dmin - radius_;
      hi = dmax - radius_;
    } else {
      lo = radius_ - dmax;
      hi = radius_ - dmin;
    }
  }
  if (lo >= -tol) return BoxClass::inside;
  if (hi <= tol) return BoxClass::outside;
  return BoxClass::cut;
}

Primitive Primitive::rotated(double angle) const {
  Primitive p = *this;
  p.normal_ = rotate(normal_, angle);
  p.center_ = rotate(center_, angle);
  return p;
}

// ---------------------------------------------------------------- domain

ImplicitDomain ImplicitDomain::rectangle(Vec2 center, Vec2 half, int first_piece) {
  ImplicitDomain d;
  d.primitives_.push_back(Primitive::half_plane({1.0, 0.0}, center.x + half.x, first_piece + 0));
  d.primitives_.push_back(Primitive::half_plane({0.0, 1.0}, center.y + half.y, first_piece + 1));
  d.primitives_.push_back(Primitive::half_plane({-1.0, 0.0}, -(center.x - half.x), first_piece + 2));
  d.primitives_.push_back(Primitive::half_plane({0.0, -1.0}, -(center.y - half.y), first_piece + 3));
  d.hull_ = {center + Vec2{-half.x, -half.y}, center + Vec2{half.x, -half.y},
             center + Vec2{half.x, half.y}, center + Vec2{-half.x, half.y}};
  return d;
}

ImplicitDomain ImplicitDomain::minus_disk(Vec2 center, double radius, int piece) const {
  ImplicitDomain d = *this;
  d.primitives_.push_back(Primitive::disk_exterior(rotate(center, angle_), radius, piece));
  return d;
}

ImplicitDomain ImplicitDomain::rotated(double angle) const {
  ImplicitDomain d = *this;
  for (auto& p : d.primitives_) p = p.rotated(angle);
  for (auto& v : d.hull_) v = rotate(v, angle);
  d.angle_ += angle;
  return d;
}

bool ImplicitDomain::inside(Vec2 p) const {
  for (const auto& prim : primitives_)
    if (prim.value(p) < 0.0) return false;
  return !primitives_.empty();
}

Box ImplicitDomain::bounds() const {
  if (hull_.empty()) throw std::logic_error("ImplicitDomain::bounds: unbounded domain");
  Box b{hull_.front(), hull_.front()};
  for (const Vec2& v : hull_) {
    b.lo = {std::min(b.lo.x, v.x), std::min(b.lo.y, v.y)};
    b.hi = {std::max(b.hi.x, v.x), std::max(b.hi.y, v.y)};
  }
  return b;
}

int ImplicitDomain::piece_count() const {
  int n = 0;
  for (const auto& p : primitives_) n = std::max(n, p.piece() + 1);
  return n;
}

// ---------------------------------------------------------------- mesh

CartesianMesh CartesianMesh::covering(const Box& box, double h) {
  CartesianMesh m;
  m.h = h;
  // snap to the lattice h*Z^2; the small slack keeps exactly aligned boundaries inside
  const double eps = 1e-10;
  const double x0 = std::floor(box.lo.x / h + eps);
  const double y0 = std::floor(box.lo.y / h + eps);
  const double x1 = std::ceil(box.hi.x / h - eps);
  const double y1 = std::ceil(box.hi.y / h - eps);
  m.origin = {x0 * h, y0 * h};
  m.nx = static_cast<int>(x1 - x0);
  m.ny = static_cast<int>(y1 - y0);
  return m;
}

Box CartesianMesh::cell_box(int linear) const {
  const auto [ix, iy] = lattice_index(linear);
  const Vec2 lo{origin.x + ix * h, origin.y + iy * h};
  return {lo, lo + Vec2{h, h}};
}

bool TrimmedCell::touches_piece(int piece) const {
  return std::any_of(boundary.begin(), boundary.end(),
                     [piece](const BoundaryPoint& b) { return b.piece == piece; });
}

// ---------------------------------------------------------------- tessellation

namespace {

struct Vertex {
  Vec2 x;
  int tag;  // boundary piece of the edge leaving this vertex, -1 for cell faces
};

using Polygon = std::vector<Vertex>;

class CellTessellator {
 public:
  CellTessellator(const ImplicitDomain& domain, double h, const TessellationOptions& opt)
      : domain_(domain), h_(h), opt_(opt), tol_(1e-12 * h) {}

  void run(const Box& box, TrimmedCell& cell) {
    cell_ = &cell;
    refine(box, 0);
  }

 private:
  const ImplicitDomain& domain_;
  double h_;
  TessellationOptions opt_;
  double tol_;
  TrimmedCell* cell_ = nullptr;

  bool inside(const Primitive& p, Vec2 x) const { return p.value(x) >= -tol_; }

  void refine(const Box& box, int depth) {
    std::vector<const Primitive*> cutting;
    for (const auto& prim : domain_.primitives()) {
      const BoxClass c = prim.classify(box, tol_);
      if (c == BoxClass::outside) return;
      if (c == BoxClass::cut) cutting.push_back(&prim);
    }
    if (cutting.empty()) {
      emit_box(box);
      return;
    }
    if (depth < opt_.max_depth) {
      const Vec2 mid = (box.lo + box.hi) * 0.5;
      refine({box.lo, mid}, depth + 1);
      refine({{mid.x, box.lo.y}, {box.hi.x, mid.y}}, depth + 1);
      refine({{box.lo.x, mid.y}, {mid.x, box.hi.y}}, depth + 1);
      refine({mid, box.hi}, depth + 1);
      return;
    }
    Polygon poly;
    for (const Vec2& c : box.corners()) poly.push_back({c, -1});
    for (const Primitive* prim : cutting) {
      poly = clip(poly, *prim);
      if (poly.size() < 3) return;
    }
    tag_aligned_edges(poly);
    emit_polygon(poly);
  }

  Vec2 edge_root(const Primitive& prim, Vec2 in, Vec2 out) const {
    const double len = (out - in).norm();
    double a = 0.0, b = 1.0;
    for (int it = 0; it < 50 && (b - a) * len > 1e-14 * h_; ++it) {
      const double m = 0.5 * (a + b);
      if (inside(prim, in + (out - in) * m))
        a = m;
      else
        b = m;
    }
    return in + (out - in) * (0.5 * (a + b));
  }

  Polygon clip(const Polygon& poly, const Primitive& prim) const {
    Polygon out;
    const std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; ++i) {
      const Vertex& p = poly[i];
      const Vertex& q = poly[(i + 1) % n];
      const bool pin = inside(prim, p.x);
      const bool qin = inside(prim, q.x);
      if (pin) {
        out.push_back(p);
        if (!qin) out.push_back({edge_root(prim, p.x, q.x), prim.piece()});
      } else if (qin) {
        out.push_back({edge_root(prim, q.x, p.x), p.tag});
      }
    }
    // drop zero-length edges; the surviving vertex keeps the later tag
    Polygon merged;
    for (std::size_t i = 0; i < out.size(); ++i) {
      const Vertex& next = out[(i + 1) % out.size()];
      if ((next.x - out[i].x).norm() <= 1e-13 * h_ && out.size() > 1) {
        if (i + 1 == out.size() && !merged.empty()) merged.front().x = out[i].x;
        continue;
      }
      merged.push_back(out[i]);
    }
    return merged;
  }

  // Cell faces lying on a straight boundary (mesh-aligned boundaries).
  void tag_aligned_edges(Polygon& poly) const {
    const std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; ++i) {
      if (poly[i].tag >= 0) continue;
      const Vec2 p = poly[i].x;
      const Vec2 q = poly[(i + 1) % n].x;
      for (const auto& prim : domain_.primitives()) {
        if (!prim.is_linear()) continue;
        if (std::abs(prim.value(p)) <= tol_ && std::abs(prim.value(q)) <= tol_) {
          poly[i].tag = prim.piece();
          break;
        }
      }
    }
  }

  void emit_box(const Box& box) {
    const auto& g = quadrature::gauss_legendre(opt_.quad_order);
    const double w = box.width();
    for (std::size_t j = 0; j < g.points.size(); ++j)
      for (std::size_t i = 0; i < g.points.size(); ++i)
        cell_->volume.push_back({{box.lo.x + w * g.points[i], box.lo.y + w * g.points[j]},
                                 g.weights[i] * g.weights[j] * w * w});
    Polygon poly;
    for (const Vec2& c : box.corners()) poly.push_back({c, -1});
    tag_aligned_edges(poly);
    emit_boundary(poly);
  }

  void emit_polygon(const Polygon& poly) {
    const auto& tri = quadrature::collapsed_triangle(simplex_order(opt_.quad_order));
    const Vec2 a = poly[0].x;
    for (std::size_t k = 1; k + 1 < poly.size(); ++k) {
      const Vec2 b = poly[k].x;
      const Vec2 c = poly[k + 1].x;
      const Vec2 e1 = b - a, e2 = c - b;
      const double jac = e1.x * e2.y - e1.y * e2.x;
      if (!(jac > 0.0)) continue;  // degenerate sliver
      for (std::size_t q = 0; q < tri.weights.size(); ++q)
        cell_->volume.push_back({a + e1 * tri.s[q] + e2 * tri.t[q], tri.weights[q] * jac});
    }
    emit_boundary(poly);
  }

  void emit_boundary(const Polygon& poly) {
    const auto& g = quadrature::gauss_legendre(simplex_order(opt_.quad_order));
    const std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; ++i) {
      if (poly[i].tag < 0) continue;
      const Vec2 p = poly[i].x;
      const Vec2 d = poly[(i + 1) % n].x - p;
      const double len = d.norm();
      if (len <= 0.0) continue;
      const Vec2 normal{d.y / len, -d.x / len};  // counter-clockwise polygon
      for (std::size_t k = 0; k < g.points.size(); ++k)
        cell_->boundary.push_back({p + d * g.points[k], g.weights[k] * len, normal, poly[i].tag});
      cell_->boundary_measure += len;
    }
  }
};

}  // namespace

TrimmedCell tessellate_cell(const ImplicitDomain& domain, const CartesianMesh& mesh, int linear,
                            const TessellationOptions& options) {
  if (options.max_depth < 0) throw std::invalid_argument("tessellate: max_depth < 0");
  if (options.quad_order < 1) throw std::invalid_argument("tessellate: quad_order < 1");
  TrimmedCell cell;
  cell.index = linear;
  CellTessellator(domain, mesh.h, options).run(mesh.cell_box(linear), cell);
  double vol = 0.0;
  for (const auto& q : cell.volume) vol += q.weight;
  cell.eta = vol / mesh.cell_volume();
  return cell;
}

std::vector<TrimmedCell> tessellate(const ImplicitDomain& domain, const CartesianMesh& mesh,
                                    const TessellationOptions& options) {
  // validated here too: an exception must not escape the parallel region
  if (options.max_depth < 0) throw std::invalid_argument("tessellate: max_depth < 0");
  if (options.quad_order < 1) throw std::invalid_argument("tessellate: quad_order < 1");
  const int n = mesh.cell_count();
  std::vector<TrimmedCell> all(n);
  if (options.execution == Execution::parallel) {
#pragma omp parallel for schedule(dynamic, 16)
    for (int c = 0; c < n; ++c) all[c] = tessellate_cell(domain, mesh, c, options);
  } else {
    for (int c = 0; c < n; ++c) all[c] = tessellate_cell(domain, mesh, c, options);
  }
  std::vector<TrimmedCell> active;
  for (auto& c : all)
    if (c.eta > 1e-16) active.push_back(std::move(c));
  return active;
}

MinVolumeFraction min_volume_fraction(std::span<const TrimmedCell> cells) {
  if (cells.empty()) throw EmptyDomainError("min_volume_fraction: no active cells");
  MinVolumeFraction best{cells[0].eta, 0, cells[0].index};
  for (std::size_t i = 1; i < cells.size(); ++i)
    if (cells[i].eta < best.eta) best = {cells[i].eta, static_cast<int>(i), cells[i].index};
  return best;
}

void write_quadrature_csv(std::ostream& out, std::span<const TrimmedCell> cells) {
  out << "x,y,weight,kind\n";
  out.precision(17);
  for (const auto& c : cells) {
    for (const auto& q : c.volume) out << q.x.x << ',' << q.x.y << ',' << q.weight << ",volume\n";
    for (const auto& b : c.boundary)
      out << b.x.x << ',' << b.x.y << ',' << b.weight << ",boundary\n";
  }
}

}  // namespace fcm::geometry
