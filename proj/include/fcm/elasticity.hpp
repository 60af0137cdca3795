#pragma once

#include <stdexcept>

#include "fcm/geometry.hpp"

namespace fcm::elasticity {

struct Tensor2 {
  double xx = 0.0, xy = 0.0, yx = 0.0, yy = 0.0;
};

struct PlateState {
  Vec2 u;
  Tensor2 grad;    // grad(i,j) = d u_i / d x_j
  Tensor2 stress;  // symmetric

  Vec2 traction(Vec2 n) const {
    return {stress.xx * n.x + stress.xy * n.y, stress.yx * n.x + stress.yy * n.y};
  }
};

struct InsideHoleError : std::domain_error {
  using std::domain_error::domain_error;
};

/// Plane-strain displacement of an infinite plate with a traction-free circular hole of
/// radius R at the origin under unit horizontal tension. Throws InsideHoleError for r < R.
PlateState exact_plate_solution(Vec2 x, double lambda, double mu, double R);

/// Same formulas without the r >= R check (the tessellated arc cuts slightly into the hole).
PlateState plate_solution_extended(Vec2 x, double lambda, double mu, double R);

/// Field of a plate rotated by `angle` about the origin, evaluated at a physical point.
PlateState rotated_plate_solution(Vec2 x, double angle, double lambda, double mu, double R);

}  // namespace fcm::elasticity
