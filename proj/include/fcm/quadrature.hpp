#pragma once

#include <vector>

namespace fcm::quadrature {

/// One-dimensional rule on the reference interval [0, 1].
struct Rule1D {
  std::vector<double> points;
  std::vector<double> weights;
};

/// Gauss-Legendre rule with `n` points mapped to [0, 1]; exact for degree 2n-1.
const Rule1D& gauss_legendre(int n);

/// Collapsed (Duffy) rule on the reference triangle {(s,t): 0 <= t <= s <= 1}.
/// Exact for polynomials of total degree 2n-1. `points` are stored as (s,t) pairs.
struct TriangleRule {
  std::vector<double> s;
  std::vector<double> t;
  std::vector<double> weights;  // sums to 1/2
};

const TriangleRule& collapsed_triangle(int n);

}  // namespace fcm::quadrature
