#include "fcm/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace fcm::quadrature {

namespace {

Rule1D make_gauss_legendre(int n) {
  Rule1D rule;
  rule.points.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    // Newton on P_n starting from the Chebyshev-like guess.
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // map [-1,1] -> [0,1]
    rule.points[n - 1 - i] = 0.5 * (x + 1.0);
    rule.weights[n - 1 - i] = 1.0 / ((1.0 - x * x) * dp * dp);
  }
  return rule;
}

TriangleRule make_triangle(int n) {
  // s carries the collapsed direction (Jacobian factor s), one extra point.
  const Rule1D& gs = gauss_legendre(n + 1);
  const Rule1D& gt = gauss_legendre(n);
  TriangleRule rule;
  for (std::size_t a = 0; a < gs.points.size(); ++a) {
    for (std::size_t b = 0; b < gt.points.size(); ++b) {
      const double s = gs.points[a];
      rule.s.push_back(s);
      rule.t.push_back(s * gt.points[b]);
      rule.weights.push_back(gs.weights[a] * gt.weights[b] * s);
    }
  }
  return rule;
}

}  // namespace

const Rule1D& gauss_legendre(int n) {
  if (n < 1 || n > 64) throw std::invalid_argument("gauss_legendre: n out of range");
  static std::mutex mutex;
  static std::map<int, Rule1D> cache;
  std::lock_guard lock(mutex);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, make_gauss_legendre(n)).first;
  return it->second;
}

const TriangleRule& collapsed_triangle(int n) {
  if (n < 1 || n > 63) throw std::invalid_argument("collapsed_triangle: n out of range");
  static std::mutex mutex;
  static std::map<int, TriangleRule> cache;
  std::lock_guard lock(mutex);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, make_triangle(n)).first;
  return it->second;
}

}  // namespace fcm::quadrature
