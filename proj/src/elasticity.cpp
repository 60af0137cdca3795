#include "fcm/elasticity.hpp"

#include <cmath>

namespace fcm::elasticity {

PlateState plate_solution_extended(Vec2 p, double lam, double mu, double R) {
  const double x = p.x, y = p.y;
  const double s = x * x + y * y;  // r^2
  const double s2 = s * s, s3 = s2 * s, s4 = s3 * s;
  const double R2 = R * R, R4 = R2 * R2;
  const double k = 4.0 * (mu + lam);

  // u_x = x F / mu
  const double a = (2.0 * mu + lam) / k, b = (mu - lam) * R2 / k;
  const double nx = 0.75 * R4 + x * x * R2;
  const double F = a + b / s + nx / s2 - x * x * R4 / s3;
  const double Fx = -2.0 * b * x / s2 + 2.0 * x * R2 / s2 - 4.0 * x * nx / s3 - 2.0 * x * R4 / s3 +
                    6.0 * x * x * x * R4 / s4;
  const double Fy = -2.0 * b * y / s2 - 4.0 * y * nx / s3 + 6.0 * x * x * y * R4 / s4;

  // u_y = y G / mu
  const double c = -lam / k, d = (mu + 3.0 * lam) * R2 / k;
  const double ny = 0.75 * R4 + y * y * R2;
  const double G = c + d / s - ny / s2 + y * y * R4 / s3;
  const double Gx = -2.0 * d * x / s2 + 4.0 * x * ny / s3 - 6.0 * y * y * x * R4 / s4;
  const double Gy = -2.0 * d * y / s2 - 2.0 * y * R2 / s2 + 4.0 * y * ny / s3 + 2.0 * y * R4 / s3 -
                    6.0 * y * y * y * R4 / s4;

  PlateState st;
  st.u = {x * F / mu, y * G / mu};
  st.grad.xx = (F + x * Fx) / mu;
  st.grad.xy = x * Fy / mu;
  st.grad.yx = y * Gx / mu;
  st.grad.yy = (G + y * Gy) / mu;
  const double div = st.grad.xx + st.grad.yy;
  const double exy = 0.5 * (st.grad.xy + st.grad.yx);
  st.stress.xx = lam * div + 2.0 * mu * st.grad.xx;
  st.stress.yy = lam * div + 2.0 * mu * st.grad.yy;
  st.stress.xy = st.stress.yx = 2.0 * mu * exy;
  return st;
}

PlateState exact_plate_solution(Vec2 x, double lam, double mu, double R) {
  if (x.norm() < R) throw InsideHoleError("exact_plate_solution: point inside the hole");
  return plate_solution_extended(x, lam, mu, R);
}

namespace {
// Q T Q^T with Q the rotation by `angle`
Tensor2 rotate_tensor(const Tensor2& t, double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  const double m[2][2] = {{t.xx, t.xy}, {t.yx, t.yy}};
  const double q[2][2] = {{c, -s}, {s, c}};
  double r[2][2] = {};
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 2; ++l) r[i][j] += q[i][k] * m[k][l] * q[j][l];
  return {r[0][0], r[0][1], r[1][0], r[1][1]};
}
}  // namespace

PlateState rotated_plate_solution(Vec2 x, double angle, double lam, double mu, double R) {
  const PlateState local = plate_solution_extended(rotate(x, -angle), lam, mu, R);
  PlateState out;
  out.u = rotate(local.u, angle);
  out.grad = rotate_tensor(local.grad, angle);
  out.stress = rotate_tensor(local.stress, angle);
  return out;
}

}  // namespace fcm::elasticity
