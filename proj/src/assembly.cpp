#include "fcm/assembly.hpp"

#include <algorithm>
#include <stdexcept>

namespace fcm::assembly {

using geometry::Execution;
using geometry::TrimmedCell;

namespace {

struct LocalSystem {
  std::vector<int> dofs;
  Eigen::MatrixXd K1, K2, K3;
  Eigen::VectorXd f;
};

std::vector<Vec2> volume_points(const TrimmedCell& c) {
  std::vector<Vec2> pts;
  pts.reserve(c.volume.size());
  for (const auto& q : c.volume) pts.push_back(q.x);
  return pts;
}

std::vector<Vec2> boundary_points(const TrimmedCell& c) {
  std::vector<Vec2> pts;
  pts.reserve(c.boundary.size());
  for (const auto& q : c.boundary) pts.push_back(q.x);
  return pts;
}

template <class F>
void for_each_cell(int n, Execution exec, F&& f) {
  if (exec == Execution::parallel) {
#pragma omp parallel for schedule(dynamic, 8)
    for (int i = 0; i < n; ++i) f(i);
  } else {
    for (int i = 0; i < n; ++i) f(i);
  }
}

bool touches_dirichlet(const TrimmedCell& c, const std::function<bool(int)>& is_d) {
  return std::any_of(c.boundary.begin(), c.boundary.end(),
                     [&](const geometry::BoundaryPoint& b) { return is_d(b.piece); });
}

// Scatter in cell order, local indices ascending.
void scatter(FcmSystem& sys, const std::vector<LocalSystem>& locals, int n, bool keep_parts) {
  using T = Eigen::Triplet<double>;
  std::vector<T> ta, t1, t2, t3;
  sys.b = Vector::Zero(n);
  for (const auto& L : locals) {
    const int m = static_cast<int>(L.dofs.size());
    for (int a = 0; a < m; ++a) {
      sys.b[L.dofs[a]] += L.f[a];
      for (int b = 0; b < m; ++b) {
        ta.emplace_back(L.dofs[a], L.dofs[b], L.K1(a, b) + L.K2(a, b) + L.K3(a, b));
        if (keep_parts) {
          t1.emplace_back(L.dofs[a], L.dofs[b], L.K1(a, b));
          t2.emplace_back(L.dofs[a], L.dofs[b], L.K2(a, b));
          t3.emplace_back(L.dofs[a], L.dofs[b], L.K3(a, b));
        }
      }
    }
  }
  Csr A(n, n);
  A.setFromTriplets(ta.begin(), ta.end());
  sys.A = sparse::SparseSymMatrix(std::move(A));
  if (keep_parts) {
    sys.F1 = Csr(n, n);
    sys.F2 = Csr(n, n);
    sys.F3 = Csr(n, n);
    sys.F1.setFromTriplets(t1.begin(), t1.end());
    sys.F2.setFromTriplets(t2.begin(), t2.end());
    sys.F3.setFromTriplets(t3.begin(), t3.end());
  }
}

}  // namespace

std::vector<CellStabilization> poisson_stabilization(std::span<const TrimmedCell> cells,
                                                     const basis::BasisSpace& space,
                                                     const PoissonProblem& problem,
                                                     const AssemblyOptions& options) {
  const auto is_d = [&problem](int piece) { return problem.is_dirichlet(piece); };
  std::vector<int> targets;
  for (int i = 0; i < static_cast<int>(cells.size()); ++i)
    if (touches_dirichlet(cells[i], is_d)) targets.push_back(i);
  std::vector<CellStabilization> out(targets.size());
  for_each_cell(static_cast<int>(targets.size()), options.execution, [&](int k) {
    const int i = targets[k];
    const auto pc = stabilization::poisson_constant(cells[i], space.order(), space.mesh().h, is_d);
    out[k] = {i, cells[i].index, cells[i].eta, pc.C, options.beta_multiplier * pc.C, 0.0, 0.0,
              pc.fallback};
  });
  return out;
}

FcmSystem assemble_poisson(std::span<const TrimmedCell> cells, const basis::BasisSpace& space,
                           const PoissonProblem& problem, const AssemblyOptions& options) {
  if (space.components() != 1) throw std::invalid_argument("assemble_poisson: scalar space required");
  if (static_cast<int>(cells.size()) != space.cell_count())
    throw std::invalid_argument("assemble_poisson: cell list does not match the space");
  FcmSystem sys;
  sys.mode = options.mode;
  sys.stabilization = poisson_stabilization(cells, space, problem, options);
  std::vector<double> beta(cells.size(), 0.0);
  for (const auto& s : sys.stabilization) sys.global_beta = std::max(sys.global_beta, s.beta);
  for (const auto& s : sys.stabilization)
    beta[s.position] = options.mode == StabMode::global ? sys.global_beta : s.beta;

  const int nc = static_cast<int>(cells.size());
  std::vector<LocalSystem> locals(nc);
  for_each_cell(nc, options.execution, [&](int i) {
    const TrimmedCell& cell = cells[i];
    LocalSystem& L = locals[i];
    const auto f = space.cell_functions(i);
    L.dofs.assign(f.begin(), f.end());
    const int m = static_cast<int>(f.size());
    L.f = Eigen::VectorXd::Zero(m);

    const auto vp = volume_points(cell);
    const auto ev = space.evaluate(i, vp);
    Eigen::VectorXd w(vp.size());
    for (std::size_t q = 0; q < vp.size(); ++q) w[q] = cell.volume[q].weight;
    L.K1 = ev.dx * w.asDiagonal() * ev.dx.transpose() + ev.dy * w.asDiagonal() * ev.dy.transpose();
    if (problem.source)
      for (std::size_t q = 0; q < vp.size(); ++q) L.f += (w[q] * problem.source(vp[q])) * ev.values.col(q);

    L.K2 = Eigen::MatrixXd::Zero(m, m);
    L.K3 = Eigen::MatrixXd::Zero(m, m);
    if (cell.boundary.empty()) return;
    const auto bp = boundary_points(cell);
    const auto eb = space.evaluate(i, bp);
    for (std::size_t q = 0; q < bp.size(); ++q) {
      const auto& b = cell.boundary[q];
      const Eigen::VectorXd N = eb.values.col(q);
      if (problem.is_dirichlet(b.piece)) {
        const Eigen::VectorXd dn = b.normal.x * eb.dx.col(q) + b.normal.y * eb.dy.col(q);
        L.K2.noalias() -= b.weight * (N * dn.transpose() + dn * N.transpose());
        L.K3.noalias() += (b.weight * beta[i]) * N * N.transpose();
        if (problem.dirichlet) {
          const double g = problem.dirichlet(b.x);
          L.f += (b.weight * g) * (beta[i] * N - dn);
        }
      } else if (problem.neumann) {
        L.f += (b.weight * problem.neumann(b.x, b.normal)) * N;
      }
    }
  });
  scatter(sys, locals, space.size(), options.keep_parts);
  return sys;
}

FcmSystem assemble_elasticity_2d(std::span<const TrimmedCell> cells, const basis::BasisSpace& space,
                                 const ElasticityProblem& problem, const AssemblyOptions& options) {
  if (space.components() != 2) throw std::invalid_argument("assemble_elasticity_2d: vector space required");
  if (static_cast<int>(cells.size()) != space.cell_count())
    throw std::invalid_argument("assemble_elasticity_2d: cell list does not match the space");
  if (!(problem.lambda > 0.0 && problem.mu > 0.0))
    throw std::invalid_argument("assemble_elasticity_2d: moduli must be positive");
  const double lam = problem.lambda, mu = problem.mu;
  const auto is_d = [&problem](int piece) { return problem.is_dirichlet(piece); };
  const int nc = static_cast<int>(cells.size());

  FcmSystem sys;
  sys.mode = options.mode;
  {
    std::vector<int> targets;
    for (int i = 0; i < nc; ++i)
      if (touches_dirichlet(cells[i], is_d)) targets.push_back(i);
    sys.stabilization.resize(targets.size());
    for_each_cell(static_cast<int>(targets.size()), options.execution, [&](int k) {
      const int i = targets[k];
      const auto ec = stabilization::elasticity_constants(cells[i], space.order(), space.mesh().h, is_d);
      sys.stabilization[k] = {i,
                              cells[i].index,
                              cells[i].eta,
                              ec.C_lambda,
                              options.beta_multiplier * lam * ec.C_lambda,
                              ec.C_mu,
                              2.0 * options.beta_multiplier * mu * ec.C_mu,
                              false};
    });
  }
  std::vector<double> beta_l(nc, 0.0), beta_m(nc, 0.0);
  for (const auto& s : sys.stabilization) {
    sys.global_beta = std::max(sys.global_beta, s.beta);
    sys.global_beta_mu = std::max(sys.global_beta_mu, s.beta_mu);
  }
  for (const auto& s : sys.stabilization) {
    const bool global = options.mode == StabMode::global;
    beta_l[s.position] = global ? sys.global_beta : s.beta;
    beta_m[s.position] = global ? sys.global_beta_mu : s.beta_mu;
  }

  Eigen::Matrix3d D;
  D << lam + 2 * mu, lam, 0, lam, lam + 2 * mu, 0, 0, 0, mu;

  std::vector<LocalSystem> locals(nc);
  for_each_cell(nc, options.execution, [&](int i) {
    const TrimmedCell& cell = cells[i];
    LocalSystem& L = locals[i];
    L.dofs = space.cell_dofs(i);
    const int m = static_cast<int>(L.dofs.size());
    const int nl = m / 2;
    L.K1 = Eigen::MatrixXd::Zero(m, m);
    L.K2 = Eigen::MatrixXd::Zero(m, m);
    L.K3 = Eigen::MatrixXd::Zero(m, m);
    L.f = Eigen::VectorXd::Zero(m);
    Eigen::MatrixXd Bm(3, m), N(2, m);
    auto fill = [&](const basis::CellValues& ev, int q) {
      Bm.setZero();
      N.setZero();
      for (int a = 0; a < nl; ++a) {
        Bm(0, 2 * a) = ev.dx(a, q);
        Bm(2, 2 * a) = ev.dy(a, q);
        Bm(1, 2 * a + 1) = ev.dy(a, q);
        Bm(2, 2 * a + 1) = ev.dx(a, q);
        N(0, 2 * a) = ev.values(a, q);
        N(1, 2 * a + 1) = ev.values(a, q);
      }
    };
    const auto vp = volume_points(cell);
    const auto ev = space.evaluate(i, vp);
    for (std::size_t q = 0; q < vp.size(); ++q) {
      fill(ev, static_cast<int>(q));
      const double w = cell.volume[q].weight;
      L.K1.noalias() += w * Bm.transpose() * D * Bm;
      if (problem.body_force) {
        const Vec2 f = problem.body_force(vp[q]);
        L.f += w * N.transpose() * Eigen::Vector2d(f.x, f.y);
      }
    }
    if (cell.boundary.empty()) return;
    const auto bp = boundary_points(cell);
    const auto eb = space.evaluate(i, bp);
    for (std::size_t q = 0; q < bp.size(); ++q) {
      const auto& b = cell.boundary[q];
      fill(eb, static_cast<int>(q));
      const double w = b.weight;
      const Eigen::Vector2d n(b.normal.x, b.normal.y);
      if (problem.is_dirichlet(b.piece)) {
        Eigen::Matrix<double, 2, 3> Nn;
        Nn << n.x(), 0, n.y(), 0, n.y(), n.x();
        const Eigen::MatrixXd T = Nn * D * Bm;  // traction sigma(u) n
        const Eigen::RowVectorXd Un = n.transpose() * N;
        L.K2.noalias() -= w * (N.transpose() * T + T.transpose() * N);
        L.K3.noalias() += w * (beta_l[i] * Un.transpose() * Un + beta_m[i] * N.transpose() * N);
        if (problem.dirichlet) {
          const Vec2 g = problem.dirichlet(b.x);
          const Eigen::Vector2d gv(g.x, g.y);
          L.f += w * (-T.transpose() * gv + beta_l[i] * Un.transpose() * n.dot(gv) +
                      beta_m[i] * N.transpose() * gv);
        }
      } else if (problem.traction) {
        const Vec2 t = problem.traction(b.x, b.normal);
        L.f += w * N.transpose() * Eigen::Vector2d(t.x, t.y);
      }
    }
  });
  scatter(sys, locals, space.size(), options.keep_parts);
  return sys;
}

double poisson_form(std::span<const TrimmedCell> cells, const basis::BasisSpace& space,
                    const PoissonProblem& problem, const FcmSystem& system, const Vector& y) {
  std::vector<double> beta(cells.size(), 0.0);
  for (const auto& s : system.stabilization)
    beta[s.position] = system.mode == StabMode::global ? system.global_beta : s.beta;
  double total = 0.0;
  for (int i = 0; i < static_cast<int>(cells.size()); ++i) {
    const auto f = space.cell_functions(i);
    Eigen::VectorXd yl(f.size());
    for (std::size_t a = 0; a < f.size(); ++a) yl[a] = y[f[a]];
    const auto ev = space.evaluate(i, volume_points(cells[i]));
    for (std::size_t q = 0; q < cells[i].volume.size(); ++q) {
      const double gx = ev.dx.col(q).dot(yl), gy = ev.dy.col(q).dot(yl);
      total += cells[i].volume[q].weight * (gx * gx + gy * gy);
    }
    if (cells[i].boundary.empty()) continue;
    const auto eb = space.evaluate(i, boundary_points(cells[i]));
    for (std::size_t q = 0; q < cells[i].boundary.size(); ++q) {
      const auto& b = cells[i].boundary[q];
      if (!problem.is_dirichlet(b.piece)) continue;
      const double v = eb.values.col(q).dot(yl);
      const double dn = b.normal.x * eb.dx.col(q).dot(yl) + b.normal.y * eb.dy.col(q).dot(yl);
      total += b.weight * (beta[i] * v * v - 2.0 * v * dn);
    }
  }
  return total;
}

double strain_energy_error(std::span<const TrimmedCell> cells, const basis::BasisSpace& space,
                           const ElasticityProblem& problem, const Vector& coeffs,
                           const std::function<void(Vec2, double grad[2][2])>& exact_gradient) {
  const double lam = problem.lambda, mu = problem.mu;
  const int nc = static_cast<int>(cells.size());
  std::vector<double> per_cell(nc, 0.0);
#pragma omp parallel for schedule(dynamic, 8)
  for (int i = 0; i < nc; ++i) {
    const auto f = space.cell_functions(i);
    const auto ev = space.evaluate(i, volume_points(cells[i]));
    double s = 0.0;
    for (std::size_t q = 0; q < cells[i].volume.size(); ++q) {
      double g[2][2];
      exact_gradient(cells[i].volume[q].x, g);
      double e[2][2] = {{-g[0][0], -g[0][1]}, {-g[1][0], -g[1][1]}};
      for (std::size_t a = 0; a < f.size(); ++a)
        for (int c = 0; c < 2; ++c) {
          const double u = coeffs[2 * f[a] + c];
          e[c][0] += u * ev.dx(a, q);
          e[c][1] += u * ev.dy(a, q);
        }
      const double exx = e[0][0], eyy = e[1][1], exy = 0.5 * (e[0][1] + e[1][0]);
      const double tr = exx + eyy;
      const double energy = lam * tr * tr + 2.0 * mu * (exx * exx + eyy * eyy + 2.0 * exy * exy);
      s += cells[i].volume[q].weight * 0.5 * energy;
    }
    per_cell[i] = s;
  }
  double total = 0.0;
  for (double v : per_cell) total += v;
  return total;
}

}  // namespace fcm::assembly
