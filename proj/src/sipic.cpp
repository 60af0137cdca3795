#include "fcm/sipic.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <numeric>
#include <ostream>
#include <set>
#include <string>

#include <json.hpp>

namespace fcm::sipic {

Vector scale(const Csr& A) {
  Vector d(A.rows());
  for (int i = 0; i < A.rows(); ++i) {
    const double a = A.coeff(i, i);
    if (!(a > 0.0))
      throw BuildError("scale: non-positive diagonal entry at row " + std::to_string(i));
    d[i] = 1.0 / std::sqrt(a);
  }
  return d;
}

std::vector<std::pair<int, int>> identify(const Csr& M, double gamma) {
  std::vector<std::pair<int, int>> pairs;
  for (int i = 0; i < M.outerSize(); ++i)
    for (Csr::InnerIterator it(M, i); it; ++it)
      if (it.col() < i && std::abs(it.value()) > gamma) pairs.emplace_back(i, static_cast<int>(it.col()));
  return pairs;
}

std::vector<std::vector<int>> group(const std::vector<std::pair<int, int>>& pairs, const Csr& A) {
  std::map<int, int> parent;
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (auto [a, b] : pairs) {
    parent.try_emplace(a, a);
    parent.try_emplace(b, b);
    const int ra = find(a), rb = find(b);
    if (ra != rb) parent[std::max(ra, rb)] = std::min(ra, rb);
  }
  std::map<int, std::vector<int>> comps;  // keyed by smallest member
  for (auto& [x, _] : parent) comps[find(x)].push_back(x);

  auto row_nnz = [&A](int i) { return A.outerIndexPtr()[i + 1] - A.outerIndexPtr()[i]; };
  std::vector<std::vector<int>> out;
  for (auto& [_, members] : comps) {
    std::stable_sort(members.begin(), members.end(), [&](int a, int b) {
      const int na = row_nnz(a), nb = row_nnz(b);
      return na != nb ? na < nb : a < b;
    });
    out.push_back(std::move(members));
  }
  return out;
}

GroupFactor orthonormalize(const Eigen::MatrixXd& A_sigma, double epsilon) {
  using LMat = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
  const int k = static_cast<int>(A_sigma.rows());
  const LMat A = A_sigma.cast<long double>();
  LMat S = LMat::Zero(k, k);
  GroupFactor out;
  out.eliminated.assign(k, false);
  for (int i = 0; i < k; ++i) {
    if (!(A(i, i) > 0.0L)) throw BuildError("orthonormalize: non-positive diagonal entry");
    S(i, i) = 1.0L / std::sqrt(A(i, i));
  }
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < i; ++j) {
      if (out.eliminated[j]) continue;
      const long double c = (S.row(i) * A * S.row(j).transpose())(0, 0);
      S.row(i) -= c * S.row(j);
    }
    const long double pivot = (S.row(i) * A * S.row(i).transpose())(0, 0);
    if (pivot <= static_cast<long double>(epsilon)) {
      out.eliminated[i] = true;
      S.row(i).setZero();
    } else {
      S.row(i) /= std::sqrt(pivot);
    }
  }
  out.S = S.cast<double>();
  return out;
}

double fill_in(const Csr& A, const Csr& SASt) {
  // structural count: every entry produced by the sparse products, zero values included
  const double n0 = static_cast<double>(A.nonZeros());
  return (static_cast<double>(SASt.nonZeros()) - n0) / n0;
}

namespace {

double block_offdiag_max(const Eigen::MatrixXd& M) {
  double m = 0.0;
  for (int i = 0; i < M.rows(); ++i)
    for (int j = 0; j < M.cols(); ++j)
      if (i != j) m = std::max(m, std::abs(M(i, j)));
  return m;
}

}  // namespace

Preconditioner build_sipic(const Csr& A, const Options& options) {
  if (A.rows() != A.cols()) throw BuildError("build_sipic: matrix not square");
  const int n = static_cast<int>(A.rows());
  const Vector d = scale(A);

  Preconditioner P;
  P.gamma = options.gamma;
  P.epsilon = options.epsilon;

  Csr S(n, n);
  {
    std::vector<Eigen::Triplet<double>> t;
    for (int i = 0; i < n; ++i) t.emplace_back(i, i, d[i]);
    S.setFromTriplets(t.begin(), t.end());
  }
  Csr M = sparse::congruence(S, A);
  std::set<std::pair<int, int>> I;
  std::vector<std::pair<int, int>> J = identify(M, options.gamma);
  I.insert(J.begin(), J.end());
  std::vector<bool> elim(n, false);

  while (!J.empty()) {
    if (++P.passes > options.max_passes)
      throw BuildError("build_sipic: no convergence within " + std::to_string(options.max_passes) +
                       " passes");
    const std::vector<std::pair<int, int>> all(I.begin(), I.end());
    P.groups = group(all, A);

    std::vector<bool> in_group(n, false);
    std::fill(elim.begin(), elim.end(), false);
    std::vector<Eigen::Triplet<double>> t;
    for (const auto& sigma : P.groups) {
      const int k = static_cast<int>(sigma.size());
      Eigen::MatrixXd Asig(k, k), Msig(k, k);
      for (int a = 0; a < k; ++a)
        for (int b = 0; b < k; ++b) {
          Asig(a, b) = A.coeff(sigma[a], sigma[b]);
          Msig(a, b) = M.coeff(sigma[a], sigma[b]);
        }
      const GroupFactor f = orthonormalize(Asig, options.epsilon);
      std::vector<int> gone;
      for (int a = 0; a < k; ++a) {
        in_group[sigma[a]] = true;
        if (f.eliminated[a]) {
          elim[sigma[a]] = true;
          gone.push_back(sigma[a]);
        }
        for (int b = 0; b <= a; ++b)
          if (f.S(a, b) != 0.0) t.emplace_back(sigma[a], sigma[b], f.S(a, b));
      }
      if (options.log) {
        const Eigen::MatrixXd post = f.S * Asig * f.S.transpose();
        nlohmann::json line{{"pass", P.passes},
                            {"group", sigma},
                            {"pre_offdiag_max", block_offdiag_max(Msig)},
                            {"post_offdiag_max", block_offdiag_max(post)},
                            {"eliminated", gone}};
        *options.log << line.dump() << '\n';
      }
    }
    for (int i = 0; i < n; ++i)
      if (!in_group[i]) t.emplace_back(i, i, d[i]);
    S = Csr(n, n);
    S.setFromTriplets(t.begin(), t.end());

    M = sparse::congruence(S, A);
    J.clear();
    for (const auto& pr : identify(M, options.gamma))
      if (I.insert(pr).second) J.push_back(pr);
  }

  for (int i = 0; i < n; ++i) (elim[i] ? P.eliminated : P.retained).push_back(i);
  if (P.eliminated.empty()) {
    P.S = std::move(S);
    P.SASt = std::move(M);
  } else {
    std::vector<Eigen::Triplet<double>> t;
    for (int r = 0; r < static_cast<int>(P.retained.size()); ++r)
      for (Csr::InnerIterator it(S, P.retained[r]); it; ++it) t.emplace_back(r, it.col(), it.value());
    P.S = Csr(static_cast<int>(P.retained.size()), n);
    P.S.setFromTriplets(t.begin(), t.end());
    P.SASt = sparse::congruence(P.S, A);
  }
  P.S.makeCompressed();
  P.fill_in = fill_in(A, P.SASt);
  return P;
}

PreconditionedSystem apply_preconditioned(const Csr& A, const Vector& b, const Preconditioner& P,
                                          sparse::Execution exec) {
  if (A.rows() != P.cols() || b.size() != A.rows())
    throw std::invalid_argument("apply_preconditioned: dimension mismatch");
  auto St = std::make_shared<Csr>(P.S.transpose());
  auto tmp = std::make_shared<std::pair<Vector, Vector>>(Vector(A.rows()), Vector(A.rows()));
  PreconditionedSystem sys;
  sys.op.n = P.rows();
  sys.op.apply = [&A, &P, St, tmp, exec](const Vector& x, Vector& y) {
    y.resize(P.rows());
    sparse::spmv(*St, x.data(), tmp->first.data(), exec);
    sparse::spmv(A, tmp->first.data(), tmp->second.data(), exec);
    sparse::spmv(P.S, tmp->second.data(), y.data(), exec);
  };
  sys.rhs.resize(P.rows());
  sparse::spmv(P.S, b.data(), sys.rhs.data(), exec);
  return sys;
}

Vector recover(const Preconditioner& P, const Vector& xbar) {
  if (xbar.size() != P.rows()) throw std::invalid_argument("recover: dimension mismatch");
  return P.S.transpose() * xbar;
}

}  // namespace fcm::sipic
