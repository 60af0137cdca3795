#include "fcm/io.hpp"

#include <algorithm>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

namespace fcm::io {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_coordinate(std::ostream& out, const sparse::Csr& A, bool lower_only, const char* kind) {
  std::size_t count = 0;
  for (int i = 0; i < A.outerSize(); ++i)
    for (sparse::Csr::InnerIterator it(A, i); it; ++it)
      if (!lower_only || it.col() <= i) ++count;
  out << "%%MatrixMarket matrix coordinate real " << kind << '\n';
  out << A.rows() << ' ' << A.cols() << ' ' << count << '\n';
  for (int i = 0; i < A.outerSize(); ++i)
    for (sparse::Csr::InnerIterator it(A, i); it; ++it)
      if (!lower_only || it.col() <= i) out << i + 1 << ' ' << it.col() + 1 << ' ' << fmt(it.value()) << '\n';
}

std::string header_line(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("matrix market: empty input");
  std::string lower = line;
  std::transform(lower.begin(), lower.end(), lower.begin(), ::tolower);
  if (lower.rfind("%%matrixmarket", 0) != 0) throw ParseError("matrix market: missing banner");
  return lower;
}

std::string next_data_line(std::istream& in) {
  std::string line;
  while (std::getline(in, line))
    if (!line.empty() && line[0] != '%') return line;
  throw ParseError("matrix market: unexpected end of input");
}

}  // namespace

void write_matrix_market_symmetric(std::ostream& out, const sparse::Csr& A) {
  write_coordinate(out, A, true, "symmetric");
}

void write_matrix_market_general(std::ostream& out, const sparse::Csr& A) {
  write_coordinate(out, A, false, "general");
}

void write_matrix_market_vector(std::ostream& out, const sparse::Vector& b) {
  out << "%%MatrixMarket matrix array real general\n" << b.size() << " 1\n";
  for (int i = 0; i < b.size(); ++i) out << fmt(b[i]) << '\n';
}

sparse::Csr read_matrix_market(std::istream& in) {
  const std::string banner = header_line(in);
  if (banner.find("coordinate") == std::string::npos || banner.find("real") == std::string::npos)
    throw ParseError("matrix market: only coordinate real matrices are supported");
  const bool symmetric = banner.find("symmetric") != std::string::npos;
  std::istringstream size(next_data_line(in));
  long rows = 0, cols = 0, nnz = 0;
  if (!(size >> rows >> cols >> nnz) || rows < 0 || cols < 0 || nnz < 0)
    throw ParseError("matrix market: bad size line");
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(symmetric ? 2 * nnz : nnz);
  for (long k = 0; k < nnz; ++k) {
    std::istringstream ls(next_data_line(in));
    long i = 0, j = 0;
    double v = 0.0;
    if (!(ls >> i >> j >> v) || i < 1 || j < 1 || i > rows || j > cols)
      throw ParseError("matrix market: bad entry line " + std::to_string(k + 1));
    t.emplace_back(i - 1, j - 1, v);
    if (symmetric && i != j) t.emplace_back(j - 1, i - 1, v);
  }
  sparse::Csr A(rows, cols);
  A.setFromTriplets(t.begin(), t.end());
  A.makeCompressed();
  return A;
}

sparse::Vector read_matrix_market_vector(std::istream& in) {
  const std::string banner = header_line(in);
  if (banner.find("array") == std::string::npos) throw ParseError("matrix market: expected array");
  std::istringstream size(next_data_line(in));
  long rows = 0, cols = 0;
  if (!(size >> rows >> cols) || cols != 1) throw ParseError("matrix market: expected a column vector");
  sparse::Vector b(rows);
  for (long i = 0; i < rows; ++i) {
    std::istringstream ls(next_data_line(in));
    if (!(ls >> b[i])) throw ParseError("matrix market: bad vector entry");
  }
  return b;
}

void write_cg_history(std::ostream& out, const linalg::CgReport& report) {
  out << "iter,residual,energy_error\n";
  for (std::size_t i = 0; i < report.residuals.size(); ++i) {
    out << i << ',' << fmt(report.residuals[i]) << ',';
    if (i < report.energy_errors.size()) out << fmt(report.energy_errors[i]);
    out << '\n';
  }
}

void write_stabilization_csv(std::ostream& out,
                             std::span<const assembly::CellStabilization> stabilization) {
  out << "index,eta,C,beta\n";
  for (const auto& s : stabilization)
    out << s.cell << ',' << fmt(s.eta) << ',' << fmt(s.C) << ',' << fmt(s.beta) << '\n';
}

}  // namespace fcm::io
