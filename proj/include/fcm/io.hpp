#pragma once

#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>

#include "fcm/assembly.hpp"
#include "fcm/linalg.hpp"
#include "fcm/sparse.hpp"

namespace fcm::io {

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// `coordinate real symmetric`, lower triangle, 1-based.
void write_matrix_market_symmetric(std::ostream& out, const sparse::Csr& A);
/// `coordinate real general` (used for the rectangular S).
void write_matrix_market_general(std::ostream& out, const sparse::Csr& A);
/// `array real general` column vector.
void write_matrix_market_vector(std::ostream& out, const sparse::Vector& b);

/// Reads coordinate real general/symmetric; symmetric input is expanded to full storage.
sparse::Csr read_matrix_market(std::istream& in);
sparse::Vector read_matrix_market_vector(std::istream& in);

/// `iter,residual,energy_error` (energy column empty without a reference).
void write_cg_history(std::ostream& out, const linalg::CgReport& report);

/// `index,eta,C,beta` per stabilized cell.
void write_stabilization_csv(std::ostream& out,
                             std::span<const assembly::CellStabilization> stabilization);

}  // namespace fcm::io
