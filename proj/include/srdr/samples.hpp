#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "srdr/errors.hpp"
#include "srdr/matrix.hpp"

namespace srdr {

// Data types exchanged between problem generators, the trainer, and the
// diagnostic estimators.

// Joint draws from pi_{X,Y}, one sample per row. Problems without an
// observation store ys as an N x 0 block so row counts always agree.
struct JointSamples {
  Matrix xs;
  Matrix ys;

  std::size_t count() const { return xs.rows(); }
  std::size_t n() const { return xs.cols(); }
  std::size_t m() const { return ys.cols(); }
};

inline void validate_samples(const JointSamples& s) {
  if (s.xs.rows() != s.ys.rows())
    throw DimensionMismatch("sample blocks must have equal row counts");
  if (!is_finite(s.xs) || !is_finite(s.ys))
    throw DimensionMismatch("samples must be finite");
}

inline JointSamples select_rows(const JointSamples& all,
                                const std::vector<std::size_t>& rows) {
  JointSamples out{Matrix(rows.size(), all.n()), Matrix(rows.size(), all.m())};
  for (std::size_t j = 0; j < rows.size(); ++j) {
    out.xs.set_row(j, all.xs.row(rows[j]));
    out.ys.set_row(j, all.ys.row(rows[j]));
  }
  return out;
}

enum class DiagnosticKind { cdr_parameter, cmi_observation };

// Symmetric PSD summary matrix. sample_count records the Monte Carlo size
// behind the estimate; 0 marks a closed-form (exact) matrix.
struct DiagnosticMatrix {
  DiagnosticKind kind = DiagnosticKind::cdr_parameter;
  Matrix matrix;
  std::size_t sample_count = 0;
};

}  // namespace srdr
