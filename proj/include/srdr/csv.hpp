#pragma once

#include <string>

#include "srdr/matrix.hpp"
#include "srdr/samples.hpp"

namespace srdr {

// Joint-sample table: header `x0,..,x{n-1},y0,..,y{m-1}`, one draw per row,
// decimal text with 17 significant digits, `\n` newlines, no index column.
// The digit count makes the encoding lossless for 64-bit floats, so reading
// a file written here and rewriting it reproduces the bytes exactly.
// Requires at least one parameter column (throws DimensionMismatch);
// throws IoError when the file cannot be written.
void write_samples_csv(const std::string& path, const JointSamples& samples);

// Infers n and m from the header. Throws IoError when the file cannot be
// opened, MalformedCsv on structural defects: wrong or out-of-order column
// names, ragged rows, unparsable or non-finite cells.
JointSamples read_samples_csv(const std::string& path);

// Headerless numeric grid with the same digit and newline contract, used
// for bases, diagnostics, and oracle matrices. A matrix with no entries is
// written as an empty file and read back as 0 x 0.
void write_matrix_csv(const std::string& path, const Matrix& mat);
Matrix read_matrix_csv(const std::string& path);

}  // namespace srdr
