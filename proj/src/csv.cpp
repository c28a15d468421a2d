#include "srdr/csv.hpp"

#include <cmath>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

#include "srdr/errors.hpp"
#include "srdr/format.hpp"

namespace srdr {

namespace {

// Comma split that keeps empty tokens, so a stray ",," or a trailing comma
// surfaces as an unparsable cell instead of a silently skipped one.
std::vector<std::string_view> split_cells(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      cells.push_back(line.substr(start));
      return cells;
    }
    cells.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

MalformedCsv cell_error(const std::string& path, std::size_t line_no,
                        const std::string& what) {
  return MalformedCsv(path + ":" + std::to_string(line_no) + ": " + what);
}

double parse_cell(const std::string& path, std::size_t line_no,
                  std::string_view cell) {
  double v = 0.0;
  if (!parse_double_strict(cell, &v))
    throw cell_error(path, line_no, "unparsable cell '" + std::string(cell) + "'");
  if (!std::isfinite(v))
    throw cell_error(path, line_no, "non-finite cell");
  return v;
}

void write_row(std::ofstream& out, const Matrix& mat, std::size_t i) {
  for (std::size_t j = 0; j < mat.cols(); ++j) {
    if (j > 0) out << ',';
    out << format_g17(mat(i, j));
  }
}

}  // namespace

void write_samples_csv(const std::string& path, const JointSamples& samples) {
  validate_samples(samples);
  if (samples.n() == 0)
    throw DimensionMismatch("samples need at least one parameter column");
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  for (std::size_t j = 0; j < samples.n(); ++j) {
    if (j > 0) out << ',';
    out << 'x' << j;
  }
  for (std::size_t k = 0; k < samples.m(); ++k) out << ",y" << k;
  out << '\n';
  for (std::size_t i = 0; i < samples.count(); ++i) {
    write_row(out, samples.xs, i);
    if (samples.m() > 0) {
      out << ',';
      write_row(out, samples.ys, i);
    }
    out << '\n';
  }
  if (!out) throw IoError("failed writing samples: " + path);
}

JointSamples read_samples_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open samples CSV: " + path);

  std::string line;
  if (!std::getline(in, line)) throw cell_error(path, 1, "missing header");
  const auto header = split_cells(line);

  // The header is the x-run then the y-run, each consecutively numbered
  // from 0; anything else (gaps, reordering, stray names) is a defect.
  std::size_t n = 0;
  while (n < header.size() && header[n] == "x" + std::to_string(n)) ++n;
  std::size_t m = 0;
  while (n + m < header.size() &&
         header[n + m] == "y" + std::to_string(m))
    ++m;
  if (n == 0 || n + m != header.size())
    throw cell_error(path, 1, "header must be x0..x{n-1},y0..y{m-1}");

  std::vector<double> x_values, y_values;
  std::size_t count = 0;
  for (std::size_t line_no = 2; std::getline(in, line); ++line_no) {
    const auto cells = split_cells(line);
    if (cells.size() != n + m)
      throw cell_error(path, line_no, "expected " + std::to_string(n + m) +
                                          " cells, found " +
                                          std::to_string(cells.size()));
    for (std::size_t j = 0; j < n; ++j)
      x_values.push_back(parse_cell(path, line_no, cells[j]));
    for (std::size_t k = 0; k < m; ++k)
      y_values.push_back(parse_cell(path, line_no, cells[n + k]));
    ++count;
  }
  return JointSamples{Matrix(count, n, std::move(x_values)),
                      Matrix(count, m, std::move(y_values))};
}

void write_matrix_csv(const std::string& path, const Matrix& mat) {
  if (!is_finite(mat))
    throw DimensionMismatch("matrix CSV requires finite entries");
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  if (!mat.empty()) {
    for (std::size_t i = 0; i < mat.rows(); ++i) {
      write_row(out, mat, i);
      out << '\n';
    }
  }
  if (!out) throw IoError("failed writing matrix: " + path);
}

Matrix read_matrix_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open matrix CSV: " + path);

  std::vector<double> values;
  std::size_t rows = 0, cols = 0;
  std::string line;
  for (std::size_t line_no = 1; std::getline(in, line); ++line_no) {
    const auto cells = split_cells(line);
    if (rows == 0) {
      cols = cells.size();
    } else if (cells.size() != cols) {
      throw cell_error(path, line_no, "ragged row");
    }
    for (const auto cell : cells)
      values.push_back(parse_cell(path, line_no, cell));
    ++rows;
  }
  if (rows == 0) return Matrix();
  return Matrix(rows, cols, std::move(values));
}

}  // namespace srdr
