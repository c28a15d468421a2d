#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>

#include "srdr/csv.hpp"
#include "srdr/config.hpp"
#include "srdr/errors.hpp"
#include "srdr/format.hpp"
#include "srdr/rng.hpp"
#include "srdr/samples.hpp"

using namespace srdr;

namespace {

std::string temp_path(const char* name) {
  return std::string("/tmp/srdr_formats_test_") + name;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

bool same_bits(double a, double b) {
  return std::bit_cast<std::uint64_t>(a) == std::bit_cast<std::uint64_t>(b);
}

JointSamples gaussian_samples(std::size_t count, std::size_t n, std::size_t m,
                              std::uint64_t seed) {
  SeededRng rng(seed);
  return JointSamples{rng.gaussian_matrix(count, n),
                      rng.gaussian_matrix(count, m)};
}

RunConfig parse_text(const std::string& text) {
  std::istringstream in(text);
  return parse_run_config(in, "test");
}

}  // namespace

TEST_CASE("format_g17 round trip recovers every bit pattern") {
  const double fixed[] = {0.0,
                          -0.0,
                          1.0,
                          -1.0,
                          0.1,
                          1.0 / 3.0,
                          1e-300,
                          -1e300,
                          5e-324,
                          std::numeric_limits<double>::max(),
                          std::numeric_limits<double>::min(),
                          12345678901234567.0};
  for (const double v : fixed) {
    double back = 0.0;
    REQUIRE(parse_double_strict(format_g17(v), &back));
    CHECK(same_bits(v, back));
  }
  SeededRng rng(701);
  for (int trial = 0; trial < 2000; ++trial) {
    const int exponent = static_cast<int>(rng.uniform() * 600.0) - 300;
    const double v = rng.gaussian() * std::pow(10.0, exponent);
    double back = 0.0;
    REQUIRE(parse_double_strict(format_g17(v), &back));
    CHECK(same_bits(v, back));
  }
}

TEST_CASE("parse_double_strict rejects partial and empty tokens") {
  double v = 0.0;
  CHECK_FALSE(parse_double_strict("", &v));
  CHECK_FALSE(parse_double_strict("1.5x", &v));
  CHECK_FALSE(parse_double_strict(" 1.5", &v));
  CHECK_FALSE(parse_double_strict("1e1000", &v));
  CHECK(parse_double_strict("-2.5e-3", &v));
  CHECK(v == -2.5e-3);
}

TEST_CASE("samples CSV writes the contracted header and recovers bits") {
  const JointSamples samples = gaussian_samples(17, 3, 2, 702);
  const std::string path = temp_path("samples_roundtrip.csv");
  write_samples_csv(path, samples);

  std::ifstream in(path);
  std::string header;
  REQUIRE(std::getline(in, header));
  CHECK(header == "x0,x1,x2,y0,y1");

  const JointSamples back = read_samples_csv(path);
  REQUIRE(back.count() == samples.count());
  REQUIRE(back.n() == samples.n());
  REQUIRE(back.m() == samples.m());
  for (std::size_t i = 0; i < samples.count(); ++i) {
    for (std::size_t j = 0; j < samples.n(); ++j)
      CHECK(same_bits(back.xs(i, j), samples.xs(i, j)));
    for (std::size_t k = 0; k < samples.m(); ++k)
      CHECK(same_bits(back.ys(i, k), samples.ys(i, k)));
  }
}

TEST_CASE("samples CSV read-then-rewrite reproduces the bytes") {
  JointSamples samples = gaussian_samples(9, 2, 1, 703);
  samples.xs(0, 0) = 0.1;
  samples.xs(1, 0) = -0.0;
  samples.xs(2, 0) = 1e-300;
  samples.ys(3, 0) = 12345678901234567.0;
  const std::string first = temp_path("bytes_first.csv");
  const std::string second = temp_path("bytes_second.csv");
  write_samples_csv(first, samples);
  write_samples_csv(second, read_samples_csv(first));
  const std::string bytes = read_text(first);
  CHECK(bytes == read_text(second));
  CHECK(!bytes.empty());
  CHECK(bytes.back() == '\n');
  CHECK(bytes.find('\r') == std::string::npos);
}

TEST_CASE("samples CSV handles the empty observation block") {
  const JointSamples samples = gaussian_samples(5, 2, 0, 704);
  const std::string path = temp_path("no_obs.csv");
  write_samples_csv(path, samples);

  std::ifstream in(path);
  std::string header;
  REQUIRE(std::getline(in, header));
  CHECK(header == "x0,x1");

  const JointSamples back = read_samples_csv(path);
  CHECK(back.count() == 5);
  CHECK(back.n() == 2);
  CHECK(back.m() == 0);
}

TEST_CASE("samples CSV write rejects bad inputs") {
  const JointSamples no_x{Matrix(3, 0), Matrix(3, 2)};
  CHECK_THROWS_AS(write_samples_csv(temp_path("no_x.csv"), no_x),
                  DimensionMismatch);

  JointSamples bad = gaussian_samples(2, 2, 0, 705);
  bad.xs(0, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(write_samples_csv(temp_path("nan.csv"), bad),
                  DimensionMismatch);

  const JointSamples ok = gaussian_samples(2, 2, 0, 706);
  CHECK_THROWS_AS(write_samples_csv("/srdr_missing_dir/f.csv", ok), IoError);
}

TEST_CASE("samples CSV read rejects structural defects") {
  CHECK_THROWS_AS(read_samples_csv(temp_path("missing.csv")), IoError);

  const std::string path = temp_path("bad.csv");
  write_text(path, "a,b\n1,2\n");
  CHECK_THROWS_AS(read_samples_csv(path), MalformedCsv);
  write_text(path, "y0,x0\n1,2\n");
  CHECK_THROWS_AS(read_samples_csv(path), MalformedCsv);
  write_text(path, "x0,y0,x1\n1,2,3\n");
  CHECK_THROWS_AS(read_samples_csv(path), MalformedCsv);
  write_text(path, "x0,x2\n1,2\n");
  CHECK_THROWS_AS(read_samples_csv(path), MalformedCsv);
  write_text(path, "");
  CHECK_THROWS_AS(read_samples_csv(path), MalformedCsv);
  write_text(path, "x0,x1\n1\n");
  CHECK_THROWS_AS(read_samples_csv(path), MalformedCsv);
  write_text(path, "x0,x1\n1,2,3\n");
  CHECK_THROWS_AS(read_samples_csv(path), MalformedCsv);
  write_text(path, "x0,x1\n1,abc\n");
  CHECK_THROWS_AS(read_samples_csv(path), MalformedCsv);
  write_text(path, "x0,x1\n1,\n");
  CHECK_THROWS_AS(read_samples_csv(path), MalformedCsv);
  write_text(path, "x0,x1\ninf,2\n");
  CHECK_THROWS_AS(read_samples_csv(path), MalformedCsv);
  write_text(path, "x0,x1\nnan,2\n");
  CHECK_THROWS_AS(read_samples_csv(path), MalformedCsv);
}

TEST_CASE("samples CSV tolerates header-only and unterminated files") {
  const std::string path = temp_path("edge.csv");
  write_text(path, "x0,y0\n");
  const JointSamples empty = read_samples_csv(path);
  CHECK(empty.count() == 0);
  CHECK(empty.n() == 1);
  CHECK(empty.m() == 1);

  write_text(path, "x0,y0\n1.5,2.5");
  const JointSamples one = read_samples_csv(path);
  REQUIRE(one.count() == 1);
  CHECK(one.xs(0, 0) == 1.5);
  CHECK(one.ys(0, 0) == 2.5);
}

TEST_CASE("matrix CSV round trips bits and bytes") {
  SeededRng rng(707);
  const Matrix mat = rng.gaussian_matrix(4, 3);
  const std::string first = temp_path("mat_first.csv");
  const std::string second = temp_path("mat_second.csv");
  write_matrix_csv(first, mat);
  const Matrix back = read_matrix_csv(first);
  REQUIRE(back.rows() == 4);
  REQUIRE(back.cols() == 3);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 3; ++j)
      CHECK(same_bits(back(i, j), mat(i, j)));
  write_matrix_csv(second, back);
  CHECK(read_text(first) == read_text(second));
}

TEST_CASE("matrix CSV represents an entryless matrix as an empty file") {
  const std::string path = temp_path("mat_empty.csv");
  write_matrix_csv(path, Matrix());
  CHECK(read_text(path).empty());
  const Matrix back = read_matrix_csv(path);
  CHECK(back.rows() == 0);
  CHECK(back.cols() == 0);

  write_matrix_csv(path, Matrix(3, 0));
  CHECK(read_text(path).empty());
}

TEST_CASE("matrix CSV read rejects defects") {
  CHECK_THROWS_AS(read_matrix_csv(temp_path("mat_missing.csv")), IoError);
  const std::string path = temp_path("mat_bad.csv");
  write_text(path, "1,2\n3\n");
  CHECK_THROWS_AS(read_matrix_csv(path), MalformedCsv);
  write_text(path, "1,x\n");
  CHECK_THROWS_AS(read_matrix_csv(path), MalformedCsv);
  write_text(path, "1,inf\n");
  CHECK_THROWS_AS(read_matrix_csv(path), MalformedCsv);

  Matrix bad(1, 1);
  bad(0, 0) = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(write_matrix_csv(path, bad), DimensionMismatch);
}

TEST_CASE("config parser covers every key") {
  const RunConfig cfg = parse_text(
      "# full surface\n"
      "output = /tmp/srdr_out\n"
      "seed = 42\n"
      "\n"
      "problem.kind = darcy\n"
      "problem.count = 500\n"
      "problem.seed = 9\n"
      "problem.dimension = 6\n"
      "problem.n = 3\n"
      "problem.m = 4\n"
      "problem.noise = 0.25\n"
      "problem.grid = 9\n"
      "problem.modes = 4\n"
      "problem.delta = 0.7\n"
      "problem.gamma = 0.2\n"
      "problem.noise_variance = 1e-4\n"
      "problem.samples = some.csv\n"
      "net.r_prime = 3\n"
      "net.s_prime = 2\n"
      "net.hidden_layers = 1\n"
      "net.hidden_width = 16\n"
      "train.learning_rate = 0.01\n"
      "train.batch_size = 128\n"
      "train.epochs = 7\n"
      "train.lambda1 = 0.5\n"
      "train.lambda2 = 0.25\n"
      "train.trace = sliced\n"
      "train.slices = 11\n"
      "train.validation_fraction = 0.2\n"
      "train.beta1 = 0.8\n"
      "train.beta2 = 0.99\n"
      "train.epsilon = 1e-9\n"
      "train.clip_norm = 10\n"
      "algo.mode = deflate\n"
      "algo.rounds = 3\n"
      "algo.keep = 2\n"
      "algo.eps_x = 0.05\n"
      "algo.eps_y = 0.02\n"
      "algo.holdout_diagnostics = true\n"
      "oracle.hx = hx.csv\n"
      "oracle.hy = hy.csv\n"
      "oracle.count = 2000\n"
      "oracle.seed = 77\n");
  CHECK(cfg.output == "/tmp/srdr_out");
  CHECK(cfg.seed == 42);
  CHECK(cfg.problem.kind == ProblemKind::darcy);
  CHECK(cfg.problem.count == 500);
  CHECK(cfg.problem.structure_seed == 9);
  CHECK(cfg.problem.dimension == 6);
  CHECK(cfg.problem.n == 3);
  CHECK(cfg.problem.m == 4);
  CHECK(cfg.problem.noise == 0.25);
  CHECK(cfg.problem.grid == 9);
  CHECK(cfg.problem.modes == 4);
  CHECK(cfg.problem.delta == 0.7);
  CHECK(cfg.problem.gamma == 0.2);
  CHECK(cfg.problem.noise_variance == 1e-4);
  CHECK(cfg.problem.samples == "some.csv");
  CHECK(cfg.r_prime == 3);
  CHECK(cfg.s_prime == 2);
  CHECK(cfg.hidden_layers == 1);
  CHECK(cfg.hidden_width == 16);
  CHECK(cfg.train.learning_rate == 0.01);
  CHECK(cfg.train.batch_size == 128);
  CHECK(cfg.train.epochs == 7);
  CHECK(cfg.train.lambda1 == 0.5);
  CHECK(cfg.train.lambda2 == 0.25);
  CHECK(cfg.train.trace_mode.kind == TraceMode::Kind::sliced);
  CHECK(cfg.train.trace_mode.slices == 11);
  CHECK(cfg.train.validation_fraction == 0.2);
  CHECK(cfg.train.beta1 == 0.8);
  CHECK(cfg.train.beta2 == 0.99);
  CHECK(cfg.train.epsilon == 1e-9);
  CHECK(cfg.train.clip_norm == 10.0);
  CHECK(cfg.mode == AlgoMode::deflate);
  CHECK(cfg.rounds == 3);
  CHECK(cfg.keep == 2);
  CHECK(cfg.eps_x == 0.05);
  CHECK(cfg.eps_y == 0.02);
  CHECK(cfg.holdout_diagnostics == true);
  CHECK(cfg.oracle.hx == "hx.csv");
  CHECK(cfg.oracle.hy == "hy.csv");
  CHECK(cfg.oracle.count == 2000);
  CHECK(cfg.oracle.seed == 77);
}

TEST_CASE("config parser applies defaults and slice-key order freedom") {
  const RunConfig cfg = parse_text("");
  CHECK(cfg.problem.kind == ProblemKind::banana);
  CHECK(cfg.problem.count == 1000);
  CHECK(cfg.r_prime == 0);
  CHECK(cfg.train.trace_mode.kind == TraceMode::Kind::exact);
  CHECK(cfg.mode == AlgoMode::single);
  CHECK(cfg.eps_x == 1e-2);
  CHECK(cfg.output == "out");
  CHECK(cfg.seed == 0);

  const RunConfig slices_first =
      parse_text("train.slices = 7\ntrain.trace = sliced\n");
  CHECK(slices_first.train.trace_mode.kind == TraceMode::Kind::sliced);
  CHECK(slices_first.train.trace_mode.slices == 7);

  const RunConfig trace_first =
      parse_text("train.trace = sliced\ntrain.slices = 7\n");
  CHECK(trace_first.train.trace_mode.kind == TraceMode::Kind::sliced);
  CHECK(trace_first.train.trace_mode.slices == 7);
}

TEST_CASE("config parser rejects defects with the offending line") {
  CHECK_THROWS_WITH_AS(parse_text("problem.knid = banana\n"),
                       doctest::Contains("unknown key 'problem.knid'"),
                       InvalidConfig);
  CHECK_THROWS_WITH_AS(parse_text("seed = 1\nseed = 2\n"),
                       doctest::Contains("duplicate key"), InvalidConfig);
  CHECK_THROWS_WITH_AS(parse_text("seed\n"),
                       doctest::Contains("expected 'key = value'"),
                       InvalidConfig);
  CHECK_THROWS_WITH_AS(parse_text("seed = \n"),
                       doctest::Contains("empty value"), InvalidConfig);
  CHECK_THROWS_WITH_AS(parse_text(" = 3\n"), doctest::Contains("empty key"),
                       InvalidConfig);
  CHECK_THROWS_WITH_AS(parse_text("problem.count = -3\n"),
                       doctest::Contains("expected a count"), InvalidConfig);
  CHECK_THROWS_WITH_AS(parse_text("algo.eps_x = much\n"),
                       doctest::Contains("expected a number"), InvalidConfig);
  CHECK_THROWS_WITH_AS(parse_text("problem.kind = spiral\n"),
                       doctest::Contains("banana"), InvalidConfig);
  CHECK_THROWS_WITH_AS(parse_text("algo.mode = both\n"),
                       doctest::Contains("single or deflate"), InvalidConfig);
  CHECK_THROWS_WITH_AS(parse_text("train.trace = approximate\n"),
                       doctest::Contains("exact or sliced"), InvalidConfig);
  CHECK_THROWS_WITH_AS(parse_text("algo.holdout_diagnostics = yes\n"),
                       doctest::Contains("true or false"), InvalidConfig);
  CHECK(parse_text("seed=5\n").seed == 5);
  CHECK(parse_text("  seed  =  5  \n").seed == 5);
}

TEST_CASE("validate_run_config enforces the structural floors") {
  CHECK_NOTHROW(validate_run_config(RunConfig{}));

  RunConfig cfg;
  cfg.eps_x = 0.0;
  CHECK_THROWS_AS(validate_run_config(cfg), InvalidConfig);

  cfg = RunConfig{};
  cfg.eps_y = -1.0;
  CHECK_THROWS_AS(validate_run_config(cfg), InvalidConfig);

  cfg = RunConfig{};
  cfg.problem.count = 0;
  CHECK_THROWS_AS(validate_run_config(cfg), InvalidConfig);

  cfg = RunConfig{};
  cfg.problem.dimension = 1;
  CHECK_THROWS_AS(validate_run_config(cfg), InvalidConfig);

  cfg = RunConfig{};
  cfg.problem.kind = ProblemKind::lingauss;
  cfg.problem.noise = 0.0;
  CHECK_THROWS_AS(validate_run_config(cfg), InvalidConfig);

  cfg = RunConfig{};
  cfg.problem.kind = ProblemKind::darcy;
  cfg.problem.grid = 2;
  CHECK_THROWS_AS(validate_run_config(cfg), InvalidConfig);

  cfg = RunConfig{};
  cfg.problem.kind = ProblemKind::external;
  CHECK_THROWS_AS(validate_run_config(cfg), InvalidConfig);
  cfg.problem.samples = temp_path("not_there.csv");
  CHECK_THROWS_AS(validate_run_config(cfg), InvalidConfig);
  const std::string existing = temp_path("external.csv");
  write_text(existing, "x0\n1\n");
  cfg.problem.samples = existing;
  CHECK_NOTHROW(validate_run_config(cfg));

  cfg = RunConfig{};
  cfg.train.epochs = 0;
  CHECK_THROWS_AS(validate_run_config(cfg), InvalidConfig);

  cfg = RunConfig{};
  cfg.train.learning_rate = -1.0;
  CHECK_THROWS_AS(validate_run_config(cfg), InvalidConfig);

  cfg = RunConfig{};
  cfg.mode = AlgoMode::deflate;
  cfg.rounds = 0;
  CHECK_THROWS_AS(validate_run_config(cfg), InvalidConfig);

  cfg = RunConfig{};
  cfg.output = "";
  CHECK_THROWS_AS(validate_run_config(cfg), InvalidConfig);

  cfg = RunConfig{};
  cfg.oracle.hx = temp_path("missing_hx.csv");
  CHECK_THROWS_AS(validate_run_config(cfg), InvalidConfig);
}

TEST_CASE("load_run_config reads, validates, and reports I/O") {
  CHECK_THROWS_AS(load_run_config(temp_path("missing_config.txt")), IoError);

  const std::string path = temp_path("config.txt");
  write_text(path, "problem.kind = lingauss\nproblem.n = 4\nseed = 3\n");
  const RunConfig cfg = load_run_config(path);
  CHECK(cfg.problem.kind == ProblemKind::lingauss);
  CHECK(cfg.problem.n == 4);
  CHECK(cfg.seed == 3);

  write_text(path, "algo.eps_x = 0\n");
  CHECK_THROWS_AS(load_run_config(path), InvalidConfig);
}

TEST_CASE("resolve_network fills zero sizes from the data dimensions") {
  RunConfig cfg;
  const NetworkConfig full = resolve_network(cfg, 10, 3);
  CHECK(full.r_prime == 10);
  CHECK(full.s_prime == 3);
  CHECK(full.hidden_layers == 2);
  CHECK(full.hidden_width == 32);

  cfg.r_prime = 4;
  cfg.s_prime = 2;
  const NetworkConfig fixed = resolve_network(cfg, 10, 3);
  CHECK(fixed.r_prime == 4);
  CHECK(fixed.s_prime == 2);
}
