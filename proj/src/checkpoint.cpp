#include "srdr/checkpoint.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

#include "srdr/errors.hpp"
#include "srdr/format.hpp"

namespace srdr {

namespace {

constexpr const char* kMagic = "srdr-checkpoint v1";
constexpr const char* kOrder =
    "order wx-row-major wy-row-major psi-layer-weights-then-bias";

std::vector<std::string> split_words(const std::string& line) {
  std::vector<std::string> words;
  std::istringstream in(line);
  std::string w;
  while (in >> w) words.push_back(w);
  return words;
}

// psi layers are uniform by construction (init_network / load_checkpoint);
// recover the width so the dims line can describe the full shape.
std::size_t hidden_width_of(const MlpParams& psi) {
  return psi.layer_count() >= 2 ? psi.weights[0].rows() : 0;
}

}  // namespace

void save_checkpoint(const ScoreRatioNetwork& net, const std::string& path) {
  validate_network(net);
  std::ofstream out(path);
  if (!out) throw IoError("cannot open checkpoint for writing: " + path);
  out << kMagic << '\n';
  out << "dims " << net.n() << ' ' << net.m() << ' ' << net.r_prime() << ' '
      << net.s_prime() << ' ' << net.psi.layer_count() - 1 << ' '
      << hidden_width_of(net.psi) << '\n';
  out << kOrder << '\n';
  const Vector flat = flatten_network(net);
  out << "params " << flat.size() << '\n';
  for (double v : flat) out << format_g17(v) << '\n';
  out << "end\n";
  if (!out) throw IoError("failed writing checkpoint: " + path);
}

ScoreRatioNetwork load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open checkpoint: " + path);

  const auto fail = [&path](const std::string& what) -> MalformedCheckpoint {
    return MalformedCheckpoint(path + ": " + what);
  };
  std::string line;
  if (!std::getline(in, line) || line != kMagic)
    throw fail("missing or unsupported header");

  if (!std::getline(in, line)) throw fail("missing dims line");
  const auto dims = split_words(line);
  std::size_t d[6];
  if (dims.size() != 7 || dims[0] != "dims") throw fail("malformed dims line");
  for (int i = 0; i < 6; ++i)
    if (!parse_size_strict(dims[1 + i], &d[i])) throw fail("malformed dims line");
  const std::size_t n = d[0], m = d[1], rp = d[2], sp = d[3];
  const std::size_t hidden_layers = d[4], hidden_width = d[5];
  if (rp < 1 || rp > n) throw fail("dims violate 1 <= r' <= n");
  if (sp > m) throw fail("dims violate s' <= m");
  if (hidden_layers > 0 && hidden_width == 0)
    throw fail("hidden layers declared with zero width");

  if (!std::getline(in, line) || line != kOrder)
    throw fail("missing or unsupported order line");

  if (!std::getline(in, line)) throw fail("missing params line");
  const auto params = split_words(line);
  std::size_t count = 0;
  if (params.size() != 2 || params[0] != "params" ||
      !parse_size_strict(params[1], &count))
    throw fail("malformed params line");

  ScoreRatioNetwork net;
  net.w_x = Matrix(n, rp);
  net.w_y = Matrix(m, sp);
  SeededRng unused(0);
  net.psi = init_mlp(rp + sp, hidden_layers, hidden_width, rp, unused);
  if (count != network_param_count(net))
    throw fail("parameter count disagrees with dims");

  Vector flat(count);
  for (std::size_t i = 0; i < count; ++i) {
    if (!std::getline(in, line)) throw fail("truncated parameter block");
    if (!parse_double_strict(line, &flat[i]))
      throw fail("unparsable parameter value");
    if (!std::isfinite(flat[i])) throw fail("non-finite parameter value");
  }
  if (!std::getline(in, line) || line != "end") throw fail("missing end line");
  if (std::getline(in, line)) throw fail("trailing content after end line");

  unflatten_network(flat, &net);
  validate_network(net);
  return net;
}

}  // namespace srdr
