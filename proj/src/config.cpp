#include "srdr/config.hpp"

#include <filesystem>
#include <fstream>
#include <istream>
#include <set>
#include <string>
#include <string_view>

#include "srdr/errors.hpp"
#include "srdr/format.hpp"
#include "srdr/objective.hpp"

namespace srdr {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t'))
    s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' ||
                        s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

struct KeyContext {
  const std::string& origin;
  const std::string& key;

  InvalidConfig error(const std::string& what) const {
    return InvalidConfig(origin + ": key '" + key + "': " + what);
  }

  std::size_t count(std::string_view value) const {
    std::size_t v = 0;
    if (!parse_size_strict(value, &v)) throw error("expected a count");
    return v;
  }

  std::uint64_t seed(std::string_view value) const {
    // 64-bit seeds share the size_t parser; both are 64-bit here.
    static_assert(sizeof(std::size_t) == sizeof(std::uint64_t));
    return count(value);
  }

  double real(std::string_view value) const {
    double v = 0.0;
    if (!parse_double_strict(value, &v)) throw error("expected a number");
    return v;
  }

  bool boolean(std::string_view value) const {
    if (value == "true") return true;
    if (value == "false") return false;
    throw error("expected true or false");
  }
};

void apply_key(RunConfig* cfg, const KeyContext& ctx, std::string_view value) {
  const std::string& key = ctx.key;
  if (key == "output") {
    cfg->output = value;
  } else if (key == "seed") {
    cfg->seed = ctx.seed(value);
  } else if (key == "problem.kind") {
    if (value == "banana") cfg->problem.kind = ProblemKind::banana;
    else if (value == "lingauss") cfg->problem.kind = ProblemKind::lingauss;
    else if (value == "darcy") cfg->problem.kind = ProblemKind::darcy;
    else if (value == "external") cfg->problem.kind = ProblemKind::external;
    else throw ctx.error("expected banana, lingauss, darcy, or external");
  } else if (key == "problem.count") {
    cfg->problem.count = ctx.count(value);
  } else if (key == "problem.seed") {
    cfg->problem.structure_seed = ctx.seed(value);
  } else if (key == "problem.dimension") {
    cfg->problem.dimension = ctx.count(value);
  } else if (key == "problem.n") {
    cfg->problem.n = ctx.count(value);
  } else if (key == "problem.m") {
    cfg->problem.m = ctx.count(value);
  } else if (key == "problem.noise") {
    cfg->problem.noise = ctx.real(value);
  } else if (key == "problem.grid") {
    cfg->problem.grid = ctx.count(value);
  } else if (key == "problem.modes") {
    cfg->problem.modes = ctx.count(value);
  } else if (key == "problem.delta") {
    cfg->problem.delta = ctx.real(value);
  } else if (key == "problem.gamma") {
    cfg->problem.gamma = ctx.real(value);
  } else if (key == "problem.noise_variance") {
    cfg->problem.noise_variance = ctx.real(value);
  } else if (key == "problem.samples") {
    cfg->problem.samples = value;
  } else if (key == "net.r_prime") {
    cfg->r_prime = ctx.count(value);
  } else if (key == "net.s_prime") {
    cfg->s_prime = ctx.count(value);
  } else if (key == "net.hidden_layers") {
    cfg->hidden_layers = ctx.count(value);
  } else if (key == "net.hidden_width") {
    cfg->hidden_width = ctx.count(value);
  } else if (key == "train.learning_rate") {
    cfg->train.learning_rate = ctx.real(value);
  } else if (key == "train.batch_size") {
    cfg->train.batch_size = ctx.count(value);
  } else if (key == "train.epochs") {
    cfg->train.epochs = ctx.count(value);
  } else if (key == "train.lambda1") {
    cfg->train.lambda1 = ctx.real(value);
  } else if (key == "train.lambda2") {
    cfg->train.lambda2 = ctx.real(value);
  } else if (key == "train.trace") {
    if (value == "exact") cfg->train.trace_mode = exact_trace();
    else if (value == "sliced")
      cfg->train.trace_mode = sliced_trace(cfg->train.trace_mode.slices);
    else throw ctx.error("expected exact or sliced");
  } else if (key == "train.slices") {
    // Keep the kind and update the probe count, in either key order.
    cfg->train.trace_mode.slices = ctx.count(value);
  } else if (key == "train.validation_fraction") {
    cfg->train.validation_fraction = ctx.real(value);
  } else if (key == "train.beta1") {
    cfg->train.beta1 = ctx.real(value);
  } else if (key == "train.beta2") {
    cfg->train.beta2 = ctx.real(value);
  } else if (key == "train.epsilon") {
    cfg->train.epsilon = ctx.real(value);
  } else if (key == "train.clip_norm") {
    cfg->train.clip_norm = ctx.real(value);
  } else if (key == "algo.mode") {
    if (value == "single") cfg->mode = AlgoMode::single;
    else if (value == "deflate") cfg->mode = AlgoMode::deflate;
    else throw ctx.error("expected single or deflate");
  } else if (key == "algo.rounds") {
    cfg->rounds = ctx.count(value);
  } else if (key == "algo.keep") {
    cfg->keep = ctx.count(value);
  } else if (key == "algo.eps_x") {
    cfg->eps_x = ctx.real(value);
  } else if (key == "algo.eps_y") {
    cfg->eps_y = ctx.real(value);
  } else if (key == "algo.holdout_diagnostics") {
    cfg->holdout_diagnostics = ctx.boolean(value);
  } else if (key == "oracle.hx") {
    cfg->oracle.hx = value;
  } else if (key == "oracle.hy") {
    cfg->oracle.hy = value;
  } else if (key == "oracle.count") {
    cfg->oracle.count = ctx.count(value);
  } else if (key == "oracle.seed") {
    cfg->oracle.seed = ctx.seed(value);
  } else {
    throw InvalidConfig(ctx.origin + ": unknown key '" + key + "'");
  }
}

void require(bool ok, const std::string& what) {
  if (!ok) throw InvalidConfig(what);
}

void require_file(const std::string& path, const std::string& key) {
  if (!std::filesystem::exists(path))
    throw InvalidConfig("key '" + key + "': file does not exist: " + path);
}

}  // namespace

RunConfig parse_run_config(std::istream& in, const std::string& origin) {
  RunConfig cfg;
  std::set<std::string> seen;
  std::string line;
  for (std::size_t line_no = 1; std::getline(in, line); ++line_no) {
    const std::string_view stripped = trim(line);
    if (stripped.empty() || stripped.front() == '#') continue;
    const std::string at = origin + ":" + std::to_string(line_no);
    const std::size_t eq = stripped.find('=');
    if (eq == std::string_view::npos)
      throw InvalidConfig(at + ": expected 'key = value'");
    const std::string key{trim(stripped.substr(0, eq))};
    const std::string_view value = trim(stripped.substr(eq + 1));
    if (key.empty()) throw InvalidConfig(at + ": empty key");
    if (value.empty()) throw InvalidConfig(at + ": empty value for '" + key + "'");
    if (!seen.insert(key).second)
      throw InvalidConfig(at + ": duplicate key '" + key + "'");
    apply_key(&cfg, KeyContext{at, key}, value);
  }
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config: " + path);
  RunConfig cfg = parse_run_config(in, path);
  validate_run_config(cfg);
  return cfg;
}

void validate_run_config(const RunConfig& cfg) {
  require(cfg.problem.count >= 1, "problem.count must be positive");
  switch (cfg.problem.kind) {
    case ProblemKind::banana:
      require(cfg.problem.dimension >= 2, "banana needs problem.dimension >= 2");
      break;
    case ProblemKind::lingauss:
      require(cfg.problem.n >= 1 && cfg.problem.m >= 1,
              "lingauss needs problem.n and problem.m >= 1");
      require(cfg.problem.noise > 0.0, "problem.noise must be positive");
      break;
    case ProblemKind::darcy:
      require(cfg.problem.grid >= 3, "darcy needs problem.grid >= 3");
      require(cfg.problem.modes >= 1, "darcy needs problem.modes >= 1");
      require(cfg.problem.delta > 0.0 && cfg.problem.gamma > 0.0,
              "darcy prior parameters must be positive");
      require(cfg.problem.noise_variance >= 0.0,
              "problem.noise_variance must be nonnegative");
      break;
    case ProblemKind::external:
      require(!cfg.problem.samples.empty(),
              "external problems need problem.samples");
      require_file(cfg.problem.samples, "problem.samples");
      break;
  }
  require(cfg.hidden_layers == 0 || cfg.hidden_width >= 1,
          "net.hidden_width must be positive with hidden layers");
  validate_train_config(cfg.train);
  require(cfg.train.epochs >= 1, "train.epochs must be positive");
  if (cfg.mode == AlgoMode::deflate) {
    require(cfg.rounds >= 1, "algo.rounds must be positive");
    require(cfg.keep >= 1, "algo.keep must be positive");
  }
  require(cfg.eps_x > 0.0 && cfg.eps_y > 0.0, "tolerances must be positive");
  require(!cfg.output.empty(), "output must be nonempty");
  require(cfg.oracle.count >= 1, "oracle.count must be positive");
  if (!cfg.oracle.hx.empty()) require_file(cfg.oracle.hx, "oracle.hx");
  if (!cfg.oracle.hy.empty()) require_file(cfg.oracle.hy, "oracle.hy");
}

NetworkConfig resolve_network(const RunConfig& cfg, std::size_t n,
                              std::size_t m) {
  NetworkConfig net;
  net.r_prime = cfg.r_prime == 0 ? n : cfg.r_prime;
  net.s_prime = cfg.s_prime == 0 ? m : cfg.s_prime;
  net.hidden_layers = cfg.hidden_layers;
  net.hidden_width = cfg.hidden_width;
  return net;
}

}  // namespace srdr
