#include "srdr/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>

#include "CLI11.hpp"
#include "json.hpp"

#include "srdr/checkpoint.hpp"
#include "srdr/csv.hpp"
#include "srdr/diagnostics.hpp"
#include "srdr/errors.hpp"
#include "srdr/format.hpp"
#include "srdr/linalg.hpp"
#include "srdr/problems/banana.hpp"
#include "srdr/problems/darcy.hpp"
#include "srdr/problems/lingauss.hpp"

namespace srdr {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const char* kind_name(ProblemKind kind) {
  switch (kind) {
    case ProblemKind::banana: return "banana";
    case ProblemKind::lingauss: return "lingauss";
    case ProblemKind::darcy: return "darcy";
    case ProblemKind::external: return "external";
  }
  return "unknown";
}

// The analytic problem a config describes, rebuilt identically by every
// command from the structure seed. external leaves the dims at 0; they are
// resolved from the data files instead.
struct ProblemInstance {
  std::size_t n = 0;
  std::size_t m = 0;
  std::optional<BananaProblem> banana;
  std::optional<LinGaussProblem> lingauss;
  std::optional<DarcyProblem> darcy;
};

ProblemInstance instantiate_problem(const RunConfig& cfg) {
  ProblemInstance p;
  const ProblemSpec& spec = cfg.problem;
  switch (spec.kind) {
    case ProblemKind::banana:
      p.banana = make_banana(spec.dimension, spec.structure_seed);
      p.n = spec.dimension;
      p.m = 0;
      break;
    case ProblemKind::lingauss: {
      SeededRng rng(spec.structure_seed);
      const Matrix a = rng.gaussian_matrix(spec.m, spec.n);
      Matrix gamma(spec.m, spec.m);
      for (std::size_t i = 0; i < spec.m; ++i) gamma(i, i) = spec.noise;
      p.lingauss = make_lingauss(a, gamma);
      p.n = spec.n;
      p.m = spec.m;
      break;
    }
    case ProblemKind::darcy:
      p.darcy = make_darcy(spec.grid, spec.modes, spec.delta, spec.gamma,
                           default_observation_grid(), spec.noise_variance);
      p.n = spec.modes;
      p.m = p.darcy->observations.size();
      break;
    case ProblemKind::external:
      break;
  }
  return p;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec)
    throw IoError("cannot create output directory " + dir.string() + ": " +
                  ec.message());
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  return out;
}

json json_matrix(const Matrix& mat) {
  json rows = json::array();
  for (std::size_t i = 0; i < mat.rows(); ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < mat.cols(); ++j) row.push_back(mat(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

// Row r holds the r-th eigenvalue (none for r = 0) and the certified
// residual after keeping r directions: factor * sum of the trailing
// eigenvalues, accumulated back to front exactly like rank selection.
void write_spectra_block(std::ostream& out, const char* kind,
                         std::size_t round, const Vector& spectrum,
                         double factor) {
  const std::size_t d = spectrum.size();
  Vector tail(d + 1, 0.0);
  for (std::size_t k = d; k-- > 0;) tail[k] = tail[k + 1] + spectrum[k];
  out << kind << ',' << round << ",0," << format_g17(0.0) << ','
      << format_g17(factor * tail[0]) << '\n';
  for (std::size_t r = 1; r <= d; ++r)
    out << kind << ',' << round << ',' << r << ','
        << format_g17(spectrum[r - 1]) << ',' << format_g17(factor * tail[r])
        << '\n';
}

JointSamples draw_samples(const ProblemInstance& p, std::size_t count,
                          std::uint64_t seed) {
  if (p.banana) return sample_banana(*p.banana, count, seed);
  if (p.lingauss) return sample_lingauss(*p.lingauss, count, seed);
  return sample_darcy(*p.darcy, count, seed);
}

fs::path samples_path(const RunConfig& cfg) {
  if (cfg.problem.kind == ProblemKind::external)
    return fs::path(cfg.problem.samples);
  return fs::path(cfg.output) / "samples.csv";
}

void check_sample_dims(const ProblemInstance& p, const JointSamples& samples,
                       const std::string& path) {
  if (!p.banana && !p.lingauss && !p.darcy) return;
  if (samples.n() != p.n || samples.m() != p.m)
    throw InvalidConfig(path + " holds " + std::to_string(samples.n()) +
                        " x- and " + std::to_string(samples.m()) +
                        " y-columns, but the configured problem has n = " +
                        std::to_string(p.n) + ", m = " + std::to_string(p.m));
}

void write_selection_entry(std::ostream& out, const char* side,
                           const ReductionBasis& basis) {
  out << side << ".rank = " << basis.rank << '\n';
  out << side << ".residual_bound = " << format_g17(basis.residual_bound)
      << '\n';
  out << side << ".warning = " << (basis.rank_warning ? "true" : "false")
      << '\n';
}

// Reference diagnostics for evaluate: a configured matrix file wins, then
// the analytic problem; dim is the basis row count the reference must match.
Matrix reference_hx(const RunConfig& cfg, const ProblemInstance& p,
                    std::size_t dim) {
  if (!cfg.oracle.hx.empty()) {
    const Matrix h = read_matrix_csv(cfg.oracle.hx);
    if (h.rows() != dim || h.cols() != dim)
      throw InvalidConfig("oracle.hx is " + std::to_string(h.rows()) + " x " +
                          std::to_string(h.cols()) + ", expected " +
                          std::to_string(dim));
    return h;
  }
  if (p.banana)
    return banana_true_hx(*p.banana, cfg.oracle.count, cfg.oracle.seed).matrix;
  if (p.lingauss) return lingauss_true_hx(*p.lingauss).matrix;
  throw MissingOracle(
      "no analytic parameter diagnostic for this problem; provide oracle.hx");
}

Matrix reference_hy(const RunConfig& cfg, const ProblemInstance& p,
                    std::size_t dim) {
  if (!cfg.oracle.hy.empty()) {
    const Matrix h = read_matrix_csv(cfg.oracle.hy);
    if (h.rows() != dim || h.cols() != dim)
      throw InvalidConfig("oracle.hy is " + std::to_string(h.rows()) + " x " +
                          std::to_string(h.cols()) + ", expected " +
                          std::to_string(dim));
    return h;
  }
  if (p.lingauss) return lingauss_true_hy(*p.lingauss).matrix;
  throw MissingOracle(
      "no analytic observation diagnostic for this problem; provide "
      "oracle.hy");
}

// Bound of every basis prefix against the reference next to the optimal
// eigenbasis value. rank,learned,optimal with rows 0..cols(basis).
void write_curve(const fs::path& path, const Matrix& basis,
                 const Matrix& h_true, double factor) {
  const EigenPairs e = sym_eigendecompose(h_true);
  const std::size_t d = e.values.size();
  Vector tail(d + 1, 0.0);
  for (std::size_t k = d; k-- > 0;) tail[k] = tail[k + 1] + e.values[k];
  std::ofstream out = open_out(path);
  out << "rank,learned,optimal\n";
  for (std::size_t r = 0; r <= basis.cols(); ++r) {
    const Matrix prefix = basis.cols_range(0, r);
    const double learned = factor == 0.5 ? error_bound_cdr(prefix, h_true)
                                         : error_bound_cmi(prefix, h_true);
    out << r << ',' << format_g17(learned) << ','
        << format_g17(factor * tail[r]) << '\n';
  }
  if (!out) throw IoError("failed writing curve: " + path.string());
}

}  // namespace

void cmd_generate(const RunConfig& cfg, std::ostream& log) {
  if (cfg.problem.kind == ProblemKind::external)
    throw InvalidConfig(
        "external samples are supplied by the user; nothing to generate");
  const ProblemInstance p = instantiate_problem(cfg);
  const JointSamples samples = draw_samples(p, cfg.problem.count, cfg.seed);

  const fs::path dir(cfg.output);
  ensure_dir(dir);
  write_samples_csv((dir / "samples.csv").string(), samples);

  json manifest;
  manifest["schema"] = "srdr-manifest v1";
  manifest["seed"] = cfg.seed;
  manifest["samples"] = "samples.csv";
  manifest["count"] = cfg.problem.count;
  json prob;
  prob["kind"] = kind_name(cfg.problem.kind);
  prob["seed"] = cfg.problem.structure_seed;
  if (p.banana) {
    prob["dimension"] = cfg.problem.dimension;
    manifest["oracle"]["rotation"] = json_matrix(p.banana->rotation);
  } else if (p.lingauss) {
    prob["n"] = cfg.problem.n;
    prob["m"] = cfg.problem.m;
    prob["noise"] = cfg.problem.noise;
    manifest["oracle"]["a"] = json_matrix(p.lingauss->a);
    manifest["oracle"]["gamma"] = json_matrix(p.lingauss->gamma);
  } else {
    prob["grid"] = cfg.problem.grid;
    prob["modes"] = cfg.problem.modes;
    prob["delta"] = cfg.problem.delta;
    prob["gamma"] = cfg.problem.gamma;
    prob["noise_variance"] = cfg.problem.noise_variance;
    json obs = json::array();
    for (const ObsPoint& pt : p.darcy->observations)
      obs.push_back(json::array({pt.xi1, pt.xi2}));
    prob["observations"] = std::move(obs);
  }
  manifest["problem"] = std::move(prob);

  std::ofstream out = open_out(dir / "manifest.json");
  out << manifest.dump(2) << '\n';
  if (!out) throw IoError("failed writing manifest");

  log << "generate: wrote " << (dir / "samples.csv").string() << " ("
      << samples.count() << " rows, " << samples.n() << " x-columns, "
      << samples.m() << " y-columns) and manifest.json\n";
}

void cmd_reduce(const RunConfig& cfg, std::ostream& log) {
  const ProblemInstance p = instantiate_problem(cfg);
  const fs::path source = samples_path(cfg);
  const JointSamples samples = read_samples_csv(source.string());
  check_sample_dims(p, samples, source.string());
  if (samples.count() == 0)
    throw InvalidConfig(source.string() + " holds no samples");

  const NetworkConfig net_cfg = resolve_network(cfg, samples.n(), samples.m());
  TrainConfig train_cfg = cfg.train;
  train_cfg.seed = cfg.seed;

  const fs::path dir(cfg.output);
  ensure_dir(dir);
  std::ofstream run_log = open_out(dir / "run.log");
  run_log << "command reduce\n"
          << "samples " << source.string() << " count " << samples.count()
          << " n " << samples.n() << " m " << samples.m() << '\n'
          << "net r' " << net_cfg.r_prime << " s' " << net_cfg.s_prime
          << " hidden " << net_cfg.hidden_layers << " width "
          << net_cfg.hidden_width << '\n'
          << "seed " << cfg.seed << '\n';

  std::ofstream spectra = open_out(dir / "spectra.csv");
  spectra << "kind,round,index,eigenvalue,tail_bound\n";

  if (cfg.mode == AlgoMode::single) {
    run_log << "mode single\n";
    const Algorithm1Result res =
        algorithm1(samples, net_cfg, train_cfg, cfg.eps_x, cfg.eps_y,
                   cfg.holdout_diagnostics, &run_log);
    save_checkpoint(res.net, (dir / "checkpoint.txt").string());

    write_spectra_block(spectra, "cdr", 0, res.x_basis.spectrum, 0.5);
    if (samples.m() > 0)
      write_spectra_block(spectra, "cmi", 0, res.y_basis.spectrum, 1.0);

    // Full eigenbases (not just the selected columns) so evaluate can sweep
    // every rank; the estimated diagnostics let a high-accuracy run serve
    // as another run's reference.
    write_matrix_csv((dir / "basis_x.csv").string(),
                     sym_eigendecompose(res.hx.matrix).vectors);
    write_matrix_csv((dir / "hx.csv").string(), res.hx.matrix);
    if (samples.m() > 0) {
      write_matrix_csv((dir / "basis_y.csv").string(),
                       sym_eigendecompose(res.hy.matrix).vectors);
      write_matrix_csv((dir / "hy.csv").string(), res.hy.matrix);
    }

    std::ofstream sel = open_out(dir / "selection.txt");
    sel << "schema = srdr-selection v1\n";
    sel << "mode = single\n";
    write_selection_entry(sel, "x", res.x_basis);
    if (samples.m() > 0) write_selection_entry(sel, "y", res.y_basis);
    if (!sel) throw IoError("failed writing selection");

    run_log << "best epoch " << res.report.best_epoch << '\n';
    run_log << "selected x rank " << res.x_basis.rank << " bound "
            << format_g17(res.x_basis.residual_bound) << '\n';
    if (samples.m() > 0)
      run_log << "selected y rank " << res.y_basis.rank << " bound "
              << format_g17(res.y_basis.residual_bound) << '\n';
    log << "reduce: selected x rank " << res.x_basis.rank;
    if (samples.m() > 0) log << ", y rank " << res.y_basis.rank;
    log << '\n';
  } else {
    run_log << "mode deflate rounds " << cfg.rounds << " keep " << cfg.keep
            << '\n';
    const Algorithm2Result res = algorithm2(samples, cfg.rounds, cfg.keep,
                                            net_cfg, train_cfg, &run_log);
    for (std::size_t t = 0; t < res.nets.size(); ++t)
      save_checkpoint(res.nets[t], (dir / ("checkpoint_round" +
                                           std::to_string(t) + ".txt"))
                                       .string());

    for (std::size_t t = 0; t < res.x_spectra.size(); ++t)
      write_spectra_block(spectra, "cdr", t, res.x_spectra[t], 0.5);
    for (std::size_t t = 0; t < res.y_spectra.size(); ++t)
      write_spectra_block(spectra, "cmi", t, res.y_spectra[t], 1.0);

    write_matrix_csv((dir / "basis_x.csv").string(), res.state.accumulated_u);
    if (samples.m() > 0)
      write_matrix_csv((dir / "basis_y.csv").string(),
                       res.state.accumulated_v);

    std::ofstream sel = open_out(dir / "selection.txt");
    sel << "schema = srdr-selection v1\n";
    sel << "mode = deflate\n";
    sel << "rounds = " << cfg.rounds << '\n';
    sel << "keep = " << cfg.keep << '\n';
    sel << "x.columns = " << res.state.accumulated_u.cols() << '\n';
    if (samples.m() > 0)
      sel << "y.columns = " << res.state.accumulated_v.cols() << '\n';
    if (!sel) throw IoError("failed writing selection");

    for (std::size_t t = 0; t < res.x_spectra.size(); ++t)
      run_log << "round " << t << " leading eigenvalue "
              << format_g17(res.x_spectra[t][0]) << '\n';
    log << "reduce: accumulated " << res.state.accumulated_u.cols()
        << " x-columns";
    if (samples.m() > 0)
      log << ", " << res.state.accumulated_v.cols() << " y-columns";
    log << '\n';
  }
  if (!spectra) throw IoError("failed writing spectra");
  if (!run_log) throw IoError("failed writing run log");
}

void cmd_evaluate(const RunConfig& cfg, std::ostream& log) {
  const ProblemInstance p = instantiate_problem(cfg);
  const fs::path dir(cfg.output);

  const fs::path basis_x_path = dir / "basis_x.csv";
  const Matrix basis_x = read_matrix_csv(basis_x_path.string());
  if (basis_x.empty())
    throw MalformedCsv(basis_x_path.string() + ": empty basis");
  if (p.n != 0 && basis_x.rows() != p.n)
    throw InvalidConfig(basis_x_path.string() + " has " +
                        std::to_string(basis_x.rows()) +
                        " rows, but the configured problem has n = " +
                        std::to_string(p.n));

  const Matrix hx_true = reference_hx(cfg, p, basis_x.rows());
  write_curve(dir / "curves_cdr.csv", basis_x, hx_true, 0.5);
  log << "evaluate: wrote curves_cdr.csv (ranks 0.." << basis_x.cols()
      << ")\n";

  const fs::path basis_y_path = dir / "basis_y.csv";
  if (fs::exists(basis_y_path)) {
    const Matrix basis_y = read_matrix_csv(basis_y_path.string());
    if (basis_y.empty())
      throw MalformedCsv(basis_y_path.string() + ": empty basis");
    if (p.m != 0 && basis_y.rows() != p.m)
      throw InvalidConfig(basis_y_path.string() + " has " +
                          std::to_string(basis_y.rows()) +
                          " rows, but the configured problem has m = " +
                          std::to_string(p.m));
    const Matrix hy_true = reference_hy(cfg, p, basis_y.rows());
    write_curve(dir / "curves_cmi.csv", basis_y, hy_true, 1.0);
    log << "evaluate: wrote curves_cmi.csv (ranks 0.." << basis_y.cols()
        << ")\n";
  }
}

namespace {

std::uint64_t parse_seed_flag(const std::string& value) {
  std::size_t seed = 0;
  if (!parse_size_strict(value, &seed))
    throw InvalidConfig("--seed: expected an unsigned integer, got '" + value +
                        "'");
  return seed;
}

TraceMode parse_trace_flag(const std::string& value, std::size_t slices) {
  if (value == "exact") return exact_trace();
  if (value == "sliced") return sliced_trace(slices);
  const std::string prefix = "sliced,";
  if (value.rfind(prefix, 0) == 0) {
    std::size_t k = 0;
    if (parse_size_strict(std::string_view(value).substr(prefix.size()), &k) &&
        k >= 1)
      return sliced_trace(k);
  }
  throw InvalidConfig("--trace-mode: expected exact, sliced, or sliced,K");
}

void parse_deflate_flag(const std::string& value, RunConfig* cfg) {
  const std::size_t comma = value.find(',');
  std::size_t rounds = 0, keep = 0;
  const std::string_view v(value);
  if (comma == std::string::npos ||
      !parse_size_strict(v.substr(0, comma), &rounds) ||
      !parse_size_strict(v.substr(comma + 1), &keep) || rounds < 1 || keep < 1)
    throw InvalidConfig("--deflate: expected T,L with positive counts");
  cfg->mode = AlgoMode::deflate;
  cfg->rounds = rounds;
  cfg->keep = keep;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"score-ratio dimension reduction pipeline"};
  app.require_subcommand(1);

  std::string config_path, seed_flag, trace_flag, deflate_flag;
  const std::pair<const char*, const char*> commands[] = {
      {"generate", "draw joint samples and write them with their manifest"},
      {"reduce", "train the score-ratio network and extract subspaces"},
      {"evaluate", "compare basis error bounds against a reference"},
  };
  for (const auto& [name, what] : commands) {
    CLI::App* sub = app.add_subcommand(name, what);
    sub->add_option("--config", config_path, "run configuration file")
        ->required();
    sub->add_option("--seed", seed_flag, "override the run seed");
    sub->add_option("--trace-mode", trace_flag,
                    "exact, sliced, or sliced,K probes");
    sub->add_option("--deflate", deflate_flag,
                    "T,L: deflate for T rounds keeping L vectors each");
  }

  // CLI11 consumes the argument vector back to front.
  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }

  try {
    RunConfig cfg = load_run_config(config_path);
    if (const char* env = std::getenv("SRDR_OUTPUT"); env && *env)
      cfg.output = env;
    if (!seed_flag.empty()) cfg.seed = parse_seed_flag(seed_flag);
    if (!trace_flag.empty())
      cfg.train.trace_mode =
          parse_trace_flag(trace_flag, cfg.train.trace_mode.slices);
    if (!deflate_flag.empty()) parse_deflate_flag(deflate_flag, &cfg);
    validate_run_config(cfg);

    if (app.got_subcommand("generate")) cmd_generate(cfg, out);
    else if (app.got_subcommand("reduce")) cmd_reduce(cfg, out);
    else cmd_evaluate(cfg, out);
    return 0;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return static_cast<int>(e.category());
  } catch (const std::exception& e) {
    err << "unexpected error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace srdr
