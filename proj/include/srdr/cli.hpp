#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "srdr/config.hpp"

namespace srdr {

// Pipeline commands. Each writes its artifacts under cfg.output and a short
// summary to `log`; every byte written is a deterministic function of the
// configuration and seed (no wall-clock content), so rerunning a command
// reproduces its files exactly.
//
// generate: samples.csv plus manifest.json (seed, problem parameters, and
// the analytic oracle data: the banana rotation, the linear-Gaussian
// forward map and noise covariance).
//
// reduce: trains on <output>/samples.csv (external: the configured path)
// and writes checkpoint.txt (deflation: checkpoint_round<t>.txt per round),
// spectra.csv (kind,round,index,eigenvalue,tail_bound; the index-r bound is
// the certified residual after keeping r directions), basis_x.csv /
// basis_y.csv (full eigenbasis for the single-network procedure, the
// accumulated columns for deflation), hx.csv / hy.csv (the estimated
// diagnostics, single mode), selection.txt, and run.log.
//
// evaluate: reads the basis files back and writes curves_cdr.csv /
// curves_cmi.csv comparing the certified bound of each basis prefix against
// the optimal eigenbasis of a reference diagnostic: a configured oracle.hx
// / oracle.hy matrix, the closed form (lingauss), or a Monte Carlo estimate
// from the analytic ratio (banana). Throws MissingOracle when no reference
// is available.
void cmd_generate(const RunConfig& cfg, std::ostream& log);
void cmd_reduce(const RunConfig& cfg, std::ostream& log);
void cmd_evaluate(const RunConfig& cfg, std::ostream& log);

// Driver behind the srdr binary:
//
//   srdr <generate|reduce|evaluate> --config FILE
//        [--seed N] [--trace-mode exact|sliced|sliced,K] [--deflate T,L]
//
// Flags override the file's values; the SRDR_OUTPUT environment variable
// overrides the output directory. Returns the process exit code: 0 success,
// 2 invalid configuration or usage, 3 numerical failure, 4 I/O failure.
int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err);

}  // namespace srdr
