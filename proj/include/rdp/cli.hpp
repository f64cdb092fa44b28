#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "rdp/types.hpp"

namespace rdp::cli {

/// One experiment description. Field syntax matches the command-line flags:
///   source      bernoulli:P | gaussian:MU,SIGMA,S,DELTA | file:PATH
///   distortion  hamming | squared | file:PATH
///   perception  kl | tv | wasserstein:squared | wasserstein:file:PATH
///   grids       lo:hi:step (inclusive, strictly increasing)
struct RunConfig {
  std::string source;
  std::string distortion;
  std::string perception;
  std::string preset;  // binary-tv | gaussian-kl | gaussian-w2
  std::optional<double> D;
  std::optional<double> P;
  std::string D_grid;
  std::string P_grid;
  double epsilon = 0.01;
  std::vector<double> eps_stages;  // optional continuation ladder, decreasing
  SolverConfig solver;
  std::string trace_path;
  std::string format;  // "json" | "csv"; per-command default when empty
  std::string output;  // output file; stdout when empty
  std::uint64_t seed = 1;
  bool check_monotone = false;
};

/// Load a config JSON document; unknown keys are rejected.
RunConfig config_from_json_file(const std::string& path);

std::vector<double> parse_grid(const std::string& spec);

/// Fully assembled instance, shared by every subcommand.
struct Instance {
  DiscreteSource source;
  DistortionMatrix d;
  PerceptionMeasure perception;
};

Instance build_instance(const RunConfig& cfg);

/// Solve at budgets (D, P) with the solver matching the perception measure.
RdpSolution solve_instance(const Instance& inst, double D, double P, const RunConfig& cfg);

// Subcommand drivers; they write to `out` (or cfg.output) and diagnostics to
// `err`, and return the process exit code (0 ok, 2 bad config, 3 solver did
// not converge).
int run_solve(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int run_sweep(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int run_oracle(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int run_discretize(const RunConfig& cfg, std::ostream& out, std::ostream& err);

}  // namespace rdp::cli
