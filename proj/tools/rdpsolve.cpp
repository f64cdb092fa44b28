// rdpsolve: rate-distortion-perception solves, sweeps, oracle comparisons and
// Gaussian grid discretization from the command line.

#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rdp/cli.hpp"
#include "rdp/types.hpp"

namespace {

// Flags override the config file, so the file (if any) is loaded first and
// CLI11 then writes parsed flags on top of it.
std::string find_config_path(int argc, char** argv) {
  for (int i = 1; i + 1 < argc; ++i)
    if (std::string(argv[i]) == "--config") return argv[i + 1];
  return {};
}

void add_common_flags(CLI::App* cmd, rdp::cli::RunConfig& cfg, std::string& eps_stages_csv) {
  cmd->add_option("--config", "config JSON; flags given here override it")
      ->type_name("PATH");
  cmd->add_option("--source", cfg.source,
                  "bernoulli:P | gaussian:MU,SIGMA,S,DELTA | file:PATH");
  cmd->add_option("--distortion", cfg.distortion, "hamming | squared | file:PATH");
  cmd->add_option("--perception", cfg.perception,
                  "kl | tv | wasserstein:squared | wasserstein:file:PATH");
  cmd->add_option("--preset", cfg.preset, "binary-tv | gaussian-kl | gaussian-w2");
  cmd->add_option("--D", [&cfg](const std::vector<std::string>& v) {
        cfg.D = std::stod(v[0]);
        return true;
      },
      "distortion budget");
  cmd->add_option("--P", [&cfg](const std::vector<std::string>& v) {
        cfg.P = std::stod(v[0]);
        return true;
      },
      "perception budget");
  cmd->add_option("--D-grid", cfg.D_grid, "distortion grid lo:hi:step");
  cmd->add_option("--P-grid", cfg.P_grid, "perception grid lo:hi:step");
  cmd->add_option("--epsilon", cfg.epsilon, "entropy regularization (Wasserstein/TV)");
  cmd->add_option("--eps-stages", eps_stages_csv,
                  "comma-separated decreasing epsilon continuation ladder");
  cmd->add_option("--tol-inner", cfg.solver.tol_inner, "inner loop tolerance");
  cmd->add_option("--tol-outer", cfg.solver.tol_outer, "outer loop tolerance");
  cmd->add_option("--max-inner", cfg.solver.max_inner, "inner iteration cap");
  cmd->add_option("--max-outer", cfg.solver.max_outer, "outer iteration cap");
  cmd->add_option("--trace", cfg.trace_path, "write per-iteration TSV trace here");
  cmd->add_option("--format", cfg.format, "json | csv");
  cmd->add_option("--seed", cfg.seed, "seed for oracle restarts");
  cmd->add_option("--output", cfg.output, "write the result here instead of stdout");
  cmd->add_flag("--check-monotone", cfg.check_monotone,
                "verify rate monotonicity across the sweep grid");
}

}  // namespace

int main(int argc, char** argv) {
  rdp::cli::RunConfig cfg;
  const std::string config_path = find_config_path(argc, argv);
  if (!config_path.empty()) {
    try {
      cfg = rdp::cli::config_from_json_file(config_path);
    } catch (const rdp::Error& e) {
      std::cerr << "config error: " << e.what() << '\n';
      return 2;
    }
  }

  CLI::App app{"discrete rate-distortion-perception function solver"};
  app.require_subcommand(1);
  std::string eps_stages_csv;

  CLI::App* c_solve = app.add_subcommand("solve", "solve one (D, P) point");
  CLI::App* c_sweep = app.add_subcommand("sweep", "solve a (D, P) grid, emit CSV");
  CLI::App* c_oracle =
      app.add_subcommand("oracle", "compare the solver against the brute-force oracle");
  CLI::App* c_disc =
      app.add_subcommand("discretize", "emit the discretized Gaussian source as JSON");
  for (CLI::App* cmd : {c_solve, c_sweep, c_oracle, c_disc})
    add_common_flags(cmd, cfg, eps_stages_csv);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (!eps_stages_csv.empty()) {
    cfg.eps_stages.clear();
    std::size_t start = 0;
    while (start <= eps_stages_csv.size()) {
      const std::size_t pos = eps_stages_csv.find(',', start);
      const std::string tok = eps_stages_csv.substr(
          start, pos == std::string::npos ? std::string::npos : pos - start);
      try {
        cfg.eps_stages.push_back(std::stod(tok));
      } catch (const std::exception&) {
        std::cerr << "config error: bad --eps-stages entry '" << tok << "'\n";
        return 2;
      }
      if (pos == std::string::npos) break;
      start = pos + 1;
    }
  }

  if (c_solve->parsed()) return rdp::cli::run_solve(cfg, std::cout, std::cerr);
  if (c_sweep->parsed()) return rdp::cli::run_sweep(cfg, std::cout, std::cerr);
  if (c_oracle->parsed()) return rdp::cli::run_oracle(cfg, std::cout, std::cerr);
  if (c_disc->parsed()) return rdp::cli::run_discretize(cfg, std::cout, std::cerr);
  return 2;
}
