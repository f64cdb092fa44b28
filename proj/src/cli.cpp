#include "rdp/cli.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "rdp/baselines.hpp"
#include "rdp/discretize.hpp"
#include "rdp/io.hpp"
#include "rdp/kl_solver.hpp"
#include "rdp/ot_solver.hpp"

namespace rdp::cli {

namespace {

using ordered_json = nlohmann::ordered_json;

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = s.find(sep, start);
    if (pos == std::string::npos) {
      parts.push_back(s.substr(start));
      break;
    }
    parts.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
  return parts;
}

double parse_double(const std::string& s, const char* what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(std::string("cannot parse ") + what + ": '" + s + "'");
  }
}

void apply_preset(RunConfig& cfg) {
  if (cfg.preset.empty()) return;
  std::string src, dist, perc;
  double P = 0.0, eps = 0.01;
  if (cfg.preset == "binary-tv") {
    src = "bernoulli:0.1";
    dist = "hamming";
    perc = "tv";
    P = 0.02;
  } else if (cfg.preset == "gaussian-kl") {
    src = "gaussian:0,2,8,0.5";
    dist = "squared";
    perc = "kl";
    P = 0.2;
  } else if (cfg.preset == "gaussian-w2") {
    src = "gaussian:0,2,8,0.5";
    dist = "squared";
    perc = "wasserstein:squared";
    P = 0.2;
  } else {
    throw ConfigError("unknown preset: " + cfg.preset);
  }
  // presets fill only what the user left unset
  if (cfg.source.empty()) cfg.source = src;
  if (cfg.distortion.empty()) cfg.distortion = dist;
  if (cfg.perception.empty()) cfg.perception = perc;
  if (!cfg.P) cfg.P = P;
  (void)eps;
}

struct RecordSink {
  const RunConfig& cfg;
  std::ostream& fallback;
  std::ofstream file;

  RecordSink(const RunConfig& c, std::ostream& out) : cfg(c), fallback(out) {
    if (!c.output.empty()) {
      file.open(c.output);
      if (!file) throw ConfigError("cannot open output file: " + c.output);
    }
  }
  std::ostream& stream() { return file.is_open() ? file : fallback; }
};

}  // namespace

std::vector<double> parse_grid(const std::string& spec) {
  const auto parts = split(spec, ':');
  if (parts.size() != 3) throw ConfigError("grid must be lo:hi:step, got '" + spec + "'");
  const double lo = parse_double(parts[0], "grid lo");
  const double hi = parse_double(parts[1], "grid hi");
  const double step = parse_double(parts[2], "grid step");
  if (!(step > 0.0)) throw ConfigError("grid step must be positive");
  if (hi < lo) throw ConfigError("grid hi must be >= lo");
  std::vector<double> grid;
  for (int k = 0;; ++k) {
    const double v = lo + static_cast<double>(k) * step;
    if (v > hi + 1e-12 * std::max(1.0, step)) break;
    grid.push_back(std::min(v, hi));
    if (grid.size() > 100000) throw ConfigError("grid has more than 100000 cells");
  }
  if (grid.empty()) throw ConfigError("grid is empty");
  return grid;
}

RunConfig config_from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  ordered_json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("invalid config JSON: ") + e.what());
  }

  RunConfig cfg;
  for (const auto& [key, val] : j.items()) {
    if (key == "source") cfg.source = val.get<std::string>();
    else if (key == "distortion") cfg.distortion = val.get<std::string>();
    else if (key == "perception") cfg.perception = val.get<std::string>();
    else if (key == "preset") cfg.preset = val.get<std::string>();
    else if (key == "D") cfg.D = val.get<double>();
    else if (key == "P") cfg.P = val.get<double>();
    else if (key == "D_grid") cfg.D_grid = val.get<std::string>();
    else if (key == "P_grid") cfg.P_grid = val.get<std::string>();
    else if (key == "epsilon") cfg.epsilon = val.get<double>();
    else if (key == "eps_stages") cfg.eps_stages = val.get<std::vector<double>>();
    else if (key == "tol_inner") cfg.solver.tol_inner = val.get<double>();
    else if (key == "tol_outer") cfg.solver.tol_outer = val.get<double>();
    else if (key == "max_inner") cfg.solver.max_inner = val.get<int>();
    else if (key == "max_outer") cfg.solver.max_outer = val.get<int>();
    else if (key == "trace") cfg.trace_path = val.get<std::string>();
    else if (key == "format") cfg.format = val.get<std::string>();
    else if (key == "output") cfg.output = val.get<std::string>();
    else if (key == "seed") cfg.seed = val.get<std::uint64_t>();
    else if (key == "check_monotone") cfg.check_monotone = val.get<bool>();
    else throw ConfigError("unknown config key: " + key);
  }
  return cfg;
}

Instance build_instance(const RunConfig& cfg_in) {
  RunConfig cfg = cfg_in;
  apply_preset(cfg);
  if (cfg.source.empty()) throw ConfigError("no source given (flag --source or a preset)");
  if (cfg.distortion.empty()) throw ConfigError("no distortion given");
  if (cfg.perception.empty()) throw ConfigError("no perception given");

  Instance inst;

  const auto src_parts = split(cfg.source, ':');
  if (src_parts[0] == "bernoulli" && src_parts.size() == 2) {
    const double q = parse_double(src_parts[1], "bernoulli parameter");
    if (!(q > 0.0 && q < 1.0)) throw ConfigError("bernoulli parameter must be in (0,1)");
    inst.source = DiscreteSource({0.0, 1.0}, {1.0 - q, q});
  } else if (src_parts[0] == "gaussian" && src_parts.size() == 2) {
    const auto nums = split(src_parts[1], ',');
    if (nums.size() != 4) throw ConfigError("gaussian source needs mu,sigma,S,delta");
    GaussianSpec spec;
    spec.mu = parse_double(nums[0], "gaussian mu");
    spec.sigma = parse_double(nums[1], "gaussian sigma");
    spec.S = parse_double(nums[2], "gaussian S");
    spec.delta = parse_double(nums[3], "gaussian delta");
    inst.source = discretize_gaussian(spec);
  } else if (src_parts[0] == "file" && src_parts.size() >= 2) {
    inst.source = io::read_source_json(cfg.source.substr(5));
  } else {
    throw ConfigError("unknown source spec: " + cfg.source);
  }

  const std::size_t n = inst.source.size();
  if (cfg.distortion == "hamming") {
    inst.d = hamming_distortion(n);
  } else if (cfg.distortion == "squared") {
    inst.d = squared_error_matrix(inst.source.points, inst.source.points);
  } else if (cfg.distortion.rfind("file:", 0) == 0) {
    inst.d = DistortionMatrix(io::read_matrix_json(cfg.distortion.substr(5)));
    if (inst.d.d.rows != n)
      throw ConfigError("distortion file row count does not match the source");
  } else {
    throw ConfigError("unknown distortion spec: " + cfg.distortion);
  }

  if (cfg.perception == "kl") {
    inst.perception = PerceptionMeasure::make_kl();
  } else if (cfg.perception == "tv") {
    inst.perception = PerceptionMeasure::make_tv();
  } else if (cfg.perception == "wasserstein:squared") {
    inst.perception = PerceptionMeasure::make_wasserstein(
        CostMatrix(squared_error_matrix(inst.source.points, inst.source.points).d));
  } else if (cfg.perception.rfind("wasserstein:file:", 0) == 0) {
    inst.perception =
        PerceptionMeasure::make_wasserstein(CostMatrix(io::read_matrix_json(cfg.perception.substr(17))));
  } else {
    throw ConfigError("unknown perception spec: " + cfg.perception);
  }
  return inst;
}

RdpSolution solve_instance(const Instance& inst, double D, double P, const RunConfig& cfg) {
  if (inst.perception.kind == PerceptionMeasure::Kind::kl) {
    return solve_kl(KlProblem(inst.source, inst.d, D, P), cfg.solver);
  }
  CostMatrix cost = inst.perception.kind == PerceptionMeasure::Kind::tv
                        ? CostMatrix::tv(inst.d.d.cols)
                        : *inst.perception.cost;
  OtProblem prob(inst.source, inst.d, std::move(cost), D, P, cfg.epsilon);
  if (cfg.eps_stages.empty()) return solve_ot(prob, cfg.solver);
  return solve_ot_continuation(prob, cfg.solver, cfg.eps_stages).back();
}

int run_solve(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    if (!cfg.D || !cfg.P) throw ConfigError("solve needs --D and --P (or a preset P)");
    const Instance inst = build_instance(cfg);
    RecordSink sink(cfg, out);

    RdpSolution sol;
    bool hard_failure = false;
    std::string failure_note;
    try {
      sol = solve_instance(inst, *cfg.D, *cfg.P, cfg);
    } catch (const InfeasibleError& e) {
      hard_failure = true;
      failure_note = e.what();
      sol.rate_nats = std::nan("");
      sol.achieved_distortion = std::nan("");
      sol.achieved_perception = std::nan("");
      sol.converged = false;
    }

    const io::ResultRecord rec = io::make_record(*cfg.D, *cfg.P, sol, cfg.seed);
    if (cfg.format == "csv")
      sink.stream() << io::csv_header() << '\n' << io::csv_row(rec) << '\n';
    else
      sink.stream() << io::record_to_json(rec) << '\n';
    if (!cfg.trace_path.empty()) io::write_trace_tsv_file(cfg.trace_path, sol.trace);

    if (hard_failure) {
      err << "solver failed: " << failure_note << '\n';
      return 3;
    }
    if (!sol.converged) {
      err << "solver did not converge within the iteration budget\n";
      return 3;
    }
    return 0;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return 3;
  }
}

int run_sweep(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    if (cfg.D_grid.empty() && cfg.P_grid.empty())
      throw ConfigError("sweep needs --D-grid and/or --P-grid");
    std::vector<double> Ds, Ps;
    if (!cfg.D_grid.empty()) {
      Ds = parse_grid(cfg.D_grid);
    } else if (cfg.D) {
      Ds = {*cfg.D};
    } else {
      throw ConfigError("sweep without --D-grid needs --D");
    }
    if (!cfg.P_grid.empty()) {
      Ps = parse_grid(cfg.P_grid);
    } else if (cfg.P) {
      Ps = {*cfg.P};
    } else {
      throw ConfigError("sweep without --P-grid needs --P (or a preset P)");
    }

    const Instance inst = build_instance(cfg);
    RecordSink sink(cfg, out);

    std::vector<io::ResultRecord> records;
    int warnings = 0;
    for (double D : Ds) {      // row-major: D outer, P inner
      for (double P : Ps) {
        io::ResultRecord rec;
        try {
          const RdpSolution sol = solve_instance(inst, D, P, cfg);
          rec = io::make_record(D, P, sol, cfg.seed);
          if (!sol.converged) ++warnings;
        } catch (const Error& e) {
          rec.D = D;
          rec.P = P;
          rec.rate_nats = rec.rate_bits = std::nan("");
          rec.achieved_distortion = rec.achieved_perception = std::nan("");
          rec.converged = false;
          rec.seed = cfg.seed;
          ++warnings;
          err << "cell D=" << io::format_double(D) << " P=" << io::format_double(P)
              << " failed: " << e.what() << '\n';
        }
        records.push_back(std::move(rec));
      }
    }

    if (cfg.format == "json") {
      sink.stream() << '[';
      for (std::size_t k = 0; k < records.size(); ++k)
        sink.stream() << (k ? "," : "") << io::record_to_json(records[k]);
      sink.stream() << "]\n";
    } else {
      sink.stream() << io::csv_header() << '\n';
      for (const auto& rec : records) sink.stream() << io::csv_row(rec) << '\n';
    }

    if (cfg.check_monotone) {
      int violations = 0;
      // rate must be non-increasing in D for fixed P, and in P for fixed D
      for (std::size_t ip = 0; ip < Ps.size(); ++ip)
        for (std::size_t id = 1; id < Ds.size(); ++id) {
          const auto& prev = records[(id - 1) * Ps.size() + ip];
          const auto& cur = records[id * Ps.size() + ip];
          if (cur.rate_nats > prev.rate_nats + 1e-9) ++violations;
        }
      for (std::size_t id = 0; id < Ds.size(); ++id)
        for (std::size_t ip = 1; ip < Ps.size(); ++ip) {
          const auto& prev = records[id * Ps.size() + ip - 1];
          const auto& cur = records[id * Ps.size() + ip];
          if (cur.rate_nats > prev.rate_nats + 1e-9) ++violations;
        }
      if (violations > 0)
        err << "monotonicity check: " << violations << " violation(s)\n";
      else
        err << "monotonicity check: ok\n";
    }

    if (warnings > 0) err << warnings << " cell(s) did not converge\n";
    return 0;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return 3;
  }
}

int run_oracle(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    if (!cfg.D || !cfg.P) throw ConfigError("oracle needs --D and --P (or a preset P)");
    const Instance inst = build_instance(cfg);
    const std::size_t m = inst.d.d.rows, n = inst.d.d.cols;
    if (m * (n - 1) > 8)
      throw ConfigError("oracle instance too large: M (N-1) must be <= 8");

    OracleConfig ocfg;
    ocfg.seed = cfg.seed;
    const double oracle_value =
        brute_force_rdp(inst.source, inst.d, inst.perception, *cfg.D, *cfg.P, ocfg);
    const RdpSolution sol = solve_instance(inst, *cfg.D, *cfg.P, cfg);

    RecordSink sink(cfg, out);
    ordered_json j;
    j["D"] = *cfg.D;
    j["P"] = *cfg.P;
    j["solver_rate_nats"] = sol.rate_nats;
    j["oracle_rate_nats"] = oracle_value;
    j["abs_diff"] = std::abs(sol.rate_nats - oracle_value);
    j["converged"] = sol.converged;
    j["seed"] = cfg.seed;
    sink.stream() << j.dump() << '\n';
    return sol.converged ? 0 : 3;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return 3;
  }
}

int run_discretize(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    RunConfig local = cfg;
    apply_preset(local);
    const auto parts = split(local.source, ':');
    if (parts.size() != 2 || parts[0] != "gaussian")
      throw ConfigError("discretize needs --source gaussian:mu,sigma,S,delta");
    const auto nums = split(parts[1], ',');
    if (nums.size() != 4) throw ConfigError("gaussian source needs mu,sigma,S,delta");
    GaussianSpec spec;
    spec.mu = parse_double(nums[0], "gaussian mu");
    spec.sigma = parse_double(nums[1], "gaussian sigma");
    spec.S = parse_double(nums[2], "gaussian S");
    spec.delta = parse_double(nums[3], "gaussian delta");

    double truncated = 0.0;
    const DiscreteSource src = discretize_gaussian(spec, &truncated);

    RecordSink sink(cfg, out);
    ordered_json j;
    j["points"] = src.points;
    j["p"] = src.p;
    ordered_json meta;
    meta["N"] = src.size();
    meta["spacing"] = spec.delta;
    meta["truncated_mass"] = truncated;
    meta["renormalized"] = true;
    j["meta"] = meta;
    sink.stream() << j.dump() << '\n';
    return 0;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return 3;
  }
}

}  // namespace rdp::cli
