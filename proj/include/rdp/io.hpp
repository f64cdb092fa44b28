#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>

#include "rdp/types.hpp"

namespace rdp::io {

/// Shortest round-trip decimal form of a double ("inf"/"nan" spelled out).
std::string format_double(double v);

/// Source file: JSON {"points": [...], "p": [...]}.
DiscreteSource read_source_json(const std::string& path);
std::string source_to_json(const DiscreteSource& src);

/// Matrix file: JSON {"rows": M, "cols": N, "data": [row-major...]}.
Mat read_matrix_json(const std::string& path);
std::string matrix_to_json(const Mat& m);

/// One solve outcome, as emitted by the CLI.
struct ResultRecord {
  double D = 0.0;
  double P = 0.0;
  double rate_nats = 0.0;
  double rate_bits = 0.0;
  double achieved_distortion = 0.0;
  double achieved_perception = 0.0;
  int outer_iters = 0;
  bool converged = false;
  std::map<std::string, double> duals;
  std::uint64_t seed = 0;
};

ResultRecord make_record(double D, double P, const RdpSolution& sol, std::uint64_t seed);

std::string record_to_json(const ResultRecord& rec);
std::string csv_header();
std::string csv_row(const ResultRecord& rec);

/// Tab-separated trace, one-line header "iter\tobjective\tdistortion\tperception".
void write_trace_tsv(std::ostream& out, const ConvergenceTrace& trace);
void write_trace_tsv_file(const std::string& path, const ConvergenceTrace& trace);

}  // namespace rdp::io
