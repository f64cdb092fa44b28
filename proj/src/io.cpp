#include "rdp/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include <json.hpp>

namespace rdp::io {

namespace {

using ordered_json = nlohmann::ordered_json;

ordered_json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open file: " + path);
  ordered_json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ConfigError("invalid JSON in " + path + ": " + e.what());
  }
  return j;
}

std::vector<double> as_double_vector(const ordered_json& j, const char* field) {
  if (!j.is_array()) throw ConfigError(std::string(field) + " must be a JSON array");
  std::vector<double> out;
  out.reserve(j.size());
  for (const auto& v : j) {
    if (!v.is_number()) throw ConfigError(std::string(field) + " must contain numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

DiscreteSource read_source_json(const std::string& path) {
  const ordered_json j = load_json_file(path);
  if (!j.contains("points") || !j.contains("p"))
    throw ConfigError("source file needs \"points\" and \"p\" arrays: " + path);
  return DiscreteSource(as_double_vector(j["points"], "points"),
                        as_double_vector(j["p"], "p"));
}

std::string source_to_json(const DiscreteSource& src) {
  ordered_json j;
  j["points"] = src.points;
  j["p"] = src.p;
  return j.dump();
}

Mat read_matrix_json(const std::string& path) {
  const ordered_json j = load_json_file(path);
  if (!j.contains("rows") || !j.contains("cols") || !j.contains("data"))
    throw ConfigError("matrix file needs \"rows\", \"cols\" and \"data\": " + path);
  Mat m;
  m.rows = j["rows"].get<std::size_t>();
  m.cols = j["cols"].get<std::size_t>();
  m.data = as_double_vector(j["data"], "data");
  if (m.data.size() != m.rows * m.cols)
    throw ConfigError("matrix data length does not match rows*cols: " + path);
  return m;
}

std::string matrix_to_json(const Mat& m) {
  ordered_json j;
  j["rows"] = m.rows;
  j["cols"] = m.cols;
  j["data"] = m.data;
  return j.dump();
}

ResultRecord make_record(double D, double P, const RdpSolution& sol, std::uint64_t seed) {
  ResultRecord rec;
  rec.D = D;
  rec.P = P;
  rec.rate_nats = sol.rate_nats;
  rec.rate_bits = sol.rate_nats / std::log(2.0);
  rec.achieved_distortion = sol.achieved_distortion;
  rec.achieved_perception = sol.achieved_perception;
  rec.outer_iters = sol.outer_iters;
  rec.converged = sol.converged;
  rec.duals = sol.duals;
  rec.seed = seed;
  return rec;
}

std::string record_to_json(const ResultRecord& rec) {
  ordered_json j;
  j["D"] = rec.D;
  j["P"] = rec.P;
  j["rate_nats"] = rec.rate_nats;
  j["rate_bits"] = rec.rate_bits;
  j["achieved_distortion"] = rec.achieved_distortion;
  j["achieved_perception"] = rec.achieved_perception;
  j["outer_iters"] = rec.outer_iters;
  j["converged"] = rec.converged;
  ordered_json duals;
  for (const auto& [k, v] : rec.duals) duals[k] = v;
  j["duals"] = duals;
  j["seed"] = rec.seed;
  return j.dump();
}

std::string csv_header() {
  return "D,P,rate_nats,rate_bits,achieved_distortion,achieved_perception,outer_iters,"
         "converged";
}

std::string csv_row(const ResultRecord& rec) {
  std::ostringstream os;
  os << format_double(rec.D) << ',' << format_double(rec.P) << ','
     << format_double(rec.rate_nats) << ',' << format_double(rec.rate_bits) << ','
     << format_double(rec.achieved_distortion) << ','
     << format_double(rec.achieved_perception) << ',' << rec.outer_iters << ','
     << (rec.converged ? "true" : "false");
  return os.str();
}

void write_trace_tsv(std::ostream& out, const ConvergenceTrace& trace) {
  out << "iter\tobjective\tdistortion\tperception\n";
  for (std::size_t k = 0; k < trace.rows.size(); ++k) {
    const TraceRow& row = trace.rows[k];
    out << (k + 1) << '\t' << format_double(row.objective) << '\t'
        << format_double(row.distortion) << '\t' << format_double(row.perception) << '\n';
  }
}

void write_trace_tsv_file(const std::string& path, const ConvergenceTrace& trace) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open trace file for writing: " + path);
  write_trace_tsv(out, trace);
}

}  // namespace rdp::io
