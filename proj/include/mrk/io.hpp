#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mrk/analysis.hpp"
#include "mrk/linear_system.hpp"
#include "mrk/trace.hpp"

namespace mrk::io {

namespace fs = std::filesystem;

/// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

/// Header `f1,..,fd,b[,label]`, one row per equation.
void write_system_csv(const fs::path& path, const LinearSystem& system);
/// One solution vector per line, line order = class index.
void write_solutions(const fs::path& path, const std::vector<Vector>& solutions);

std::vector<Vector> read_solutions(const fs::path& path);
/// Reads a system file and, when given, its solutions sidecar. Throws
/// std::runtime_error naming the file and line on malformed input.
LinearSystem read_system_csv(const fs::path& path,
                             const std::optional<fs::path>& solutions_path = std::nullopt);

/// Conventional sidecar name: `<stem>.solutions.csv` next to the system file.
fs::path solutions_path_for(const fs::path& system_path);

nlohmann::json metadata_to_json(const TraceMetadata& meta);
TraceMetadata metadata_from_json(const nlohmann::json& j);
nlohmann::json step_to_json(const StepRecord& step, const double* errors, std::size_t width);

/// JSON-Lines trace: a `{"meta": ..., "initial_err": [...]}` header line, then one line per step
/// `{k, i_k, s_k, t_k, c, mag, swap, err?}`.
void write_trace_jsonl(std::ostream& out, const Trace& trace);
void write_trace_jsonl(const fs::path& path, const Trace& trace);

struct ParsedTrace {
  TraceMetadata meta;
  std::vector<StepRecord> steps;
  std::optional<ErrorTable> errors;
  std::vector<double> initial_errors;
};
ParsedTrace read_trace_jsonl(std::istream& in);
ParsedTrace read_trace_jsonl(const fs::path& path);

/// `iteration,err_0,..,err_n`; row 0 is the initial state.
void write_summary_csv(const fs::path& path, const Trace& trace);
/// `iteration,median_0,q25_0,q75_0,...`; row 0 is the initial state.
void write_aggregate_csv(const fs::path& path, const AggregateSeries& aggregate);
/// `step,x0_1,..,x0_d,x1_1,..`; row 0 is the initial iterates.
void write_trajectory_csv(const fs::path& path, const std::vector<Vector>& initial,
                          const std::vector<std::vector<Vector>>& trajectory);

/// Lower-case hex SHA-256 of a file's bytes.
std::string sha256_file(const fs::path& path);

}  // namespace mrk::io
