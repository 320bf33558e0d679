#include "mrk/io.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include <openssl/evp.h>

namespace mrk::io {

namespace {

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  return out;
}

std::ifstream open_in(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read '" + path.string() + "'");
  return in;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
    out.push_back(cell);
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_double(const std::string& cell, const fs::path& path, std::size_t line_no) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc{} || ptr != cell.data() + cell.size()) {
    std::ostringstream os;
    os << path.string() << ":" << line_no << ": '" << cell << "' is not a number";
    throw std::runtime_error(os.str());
  }
  return v;
}

void write_row(std::ostream& out, const Eigen::Ref<const Eigen::RowVectorXd>& v) {
  for (Eigen::Index j = 0; j < v.size(); ++j) {
    if (j) out << ',';
    out << format_double(v(j));
  }
}

}  // namespace

std::string format_double(double v) {
  std::array<char, 32> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  if (ec != std::errc{}) throw std::runtime_error("number formatting failed");
  return std::string(buf.data(), ptr);
}

void write_system_csv(const fs::path& path, const LinearSystem& system) {
  auto out = open_out(path);
  for (std::size_t j = 0; j < system.cols(); ++j) out << (j ? ",f" : "f") << j + 1;
  out << ",b";
  const bool labeled = system.labels().has_value();
  if (labeled) out << ",label";
  out << '\n';
  for (std::size_t i = 0; i < system.rows(); ++i) {
    write_row(out, system.row(i));
    out << ',' << format_double(system.rhs(i));
    if (labeled) out << ',' << (*system.labels())[i];
    out << '\n';
  }
}

void write_solutions(const fs::path& path, const std::vector<Vector>& solutions) {
  auto out = open_out(path);
  for (const auto& x : solutions) {
    write_row(out, x.transpose());
    out << '\n';
  }
}

std::vector<Vector> read_solutions(const fs::path& path) {
  auto in = open_in(path);
  std::vector<Vector> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto cells = split(line);
    Vector x(static_cast<Eigen::Index>(cells.size()));
    for (std::size_t j = 0; j < cells.size(); ++j) {
      x(static_cast<Eigen::Index>(j)) = parse_double(cells[j], path, line_no);
    }
    out.push_back(std::move(x));
  }
  if (out.empty()) throw std::runtime_error("solutions file '" + path.string() + "' is empty");
  return out;
}

fs::path solutions_path_for(const fs::path& system_path) {
  auto p = system_path;
  p.replace_extension();
  return fs::path(p.string() + ".solutions.csv");
}

LinearSystem read_system_csv(const fs::path& path, const std::optional<fs::path>& solutions_path) {
  auto in = open_in(path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("system file '" + path.string() + "' is empty");
  const auto header = split(line);
  std::size_t features = 0;
  while (features < header.size() && header[features] == "f" + std::to_string(features + 1)) ++features;
  const bool has_b = features < header.size() && header[features] == "b";
  const bool labeled = has_b && features + 1 < header.size() && header[features + 1] == "label";
  if (features == 0 || !has_b || header.size() != features + 1 + (labeled ? 1 : 0)) {
    throw std::runtime_error(path.string() + ":1: header must be f1,..,fd,b[,label]");
  }

  std::vector<double> values;
  std::vector<double> rhs;
  std::vector<std::size_t> labels;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto cells = split(line);
    if (cells.size() != header.size()) {
      std::ostringstream os;
      os << path.string() << ":" << line_no << ": " << cells.size() << " columns, expected "
         << header.size();
      throw std::runtime_error(os.str());
    }
    for (std::size_t j = 0; j < features; ++j) values.push_back(parse_double(cells[j], path, line_no));
    rhs.push_back(parse_double(cells[features], path, line_no));
    if (labeled) {
      std::size_t label = 0;
      const auto& cell = cells[features + 1];
      const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), label);
      if (ec != std::errc{} || ptr != cell.data() + cell.size()) {
        std::ostringstream os;
        os << path.string() << ":" << line_no << ": label '" << cell << "' is not a class index";
        throw std::runtime_error(os.str());
      }
      labels.push_back(label);
    }
  }
  const auto m = static_cast<Eigen::Index>(rhs.size());
  if (m == 0) throw std::runtime_error("system file '" + path.string() + "' has no rows");
  Matrix matrix = Eigen::Map<const Matrix>(values.data(), m, static_cast<Eigen::Index>(features));
  Vector b = Eigen::Map<const Vector>(rhs.data(), m);

  std::optional<std::vector<Vector>> solutions;
  if (solutions_path) solutions = read_solutions(*solutions_path);
  std::optional<std::vector<std::size_t>> label_opt;
  if (labeled) label_opt = std::move(labels);
  return LinearSystem(std::move(matrix), std::move(b), std::move(label_opt), std::move(solutions));
}

nlohmann::json metadata_to_json(const TraceMetadata& meta) {
  nlohmann::json j = {
      {"method", meta.method},
      {"seed", meta.seed},
      {"rng", meta.rng_algorithm},
      {"swap_probability", meta.swap_probability},
      {"iterations", meta.iterations},
      {"distribution", meta.distribution},
      {"tie_break", meta.tie_break},
      {"system", meta.system},
      {"rows", meta.rows},
      {"cols", meta.cols},
      {"iterates", meta.iterate_count},
      {"solutions", meta.solution_count},
      {"labeling", meta.labeling},
      {"residual_not_vanishing", meta.residual_not_vanishing},
  };
  if (meta.final_max_residual) j["final_max_residual"] = *meta.final_max_residual;
  if (meta.empirical_mistake_rate) j["empirical_mistake_rate"] = *meta.empirical_mistake_rate;
  return j;
}

TraceMetadata metadata_from_json(const nlohmann::json& j) {
  TraceMetadata meta;
  meta.method = j.at("method").get<std::string>();
  meta.seed = j.at("seed").get<std::uint64_t>();
  meta.rng_algorithm = j.at("rng").get<std::string>();
  meta.swap_probability = j.at("swap_probability").get<double>();
  meta.iterations = j.at("iterations").get<std::size_t>();
  meta.distribution = j.at("distribution").get<std::string>();
  meta.tie_break = j.at("tie_break").get<std::string>();
  meta.system = j.at("system").get<std::string>();
  meta.rows = j.at("rows").get<std::size_t>();
  meta.cols = j.at("cols").get<std::size_t>();
  meta.iterate_count = j.at("iterates").get<std::size_t>();
  meta.solution_count = j.at("solutions").get<std::size_t>();
  meta.labeling = j.at("labeling").get<std::vector<std::size_t>>();
  meta.residual_not_vanishing = j.at("residual_not_vanishing").get<bool>();
  if (j.contains("final_max_residual")) meta.final_max_residual = j["final_max_residual"].get<double>();
  if (j.contains("empirical_mistake_rate")) {
    meta.empirical_mistake_rate = j["empirical_mistake_rate"].get<double>();
  }
  return meta;
}

nlohmann::json step_to_json(const StepRecord& step, const double* errors, std::size_t width) {
  nlohmann::json j = {
      {"k", step.step},
      {"i_k", step.sampled_row},
      {"s_k", step.argmin_iterate},
      {"t_k", step.target_iterate},
      {"c", step.coefficients},
      {"mag", step.update_magnitude},
      {"swap", step.swap_triggered},
  };
  if (errors) j["err"] = std::vector<double>(errors, errors + width);
  return j;
}

void write_trace_jsonl(std::ostream& out, const Trace& trace) {
  nlohmann::json header = {{"meta", metadata_to_json(trace.meta)}};
  if (trace.errors) header["initial_err"] = trace.initial_errors;
  out << header.dump() << '\n';
  const std::size_t width = trace.errors ? trace.errors->width() : 0;
  for (std::size_t k = 0; k < trace.steps.size(); ++k) {
    const double* err = trace.errors ? (*trace.errors)[k].data() : nullptr;
    out << step_to_json(trace.steps[k], err, width).dump() << '\n';
  }
}

void write_trace_jsonl(const fs::path& path, const Trace& trace) {
  auto out = open_out(path);
  write_trace_jsonl(out, trace);
}

ParsedTrace read_trace_jsonl(std::istream& in) {
  ParsedTrace out;
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("trace is empty");
  const auto header = nlohmann::json::parse(line);
  out.meta = metadata_from_json(header.at("meta"));
  if (header.contains("initial_err")) {
    out.initial_errors = header["initial_err"].get<std::vector<double>>();
  }
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw std::runtime_error("trace line " + std::to_string(line_no) + ": " + e.what());
    }
    StepRecord rec;
    rec.step = j.at("k").get<std::size_t>();
    rec.sampled_row = j.at("i_k").get<std::size_t>();
    rec.argmin_iterate = j.at("s_k").get<std::size_t>();
    rec.target_iterate = j.at("t_k").get<std::size_t>();
    rec.coefficients = j.at("c").get<std::vector<double>>();
    rec.update_magnitude = j.at("mag").get<double>();
    rec.swap_triggered = j.at("swap").get<bool>();
    if (j.contains("err")) {
      const auto err = j["err"].get<std::vector<double>>();
      if (!out.errors) out.errors.emplace(err.size());
      out.errors->push_back(err);
    }
    out.steps.push_back(std::move(rec));
  }
  return out;
}

ParsedTrace read_trace_jsonl(const fs::path& path) {
  auto in = open_in(path);
  return read_trace_jsonl(in);
}

void write_summary_csv(const fs::path& path, const Trace& trace) {
  auto out = open_out(path);
  const std::size_t width = trace.errors ? trace.errors->width() : trace.meta.iterate_count;
  out << "iteration";
  for (std::size_t i = 0; i < width; ++i) out << ",err_" << i;
  out << '\n';
  if (!trace.errors) return;
  auto emit = [&](std::size_t k, std::span<const double> row) {
    out << k;
    for (double v : row) out << ',' << format_double(v);
    out << '\n';
  };
  emit(0, trace.initial_errors);
  for (std::size_t k = 0; k < trace.errors->size(); ++k) emit(k + 1, (*trace.errors)[k]);
}

void write_aggregate_csv(const fs::path& path, const AggregateSeries& aggregate) {
  auto out = open_out(path);
  out << "iteration";
  for (std::size_t i = 0; i < aggregate.iterate_count; ++i) {
    out << ",median_" << i << ",q25_" << i << ",q75_" << i;
  }
  out << '\n';
  for (std::size_t k = 0; k < aggregate.median.size(); ++k) {
    out << k;
    for (std::size_t i = 0; i < aggregate.iterate_count; ++i) {
      out << ',' << format_double(aggregate.median[k][i]) << ',' << format_double(aggregate.q25[k][i])
          << ',' << format_double(aggregate.q75[k][i]);
    }
    out << '\n';
  }
}

void write_trajectory_csv(const fs::path& path, const std::vector<Vector>& initial,
                          const std::vector<std::vector<Vector>>& trajectory) {
  auto out = open_out(path);
  out << "step";
  for (std::size_t i = 0; i < initial.size(); ++i) {
    for (Eigen::Index j = 0; j < initial[i].size(); ++j) out << ",x" << i << "_" << j + 1;
  }
  out << '\n';
  auto emit = [&](std::size_t k, const std::vector<Vector>& xs) {
    out << k;
    for (const auto& x : xs) {
      for (Eigen::Index j = 0; j < x.size(); ++j) out << ',' << format_double(x(j));
    }
    out << '\n';
  };
  emit(0, initial);
  for (std::size_t k = 0; k < trajectory.size(); ++k) emit(k + 1, trajectory[k]);
}

std::string sha256_file(const fs::path& path) {
  auto in = open_in(path);
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("sha256 initialisation failed");
  }
  std::array<char, 1 << 16> buf{};
  while (in) {
    in.read(buf.data(), buf.size());
    if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), digest.data(), &len);
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) {
    os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  }
  return os.str();
}

}  // namespace mrk::io
