#include "fdpv/io.hpp"

#include <nlohmann/json.hpp>

#include <charconv>
#include <fstream>
#include <sstream>

namespace fdpv::io {

using nlohmann::json;

namespace {

std::string read_file(const std::string& filename) {
  std::ifstream in(filename);
  if (!in) throw ParseError("cannot open '" + filename + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& filename, const std::string& text) {
  std::ofstream out(filename);
  if (!out) throw std::runtime_error("cannot write '" + filename + "'");
  out << text;
}

bool parse_double(std::string_view sv, double& out) {
  const char* first = sv.data();
  const char* last = sv.data() + sv.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc{} && ptr == last;
}

std::string_view trim(std::string_view sv) {
  while (!sv.empty() && (sv.front() == ' ' || sv.front() == '\t' || sv.front() == '\r'))
    sv.remove_prefix(1);
  while (!sv.empty() && (sv.back() == ' ' || sv.back() == '\t' || sv.back() == '\r'))
    sv.remove_suffix(1);
  return sv;
}

}  // namespace

Eigen::ArrayXd read_path_csv(const std::string& filename) {
  std::ifstream in(filename);
  if (!in) throw ParseError("cannot open '" + filename + "'");
  std::vector<double> values;
  std::string line;
  long lineno = 0;
  bool first_data_line = true;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view sv = trim(line);
    if (sv.empty() || sv.front() == '#') continue;
    double v;
    if (!parse_double(sv, v)) {
      if (first_data_line) {  // one header line tolerated
        first_data_line = false;
        continue;
      }
      throw ParseError(filename + ":" + std::to_string(lineno) +
                       ": not a number: '" + std::string(sv) + "'");
    }
    first_data_line = false;
    values.push_back(v);
  }
  return Eigen::Map<Eigen::ArrayXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

void write_path_csv(const std::string& filename,
                    const Eigen::Ref<const Eigen::ArrayXd>& path,
                    std::optional<std::uint64_t> seed) {
  std::ofstream out(filename);
  if (!out) throw std::runtime_error("cannot write '" + filename + "'");
  if (seed) out << "# seed=" << *seed << "\n";
  out.precision(17);
  for (Eigen::Index i = 0; i < path.size(); ++i) out << path[i] << "\n";
}

PiecewiseModel read_model_json(const std::string& filename) {
  json doc;
  try {
    doc = json::parse(read_file(filename));
  } catch (const json::parse_error& e) {
    throw ParseError(filename + ": " + e.what());
  }
  if (!doc.contains("segments") || !doc["segments"].is_array())
    throw ParseError(filename + ": missing 'segments' array");
  PiecewiseModel model;
  for (const auto& s : doc["segments"]) {
    SegmentSpec spec;
    try {
      spec.hurst = s.at("hurst").get<double>();
      spec.scale = s.value("scale", 1.0);
      spec.length = s.at("length").get<Eigen::Index>();
    } catch (const json::exception& e) {
      throw ParseError(filename + ": segment " +
                       std::to_string(model.segments.size()) + ": " + e.what());
    }
    model.segments.push_back(spec);
  }
  try {
    model.validate();
  } catch (const std::exception& e) {
    throw ParseError(filename + ": " + e.what());
  }
  return model;
}

void write_model_json(const std::string& filename, const PiecewiseModel& model) {
  json doc;
  doc["segments"] = json::array();
  for (const auto& s : model.segments)
    doc["segments"].push_back({{"hurst", s.hurst}, {"scale", s.scale}, {"length", s.length}});
  write_file(filename, doc.dump(2) + "\n");
}

std::string variance_table_to_json(const VarianceTable& table) {
  json doc;
  doc["mode"] = table.mode;
  if (table.mode == "mc") {
    doc["n"] = table.series_length;
    doc["replicates"] = table.replicates;
  } else {
    doc["truncation"] = table.truncation;
    doc["pool"] = table.pool_size;
  }
  doc["seed"] = table.seed;
  doc["grid"] = json::array();
  for (const auto& [h, s2] : table.grid) doc["grid"].push_back({h, s2});
  return doc.dump(2) + "\n";
}

VarianceTable variance_table_from_json(const std::string& text) {
  json doc = json::parse(text);
  VarianceTable table;
  table.mode = doc.at("mode").get<std::string>();
  table.series_length = doc.value("n", 0);
  table.replicates = doc.value("replicates", 0);
  table.truncation = doc.value("truncation", 0);
  table.pool_size = doc.value("pool", 0L);
  table.seed = doc.value("seed", 0ULL);
  for (const auto& row : doc.at("grid"))
    table.grid.emplace_back(row.at(0).get<double>(), row.at(1).get<double>());
  return table;
}

VarianceTable read_variance_table(const std::string& filename) {
  try {
    return variance_table_from_json(read_file(filename));
  } catch (const json::exception& e) {
    throw ParseError(filename + ": " + e.what());
  }
}

void write_variance_table(const std::string& filename, const VarianceTable& table) {
  write_file(filename, variance_table_to_json(table));
}

std::string report_to_json(const ChangePointReport& report) {
  json doc;
  const DetectorConfig& c = report.config;
  doc["config"] = {{"window", c.window},
                   {"p1_star", c.p1_star},
                   {"p2_star", c.p2_star},
                   {"threshold_mode", c.threshold_mode},
                   {"mc_replicates", c.mc_replicates},
                   {"min_separation", c.effective_min_separation()},
                   {"seed", c.seed}};
  if (c.threshold_override) doc["config"]["threshold_override"] = *c.threshold_override;
  doc["threshold_used"] = report.threshold_used;
  doc["hurst_null"] = report.hurst_null;
  doc["potential"] = json::array();
  for (const auto& p : report.potential) doc["potential"].push_back({p.index, p.height});
  doc["retained"] = json::array();
  for (const auto& r : report.retained) doc["retained"].push_back({r.index, r.p_value});
  doc["segments"] = json::array();
  for (const auto& s : report.segment_estimates)
    doc["segments"].push_back({{"start", s.start},
                               {"end", s.end},
                               {"hurst", s.estimate.hurst},
                               {"std_error", s.estimate.std_error},
                               {"clamped", s.estimate.clamped}});
  doc["timing"] = {{"calibration_ms", report.calibration_ms},
                   {"detection_ms", report.detection_ms}};
  return doc.dump(2) + "\n";
}

void write_report(const std::string& filename, const ChangePointReport& report) {
  write_file(filename, report_to_json(report));
}

void write_truth_json(const std::string& filename, const PiecewiseModel& model,
                      const std::vector<Eigen::Index>& change_indices) {
  json doc;
  doc["change_indices"] = change_indices;
  doc["segments"] = json::array();
  for (const auto& s : model.segments)
    doc["segments"].push_back({{"hurst", s.hurst}, {"scale", s.scale}, {"length", s.length}});
  write_file(filename, doc.dump(2) + "\n");
}

}  // namespace fdpv::io
