#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>

#include "fdpv/detector.hpp"
#include "fdpv/fgn.hpp"
#include "fdpv/ibs.hpp"

namespace fdpv::io {

// Thrown on malformed input files; carries a line/field diagnostic.
struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Single-column CSV; '#' comment lines ignored, one optional non-numeric
/// header line allowed. Locale-independent.
Eigen::ArrayXd read_path_csv(const std::string& filename);
void write_path_csv(const std::string& filename,
                    const Eigen::Ref<const Eigen::ArrayXd>& path,
                    std::optional<std::uint64_t> seed = std::nullopt);

/// Model JSON: {"segments":[{"hurst":0.6,"scale":1.0,"length":20000},...]}.
PiecewiseModel read_model_json(const std::string& filename);
void write_model_json(const std::string& filename, const PiecewiseModel& model);

std::string variance_table_to_json(const VarianceTable& table);
VarianceTable variance_table_from_json(const std::string& text);
VarianceTable read_variance_table(const std::string& filename);
void write_variance_table(const std::string& filename, const VarianceTable& table);

std::string report_to_json(const ChangePointReport& report);
void write_report(const std::string& filename, const ChangePointReport& report);

void write_truth_json(const std::string& filename, const PiecewiseModel& model,
                      const std::vector<Eigen::Index>& change_indices);

}  // namespace fdpv::io
