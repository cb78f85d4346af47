#pragma once

#include <Eigen/Core>
#include <json.hpp>
#include <string>

#include "poissparse/model.hpp"
#include "poissparse/sensing.hpp"

namespace psr {

// {"base_rates": [...], "matrix": [[...], ...]}
nlohmann::json model_to_json(const AffineRateModel& model);
AffineRateModel model_from_json(const nlohmann::json& j);
AffineRateModel load_model(const std::string& path);

nlohmann::json matrix_spec_to_json(const MatrixSpec& spec);
MatrixSpec matrix_spec_from_json(const nlohmann::json& j);

// One row per line, comma-separated decimals.
std::string matrix_to_csv(const Eigen::MatrixXd& m);
Eigen::MatrixXd matrix_from_csv(const std::string& text);
Eigen::MatrixXd load_matrix_csv(const std::string& path);

// Column vector from CSV: one value per line (or a single comma row).
Eigen::VectorXd load_vector_csv(const std::string& path);

// Shortest round-trippable decimal representation; used everywhere a
// number is written so equal configs yield byte-identical files.
std::string format_double(double x);

void write_file(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

}  // namespace psr
