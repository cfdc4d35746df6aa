#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include <json.hpp>

#include "sgeo/covariance.hpp"

namespace sgeo {

/// Parses JSON text; syntax errors raise InputError with line and column.
nlohmann::json parse_json_text(const std::string& text, const std::string& source);
std::string read_text_file(const std::filesystem::path& path);

/// Parses a covariance model from its JSON form. Syntax errors and schema
/// violations raise InputError with the line/column of the offending token
/// where it can be located; shape and symmetry problems raise DomainError.
CovModel parse_model_json(const std::string& text, const std::string& source);
CovModel read_model_json(const std::filesystem::path& path);

/// Object form used by the parser above.
CovModel model_from_json(const nlohmann::json& j, const std::string& source);
nlohmann::json model_to_json(const CovModel& model);

nlohmann::json correlation_to_json(const CorrelationFunction& rho);
nlohmann::json matrix_to_json(const Eigen::MatrixXd& m);

}  // namespace sgeo
