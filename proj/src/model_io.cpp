#include "sgeo/model_io.hpp"

#include <fstream>
#include <sstream>

#include "sgeo/error.hpp"

namespace sgeo {

using nlohmann::json;

namespace {

[[noreturn]] void schema_error(const std::string& source, const std::string& path, const std::string& what) {
  throw InputError(source + ": " + path + ": " + what);
}

const json& member(const json& obj, const char* key, const std::string& source, const std::string& path) {
  if (!obj.is_object()) schema_error(source, path, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) schema_error(source, path, std::string("missing key '") + key + "'");
  return *it;
}

double number(const json& v, const std::string& source, const std::string& path) {
  if (!v.is_number()) schema_error(source, path, "expected a number");
  return v.get<double>();
}

Eigen::MatrixXd matrix(const json& v, const std::string& source, const std::string& path) {
  if (!v.is_array() || v.empty()) schema_error(source, path, "expected a non-empty array of rows");
  const auto rows = static_cast<Eigen::Index>(v.size());
  Eigen::Index cols = -1;
  Eigen::MatrixXd m;
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto& row = v[static_cast<std::size_t>(i)];
    const std::string row_path = path + "[" + std::to_string(i) + "]";
    if (!row.is_array()) schema_error(source, row_path, "expected an array");
    if (cols < 0) {
      cols = static_cast<Eigen::Index>(row.size());
      m.resize(rows, cols);
    } else if (static_cast<Eigen::Index>(row.size()) != cols) {
      schema_error(source, row_path, "ragged matrix row");
    }
    for (Eigen::Index j = 0; j < cols; ++j) {
      m(i, j) = number(row[static_cast<std::size_t>(j)], source, row_path + "[" + std::to_string(j) + "]");
    }
  }
  return m;
}

CorrelationFunction correlation(const json& v, const std::string& source, const std::string& path) {
  const auto& fam = member(v, "family", source, path);
  if (!fam.is_string()) schema_error(source, path + ".family", "expected a string");
  const double range = number(member(v, "range", source, path), source, path + ".range");
  double nugget = 0.0;
  if (auto it = v.find("nugget_fraction"); it != v.end()) nugget = number(*it, source, path + ".nugget_fraction");
  try {
    return CorrelationFunction(parse_family(fam.get<std::string>()), range, nugget);
  } catch (const DomainError& e) {
    schema_error(source, path, e.what());
  }
}

std::pair<std::size_t, std::size_t> line_column(const std::string& text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t column = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return {line, column};
}

}  // namespace

CovModel model_from_json(const json& j, const std::string& source) {
  const auto& variant = member(j, "variant", source, "$");
  if (!variant.is_string()) schema_error(source, "$.variant", "expected a string");
  const auto name = variant.get<std::string>();
  if (name == "proportional") {
    auto sigma = matrix(member(j, "sigma", source, "$"), source, "$.sigma");
    auto rho = correlation(member(j, "rho", source, "$"), source, "$.rho");
    return CovModel::proportional(std::move(sigma), rho);
  }
  if (name == "lmc") {
    const auto& terms = member(j, "terms", source, "$");
    if (!terms.is_array() || terms.empty()) schema_error(source, "$.terms", "expected a non-empty array");
    std::vector<LmcTerm> out;
    for (std::size_t t = 0; t < terms.size(); ++t) {
      const std::string path = "$.terms[" + std::to_string(t) + "]";
      auto sigma = matrix(member(terms[t], "sigma", source, path), source, path + ".sigma");
      auto rho = correlation(member(terms[t], "rho", source, path), source, path + ".rho");
      out.push_back({std::move(sigma), rho});
    }
    return CovModel::lmc(std::move(out));
  }
  schema_error(source, "$.variant", "unknown variant '" + name + "' (expected proportional or lmc)");
}

json parse_json_text(const std::string& text, const std::string& source) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    const auto [line, column] = line_column(text, e.byte > 0 ? e.byte - 1 : 0);
    std::ostringstream msg;
    msg << source << ":" << line << ":" << column << ": malformed JSON";
    throw InputError(msg.str(), line, column);
  }
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

CovModel parse_model_json(const std::string& text, const std::string& source) {
  return model_from_json(parse_json_text(text, source), source);
}

CovModel read_model_json(const std::filesystem::path& path) {
  return parse_model_json(read_text_file(path), path.string());
}

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

json correlation_to_json(const CorrelationFunction& rho) {
  return {{"family", std::string(to_string(rho.family()))},
          {"range", rho.range()},
          {"nugget_fraction", rho.nugget_fraction()}};
}

json model_to_json(const CovModel& model) {
  if (const auto* prop = std::get_if<ProportionalModel>(&model.variant())) {
    return {{"variant", "proportional"}, {"sigma", matrix_to_json(prop->sigma)}, {"rho", correlation_to_json(prop->rho)}};
  }
  json terms = json::array();
  for (const auto& t : std::get<LmcModel>(model.variant()).terms) {
    terms.push_back({{"sigma", matrix_to_json(t.sigma)}, {"rho", correlation_to_json(t.rho)}});
  }
  return {{"variant", "lmc"}, {"terms", std::move(terms)}};
}

}  // namespace sgeo
