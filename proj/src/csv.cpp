#include "sgeo/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "sgeo/error.hpp"

namespace sgeo {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(trim(std::string_view(line).substr(start, comma == std::string::npos ? std::string::npos : comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

bool parse_double(const std::string& field, double& value) {
  if (field.empty()) return false;
  const char* begin = field.data();
  const char* end = begin + field.size();
  if (*begin == '+') ++begin;
  auto [ptr, ec] = std::from_chars(begin, end, value);
  return ec == std::errc() && ptr == end && std::isfinite(value);
}

// Accepts names like "s3" and returns 3; 0 when the name does not match.
std::size_t column_index(const std::string& name, char prefix) {
  if (name.size() < 2 || name[0] != prefix) return 0;
  std::size_t idx = 0;
  auto [ptr, ec] = std::from_chars(name.data() + 1, name.data() + name.size(), idx);
  if (ec != std::errc() || ptr != name.data() + name.size()) return 0;
  return idx;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path.string() + "'");
  return in;
}

}  // namespace

CsvTable read_csv_table(std::istream& in, const std::string& source) {
  CsvTable table;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    const auto stripped = trim(line);
    if (stripped.empty() || stripped.front() == '#') continue;
    auto fields = split_fields(line);
    if (!have_header) {
      for (std::size_t c = 0; c < fields.size(); ++c) {
        if (fields[c].empty()) {
          throw InputError(source + ": line " + std::to_string(line_no) + ", column " + std::to_string(c + 1) +
                               ": empty header name",
                           line_no, c + 1);
        }
      }
      table.header = std::move(fields);
      have_header = true;
      continue;
    }
    if (fields.size() != table.header.size()) {
      std::ostringstream msg;
      msg << source << ": line " << line_no << ": expected " << table.header.size() << " fields, found "
          << fields.size();
      throw InputError(msg.str(), line_no, std::min(fields.size(), table.header.size()) + 1);
    }
    std::vector<double> row(fields.size());
    for (std::size_t c = 0; c < fields.size(); ++c) {
      if (!parse_double(fields[c], row[c])) {
        std::ostringstream msg;
        msg << source << ": line " << line_no << ", column " << c + 1 << ": not a finite number '" << fields[c]
            << "'";
        throw InputError(msg.str(), line_no, c + 1);
      }
    }
    table.rows.push_back(std::move(row));
    table.line_numbers.push_back(line_no);
  }
  if (!have_header) throw InputError(source + ": missing header line", 1, 1);
  return table;
}

CsvColumns parse_header(const CsvTable& table, char value_prefix, std::size_t min_values,
                        const std::string& source) {
  CsvColumns cols;
  std::size_t c = 0;
  const auto& h = table.header;
  while (c < h.size() && column_index(h[c], 's') == cols.sites + 1) {
    ++cols.sites;
    ++c;
  }
  while (c < h.size() && column_index(h[c], value_prefix) == cols.values + 1) {
    ++cols.values;
    ++c;
  }
  if (c != h.size()) {
    std::ostringstream msg;
    msg << source << ": line 1, column " << c + 1 << ": unexpected header name '" << h[c] << "' (expected s1..sd, "
        << value_prefix << "1.." << value_prefix << "m)";
    throw InputError(msg.str(), 1, c + 1);
  }
  if (cols.sites == 0) throw InputError(source + ": line 1: header has no site columns s1..sd", 1, 1);
  if (cols.values < min_values) {
    std::ostringstream msg;
    msg << source << ": line 1: need at least " << min_values << " '" << value_prefix << "' columns, found "
        << cols.values;
    throw InputError(msg.str(), 1, cols.sites + cols.values + 1);
  }
  return cols;
}

SiteSet sites_from_table(const CsvTable& table, const CsvColumns& cols, const std::string& source) {
  if (table.rows.empty()) throw InputError(source + ": empty dataset");
  Eigen::MatrixXd coords(static_cast<Eigen::Index>(table.rows.size()), static_cast<Eigen::Index>(cols.sites));
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    for (std::size_t j = 0; j < cols.sites; ++j) {
      coords(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = table.rows[i][j];
    }
  }
  try {
    return SiteSet(std::move(coords));
  } catch (const DomainError& e) {
    throw InputError(source + ": " + e.what());
  }
}

CompositionalDataset read_dataset_csv(std::istream& in, const std::string& source, bool strict) {
  const CsvTable table = read_csv_table(in, source);
  const CsvColumns cols = parse_header(table, 'p', 2, source);
  if (table.rows.empty()) throw InputError(source + ": empty dataset");
  std::vector<Composition> rows;
  rows.reserve(table.rows.size());
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& r = table.rows[i];
    std::vector<double> parts(r.begin() + static_cast<std::ptrdiff_t>(cols.sites), r.end());
    try {
      rows.push_back(strict ? Composition(std::move(parts)) : closure(parts));
    } catch (const DomainError& e) {
      std::ostringstream msg;
      msg << source << ": line " << table.line_numbers[i] << ": " << e.what();
      throw InputError(msg.str(), table.line_numbers[i], cols.sites + 1);
    }
  }
  return CompositionalDataset(sites_from_table(table, cols, source), std::move(rows));
}

CompositionalDataset read_dataset_csv(const std::filesystem::path& path, bool strict) {
  auto in = open_input(path);
  return read_dataset_csv(in, path.string(), strict);
}

SiteSet read_sites_csv(std::istream& in, const std::string& source) {
  const CsvTable table = read_csv_table(in, source);
  const CsvColumns cols = parse_header(table, 'p', 0, source);
  return sites_from_table(table, cols, source);
}

SiteSet read_sites_csv(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_sites_csv(in, path.string());
}

void write_dataset_csv(const CompositionalDataset& ds, std::ostream& out, int significant_digits) {
  const auto& coords = ds.sites().coords();
  for (Eigen::Index j = 0; j < coords.cols(); ++j) out << (j ? "," : "") << 's' << j + 1;
  for (std::size_t k = 0; k < ds.parts(); ++k) out << ",p" << k + 1;
  out << '\n';
  std::ostringstream row;
  row.precision(significant_digits);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    row.str({});
    for (Eigen::Index j = 0; j < coords.cols(); ++j) row << (j ? "," : "") << coords(static_cast<Eigen::Index>(i), j);
    for (double v : ds.row(i).parts()) row << ',' << v;
    out << row.str() << '\n';
  }
}

}  // namespace sgeo
