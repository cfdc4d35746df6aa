#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "sgeo/simplex.hpp"

namespace sgeo {

/// Numeric CSV file: one header row, then rows of decimal numbers. Blank
/// lines and lines starting with '#' are skipped.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
  std::vector<std::size_t> line_numbers;  // 1-based source line of each row
};

CsvTable read_csv_table(std::istream& in, const std::string& source);

/// Column split of a header of the form s1..sd, <prefix>1..<prefix>m.
struct CsvColumns {
  std::size_t sites = 0;
  std::size_t values = 0;
};

/// Validates the header against `s1,...,sd,<prefix>1,...,<prefix>m`.
/// `min_values` is the least acceptable m.
CsvColumns parse_header(const CsvTable& table, char value_prefix, std::size_t min_values,
                        const std::string& source);

SiteSet sites_from_table(const CsvTable& table, const CsvColumns& cols, const std::string& source);

/// Header `s1,...,sd,p1,...,pp`. Strict mode rejects rows whose parts sum
/// deviates from one by more than 1e-9; lax mode closes every row.
CompositionalDataset read_dataset_csv(std::istream& in, const std::string& source, bool strict = true);
CompositionalDataset read_dataset_csv(const std::filesystem::path& path, bool strict = true);

/// Sites only; any `p` columns are ignored.
SiteSet read_sites_csv(std::istream& in, const std::string& source);
SiteSet read_sites_csv(const std::filesystem::path& path);

void write_dataset_csv(const CompositionalDataset& ds, std::ostream& out, int significant_digits = 12);

}  // namespace sgeo
