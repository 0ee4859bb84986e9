#pragma once

#include <string>
#include <vector>

namespace rdbcd {

/// Locale-independent float formatting with 6 significant digits. NaN and
/// infinities render as "nan" / "inf" / "-inf".
std::string format_number(double value);

/// Minimal comma-delimited table: a header row followed by data rows.
/// Fields containing commas or quotes are quoted.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);

  void add_row(std::vector<std::string> fields);
  std::string str() const;
  void write_file(const std::string& path) const;
  std::size_t rows() const { return rows_.size(); }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

}  // namespace rdbcd
