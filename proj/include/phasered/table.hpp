#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace phasered {

/// Shortest-safe text for a double: 17 significant digits, '.' decimal point,
/// independent of the global locale. Non-finite values print as nan/inf/-inf.
std::string format_double(double value);

/// Column-named numeric table, written as CSV or JSON.
class Table {
 public:
  explicit Table(std::vector<std::string> columns);

  void add_row(std::vector<double> row);

  const std::vector<std::string>& columns() const { return columns_; }
  const std::vector<std::vector<double>>& rows() const { return rows_; }

  void write_csv(std::ostream& os) const;
  /// {"columns": [...], "rows": [[...], ...]}; non-finite values as null.
  void write_json(std::ostream& os) const;

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<double>> rows_;
};

/// Writes to a temporary sibling and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path,
                       std::string_view content);

}  // namespace phasered
