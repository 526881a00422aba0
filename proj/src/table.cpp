#include "phasered/table.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>
#include <system_error>

#include "phasered/errors.hpp"

namespace phasered {

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), value,
                           std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

Table::Table(std::vector<std::string> columns) : columns_(std::move(columns)) {}

void Table::add_row(std::vector<double> row) {
  if (row.size() != columns_.size())
    throw InvalidArgument("table row has " + std::to_string(row.size()) +
                          " values, expected " +
                          std::to_string(columns_.size()));
  rows_.push_back(std::move(row));
}

void Table::write_csv(std::ostream& os) const {
  for (std::size_t i = 0; i < columns_.size(); ++i)
    os << (i ? "," : "") << columns_[i];
  os << '\n';
  for (const auto& row : rows_) {
    for (std::size_t i = 0; i < row.size(); ++i)
      os << (i ? "," : "") << format_double(row[i]);
    os << '\n';
  }
}

void Table::write_json(std::ostream& os) const {
  os << "{\"columns\":[";
  for (std::size_t i = 0; i < columns_.size(); ++i)
    os << (i ? "," : "") << '"' << columns_[i] << '"';
  os << "],\"rows\":[";
  for (std::size_t r = 0; r < rows_.size(); ++r) {
    os << (r ? "," : "") << '[';
    for (std::size_t i = 0; i < rows_[r].size(); ++i) {
      const double v = rows_[r][i];
      os << (i ? "," : "") << (std::isfinite(v) ? format_double(v) : "null");
    }
    os << ']';
  }
  os << "]}\n";
}

void write_file_atomic(const std::filesystem::path& path,
                       std::string_view content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + tmp.string() + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error("failed writing " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error("cannot rename " + tmp.string() + ": " + ec.message());
}

}  // namespace phasered
