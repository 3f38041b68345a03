#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace hetpop {

/// Numeric table with named columns.
struct NumericTable {
  std::vector<std::string> names;
  Eigen::MatrixXd values;

  /// Column position by name, or by 1-based index when `key` is a number.
  /// Throws DataError when there is no such column.
  Eigen::Index column(std::string_view key) const;
};

/// Comma-separated, '.' decimal. Without a header, columns are named
/// col1..colK. Throws DataError on ragged rows, empty or non-numeric cells.
NumericTable parse_csv(std::string_view text, bool has_header = true);
NumericTable read_csv(const std::filesystem::path& path, bool has_header = true);

/// 17 significant digits; parses back to the identical double.
std::string format_double(double v);

void write_csv(std::ostream& out, const std::vector<std::string>& names, const Eigen::MatrixXd& values);
void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace hetpop
