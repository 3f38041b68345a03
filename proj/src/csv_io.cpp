#include "hetpop/csv_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "hetpop/errors.hpp"

namespace hetpop {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    cells.push_back(trim(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

std::string unquote(std::string_view s) {
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return std::string(s);
}

double parse_cell(std::string_view cell, std::size_t line_no, std::size_t col) {
  if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
  double v = 0.0;
  const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (cell.empty() || res.ec != std::errc() || res.ptr != cell.data() + cell.size() || !std::isfinite(v)) {
    throw DataError("line " + std::to_string(line_no) + ", column " + std::to_string(col + 1) +
                    ": not a finite number: '" + std::string(cell) + "'");
  }
  return v;
}

}  // namespace

Eigen::Index NumericTable::column(std::string_view key) const {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == key) return static_cast<Eigen::Index>(i);
  }
  int index = 0;
  const auto res = std::from_chars(key.data(), key.data() + key.size(), index);
  if (res.ec == std::errc() && res.ptr == key.data() + key.size() && index >= 1 &&
      static_cast<std::size_t>(index) <= names.size()) {
    return index - 1;
  }
  throw DataError("no column '" + std::string(key) + "'");
}

NumericTable parse_csv(std::string_view text, bool has_header) {
  if (text.starts_with("\xEF\xBB\xBF")) text.remove_prefix(3);

  NumericTable table;
  std::vector<double> cells;
  std::size_t width = 0;
  std::size_t rows = 0;
  std::size_t line_no = 0;
  bool header_pending = has_header;

  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    const std::string_view line = text.substr(pos, nl == std::string_view::npos ? text.npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (trim(line).empty()) continue;

    const auto parts = split(line);
    if (header_pending) {
      for (auto p : parts) table.names.push_back(unquote(p));
      width = parts.size();
      header_pending = false;
      continue;
    }
    if (width == 0) width = parts.size();
    if (parts.size() != width) {
      throw DataError("line " + std::to_string(line_no) + ": expected " + std::to_string(width) +
                      " cells, found " + std::to_string(parts.size()));
    }
    for (std::size_t c = 0; c < parts.size(); ++c) cells.push_back(parse_cell(parts[c], line_no, c));
    ++rows;
  }
  if (width == 0) throw DataError("input has no columns");
  if (table.names.empty()) {
    for (std::size_t c = 0; c < width; ++c) table.names.push_back("col" + std::to_string(c + 1));
  }

  table.values.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(width));
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < width; ++c) {
      table.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = cells[r * width + c];
    }
  }
  return table;
}

NumericTable read_csv(const std::filesystem::path& path, bool has_header) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_csv(buffer.str(), has_header);
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

void write_csv(std::ostream& out, const std::vector<std::string>& names, const Eigen::MatrixXd& values) {
  for (std::size_t c = 0; c < names.size(); ++c) out << (c ? "," : "") << names[c];
  out << '\n';
  std::string line;
  for (Eigen::Index r = 0; r < values.rows(); ++r) {
    line.clear();
    for (Eigen::Index c = 0; c < values.cols(); ++c) {
      if (c) line += ',';
      line += format_double(values(r, c));
    }
    line += '\n';
    out << line;
  }
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw DataError("write failed for '" + path.string() + "'");
}

}  // namespace hetpop
