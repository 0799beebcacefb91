#include "fairlens/csv.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

namespace fairlens {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  size_t start = 0;
  while (true) {
    const size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      cells.push_back(line.substr(start));
      return cells;
    }
    cells.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

[[noreturn]] void parse_error(size_t row, size_t col, const std::string& message) {
  // row 0 is the header; data rows are reported 1-based.
  fail(Errc::CsvParseError, "row " + std::to_string(row) + ", column " +
                                std::to_string(col + 1) + ": " + message);
}

void check_binary_column(const Dataset& data, const std::string& name) {
  const int c = data.column(name);
  for (size_t r = 0; r < data.rows.size(); ++r) {
    const double v = data.rows[r][static_cast<size_t>(c)];
    if (v != 0.0 && v != 1.0) {
      fail(Errc::NonBinaryColumn, "column '" + name + "' has value " +
                                      std::to_string(v) + " at row " +
                                      std::to_string(r + 1) +
                                      "; expected 0 or 1");
    }
  }
}

}  // namespace

Dataset load_csv(const std::string& path,
                 const std::optional<MetricBindings>& bindings) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::CsvParseError, "cannot open '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();

  Dataset data;
  size_t pos = 0;
  size_t row = 0;
  bool have_header = false;
  while (pos < text.size()) {
    size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    std::string line = text.substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    pos = end + 1;
    if (line.empty()) continue;
    const std::vector<std::string> cells = split_line(line);
    if (!have_header) {
      std::set<std::string> seen;
      for (size_t c = 0; c < cells.size(); ++c) {
        if (cells[c].empty()) parse_error(0, c, "empty column name");
        if (!seen.insert(cells[c]).second) {
          parse_error(0, c, "duplicate column '" + cells[c] + "'");
        }
      }
      data.columns = cells;
      have_header = true;
      continue;
    }
    ++row;
    if (cells.size() != data.columns.size()) {
      parse_error(row, cells.size(),
                  "expected " + std::to_string(data.columns.size()) +
                      " cells, got " + std::to_string(cells.size()));
    }
    std::vector<double> values(cells.size());
    for (size_t c = 0; c < cells.size(); ++c) {
      const std::string& cell = cells[c];
      const char* first = cell.data();
      const char* last = first + cell.size();
      auto [ptr, ec] = std::from_chars(first, last, values[c]);
      if (cell.empty() || ec != std::errc() || ptr != last) {
        parse_error(row, c, "not a number: '" + cell + "'");
      }
    }
    data.rows.push_back(std::move(values));
  }
  if (!have_header) fail(Errc::CsvParseError, "'" + path + "' has no header row");

  if (bindings) {
    check_binary_column(data, bindings->group);
    check_binary_column(data, bindings->label);
    if (bindings->prediction) check_binary_column(data, *bindings->prediction);
    if (bindings->score) data.column(*bindings->score);  // existence only
  }
  return data;
}

std::string csv_text(const Dataset& data) {
  std::string out;
  for (size_t c = 0; c < data.columns.size(); ++c) {
    if (c) out += ',';
    out += data.columns[c];
  }
  out += '\n';
  char buf[32];
  for (const std::vector<double>& row : data.rows) {
    for (size_t c = 0; c < row.size(); ++c) {
      if (c) out += ',';
      auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, row[c]);
      (void)ec;
      out.append(buf, ptr);
    }
    out += '\n';
  }
  return out;
}

void write_csv(const Dataset& data, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(Errc::CsvParseError, "cannot open '" + path + "' for writing");
  out << csv_text(data);
  if (!out) fail(Errc::CsvParseError, "failed writing '" + path + "'");
}

}  // namespace fairlens
