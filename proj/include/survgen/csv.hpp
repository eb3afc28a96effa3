#pragma once

// CSV reading and writing for Table.
//
// Numbers are written in shortest round-trip form, +inf/-inf as `inf`/`-inf`,
// categorical cells double-quoted ("" escapes a quote) and missing cells
// as bare `NA`. On input a column is numeric when every non-empty unquoted
// cell parses as a number; an empty cell or `NA` is missing.

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "survgen/error.hpp"
#include "survgen/table.hpp"

namespace survgen {

class CsvError : public Error {
 public:
  CsvError(std::size_t line, const std::string& message)
      : Error("line " + std::to_string(line) + ": " + message), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

inline std::string format_number(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (std::isnan(x)) return "nan";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

inline std::optional<double> parse_number(std::string_view s) {
  if (s == "inf" || s == "Inf" || s == "+inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf" || s == "-Inf") return -std::numeric_limits<double>::infinity();
  if (s == "nan" || s == "NaN") return std::numeric_limits<double>::quiet_NaN();
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double x = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), x);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return x;
}

namespace detail {
inline std::string quote(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

struct Cell {
  std::string text;
  bool quoted = false;
};

/// Splits the next record; quoted fields may span lines. Returns false at EOF.
inline bool read_record(std::istream& in, std::vector<Cell>& cells, std::size_t& line) {
  cells.clear();
  int ch = in.peek();
  if (ch == std::char_traits<char>::eof()) return false;
  ++line;
  Cell cell;
  bool in_quotes = false;
  bool after_quote = false;
  for (;;) {
    ch = in.get();
    if (ch == std::char_traits<char>::eof()) {
      if (in_quotes) throw CsvError(line, "unterminated quoted field");
      cells.push_back(std::move(cell));
      return true;
    }
    const char c = static_cast<char>(ch);
    if (in_quotes) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get();
          cell.text += '"';
        } else {
          in_quotes = false;
          after_quote = true;
        }
      } else {
        if (c == '\n') ++line;
        cell.text += c;
      }
      continue;
    }
    if (c == ',') {
      cells.push_back(std::move(cell));
      cell = Cell{};
      after_quote = false;
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && in.peek() == '\n') in.get();
      cells.push_back(std::move(cell));
      return true;
    } else if (c == '"') {
      if (cell.quoted || !cell.text.empty()) throw CsvError(line, "unexpected quote inside a field");
      cell.quoted = true;
      in_quotes = true;
    } else {
      if (after_quote) throw CsvError(line, "characters after a closing quote");
      cell.text += c;
    }
  }
}
}  // namespace detail

inline void write_csv(const Table& table, std::ostream& out) {
  const auto& cols = table.columns();
  for (std::size_t j = 0; j < cols.size(); ++j) out << (j ? "," : "") << detail::quote(cols[j].name);
  out << '\n';
  for (std::size_t i = 0; i < table.n_rows(); ++i) {
    for (std::size_t j = 0; j < cols.size(); ++j) {
      if (j) out << ',';
      const Column& c = cols[j];
      if (c.is_missing(i)) out << "NA";
      else if (c.is_numeric()) out << format_number(c.numeric()[i]);
      else out << detail::quote(c.categorical()[i]);
    }
    out << '\n';
  }
}

inline std::string to_csv(const Table& table) {
  std::ostringstream out;
  write_csv(table, out);
  return out.str();
}

inline void write_csv(const Table& table, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw RuntimeError("cannot open '" + path + "' for writing");
  write_csv(table, out);
  if (!out) throw RuntimeError("write to '" + path + "' failed");
}

inline Table read_csv(std::istream& in) {
  std::size_t line = 0;
  std::vector<detail::Cell> header;
  if (!detail::read_record(in, header, line)) throw CsvError(1, "empty CSV (no header)");
  std::vector<std::vector<detail::Cell>> rows;
  std::vector<detail::Cell> record;
  while (detail::read_record(in, record, line)) {
    if (record.size() == 1 && record[0].text.empty() && !record[0].quoted) continue;  // blank line
    if (record.size() != header.size())
      throw CsvError(line, "expected " + std::to_string(header.size()) + " fields, found " +
                               std::to_string(record.size()));
    rows.push_back(record);
  }

  Table table(rows.size());
  for (std::size_t j = 0; j < header.size(); ++j) {
    bool numeric = true;
    for (const auto& r : rows) {
      const auto& cell = r[j];
      if (cell.quoted) {
        numeric = false;
        break;
      }
      if (cell.text.empty() || cell.text == "NA") continue;
      if (!parse_number(cell.text)) {
        numeric = false;
        break;
      }
    }
    Column col;
    col.name = header[j].text;
    col.missing.assign(rows.size(), false);
    bool any_missing = false;
    if (numeric) {
      std::vector<double> v(rows.size(), 0.0);
      for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& cell = rows[i][j];
        if (cell.text.empty() || cell.text == "NA") {
          col.missing[i] = any_missing = true;
        } else {
          v[i] = *parse_number(cell.text);
        }
      }
      col.data = std::move(v);
    } else {
      std::vector<std::string> v(rows.size());
      for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& cell = rows[i][j];
        if (!cell.quoted && (cell.text.empty() || cell.text == "NA")) col.missing[i] = any_missing = true;
        else v[i] = cell.text;
      }
      col.data = std::move(v);
    }
    if (!any_missing) col.missing.clear();
    try {
      table.add(std::move(col));
    } catch (const DomainError& e) {
      throw CsvError(1, e.what());
    }
  }
  return table;
}

inline Table read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw RuntimeError("cannot open '" + path + "' for reading");
  return read_csv(in);
}

inline Table parse_csv(std::string_view text) {
  std::istringstream in{std::string(text)};
  return read_csv(in);
}

}  // namespace survgen
