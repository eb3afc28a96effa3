#pragma once

// Column-oriented dataset: numeric (double) and categorical (string) columns
// with a shared row count and an optional per-cell missing mask.

#include <algorithm>
#include <cmath>
#include <cstring>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "survgen/error.hpp"

namespace survgen {

struct Column {
  std::string name;
  std::variant<std::vector<double>, std::vector<std::string>> data;
  /// Empty, or one flag per row.
  std::vector<bool> missing;
  /// Declared level set for a categorical column (empty: use observed levels).
  std::vector<std::string> levels;

  bool is_numeric() const { return std::holds_alternative<std::vector<double>>(data); }
  bool is_categorical() const { return !is_numeric(); }

  std::size_t size() const {
    return std::visit([](const auto& v) { return v.size(); }, data);
  }

  bool is_missing(std::size_t row) const { return !missing.empty() && missing[row]; }

  std::optional<std::size_t> first_missing() const {
    for (std::size_t i = 0; i < missing.size(); ++i)
      if (missing[i]) return i;
    return std::nullopt;
  }

  const std::vector<double>& numeric() const { return std::get<std::vector<double>>(data); }
  const std::vector<std::string>& categorical() const { return std::get<std::vector<std::string>>(data); }

  /// Sorted distinct levels (byte order); declared levels take precedence.
  std::vector<std::string> sorted_levels() const {
    std::vector<std::string> out = levels;
    if (out.empty()) {
      const auto& values = categorical();
      for (std::size_t i = 0; i < values.size(); ++i)
        if (!is_missing(i)) out.push_back(values[i]);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }
};

inline bool bitwise_equal(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) return false;
  return a.empty() || std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

class Table {
 public:
  Table() = default;
  explicit Table(std::size_t n_rows) : n_rows_(n_rows) {}

  std::size_t n_rows() const { return n_rows_; }
  std::size_t n_cols() const { return columns_.size(); }
  const std::vector<Column>& columns() const { return columns_; }

  bool has(std::string_view name) const { return find(name) != nullptr; }

  const Column* find(std::string_view name) const {
    for (const auto& c : columns_)
      if (c.name == name) return &c;
    return nullptr;
  }

  const Column& column(std::string_view name) const {
    const Column* c = find(name);
    if (!c) throw DomainError("table has no column '" + std::string(name) + "'");
    return *c;
  }

  const std::vector<double>& numeric(std::string_view name) const {
    const Column& c = column(name);
    if (!c.is_numeric()) throw DomainError("column '" + std::string(name) + "' is not numeric");
    return c.numeric();
  }

  const std::vector<std::string>& categorical(std::string_view name) const {
    const Column& c = column(name);
    if (!c.is_categorical()) throw DomainError("column '" + std::string(name) + "' is not categorical");
    return c.categorical();
  }

  std::vector<std::string> names() const {
    std::vector<std::string> out;
    for (const auto& c : columns_) out.push_back(c.name);
    return out;
  }

  void add(Column column) {
    if (column.name.empty()) throw DomainError("column name must not be empty");
    if (has(column.name)) throw DomainError("duplicate column '" + column.name + "'");
    if (columns_.empty() && n_rows_ == 0) n_rows_ = column.size();
    if (column.size() != n_rows_)
      throw DomainError("column '" + column.name + "' has " + std::to_string(column.size()) +
                        " rows, table has " + std::to_string(n_rows_));
    if (!column.missing.empty() && column.missing.size() != n_rows_)
      throw DomainError("column '" + column.name + "': missing mask has wrong length");
    columns_.push_back(std::move(column));
  }

  void add_numeric(std::string name, std::vector<double> values) {
    add(Column{std::move(name), std::move(values), {}, {}});
  }

  void add_categorical(std::string name, std::vector<std::string> values,
                       std::vector<std::string> levels = {}) {
    add(Column{std::move(name), std::move(values), {}, std::move(levels)});
  }

  /// Columns in the given order.
  Table select(const std::vector<std::string>& names) const {
    Table out(n_rows_);
    for (const auto& n : names) out.add(column(n));
    return out;
  }

  /// Tables are equal when names, kinds, missing masks and values agree;
  /// numeric cells compare bitwise so NaN and inf round-trip cleanly.
  friend bool operator==(const Table& a, const Table& b) {
    if (a.n_rows_ != b.n_rows_ || a.columns_.size() != b.columns_.size()) return false;
    for (std::size_t j = 0; j < a.columns_.size(); ++j) {
      const Column& x = a.columns_[j];
      const Column& y = b.columns_[j];
      if (x.name != y.name || x.is_numeric() != y.is_numeric()) return false;
      for (std::size_t i = 0; i < a.n_rows_; ++i)
        if (x.is_missing(i) != y.is_missing(i)) return false;
      if (x.is_numeric()) {
        auto u = x.numeric();
        auto v = y.numeric();
        for (std::size_t i = 0; i < a.n_rows_; ++i)
          if (x.is_missing(i)) u[i] = v[i] = 0.0;
        if (!bitwise_equal(u, v)) return false;
      } else {
        for (std::size_t i = 0; i < a.n_rows_; ++i)
          if (!x.is_missing(i) && x.categorical()[i] != y.categorical()[i]) return false;
      }
    }
    return true;
  }

 private:
  std::size_t n_rows_ = 0;
  std::vector<Column> columns_;
};

}  // namespace survgen
