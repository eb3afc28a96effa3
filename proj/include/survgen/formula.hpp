#pragma once

// Linear-predictor formulas.
//
//   formula := '~' expr
//   expr    := term ('+' term)*
//   term    := product ('*' product)*      a*b expands to a + b + a:b
//   product := atom (':' atom)*
//   atom    := name | 'offset' '(' name ')'
//
// There is no intercept: the tokens 1, 0 and -1 are rejected. Expanded terms
// are deduplicated and ordered by interaction degree (stable), factors
// inside a term are sorted.

#include <algorithm>
#include <cctype>
#include <cstring>
#include <string>
#include <string_view>
#include <vector>

#include "survgen/error.hpp"
#include "survgen/table.hpp"

namespace survgen {

struct FormulaTerm {
  std::vector<std::string> factors;  // sorted, unique

  std::string label() const {
    std::string out;
    for (const auto& f : factors) out += (out.empty() ? "" : ":") + f;
    return out;
  }

  friend bool operator==(const FormulaTerm&, const FormulaTerm&) = default;
};

struct FormulaAST {
  std::vector<FormulaTerm> terms;
  std::vector<std::string> offsets;

  friend bool operator==(const FormulaAST&, const FormulaAST&) = default;
};

namespace detail {

class FormulaParser {
 public:
  explicit FormulaParser(std::string_view text) : text_(text) {}

  FormulaAST parse() {
    skip_space();
    if (!consume('~')) fail("formula must start with '~'");
    FormulaAST ast;
    std::vector<FormulaTerm> expanded;
    skip_space();
    if (at_end()) fail("empty formula");
    parse_term(ast, expanded);
    for (;;) {
      skip_space();
      if (at_end()) break;
      if (peek() == '-') fail_intercept_removal();
      if (!consume('+')) fail(std::string("unexpected character '") + peek() + "'");
      parse_term(ast, expanded);
    }

    // Deduplicate, then stable-sort by degree so main effects come first.
    for (auto& t : expanded) {
      if (std::find(ast.terms.begin(), ast.terms.end(), t) == ast.terms.end())
        ast.terms.push_back(std::move(t));
    }
    std::stable_sort(ast.terms.begin(), ast.terms.end(), [](const FormulaTerm& a, const FormulaTerm& b) {
      return a.factors.size() < b.factors.size();
    });
    return ast;
  }

 private:
  struct Operand {
    std::vector<std::string> factors;
    bool is_offset = false;
  };

  void parse_term(FormulaAST& ast, std::vector<FormulaTerm>& out) {
    std::vector<Operand> products;
    const std::size_t start = pos_;
    products.push_back(parse_product());
    for (;;) {
      skip_space();
      if (!consume('*')) break;
      products.push_back(parse_product());
    }
    if (products.size() == 1 && products.front().is_offset) {
      ast.offsets.push_back(products.front().factors.front());
      return;
    }
    for (const auto& p : products)
      if (p.is_offset) throw FormulaError("offset() cannot appear inside an interaction", start);

    // Every non-empty subset of the '*' operands, in binary counting order.
    const std::size_t m = products.size();
    if (m > 16) fail("too many '*' operands");
    for (std::size_t mask = 1; mask < (std::size_t{1} << m); ++mask) {
      FormulaTerm term;
      for (std::size_t j = 0; j < m; ++j)
        if (mask & (std::size_t{1} << j))
          term.factors.insert(term.factors.end(), products[j].factors.begin(), products[j].factors.end());
      normalize(term);
      out.push_back(std::move(term));
    }
  }

  Operand parse_product() {
    Operand first = parse_atom();
    if (first.is_offset) {
      skip_space();
      if (!at_end() && peek() == ':') fail("offset() cannot appear inside an interaction");
      return first;
    }
    for (;;) {
      skip_space();
      if (!consume(':')) break;
      Operand next = parse_atom();
      if (next.is_offset) fail("offset() cannot appear inside an interaction");
      first.factors.insert(first.factors.end(), next.factors.begin(), next.factors.end());
    }
    return first;
  }

  Operand parse_atom() {
    skip_space();
    if (at_end()) fail("expected a variable name");
    const char c = peek();
    if (std::isdigit(static_cast<unsigned char>(c))) {
      const std::size_t start = pos_;
      std::string number;
      while (!at_end() && (std::isdigit(static_cast<unsigned char>(peek())) || peek() == '.')) number += text_[pos_++];
      if (number == "0" || number == "1")
        throw FormulaError("intercept terms are not supported: linear predictors never contain an intercept", start);
      throw FormulaError("numeric literal '" + number + "' is not a valid term", start);
    }
    if (c == '-') fail_intercept_removal();
    if (!is_name_start(c)) fail(std::string("unexpected character '") + c + "'");

    std::string name = parse_name();
    skip_space();
    if (!at_end() && peek() == '(') {
      if (name != "offset") fail("function '" + name + "()' is not supported; only offset() is");
      ++pos_;
      skip_space();
      if (at_end() || !is_name_start(peek())) fail("offset() takes a single column name");
      std::string column = parse_name();
      skip_space();
      if (!consume(')')) fail("offset() takes a single column name; expected ')'");
      return Operand{{std::move(column)}, true};
    }
    return Operand{{std::move(name)}, false};
  }

  std::string parse_name() {
    std::string out;
    while (!at_end() && is_name_char(peek())) out += text_[pos_++];
    return out;
  }

  static void normalize(FormulaTerm& term) {
    std::sort(term.factors.begin(), term.factors.end());
    term.factors.erase(std::unique(term.factors.begin(), term.factors.end()), term.factors.end());
  }

  static bool is_name_start(char c) {
    return std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '.';
  }
  static bool is_name_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.';
  }

  [[noreturn]] void fail_intercept_removal() const {
    std::size_t look = pos_ + 1;
    while (look < text_.size() && std::isspace(static_cast<unsigned char>(text_[look]))) ++look;
    if (look < text_.size() && text_[look] == '1')
      throw FormulaError("intercept removal ('-1') is not supported: linear predictors never contain an intercept",
                         pos_);
    throw FormulaError("term removal with '-' is not supported", pos_);
  }
  [[noreturn]] void fail(const std::string& message) const { throw FormulaError(message, pos_); }

  void skip_space() {
    while (!at_end() && std::isspace(static_cast<unsigned char>(peek()))) ++pos_;
  }
  bool consume(char c) {
    if (!at_end() && peek() == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  bool at_end() const { return pos_ >= text_.size(); }
  char peek() const { return text_[pos_]; }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline FormulaAST parse_formula(std::string_view text) { return detail::FormulaParser(text).parse(); }

/// Canonical text form; parse_formula(to_string(ast)) == ast.
inline std::string to_string(const FormulaAST& ast) {
  std::string out = "~ ";
  bool first = true;
  for (const auto& t : ast.terms) {
    out += (first ? "" : " + ") + t.label();
    first = false;
  }
  for (const auto& o : ast.offsets) {
    out += (first ? "" : " + ") + ("offset(" + o + ")");
    first = false;
  }
  return out;
}

/// Numeric encoding of a formula against a table. Row i of the matrix is x_i.
struct DesignMatrix {
  std::vector<std::string> names;
  std::vector<std::vector<double>> columns;
  std::vector<double> offset;
  std::size_t n_rows = 0;

  std::size_t n_cols() const { return columns.size(); }

  /// x_i * coef + offset_i for every row.
  std::vector<double> linear_predictor(const std::vector<double>& coef) const {
    if (coef.size() != columns.size())
      throw DomainError("coefficient vector has length " + std::to_string(coef.size()) +
                        " but the design matrix has " + std::to_string(columns.size()) + " columns (" +
                        join_names() + ")");
    std::vector<double> eta = offset;
    for (std::size_t j = 0; j < columns.size(); ++j) {
      const auto& col = columns[j];
      for (std::size_t i = 0; i < n_rows; ++i) eta[i] += col[i] * coef[j];
    }
    return eta;
  }

  std::string join_names() const {
    std::string out;
    for (const auto& n : names) out += (out.empty() ? "" : ", ") + n;
    return out.empty() ? "none" : out;
  }
};

struct DesignOptions {
  /// Prepend an all-ones "(Intercept)" column. Only incidence (cure)
  /// predictors use this; latency predictors never carry an intercept.
  bool intercept = false;
};

namespace detail {

struct Expanded {
  std::vector<std::string> names;
  std::vector<std::vector<double>> columns;
};

inline void check_complete(const Column& c) {
  if (auto row = c.first_missing())
    throw DomainError("column '" + c.name + "' has a missing value at row " + std::to_string(*row + 1));
}

inline Expanded expand_factor(const Table& table, const std::string& name) {
  const Column* c = table.find(name);
  if (!c) throw DomainError("formula references unknown column '" + name + "'");
  check_complete(*c);
  Expanded out;
  if (c->is_numeric()) {
    out.names.push_back(name);
    out.columns.push_back(c->numeric());
    return out;
  }
  const auto levels = c->sorted_levels();
  if (levels.size() < 2)
    throw DomainError("categorical column '" + name + "' has " + std::to_string(levels.size()) +
                      " level(s); at least 2 are required for treatment coding");
  const auto& values = c->categorical();
  for (const auto& v : values)
    if (!std::binary_search(levels.begin(), levels.end(), v))
      throw DomainError("column '" + name + "' contains undeclared level '" + v + "'");
  for (std::size_t k = 1; k < levels.size(); ++k) {
    out.names.push_back(name + levels[k]);
    std::vector<double> indicator(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) indicator[i] = values[i] == levels[k] ? 1.0 : 0.0;
    out.columns.push_back(std::move(indicator));
  }
  return out;
}

}  // namespace detail

inline DesignMatrix build_design(const FormulaAST& ast, const Table& table, DesignOptions options = {}) {
  DesignMatrix dm;
  dm.n_rows = table.n_rows();
  if (options.intercept) {
    dm.names.push_back("(Intercept)");
    dm.columns.emplace_back(dm.n_rows, 1.0);
  }
  for (const auto& term : ast.terms) {
    // Cartesian product of the factors' expansions, first factor varying fastest.
    detail::Expanded acc;
    acc.names.push_back("");
    acc.columns.emplace_back(dm.n_rows, 1.0);
    for (const auto& factor : term.factors) {
      const detail::Expanded e = detail::expand_factor(table, factor);
      detail::Expanded next;
      for (std::size_t b = 0; b < e.names.size(); ++b) {
        for (std::size_t a = 0; a < acc.names.size(); ++a) {
          next.names.push_back(acc.names[a].empty() ? e.names[b] : acc.names[a] + ":" + e.names[b]);
          std::vector<double> col(dm.n_rows);
          for (std::size_t i = 0; i < dm.n_rows; ++i) col[i] = acc.columns[a][i] * e.columns[b][i];
          next.columns.push_back(std::move(col));
        }
      }
      acc = std::move(next);
    }
    for (std::size_t k = 0; k < acc.names.size(); ++k) {
      if (std::find(dm.names.begin(), dm.names.end(), acc.names[k]) != dm.names.end())
        throw DomainError("design matrix column name '" + acc.names[k] + "' is produced twice");
      dm.names.push_back(std::move(acc.names[k]));
      dm.columns.push_back(std::move(acc.columns[k]));
    }
  }
  dm.offset.assign(dm.n_rows, 0.0);
  for (const auto& name : ast.offsets) {
    const Column* c = table.find(name);
    if (!c) throw DomainError("offset references unknown column '" + name + "'");
    if (!c->is_numeric()) throw DomainError("offset column '" + name + "' is not numeric");
    detail::check_complete(*c);
    const auto& v = c->numeric();
    for (std::size_t i = 0; i < dm.n_rows; ++i) dm.offset[i] += v[i];
  }
  return dm;
}

inline DesignMatrix build_design(std::string_view formula, const Table& table, DesignOptions options = {}) {
  return build_design(parse_formula(formula), table, options);
}

}  // namespace survgen
