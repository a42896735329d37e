#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "eqmorph/ast.hpp"
#include "eqmorph/schema.hpp"

namespace eqmorph {

/// Parses one statement of the supported subset. A trailing ";" is accepted
/// and dropped. Throws SyntaxError.
SqlQuery parse(std::string_view text);

/// Deterministic canonical text. parse(render(q)) == q for any valid AST.
std::string render(const SqlQuery& q);
std::string render(const Predicate& p);
std::string render(const SelectItem& item);
std::string render(const Term& t);

struct SemanticError {
  enum class Kind { UnknownTable, UnknownColumn, AmbiguousColumn, NonGroupedColumn, TypeMismatch, UnsupportedShape };

  Kind kind;
  std::string detail;

  /// Engine error code for this kind (UNKNOWN_TABLE, ...).
  std::string_view code() const;
  std::string to_string() const;
  friend bool operator==(const SemanticError&, const SemanticError&) = default;
};

/// Result of name resolution: a copy of the query with every column reference
/// table-qualified, plus any semantic errors found.
struct Resolution {
  SqlQuery query;
  std::vector<SemanticError> errors;

  bool ok() const noexcept { return errors.empty(); }
};

Resolution resolve(const SqlQuery& q, const Schema& schema);
/// Empty when `q` is valid against `schema`.
std::vector<SemanticError> validate(const SqlQuery& q, const Schema& schema);

/// Static output column types of a resolved block (first block for a chain).
std::vector<ColumnType> output_types(const SqlQuery& resolved, const Schema& schema);

/// Drops table qualifiers from every column reference in this block (not its
/// set-operation chain).
SqlQuery strip_qualifiers(const SqlQuery& block);

}  // namespace eqmorph
