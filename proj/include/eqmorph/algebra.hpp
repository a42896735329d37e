#pragma once

#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "eqmorph/ast.hpp"
#include "eqmorph/relation.hpp"
#include "eqmorph/schema.hpp"

namespace eqmorph {

/// Leaf: cross product of the listed base tables.
struct Scan {
  std::vector<TableDef> tables;
  friend bool operator==(const Scan&, const Scan&) = default;
};

/// π: picks output items from the child's columns (multiplicities kept).
struct Project {
  std::vector<SelectItem> items;
  friend bool operator==(const Project&, const Project&) = default;
};

/// σ: keeps rows whose predicate is TRUE.
struct Filter {
  Predicate pred;
  friend bool operator==(const Filter&, const Filter&) = default;
};

/// δ: projects onto `keys` and collapses duplicates.
struct Dedup {
  std::vector<SelectItem> keys;
  friend bool operator==(const Dedup&, const Dedup&) = default;
};

/// γ: one row per distinct `keys` value (one row overall when keys is empty),
/// with columns keys ++ aggs.
struct Aggregate {
  std::vector<ColumnRef> keys;
  std::vector<AggCall> aggs;
  friend bool operator==(const Aggregate&, const Aggregate&) = default;
};

/// ∪ (all = false) or ∪all over two children of equal arity.
struct SetUnion {
  bool all = false;
  friend bool operator==(const SetUnion&, const SetUnion&) = default;
};

using Operator = std::variant<Scan, Project, Filter, Dedup, Aggregate, SetUnion>;

struct AlgebraExpr {
  Operator op;
  std::vector<AlgebraExpr> children;

  template <class T>
  bool is() const noexcept {
    return std::holds_alternative<T>(op);
  }
  template <class T>
  const T& as() const {
    return std::get<T>(op);
  }
  template <class T>
  T& as() {
    return std::get<T>(op);
  }
  const AlgebraExpr& child(std::size_t i = 0) const { return children.at(i); }

  friend bool operator==(const AlgebraExpr&, const AlgebraExpr&) = default;
};

enum class RelType { Multiset, Set, Value };

std::string_view to_string(RelType t);

class LoweringError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class TypeError : public std::runtime_error {
 public:
  TypeError(std::string node, std::string expected, std::string found)
      : std::runtime_error(node + ": expected " + expected + ", found " + found),
        node_(std::move(node)),
        expected_(std::move(expected)),
        found_(std::move(found)) {}

  const std::string& node() const noexcept { return node_; }
  const std::string& expected() const noexcept { return expected_; }
  const std::string& found() const noexcept { return found_; }

 private:
  std::string node_;
  std::string expected_;
  std::string found_;
};

class RemapError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Lowers a query (resolved against `schema` first) in SQL clause order:
/// Scan, WHERE filters, γ or GROUP BY δ, HAVING filters, DISTINCT δ, π, then
/// set operations as a left-deep tree. WHERE/HAVING conjunctions along the
/// left spine become stacked filters. Throws LoweringError on invalid input.
AlgebraExpr lower(const SqlQuery& q, const Schema& schema);

/// Output type of the root. Appends a note to `lints` for every δ applied to
/// a set (treated as identity). Throws TypeError on ill-formed trees.
RelType typecheck(const AlgebraExpr& e, std::vector<std::string>* lints = nullptr);

/// Output columns of a node.
std::vector<SelectItem> output_columns(const AlgebraExpr& e);

/// Every SQL realization of `e`, qualified first, then the unqualified
/// variant of single-table blocks. Throws RemapError when there is none.
std::vector<SqlQuery> remap_to_sql(const AlgebraExpr& e);
/// As remap_to_sql but returns an empty list instead of throwing.
std::vector<SqlQuery> try_remap(const AlgebraExpr& e);

/// One operator per line, children indented by two spaces.
std::string dump(const AlgebraExpr& e);
/// Short operator label, e.g. "Filter (t0.a > 0)".
std::string label(const AlgebraExpr& e);

/// Direct interpreter for the IR, sharing predicate and aggregate evaluation
/// with the reference engine but not its clause pipeline.
Relation evaluate(const Database& db, const AlgebraExpr& e);

/// Pre-order walk helpers addressing nodes by child-index paths.
using NodePath = std::vector<std::size_t>;
const AlgebraExpr& node_at(const AlgebraExpr& e, const NodePath& path);
AlgebraExpr replace_at(const AlgebraExpr& e, const NodePath& path, AlgebraExpr replacement);

}  // namespace eqmorph
