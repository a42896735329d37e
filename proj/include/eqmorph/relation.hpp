#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "eqmorph/schema.hpp"
#include "eqmorph/value.hpp"

namespace eqmorph {

using Tuple = std::vector<Value>;

struct Row {
  Tuple tuple;
  std::uint64_t count = 1;

  friend bool operator==(const Row&, const Row&) = default;
};

/// Finite multiset of tuples stored as (tuple, multiplicity) pairs, sorted by
/// tuple with no tuple repeated and every multiplicity positive.
class Relation {
 public:
  Relation() = default;
  /// Merges equal tuples and drops zero counts.
  Relation(std::vector<std::string> columns, std::vector<Row> rows);

  const std::vector<std::string>& columns() const noexcept { return columns_; }
  const std::vector<Row>& rows() const noexcept { return rows_; }
  std::size_t arity() const noexcept { return columns_.size(); }
  bool empty() const noexcept { return rows_.empty(); }

  /// Total row count, i.e. the sum of multiplicities.
  std::uint64_t cardinality() const noexcept;
  std::uint64_t multiplicity(const Tuple& t) const;
  /// Same tuples, every multiplicity 1.
  Relation flattened() const;

  /// Multiset equality; column names are ignored.
  bool same_rows(const Relation& other) const { return rows_ == other.rows_; }
  friend bool operator==(const Relation&, const Relation&) = default;

 private:
  std::vector<std::string> columns_;
  std::vector<Row> rows_;
};

/// Multiset sum of two relations of equal arity (columns of `a`).
Relation bag_union(const Relation& a, const Relation& b);

struct Table {
  TableDef def;
  Relation data;
};

class Database {
 public:
  const std::vector<Table>& tables() const noexcept { return tables_; }
  const Table* find(std::string_view name) const;
  Table* find(std::string_view name);
  Schema schema() const;

  /// Throws std::invalid_argument if the name is taken.
  void create_table(TableDef def);
  void drop_table(std::string_view name);
  /// Appends `count` copies of a row. Throws std::invalid_argument on arity
  /// or type mismatch.
  void insert(std::string_view table, Tuple tuple, std::uint64_t count = 1);
  /// Replaces a table's contents wholesale (rows are not type-checked).
  void set_rows(std::string_view table, std::vector<Row> rows);
  void clear() { tables_.clear(); }

  friend bool operator==(const Database& a, const Database& b);

 private:
  std::vector<Table> tables_;
};

/// Human-readable multiset dump: "{(1)x2, (2)x1}".
std::string describe(const Relation& r);

}  // namespace eqmorph
