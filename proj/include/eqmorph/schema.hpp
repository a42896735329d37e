#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "eqmorph/value.hpp"

namespace eqmorph {

struct ColumnDef {
  std::string name;
  ColumnType type = ColumnType::Int;

  friend bool operator==(const ColumnDef&, const ColumnDef&) = default;
};

/// Relation scheme: table name plus ordered, uniquely named attributes.
struct TableDef {
  std::string name;
  std::vector<ColumnDef> columns;

  const ColumnDef* find(std::string_view column) const;
  friend bool operator==(const TableDef&, const TableDef&) = default;
};

struct Schema {
  std::vector<TableDef> tables;

  const TableDef* find(std::string_view table) const;
  bool empty() const noexcept { return tables.empty(); }
  friend bool operator==(const Schema&, const Schema&) = default;
};

}  // namespace eqmorph
