#include "eqmorph/relation.hpp"

#include <algorithm>
#include <stdexcept>

namespace eqmorph {

Relation::Relation(std::vector<std::string> columns, std::vector<Row> rows) : columns_(std::move(columns)) {
  std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.tuple < b.tuple; });
  for (auto& r : rows) {
    if (r.count == 0) continue;
    if (!rows_.empty() && rows_.back().tuple == r.tuple) {
      rows_.back().count += r.count;
    } else {
      rows_.push_back(std::move(r));
    }
  }
}

std::uint64_t Relation::cardinality() const noexcept {
  std::uint64_t n = 0;
  for (const auto& r : rows_) n += r.count;
  return n;
}

std::uint64_t Relation::multiplicity(const Tuple& t) const {
  auto it = std::lower_bound(rows_.begin(), rows_.end(), t, [](const Row& r, const Tuple& k) { return r.tuple < k; });
  return it != rows_.end() && it->tuple == t ? it->count : 0;
}

Relation Relation::flattened() const {
  Relation out = *this;
  for (auto& r : out.rows_) r.count = 1;
  return out;
}

Relation bag_union(const Relation& a, const Relation& b) {
  std::vector<Row> rows = a.rows();
  rows.insert(rows.end(), b.rows().begin(), b.rows().end());
  return Relation(a.columns(), std::move(rows));
}

const Table* Database::find(std::string_view name) const {
  for (const auto& t : tables_) {
    if (t.def.name == name) return &t;
  }
  return nullptr;
}

Table* Database::find(std::string_view name) {
  for (auto& t : tables_) {
    if (t.def.name == name) return &t;
  }
  return nullptr;
}

Schema Database::schema() const {
  Schema s;
  for (const auto& t : tables_) s.tables.push_back(t.def);
  return s;
}

void Database::create_table(TableDef def) {
  if (find(def.name) != nullptr) throw std::invalid_argument("table " + def.name + " already exists");
  for (std::size_t i = 0; i < def.columns.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (def.columns[i].name == def.columns[j].name) {
        throw std::invalid_argument("duplicate column " + def.columns[i].name + " in " + def.name);
      }
    }
  }
  std::vector<std::string> cols;
  for (const auto& c : def.columns) cols.push_back(def.name + "." + c.name);
  Table t{std::move(def), Relation(std::move(cols), {})};
  tables_.push_back(std::move(t));
}

void Database::drop_table(std::string_view name) {
  std::erase_if(tables_, [&](const Table& t) { return t.def.name == name; });
}

void Database::insert(std::string_view table, Tuple tuple, std::uint64_t count) {
  Table* t = find(table);
  if (t == nullptr) throw std::invalid_argument("no such table " + std::string(table));
  if (tuple.size() != t->def.columns.size()) throw std::invalid_argument("arity mismatch inserting into " + t->def.name);
  for (std::size_t i = 0; i < tuple.size(); ++i) {
    Value& v = tuple[i];
    if (v.is_null()) continue;
    switch (t->def.columns[i].type) {
      case ColumnType::Int:
        if (!v.is_int()) throw std::invalid_argument("expected integer for " + t->def.columns[i].name);
        break;
      case ColumnType::Dec:
        if (v.is_int()) v = Value::decimal(v.as_numeric());
        if (!v.is_dec()) throw std::invalid_argument("expected decimal for " + t->def.columns[i].name);
        break;
      case ColumnType::Str:
        if (!v.is_str()) throw std::invalid_argument("expected string for " + t->def.columns[i].name);
        break;
    }
  }
  std::vector<Row> rows = t->data.rows();
  rows.push_back(Row{std::move(tuple), count});
  t->data = Relation(t->data.columns(), std::move(rows));
}

void Database::set_rows(std::string_view table, std::vector<Row> rows) {
  Table* t = find(table);
  if (t == nullptr) throw std::invalid_argument("no such table " + std::string(table));
  t->data = Relation(t->data.columns(), std::move(rows));
}

bool operator==(const Database& a, const Database& b) {
  if (a.tables_.size() != b.tables_.size()) return false;
  for (std::size_t i = 0; i < a.tables_.size(); ++i) {
    if (a.tables_[i].def != b.tables_[i].def || a.tables_[i].data != b.tables_[i].data) return false;
  }
  return true;
}

std::string describe(const Relation& r) {
  std::string out = "{";
  for (std::size_t i = 0; i < r.rows().size(); ++i) {
    if (i) out += ", ";
    out += "(";
    const auto& t = r.rows()[i].tuple;
    for (std::size_t j = 0; j < t.size(); ++j) {
      if (j) out += ", ";
      out += t[j].to_sql();
    }
    out += ")x" + std::to_string(r.rows()[i].count);
  }
  return out + "}";
}

}  // namespace eqmorph
