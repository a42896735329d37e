#include "eqmorph/equiv_filter.hpp"

#include <algorithm>
#include <array>

#include "eqmorph/errors.hpp"
#include "eqmorph/refdb.hpp"
#include "eqmorph/rng.hpp"

namespace eqmorph {

namespace {

enum class Cell { Null, Zero, One };

// Per-table row patterns for the tiny databases; each cell fills a whole row.
const std::array<std::vector<Cell>, 8> kPatterns = {{
    {},
    {Cell::Null},
    {Cell::Zero},
    {Cell::One},
    {Cell::Zero, Cell::Zero},
    {Cell::One, Cell::One},
    {Cell::Null, Cell::Null},
    {Cell::Zero, Cell::One},
}};

Value tiny_value(ColumnType t, Cell c) {
  if (c == Cell::Null) return Value::null();
  const int v = c == Cell::One ? 1 : 0;
  switch (t) {
    case ColumnType::Int: return Value::integer(v);
    case ColumnType::Dec: return Value::decimal(Decimal::make(v, 0));
    case ColumnType::Str: return Value::string(std::to_string(v));
  }
  return Value::null();
}

std::vector<Value> base_pool(ColumnType t) {
  switch (t) {
    case ColumnType::Int:
      return {Value::integer(0), Value::integer(1), Value::integer(-1), Value::integer(2)};
    case ColumnType::Dec:
      return {Value::decimal(Decimal::parse("0")), Value::decimal(Decimal::parse("1")),
              Value::decimal(Decimal::parse("0.5")), Value::decimal(Decimal::parse("0.0005"))};
    case ColumnType::Str:
      return {Value::string(""), Value::string("a"), Value::string("b")};
  }
  return {};
}

bool fits(ColumnType t, const Value& v) {
  switch (t) {
    case ColumnType::Int: return v.is_int();
    case ColumnType::Dec: return v.is_numeric();
    case ColumnType::Str: return v.is_str();
  }
  return false;
}

Value coerce(ColumnType t, const Value& v) {
  if (t == ColumnType::Dec && v.is_int()) return Value::decimal(v.as_numeric());
  return v;
}

void collect_constants(const Predicate& p, std::vector<Value>& out) {
  for (const Term* t : {&p.lhs, &p.rhs}) {
    if (const auto* v = std::get_if<Value>(t); v && !v->is_null()) out.push_back(*v);
  }
  for (const auto& o : p.operands) collect_constants(o, out);
}

std::vector<Value> query_constants(const SqlQuery& q) {
  std::vector<Value> out;
  for (const SqlQuery* b : q.blocks()) {
    if (b->where && b->where->kind != Predicate::Kind::Literal) collect_constants(*b->where, out);
    if (b->having) collect_constants(*b->having, out);
  }
  return out;
}

std::vector<TableDef> referenced_tables(const SqlQuery& a, const SqlQuery& b, const Schema& schema) {
  std::vector<TableDef> out;
  for (const SqlQuery* q : {&a, &b}) {
    for (const SqlQuery* blk : q->blocks()) {
      for (const auto& name : blk->from) {
        const TableDef* t = schema.find(name);
        if (t == nullptr) continue;
        if (std::none_of(out.begin(), out.end(), [&](const TableDef& x) { return x.name == name; })) {
          out.push_back(*t);
        }
      }
    }
  }
  return out;
}

struct Outcome {
  std::optional<Relation> rel;
  std::string code;
  std::string message;
};

Outcome run(const Engine& engine, const Database& db, const SqlQuery& q) {
  try {
    return {engine.execute(db, q), {}, {}};
  } catch (const ExecError& e) {
    return {std::nullopt, e.code(), e.what()};
  }
}

}  // namespace

std::vector<Database> filter_databases(const std::vector<TableDef>& tables, const FilterBudget& budget,
                                       const std::vector<Value>& constants) {
  std::vector<Database> out;
  for (std::size_t i = 0; i < budget.tiny; ++i) {
    Database db;
    for (std::size_t j = 0; j < tables.size(); ++j) {
      db.create_table(tables[j]);
      const auto& pattern = kPatterns[(i + j) % kPatterns.size()];
      for (Cell c : pattern) {
        Tuple t;
        for (const auto& col : tables[j].columns) t.push_back(tiny_value(col.type, c));
        db.insert(tables[j].name, std::move(t));
      }
    }
    out.push_back(std::move(db));
  }

  Rng rng(mix_seed(budget.seed, 0xF1'17E5));
  for (std::size_t i = 0; i < budget.random; ++i) {
    Database db;
    for (const auto& def : tables) {
      db.create_table(def);
      const std::size_t max_rows = std::max<std::size_t>(budget.maxRows, 2);
      const auto n = static_cast<std::size_t>(rng.uniform(2, static_cast<std::int64_t>(max_rows)));
      std::vector<Tuple> rows;
      for (std::size_t r = 0; r + 1 < n; ++r) {
        Tuple t;
        for (const auto& col : def.columns) {
          std::vector<Value> pool = base_pool(col.type);
          for (const auto& c : constants) {
            if (fits(col.type, c)) pool.push_back(coerce(col.type, c));
          }
          t.push_back(rng.chance(0.2) ? Value::null() : rng.pick(pool));
        }
        rows.push_back(std::move(t));
      }
      // force a NULL, then a duplicated row
      rows[rng.index(rows.size())][rng.index(def.columns.size())] = Value::null();
      rows.push_back(rows[rng.index(rows.size())]);
      for (auto& t : rows) db.insert(def.name, std::move(t));
    }
    out.push_back(std::move(db));
  }
  return out;
}

Verdict check_bounded(const SqlQuery& q1, const SqlQuery& q2, const Schema& schema, const FilterBudget& budget) {
  auto constants = query_constants(q1);
  const auto more = query_constants(q2);
  constants.insert(constants.end(), more.begin(), more.end());
  const auto dbs = filter_databases(referenced_tables(q1, q2, schema), budget, constants);

  const Engine engine;
  std::size_t checked = 0;
  for (const auto& db : dbs) {
    ++checked;
    Outcome a = run(engine, db, q1);
    Outcome b = run(engine, db, q2);
    if (!a.rel && !b.rel) {
      if (a.code == b.code) continue;
      return NotEquivalent{db, std::nullopt, std::nullopt, a.message + " / " + b.message};
    }
    if (!a.rel || !b.rel) {
      return NotEquivalent{db, std::move(a.rel), std::move(b.rel), a.rel ? b.message : a.message};
    }
    if (!a.rel->same_rows(*b.rel)) return NotEquivalent{db, std::move(a.rel), std::move(b.rel), {}};
  }
  return NoCounterexample{checked};
}

bool witness_reproduces(const SqlQuery& q1, const SqlQuery& q2, const NotEquivalent& v) {
  const Engine engine;
  const Outcome a = run(engine, v.witness, q1);
  const Outcome b = run(engine, v.witness, q2);
  if (!a.rel || !b.rel) return !(!a.rel && !b.rel && a.code == b.code);
  return !a.rel->same_rows(*b.rel);
}

}  // namespace eqmorph
