#include "eqmorph/sensitivity.hpp"

#include <algorithm>
#include <functional>
#include <optional>
#include <set>

#include "eqmorph/errors.hpp"
#include "eqmorph/refdb.hpp"

namespace eqmorph {

std::string_view to_string(Sensitivity s) { return s == Sensitivity::Sensitive ? "sensitive" : "insensitive"; }

std::string_view to_string(OperatorKind k) {
  switch (k) {
    case OperatorKind::Scan: return "scan";
    case OperatorKind::Projection: return "projection";
    case OperatorKind::Selection: return "selection";
    case OperatorKind::Dedup: return "dedup";
    case OperatorKind::Union: return "union";
    case OperatorKind::UnionAll: return "union-all";
    case OperatorKind::Count: return "count";
    case OperatorKind::Sum: return "sum";
    case OperatorKind::Min: return "min";
    case OperatorKind::Max: return "max";
    case OperatorKind::Avg: return "avg";
  }
  return "?";
}

Sensitivity classify_operator(OperatorKind k) {
  switch (k) {
    case OperatorKind::Dedup:
    case OperatorKind::Union:
    case OperatorKind::Min:
    case OperatorKind::Max:
      return Sensitivity::Insensitive;
    default:
      return Sensitivity::Sensitive;
  }
}

namespace {
OperatorKind kind_of(AggFn fn) {
  switch (fn) {
    case AggFn::Count: return OperatorKind::Count;
    case AggFn::Sum: return OperatorKind::Sum;
    case AggFn::Min: return OperatorKind::Min;
    case AggFn::Max: return OperatorKind::Max;
    case AggFn::Avg: return OperatorKind::Avg;
  }
  return OperatorKind::Count;
}

void collect(const AlgebraExpr& e, std::vector<OperatorKind>& out) {
  if (e.is<Scan>()) {
    out.push_back(OperatorKind::Scan);
  } else if (e.is<Project>()) {
    out.push_back(OperatorKind::Projection);
  } else if (e.is<Filter>()) {
    out.push_back(OperatorKind::Selection);
  } else if (e.is<Dedup>()) {
    out.push_back(OperatorKind::Dedup);
  } else if (e.is<SetUnion>()) {
    out.push_back(e.as<SetUnion>().all ? OperatorKind::UnionAll : OperatorKind::Union);
  } else {
    const auto& g = e.as<Aggregate>();
    if (!g.keys.empty()) out.push_back(OperatorKind::Dedup);
    for (const auto& a : g.aggs) out.push_back(kind_of(a.fn));
  }
  for (const auto& c : e.children) collect(c, out);
}
}  // namespace

Sensitivity classify_operator(AggFn fn) { return classify_operator(kind_of(fn)); }

std::vector<OperatorKind> operator_sequence(const AlgebraExpr& e) {
  std::vector<OperatorKind> out;
  collect(e, out);
  return out;
}

Sensitivity query_sensitivity(const AlgebraExpr& e) {
  // g·h is sensitive only when both parts are. A UNION ALL is not a
  // composition: a duplicate in either arm reaches the output, so it stays
  // sensitive unless both arms are insensitive.
  if (const auto* u = std::get_if<SetUnion>(&e.op)) {
    if (!u->all) return Sensitivity::Insensitive;
    const bool any = std::any_of(e.children.begin(), e.children.end(), [](const AlgebraExpr& c) {
      return query_sensitivity(c) == Sensitivity::Sensitive;
    });
    return any ? Sensitivity::Sensitive : Sensitivity::Insensitive;
  }
  AlgebraExpr node{e.op, {}};
  for (auto k : operator_sequence(node)) {
    if (classify_operator(k) == Sensitivity::Insensitive) return Sensitivity::Insensitive;
  }
  for (const auto& c : e.children) {
    if (query_sensitivity(c) == Sensitivity::Insensitive) return Sensitivity::Insensitive;
  }
  return Sensitivity::Sensitive;
}

bool aggregate_free(const AlgebraExpr& e) {
  if (e.is<Aggregate>()) return false;
  return std::all_of(e.children.begin(), e.children.end(), [](const AlgebraExpr& c) { return aggregate_free(c); });
}

namespace {

void referenced(const AlgebraExpr& e, std::set<ColumnRef>& out, std::vector<TableDef>& tables) {
  auto item = [&](const SelectItem& i) {
    if (const auto* c = std::get_if<ColumnRef>(&i)) {
      out.insert(*c);
    } else if (const auto& a = std::get<AggCall>(i); a.arg) {
      out.insert(*a.arg);
    }
  };
  if (const auto* s = std::get_if<Scan>(&e.op)) {
    for (const auto& t : s->tables) {
      if (std::none_of(tables.begin(), tables.end(), [&](const TableDef& x) { return x.name == t.name; })) {
        tables.push_back(t);
      }
    }
  } else if (const auto* p = std::get_if<Project>(&e.op)) {
    for (const auto& i : p->items) item(i);
  } else if (const auto* f = std::get_if<Filter>(&e.op)) {
    for (const auto& c : referenced_columns(f->pred)) out.insert(c);
  } else if (const auto* d = std::get_if<Dedup>(&e.op)) {
    for (const auto& k : d->keys) item(k);
  } else if (const auto* g = std::get_if<Aggregate>(&e.op)) {
    for (const auto& k : g->keys) out.insert(k);
    for (const auto& a : g->aggs) item(a);
  }
  for (const auto& c : e.children) referenced(c, out, tables);
}

std::vector<Value> domain(ColumnType t) {
  switch (t) {
    case ColumnType::Int: return {Value::null(), Value::integer(0), Value::integer(1)};
    case ColumnType::Dec: return {Value::null(), Value::decimal(Decimal::make(0, 0)), Value::decimal(Decimal::make(1, 0))};
    case ColumnType::Str: return {Value::null(), Value::string("0"), Value::string("1")};
  }
  return {};
}

Value filler(ColumnType t) { return domain(t)[1]; }

/// All tuples for one table: referenced columns range over the domain.
std::vector<Tuple> candidate_tuples(const TableDef& t, const std::set<ColumnRef>& refs) {
  std::vector<Tuple> out{Tuple{}};
  for (const auto& c : t.columns) {
    const bool used = refs.count(ColumnRef{t.name, c.name}) > 0;
    const std::vector<Value> vals = used ? domain(c.type) : std::vector<Value>{filler(c.type)};
    std::vector<Tuple> next;
    for (const auto& prefix : out) {
      for (const auto& v : vals) {
        Tuple x = prefix;
        x.push_back(v);
        next.push_back(std::move(x));
      }
    }
    out = std::move(next);
  }
  return out;
}

class Runner {
 public:
  explicit Runner(const AlgebraExpr& e) : e_(e) {
    auto forms = try_remap(e);
    if (!forms.empty()) sql_ = std::move(forms.front());
  }
  Relation run(const Database& db) const { return sql_ ? engine_.execute(db, *sql_) : evaluate(db, e_); }

 private:
  const AlgebraExpr& e_;
  std::optional<SqlQuery> sql_;
  Engine engine_;
};

Database doubled(const Database& db, const std::string& table, const Tuple& row) {
  Database out = db;
  std::vector<Row> rows = out.find(table)->data.rows();
  for (auto& r : rows) {
    if (r.tuple == row) r.count *= 2;
  }
  out.set_rows(table, std::move(rows));
  return out;
}

}  // namespace

OracleResult sensitivity_oracle(const AlgebraExpr& e, const OracleBudget& budget) {
  std::set<ColumnRef> refs;
  std::vector<TableDef> tables;
  referenced(e, refs, tables);
  if (tables.empty()) throw BudgetExceeded("no table to populate");
  if (tables.size() > budget.maxTables) {
    throw BudgetExceeded("query touches " + std::to_string(tables.size()) + " tables, budget allows " +
                         std::to_string(budget.maxTables));
  }

  std::vector<std::vector<Tuple>> cands;
  for (const auto& t : tables) cands.push_back(candidate_tuples(t, refs));

  const Runner runner(e);
  std::size_t checked = 0;
  std::optional<WitnessFound> witness;
  bool stop = false;

  // Multiset of rows per table as non-decreasing candidate indices.
  std::vector<std::vector<std::size_t>> picks(tables.size());
  auto try_db = [&] {
    Database db;
    for (std::size_t i = 0; i < tables.size(); ++i) {
      db.create_table(tables[i]);
      std::vector<Row> rows;
      for (auto idx : picks[i]) rows.push_back(Row{cands[i][idx], 1});
      db.set_rows(tables[i].name, std::move(rows));
    }
    ++checked;
    try {
      const Relation base = runner.run(db);
      for (const auto& t : db.tables()) {
        for (const auto& r : t.data.rows()) {
          Database d2 = doubled(db, t.def.name, r.tuple);
          Relation after = runner.run(d2);
          if (!after.same_rows(base)) {
            witness = WitnessFound{std::move(db), t.def.name, r.tuple, base, std::move(after)};
            return true;
          }
        }
      }
    } catch (const ExecError&) {
      // a database the query cannot run on proves nothing either way
    }
    return budget.maxDatabases != 0 && checked >= budget.maxDatabases;
  };

  std::function<void(std::size_t, std::size_t)> fill = [&](std::size_t table, std::size_t left) {
    if (stop) return;
    if (table == tables.size()) {
      stop = try_db();
      return;
    }
    // grow this table's multiset by one row at a time, visiting each size
    std::function<void(std::size_t, std::size_t)> grow = [&](std::size_t from, std::size_t room) {
      fill(table + 1, room);
      if (stop || room == 0) return;
      for (std::size_t c = from; c < cands[table].size() && !stop; ++c) {
        picks[table].push_back(c);
        grow(c, room - 1);
        picks[table].pop_back();
      }
    };
    grow(0, left);
  };
  fill(0, budget.maxRows);

  if (witness) return std::move(*witness);
  return NoWitnessWithinBudget{checked};
}

bool reproduces(const AlgebraExpr& e, const WitnessFound& w) {
  const Runner runner(e);
  const Relation before = runner.run(w.database);
  const Relation after = runner.run(doubled(w.database, w.table, w.row));
  return !before.same_rows(after);
}

}  // namespace eqmorph
