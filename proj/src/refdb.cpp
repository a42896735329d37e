#include "eqmorph/refdb.hpp"

#include <algorithm>
#include <cstdio>

#include "eqmorph/errors.hpp"
#include "eqmorph/eval.hpp"
#include "eqmorph/sql.hpp"

namespace eqmorph {

std::string_view to_string(FaultStage stage) {
  switch (stage) {
    case FaultStage::Where: return "where";
    case FaultStage::Having: return "having";
    case FaultStage::Aggregate: return "aggregate";
    case FaultStage::Distinct: return "distinct";
    case FaultStage::SetOperation: return "set-operation";
    case FaultStage::Render: return "render";
  }
  return "?";
}

const std::vector<FaultSpec>& fault_registry() {
  static const std::vector<FaultSpec> registry = {
      {"float-format-split", FaultStage::Render,
       "SUM over DECIMAL is printed through a double when the block has HAVING",
       {{"format", "%.20g"}, {"trigger", "having"}}},
      {"drop-distinct", FaultStage::Distinct, "DISTINCT keeps every duplicate", {}},
      {"union-all-as-union", FaultStage::SetOperation,
       "UNION ALL removes duplicates when its right arm has a WHERE clause",
       {{"trigger", "rhs-where"}}},
      {"having-pre-group", FaultStage::Having,
       "HAVING is evaluated on input rows before grouping and lets UNKNOWN through", {}},
      {"null-where-true", FaultStage::Where, "rows whose WHERE predicate is UNKNOWN are kept", {}},
      {"sum-skips-duplicates", FaultStage::Aggregate,
       "SUM counts each distinct input row once when the block has no WHERE",
       {{"trigger", "no-where"}}},
  };
  return registry;
}

const FaultSpec* find_fault(std::string_view name) {
  for (const auto& f : fault_registry()) {
    if (f.name == name) return &f;
  }
  return nullptr;
}

Engine with_fault(std::string_view name) {
  const FaultSpec* f = find_fault(name);
  if (f == nullptr) throw UnknownFault(std::string(name));
  return Engine(*f);
}

namespace {

SqlQuery resolved_or_throw(const Database& db, const SqlQuery& q) {
  auto res = resolve(q, db.schema());
  if (!res.ok()) throw ExecError(res.errors.front().code(), res.errors.front().detail);
  return std::move(res.query);
}

std::vector<std::string> names_of(const std::vector<SelectItem>& items) {
  std::vector<std::string> out;
  out.reserve(items.size());
  for (const auto& i : items) out.push_back(item_name(i));
  return out;
}

}  // namespace

Relation Engine::run_block(const Database& db, const SqlQuery& block) const {
  // FROM: multiset cross product, multiplicities multiplied.
  std::vector<SelectItem> cols;
  std::vector<Row> rows{Row{{}, 1}};
  for (const auto& name : block.from) {
    const Table* t = db.find(name);
    if (t == nullptr) throw ExecError(codes::kUnknownTable, name);
    for (const auto& c : t->def.columns) cols.emplace_back(ColumnRef{name, c.name});
    std::vector<Row> next;
    next.reserve(rows.size() * t->data.rows().size());
    for (const auto& r : rows) {
      for (const auto& s : t->data.rows()) {
        Tuple tuple = r.tuple;
        tuple.insert(tuple.end(), s.tuple.begin(), s.tuple.end());
        next.push_back(Row{std::move(tuple), r.count * s.count});
      }
    }
    rows = std::move(next);
  }

  if (block.where) {
    const CompiledPredicate where(*block.where, cols);
    const bool pass_unknown = faulty("null-where-true");
    std::erase_if(rows, [&](const Row& r) {
      const TruthValue t = where.eval(r.tuple);
      return !(t == TruthValue::True || (pass_unknown && t == TruthValue::Unknown));
    });
  }

  std::vector<Row> out;
  if (block.grouped()) {
    if (block.having && faulty("having-pre-group")) {
      const CompiledPredicate having(*block.having, cols);
      std::erase_if(rows, [&](const Row& r) { return having.eval(r.tuple) == TruthValue::False; });
    }
    std::vector<std::size_t> key_idx;
    for (const auto& g : block.group_by) key_idx.push_back(column_index(cols, g));
    std::map<Tuple, std::vector<const Row*>> groups;
    if (block.group_by.empty()) groups[Tuple{}];  // one group even over no rows
    for (const auto& r : rows) {
      Tuple key;
      key.reserve(key_idx.size());
      for (auto i : key_idx) key.push_back(r.tuple[i]);
      groups[std::move(key)].push_back(&r);
    }

    const std::vector<SelectItem> key_cols(block.group_by.begin(), block.group_by.end());
    std::optional<CompiledPredicate> having;
    if (block.having && !faulty("having-pre-group")) having.emplace(*block.having, key_cols);
    const bool sum_once = faulty("sum-skips-duplicates") && !block.where;

    for (const auto& [key, members] : groups) {
      if (having && having->eval(key) != TruthValue::True) continue;
      Tuple tuple;
      for (const auto& item : block.select) {
        if (const auto* c = std::get_if<ColumnRef>(&item)) {
          tuple.push_back(key[column_index(key_cols, *c)]);
          continue;
        }
        const auto& call = std::get<AggCall>(item);
        const std::ptrdiff_t arg = call.arg ? static_cast<std::ptrdiff_t>(column_index(cols, *call.arg)) : -1;
        std::vector<Weighted> group;
        group.reserve(members.size());
        for (const Row* r : members) {
          const std::uint64_t n = sum_once && call.fn == AggFn::Sum ? 1 : r->count;
          group.push_back(Weighted{arg >= 0 ? r->tuple[static_cast<std::size_t>(arg)] : Value::null(), n});
        }
        tuple.push_back(eval_agg(call, group));
      }
      out.push_back(Row{std::move(tuple), 1});
    }
  } else {
    std::vector<std::size_t> idx;
    for (const auto& item : block.select) idx.push_back(column_index(cols, std::get<ColumnRef>(item)));
    out.reserve(rows.size());
    for (auto& r : rows) {
      Tuple tuple;
      tuple.reserve(idx.size());
      for (auto i : idx) tuple.push_back(r.tuple[i]);
      out.push_back(Row{std::move(tuple), r.count});
    }
  }

  Relation rel(names_of(block.select), std::move(out));
  if (block.distinct && !faulty("drop-distinct")) return rel.flattened();
  return rel;
}

Relation Engine::execute(const Database& db, const SqlQuery& q) const {
  const SqlQuery resolved = resolved_or_throw(db, q);
  Relation acc = run_block(db, resolved);
  for (const SqlQuery* cur = &resolved; cur->set_op; cur = &*cur->set_op->rhs) {
    const SqlQuery& rhs = *cur->set_op->rhs;
    Relation right = run_block(db, rhs);
    Relation both = bag_union(acc, right);
    const bool dedup = cur->set_op->kind == SetOpKind::Union ||
                       (faulty("union-all-as-union") && rhs.where.has_value());
    acc = dedup ? both.flattened() : std::move(both);
  }
  return acc;
}

std::optional<std::string> render_value(const Value& v) {
  if (v.is_null()) return std::nullopt;
  return v.to_string();
}

RenderedResult Engine::execute_rendered(const Database& db, const SqlQuery& q) const {
  const Relation rel = execute(db, q);
  const SqlQuery resolved = resolved_or_throw(db, q);
  const auto types = output_types(resolved, db.schema());

  std::vector<bool> via_double(types.size(), false);
  if (faulty("float-format-split")) {
    bool has_having = false;
    for (const SqlQuery* b : resolved.blocks()) has_having = has_having || b->having.has_value();
    for (std::size_t i = 0; has_having && i < resolved.select.size(); ++i) {
      const auto* call = std::get_if<AggCall>(&resolved.select[i]);
      via_double[i] = call && call->fn == AggFn::Sum && types[i] == ColumnType::Dec;
    }
  }

  RenderedResult out;
  out.columns = rel.columns();
  for (auto t : types) out.types.emplace_back(to_string(t));
  for (const auto& r : rel.rows()) {
    std::vector<std::optional<std::string>> line;
    for (std::size_t i = 0; i < r.tuple.size(); ++i) {
      const Value& v = r.tuple[i];
      if (via_double[i] && v.is_dec()) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.20g", v.as_dec().to_double());
        line.emplace_back(buf);
      } else {
        line.push_back(render_value(v));
      }
    }
    for (std::uint64_t k = 0; k < r.count; ++k) out.rows.push_back(line);
  }
  return out;
}

Relation execute(const Database& db, const SqlQuery& q) { return Engine().execute(db, q); }

}  // namespace eqmorph
