#include "eqmorph/algebra.hpp"

#include <algorithm>
#include <map>

#include "eqmorph/errors.hpp"
#include "eqmorph/eval.hpp"
#include "eqmorph/sql.hpp"

namespace eqmorph {

std::string_view to_string(RelType t) {
  switch (t) {
    case RelType::Multiset: return "multiset";
    case RelType::Set: return "set";
    case RelType::Value: return "value";
  }
  return "?";
}

namespace {

void flatten_conj(const Predicate& p, std::vector<Predicate>& out) {
  if (p.kind == Predicate::Kind::And) {
    flatten_conj(p.operands[0], out);
    out.push_back(p.operands[1]);
  } else {
    out.push_back(p);
  }
}

Predicate join_conj(const std::vector<Predicate>& preds) {
  Predicate acc = preds.front();
  for (std::size_t i = 1; i < preds.size(); ++i) acc = Predicate::conj(std::move(acc), preds[i]);
  return acc;
}

AlgebraExpr wrap(Operator op, AlgebraExpr child) {
  AlgebraExpr e{std::move(op), {}};
  e.children.push_back(std::move(child));
  return e;
}

std::vector<AggCall> unique_aggs(const std::vector<SelectItem>& items) {
  std::vector<AggCall> out;
  for (const auto& item : items) {
    if (const auto* a = std::get_if<AggCall>(&item); a && std::find(out.begin(), out.end(), *a) == out.end()) {
      out.push_back(*a);
    }
  }
  return out;
}

AlgebraExpr lower_block(const SqlQuery& b, const Schema& schema) {
  Scan scan;
  for (const auto& name : b.from) scan.tables.push_back(*schema.find(name));
  AlgebraExpr e{std::move(scan), {}};

  std::vector<Predicate> conj;
  if (b.where) flatten_conj(*b.where, conj);
  for (auto& p : conj) e = wrap(Filter{std::move(p)}, std::move(e));

  if (b.has_aggregates()) {
    e = wrap(Aggregate{b.group_by, unique_aggs(b.select)}, std::move(e));
  } else if (!b.group_by.empty()) {
    e = wrap(Dedup{std::vector<SelectItem>(b.group_by.begin(), b.group_by.end())}, std::move(e));
  }

  conj.clear();
  if (b.having) flatten_conj(*b.having, conj);
  for (auto& p : conj) e = wrap(Filter{std::move(p)}, std::move(e));

  if (b.distinct) e = wrap(Dedup{b.select}, std::move(e));
  return wrap(Project{b.select}, std::move(e));
}

bool contains(const std::vector<SelectItem>& cols, const SelectItem& item) {
  return std::find(cols.begin(), cols.end(), item) != cols.end();
}

std::string items_text(const std::vector<SelectItem>& items) {
  std::string out = "[";
  for (std::size_t i = 0; i < items.size(); ++i) out += (i ? ", " : "") + item_name(items[i]);
  return out + "]";
}

}  // namespace

AlgebraExpr lower(const SqlQuery& q, const Schema& schema) {
  const Resolution res = resolve(q, schema);
  if (!res.ok()) throw LoweringError(res.errors.front().to_string());
  const SqlQuery& r = res.query;
  AlgebraExpr acc = lower_block(r, schema);
  for (const SqlQuery* cur = &r; cur->set_op; cur = &*cur->set_op->rhs) {
    AlgebraExpr u{SetUnion{cur->set_op->kind == SetOpKind::UnionAll}, {}};
    u.children.push_back(std::move(acc));
    u.children.push_back(lower_block(*cur->set_op->rhs, schema));
    acc = std::move(u);
  }
  return acc;
}

std::vector<SelectItem> output_columns(const AlgebraExpr& e) {
  return std::visit(
      [&](const auto& op) -> std::vector<SelectItem> {
        using T = std::decay_t<decltype(op)>;
        if constexpr (std::is_same_v<T, Scan>) {
          std::vector<SelectItem> out;
          for (const auto& t : op.tables) {
            for (const auto& c : t.columns) out.emplace_back(ColumnRef{t.name, c.name});
          }
          return out;
        } else if constexpr (std::is_same_v<T, Project>) {
          return op.items;
        } else if constexpr (std::is_same_v<T, Dedup>) {
          return op.keys;
        } else if constexpr (std::is_same_v<T, Aggregate>) {
          std::vector<SelectItem> out(op.keys.begin(), op.keys.end());
          out.insert(out.end(), op.aggs.begin(), op.aggs.end());
          return out;
        } else {
          return e.children.empty() ? std::vector<SelectItem>{} : output_columns(e.children.front());
        }
      },
      e.op);
}

std::string label(const AlgebraExpr& e) {
  return std::visit(
      [](const auto& op) -> std::string {
        using T = std::decay_t<decltype(op)>;
        if constexpr (std::is_same_v<T, Scan>) {
          std::string out = "Scan ";
          for (std::size_t i = 0; i < op.tables.size(); ++i) out += (i ? ", " : "") + op.tables[i].name;
          return out;
        } else if constexpr (std::is_same_v<T, Project>) {
          return "Project " + items_text(op.items);
        } else if constexpr (std::is_same_v<T, Filter>) {
          return "Filter (" + render(op.pred) + ")";
        } else if constexpr (std::is_same_v<T, Dedup>) {
          return "Dedup " + items_text(op.keys);
        } else if constexpr (std::is_same_v<T, Aggregate>) {
          return "Aggregate " + items_text({op.keys.begin(), op.keys.end()}) + " " +
                 items_text({op.aggs.begin(), op.aggs.end()});
        } else {
          return op.all ? "UnionAll" : "Union";
        }
      },
      e.op);
}

namespace {
void dump_into(const AlgebraExpr& e, int depth, std::string& out) {
  out.append(static_cast<std::size_t>(depth) * 2, ' ');
  out += label(e);
  out += '\n';
  for (const auto& c : e.children) dump_into(c, depth + 1, out);
}
}  // namespace

std::string dump(const AlgebraExpr& e) {
  std::string out;
  dump_into(e, 0, out);
  return out;
}

RelType typecheck(const AlgebraExpr& e, std::vector<std::string>* lints) {
  const std::string name = label(e);
  const std::size_t want = e.is<Scan>() ? 0 : e.is<SetUnion>() ? 2 : 1;
  if (e.children.size() != want) {
    throw TypeError(name, std::to_string(want) + " children", std::to_string(e.children.size()));
  }
  if (const auto* s = std::get_if<Scan>(&e.op)) {
    if (s->tables.empty()) throw TypeError(name, "at least one table", "none");
    return RelType::Multiset;
  }
  if (const auto* u = std::get_if<SetUnion>(&e.op)) {
    typecheck(e.children[0], lints);
    typecheck(e.children[1], lints);
    const auto l = output_columns(e.children[0]).size();
    const auto r = output_columns(e.children[1]).size();
    if (l != r) throw TypeError(name, "equal arity", std::to_string(l) + " vs " + std::to_string(r));
    return u->all ? RelType::Multiset : RelType::Set;
  }

  const RelType in = typecheck(e.children[0], lints);
  const auto cols = output_columns(e.children[0]);
  auto require = [&](const SelectItem& item) {
    if (!contains(cols, item)) throw TypeError(name, "column of " + items_text(cols), item_name(item));
  };

  if (const auto* p = std::get_if<Project>(&e.op)) {
    if (p->items.empty()) throw TypeError(name, "non-empty projection", "[]");
    for (const auto& i : p->items) require(i);
    return in;
  }
  if (const auto* f = std::get_if<Filter>(&e.op)) {
    for (const auto& c : referenced_columns(f->pred)) require(c);
    return in;
  }
  if (const auto* d = std::get_if<Dedup>(&e.op)) {
    if (d->keys.empty()) throw TypeError(name, "non-empty keys", "[]");
    for (const auto& k : d->keys) require(k);
    if (in == RelType::Set && lints != nullptr) lints->push_back(name + ": dedup over a set is the identity");
    return RelType::Set;
  }
  const auto& g = e.as<Aggregate>();
  if (g.aggs.empty()) throw TypeError(name, "at least one aggregate", "none");
  for (const auto& k : g.keys) require(k);
  for (const auto& a : g.aggs) {
    if (a.arg) require(*a.arg);
  }
  return RelType::Value;
}

const AlgebraExpr& node_at(const AlgebraExpr& e, const NodePath& path) {
  const AlgebraExpr* n = &e;
  for (auto i : path) n = &n->children.at(i);
  return *n;
}

AlgebraExpr replace_at(const AlgebraExpr& e, const NodePath& path, AlgebraExpr replacement) {
  AlgebraExpr out = e;
  AlgebraExpr* n = &out;
  for (auto i : path) n = &n->children.at(i);
  *n = std::move(replacement);
  return out;
}

// ---------------------------------------------------------------------------
// Remapping

namespace {

std::vector<SqlQuery> remap_block(const AlgebraExpr& e) {
  if (!e.is<Project>()) return {};
  const auto& items = e.as<Project>().items;
  std::vector<const AlgebraExpr*> ups;  // bottom to top, excluding Scan and Project
  const AlgebraExpr* n = &e.child();
  while (!n->is<Scan>()) {
    if (n->is<SetUnion>() || n->is<Project>() || n->children.size() != 1) return {};
    ups.push_back(n);
    n = &n->child();
  }
  std::reverse(ups.begin(), ups.end());
  const Scan& scan = n->as<Scan>();
  const bool has_agg_items = std::any_of(items.begin(), items.end(),
                                         [](const SelectItem& i) { return std::holds_alternative<AggCall>(i); });

  std::vector<SqlQuery> out;
  auto emit = [&](SqlQuery q) {
    if (std::find(out.begin(), out.end(), q) == out.end()) out.push_back(std::move(q));
  };

  const bool top_dedup = !ups.empty() && ups.back()->is<Dedup>() && ups.back()->as<Dedup>().keys == items;
  for (int d = 0; d <= (top_dedup ? 1 : 0); ++d) {
    const std::size_t body = ups.size() - static_cast<std::size_t>(d);
    for (std::ptrdiff_t gi = -1; gi < static_cast<std::ptrdiff_t>(body); ++gi) {
      const std::size_t g = gi < 0 ? body : static_cast<std::size_t>(gi);
      if (gi >= 0 && !ups[g]->is<Aggregate>() && !ups[g]->is<Dedup>()) continue;

      SqlQuery q;
      q.select = items;
      q.distinct = d == 1;
      for (const auto& t : scan.tables) q.from.push_back(t.name);

      bool ok = true;
      std::vector<Predicate> where;
      std::vector<Predicate> having;
      for (std::size_t i = 0; i < g && ok; ++i) {
        if (ups[i]->is<Filter>()) {
          where.push_back(ups[i]->as<Filter>().pred);
        } else {
          ok = false;
        }
      }
      for (std::size_t i = g + 1; i < body && ok; ++i) {
        if (ups[i]->is<Filter>()) {
          having.push_back(ups[i]->as<Filter>().pred);
        } else {
          ok = false;
        }
      }
      if (!ok) continue;

      if (gi < 0) {
        if (has_agg_items) continue;
      } else {
        if (scan.tables.size() != 1) continue;
        const AlgebraExpr& node = *ups[g];
        if (node.is<Aggregate>()) {
          const auto& agg = node.as<Aggregate>();
          if (agg.aggs != unique_aggs(items)) continue;
          q.group_by = agg.keys;
        } else {
          for (const auto& k : node.as<Dedup>().keys) {
            const auto* c = std::get_if<ColumnRef>(&k);
            if (c == nullptr) {
              ok = false;
              break;
            }
            q.group_by.push_back(*c);
          }
          if (!ok || has_agg_items) continue;
        }
        for (const auto& item : items) {
          if (const auto* c = std::get_if<ColumnRef>(&item);
              c && std::find(q.group_by.begin(), q.group_by.end(), *c) == q.group_by.end()) {
            ok = false;
          }
        }
        if (!having.empty() && q.group_by.empty()) ok = false;
        for (const auto& h : having) {
          for (const auto& c : referenced_columns(h)) {
            if (std::find(q.group_by.begin(), q.group_by.end(), c) == q.group_by.end()) ok = false;
          }
        }
        if (!ok) continue;
      }
      if (!where.empty()) q.where = join_conj(where);
      if (!having.empty()) q.having = join_conj(having);
      emit(std::move(q));
    }
  }
  if (scan.tables.size() == 1) {
    const std::size_t n_qualified = out.size();
    for (std::size_t i = 0; i < n_qualified; ++i) emit(strip_qualifiers(out[i]));
  }
  return out;
}

void append_chain(SqlQuery& q, SetOpKind kind, SqlQuery rhs) {
  SqlQuery* last = &q;
  while (last->set_op) last = &*last->set_op->rhs;
  last->set_op = SetOperation{kind, Box<SqlQuery>(std::move(rhs))};
}

}  // namespace

std::vector<SqlQuery> try_remap(const AlgebraExpr& e) {
  if (!e.is<SetUnion>()) return remap_block(e);
  if (e.children.size() != 2) return {};
  const auto lefts = try_remap(e.children[0]);
  if (lefts.empty()) return {};
  const auto rights = remap_block(e.children[1]);
  const SetOpKind kind = e.as<SetUnion>().all ? SetOpKind::UnionAll : SetOpKind::Union;
  std::vector<SqlQuery> out;
  for (const auto& l : lefts) {
    for (const auto& r : rights) {
      SqlQuery q = l;
      append_chain(q, kind, r);
      out.push_back(std::move(q));
    }
  }
  return out;
}

std::vector<SqlQuery> remap_to_sql(const AlgebraExpr& e) {
  auto out = try_remap(e);
  if (out.empty()) throw RemapError("no SQL realization for:\n" + dump(e));
  return out;
}

// ---------------------------------------------------------------------------
// Interpreter

namespace {

struct Bag {
  std::vector<SelectItem> cols;
  std::vector<Row> rows;
};

std::vector<std::size_t> indices(const std::vector<SelectItem>& cols, const std::vector<SelectItem>& want) {
  std::vector<std::size_t> out;
  for (const auto& w : want) out.push_back(item_index(cols, w));
  return out;
}

Tuple pick(const Tuple& t, const std::vector<std::size_t>& idx) {
  Tuple out;
  out.reserve(idx.size());
  for (auto i : idx) out.push_back(t[i]);
  return out;
}

Bag merged(std::vector<SelectItem> cols, std::vector<Row> rows, bool as_set) {
  std::map<Tuple, std::uint64_t> m;
  for (auto& r : rows) m[std::move(r.tuple)] += r.count;
  Bag out{std::move(cols), {}};
  for (auto& [t, c] : m) out.rows.push_back(Row{t, as_set ? 1 : c});
  return out;
}

Bag eval_node(const Database& db, const AlgebraExpr& e) {
  if (const auto* s = std::get_if<Scan>(&e.op)) {
    Bag out{{}, {Row{{}, 1}}};
    for (const auto& def : s->tables) {
      const Table* t = db.find(def.name);
      if (t == nullptr) throw ExecError(codes::kUnknownTable, def.name);
      for (const auto& c : t->def.columns) out.cols.emplace_back(ColumnRef{def.name, c.name});
      std::vector<Row> next;
      for (const auto& r : out.rows) {
        for (const auto& x : t->data.rows()) {
          Tuple tuple = r.tuple;
          tuple.insert(tuple.end(), x.tuple.begin(), x.tuple.end());
          next.push_back(Row{std::move(tuple), r.count * x.count});
        }
      }
      out.rows = std::move(next);
    }
    return out;
  }
  if (const auto* u = std::get_if<SetUnion>(&e.op)) {
    Bag l = eval_node(db, e.children[0]);
    Bag r = eval_node(db, e.children[1]);
    l.rows.insert(l.rows.end(), std::make_move_iterator(r.rows.begin()), std::make_move_iterator(r.rows.end()));
    return merged(std::move(l.cols), std::move(l.rows), !u->all);
  }

  Bag in = eval_node(db, e.children[0]);
  if (const auto* p = std::get_if<Project>(&e.op)) {
    const auto idx = indices(in.cols, p->items);
    Bag out{p->items, {}};
    for (const auto& r : in.rows) out.rows.push_back(Row{pick(r.tuple, idx), r.count});
    return out;
  }
  if (const auto* f = std::get_if<Filter>(&e.op)) {
    const CompiledPredicate pred(f->pred, in.cols);
    std::erase_if(in.rows, [&](const Row& r) { return pred.eval(r.tuple) != TruthValue::True; });
    return in;
  }
  if (const auto* d = std::get_if<Dedup>(&e.op)) {
    const auto idx = indices(in.cols, d->keys);
    std::vector<Row> rows;
    for (const auto& r : in.rows) rows.push_back(Row{pick(r.tuple, idx), 1});
    return merged(d->keys, std::move(rows), true);
  }
  const auto& g = e.as<Aggregate>();
  const auto key_idx = indices(in.cols, {g.keys.begin(), g.keys.end()});
  std::map<Tuple, std::vector<const Row*>> groups;
  if (g.keys.empty()) groups[Tuple{}];
  for (const auto& r : in.rows) groups[pick(r.tuple, key_idx)].push_back(&r);
  Bag out{output_columns(e), {}};
  for (const auto& [key, members] : groups) {
    Tuple t = key;
    for (const auto& a : g.aggs) {
      std::vector<Weighted> vals;
      const std::ptrdiff_t arg = a.arg ? static_cast<std::ptrdiff_t>(column_index(in.cols, *a.arg)) : -1;
      for (const Row* r : members) {
        vals.push_back(Weighted{arg >= 0 ? r->tuple[static_cast<std::size_t>(arg)] : Value::null(), r->count});
      }
      t.push_back(eval_agg(a, vals));
    }
    out.rows.push_back(Row{std::move(t), 1});
  }
  return out;
}

}  // namespace

Relation evaluate(const Database& db, const AlgebraExpr& e) {
  Bag b = eval_node(db, e);
  std::vector<std::string> names;
  for (const auto& c : b.cols) names.push_back(item_name(c));
  return Relation(std::move(names), std::move(b.rows));
}

}  // namespace eqmorph
