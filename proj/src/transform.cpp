#include "eqmorph/transform.hpp"

#include <algorithm>
#include <numeric>
#include <set>

#include "eqmorph/sensitivity.hpp"
#include "eqmorph/sql.hpp"

namespace eqmorph {

namespace {

AlgebraExpr wrap(Operator op, AlgebraExpr child) {
  AlgebraExpr e{std::move(op), {}};
  e.children.push_back(std::move(child));
  return e;
}

/// Scan at the bottom of a single-child chain, or nullptr if the chain forks.
const Scan* chain_scan(const AlgebraExpr& e) {
  const AlgebraExpr* n = &e;
  while (!n->is<Scan>()) {
    if (n->children.size() != 1 || n->is<SetUnion>()) return nullptr;
    n = &n->child();
  }
  return &n->as<Scan>();
}

bool only_filters_to_scan(const AlgebraExpr& e) {
  const AlgebraExpr* n = &e;
  while (n->is<Filter>()) n = &n->child();
  return n->is<Scan>();
}

bool all_columns(const std::vector<SelectItem>& items) {
  return std::all_of(items.begin(), items.end(),
                     [](const SelectItem& i) { return std::holds_alternative<ColumnRef>(i); });
}

bool subset(const std::vector<SelectItem>& small, const std::vector<SelectItem>& big) {
  return std::all_of(small.begin(), small.end(),
                     [&](const SelectItem& i) { return std::find(big.begin(), big.end(), i) != big.end(); });
}

bool refs_within(const Predicate& p, const std::vector<SelectItem>& keys) {
  for (const auto& c : referenced_columns(p)) {
    if (std::find(keys.begin(), keys.end(), SelectItem{c}) == keys.end()) return false;
  }
  return true;
}

/// Grouping node that can render as GROUP BY: γ with keys, or the lowest δ
/// of a single-table block whose keys are plain columns.
bool grouping_site(const AlgebraExpr& n) {
  const Scan* s = chain_scan(n);
  if (s == nullptr || s->tables.size() != 1) return false;
  if (n.is<Aggregate>()) return !n.as<Aggregate>().keys.empty();
  if (n.is<Dedup>()) return all_columns(n.as<Dedup>().keys) && only_filters_to_scan(n.child());
  return false;
}

// ---- R6 predicate synthesis --------------------------------------------------

std::vector<Value> column_values(const RuleContext& ctx, const ColumnRef& c) {
  std::vector<Value> out;
  if (ctx.database == nullptr) return out;
  const Table* t = ctx.database->find(c.table);
  if (t == nullptr) return out;
  std::size_t idx = 0;
  while (idx < t->def.columns.size() && t->def.columns[idx].name != c.column) ++idx;
  if (idx == t->def.columns.size()) return out;
  for (const auto& r : t->data.rows()) {
    if (!r.tuple[idx].is_null()) out.push_back(r.tuple[idx]);
  }
  return out;
}

ColumnType column_type(const RuleContext& ctx, const ColumnRef& c) {
  if (ctx.schema != nullptr) {
    if (const TableDef* t = ctx.schema->find(c.table)) {
      if (const ColumnDef* col = t->find(c.column)) return col->type;
    }
  }
  return ColumnType::Int;
}

Predicate key_comparison(const ColumnRef& key, const RuleContext& ctx) {
  static constexpr CmpOp kOps[] = {CmpOp::Eq, CmpOp::Ne, CmpOp::Lt, CmpOp::Le, CmpOp::Gt, CmpOp::Ge};
  const auto vals = column_values(ctx, key);
  Value constant;
  if (!vals.empty()) {
    constant = ctx.rng ? ctx.rng->pick(vals) : vals.front();
  } else {
    switch (column_type(ctx, key)) {
      case ColumnType::Int: constant = Value::integer(0); break;
      case ColumnType::Dec: constant = Value::decimal(Decimal::make(0, 0)); break;
      case ColumnType::Str: constant = Value::string("a"); break;
    }
  }
  const CmpOp op = ctx.rng ? kOps[ctx.rng->index(6)] : CmpOp::Ge;
  return Predicate::compare(key, op, constant);
}

Predicate key_predicate(const std::vector<ColumnRef>& keys, const RuleContext& ctx) {
  auto pick_key = [&]() -> const ColumnRef& { return ctx.rng ? ctx.rng->pick(keys) : keys.front(); };
  Predicate p = key_comparison(pick_key(), ctx);
  if (ctx.rng == nullptr) return p;
  const double roll = ctx.rng->unit();
  if (roll < 0.15) return Predicate::conj(std::move(p), key_comparison(pick_key(), ctx));
  if (roll < 0.3) return Predicate::disj(std::move(p), key_comparison(pick_key(), ctx));
  if (roll < 0.4) return Predicate::negate(std::move(p));
  return p;
}

std::vector<ColumnRef> grouping_keys(const AlgebraExpr& n) {
  if (n.is<Aggregate>()) return n.as<Aggregate>().keys;
  std::vector<ColumnRef> out;
  for (const auto& k : n.as<Dedup>().keys) out.push_back(std::get<ColumnRef>(k));
  return out;
}

// ---- catalog -------------------------------------------------------------------

Catalog make_catalog() {
  Catalog c;

  c.push_back({"projection-pull-up", PairingMode::SeedVsMutant,
               [](const AlgebraExpr& root, const NodePath& site) {
                 const AlgebraExpr& n = node_at(root, site);
                 if (!n.is<Project>()) return false;
                 const Scan* s = chain_scan(n);
                 if (s == nullptr || s->tables.size() != 1) return false;
                 for (const AlgebraExpr* x = &n.child(); !x->is<Scan>(); x = &x->child()) {
                   if (x->is<Filter>()) return true;
                 }
                 return false;
               },
               [](const AlgebraExpr& n, const RuleContext&) { return std::vector<AlgebraExpr>{n}; }});

  c.push_back({"commutative-selections", PairingMode::SeedVsMutant,
               [](const AlgebraExpr& root, const NodePath& site) {
                 const AlgebraExpr& n = node_at(root, site);
                 return n.is<Filter>() && n.child().is<Filter>() &&
                        n.as<Filter>().pred != n.child().as<Filter>().pred;
               },
               [](const AlgebraExpr& n, const RuleContext&) {
                 AlgebraExpr out = n;
                 std::swap(out.as<Filter>().pred, out.children[0].as<Filter>().pred);
                 return std::vector<AlgebraExpr>{std::move(out)};
               }});

  c.push_back({"cascade-of-projection", PairingMode::SeedVsMutant,
               [](const AlgebraExpr& root, const NodePath& site) {
                 const AlgebraExpr& n = node_at(root, site);
                 if (n.children.size() != 1) return false;
                 const AlgebraExpr& ch = n.child();
                 if (n.is<Project>() && ch.is<Project>()) return subset(n.as<Project>().items, ch.as<Project>().items);
                 if (n.is<Dedup>() && ch.is<Dedup>()) return subset(n.as<Dedup>().keys, ch.as<Dedup>().keys);
                 return false;
               },
               [](const AlgebraExpr& n, const RuleContext&) {
                 AlgebraExpr out{n.op, {}};
                 out.children.push_back(n.child().child());
                 return std::vector<AlgebraExpr>{std::move(out)};
               }});

  c.push_back({"commutative-set-union", PairingMode::SeedVsMutant,
               [](const AlgebraExpr& root, const NodePath& site) {
                 const AlgebraExpr& n = node_at(root, site);
                 return n.is<SetUnion>() && !n.children[0].is<SetUnion>() && !n.children[1].is<SetUnion>();
               },
               [](const AlgebraExpr& n, const RuleContext&) {
                 AlgebraExpr out = n;
                 std::swap(out.children[0], out.children[1]);
                 return std::vector<AlgebraExpr>{std::move(out)};
               }});

  c.push_back({"dedup-insertion", PairingMode::MutantVsMutant,
               [](const AlgebraExpr& root, const NodePath& site) {
                 const AlgebraExpr& n = node_at(root, site);
                 if (!n.is<Project>() || !all_columns(n.as<Project>().items)) return false;
                 const Scan* s = chain_scan(n);
                 return s != nullptr && s->tables.size() == 1 && only_filters_to_scan(n.child());
               },
               [](const AlgebraExpr& n, const RuleContext&) {
                 AlgebraExpr out{n.op, {}};
                 out.children.push_back(wrap(Dedup{n.as<Project>().items}, n.child()));
                 return std::vector<AlgebraExpr>{std::move(out)};
               }});

  c.push_back({"grouped-filter-insertion", PairingMode::MutantVsMutant,
               [](const AlgebraExpr& root, const NodePath& site) { return grouping_site(node_at(root, site)); },
               [](const AlgebraExpr& n, const RuleContext& ctx) {
                 const Predicate p = key_predicate(grouping_keys(n), ctx);
                 AlgebraExpr below{n.op, {}};
                 below.children.push_back(wrap(Filter{p}, n.child()));
                 return std::vector<AlgebraExpr>{std::move(below), wrap(Filter{p}, n)};
               }});

  c.push_back({"dedup-filter-commutation", PairingMode::SeedVsMutant,
               [](const AlgebraExpr& root, const NodePath& site) {
                 const AlgebraExpr& n = node_at(root, site);
                 if (n.children.size() != 1) return false;
                 const AlgebraExpr& ch = n.child();
                 if (n.is<Dedup>() && ch.is<Filter>()) return refs_within(ch.as<Filter>().pred, n.as<Dedup>().keys);
                 if (n.is<Filter>() && ch.is<Dedup>()) return refs_within(n.as<Filter>().pred, ch.as<Dedup>().keys);
                 return false;
               },
               [](const AlgebraExpr& n, const RuleContext&) {
                 AlgebraExpr inner{n.op, {}};
                 inner.children.push_back(n.child().child());
                 AlgebraExpr out{n.child().op, {}};
                 out.children.push_back(std::move(inner));
                 return std::vector<AlgebraExpr>{std::move(out)};
               }});
  return c;
}

void post_order(const AlgebraExpr& e, NodePath& path, std::vector<NodePath>& out) {
  for (std::size_t i = 0; i < e.children.size(); ++i) {
    path.push_back(i);
    post_order(e.children[i], path, out);
    path.pop_back();
  }
  out.push_back(path);
}

// ---- choosing surface forms -----------------------------------------------------

/// Qualification of a block: nullopt when it has no column reference.
std::optional<bool> qualified(const SqlQuery& b) {
  for (const auto& item : b.select) {
    if (const auto* c = std::get_if<ColumnRef>(&item)) return c->qualified();
    if (const auto& a = std::get<AggCall>(item); a.arg) return a.arg->qualified();
  }
  auto from_pred = [](const std::optional<Predicate>& p) -> std::optional<bool> {
    if (!p) return std::nullopt;
    const auto cols = referenced_columns(*p);
    if (cols.empty()) return std::nullopt;
    return cols.front().qualified();
  };
  if (auto q = from_pred(b.where)) return q;
  if (!b.group_by.empty()) return b.group_by.front().qualified();
  return from_pred(b.having);
}

struct FormDiff {
  int qualification = 0;
  int dedup_swaps = 0;  // DISTINCT <-> GROUP BY
  int shape = 0;        // any DISTINCT/GROUP BY presence change
};

FormDiff diff(const SqlQuery& seed, const SqlQuery& cand) {
  FormDiff d;
  const auto a = seed.blocks();
  const auto b = cand.blocks();
  for (std::size_t i = 0; i < std::min(a.size(), b.size()); ++i) {
    const auto qa = qualified(*a[i]);
    const auto qb = qualified(*b[i]);
    if (qa && qb && *qa != *qb) ++d.qualification;
    const bool da = a[i]->distinct;
    const bool db = b[i]->distinct;
    const bool ga = !a[i]->group_by.empty();
    const bool gb = !b[i]->group_by.empty();
    if (da != db && ga != gb) ++d.dedup_swaps;
    d.shape += (da != db) + (ga != gb);
  }
  return d;
}

/// Index of the SELECT block containing `site` in a left-deep union chain.
std::size_t block_index(const AlgebraExpr& root, const NodePath& site) {
  std::size_t blocks = 1;
  for (const AlgebraExpr* n = &root; n->is<SetUnion>(); n = &n->children[0]) ++blocks;
  const AlgebraExpr* n = &root;
  std::size_t depth = 0;
  for (auto step : site) {
    if (!n->is<SetUnion>()) break;
    if (step == 1) return blocks - 1 - depth;
    n = &n->children[0];
    ++depth;
  }
  return blocks - 1 - depth;
}

template <class Score>
std::optional<SqlQuery> best(const std::vector<SqlQuery>& forms, Score score) {
  std::optional<SqlQuery> out;
  long top = 0;
  for (const auto& f : forms) {
    const auto s = score(f);
    if (!s) continue;
    if (!out || *s > top) {
      out = f;
      top = *s;
    }
  }
  return out;
}

bool valid(const SqlQuery& q, const Schema& schema) { return validate(q, schema).empty(); }

}  // namespace

const Catalog& default_catalog() {
  static const Catalog catalog = make_catalog();
  return catalog;
}

Catalog basic_catalog() { return Catalog(default_catalog().begin(), default_catalog().begin() + 4); }

Catalog select_rules(const Catalog& catalog, const std::vector<std::string>& names) {
  Catalog out;
  for (const auto& n : names) {
    auto it = std::find_if(catalog.begin(), catalog.end(), [&](const RewriteRule& r) { return r.name == n; });
    if (it == catalog.end()) throw std::invalid_argument("unknown rule: " + n);
    out.push_back(*it);
  }
  return out;
}

std::vector<std::string> rule_names(const Catalog& catalog) {
  std::vector<std::string> out;
  for (const auto& r : catalog) out.push_back(r.name);
  return out;
}

std::vector<RuleMatch> applicable_rules(const AlgebraExpr& e, const Catalog& catalog) {
  std::vector<NodePath> sites;
  NodePath path;
  post_order(e, path, sites);
  std::vector<RuleMatch> out;
  for (std::size_t r = 0; r < catalog.size(); ++r) {
    for (const auto& s : sites) {
      if (catalog[r].matches(e, s)) out.push_back(RuleMatch{r, s});
    }
  }
  return out;
}

AlgebraExpr apply_rule(const RewriteRule& rule, const AlgebraExpr& e, const NodePath& site, const RuleContext& ctx) {
  if (!rule.matches(e, site)) throw RuleError(rule.name + " does not match at the given site");
  auto alts = rule.build(node_at(e, site), ctx);
  return replace_at(e, site, std::move(alts.front()));
}

std::optional<EquivalentQueryPair> transform_query(const SqlQuery& seed, const Catalog& catalog,
                                                   const RuleContext& ctx, RuleOrder order) {
  const Schema& schema = *ctx.schema;
  const AlgebraExpr e = lower(seed, schema);
  const std::string seed_text = render(seed);
  const Sensitivity sens = query_sensitivity(e);
  const auto matches = applicable_rules(e, catalog);

  std::vector<std::size_t> rules(catalog.size());
  std::iota(rules.begin(), rules.end(), std::size_t{0});
  if (order == RuleOrder::Shuffled && ctx.rng != nullptr) ctx.rng->shuffle(rules);

  for (auto r : rules) {
    const RewriteRule& rule = catalog[r];
    for (const auto& m : matches) {
      if (m.rule != r) continue;
      std::vector<AlgebraExpr> mutated;
      try {
        for (auto& alt : rule.build(node_at(e, m.site), ctx)) {
          AlgebraExpr x = replace_at(e, m.site, std::move(alt));
          typecheck(x);
          mutated.push_back(std::move(x));
        }
      } catch (const TypeError&) {
        continue;
      }
      EquivalentQueryPair pair{{}, {}, rule.name, seed_text, rule.pairing};

      if (rule.pairing == PairingMode::SeedVsMutant) {
        if (query_sensitivity(mutated.front()) != sens) continue;
        const auto forms = try_remap(mutated.front());
        const bool flip = rule.name == "projection-pull-up";
        auto choice = best(forms, [&](const SqlQuery& f) -> std::optional<long> {
          if (render(f) == seed_text || !valid(f, schema)) return std::nullopt;
          const FormDiff d = diff(seed, f);
          if (flip) return d.qualification * 100L - d.shape;
          return -d.qualification * 100L + d.dedup_swaps * 10L - d.shape;
        });
        if (!choice) continue;
        pair.left = seed;
        pair.right = std::move(*choice);
        return pair;
      }

      const std::size_t block = block_index(e, m.site);
      auto target = [&](const SqlQuery& f) { return f.blocks().at(block); };
      auto closeness = [&](const SqlQuery& f) { return -(diff(seed, f).qualification * 100L + diff(seed, f).shape); };
      std::optional<SqlQuery> left;
      std::optional<SqlQuery> right;
      if (mutated.size() == 1) {
        const auto forms = try_remap(mutated.front());
        left = best(forms, [&](const SqlQuery& f) -> std::optional<long> {
          if (!target(f)->distinct || !target(f)->group_by.empty() || !valid(f, schema)) return std::nullopt;
          return closeness(f);
        });
        right = best(forms, [&](const SqlQuery& f) -> std::optional<long> {
          if (target(f)->distinct || target(f)->group_by.empty() || !valid(f, schema)) return std::nullopt;
          return closeness(f);
        });
      } else {
        auto grouped = [&](const SqlQuery& f) -> std::optional<long> {
          if (target(f)->group_by.empty() || !valid(f, schema)) return std::nullopt;
          return closeness(f);
        };
        left = best(try_remap(mutated[0]), grouped);
        right = best(try_remap(mutated[1]), grouped);
      }
      if (!left || !right || render(*left) == render(*right)) continue;
      if (query_sensitivity(lower(*left, schema)) != query_sensitivity(lower(*right, schema))) continue;
      pair.left = std::move(*left);
      pair.right = std::move(*right);
      return pair;
    }
  }
  return std::nullopt;
}

std::vector<AlgebraExpr> enumerate_mutants(const AlgebraExpr& e, const Catalog& catalog, std::size_t k,
                                           const RuleContext& ctx) {
  std::vector<AlgebraExpr> out;
  if (k == 0) return out;
  for (const auto& m : applicable_rules(e, catalog)) {
    for (auto& alt : catalog[m.rule].build(node_at(e, m.site), ctx)) {
      AlgebraExpr x = replace_at(e, m.site, std::move(alt));
      if (x == e || std::find(out.begin(), out.end(), x) != out.end()) continue;
      try {
        typecheck(x);
      } catch (const TypeError&) {
        continue;
      }
      if (try_remap(x).empty()) continue;
      out.push_back(std::move(x));
      if (out.size() == k) return out;
    }
  }
  return out;
}

}  // namespace eqmorph
