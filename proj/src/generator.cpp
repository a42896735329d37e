#include "eqmorph/generator.hpp"

#include <algorithm>
#include <stdexcept>

#include "eqmorph/refdb.hpp"

namespace eqmorph {

std::string_view to_string(Production p) {
  switch (p) {
    case Production::SelectFrom: return "selectfrom";
    case Production::SelectFromWhere: return "selectwhere";
    case Production::AggregateFrom: return "aggregate";
    case Production::AggregateGroupBy: return "groupby";
    case Production::GroupByNoAgg: return "groupbynoagg";
    case Production::SetOperation: return "setop";
  }
  return "?";
}

void GeneratorConfig::validate() const {
  auto check = [](const Range& r, const char* what, std::size_t min) {
    if (r.lo > r.hi || r.lo < min) throw std::invalid_argument(std::string("bad range for ") + what);
  };
  check(tableCount, "tableCount", 1);
  check(columnCount, "columnCount", 1);
  check(rowCount, "rowCount", 0);
  if (queriesPerIteration < 1) throw std::invalid_argument("queriesPerIteration must be >= 1");
  double total = 0;
  for (double w : productionWeights) {
    if (w < 0) throw std::invalid_argument("negative production weight");
    total += w;
  }
  if (total <= 0) throw std::invalid_argument("all production weights are zero");
  for (double p : {nullWeight, duplicateWeight, distinctChance, havingChance, invalidRate}) {
    if (p < 0 || p > 1) throw std::invalid_argument("probability out of [0, 1]");
  }
}

std::array<double, kProductionCount> parse_weights(std::string_view spec, std::array<double, kProductionCount> base) {
  std::array<bool, kProductionCount> set{};
  std::optional<double> others;
  while (!spec.empty()) {
    const auto comma = spec.find(',');
    const std::string_view part = spec.substr(0, comma);
    spec = comma == std::string_view::npos ? std::string_view{} : spec.substr(comma + 1);
    const auto eq = part.find('=');
    if (eq == std::string_view::npos) throw std::invalid_argument("expected name=weight in '" + std::string(part) + "'");
    const std::string name(part.substr(0, eq));
    double w = 0;
    try {
      w = std::stod(std::string(part.substr(eq + 1)));
    } catch (const std::exception&) {
      throw std::invalid_argument("bad weight in '" + std::string(part) + "'");
    }
    if (name == "others") {
      others = w;
      continue;
    }
    std::size_t idx = kProductionCount;
    for (std::size_t i = 0; i < kProductionCount; ++i) {
      if (name == "prod" + std::to_string(i + 1) || name == to_string(static_cast<Production>(i))) idx = i;
    }
    if (idx == kProductionCount) throw std::invalid_argument("unknown production '" + name + "'");
    base[idx] = w;
    set[idx] = true;
  }
  if (others) {
    for (std::size_t i = 0; i < kProductionCount; ++i) {
      if (!set[i]) base[i] = *others;
    }
  }
  return base;
}

const std::vector<Value>& value_pool(ColumnType t) {
  static const std::vector<Value> ints = {
      Value::integer(0), Value::integer(1),  Value::integer(-1),         Value::integer(2),
      Value::integer(3), Value::integer(10), Value::integer(2147483647), Value::integer(-2147483648LL)};
  static const std::vector<Value> decs = [] {
    std::vector<Value> v;
    for (const char* s : {"0.0005", "0.001", "1.5", "-0.25", "0", "2.75", "0.1"}) {
      v.push_back(Value::decimal(Decimal::parse(s)));
    }
    return v;
  }();
  static const std::vector<Value> strs = {Value::string(""), Value::string("a"), Value::string("b"),
                                          Value::string("abc"), Value::string("A")};
  switch (t) {
    case ColumnType::Int: return ints;
    case ColumnType::Dec: return decs;
    case ColumnType::Str: return strs;
  }
  return ints;
}

namespace {

std::size_t draw(Rng& rng, const Range& r) {
  return static_cast<std::size_t>(rng.uniform(static_cast<std::int64_t>(r.lo), static_cast<std::int64_t>(r.hi)));
}

}  // namespace

GeneratedDatabase generate_database(const GeneratorConfig& cfg, Rng& rng) {
  static constexpr double kTypeWeights[] = {0.5, 0.3, 0.2};
  GeneratedDatabase out;
  const std::size_t ntables = draw(rng, cfg.tableCount);
  for (std::size_t ti = 0; ti < ntables; ++ti) {
    TableDef def;
    def.name = "t" + std::to_string(ti);
    const std::size_t ncols = draw(rng, cfg.columnCount);
    for (std::size_t c = 0; c < ncols; ++c) {
      def.columns.push_back(ColumnDef{"c" + std::to_string(c), static_cast<ColumnType>(rng.weighted(kTypeWeights))});
    }

    std::vector<Tuple> rows;
    const std::size_t nrows = draw(rng, cfg.rowCount);
    for (std::size_t r = 0; r < nrows; ++r) {
      if (r > 0 && rng.chance(cfg.duplicateWeight)) {
        rows.push_back(rows[rng.index(rows.size())]);
        continue;
      }
      Tuple t;
      for (const auto& col : def.columns) {
        t.push_back(rng.chance(cfg.nullWeight) ? Value::null() : rng.pick(value_pool(col.type)));
      }
      rows.push_back(std::move(t));
    }

    if (ti == 0 && !rows.empty()) {
      const bool has_null = std::any_of(rows.begin(), rows.end(), [](const Tuple& t) {
        return std::any_of(t.begin(), t.end(), [](const Value& v) { return v.is_null(); });
      });
      if (!has_null) rows[rng.index(rows.size())][rng.index(def.columns.size())] = Value::null();
      std::vector<Tuple> sorted = rows;
      std::sort(sorted.begin(), sorted.end());
      if (std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end()) {
        rows.push_back(rows[rng.index(rows.size())]);
      }
    }

    const std::string name = def.name;
    out.db.create_table(std::move(def));
    for (auto& t : rows) out.db.insert(name, std::move(t));
  }
  out.script = dump_script(out.db);
  return out;
}

namespace {

struct Col {
  ColumnRef ref;
  ColumnType type;
};

std::vector<Col> columns_of(const TableDef& t, bool qualify) {
  std::vector<Col> out;
  for (const auto& c : t.columns) out.push_back(Col{ColumnRef{qualify ? t.name : "", c.name}, c.type});
  return out;
}

bool numeric(ColumnType t) { return t != ColumnType::Str; }

/// k distinct columns in random order.
std::vector<Col> sample(const std::vector<Col>& cols, std::size_t k, Rng& rng) {
  std::vector<Col> pool = cols;
  rng.shuffle(pool);
  pool.resize(std::min(k, pool.size()));
  return pool;
}

std::size_t between(Rng& rng, std::size_t lo, std::size_t hi) {
  return static_cast<std::size_t>(rng.uniform(static_cast<std::int64_t>(lo), static_cast<std::int64_t>(std::max(lo, hi))));
}

Value constant_for(ColumnType t, Rng& rng) {
  // integer literals against DECIMAL columns now and then
  if (t == ColumnType::Dec && rng.chance(0.2)) return rng.pick(value_pool(ColumnType::Int));
  return rng.pick(value_pool(t));
}

Predicate atom(const std::vector<Col>& cols, Rng& rng) {
  static constexpr CmpOp kOps[] = {CmpOp::Eq, CmpOp::Ne, CmpOp::Lt, CmpOp::Le, CmpOp::Gt, CmpOp::Ge};
  const double roll = rng.unit();
  if (roll < 0.05) {
    static constexpr TruthValue kLits[] = {TruthValue::True, TruthValue::False, TruthValue::Unknown};
    return Predicate::truth(kLits[rng.index(3)]);
  }
  const Col& a = rng.pick(cols);
  const CmpOp op = kOps[rng.index(6)];
  if (roll < 0.2) {
    std::vector<Col> peers;
    for (const auto& c : cols) {
      if (numeric(c.type) == numeric(a.type)) peers.push_back(c);
    }
    return Predicate::compare(a.ref, op, rng.pick(peers).ref);
  }
  if (rng.chance(0.1)) return Predicate::compare(constant_for(a.type, rng), op, a.ref);
  return Predicate::compare(a.ref, op, constant_for(a.type, rng));
}

Predicate predicate(const std::vector<Col>& cols, Rng& rng, int depth) {
  if (depth > 0) {
    const double roll = rng.unit();
    if (roll < 0.4) return Predicate::conj(predicate(cols, rng, depth - 1), predicate(cols, rng, depth - 1));
    if (roll < 0.52) return Predicate::disj(predicate(cols, rng, depth - 1), predicate(cols, rng, depth - 1));
    if (roll < 0.6) return Predicate::negate(predicate(cols, rng, depth - 1));
  }
  return atom(cols, rng);
}

AggCall aggregate(const std::vector<Col>& cols, Rng& rng) {
  static constexpr double kFnWeights[] = {0.25, 0.25, 0.175, 0.175, 0.15};  // COUNT SUM MIN MAX AVG
  std::vector<Col> nums;
  for (const auto& c : cols) {
    if (numeric(c.type)) nums.push_back(c);
  }
  auto fn = static_cast<AggFn>(rng.weighted(kFnWeights));
  if ((fn == AggFn::Sum || fn == AggFn::Avg) && nums.empty()) fn = AggFn::Count;
  AggCall call{fn, std::nullopt};
  if (fn == AggFn::Count && rng.chance(0.3)) return call;
  call.arg = (fn == AggFn::Sum || fn == AggFn::Avg) ? rng.pick(nums).ref : rng.pick(cols).ref;
  return call;
}

std::vector<SelectItem> as_items(const std::vector<Col>& cols) {
  std::vector<SelectItem> out;
  for (const auto& c : cols) out.emplace_back(c.ref);
  return out;
}

SqlQuery select_from(const Schema& schema, const GeneratorConfig& cfg, Rng& rng) {
  SqlQuery q;
  std::vector<Col> cols;
  if (schema.tables.size() >= 2 && rng.chance(0.3)) {
    std::vector<std::size_t> idx(schema.tables.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    rng.shuffle(idx);
    for (std::size_t i = 0; i < 2; ++i) {
      const TableDef& t = schema.tables[idx[i]];
      q.from.push_back(t.name);
      const auto c = columns_of(t, true);
      cols.insert(cols.end(), c.begin(), c.end());
    }
  } else {
    const TableDef& t = rng.pick(schema.tables);
    q.from.push_back(t.name);
    cols = columns_of(t, false);
  }
  q.select = as_items(sample(cols, between(rng, 1, 3), rng));
  q.distinct = rng.chance(cfg.distinctChance);
  return q;
}

SqlQuery select_where(const TableDef& t, const GeneratorConfig& cfg, Rng& rng, std::size_t max_items = 3) {
  SqlQuery q;
  q.from.push_back(t.name);
  const auto cols = columns_of(t, false);
  q.select = as_items(sample(cols, between(rng, 1, max_items), rng));
  q.where = predicate(cols, rng, 2);
  q.distinct = rng.chance(cfg.distinctChance);
  return q;
}

SqlQuery aggregate_from(const TableDef& t, Rng& rng) {
  SqlQuery q;
  q.from.push_back(t.name);
  const auto cols = columns_of(t, false);
  const std::size_t n = between(rng, 1, 2);
  for (std::size_t i = 0; i < n; ++i) q.select.emplace_back(aggregate(cols, rng));
  if (rng.chance(0.5)) q.where = predicate(cols, rng, 2);
  return q;
}

SqlQuery group_by(const TableDef& t, const GeneratorConfig& cfg, Rng& rng, bool with_aggs) {
  SqlQuery q;
  q.from.push_back(t.name);
  const auto cols = columns_of(t, false);
  const auto keys = sample(cols, between(rng, 1, std::min<std::size_t>(with_aggs ? 2 : 3, cols.size())), rng);
  for (const auto& k : keys) q.group_by.push_back(k.ref);

  const std::size_t shown = with_aggs ? between(rng, 0, keys.size()) : between(rng, 1, keys.size());
  q.select = as_items(sample(keys, shown, rng));
  if (with_aggs) {
    const std::size_t n = between(rng, 1, 2);
    for (std::size_t i = 0; i < n; ++i) {
      const auto pos = static_cast<std::ptrdiff_t>(rng.index(q.select.size() + 1));
      q.select.insert(q.select.begin() + pos, aggregate(cols, rng));
    }
  }
  if (rng.chance(0.4)) q.where = predicate(cols, rng, 2);
  if (rng.chance(cfg.havingChance)) q.having = predicate(keys, rng, 1);
  q.distinct = rng.chance(with_aggs ? 0.1 : cfg.distinctChance);
  return q;
}

/// Columns of `t` matching `types` position by position, or empty.
std::vector<Col> matching(const TableDef& t, const std::vector<ColumnType>& types, Rng& rng) {
  std::vector<Col> out;
  std::vector<Col> avail = columns_of(t, false);
  rng.shuffle(avail);
  for (auto type : types) {
    auto it = std::find_if(avail.begin(), avail.end(), [&](const Col& c) { return c.type == type; });
    if (it == avail.end()) return {};
    out.push_back(*it);
    avail.erase(it);
  }
  return out;
}

SqlQuery set_operation(const Schema& schema, const GeneratorConfig& cfg, Rng& rng) {
  const TableDef& first = rng.pick(schema.tables);
  SqlQuery head;
  head.from.push_back(first.name);
  auto cols = sample(columns_of(first, false), between(rng, 1, 2), rng);
  head.select = as_items(cols);
  if (rng.chance(0.5)) head.where = predicate(columns_of(first, false), rng, 1);
  head.distinct = rng.chance(0.15);
  std::vector<ColumnType> types;
  for (const auto& c : cols) types.push_back(c.type);

  const std::size_t arms = rng.chance(0.7) ? 2 : 3;
  SqlQuery* tail = &head;
  for (std::size_t a = 1; a < arms; ++a) {
    SqlQuery arm;
    const TableDef* table = &rng.pick(schema.tables);
    auto picked = matching(*table, types, rng);
    if (picked.empty()) {
      table = &first;
      picked = matching(first, types, rng);
    }
    arm.from.push_back(table->name);
    arm.select = as_items(picked);
    if (rng.chance(0.5)) arm.where = predicate(columns_of(*table, false), rng, 1);
    arm.distinct = rng.chance(0.15);
    tail->set_op = SetOperation{rng.chance(0.5) ? SetOpKind::UnionAll : SetOpKind::Union, Box<SqlQuery>(std::move(arm))};
    tail = &*tail->set_op->rhs;
  }
  (void)cfg;
  return head;
}

}  // namespace

SqlQuery generate_seed(const GeneratorConfig& cfg, const Schema& schema, Rng& rng, Production* chosen) {
  if (schema.empty()) throw std::invalid_argument("generate_seed needs a non-empty schema");
  const auto prod = static_cast<Production>(rng.weighted(cfg.productionWeights));
  if (chosen != nullptr) *chosen = prod;
  switch (prod) {
    case Production::SelectFrom: return select_from(schema, cfg, rng);
    case Production::SelectFromWhere: return select_where(rng.pick(schema.tables), cfg, rng);
    case Production::AggregateFrom: return aggregate_from(rng.pick(schema.tables), rng);
    case Production::AggregateGroupBy: return group_by(rng.pick(schema.tables), cfg, rng, true);
    case Production::GroupByNoAgg: return group_by(rng.pick(schema.tables), cfg, rng, false);
    case Production::SetOperation: return set_operation(schema, cfg, rng);
  }
  return select_from(schema, cfg, rng);
}

SqlQuery break_query(const SqlQuery& q, const Schema& schema, Rng& rng) {
  SqlQuery out = q;
  const TableDef* t = schema.find(q.from.front());
  std::vector<int> ways = {0, 1};
  const ColumnDef* loose = nullptr;
  if (q.grouped() && t != nullptr) {
    for (const auto& c : t->columns) {
      const bool keyed = std::any_of(q.group_by.begin(), q.group_by.end(),
                                     [&](const ColumnRef& g) { return g.column == c.name; });
      if (!keyed) loose = &c;
    }
    if (loose != nullptr) ways.push_back(2);
  }
  const ColumnDef* text = nullptr;
  if (t != nullptr) {
    for (const auto& c : t->columns) {
      if (c.type == ColumnType::Str) text = &c;
    }
    if (text != nullptr) ways.push_back(3);
  }
  const bool qualify = q.from.size() > 1;
  switch (rng.pick(ways)) {
    case 0:
      out.select.insert(out.select.begin(), ColumnRef{qualify ? q.from.front() : "", "zz"});
      break;
    case 1:
      out.from.front() = "tx";
      break;
    case 2:
      out.select.insert(out.select.begin(), ColumnRef{"", loose->name});
      break;
    case 3: {
      Predicate p = Predicate::compare(ColumnRef{qualify ? t->name : "", text->name}, CmpOp::Gt, Value::integer(1));
      out.where = out.where ? Predicate::conj(*out.where, std::move(p)) : std::move(p);
      break;
    }
  }
  return out;
}

}  // namespace eqmorph
