#include <algorithm>
#include <optional>

#include "eqmorph/errors.hpp"
#include "eqmorph/sql.hpp"

namespace eqmorph {

std::string_view SemanticError::code() const {
  switch (kind) {
    case Kind::UnknownTable: return codes::kUnknownTable;
    case Kind::UnknownColumn: return codes::kUnknownColumn;
    case Kind::AmbiguousColumn: return codes::kAmbiguousColumn;
    case Kind::NonGroupedColumn: return codes::kNonGroupedColumn;
    case Kind::TypeMismatch: return codes::kTypeMismatch;
    case Kind::UnsupportedShape: return codes::kUnsupported;
  }
  return codes::kUnsupported;
}

std::string SemanticError::to_string() const { return std::string(code()) + ": " + detail; }

namespace {

using Kind = SemanticError::Kind;

/// Static type of a term; nullopt for the NULL constant (compatible with all).
struct TermType {
  std::optional<ColumnType> type;
};

bool compatible(std::optional<ColumnType> a, std::optional<ColumnType> b) {
  if (!a || !b) return true;
  return (*a == ColumnType::Str) == (*b == ColumnType::Str);
}

class BlockResolver {
 public:
  BlockResolver(const Schema& schema, std::vector<SemanticError>& errors) : schema_(schema), errors_(errors) {}

  void run(SqlQuery& q) {
    tables_.clear();
    for (const auto& name : q.from) {
      const TableDef* t = schema_.find(name);
      if (t == nullptr) {
        error(Kind::UnknownTable, name);
        continue;
      }
      if (std::find(tables_.begin(), tables_.end(), t) != tables_.end()) {
        error(Kind::UnsupportedShape, "table " + name + " listed twice in FROM");
        continue;
      }
      tables_.push_back(t);
    }
    if (tables_.size() != q.from.size()) return;  // column errors would only be noise

    for (auto& item : q.select) {
      if (auto* c = std::get_if<ColumnRef>(&item)) {
        resolve(*c);
      } else {
        auto& call = std::get<AggCall>(item);
        if (call.arg) {
          auto t = resolve(*call.arg);
          if (t && *t == ColumnType::Str && (call.fn == AggFn::Sum || call.fn == AggFn::Avg)) {
            error(Kind::TypeMismatch, std::string(to_string(call.fn)) + " over string column " + call.arg->to_string());
          }
        }
      }
    }
    if (q.where) predicate(*q.where);
    for (auto& g : q.group_by) resolve(g);
    if (q.having) {
      if (q.group_by.empty()) error(Kind::UnsupportedShape, "HAVING without GROUP BY");
      predicate(*q.having);
    }

    if (!q.group_by.empty() && q.from.size() > 1) {
      error(Kind::UnsupportedShape, "GROUP BY over multiple tables");
    }
    if (q.grouped()) {
      auto grouped = [&](const ColumnRef& c) {
        return std::find(q.group_by.begin(), q.group_by.end(), c) != q.group_by.end();
      };
      for (const auto& item : q.select) {
        if (const auto* c = std::get_if<ColumnRef>(&item); c && c->qualified() && !grouped(*c)) {
          error(Kind::NonGroupedColumn, c->to_string());
        }
      }
      if (q.having) {
        for (const auto& c : referenced_columns(*q.having)) {
          if (c.qualified() && !grouped(c)) error(Kind::NonGroupedColumn, c.to_string() + " in HAVING");
        }
      }
    }
  }

  std::optional<ColumnType> type_of(const ColumnRef& c) const {
    for (const TableDef* t : tables_) {
      if (t->name == c.table) {
        if (const ColumnDef* col = t->find(c.column)) return col->type;
      }
    }
    return std::nullopt;
  }

 private:
  void error(Kind kind, std::string detail) { errors_.push_back(SemanticError{kind, std::move(detail)}); }

  /// Qualifies `c` in place; returns its type when resolvable.
  std::optional<ColumnType> resolve(ColumnRef& c) {
    if (c.qualified()) {
      auto it = std::find_if(tables_.begin(), tables_.end(), [&](const TableDef* t) { return t->name == c.table; });
      if (it == tables_.end()) {
        error(Kind::UnknownTable, c.table + " (in " + c.to_string() + ")");
        c.table.clear();
        return std::nullopt;
      }
      const ColumnDef* col = (*it)->find(c.column);
      if (col == nullptr) {
        error(Kind::UnknownColumn, c.to_string());
        c.table.clear();
        return std::nullopt;
      }
      return col->type;
    }
    const TableDef* owner = nullptr;
    const ColumnDef* found = nullptr;
    for (const TableDef* t : tables_) {
      if (const ColumnDef* col = t->find(c.column)) {
        if (owner != nullptr) {
          error(Kind::AmbiguousColumn, c.column);
          return std::nullopt;
        }
        owner = t;
        found = col;
      }
    }
    if (owner == nullptr) {
      error(Kind::UnknownColumn, c.column);
      return std::nullopt;
    }
    c.table = owner->name;
    return found->type;
  }

  std::optional<ColumnType> term(Term& t, bool& known) {
    known = true;
    if (auto* c = std::get_if<ColumnRef>(&t)) {
      auto type = resolve(*c);
      known = type.has_value();
      return type;
    }
    const Value& v = std::get<Value>(t);
    if (v.is_null()) return std::nullopt;
    if (v.is_str()) return ColumnType::Str;
    return v.is_int() ? ColumnType::Int : ColumnType::Dec;
  }

  void predicate(Predicate& p) {
    if (p.kind == Predicate::Kind::Compare) {
      bool lk = true;
      bool rk = true;
      auto lt = term(p.lhs, lk);
      auto rt = term(p.rhs, rk);
      if (lk && rk && !compatible(lt, rt)) {
        error(Kind::TypeMismatch, render(p));
      }
    }
    for (auto& o : p.operands) predicate(o);
  }

  const Schema& schema_;
  std::vector<SemanticError>& errors_;
  std::vector<const TableDef*> tables_;
};

std::optional<ColumnType> item_type(const SelectItem& item, const BlockResolver& r) {
  if (const auto* c = std::get_if<ColumnRef>(&item)) return r.type_of(*c);
  const auto& a = std::get<AggCall>(item);
  switch (a.fn) {
    case AggFn::Count: return ColumnType::Int;
    case AggFn::Avg: return ColumnType::Dec;
    default: return a.arg ? r.type_of(*a.arg) : std::nullopt;
  }
}

}  // namespace

Resolution resolve(const SqlQuery& q, const Schema& schema) {
  Resolution res{q, {}};
  std::vector<std::optional<ColumnType>> first_types;
  std::size_t index = 0;
  for (SqlQuery* b = &res.query; b != nullptr; b = b->set_op ? &*b->set_op->rhs : nullptr, ++index) {
    BlockResolver r(schema, res.errors);
    const std::size_t before = res.errors.size();
    r.run(*b);
    if (res.errors.size() != before) continue;
    std::vector<std::optional<ColumnType>> types;
    for (const auto& item : b->select) types.push_back(item_type(item, r));
    if (index == 0) {
      first_types = types;
    } else if (types.size() != first_types.size()) {
      res.errors.push_back({Kind::TypeMismatch, "set operation arms have different arity"});
    } else if (types != first_types) {
      res.errors.push_back({Kind::TypeMismatch, "set operation arms have different column types"});
    }
  }
  return res;
}

std::vector<SemanticError> validate(const SqlQuery& q, const Schema& schema) { return resolve(q, schema).errors; }

std::vector<ColumnType> output_types(const SqlQuery& resolved, const Schema& schema) {
  std::vector<SemanticError> sink;
  BlockResolver r(schema, sink);
  SqlQuery block = resolved.core();
  r.run(block);
  std::vector<ColumnType> out;
  for (const auto& item : block.select) out.push_back(item_type(item, r).value_or(ColumnType::Int));
  return out;
}

namespace {
void strip(ColumnRef& c) { c.table.clear(); }
void strip(Predicate& p) {
  if (auto* c = std::get_if<ColumnRef>(&p.lhs)) strip(*c);
  if (auto* c = std::get_if<ColumnRef>(&p.rhs)) strip(*c);
  for (auto& o : p.operands) strip(o);
}
}  // namespace

SqlQuery strip_qualifiers(const SqlQuery& block) {
  SqlQuery out = block;
  for (auto& item : out.select) {
    if (auto* c = std::get_if<ColumnRef>(&item)) {
      strip(*c);
    } else if (auto& a = std::get<AggCall>(item); a.arg) {
      strip(*a.arg);
    }
  }
  if (out.where) strip(*out.where);
  for (auto& g : out.group_by) strip(g);
  if (out.having) strip(*out.having);
  return out;
}

}  // namespace eqmorph
