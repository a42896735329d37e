#include "eqmorph/ast.hpp"

#include <algorithm>

#include "eqmorph/schema.hpp"

namespace eqmorph {

std::string_view to_string(AggFn fn) {
  switch (fn) {
    case AggFn::Count: return "COUNT";
    case AggFn::Sum: return "SUM";
    case AggFn::Min: return "MIN";
    case AggFn::Max: return "MAX";
    case AggFn::Avg: return "AVG";
  }
  return "?";
}

std::string_view to_string(CmpOp op) {
  switch (op) {
    case CmpOp::Eq: return "=";
    case CmpOp::Ne: return "<>";
    case CmpOp::Lt: return "<";
    case CmpOp::Le: return "<=";
    case CmpOp::Gt: return ">";
    case CmpOp::Ge: return ">=";
  }
  return "?";
}

std::string AggCall::name() const {
  std::string fname(to_string(fn));
  std::transform(fname.begin(), fname.end(), fname.begin(), [](unsigned char c) { return std::tolower(c); });
  return fname + "(" + (arg ? arg->to_string() : std::string("*")) + ")";
}

std::string item_name(const SelectItem& item) {
  if (const auto* c = std::get_if<ColumnRef>(&item)) return c->to_string();
  return std::get<AggCall>(item).name();
}

Predicate Predicate::truth(TruthValue t) {
  Predicate p;
  p.kind = Kind::Literal;
  p.literal = t;
  return p;
}

Predicate Predicate::compare(Term lhs, CmpOp op, Term rhs) {
  Predicate p;
  p.kind = Kind::Compare;
  p.op = op;
  p.lhs = std::move(lhs);
  p.rhs = std::move(rhs);
  return p;
}

Predicate Predicate::conj(Predicate a, Predicate b) {
  Predicate p;
  p.kind = Kind::And;
  p.operands.push_back(std::move(a));
  p.operands.push_back(std::move(b));
  return p;
}

Predicate Predicate::disj(Predicate a, Predicate b) {
  Predicate p;
  p.kind = Kind::Or;
  p.operands.push_back(std::move(a));
  p.operands.push_back(std::move(b));
  return p;
}

Predicate Predicate::negate(Predicate a) {
  Predicate p;
  p.kind = Kind::Not;
  p.operands.push_back(std::move(a));
  return p;
}

namespace {
void collect_columns(const Predicate& p, std::vector<ColumnRef>& out) {
  if (p.kind == Predicate::Kind::Compare) {
    if (const auto* c = std::get_if<ColumnRef>(&p.lhs)) out.push_back(*c);
    if (const auto* c = std::get_if<ColumnRef>(&p.rhs)) out.push_back(*c);
  }
  for (const auto& o : p.operands) collect_columns(o, out);
}
}  // namespace

std::vector<ColumnRef> referenced_columns(const Predicate& p) {
  std::vector<ColumnRef> out;
  collect_columns(p, out);
  return out;
}

bool SqlQuery::has_aggregates() const {
  return std::any_of(select.begin(), select.end(),
                     [](const SelectItem& i) { return std::holds_alternative<AggCall>(i); });
}

SqlQuery SqlQuery::core() const {
  SqlQuery c;
  c.select = select;
  c.distinct = distinct;
  c.from = from;
  c.where = where;
  c.group_by = group_by;
  c.having = having;
  return c;
}

std::vector<const SqlQuery*> SqlQuery::blocks() const {
  std::vector<const SqlQuery*> out;
  for (const SqlQuery* q = this; q != nullptr; q = q->set_op ? &*q->set_op->rhs : nullptr) out.push_back(q);
  return out;
}

const ColumnDef* TableDef::find(std::string_view column) const {
  for (const auto& c : columns) {
    if (c.name == column) return &c;
  }
  return nullptr;
}

const TableDef* Schema::find(std::string_view table) const {
  for (const auto& t : tables) {
    if (t.name == table) return &t;
  }
  return nullptr;
}

}  // namespace eqmorph
