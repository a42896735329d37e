#include "eqmorph/eval.hpp"

#include <algorithm>
#include <limits>

#include "eqmorph/errors.hpp"

namespace eqmorph {

std::size_t column_index(std::span<const SelectItem> columns, const ColumnRef& ref) {
  std::ptrdiff_t found = -1;
  for (std::size_t i = 0; i < columns.size(); ++i) {
    const auto* c = std::get_if<ColumnRef>(&columns[i]);
    if (c == nullptr) continue;
    if (ref.qualified()) {
      if (*c == ref) return i;
    } else if (c->column == ref.column) {
      if (found >= 0) throw ExecError(codes::kAmbiguousColumn, ref.column);
      found = static_cast<std::ptrdiff_t>(i);
    }
  }
  if (found < 0) throw ExecError(codes::kUnknownColumn, ref.to_string());
  return static_cast<std::size_t>(found);
}

std::size_t item_index(std::span<const SelectItem> columns, const SelectItem& item) {
  if (const auto* c = std::get_if<ColumnRef>(&item)) return column_index(columns, *c);
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i] == item) return i;
  }
  throw ExecError(codes::kUnknownColumn, item_name(item));
}

CompiledPredicate::CompiledPredicate(const Predicate& p, std::span<const SelectItem> columns) {
  root_ = build(p, columns);
}

std::size_t CompiledPredicate::build(const Predicate& p, std::span<const SelectItem> columns) {
  Node n{p.kind, p.literal, p.op, {}, {}, {}};
  if (p.kind == Predicate::Kind::Compare) {
    auto operand = [&](const Term& t) {
      Operand o;
      if (const auto* c = std::get_if<ColumnRef>(&t)) {
        o.index = static_cast<std::ptrdiff_t>(column_index(columns, *c));
      } else {
        o.constant = std::get<Value>(t);
      }
      return o;
    };
    n.lhs = operand(p.lhs);
    n.rhs = operand(p.rhs);
  }
  for (const auto& child : p.operands) n.children.push_back(build(child, columns));
  nodes_.push_back(std::move(n));
  return nodes_.size() - 1;
}

TruthValue CompiledPredicate::eval(std::span<const Value> row) const { return eval_node(root_, row); }

TruthValue CompiledPredicate::eval_node(std::size_t idx, std::span<const Value> row) const {
  const Node& n = nodes_[idx];
  using K = Predicate::Kind;
  switch (n.kind) {
    case K::Literal: return n.literal;
    case K::Compare: {
      const Value& a = n.lhs.index >= 0 ? row[static_cast<std::size_t>(n.lhs.index)] : n.lhs.constant;
      const Value& b = n.rhs.index >= 0 ? row[static_cast<std::size_t>(n.rhs.index)] : n.rhs.constant;
      const auto c = sql_compare(a, b);
      if (!c) return TruthValue::Unknown;
      bool r = false;
      switch (n.op) {
        case CmpOp::Eq: r = *c == 0; break;
        case CmpOp::Ne: r = *c != 0; break;
        case CmpOp::Lt: r = *c < 0; break;
        case CmpOp::Le: r = *c <= 0; break;
        case CmpOp::Gt: r = *c > 0; break;
        case CmpOp::Ge: r = *c >= 0; break;
      }
      return r ? TruthValue::True : TruthValue::False;
    }
    case K::And: return truth_and(eval_node(n.children[0], row), eval_node(n.children[1], row));
    case K::Or: return truth_or(eval_node(n.children[0], row), eval_node(n.children[1], row));
    case K::Not: return truth_not(eval_node(n.children[0], row));
  }
  return TruthValue::Unknown;
}

TruthValue eval_pred(const Predicate& p, const RowBinding& row) {
  return CompiledPredicate(p, row.columns).eval(row.values);
}

Value eval_agg(const AggCall& call, std::span<const Weighted> group) {
  if (call.fn == AggFn::Count) {
    std::uint64_t n = 0;
    for (const auto& w : group) {
      if (call.star() || !w.value.is_null()) n += w.count;
    }
    return Value::integer(static_cast<std::int64_t>(n));
  }
  if (call.fn == AggFn::Min || call.fn == AggFn::Max) {
    const Value* best = nullptr;
    for (const auto& w : group) {
      if (w.value.is_null()) continue;
      if (best == nullptr) {
        best = &w.value;
        continue;
      }
      const auto c = *sql_compare(w.value, *best);
      if ((call.fn == AggFn::Min && c < 0) || (call.fn == AggFn::Max && c > 0)) best = &w.value;
    }
    return best ? *best : Value::null();
  }
  // SUM / AVG
  bool any = false;
  bool all_int = true;
  int max_scale = 0;
  __int128 int_sum = 0;
  Decimal dec_sum;
  std::uint64_t n = 0;
  for (const auto& w : group) {
    if (w.value.is_null()) continue;
    if (w.value.is_str()) {
      throw ExecError(codes::kTypeMismatch, std::string(to_string(call.fn)) + " over string value");
    }
    any = true;
    n += w.count;
    if (w.value.is_int()) {
      int_sum += static_cast<__int128>(w.value.as_int()) * w.count;
      dec_sum = dec_sum + Decimal::make(static_cast<__int128>(w.value.as_int()) * w.count, 0);
    } else {
      all_int = false;
      const Decimal& d = w.value.as_dec();
      max_scale = std::max<int>(max_scale, d.scale);
      dec_sum = dec_sum + Decimal::make(static_cast<__int128>(d.mantissa) * w.count, d.scale);
    }
  }
  if (!any) return Value::null();
  if (call.fn == AggFn::Sum) {
    if (all_int) {
      if (int_sum > std::numeric_limits<std::int64_t>::max() || int_sum < std::numeric_limits<std::int64_t>::min()) {
        throw ExecError(codes::kOverflow, "SUM out of range");
      }
      return Value::integer(static_cast<std::int64_t>(int_sum));
    }
    return Value::decimal(dec_sum);
  }
  return Value::decimal(divide(dec_sum, static_cast<std::int64_t>(n),
                               std::min(max_scale + kAvgExtraScale, Decimal::kMaxScale)));
}

}  // namespace eqmorph
