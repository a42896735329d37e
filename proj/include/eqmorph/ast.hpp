#pragma once

#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "eqmorph/value.hpp"

namespace eqmorph {

/// Heap-allocated value with deep copy; lets recursive aggregates keep value
/// semantics.
template <class T>
class Box {
 public:
  Box(T value) : ptr_(std::make_unique<T>(std::move(value))) {}  // NOLINT(google-explicit-constructor)
  Box(const Box& other) : ptr_(std::make_unique<T>(*other.ptr_)) {}
  Box(Box&&) noexcept = default;
  Box& operator=(const Box& other) {
    if (this != &other) ptr_ = std::make_unique<T>(*other.ptr_);
    return *this;
  }
  Box& operator=(Box&&) noexcept = default;
  ~Box() = default;

  T& operator*() { return *ptr_; }
  const T& operator*() const { return *ptr_; }
  T* operator->() { return ptr_.get(); }
  const T* operator->() const { return ptr_.get(); }

  friend bool operator==(const Box& a, const Box& b) { return *a == *b; }

 private:
  std::unique_ptr<T> ptr_;
};

/// Column reference. `table` is empty when written unqualified; resolution
/// fills it in.
struct ColumnRef {
  std::string table;
  std::string column;

  bool qualified() const noexcept { return !table.empty(); }
  std::string to_string() const { return table.empty() ? column : table + "." + column; }
  friend bool operator==(const ColumnRef&, const ColumnRef&) = default;
  friend auto operator<=>(const ColumnRef&, const ColumnRef&) = default;
};

enum class AggFn { Count, Sum, Min, Max, Avg };

std::string_view to_string(AggFn fn);

/// Aggregate call; `arg` is empty for COUNT(*).
struct AggCall {
  AggFn fn = AggFn::Count;
  std::optional<ColumnRef> arg;

  bool star() const noexcept { return !arg.has_value(); }
  /// Canonical output-column name, e.g. "sum(t0.b)" or "count(*)".
  std::string name() const;
  friend bool operator==(const AggCall&, const AggCall&) = default;
};

using SelectItem = std::variant<ColumnRef, AggCall>;

std::string item_name(const SelectItem& item);

using Term = std::variant<ColumnRef, Value>;

enum class CmpOp { Eq, Ne, Lt, Le, Gt, Ge };

std::string_view to_string(CmpOp op);

/// Predicate tree: TRUE/FALSE/NULL literal, comparison, AND, OR, NOT.
struct Predicate {
  enum class Kind { Literal, Compare, And, Or, Not };

  Kind kind = Kind::Literal;
  TruthValue literal = TruthValue::True;
  CmpOp op = CmpOp::Eq;
  Term lhs;
  Term rhs;
  std::vector<Predicate> operands;

  static Predicate truth(TruthValue t);
  static Predicate compare(Term lhs, CmpOp op, Term rhs);
  static Predicate conj(Predicate a, Predicate b);
  static Predicate disj(Predicate a, Predicate b);
  static Predicate negate(Predicate a);

  friend bool operator==(const Predicate&, const Predicate&) = default;
};

/// Every column reference in `p`, in left-to-right order.
std::vector<ColumnRef> referenced_columns(const Predicate& p);

enum class SetOpKind { Union, UnionAll };

struct SqlQuery;

struct SetOperation {
  SetOpKind kind = SetOpKind::Union;
  Box<SqlQuery> rhs;

  friend bool operator==(const SetOperation&, const SetOperation&) = default;
};

/// One SELECT block, optionally followed by a chain of set operations. The
/// chain associates to the left: `a UNION b UNION ALL c` is (a ∪ b) ∪all c.
struct SqlQuery {
  std::vector<SelectItem> select;
  bool distinct = false;
  std::vector<std::string> from;
  std::optional<Predicate> where;
  std::vector<ColumnRef> group_by;  // empty: no GROUP BY clause
  std::optional<Predicate> having;
  std::optional<SetOperation> set_op;

  bool has_aggregates() const;
  bool grouped() const { return !group_by.empty() || has_aggregates(); }
  /// Copy of this block without its set-operation chain.
  SqlQuery core() const;
  /// Blocks of the chain in order (this block first).
  std::vector<const SqlQuery*> blocks() const;

  friend bool operator==(const SqlQuery&, const SqlQuery&) = default;
};

}  // namespace eqmorph
