#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "eqmorph/ast.hpp"
#include "eqmorph/value.hpp"

namespace eqmorph {

/// Named row: column descriptors paired with values. Column references match
/// a ColumnRef descriptor exactly, or by bare name when written unqualified.
struct RowBinding {
  std::span<const SelectItem> columns;
  std::span<const Value> values;
};

/// Index of `ref` among `columns`. Throws ExecError(UNKNOWN_COLUMN) or
/// ExecError(AMBIGUOUS_COLUMN).
std::size_t column_index(std::span<const SelectItem> columns, const ColumnRef& ref);
/// Index of an arbitrary output item (column or aggregate); throws as above.
std::size_t item_index(std::span<const SelectItem> columns, const SelectItem& item);

/// Predicate with column references bound to positions, for repeated evaluation.
class CompiledPredicate {
 public:
  CompiledPredicate(const Predicate& p, std::span<const SelectItem> columns);

  /// Kleene three-valued evaluation. Throws ExecError(TYPE_MISMATCH) on
  /// string-vs-number comparisons.
  TruthValue eval(std::span<const Value> row) const;

 private:
  struct Operand {
    std::ptrdiff_t index = -1;  // -1: constant
    Value constant;
  };
  struct Node {
    Predicate::Kind kind;
    TruthValue literal;
    CmpOp op;
    Operand lhs;
    Operand rhs;
    std::vector<std::size_t> children;
  };

  std::size_t build(const Predicate& p, std::span<const SelectItem> columns);
  TruthValue eval_node(std::size_t n, std::span<const Value> row) const;

  std::vector<Node> nodes_;
  std::size_t root_ = 0;
};

/// Evaluates `p` against one row under three-valued logic.
TruthValue eval_pred(const Predicate& p, const RowBinding& row);

struct Weighted {
  Value value;
  std::uint64_t count = 1;
};

/// Aggregate over a multiset of argument values (for COUNT(*) only the counts
/// matter). NULLs are ignored except by COUNT(*); SUM/AVG/MIN/MAX of nothing
/// is NULL, COUNT of nothing is 0. Throws ExecError(TYPE_MISMATCH) for
/// SUM/AVG over strings.
Value eval_agg(const AggCall& call, std::span<const Weighted> group);

/// Fractional digits added by AVG beyond the widest input scale.
inline constexpr int kAvgExtraScale = 4;

}  // namespace eqmorph
