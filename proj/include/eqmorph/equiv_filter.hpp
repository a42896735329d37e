#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "eqmorph/ast.hpp"
#include "eqmorph/relation.hpp"

namespace eqmorph {

struct FilterBudget {
  std::size_t tiny = 8;     // uniform-valued databases over {NULL, 0, 1}, at most two rows a table
  std::size_t random = 24;  // random databases with forced duplicates and NULLs
  std::size_t maxRows = 6;
  std::uint64_t seed = 0;

  std::size_t total() const noexcept { return tiny + random; }
};

struct NotEquivalent {
  Database witness;
  std::optional<Relation> left;  // empty when that side raised an error
  std::optional<Relation> right;
  std::string detail;  // error text for asymmetric failures
};

struct NoCounterexample {
  std::size_t databasesChecked = 0;
};

using Verdict = std::variant<NotEquivalent, NoCounterexample>;

/// The fixed database sequence check_bounded walks for the given tables.
/// `constants` are mixed into the random value pools.
std::vector<Database> filter_databases(const std::vector<TableDef>& tables, const FilterBudget& budget,
                                       const std::vector<Value>& constants = {});

/// Runs both queries on the clean engine over filter_databases and returns
/// the first database whose results differ as multisets. An error on one
/// side only counts as a difference; the same error on both sides does not.
Verdict check_bounded(const SqlQuery& q1, const SqlQuery& q2, const Schema& schema, const FilterBudget& budget = {});

/// True if executing both queries on the witness still disagrees.
bool witness_reproduces(const SqlQuery& q1, const SqlQuery& q2, const NotEquivalent& v);

}  // namespace eqmorph
