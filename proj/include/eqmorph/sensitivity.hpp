#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "eqmorph/algebra.hpp"
#include "eqmorph/relation.hpp"

namespace eqmorph {

enum class Sensitivity { Sensitive, Insensitive };

std::string_view to_string(Sensitivity s);

/// Operator kinds that carry a duplicate-sensitivity label. Dedup covers both
/// DISTINCT and GROUP BY.
enum class OperatorKind { Scan, Projection, Selection, Dedup, Union, UnionAll, Count, Sum, Min, Max, Avg };

std::string_view to_string(OperatorKind k);

Sensitivity classify_operator(OperatorKind k);
Sensitivity classify_operator(AggFn fn);

/// Operators of `e` in pre-order. A γ contributes a Dedup when it has
/// grouping keys, followed by one entry per aggregate function.
std::vector<OperatorKind> operator_sequence(const AlgebraExpr& e);

/// Sensitive iff every operator in `e` is sensitive, except that a UNION ALL
/// is sensitive when either arm is.
Sensitivity query_sensitivity(const AlgebraExpr& e);

/// True when `e` contains no γ.
bool aggregate_free(const AlgebraExpr& e);

struct OracleBudget {
  std::size_t maxTables = 2;
  std::size_t maxRows = 3;  // total base rows across tables
  std::size_t maxDatabases = 0;  // 0: no cap
};

struct WitnessFound {
  Database database;
  std::string table;
  Tuple row;  // the row whose multiplicity was doubled
  Relation before;
  Relation after;
};

struct NoWitnessWithinBudget {
  std::size_t databasesChecked = 0;
};

using OracleResult = std::variant<WitnessFound, NoWitnessWithinBudget>;

class BudgetExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Searches small databases for one where doubling a single row's
/// multiplicity changes the result of `e`. Values range over {NULL, 0, 1}
/// ('0'/'1' for strings) in the columns `e` references; other columns hold 0.
/// Throws BudgetExceeded when there is no table to populate or `e` touches
/// more tables than the budget allows.
OracleResult sensitivity_oracle(const AlgebraExpr& e, const OracleBudget& budget = {});

/// Re-executes a witness: true if doubling its row still changes the result.
bool reproduces(const AlgebraExpr& e, const WitnessFound& w);

}  // namespace eqmorph
