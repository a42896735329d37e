#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "eqmorph/ast.hpp"
#include "eqmorph/relation.hpp"
#include "eqmorph/rng.hpp"

namespace eqmorph {

/// Seed shapes. The first four follow the paper's grammar; the last two add
/// the GROUP BY-without-aggregate and set-operation forms the rules need.
enum class Production : std::size_t {
  SelectFrom = 0,        // SELECT C' FROM T' (cross product allowed)
  SelectFromWhere = 1,   // SELECT C' FROM T WHERE p
  AggregateFrom = 2,     // SELECT A FROM T'
  AggregateGroupBy = 3,  // SELECT A FROM T' GROUP BY C [HAVING p]
  GroupByNoAgg = 4,
  SetOperation = 5,
};

inline constexpr std::size_t kProductionCount = 6;

std::string_view to_string(Production p);

struct Range {
  std::size_t lo = 0;
  std::size_t hi = 0;
};

struct GeneratorConfig {
  Range tableCount{1, 2};
  Range columnCount{1, 3};
  Range rowCount{2, 8};
  double nullWeight = 0.15;
  double duplicateWeight = 0.3;
  std::array<double, kProductionCount> productionWeights{0.15, 0.25, 0.10, 0.20, 0.15, 0.15};
  double distinctChance = 0.25;
  double havingChance = 0.3;
  /// Share of seeds deliberately broken after generation, standing in for a
  /// loose grammar whose output only fails at run time.
  double invalidRate = 0.1;
  std::size_t queriesPerIteration = 2000;
  std::uint64_t rngSeed = 0;

  /// Throws std::invalid_argument on empty ranges or non-positive weights.
  void validate() const;
};

/// Parses "prod4=1,others=0" / "selectfrom=2,setop=1" style weight lists.
/// Names: prod1..prod6 or the lowercase production names; "others" sets the
/// rest. Throws std::invalid_argument.
std::array<double, kProductionCount> parse_weights(std::string_view spec,
                                                   std::array<double, kProductionCount> base);

/// INT, DECIMAL and VARCHAR value pools the generator draws from.
const std::vector<Value>& value_pool(ColumnType t);

struct GeneratedDatabase {
  Database db;
  std::string script;  // CREATE TABLE + INSERT statements
};

/// Random schema and rows. When the first table has rows it is forced to
/// hold a NULL and a duplicated row.
GeneratedDatabase generate_database(const GeneratorConfig& cfg, Rng& rng);

/// Random query valid against `schema` (non-empty). Single-table blocks use
/// bare column names; cross products qualify them.
SqlQuery generate_seed(const GeneratorConfig& cfg, const Schema& schema, Rng& rng, Production* chosen = nullptr);

/// Breaks a valid seed so that it fails at run time (unknown column, unknown
/// table, non-grouped column or a string/number comparison).
SqlQuery break_query(const SqlQuery& q, const Schema& schema, Rng& rng);

}  // namespace eqmorph
