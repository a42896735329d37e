#include <gtest/gtest.h>

#include "eqmorph/generator.hpp"
#include "eqmorph/refdb.hpp"
#include "eqmorph/sensitivity.hpp"
#include "eqmorph/sql.hpp"

using namespace eqmorph;

namespace {

const Schema kSchema{{TableDef{"t0", {{"a", ColumnType::Int}, {"b", ColumnType::Int}}},
                      TableDef{"t1", {{"a", ColumnType::Int}}}}};

AlgebraExpr low(const std::string& sql) { return lower(parse(sql), kSchema); }

Sensitivity of(const std::string& sql) { return query_sensitivity(low(sql)); }

// Doubles the witness row by hand and reruns the query through the engine.
bool witness_changes_result(const std::string& sql, const WitnessFound& w) {
  Database doubled = w.database;
  doubled.insert(w.table, w.row);
  const SqlQuery q = parse(sql);
  return !execute(w.database, q).same_rows(execute(doubled, q));
}

}  // namespace

TEST(Classify, PaperLabels) {
  EXPECT_EQ(classify_operator(AggFn::Sum), Sensitivity::Sensitive);
  EXPECT_EQ(classify_operator(AggFn::Max), Sensitivity::Insensitive);
  EXPECT_EQ(classify_operator(OperatorKind::Dedup), Sensitivity::Insensitive);
  EXPECT_EQ(classify_operator(OperatorKind::Selection), Sensitivity::Sensitive);
  EXPECT_EQ(classify_operator(OperatorKind::Projection), Sensitivity::Sensitive);
}

TEST(Classify, RemainingOperators) {
  EXPECT_EQ(classify_operator(AggFn::Min), Sensitivity::Insensitive);
  EXPECT_EQ(classify_operator(AggFn::Count), Sensitivity::Sensitive);
  EXPECT_EQ(classify_operator(AggFn::Avg), Sensitivity::Sensitive);
  EXPECT_EQ(classify_operator(OperatorKind::Union), Sensitivity::Insensitive);
  EXPECT_EQ(classify_operator(OperatorKind::UnionAll), Sensitivity::Sensitive);
}

TEST(Fold, Compositions) {
  EXPECT_EQ(of("SELECT DISTINCT a FROM t0 WHERE a > 0"), Sensitivity::Insensitive);
  EXPECT_EQ(of("SELECT a FROM t0 WHERE a > 0"), Sensitivity::Sensitive);
  EXPECT_EQ(of("SELECT a FROM t0"), Sensitivity::Sensitive);
  EXPECT_EQ(of("SELECT a FROM t0 GROUP BY a"), Sensitivity::Insensitive);
  EXPECT_EQ(of("SELECT SUM(b) FROM t0"), Sensitivity::Sensitive);
  EXPECT_EQ(of("SELECT MAX(b) FROM t0"), Sensitivity::Insensitive);
  EXPECT_EQ(of("SELECT a FROM t0 UNION SELECT a FROM t1"), Sensitivity::Insensitive);
  EXPECT_EQ(of("SELECT a FROM t0 UNION ALL SELECT a FROM t1"), Sensitivity::Sensitive);
}

TEST(Fold, UnionAllOverSetUnionFollowsItsSensitiveArm) {
  const std::string mixed = "SELECT a FROM t0 UNION SELECT a FROM t1 UNION ALL SELECT b FROM t0";
  EXPECT_EQ(of(mixed), Sensitivity::Sensitive);
  EXPECT_TRUE(std::holds_alternative<WitnessFound>(sensitivity_oracle(low(mixed))));
  EXPECT_EQ(of("SELECT a FROM t0 UNION SELECT a FROM t1 UNION ALL SELECT DISTINCT b FROM t0"),
            Sensitivity::Insensitive);
}

TEST(Fold, OperatorSequence) {
  EXPECT_EQ(operator_sequence(low("SELECT SUM(b) FROM t0 GROUP BY a")),
            (std::vector{OperatorKind::Projection, OperatorKind::Dedup, OperatorKind::Sum, OperatorKind::Scan}));
  EXPECT_TRUE(aggregate_free(low("SELECT DISTINCT a FROM t0")));
  EXPECT_FALSE(aggregate_free(low("SELECT COUNT(*) FROM t0")));
}

TEST(Oracle, PlainSelectHasWitness) {
  const std::string sql = "SELECT a FROM t0";
  const OracleResult r = sensitivity_oracle(low(sql));
  ASSERT_TRUE(std::holds_alternative<WitnessFound>(r));
  const auto& w = std::get<WitnessFound>(r);
  EXPECT_TRUE(reproduces(low(sql), w));
  EXPECT_TRUE(witness_changes_result(sql, w));
}

TEST(Oracle, DistinctHasNone) {
  const OracleResult r = sensitivity_oracle(low("SELECT DISTINCT a FROM t0"));
  ASSERT_TRUE(std::holds_alternative<NoWitnessWithinBudget>(r));
  EXPECT_GT(std::get<NoWitnessWithinBudget>(r).databasesChecked, 0u);
}

TEST(Oracle, AlwaysEmptyQueryHasNoneDespiteStaticLabel) {
  EXPECT_EQ(of("SELECT a FROM t0 WHERE FALSE"), Sensitivity::Sensitive);
  EXPECT_TRUE(std::holds_alternative<NoWitnessWithinBudget>(sensitivity_oracle(low("SELECT a FROM t0 WHERE FALSE"))));
}

TEST(Oracle, FilteredWitnessNeedsPassingRow) {
  const std::string sql = "SELECT b FROM t0 WHERE a = 1";
  const OracleResult r = sensitivity_oracle(low(sql));
  ASSERT_TRUE(std::holds_alternative<WitnessFound>(r));
  EXPECT_TRUE(witness_changes_result(sql, std::get<WitnessFound>(r)));
}

TEST(Oracle, BudgetLimits) {
  OracleBudget one_table;
  one_table.maxTables = 1;
  EXPECT_THROW(sensitivity_oracle(low("SELECT t0.a FROM t0, t1"), one_table), BudgetExceeded);
  OracleBudget capped;
  capped.maxDatabases = 1;
  const OracleResult r = sensitivity_oracle(low("SELECT DISTINCT a FROM t0"), capped);
  EXPECT_LE(std::get<NoWitnessWithinBudget>(r).databasesChecked, 1u);
}

TEST(Oracle, InsensitiveNeverHasWitnessOnGeneratedQueries) {
  GeneratorConfig cfg;
  Rng rng(3);
  int insensitive = 0;
  for (int d = 0; d < 20 && insensitive < 60; ++d) {
    const GeneratedDatabase data = generate_database(cfg, rng);
    const Schema schema = data.db.schema();
    for (int i = 0; i < 40; ++i) {
      const SqlQuery q = generate_seed(cfg, schema, rng);
      const AlgebraExpr e = lower(q, schema);
      if (!aggregate_free(e) || query_sensitivity(e) != Sensitivity::Insensitive) continue;
      ++insensitive;
      const OracleResult r = sensitivity_oracle(e);
      ASSERT_TRUE(std::holds_alternative<NoWitnessWithinBudget>(r)) << render(q);
    }
  }
  EXPECT_GE(insensitive, 60);
}
