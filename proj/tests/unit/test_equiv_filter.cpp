#include <gtest/gtest.h>

#include "eqmorph/equiv_filter.hpp"
#include "eqmorph/refdb.hpp"
#include "eqmorph/sql.hpp"

using namespace eqmorph;

namespace {

const Schema kSchema{{TableDef{"t0", {{"a", ColumnType::Int}, {"b", ColumnType::Int}}},
                      TableDef{"t1", {{"a", ColumnType::Int}, {"s", ColumnType::Str}}}}};

Verdict check(const std::string& l, const std::string& r, FilterBudget b = {}) {
  return check_bounded(parse(l), parse(r), kSchema, b);
}

}  // namespace

TEST(Filter, CommutedSelectionsHaveNoCounterexample) {
  const Verdict v = check("SELECT a FROM t0 WHERE a > 0 AND b < 1", "SELECT a FROM t0 WHERE b < 1 AND a > 0");
  ASSERT_TRUE(std::holds_alternative<NoCounterexample>(v));
  EXPECT_EQ(std::get<NoCounterexample>(v).databasesChecked, FilterBudget{}.total());
}

TEST(Filter, DistinctAddedIsCaughtWithDuplicatedRow) {
  const std::string l = "SELECT a FROM t0";
  const std::string r = "SELECT DISTINCT a FROM t0";
  const Verdict v = check(l, r);
  ASSERT_TRUE(std::holds_alternative<NotEquivalent>(v));
  const auto& ne = std::get<NotEquivalent>(v);
  EXPECT_TRUE(witness_reproduces(parse(l), parse(r), ne));
  // The witness holds some row more than once.
  bool dup = false;
  for (const auto& row : ne.witness.find("t0")->data.rows()) dup |= row.count >= 2;
  EXPECT_TRUE(dup);
  // Checked independently: both queries on the witness differ.
  EXPECT_FALSE(execute(ne.witness, parse(l)).same_rows(execute(ne.witness, parse(r))));
}

TEST(Filter, IdenticalQueries) {
  EXPECT_TRUE(std::holds_alternative<NoCounterexample>(check("SELECT SUM(b) FROM t0", "SELECT SUM(b) FROM t0")));
}

TEST(Filter, NullSemanticsDifferences) {
  // a = a drops NULL rows; TRUE keeps them.
  EXPECT_TRUE(std::holds_alternative<NotEquivalent>(check("SELECT a FROM t0 WHERE a = a", "SELECT a FROM t0")));
  // COUNT(*) vs COUNT(a) differ only when a holds NULL.
  EXPECT_TRUE(std::holds_alternative<NotEquivalent>(check("SELECT COUNT(*) FROM t0", "SELECT COUNT(a) FROM t0")));
}

TEST(Filter, OneSidedErrorIsNotEquivalent) {
  const Verdict v = check("SELECT SUM(a) FROM t0", "SELECT SUM(s) FROM t1");
  ASSERT_TRUE(std::holds_alternative<NotEquivalent>(v));
  EXPECT_FALSE(std::get<NotEquivalent>(v).detail.empty());
}

TEST(Filter, WhereVersusHavingOnGroupKeyIsEquivalent) {
  EXPECT_TRUE(std::holds_alternative<NoCounterexample>(
      check("SELECT a, SUM(b) FROM t0 WHERE a > 0 GROUP BY a", "SELECT a, SUM(b) FROM t0 GROUP BY a HAVING a > 0")));
}

TEST(Filter, SameSeedSameDatabases) {
  FilterBudget b;
  b.seed = 42;
  const auto d1 = filter_databases(kSchema.tables, b, {});
  const auto d2 = filter_databases(kSchema.tables, b, {});
  EXPECT_EQ(d1.size(), b.total());
  EXPECT_TRUE(d1 == d2);
  b.seed = 43;
  EXPECT_FALSE(filter_databases(kSchema.tables, b, {}) == d1);
}

TEST(Filter, ZeroBudgetChecksNothing) {
  FilterBudget b;
  b.tiny = 0;
  b.random = 0;
  const Verdict v = check("SELECT a FROM t0", "SELECT DISTINCT a FROM t0", b);
  ASSERT_TRUE(std::holds_alternative<NoCounterexample>(v));
  EXPECT_EQ(std::get<NoCounterexample>(v).databasesChecked, 0u);
}
