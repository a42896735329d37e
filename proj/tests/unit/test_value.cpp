#include <gtest/gtest.h>

#include <vector>

#include "eqmorph/errors.hpp"
#include "eqmorph/eval.hpp"
#include "eqmorph/sql.hpp"

using namespace eqmorph;

namespace {

// Kleene logic as min/max over False < Unknown < True.
int rank(TruthValue t) { return t == TruthValue::False ? 0 : t == TruthValue::Unknown ? 1 : 2; }
TruthValue from_rank(int r) { return r == 0 ? TruthValue::False : r == 1 ? TruthValue::Unknown : TruthValue::True; }

const std::vector<TruthValue> kAll{TruthValue::False, TruthValue::Unknown, TruthValue::True};

Decimal dec(const char* s) { return Decimal::parse(s); }

Value agg(AggFn fn, std::vector<Weighted> group, bool star = false) {
  AggCall call{fn, star ? std::nullopt : std::optional<ColumnRef>(ColumnRef{"t0", "a"})};
  return eval_agg(call, group);
}

}  // namespace

TEST(Kleene, AndOrNotMatchMinMaxOracle) {
  for (auto a : kAll) {
    EXPECT_EQ(truth_not(a), from_rank(2 - rank(a)));
    for (auto b : kAll) {
      EXPECT_EQ(truth_and(a, b), from_rank(std::min(rank(a), rank(b))));
      EXPECT_EQ(truth_or(a, b), from_rank(std::max(rank(a), rank(b))));
    }
  }
}

TEST(Kleene, NamedCases) {
  EXPECT_EQ(truth_and(TruthValue::True, TruthValue::Unknown), TruthValue::Unknown);
  EXPECT_EQ(truth_and(TruthValue::False, TruthValue::Unknown), TruthValue::False);
  EXPECT_EQ(truth_not(TruthValue::Unknown), TruthValue::Unknown);
}

TEST(Kleene, ComparisonWithNullIsUnknown) {
  EXPECT_FALSE(sql_compare(Value::integer(1), Value::null()).has_value());
  EXPECT_FALSE(sql_compare(Value::null(), Value::null()).has_value());
  const SqlQuery q = parse("SELECT a FROM t0 WHERE 1 > NULL");
  const std::vector<SelectItem> cols{ColumnRef{"t0", "a"}};
  const std::vector<Value> row{Value::integer(5)};
  EXPECT_EQ(eval_pred(*q.where, RowBinding{cols, row}), TruthValue::Unknown);
}

TEST(Kleene, PredicateTreeAgreesWithOracleOnAllNullPatterns) {
  const SqlQuery q = parse("SELECT a FROM t0 WHERE (a > 0 AND NOT b = 1) OR a = b");
  const std::vector<SelectItem> cols{ColumnRef{"t0", "a"}, ColumnRef{"t0", "b"}};
  const std::vector<Value> dom{Value::null(), Value::integer(0), Value::integer(1)};
  auto cmp = [](const Value& x, const Value& y, auto pred) {
    if (x.is_null() || y.is_null()) return 1;
    return pred(x.as_int(), y.as_int()) ? 2 : 0;
  };
  for (const auto& a : dom) {
    for (const auto& b : dom) {
      const int p1 = cmp(a, Value::integer(0), [](auto x, auto y) { return x > y; });
      const int p2 = 2 - cmp(b, Value::integer(1), [](auto x, auto y) { return x == y; });
      const int p3 = cmp(a, b, [](auto x, auto y) { return x == y; });
      const int expect = std::max(std::min(p1, p2), p3);
      const std::vector<Value> row{a, b};
      EXPECT_EQ(rank(eval_pred(*q.where, RowBinding{cols, row})), expect) << a.to_string() << "," << b.to_string();
    }
  }
}

TEST(Decimal, ParseNormalizesAndPrints) {
  EXPECT_EQ(dec("1.500").to_string(), "1.5");
  EXPECT_EQ(dec("-0.25").to_string(), "-0.25");
  EXPECT_EQ(dec("0.0005").to_string(), "0.0005");
  EXPECT_EQ(dec("2.000"), dec("2"));
  EXPECT_THROW(dec("1.2.3"), std::invalid_argument);
  EXPECT_THROW(dec(""), std::invalid_argument);
}

TEST(Decimal, SumOfHalfThousandthsIsExact) {
  EXPECT_EQ((dec("0.0005") + dec("0.0005")).to_string(), "0.001");
}

TEST(Decimal, DivideRoundsHalfAwayFromZero) {
  EXPECT_EQ(divide(dec("1"), 3, 4).to_string(), "0.3333");
  EXPECT_EQ(divide(dec("2"), 3, 4).to_string(), "0.6667");
  EXPECT_EQ(divide(dec("0.5"), 1, 0).to_string(), "1");
  EXPECT_EQ(divide(dec("-0.5"), 1, 0).to_string(), "-1");
  EXPECT_EQ(divide(dec("-1"), 3, 2).to_string(), "-0.33");
}

TEST(Value, TotalOrderNullFirstThenNumbersThenStrings) {
  EXPECT_LT(Value::null(), Value::integer(-5));
  EXPECT_LT(Value::integer(2), Value::decimal(dec("2.5")));
  EXPECT_LT(Value::decimal(dec("99")), Value::string(""));
  EXPECT_LT(Value::string("A"), Value::string("a"));
}

TEST(Value, StringVersusNumberComparisonIsTypeError) {
  try {
    sql_compare(Value::string("a"), Value::integer(1));
    FAIL();
  } catch (const ExecError& e) {
    EXPECT_EQ(e.code(), codes::kTypeMismatch);
  }
}

TEST(Aggregates, MultisetArithmetic) {
  const std::vector<Weighted> g{{Value::integer(1), 2}, {Value::integer(2), 1}};
  EXPECT_EQ(agg(AggFn::Sum, g), Value::integer(4));
  EXPECT_EQ(agg(AggFn::Count, g), Value::integer(3));
  EXPECT_EQ(agg(AggFn::Count, g, true), Value::integer(3));
  EXPECT_EQ(agg(AggFn::Max, g), Value::integer(2));
  EXPECT_EQ(agg(AggFn::Min, g), Value::integer(1));
  EXPECT_EQ(agg(AggFn::Avg, g).to_string(), "1.3333");
}

TEST(Aggregates, MaxIgnoresMultiplicities) {
  const std::vector<Weighted> a{{Value::integer(1), 2}, {Value::integer(2), 1}};
  const std::vector<Weighted> b{{Value::integer(1), 1}, {Value::integer(2), 7}};
  EXPECT_EQ(agg(AggFn::Max, a), agg(AggFn::Max, b));
  EXPECT_NE(agg(AggFn::Sum, a), agg(AggFn::Sum, b));
}

TEST(Aggregates, EmptyAndNullInputs) {
  EXPECT_EQ(agg(AggFn::Count, {}, true), Value::integer(0));
  EXPECT_EQ(agg(AggFn::Count, {}), Value::integer(0));
  EXPECT_TRUE(agg(AggFn::Sum, {}).is_null());
  EXPECT_TRUE(agg(AggFn::Max, {}).is_null());
  const std::vector<Weighted> nulls{{Value::null(), 3}};
  EXPECT_EQ(agg(AggFn::Count, nulls, true), Value::integer(3));
  EXPECT_EQ(agg(AggFn::Count, nulls), Value::integer(0));
  EXPECT_TRUE(agg(AggFn::Avg, nulls).is_null());
}

TEST(Aggregates, SumOverflowRaises) {
  const std::vector<Weighted> g{{Value::integer(INT64_MAX), 2}};
  try {
    agg(AggFn::Sum, g);
    FAIL();
  } catch (const ExecError& e) {
    EXPECT_EQ(e.code(), codes::kOverflow);
  }
}

TEST(Aggregates, SumOfStringsIsTypeError) {
  const std::vector<Weighted> g{{Value::string("a"), 1}};
  EXPECT_THROW(agg(AggFn::Sum, g), ExecError);
  EXPECT_EQ(agg(AggFn::Max, g), Value::string("a"));
}
