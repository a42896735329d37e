#include <gtest/gtest.h>

#include "eqmorph/errors.hpp"
#include "eqmorph/generator.hpp"
#include "eqmorph/sql.hpp"

using namespace eqmorph;

namespace {

Schema schema_t0() {
  return Schema{{TableDef{"t0", {{"a", ColumnType::Int}, {"b", ColumnType::Int}}},
                 TableDef{"t1", {{"a", ColumnType::Int}, {"s", ColumnType::Str}}}}};
}

std::vector<SemanticError::Kind> kinds(const std::string& sql) {
  std::vector<SemanticError::Kind> out;
  for (const auto& e : validate(parse(sql), schema_t0())) out.push_back(e.kind);
  return out;
}

}  // namespace

TEST(Parse, WhereGroupByExample) {
  const SqlQuery q = parse("SELECT a FROM t0 WHERE a > 1 GROUP BY a");
  ASSERT_EQ(q.select.size(), 1u);
  EXPECT_EQ(std::get<ColumnRef>(q.select[0]).column, "a");
  EXPECT_EQ(q.from, std::vector<std::string>{"t0"});
  ASSERT_TRUE(q.where);
  EXPECT_EQ(*q.where, Predicate::compare(ColumnRef{"", "a"}, CmpOp::Gt, Value::integer(1)));
  ASSERT_EQ(q.group_by.size(), 1u);
  EXPECT_EQ(q.group_by[0].column, "a");
  EXPECT_FALSE(q.having);
}

TEST(Parse, Minimal) {
  const SqlQuery q = parse("SELECT a FROM t0");
  EXPECT_EQ(q.select.size(), 1u);
  EXPECT_FALSE(q.where);
  EXPECT_FALSE(q.distinct);
}

TEST(Parse, EmptySelectListIsSyntaxErrorAtFrom) {
  try {
    parse("SELECT FROM t0");
    FAIL();
  } catch (const SyntaxError& e) {
    EXPECT_EQ(e.position(), 7u);
    EXPECT_EQ(e.found(), "FROM");
  }
}

TEST(Parse, RejectsTrailingGarbageAndUnclosedParens) {
  EXPECT_THROW(parse("SELECT a FROM t0 t1"), SyntaxError);
  EXPECT_THROW(parse("SELECT a FROM t0 WHERE (a > 1"), SyntaxError);
  EXPECT_THROW(parse("SELECT a FROM t0 HAVING a > 1"), SyntaxError);
  EXPECT_THROW(parse("SELECT a FROM t0 WHERE a > 'x"), SyntaxError);
}

TEST(Parse, KeywordsAreCaseInsensitive) {
  EXPECT_EQ(parse("select distinct a from t0 where a <> 1"), parse("SELECT DISTINCT a FROM t0 WHERE a != 1"));
}

TEST(Parse, SetOperationsAssociateLeft) {
  const SqlQuery q = parse("SELECT a FROM t0 UNION SELECT a FROM t1 UNION ALL SELECT b FROM t0");
  const auto blocks = q.blocks();
  ASSERT_EQ(blocks.size(), 3u);
  EXPECT_EQ(q.set_op->kind, SetOpKind::Union);
  EXPECT_EQ(q.set_op->rhs->set_op->kind, SetOpKind::UnionAll);
}

TEST(Render, DistinctWhere) {
  SqlQuery q;
  q.select = {ColumnRef{"", "a"}};
  q.distinct = true;
  q.from = {"t0"};
  q.where = Predicate::compare(ColumnRef{"", "a"}, CmpOp::Gt, Value::integer(0));
  EXPECT_EQ(render(q), "SELECT DISTINCT a FROM t0 WHERE a > 0");
}

TEST(Render, GroupByHaving) {
  SqlQuery q;
  q.select = {ColumnRef{"", "a"}};
  q.from = {"t0"};
  q.group_by = {ColumnRef{"", "a"}};
  q.having = Predicate::compare(ColumnRef{"", "a"}, CmpOp::Gt, Value::integer(0));
  EXPECT_EQ(render(q), "SELECT a FROM t0 GROUP BY a HAVING a > 0");
}

TEST(Render, CanonicalWhitespaceFixpoint) {
  const std::string text = "select   a\nFROM t0   where a>1 group by a";
  const std::string once = render(parse(text));
  EXPECT_EQ(once, "SELECT a FROM t0 WHERE a > 1 GROUP BY a");
  EXPECT_EQ(render(parse(once)), once);
}

TEST(Render, PrecedenceNeedsParens) {
  const std::string sql = "SELECT a FROM t0 WHERE (a = 1 OR b = 2) AND NOT (a = b OR b IS NULL)";
  EXPECT_THROW(parse(sql), SyntaxError);  // IS NULL is outside the subset
  const std::string ok = "SELECT a FROM t0 WHERE (a = 1 OR b = 2) AND NOT (a = b OR b = 1)";
  EXPECT_EQ(render(parse(ok)), ok);
}

TEST(Render, StringLiteralsRoundTrip) {
  const SqlQuery q = parse("SELECT s FROM t1 WHERE s = 'it''s' OR s = ''");
  EXPECT_EQ(parse(render(q)), q);
  EXPECT_NE(render(q).find("'it''s'"), std::string::npos);
}

TEST(Render, RoundTripOnGeneratedQueries) {
  GeneratorConfig cfg;
  Rng rng(11);
  for (int i = 0; i < 50; ++i) {
    const GeneratedDatabase data = generate_database(cfg, rng);
    for (int j = 0; j < 20; ++j) {
      const SqlQuery q = generate_seed(cfg, data.db.schema(), rng);
      const std::string text = render(q);
      const SqlQuery back = parse(text);
      ASSERT_EQ(back, q) << text;
      ASSERT_EQ(render(back), text);
    }
  }
}

TEST(Validate, Accepts) { EXPECT_TRUE(kinds("SELECT a FROM t0").empty()); }

TEST(Validate, UnknownColumnAndTable) {
  EXPECT_EQ(kinds("SELECT c FROM t0"), std::vector{SemanticError::Kind::UnknownColumn});
  EXPECT_EQ(kinds("SELECT a FROM t9"), std::vector{SemanticError::Kind::UnknownTable});
}

TEST(Validate, NonGroupedColumn) {
  EXPECT_EQ(kinds("SELECT a, SUM(b) FROM t0"), std::vector{SemanticError::Kind::NonGroupedColumn});
  EXPECT_TRUE(kinds("SELECT a, SUM(b) FROM t0 GROUP BY a").empty());
  EXPECT_EQ(kinds("SELECT a FROM t0 GROUP BY b"), std::vector{SemanticError::Kind::NonGroupedColumn});
}

TEST(Validate, AmbiguousInCrossProduct) {
  EXPECT_EQ(kinds("SELECT a FROM t0, t1"), std::vector{SemanticError::Kind::AmbiguousColumn});
  EXPECT_TRUE(kinds("SELECT t0.a, s FROM t0, t1").empty());
}

TEST(Validate, StringNumberComparisonIsTypeMismatch) {
  EXPECT_EQ(kinds("SELECT a FROM t1 WHERE s = 1"), std::vector{SemanticError::Kind::TypeMismatch});
  EXPECT_EQ(kinds("SELECT SUM(s) FROM t1"), std::vector{SemanticError::Kind::TypeMismatch});
}

TEST(Validate, SetOperationArity) {
  EXPECT_FALSE(kinds("SELECT a FROM t0 UNION SELECT a, b FROM t0").empty());
  EXPECT_TRUE(kinds("SELECT a FROM t0 UNION ALL SELECT b FROM t0").empty());
}

TEST(Resolve, QualifiesEveryColumn) {
  const Resolution r = resolve(parse("SELECT a, SUM(b) FROM t0 WHERE b > 0 GROUP BY a HAVING a < 3"), schema_t0());
  ASSERT_TRUE(r.ok());
  const std::string text = render(r.query);
  EXPECT_EQ(text, "SELECT t0.a, SUM(t0.b) FROM t0 WHERE t0.b > 0 GROUP BY t0.a HAVING t0.a < 3");
  EXPECT_EQ(render(strip_qualifiers(r.query)), "SELECT a, SUM(b) FROM t0 WHERE b > 0 GROUP BY a HAVING a < 3");
}
