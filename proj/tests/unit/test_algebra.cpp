#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "eqmorph/algebra.hpp"
#include "eqmorph/generator.hpp"
#include "eqmorph/refdb.hpp"
#include "eqmorph/sql.hpp"

using namespace eqmorph;

namespace {

const Schema kSchema{{TableDef{"t0", {{"a", ColumnType::Int}, {"b", ColumnType::Int}}},
                      TableDef{"t1", {{"a", ColumnType::Int}}}}};

AlgebraExpr low(const std::string& sql) { return lower(parse(sql), kSchema); }

// Labels along the first-child spine, root first.
std::vector<std::string> spine(const AlgebraExpr& e) {
  std::vector<std::string> out;
  for (const AlgebraExpr* n = &e;; n = &n->child()) {
    out.push_back(label(*n));
    if (n->children.empty()) break;
  }
  return out;
}

std::set<std::string> renderings(const AlgebraExpr& e) {
  std::set<std::string> out;
  for (const auto& q : remap_to_sql(e)) out.insert(render(q));
  return out;
}

}  // namespace

TEST(Lower, DistinctWhereIsProjectDedupFilterScan) {
  EXPECT_EQ(spine(low("SELECT DISTINCT a FROM t0 WHERE a > 0")),
            (std::vector<std::string>{"Project [t0.a]", "Dedup [t0.a]", "Filter (t0.a > 0)", "Scan t0"}));
}

TEST(Lower, PlainSelect) {
  EXPECT_EQ(spine(low("SELECT a FROM t0")), (std::vector<std::string>{"Project [t0.a]", "Scan t0"}));
}

TEST(Lower, GroupedSum) {
  EXPECT_EQ(spine(low("SELECT SUM(b) FROM t0 GROUP BY a")),
            (std::vector<std::string>{"Project [sum(t0.b)]", "Aggregate [t0.a] [sum(t0.b)]", "Scan t0"}));
}

TEST(Lower, ConjunctionsStackAsFilters) {
  const auto s = spine(low("SELECT a FROM t0 WHERE a > 0 AND b < 2"));
  ASSERT_EQ(s.size(), 4u);
  EXPECT_EQ(s[1].rfind("Filter", 0), 0u);
  EXPECT_EQ(s[2].rfind("Filter", 0), 0u);
}

TEST(Lower, CrossProductScanAndUnionTree) {
  EXPECT_EQ(label(low("SELECT t0.a FROM t0, t1").child()), "Scan t0, t1");
  const AlgebraExpr u = low("SELECT a FROM t0 UNION SELECT a FROM t1 UNION ALL SELECT b FROM t0");
  EXPECT_EQ(label(u), "UnionAll");
  EXPECT_EQ(label(u.child(0)), "Union");
}

TEST(Lower, InvalidQueryThrows) {
  EXPECT_THROW(low("SELECT c FROM t0"), LoweringError);
}

TEST(Typecheck, SetMultisetValue) {
  EXPECT_EQ(typecheck(low("SELECT DISTINCT a FROM t0 WHERE a > 0").child()), RelType::Set);
  EXPECT_EQ(typecheck(low("SELECT a FROM t0").child()), RelType::Multiset);
  EXPECT_EQ(typecheck(low("SELECT a FROM t0")), RelType::Multiset);
  EXPECT_EQ(typecheck(low("SELECT SUM(b) FROM t0").child()), RelType::Value);
}

TEST(Typecheck, DedupOfSetIsLinted) {
  AlgebraExpr e = low("SELECT DISTINCT a FROM t0");
  AlgebraExpr extra{Dedup{{ColumnRef{"t0", "a"}}}, {e.child()}};
  e = replace_at(e, {0}, extra);
  std::vector<std::string> lints;
  EXPECT_EQ(typecheck(e, &lints), RelType::Set);
  EXPECT_FALSE(lints.empty());
}

TEST(Typecheck, ProjectOfMissingColumnThrows) {
  AlgebraExpr e = low("SELECT a FROM t0");
  e.as<Project>().items = {ColumnRef{"t0", "zz"}};
  EXPECT_THROW(typecheck(e), TypeError);
}

TEST(Remap, PlainProjectionHasOneRenderingUpToQualification) {
  std::set<std::string> bare;
  for (const auto& q : remap_to_sql(low("SELECT a FROM t0"))) bare.insert(render(strip_qualifiers(q)));
  EXPECT_EQ(bare, std::set<std::string>{"SELECT a FROM t0"});
}

TEST(Remap, SelectionOverDedupOffersGroupByForm) {
  const auto r = renderings(low("SELECT DISTINCT a FROM t0 WHERE a > 0"));
  EXPECT_TRUE(r.count("SELECT a FROM t0 WHERE a > 0 GROUP BY a"));
  EXPECT_TRUE(r.count("SELECT DISTINCT a FROM t0 WHERE a > 0"));
}

TEST(Remap, FilterAboveGroupingIsHaving) {
  const auto r = renderings(low("SELECT a FROM t0 GROUP BY a HAVING a > 0"));
  EXPECT_TRUE(r.count("SELECT a FROM t0 GROUP BY a HAVING a > 0"));
  for (const auto& s : r) EXPECT_EQ(s.find("WHERE"), std::string::npos) << s;
}

TEST(Remap, MembershipAndEvaluationOnGeneratedQueries) {
  GeneratorConfig cfg;
  Rng rng(5);
  int checked = 0;
  for (int d = 0; d < 30; ++d) {
    const GeneratedDatabase data = generate_database(cfg, rng);
    const Schema schema = data.db.schema();
    for (int i = 0; i < 30; ++i) {
      const SqlQuery q = generate_seed(cfg, schema, rng);
      const AlgebraExpr e = lower(q, schema);
      const auto r = remap_to_sql(e);
      const std::string text = render(q);
      ASSERT_TRUE(std::any_of(r.begin(), r.end(), [&](const SqlQuery& x) { return render(x) == text; })) << text;
      for (const auto& x : r) ASSERT_EQ(lower(x, schema), e) << render(x);
      // The IR interpreter and the clause pipeline agree, errors included.
      std::optional<Relation> direct;
      std::optional<Relation> engine;
      try {
        direct = evaluate(data.db, e);
      } catch (const std::exception&) {
      }
      try {
        engine = execute(data.db, q);
      } catch (const std::exception&) {
      }
      ASSERT_EQ(direct.has_value(), engine.has_value()) << text;
      if (direct) {
        ASSERT_TRUE(direct->same_rows(*engine)) << text;
      }
      ++checked;
    }
  }
  EXPECT_EQ(checked, 900);
}

TEST(Paths, NodeAtAndReplaceAt) {
  const AlgebraExpr e = low("SELECT DISTINCT a FROM t0 WHERE a > 0");
  EXPECT_EQ(label(node_at(e, {0, 0})), "Filter (t0.a > 0)");
  const AlgebraExpr r = replace_at(e, {0, 0}, node_at(e, {0, 0, 0}));
  EXPECT_EQ(spine(r), (std::vector<std::string>{"Project [t0.a]", "Dedup [t0.a]", "Scan t0"}));
  EXPECT_THROW(node_at(e, {3}), std::out_of_range);
}
