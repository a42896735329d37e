#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "eqmorph/harness.hpp"
#include "eqmorph/sql.hpp"

using namespace eqmorph;

namespace {

Rows ints(std::vector<std::optional<std::string>> col) {
  Rows r{{"INT"}, {}};
  for (auto& v : col) r.rows.push_back({v});
  return r;
}

Rows decs(std::vector<std::string> col) {
  Rows r{{"DECIMAL"}, {}};
  for (auto& v : col) r.rows.push_back({v});
  return r;
}

ExecutorFactory builtin(std::optional<std::string> fault = std::nullopt) {
  return [fault] { return std::make_unique<BuiltinExecutor>(fault); };
}

HarnessConfig small_config(std::size_t queries) {
  HarnessConfig cfg;
  cfg.gen.queriesPerIteration = queries;
  cfg.gen.rngSeed = 1;
  return cfg;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string without_timestamp(BugReport r) {
  r.timestamp.clear();
  return report_to_json(r);
}

}  // namespace

TEST(Compare, MultisetSemantics) {
  EXPECT_FALSE(compare_results(ints({"1", "1"}), ints({"1", "1"}), CompareMode::Both));
  EXPECT_FALSE(compare_results(ints({"2", "1", std::nullopt}), ints({std::nullopt, "1", "2"}), CompareMode::Both));
  const auto m = compare_results(ints({"1", "1"}), ints({"1"}), CompareMode::Canonical);
  ASSERT_TRUE(m);
  EXPECT_EQ(m->kind, "value");
  EXPECT_NE(m->detail.find("left has extra"), std::string::npos) << m->detail;
  EXPECT_TRUE(compare_results(ints({"1"}), ints({std::nullopt}), CompareMode::Canonical));
}

TEST(Compare, RawTextVersusCanonical) {
  const Rows a = decs({"0.001"});
  const Rows b = decs({"0.0010000000000000000208"});
  EXPECT_TRUE(compare_results(a, b, CompareMode::RawText));
  EXPECT_FALSE(compare_results(a, b, CompareMode::Canonical));
  const auto both = compare_results(a, b, CompareMode::Both);
  ASSERT_TRUE(both);
  EXPECT_EQ(both->kind, "representation");
  EXPECT_FALSE(compare_results(decs({"2.50"}), decs({"2.5"}), CompareMode::Canonical));
  EXPECT_TRUE(compare_results(decs({"2.5"}), decs({"2.6"}), CompareMode::Canonical));
}

TEST(Compare, CanonicalValue) {
  EXPECT_EQ(canonical_value(std::string("1.23456789016"), "DECIMAL"), "1.2345678902");
  EXPECT_EQ(canonical_value(std::string("-0.00000000005"), "DECIMAL"), "-0.0000000001");
  EXPECT_EQ(canonical_value(std::string("3.000"), ""), "3");
  EXPECT_EQ(canonical_value(std::string("3.000"), "VARCHAR"), "3.000");
  EXPECT_EQ(canonical_value(std::nullopt, "INT"), std::nullopt);
}

TEST(Compare, ArityMismatchThrows) {
  Rows two{{"INT", "INT"}, {{std::string("1"), std::string("2")}}};
  EXPECT_THROW(compare_results(ints({"1"}), two, CompareMode::Both), ArityMismatch);
}

TEST(ErrorFilter, DefaultsAndTriage) {
  const auto d = ErrorFilterList::defaults();
  EXPECT_EQ(filter_error({"UNKNOWN_COLUMN", "x"}, d), ErrorAction::Discard);
  EXPECT_EQ(filter_error({"SEGFAULT_LIKE", "x"}, d), ErrorAction::KeepForTriage);
  EXPECT_EQ(filter_error({"UNKNOWN_COLUMN", "x"}, ErrorFilterList{}), ErrorAction::KeepForTriage);
}

TEST(ErrorFilter, LoadFile) {
  const auto path = std::filesystem::temp_directory_path() / "eqmorph_errors.txt";
  std::ofstream(path) << "# comment\n\nFOO\n  BAR  \n";
  const auto l = ErrorFilterList::load(path);
  EXPECT_EQ(l.codes(), (std::set<std::string>{"FOO", "BAR"}));
  std::filesystem::remove(path);
  EXPECT_THROW(ErrorFilterList::load(path), std::runtime_error);
}

TEST(Report, JsonRoundTrip) {
  BugReport r;
  r.id = "i0001-q0002";
  r.schemaDdl = "CREATE TABLE t0 (a INT);";
  r.inserts = {"INSERT INTO t0 VALUES (1);", "INSERT INTO t0 VALUES (NULL);"};
  r.leftSql = "SELECT a FROM t0";
  r.rightSql = "SELECT DISTINCT a FROM t0";
  r.leftResult = ints({"1", "1", std::nullopt});
  r.rightResult = EngineError{"BOOM", "line\nbreak"};
  r.ruleName = "dedup-insertion";
  r.rngSeed = 99;
  r.iteration = 1;
  r.filterBudgetUsed = 32;
  r.targetId = "builtin:drop-distinct";
  r.timestamp = "2026-01-01T00:00:00Z";
  r.mismatchKind = "error";
  r.compareMode = "both";
  r.detail = "d";
  const std::string text = report_to_json(r);
  EXPECT_EQ(report_to_json(report_from_json(text)), text);
  EXPECT_LT(text.find("\"id\""), text.find("\"schemaDdl\""));
  EXPECT_THROW(report_from_json("{}"), std::invalid_argument);
  EXPECT_THROW(report_from_json("nope"), std::invalid_argument);
  const std::string sql = reproducer_sql(r);
  EXPECT_NE(sql.find(r.leftSql), std::string::npos);
  EXPECT_NE(sql.find(r.inserts[1]), std::string::npos);
}

TEST(TestDb, NoSeedsNoWork) {
  BuiltinExecutor target;
  GeneratorConfig gen;
  Rng rng(1);
  const auto data = generate_database(gen, rng);
  ASSERT_FALSE(target.reset_schema(data.script));
  const auto out = test_db({}, target, data, HarnessConfig{}, rng);
  EXPECT_TRUE(out.reports.empty());
  EXPECT_EQ(out.stats.generated, 0u);
  EXPECT_EQ(out.stats.pairsEmitted, 0u);
}

TEST(Campaign, CleanTargetStatsAddUp) {
  const auto res = run_campaign(small_config(400), 3, builtin());
  ASSERT_FALSE(res.error);
  EXPECT_TRUE(res.reports.empty());
  ASSERT_EQ(res.stats.size(), 3u);
  for (const auto& s : res.stats) {
    EXPECT_EQ(s.generated, 400u);
    EXPECT_LE(s.validAfterExecution, s.parsedOk);
    EXPECT_EQ(s.pairsEmitted, s.pairsFiltered + s.pairsExecuted);
    EXPECT_EQ(s.mismatches, 0u);
    EXPECT_GT(s.pairsExecuted, 0u);
  }
}

TEST(Campaign, DropDistinctFoundAndReplayed) {
  const auto res = run_campaign(small_config(2000), 3, builtin("drop-distinct"));
  ASSERT_FALSE(res.error);
  ASSERT_FALSE(res.reports.empty());
  std::uint64_t mismatches = 0;
  for (const auto& s : res.stats) mismatches += s.mismatches;
  EXPECT_EQ(mismatches, res.reports.size());
  BuiltinExecutor faulty("drop-distinct");
  BuiltinExecutor clean;
  for (const auto& r : res.reports) {
    EXPECT_EQ(r.targetId, "builtin:drop-distinct");
    EXPECT_TRUE(replay(report_from_json(report_to_json(r)), faulty)) << r.id;
    EXPECT_FALSE(replay(r, clean)) << r.id;
  }
}

TEST(Campaign, WorkerCountDoesNotChangeOutput) {
  const auto cfg = small_config(500);
  const auto a = run_campaign(cfg, 4, builtin("sum-skips-duplicates"), 1);
  const auto b = run_campaign(cfg, 4, builtin("sum-skips-duplicates"), 2);
  ASSERT_FALSE(a.reports.empty());
  ASSERT_EQ(a.reports.size(), b.reports.size());
  for (std::size_t i = 0; i < a.reports.size(); ++i) {
    EXPECT_EQ(without_timestamp(a.reports[i]), without_timestamp(b.reports[i]));
  }
  ASSERT_EQ(a.stats.size(), b.stats.size());
  for (std::size_t i = 0; i < a.stats.size(); ++i) {
    IterationStats x = a.stats[i];
    IterationStats y = b.stats[i];
    x.elapsedMs = y.elapsedMs = 0;
    EXPECT_EQ(stats_to_json(x), stats_to_json(y));
  }
}

TEST(Campaign, DeadTargetRecordsError) {
  const auto res = run_campaign(small_config(10), 2, [] {
    return make_executor("extern:/nonexistent/eqmorph-no-such-binary");
  });
  EXPECT_TRUE(res.error);
}

TEST(Outputs, FilesWritten) {
  const auto res = run_campaign(small_config(2000), 2, builtin("drop-distinct"));
  ASSERT_FALSE(res.reports.empty());
  const auto dir = std::filesystem::temp_directory_path() / "eqmorph_harness_out";
  std::filesystem::remove_all(dir);
  write_outputs(res, dir);
  const auto& r = res.reports.front();
  EXPECT_EQ(slurp(dir / "reports" / (r.id + ".json")), report_to_json(r));
  EXPECT_EQ(slurp(dir / "reports" / (r.id + ".sql")), reproducer_sql(r));
  const std::string stats = slurp(dir / "stats.jsonl");
  EXPECT_EQ(std::count(stats.begin(), stats.end(), '\n'), 2);
  EXPECT_TRUE(std::filesystem::exists(dir / "triage.jsonl"));
  std::filesystem::remove_all(dir);
}
