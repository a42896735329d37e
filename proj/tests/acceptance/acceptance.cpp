// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero if any fails.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <regex>
#include <sstream>

#include "eqmorph/cli.hpp"
#include "eqmorph/errors.hpp"
#include "eqmorph/harness.hpp"
#include "eqmorph/refdb.hpp"
#include "eqmorph/sensitivity.hpp"
#include "eqmorph/sql.hpp"

using namespace eqmorph;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

int failures = 0;

void verdict(int n, bool ok, const std::string& what) {
  std::printf("criterion %d %s: %s\n", n, ok ? "PASS" : "FAIL", what.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

ExecutorFactory builtin(std::optional<std::string> fault = std::nullopt) {
  return [fault] { return std::make_unique<BuiltinExecutor>(fault); };
}

HarnessConfig config(std::uint64_t seed) {
  HarnessConfig cfg;
  cfg.gen.queriesPerIteration = 2000;
  cfg.gen.rngSeed = seed;
  return cfg;
}

// Result of a query on a database: rows, or the error code.
struct Outcome {
  std::optional<Relation> rows;
  std::string error;

  bool operator==(const Outcome& o) const {
    if (error != o.error || rows.has_value() != o.rows.has_value()) return false;
    return !rows || rows->same_rows(*o.rows);
  }
};

Outcome run_on(const Database& db, const SqlQuery& q) {
  try {
    return {execute(db, q), {}};
  } catch (const ExecError& e) {
    return {std::nullopt, e.code()};
  }
}

// Content generator independent of the library's: small pools that collide
// often, NULLs, and multiplicities up to 3.
Database random_contents(const Schema& schema, std::mt19937_64& gen) {
  static const std::vector<std::int64_t> ints{-1, 0, 1, 2, 7};
  static const std::vector<std::string> strs{"", "a", "aa", "b"};
  Database db;
  for (const auto& t : schema.tables) {
    db.create_table(t);
    const int rows = static_cast<int>(gen() % 5);
    for (int r = 0; r < rows; ++r) {
      Tuple tuple;
      for (const auto& c : t.columns) {
        if (gen() % 5 == 0) {
          tuple.push_back(Value::null());
          continue;
        }
        switch (c.type) {
          case ColumnType::Int: tuple.push_back(Value::integer(ints[gen() % ints.size()])); break;
          case ColumnType::Dec:
            tuple.push_back(Value::decimal(Decimal::make(static_cast<std::int64_t>(gen() % 7) - 3, static_cast<int>(1 + gen() % 3))));
            break;
          default: tuple.push_back(Value::string(strs[gen() % strs.size()])); break;
        }
      }
      db.insert(t.name, tuple, 1 + gen() % 3);
    }
  }
  return db;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Every file under `dir`, keyed by relative path, with wall-clock fields
// blanked.
std::map<std::string, std::string> snapshot(const fs::path& dir) {
  static const std::regex timestamp("\"timestamp\": \"[^\"]*\"");
  static const std::regex elapsed("\"elapsedMs\":[-0-9.eE+]+");
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    std::string text = slurp(e.path());
    text = std::regex_replace(text, timestamp, "\"timestamp\": \"\"");
    text = std::regex_replace(text, elapsed, "\"elapsedMs\":0");
    out[fs::relative(e.path(), dir).string()] = text;
  }
  return out;
}

int cli(std::vector<std::string> args) {
  args.insert(args.begin(), "eqmorph");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  std::ostringstream sink;
  auto* old = std::cout.rdbuf(sink.rdbuf());
  const int code = cli_main(static_cast<int>(argv.size()), argv.data());
  std::cout.rdbuf(old);
  return code;
}

IterationStats criterion1() {
  const auto t0 = Clock::now();
  const auto res = run_campaign(config(1), 5, builtin());
  const double secs = seconds_since(t0);
  IterationStats total;
  for (const auto& s : res.stats) {
    total.generated += s.generated;
    total.validAfterExecution += s.validAfterExecution;
    total.pairsExecuted += s.pairsExecuted;
  }
  std::ostringstream msg;
  msg << total.generated << " seeds on clean builtin, " << total.pairsExecuted << " pairs executed, "
      << res.reports.size() << " reports (need 0, seeds >= 10000), " << secs << " s (limit 600 s)";
  verdict(1, !res.error && total.generated >= 10000 && res.reports.empty() && secs <= 600, msg.str());
  return total;
}

void criterion2(const fs::path& scratch) {
  bool ok = true;
  std::ostringstream msg;
  for (const auto& fault : fault_registry()) {
    const auto t0 = Clock::now();
    const auto res = run_campaign(config(2), 10, builtin(fault.name));
    const double secs = seconds_since(t0);
    bool replayed = false;
    if (!res.reports.empty()) {
      const fs::path dir = scratch / ("fault-" + fault.name);
      write_outputs(res, dir);
      const fs::path report = dir / "reports" / (res.reports.front().id + ".json");
      replayed = cli({"replay", report.string()}) == kExitBugs &&
                 cli({"replay", report.string(), "--target", "builtin"}) == kExitOk;
    }
    const bool this_ok = !res.error && !res.reports.empty() && replayed && secs <= 300;
    ok &= this_ok;
    msg << fault.name << "=" << res.reports.size() << (replayed ? "/replayed" : "/not-replayed") << " ";
  }
  msg << "(need >= 1 report per fault within 10 x 2000 queries, replay exit 10 on the fault and 0 on clean)";
  verdict(2, ok && fault_registry().size() >= 6, msg.str());
}

void criterion3() {
  GeneratorConfig cfg;
  Rng rng(3);
  std::size_t non_agg = 0;
  std::size_t insensitive = 0;
  std::size_t violations = 0;
  std::size_t sensitive_witnessed = 0;
  std::size_t agg = 0;
  std::size_t agg_disagree = 0;
  std::string first_violation;
  while (non_agg < 1500) {
    const GeneratedDatabase data = generate_database(cfg, rng);
    const Schema schema = data.db.schema();
    for (int i = 0; i < 50; ++i) {
      const SqlQuery q = generate_seed(cfg, schema, rng);
      const AlgebraExpr e = lower(q, schema);
      const Sensitivity s = query_sensitivity(e);
      const bool witnessed = std::holds_alternative<WitnessFound>(sensitivity_oracle(e));
      if (aggregate_free(e)) {
        ++non_agg;
        if (s == Sensitivity::Insensitive) {
          ++insensitive;
          if (witnessed) {
            ++violations;
            if (first_violation.empty()) first_violation = render(q);
          }
        } else {
          sensitive_witnessed += witnessed;
        }
      } else {
        ++agg;
        agg_disagree += (s == Sensitivity::Insensitive) == witnessed;
      }
    }
  }
  std::ostringstream msg;
  msg << non_agg << " non-aggregate queries, " << insensitive << " statically insensitive, " << violations
      << " with an oracle witness (need 0); " << sensitive_witnessed << "/" << (non_agg - insensitive)
      << " sensitive ones witnessed; aggregate fragment: " << agg_disagree << "/" << agg
      << " static/oracle disagreements (recorded only)";
  if (!first_violation.empty()) msg << "; e.g. " << first_violation;
  verdict(3, non_agg >= 1000 && insensitive > 0 && violations == 0, msg.str());
}

void criterion4() {
  GeneratorConfig cfg;
  Rng rng(4);
  std::mt19937_64 gen(404);
  const Catalog& catalog = default_catalog();
  std::map<std::string, std::size_t> pairs;
  std::size_t divergences = 0;
  std::string first;
  auto done = [&] {
    for (const auto& r : catalog) {
      if (pairs[r.name] < 100) return false;
    }
    return true;
  };
  for (int round = 0; round < 400 && !done(); ++round) {
    const GeneratedDatabase data = generate_database(cfg, rng);
    const Schema schema = data.db.schema();
    std::vector<Database> corpus;
    corpus.reserve(1000);
    for (int k = 0; k < 1000; ++k) corpus.push_back(random_contents(schema, gen));
    // At most 25 pairs per rule on one schema so every rule sees many schemas.
    std::map<std::string, std::size_t> here;
    for (int i = 0; i < 300; ++i) {
      const SqlQuery seed = generate_seed(cfg, schema, rng);
      for (const auto& rule : catalog) {
        if (pairs[rule.name] >= 100 || here[rule.name] >= 25) continue;
        const auto pair = transform_query(seed, Catalog{rule}, {&schema, &data.db, &rng});
        if (!pair) continue;
        ++pairs[rule.name];
        ++here[rule.name];
        for (const auto& db : corpus) {
          if (!(run_on(db, pair->left) == run_on(db, pair->right))) {
            ++divergences;
            if (first.empty()) first = rule.name + ": " + render(pair->left) + " | " + render(pair->right);
            break;
          }
        }
      }
    }
  }
  std::ostringstream msg;
  bool enough = true;
  for (const auto& r : catalog) {
    msg << r.name << "=" << pairs[r.name] << " ";
    enough &= pairs[r.name] >= 100;
  }
  msg << "pairs, each on 1000 random databases; " << divergences << " divergent pairs (need 0, >= 100 pairs per rule)";
  if (!first.empty()) msg << "; e.g. " << first;
  verdict(4, enough && divergences == 0, msg.str());
}

// A deliberately non-equivalent partner: DISTINCT toggled, UNION and UNION
// ALL swapped, or the WHERE clause dropped.
SqlQuery break_equivalence(const SqlQuery& q, std::size_t i) {
  SqlQuery out = q;
  if (i % 3 == 1 && out.set_op) {
    out.set_op->kind = out.set_op->kind == SetOpKind::Union ? SetOpKind::UnionAll : SetOpKind::Union;
  } else if (i % 3 == 2 && out.where) {
    out.where.reset();
  } else {
    out.distinct = !out.distinct;
  }
  return out;
}

void criterion5() {
  GeneratorConfig cfg;
  Rng rng(5);
  std::size_t pairs = 0;
  std::size_t found = 0;
  std::size_t reproduced = 0;
  while (pairs < 1000) {
    const GeneratedDatabase data = generate_database(cfg, rng);
    const Schema schema = data.db.schema();
    for (int i = 0; i < 50 && pairs < 1000; ++i, ++pairs) {
      const SqlQuery l = generate_seed(cfg, schema, rng);
      const SqlQuery r = break_equivalence(l, pairs);
      FilterBudget budget;
      budget.seed = pairs;
      const Verdict v = check_bounded(l, r, schema, budget);
      if (const auto* ne = std::get_if<NotEquivalent>(&v)) {
        ++found;
        reproduced += !(run_on(ne->witness, l) == run_on(ne->witness, r));
      }
    }
  }
  std::ostringstream msg;
  msg << pairs << " non-equivalent pairs, " << found << " NotEquivalent verdicts, " << reproduced
      << " witnesses reproduce (need 100%)";
  verdict(5, found > 0 && reproduced == found, msg.str());
}

void criterion6(const fs::path& scratch) {
  auto once = [&](const std::string& name) {
    const auto res = run_campaign(config(6), 3, builtin("sum-skips-duplicates"));
    const fs::path dir = scratch / name;
    write_outputs(res, dir);
    return std::make_pair(res.reports.size(), snapshot(dir));
  };
  const auto a = once("det-a");
  const auto b = once("det-b");
  std::ostringstream msg;
  msg << "two runs, " << a.first << " reports, " << a.second.size() << " files; "
      << (a.second == b.second ? "byte-identical" : "different")
      << " excluding timestamp and elapsedMs (need identical, >= 1 report)";
  verdict(6, a.first > 0 && a.second == b.second, msg.str());
}

void criterion7() {
  GeneratorConfig cfg;
  Rng rng(7);
  std::size_t n = 0;
  std::size_t fixpoint_fail = 0;
  std::size_t remap_fail = 0;
  std::string first;
  while (n < 10000) {
    const GeneratedDatabase data = generate_database(cfg, rng);
    const Schema schema = data.db.schema();
    for (int i = 0; i < 100; ++i, ++n) {
      const SqlQuery q = generate_seed(cfg, schema, rng);
      const std::string text = render(q);
      try {
        const SqlQuery back = parse(text);
        if (!(back == q) || render(back) != text) {
          ++fixpoint_fail;
          if (first.empty()) first = text;
        }
      } catch (const std::exception&) {
        ++fixpoint_fail;
        if (first.empty()) first = text;
      }
      bool member = false;
      try {
        for (const auto& r : remap_to_sql(lower(q, schema))) member |= render(r) == text;
      } catch (const std::exception&) {
      }
      if (!member) {
        ++remap_fail;
        if (first.empty()) first = text;
      }
    }
  }
  std::ostringstream msg;
  msg << n << " queries, " << fixpoint_fail << " parse/render fixpoint failures, " << remap_fail
      << " remap(lower(q)) membership failures (need 0)";
  if (!first.empty()) msg << "; e.g. " << first;
  verdict(7, fixpoint_fail == 0 && remap_fail == 0, msg.str());
}

void criterion8(const IterationStats& total) {
  const double rate = total.generated ? static_cast<double>(total.validAfterExecution) / total.generated : 0;
  std::ostringstream msg;
  msg << total.validAfterExecution << "/" << total.generated << " seeds executed without error, rate " << rate
      << " (need >= 0.5)";
  verdict(8, rate >= 0.5, msg.str());
}

}  // namespace

int main() {
  const fs::path scratch = fs::temp_directory_path() / "eqmorph_acceptance";
  fs::remove_all(scratch);
  fs::create_directories(scratch);
  try {
    const IterationStats total = criterion1();
    criterion2(scratch);
    criterion3();
    criterion4();
    criterion5();
    criterion6(scratch);
    criterion7();
    criterion8(total);
  } catch (const std::exception& e) {
    std::printf("acceptance aborted: %s\n", e.what());
    ++failures;
  }
  fs::remove_all(scratch);
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
