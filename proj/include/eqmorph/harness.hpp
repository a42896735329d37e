#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "eqmorph/adapter.hpp"
#include "eqmorph/equiv_filter.hpp"
#include "eqmorph/generator.hpp"
#include "eqmorph/transform.hpp"

namespace eqmorph {

enum class CompareMode { Canonical, RawText, Both };

std::string_view to_string(CompareMode m);
/// "canonical", "raw-text" or "both". Throws std::invalid_argument.
CompareMode compare_mode_from_string(std::string_view s);

/// Error codes whose queries are dropped silently.
class ErrorFilterList {
 public:
  ErrorFilterList() = default;
  explicit ErrorFilterList(std::set<std::string> codes) : codes_(std::move(codes)) {}

  /// Name-resolution and typing errors: the generator's expected noise.
  static ErrorFilterList defaults();
  /// One code per line; blank lines and '#' comments ignored. Throws
  /// std::runtime_error if the file cannot be read.
  static ErrorFilterList load(const std::filesystem::path& path);

  bool contains(const std::string& code) const { return codes_.count(code) > 0; }
  const std::set<std::string>& codes() const noexcept { return codes_; }

 private:
  std::set<std::string> codes_;
};

enum class ErrorAction { Discard, KeepForTriage };

ErrorAction filter_error(const EngineError& err, const ErrorFilterList& list);

class ArityMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct Mismatch {
  std::string kind;  // "value", "representation" or "error"
  std::string detail;
};

/// Order-insensitive multiset comparison; column names are not compared.
/// Canonical mode rounds numbers to 10 fractional digits and trims trailing
/// zeros first; raw-text compares the printed strings. Both reports a value
/// mismatch if canonical differs, else a representation mismatch if the text
/// differs. Returns nullopt on a match. Throws ArityMismatch.
std::optional<Mismatch> compare_results(const Rows& a, const Rows& b, CompareMode mode);

/// Canonical text of one printed value given its type tag (may be empty).
std::optional<std::string> canonical_value(const std::optional<std::string>& text, std::string_view type);

struct BugReport {
  std::string id;
  std::string schemaDdl;
  std::vector<std::string> inserts;
  std::string leftSql;
  std::string rightSql;
  ExecResult leftResult;
  ExecResult rightResult;
  std::string ruleName;
  std::uint64_t rngSeed = 0;
  std::uint64_t iteration = 0;
  std::size_t filterBudgetUsed = 0;
  std::string targetId;
  std::string timestamp;
  std::string mismatchKind;
  std::string compareMode;
  std::string detail;
};

/// Pretty JSON, fields in declaration order; results as sorted
/// [tuple, multiplicity] arrays, or {"error": {...}}.
std::string report_to_json(const BugReport& r);
/// Throws std::invalid_argument on malformed input.
BugReport report_from_json(std::string_view text);
/// DDL, inserts, then both queries with comment headers.
std::string reproducer_sql(const BugReport& r);

struct TriageEntry {
  std::uint64_t iteration = 0;
  std::string sql;
  std::string code;
  std::string message;
};

struct IterationStats {
  std::uint64_t iteration = 0;
  std::uint64_t generated = 0;
  std::uint64_t parsedOk = 0;
  std::uint64_t validAfterExecution = 0;
  std::uint64_t pairsEmitted = 0;
  std::uint64_t pairsFiltered = 0;
  std::uint64_t pairsExecuted = 0;
  std::uint64_t mismatches = 0;
  double elapsedMs = 0;
};

std::string stats_to_json(const IterationStats& s);

struct HarnessConfig {
  GeneratorConfig gen;
  Catalog rules = default_catalog();
  FilterBudget filter;
  CompareMode compare = CompareMode::Both;
  ErrorFilterList errors = ErrorFilterList::defaults();
  RuleOrder order = RuleOrder::Shuffled;
};

struct TestDbOutput {
  std::vector<BugReport> reports;
  std::vector<TriageEntry> triage;
  IterationStats stats;
};

/// The per-seed loop over an already loaded target: run the seed, transform,
/// filter, run both sides, compare. Throws TargetUnavailable.
TestDbOutput test_db(const std::vector<SqlQuery>& seeds, Executor& target, const GeneratedDatabase& data,
                     const HarnessConfig& cfg, Rng& rng, std::uint64_t iteration = 0);

/// Fresh database and cfg.gen.queriesPerIteration seeds on the iteration's
/// own random stream, then test_db.
TestDbOutput run_iteration(const HarnessConfig& cfg, Executor& target, std::uint64_t iteration);

struct CampaignResult {
  std::vector<IterationStats> stats;
  std::vector<BugReport> reports;
  std::vector<TriageEntry> triage;
  std::optional<std::string> error;  // set when a target became unavailable
};

using ExecutorFactory = std::function<std::unique_ptr<Executor>()>;

/// Runs iterations [0, iterations) on `workers` threads, each with its own
/// target; results are ordered by iteration whatever the worker count.
CampaignResult run_campaign(const HarnessConfig& cfg, std::size_t iterations, const ExecutorFactory& make_target,
                            std::size_t workers = 1);

/// reports/<id>.json and .sql, stats.jsonl, triage.jsonl under `dir`.
void write_outputs(const CampaignResult& result, const std::filesystem::path& dir);

/// Re-runs a report on `target`; the mismatch (if still present) is returned.
std::optional<Mismatch> replay(const BugReport& report, Executor& target);

}  // namespace eqmorph
