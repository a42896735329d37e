#include "eqmorph/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <json.hpp>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "eqmorph/errors.hpp"
#include "eqmorph/refdb.hpp"
#include "eqmorph/sql.hpp"

namespace eqmorph {

using ordered_json = nlohmann::ordered_json;

std::string_view to_string(CompareMode m) {
  switch (m) {
    case CompareMode::Canonical: return "canonical";
    case CompareMode::RawText: return "raw-text";
    case CompareMode::Both: return "both";
  }
  return "?";
}

CompareMode compare_mode_from_string(std::string_view s) {
  if (s == "canonical") return CompareMode::Canonical;
  if (s == "raw-text" || s == "raw") return CompareMode::RawText;
  if (s == "both") return CompareMode::Both;
  throw std::invalid_argument("unknown compare mode '" + std::string(s) + "'");
}

// ---- error filtering ----------------------------------------------------------------

ErrorFilterList ErrorFilterList::defaults() {
  return ErrorFilterList({std::string(codes::kUnknownTable), std::string(codes::kUnknownColumn),
                          std::string(codes::kAmbiguousColumn), std::string(codes::kNonGroupedColumn),
                          std::string(codes::kTypeMismatch), std::string(codes::kSyntaxError)});
}

ErrorFilterList ErrorFilterList::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read error list " + path.string());
  std::set<std::string> codes;
  std::string line;
  while (std::getline(in, line)) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos) continue;
    const auto e = line.find_last_not_of(" \t\r");
    codes.insert(line.substr(b, e - b + 1));
  }
  return ErrorFilterList(std::move(codes));
}

ErrorAction filter_error(const EngineError& err, const ErrorFilterList& list) {
  return list.contains(err.code) ? ErrorAction::Discard : ErrorAction::KeepForTriage;
}

// ---- comparison ---------------------------------------------------------------------

namespace {

constexpr std::size_t kCanonicalScale = 10;

bool string_type(std::string_view type) {
  std::string t(type);
  std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::toupper(c); });
  return t.find("CHAR") != std::string::npos || t.find("TEXT") != std::string::npos || t == "STR" ||
         t == "STRING";
}

/// Rounds a plain decimal literal to kCanonicalScale digits, half away from zero.
std::optional<std::string> round_text(const std::string& s) {
  std::size_t i = 0;
  const bool neg = !s.empty() && (s[0] == '-' || s[0] == '+');
  const bool minus = neg && s[0] == '-';
  if (neg) i = 1;
  std::string int_part;
  std::string frac;
  while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) int_part.push_back(s[i++]);
  if (i < s.size() && s[i] == '.') {
    ++i;
    while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) frac.push_back(s[i++]);
  }
  if (i != s.size() || (int_part.empty() && frac.empty())) return std::nullopt;
  if (int_part.empty()) int_part = "0";
  bool carry = false;
  if (frac.size() > kCanonicalScale) {
    carry = frac[kCanonicalScale] >= '5';
    frac.resize(kCanonicalScale);
  }
  std::string digits = int_part + frac;
  for (std::size_t k = digits.size(); carry && k > 0; --k) {
    if (digits[k - 1] == '9') {
      digits[k - 1] = '0';
    } else {
      ++digits[k - 1];
      carry = false;
    }
  }
  if (carry) digits.insert(digits.begin(), '1');
  std::string ip = digits.substr(0, digits.size() - frac.size());
  std::string fp = digits.substr(digits.size() - frac.size());
  while (!fp.empty() && fp.back() == '0') fp.pop_back();
  const auto nz = ip.find_first_not_of('0');
  ip = nz == std::string::npos ? "0" : ip.substr(nz);
  std::string out = fp.empty() ? ip : ip + "." + fp;
  if (minus && out != "0") out = "-" + out;
  return out;
}

using Bag = std::map<std::vector<std::optional<std::string>>, std::uint64_t>;

Bag bag_of(const Rows& r, bool canonical) {
  Bag out;
  for (const auto& row : r.rows) {
    std::vector<std::optional<std::string>> key;
    key.reserve(row.size());
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (canonical) {
        key.push_back(canonical_value(row[i], i < r.types.size() ? r.types[i] : std::string_view{}));
      } else {
        key.push_back(row[i]);
      }
    }
    ++out[std::move(key)];
  }
  return out;
}

std::string tuple_text(const std::vector<std::optional<std::string>>& t) {
  std::string out = "(";
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (i) out += ", ";
    out += t[i] ? "'" + *t[i] + "'" : "NULL";
  }
  return out + ")";
}

std::string bag_diff(const Bag& a, const Bag& b) {
  std::string left;
  std::string right;
  for (const auto& [t, n] : a) {
    const auto it = b.find(t);
    const std::uint64_t m = it == b.end() ? 0 : it->second;
    if (n > m) left += (left.empty() ? "" : ", ") + tuple_text(t) + "x" + std::to_string(n - m);
  }
  for (const auto& [t, n] : b) {
    const auto it = a.find(t);
    const std::uint64_t m = it == a.end() ? 0 : it->second;
    if (n > m) right += (right.empty() ? "" : ", ") + tuple_text(t) + "x" + std::to_string(n - m);
  }
  std::string out;
  if (!left.empty()) out += "left has extra " + left;
  if (!right.empty()) out += std::string(out.empty() ? "" : "; ") + "right has extra " + right;
  return out;
}

std::size_t width(const Rows& r) {
  if (!r.rows.empty()) return r.rows.front().size();
  return r.types.size();
}

}  // namespace

std::optional<std::string> canonical_value(const std::optional<std::string>& text, std::string_view type) {
  if (!text) return std::nullopt;
  if (string_type(type)) return text;
  if (auto r = round_text(*text)) return r;
  return text;
}

std::optional<Mismatch> compare_results(const Rows& a, const Rows& b, CompareMode mode) {
  const bool known = (!a.rows.empty() || !a.types.empty()) && (!b.rows.empty() || !b.types.empty());
  if (known && width(a) != width(b)) {
    throw ArityMismatch("result arity " + std::to_string(width(a)) + " vs " + std::to_string(width(b)));
  }
  if (mode != CompareMode::RawText) {
    const Bag x = bag_of(a, true);
    const Bag y = bag_of(b, true);
    if (x != y) return Mismatch{"value", bag_diff(x, y)};
  }
  if (mode != CompareMode::Canonical) {
    const Bag x = bag_of(a, false);
    const Bag y = bag_of(b, false);
    if (x != y) return Mismatch{mode == CompareMode::RawText ? "value" : "representation", bag_diff(x, y)};
  }
  return std::nullopt;
}

// ---- reports ------------------------------------------------------------------------

namespace {

ordered_json result_json(const ExecResult& r) {
  if (const auto* e = std::get_if<EngineError>(&r)) {
    return ordered_json{{"error", ordered_json{{"code", e->code}, {"message", e->message}}}};
  }
  const Bag bag = bag_of(std::get<Rows>(r), false);
  ordered_json out = ordered_json::array();
  for (const auto& [t, n] : bag) {
    ordered_json tuple = ordered_json::array();
    for (const auto& v : t) {
      if (v) {
        tuple.push_back(*v);
      } else {
        tuple.push_back(nullptr);
      }
    }
    out.push_back(ordered_json::array({tuple, n}));
  }
  return out;
}

ExecResult result_from_json(const ordered_json& j, const ordered_json& types) {
  if (j.is_object()) {
    const auto& e = j.at("error");
    return EngineError{e.at("code").get<std::string>(), e.value("message", std::string())};
  }
  Rows rows;
  if (types.is_array()) rows.types = types.get<std::vector<std::string>>();
  for (const auto& entry : j) {
    std::vector<std::optional<std::string>> t;
    for (const auto& v : entry.at(0)) {
      if (v.is_null()) {
        t.emplace_back(std::nullopt);
      } else {
        t.emplace_back(v.get<std::string>());
      }
    }
    const auto n = entry.at(1).get<std::uint64_t>();
    for (std::uint64_t k = 0; k < n; ++k) rows.rows.push_back(t);
  }
  return rows;
}

ordered_json types_json(const ExecResult& r) {
  if (const auto* rows = std::get_if<Rows>(&r)) return rows->types;
  return nullptr;
}

std::string now_utc() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

std::string report_to_json(const BugReport& r) {
  ordered_json j;
  j["id"] = r.id;
  j["schemaDdl"] = r.schemaDdl;
  j["inserts"] = r.inserts;
  j["leftSql"] = r.leftSql;
  j["rightSql"] = r.rightSql;
  j["leftResult"] = result_json(r.leftResult);
  j["rightResult"] = result_json(r.rightResult);
  j["leftTypes"] = types_json(r.leftResult);
  j["rightTypes"] = types_json(r.rightResult);
  j["ruleName"] = r.ruleName;
  j["rngSeed"] = r.rngSeed;
  j["iteration"] = r.iteration;
  j["filterBudgetUsed"] = r.filterBudgetUsed;
  j["targetId"] = r.targetId;
  j["timestamp"] = r.timestamp;
  j["mismatchKind"] = r.mismatchKind;
  j["compareMode"] = r.compareMode;
  j["detail"] = r.detail;
  return j.dump(2) + "\n";
}

BugReport report_from_json(std::string_view text) {
  try {
    const ordered_json j = ordered_json::parse(text);
    BugReport r;
    r.id = j.at("id").get<std::string>();
    r.schemaDdl = j.at("schemaDdl").get<std::string>();
    r.inserts = j.at("inserts").get<std::vector<std::string>>();
    r.leftSql = j.at("leftSql").get<std::string>();
    r.rightSql = j.at("rightSql").get<std::string>();
    r.leftResult = result_from_json(j.at("leftResult"), j.value("leftTypes", ordered_json()));
    r.rightResult = result_from_json(j.at("rightResult"), j.value("rightTypes", ordered_json()));
    r.ruleName = j.value("ruleName", std::string());
    r.rngSeed = j.value("rngSeed", std::uint64_t{0});
    r.iteration = j.value("iteration", std::uint64_t{0});
    r.filterBudgetUsed = j.value("filterBudgetUsed", std::size_t{0});
    r.targetId = j.value("targetId", std::string());
    r.timestamp = j.value("timestamp", std::string());
    r.mismatchKind = j.value("mismatchKind", std::string());
    r.compareMode = j.value("compareMode", std::string("both"));
    r.detail = j.value("detail", std::string());
    return r;
  } catch (const ordered_json::exception& e) {
    throw std::invalid_argument(std::string("malformed bug report: ") + e.what());
  }
}

std::string reproducer_sql(const BugReport& r) {
  std::string out = "-- eqmorph reproducer " + r.id + "\n";
  out += "-- rule: " + r.ruleName + "; target: " + r.targetId + "; mismatch: " + r.mismatchKind + "\n";
  out += r.schemaDdl;
  for (const auto& i : r.inserts) out += i + "\n";
  out += "-- left query\n" + r.leftSql + ";\n";
  out += "-- right query (expected to return the same rows)\n" + r.rightSql + ";\n";
  return out;
}

std::string stats_to_json(const IterationStats& s) {
  ordered_json j;
  j["iteration"] = s.iteration;
  j["generated"] = s.generated;
  j["parsedOk"] = s.parsedOk;
  j["validAfterExecution"] = s.validAfterExecution;
  j["pairsEmitted"] = s.pairsEmitted;
  j["pairsFiltered"] = s.pairsFiltered;
  j["pairsExecuted"] = s.pairsExecuted;
  j["mismatches"] = s.mismatches;
  j["elapsedMs"] = s.elapsedMs;
  return j.dump();
}

// ---- main loop ----------------------------------------------------------------------

namespace {

std::string script_of(const BugReport& r) {
  std::string s = r.schemaDdl;
  for (const auto& i : r.inserts) s += i + "\n";
  return s;
}

/// Mismatch between two executions, including asymmetric errors.
std::optional<Mismatch> judge(const ExecResult& l, const ExecResult& r, CompareMode mode) {
  const auto* le = std::get_if<EngineError>(&l);
  const auto* re = std::get_if<EngineError>(&r);
  if (le && re) {
    if (le->code == re->code) return std::nullopt;
    return Mismatch{"error", "left failed with " + le->code + ", right with " + re->code};
  }
  if (le) return Mismatch{"error", "only left failed: " + le->code + ": " + le->message};
  if (re) return Mismatch{"error", "only right failed: " + re->code + ": " + re->message};
  try {
    return compare_results(std::get<Rows>(l), std::get<Rows>(r), mode);
  } catch (const ArityMismatch& e) {
    return Mismatch{"value", e.what()};
  }
}

std::string report_id(std::uint64_t iteration, std::size_t index) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "i%04llu-q%04zu", static_cast<unsigned long long>(iteration), index);
  return buf;
}

}  // namespace

TestDbOutput test_db(const std::vector<SqlQuery>& seeds, Executor& target, const GeneratedDatabase& data,
                     const HarnessConfig& cfg, Rng& rng, std::uint64_t iteration) {
  const auto started = std::chrono::steady_clock::now();
  TestDbOutput out;
  out.stats.iteration = iteration;
  out.stats.generated = out.stats.parsedOk = seeds.size();
  const Schema schema = data.db.schema();
  const RuleContext ctx{&schema, &data.db, &rng};

  for (std::size_t i = 0; i < seeds.size(); ++i) {
    const SqlQuery& seed = seeds[i];
    const std::string seed_sql = render(seed);
    const ExecResult seed_result = target.exec_sql(seed_sql);
    if (const auto* err = std::get_if<EngineError>(&seed_result)) {
      if (filter_error(*err, cfg.errors) == ErrorAction::KeepForTriage) {
        out.triage.push_back(TriageEntry{iteration, seed_sql, err->code, err->message});
      }
      continue;
    }
    ++out.stats.validAfterExecution;
    if (!validate(seed, schema).empty()) continue;  // the target accepted something outside the subset

    const auto pair = transform_query(seed, cfg.rules, ctx, cfg.order);
    if (!pair) continue;
    ++out.stats.pairsEmitted;

    FilterBudget budget = cfg.filter;
    budget.seed = mix_seed(cfg.gen.rngSeed ^ cfg.filter.seed, (iteration << 24) + i);
    const Verdict verdict = check_bounded(pair->left, pair->right, schema, budget);
    if (std::holds_alternative<NotEquivalent>(verdict)) {
      ++out.stats.pairsFiltered;
      continue;
    }
    ++out.stats.pairsExecuted;

    const std::string left_sql = render(pair->left);
    const std::string right_sql = render(pair->right);
    ExecResult l = target.exec_sql(left_sql);
    ExecResult r = target.exec_sql(right_sql);
    const auto mismatch = judge(l, r, cfg.compare);
    if (!mismatch) continue;

    BugReport rep;
    rep.id = report_id(iteration, i);
    rep.schemaDdl = schema_ddl(data.db);
    rep.inserts = insert_statements(data.db);
    rep.leftSql = left_sql;
    rep.rightSql = right_sql;
    rep.leftResult = std::move(l);
    rep.rightResult = std::move(r);
    rep.ruleName = pair->ruleName;
    rep.rngSeed = cfg.gen.rngSeed;
    rep.iteration = iteration;
    rep.filterBudgetUsed = std::get<NoCounterexample>(verdict).databasesChecked;
    rep.targetId = target.id();
    rep.timestamp = now_utc();
    rep.mismatchKind = mismatch->kind;
    rep.compareMode = std::string(to_string(cfg.compare));
    rep.detail = mismatch->detail;
    out.reports.push_back(std::move(rep));
    ++out.stats.mismatches;
  }
  out.stats.elapsedMs =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
  return out;
}

TestDbOutput run_iteration(const HarnessConfig& cfg, Executor& target, std::uint64_t iteration) {
  const auto started = std::chrono::steady_clock::now();
  const Rng stream(mix_seed(cfg.gen.rngSeed, iteration));
  Rng db_rng = stream.fork(1);
  Rng query_rng = stream.fork(2);
  Rng rule_rng = stream.fork(3);

  const GeneratedDatabase data = generate_database(cfg.gen, db_rng);
  if (auto err = target.reset_schema(data.script)) {
    throw TargetUnavailable("reset failed on " + target.id() + ": " + err->code + ": " + err->message);
  }
  const Schema schema = data.db.schema();
  std::vector<SqlQuery> seeds;
  std::uint64_t parsed = 0;
  for (std::size_t q = 0; q < cfg.gen.queriesPerIteration; ++q) {
    SqlQuery s = generate_seed(cfg.gen, schema, query_rng);
    if (query_rng.chance(cfg.gen.invalidRate)) s = break_query(s, schema, query_rng);
    try {
      seeds.push_back(parse(render(s)));  // seeds travel as text, as they would to a real server
      ++parsed;
    } catch (const SyntaxError&) {
    }
  }
  TestDbOutput out = test_db(seeds, target, data, cfg, rule_rng, iteration);
  out.stats.generated = cfg.gen.queriesPerIteration;
  out.stats.parsedOk = parsed;
  out.stats.elapsedMs =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
  return out;
}

CampaignResult run_campaign(const HarnessConfig& cfg, std::size_t iterations, const ExecutorFactory& make_target,
                            std::size_t workers) {
  cfg.gen.validate();
  workers = std::max<std::size_t>(1, std::min(workers, std::max<std::size_t>(iterations, 1)));
  std::vector<std::optional<TestDbOutput>> slots(iterations);
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::mutex err_mu;
  std::optional<std::string> error;

  auto worker = [&] {
    std::unique_ptr<Executor> target;
    try {
      target = make_target();
      target->start();
      for (std::size_t i = next++; i < iterations && !failed; i = next++) {
        slots[i] = run_iteration(cfg, *target, i);
      }
    } catch (const std::exception& e) {
      failed = true;
      const std::lock_guard lock(err_mu);
      if (!error) error = e.what();
    }
    if (target) target->stop();
  };

  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  CampaignResult out;
  out.error = error;
  for (auto& s : slots) {
    if (!s) continue;
    out.stats.push_back(s->stats);
    std::move(s->reports.begin(), s->reports.end(), std::back_inserter(out.reports));
    std::move(s->triage.begin(), s->triage.end(), std::back_inserter(out.triage));
  }
  return out;
}

void write_outputs(const CampaignResult& result, const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir / "reports");
  for (const auto& r : result.reports) {
    std::ofstream(dir / "reports" / (r.id + ".json"), std::ios::binary) << report_to_json(r);
    std::ofstream(dir / "reports" / (r.id + ".sql"), std::ios::binary) << reproducer_sql(r);
  }
  std::ofstream stats(dir / "stats.jsonl", std::ios::binary);
  for (const auto& s : result.stats) stats << stats_to_json(s) << "\n";
  std::ofstream triage(dir / "triage.jsonl", std::ios::binary);
  for (const auto& t : result.triage) {
    ordered_json j;
    j["iteration"] = t.iteration;
    j["sql"] = t.sql;
    j["code"] = t.code;
    j["message"] = t.message;
    triage << j.dump() << "\n";
  }
}

std::optional<Mismatch> replay(const BugReport& report, Executor& target) {
  if (auto err = target.reset_schema(script_of(report))) {
    throw TargetUnavailable("reset failed: " + err->code + ": " + err->message);
  }
  const ExecResult l = target.exec_sql(report.leftSql);
  const ExecResult r = target.exec_sql(report.rightSql);
  return judge(l, r, compare_mode_from_string(report.compareMode));
}

}  // namespace eqmorph
