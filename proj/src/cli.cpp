#include "eqmorph/cli.hpp"

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "eqmorph/harness.hpp"
#include "eqmorph/sql.hpp"

namespace eqmorph {

namespace {

struct Options {
  std::string target = "builtin";
  std::size_t iterations = 1;
  std::size_t queries = 2000;
  std::uint64_t seed = 0;
  std::string rules;
  std::size_t filterBudget = FilterBudget{}.total();
  std::string compare = "both";
  std::string out = "eqmorph-out";
  std::string errorList;
  std::size_t workers = 1;
  std::size_t count = 10;
  std::string grammarWeights;
};

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

void add_common(CLI::App& cmd, Options& o, std::string& config) {
  cmd.add_option("--config", config, "flat key=value file; flags given on the command line win");
  cmd.add_option("--seed", o.seed, "campaign random seed")->capture_default_str();
  cmd.add_option("--queries", o.queries, "seed queries per iteration")->capture_default_str();
}

HarnessConfig harness_config(const Options& o) {
  HarnessConfig cfg;
  cfg.gen.rngSeed = o.seed;
  cfg.gen.queriesPerIteration = o.queries;
  if (!o.grammarWeights.empty()) cfg.gen.productionWeights = parse_weights(o.grammarWeights, cfg.gen.productionWeights);
  if (!o.rules.empty()) cfg.rules = select_rules(default_catalog(), split_list(o.rules));
  cfg.filter.tiny = std::min(o.filterBudget, FilterBudget{}.tiny);
  cfg.filter.random = o.filterBudget - cfg.filter.tiny;
  cfg.compare = compare_mode_from_string(o.compare);
  if (!o.errorList.empty()) cfg.errors = ErrorFilterList::load(o.errorList);
  return cfg;
}

int cmd_run(const Options& o) {
  const HarnessConfig cfg = harness_config(o);
  cfg.gen.validate();
  // Probe the endpoint spec before spawning workers so typos fail fast.
  make_executor(o.target);
  const auto factory = [&] { return make_executor(o.target); };
  const CampaignResult result = run_campaign(cfg, o.iterations, factory, o.workers);
  write_outputs(result, o.out);

  std::uint64_t generated = 0;
  std::uint64_t valid = 0;
  std::uint64_t executed = 0;
  for (const auto& s : result.stats) {
    generated += s.generated;
    valid += s.validAfterExecution;
    executed += s.pairsExecuted;
  }
  std::cout << "target " << o.target << ": " << result.stats.size() << " iterations, " << generated << " seeds, "
            << valid << " valid, " << executed << " pairs executed, " << result.reports.size() << " bug reports\n";
  for (const auto& r : result.reports) {
    std::cout << "  " << r.id << " [" << r.mismatchKind << "] " << r.ruleName << "\n";
  }
  std::cout << "output in " << o.out << "\n";
  if (result.error) {
    std::cerr << "eqmorph: " << *result.error << "\n";
    return kExitError;
  }
  return result.reports.empty() ? kExitOk : kExitBugs;
}

int cmd_replay(const std::string& path, const std::string& target_flag) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    std::cerr << "eqmorph: cannot read " << path << "\n";
    return kExitError;
  }
  std::stringstream buf;
  buf << in.rdbuf();
  const BugReport report = report_from_json(buf.str());
  const std::string target = target_flag.empty() ? report.targetId : target_flag;
  auto exec = make_executor(target);
  exec->start();
  const auto mismatch = replay(report, *exec);
  exec->stop();
  if (!mismatch) {
    std::cout << report.id << ": no mismatch on " << target << "\n";
    return kExitOk;
  }
  std::cout << report.id << ": reproduces on " << target << " [" << mismatch->kind << "] " << mismatch->detail << "\n";
  return kExitBugs;
}

int cmd_gen(const Options& o, bool to_dir) {
  HarnessConfig cfg = harness_config(o);
  cfg.gen.validate();
  const Rng stream(mix_seed(cfg.gen.rngSeed, 0));
  Rng db_rng = stream.fork(1);
  Rng query_rng = stream.fork(2);
  std::string script;
  std::string queries;
  if (o.count > 0) {
    const GeneratedDatabase data = generate_database(cfg.gen, db_rng);
    const Schema schema = data.db.schema();
    script = data.script;
    for (std::size_t i = 0; i < o.count; ++i) queries += render(generate_seed(cfg.gen, schema, query_rng)) + ";\n";
  }
  if (to_dir) {
    std::filesystem::create_directories(o.out);
    std::ofstream(std::filesystem::path(o.out) / "database.sql", std::ios::binary) << script;
    std::ofstream(std::filesystem::path(o.out) / "seeds.sql", std::ios::binary) << queries;
    std::cout << o.count << " seeds written to " << o.out << "\n";
  } else {
    std::cout << script << queries;
  }
  return kExitOk;
}

/// Fills options not given on the command line from a flat key=value file.
/// Keys are the long flag names without dashes; keys that only `other`
/// understands are skipped, so run and gen can share one file.
void apply_config(CLI::App& cmd, const std::string& path, CLI::App* other) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read config " + path);
  std::string line;
  for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      if (b == std::string::npos) return std::string();
      return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
    };
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected key=value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    CLI::Option* opt = key == "config" ? nullptr : cmd.get_option_no_throw("--" + key);
    if (opt == nullptr && key != "config" && other->get_option_no_throw("--" + key) != nullptr) continue;
    if (opt == nullptr) throw std::runtime_error(path + ":" + std::to_string(lineno) + ": unknown key '" + key + "'");
    if (opt->count() > 0) continue;
    opt->add_result(value);
    opt->run_callback();
  }
}

}  // namespace

int cli_main(int argc, char** argv) {
  CLI::App app{"eqmorph: metamorphic SQL testing guided by duplicate sensitivity"};
  app.require_subcommand(1);
  Options o;
  std::string config;

  auto* run = app.add_subcommand("run", "run a testing campaign");
  add_common(*run, o, config);
  run->add_option("--target", o.target, "builtin, builtin:FAULT or extern:COMMAND")->capture_default_str();
  run->add_option("--iterations", o.iterations, "iterations (one fresh database each)")->capture_default_str();
  run->add_option("--rules", o.rules, "comma-separated rule names to enable (default: all)");
  run->add_option("--filter-budget", o.filterBudget, "databases the equivalence filter may try per pair")
      ->capture_default_str();
  run->add_option("--compare", o.compare, "canonical, raw-text or both")
      ->check(CLI::IsMember({"canonical", "raw-text", "both"}))
      ->capture_default_str();
  run->add_option("--out", o.out, "output directory")->capture_default_str();
  run->add_option("--error-list", o.errorList, "file of error codes to discard silently");
  run->add_option("--workers", o.workers, "parallel iterations")->capture_default_str();
  run->add_option("--grammar-weights", o.grammarWeights, "production weights, e.g. prod4=1,others=0");

  auto* rep = app.add_subcommand("replay", "re-run a bug report");
  std::string report_path;
  std::string replay_target;
  rep->add_option("report", report_path, "report JSON file")->required();
  rep->add_option("--target", replay_target, "target (default: the one in the report)");

  auto* gen = app.add_subcommand("gen", "print a database script and seed queries without running them");
  add_common(*gen, o, config);
  gen->add_option("--count", o.count, "number of seed queries")->capture_default_str();
  gen->add_option("--grammar-weights", o.grammarWeights, "production weights, e.g. prod4=1,others=0");
  auto* gen_out = gen->add_option("--out", o.out, "write database.sql and seeds.sql here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitError;
  }

  try {
    if (!config.empty()) {
      if (*run) apply_config(*run, config, gen);
      if (*gen) apply_config(*gen, config, run);
    }
    if (*run) return cmd_run(o);
    if (*rep) return cmd_replay(report_path, replay_target);
    if (*gen) return cmd_gen(o, gen_out->count() > 0);
  } catch (const std::exception& e) {
    std::cerr << "eqmorph: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}

}  // namespace eqmorph
