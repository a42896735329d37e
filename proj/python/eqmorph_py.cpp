#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "eqmorph/errors.hpp"
#include "eqmorph/harness.hpp"
#include "eqmorph/sensitivity.hpp"
#include "eqmorph/sql.hpp"

namespace py = pybind11;
using namespace eqmorph;

namespace {

py::object value_to_py(const Value& v) {
  const auto text = render_value(v);
  if (!text) return py::none();
  return py::str(*text);
}

py::dict relation_to_py(const Relation& r) {
  py::list rows;
  for (const auto& row : r.rows()) {
    py::list t;
    for (const auto& v : row.tuple) t.append(value_to_py(v));
    rows.append(py::make_tuple(py::tuple(t), row.count));
  }
  py::dict out;
  out["columns"] = r.columns();
  out["rows"] = rows;
  return out;
}

py::object exec_to_py(const ExecResult& r) {
  py::dict out;
  if (const auto* e = std::get_if<EngineError>(&r)) {
    out["error"] = e->code;
    out["message"] = e->message;
    return std::move(out);
  }
  const auto& rows = std::get<Rows>(r);
  out["types"] = rows.types;
  out["rows"] = rows.rows;
  return std::move(out);
}

HarnessConfig make_config(std::uint64_t seed, std::size_t queries, const std::vector<std::string>& rules,
                          const std::string& compare) {
  HarnessConfig cfg;
  cfg.gen.rngSeed = seed;
  cfg.gen.queriesPerIteration = queries;
  if (!rules.empty()) cfg.rules = select_rules(default_catalog(), rules);
  cfg.compare = compare_mode_from_string(compare);
  return cfg;
}

}  // namespace

PYBIND11_MODULE(_eqmorph, m) {
  m.doc() = "Metamorphic SQL testing guided by duplicate sensitivity";

  py::register_exception<SyntaxError>(m, "SqlSyntaxError", PyExc_ValueError);
  py::register_exception<ExecError>(m, "ExecError", PyExc_RuntimeError);
  py::register_exception<TargetUnavailable>(m, "TargetUnavailable", PyExc_RuntimeError);

  m.def("canonical_sql", [](const std::string& sql) { return render(parse(sql)); },
        "Parse and re-render a query in canonical form.");

  m.def("rules", [] { return rule_names(default_catalog()); });
  m.def("faults", [] {
    std::vector<std::string> out;
    for (const auto& f : fault_registry()) out.push_back(f.name);
    return out;
  });

  m.def(
      "execute",
      [](const std::string& script, const std::string& sql, std::optional<std::string> fault) {
        BuiltinExecutor exec(std::move(fault));
        if (auto err = exec.reset_schema(script)) throw std::invalid_argument(err->code + ": " + err->message);
        return exec_to_py(exec.exec_sql(sql));
      },
      py::arg("script"), py::arg("sql"), py::arg("fault") = py::none(),
      "Load a CREATE/INSERT script into the built-in engine and run one query. Returns {types, rows} or "
      "{error, message}.");

  m.def(
      "plan",
      [](const std::string& script, const std::string& sql) {
        const Database db = load_script(script);
        return dump(lower(parse(sql), db.schema()));
      },
      py::arg("script"), py::arg("sql"), "Algebra tree of a query, one node per line.");

  m.def(
      "sensitivity",
      [](const std::string& script, const std::string& sql, bool oracle) {
        const Database db = load_script(script);
        const AlgebraExpr e = lower(parse(sql), db.schema());
        py::dict out;
        out["static"] = std::string(to_string(query_sensitivity(e)));
        if (oracle) {
          const OracleResult r = sensitivity_oracle(e);
          if (const auto* w = std::get_if<WitnessFound>(&r)) {
            py::dict wd;
            wd["table"] = w->table;
            wd["script"] = dump_script(w->database);
            wd["before"] = relation_to_py(w->before);
            wd["after"] = relation_to_py(w->after);
            out["witness"] = wd;
          } else {
            out["witness"] = py::none();
          }
        }
        return out;
      },
      py::arg("script"), py::arg("sql"), py::arg("oracle") = false,
      "Static duplicate sensitivity, optionally with a bounded search for a witness database.");

  m.def(
      "transform",
      [](const std::string& script, const std::string& sql, std::uint64_t seed,
         const std::vector<std::string>& rules) -> py::object {
        const Database db = load_script(script);
        const Schema schema = db.schema();
        Rng rng(seed);
        const RuleContext ctx{&schema, &db, &rng};
        const Catalog catalog = rules.empty() ? default_catalog() : select_rules(default_catalog(), rules);
        const auto pair = transform_query(parse(sql), catalog, ctx, RuleOrder::Shuffled);
        if (!pair) return py::none();
        py::dict out;
        out["left"] = render(pair->left);
        out["right"] = render(pair->right);
        out["rule"] = pair->ruleName;
        return std::move(out);
      },
      py::arg("script"), py::arg("sql"), py::arg("seed") = 0, py::arg("rules") = std::vector<std::string>{},
      "Rewrite a seed into an equivalent query pair, or None if no rule applies.");

  m.def(
      "check_equivalence",
      [](const std::string& script, const std::string& left, const std::string& right, std::uint64_t seed) {
        const Database db = load_script(script);
        FilterBudget budget;
        budget.seed = seed;
        const Verdict v = check_bounded(parse(left), parse(right), db.schema(), budget);
        py::dict out;
        if (const auto* ne = std::get_if<NotEquivalent>(&v)) {
          out["equivalent"] = false;
          out["witness"] = dump_script(ne->witness);
          out["detail"] = ne->detail;
        } else {
          out["equivalent"] = true;
          out["databases_checked"] = std::get<NoCounterexample>(v).databasesChecked;
        }
        return out;
      },
      py::arg("script"), py::arg("left"), py::arg("right"), py::arg("seed") = 0,
      "Bounded counterexample search; the script only supplies the schema.");

  m.def(
      "generate",
      [](std::uint64_t seed, std::size_t count) {
        GeneratorConfig cfg;
        cfg.rngSeed = seed;
        const Rng stream(mix_seed(seed, 0));
        Rng db_rng = stream.fork(1);
        Rng query_rng = stream.fork(2);
        const GeneratedDatabase data = generate_database(cfg, db_rng);
        const Schema schema = data.db.schema();
        std::vector<std::string> queries;
        for (std::size_t i = 0; i < count; ++i) queries.push_back(render(generate_seed(cfg, schema, query_rng)));
        return py::make_tuple(data.script, queries);
      },
      py::arg("seed") = 0, py::arg("count") = 10, "A database script and `count` seed queries.");

  m.def(
      "run_campaign",
      [](const std::string& target, std::size_t iterations, std::size_t queries, std::uint64_t seed,
         const std::vector<std::string>& rules, const std::string& compare, std::optional<std::string> out_dir) {
        const HarnessConfig cfg = make_config(seed, queries, rules, compare);
        make_executor(target);
        CampaignResult result;
        {
          py::gil_scoped_release release;
          result = run_campaign(cfg, iterations, [&] { return make_executor(target); });
        }
        if (out_dir) write_outputs(result, *out_dir);
        if (result.error) throw TargetUnavailable(*result.error);
        py::list stats;
        for (const auto& s : result.stats) stats.append(py::module_::import("json").attr("loads")(stats_to_json(s)));
        std::vector<std::string> reports;
        for (const auto& r : result.reports) reports.push_back(report_to_json(r));
        py::dict d;
        d["stats"] = stats;
        d["reports"] = reports;
        return d;
      },
      py::arg("target") = "builtin", py::arg("iterations") = 1, py::arg("queries") = 2000, py::arg("seed") = 0,
      py::arg("rules") = std::vector<std::string>{}, py::arg("compare") = "both", py::arg("out_dir") = py::none(),
      "Run a campaign. Returns {stats: [...], reports: [json text, ...]}.");

  m.def(
      "replay",
      [](const std::string& report_json, std::optional<std::string> target) -> py::object {
        const BugReport report = report_from_json(report_json);
        auto exec = make_executor(target ? *target : report.targetId);
        exec->start();
        const auto mismatch = replay(report, *exec);
        exec->stop();
        if (!mismatch) return py::none();
        py::dict d;
        d["kind"] = mismatch->kind;
        d["detail"] = mismatch->detail;
        return std::move(d);
      },
      py::arg("report_json"), py::arg("target") = py::none(),
      "Re-run a bug report; returns the mismatch or None if it no longer reproduces.");
}
