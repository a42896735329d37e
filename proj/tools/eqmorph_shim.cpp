// Line-protocol bridge around the built-in engine, for exercising the
// external adapter end to end. A shim for a real server has the same shape.
#include <CLI11.hpp>
#include <iostream>
#include <json.hpp>
#include <string>

#include "eqmorph/adapter.hpp"

int main(int argc, char** argv) {
  CLI::App app{"eqmorph_shim: newline-delimited JSON front end for the built-in engine"};
  std::string fault;
  bool fail_all = false;
  app.add_option("--fault", fault, "planted fault to run with");
  app.add_flag("--fail-all", fail_all, "answer every request with an error");
  CLI11_PARSE(app, argc, argv);

  std::optional<eqmorph::BuiltinExecutor> exec;
  try {
    exec.emplace(fault.empty() ? std::nullopt : std::optional<std::string>(fault));
  } catch (const std::exception& e) {
    std::cerr << "eqmorph_shim: " << e.what() << "\n";
    return 1;
  }

  std::string line;
  while (std::getline(std::cin, line)) {
    if (line.empty()) continue;
    nlohmann::json req;
    try {
      req = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      std::cerr << "eqmorph_shim: bad request: " << e.what() << "\n";
      return 1;
    }
    const auto id = req.value("id", std::uint64_t{0});
    const auto op = req.value("op", std::string());
    const auto sql = req.value("sql", std::string());
    eqmorph::ExecResult result;
    if (fail_all) {
      result = eqmorph::EngineError{"SHIM_FAILURE", "configured to fail"};
    } else if (op == "reset") {
      if (auto err = exec->reset_schema(sql)) {
        result = *err;
      } else {
        result = eqmorph::Rows{};
      }
    } else if (op == "exec") {
      result = exec->exec_sql(sql);
    } else {
      result = eqmorph::EngineError{"BAD_OP", "unknown op '" + op + "'"};
    }
    std::cout << eqmorph::encode_response(id, result) << "\n" << std::flush;
  }
  return 0;
}
