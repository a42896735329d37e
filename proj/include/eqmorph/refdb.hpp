#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "eqmorph/ast.hpp"
#include "eqmorph/relation.hpp"

namespace eqmorph {

/// Executor stage a planted fault corrupts.
enum class FaultStage { Where, Having, Aggregate, Distinct, SetOperation, Render };

std::string_view to_string(FaultStage stage);

struct FaultSpec {
  std::string name;
  FaultStage hook = FaultStage::Where;
  std::string description;
  std::map<std::string, std::string> parameters;
};

/// The shipped faults, in a fixed order.
const std::vector<FaultSpec>& fault_registry();
const FaultSpec* find_fault(std::string_view name);

class UnknownFault : public std::invalid_argument {
 public:
  explicit UnknownFault(const std::string& name) : std::invalid_argument("unknown fault: " + name) {}
};

/// Result rows as the executor prints them. NULL is std::nullopt.
struct RenderedResult {
  std::vector<std::string> columns;
  std::vector<std::string> types;  // "INT", "DECIMAL", "VARCHAR"
  std::vector<std::vector<std::optional<std::string>>> rows;
};

/// Reference multiset-semantics executor, optionally with one planted fault.
/// Stateless apart from the fault, so one instance can be shared by threads.
class Engine {
 public:
  Engine() = default;
  explicit Engine(FaultSpec fault) : fault_(std::move(fault)) {}

  const std::optional<FaultSpec>& fault() const noexcept { return fault_; }

  /// Throws ExecError for semantic errors (discovered at run time, like a
  /// real server) and runtime failures.
  Relation execute(const Database& db, const SqlQuery& q) const;
  /// Executes and renders rows (repeated by multiplicity) with type tags.
  RenderedResult execute_rendered(const Database& db, const SqlQuery& q) const;

 private:
  bool faulty(std::string_view name) const { return fault_ && fault_->name == name; }
  Relation run_block(const Database& db, const SqlQuery& block) const;

  std::optional<FaultSpec> fault_;
};

/// Engine with a registry fault installed. Throws UnknownFault.
Engine with_fault(std::string_view name);

/// Clean-engine shortcut.
Relation execute(const Database& db, const SqlQuery& q);

/// Canonical text for one value (NULL is nullopt).
std::optional<std::string> render_value(const Value& v);

class ScriptError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Runs CREATE TABLE / INSERT INTO ... VALUES / DROP TABLE [IF EXISTS]
/// statements against `db`. Throws ScriptError (or SyntaxError).
void apply_script(Database& db, std::string_view script);
Database load_script(std::string_view script);
/// DDL for every table ("CREATE TABLE ...;" lines).
std::string schema_ddl(const Database& db);
/// One "INSERT INTO ... VALUES (...);" line per row copy, canonical order.
std::vector<std::string> insert_statements(const Database& db);
/// schema_ddl followed by insert_statements; load_script(dump_script(db)) == db.
std::string dump_script(const Database& db);

/// {"tables": [{"name", "columns": [{"name", "type"}], "rows": [[...]]}]}.
/// Decimals may be given as JSON numbers or strings.
Database load_json_fixture(std::string_view text);
std::string to_json_fixture(const Database& db);

}  // namespace eqmorph
