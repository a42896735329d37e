#pragma once

#include <chrono>
#include <cstdint>
#include <fstream>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "eqmorph/refdb.hpp"

namespace eqmorph {

/// Rows as the engine printed them; NULL is std::nullopt.
struct Rows {
  std::vector<std::string> types;  // may be empty for engines that send none
  std::vector<std::vector<std::optional<std::string>>> rows;

  friend bool operator==(const Rows&, const Rows&) = default;
};

struct EngineError {
  std::string code;
  std::string message;

  friend bool operator==(const EngineError&, const EngineError&) = default;
};

using ExecResult = std::variant<Rows, EngineError>;

/// The target could not be started or stopped answering.
class TargetUnavailable : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class Timeout : public TargetUnavailable {
 public:
  using TargetUnavailable::TargetUnavailable;
};

class ProtocolError : public TargetUnavailable {
 public:
  using TargetUnavailable::TargetUnavailable;
};

/// One database engine under test. Not thread-safe: one request at a time.
class Executor {
 public:
  virtual ~Executor() = default;

  virtual void start() = 0;
  /// Idempotent.
  virtual void stop() = 0;
  /// Drops every table and runs the CREATE/INSERT script.
  virtual std::optional<EngineError> reset_schema(const std::string& script) = 0;
  virtual ExecResult exec_sql(const std::string& sql) = 0;
  virtual std::string id() const = 0;
};

/// In-process reference engine, optionally with a planted fault.
class BuiltinExecutor : public Executor {
 public:
  /// Throws UnknownFault for names outside the registry.
  explicit BuiltinExecutor(std::optional<std::string> fault = std::nullopt);

  void start() override {}
  void stop() override {}
  std::optional<EngineError> reset_schema(const std::string& script) override;
  ExecResult exec_sql(const std::string& sql) override;
  std::string id() const override;

  const Database& database() const noexcept { return db_; }

 private:
  Engine engine_;
  Database db_;
};

struct ExternalOptions {
  std::chrono::milliseconds startupTimeout{5000};
  std::chrono::milliseconds queryTimeout{10000};
};

/// Child process speaking newline-delimited JSON on stdin/stdout.
class ExternalExecutor : public Executor {
 public:
  explicit ExternalExecutor(std::string command, ExternalOptions opts = {});
  ~ExternalExecutor() override;

  ExternalExecutor(const ExternalExecutor&) = delete;
  ExternalExecutor& operator=(const ExternalExecutor&) = delete;

  /// Throws TargetUnavailable if the command cannot be run or does not
  /// answer the startup handshake (a reset with an empty script).
  void start() override;
  void stop() override;
  std::optional<EngineError> reset_schema(const std::string& script) override;
  ExecResult exec_sql(const std::string& sql) override;
  std::string id() const override { return "extern:" + command_; }

 private:
  ExecResult request(const std::string& op, const std::string& sql, std::chrono::milliseconds timeout);
  std::string read_line(std::chrono::milliseconds timeout);
  void log(const std::string& direction, const std::string& line);

  std::string command_;
  ExternalOptions opts_;
  int pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  std::string buffer_;
  std::uint64_t next_id_ = 1;
  std::unique_ptr<std::ofstream> debug_log_;
};

/// "builtin", "builtin:<fault>" or "extern:<command line>". Throws
/// std::invalid_argument (or UnknownFault) on a bad spec.
std::unique_ptr<Executor> make_executor(const std::string& endpoint, ExternalOptions opts = {});

/// Splits a command line on whitespace, honouring single and double quotes.
std::vector<std::string> split_command(const std::string& command);

/// Wire encoding of one response (also used by the shim).
std::string encode_response(std::uint64_t id, const ExecResult& result);
/// Parses one response line. Throws ProtocolError.
std::pair<std::uint64_t, ExecResult> decode_response(const std::string& line);

}  // namespace eqmorph
