#include "eqmorph/adapter.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstdlib>
#include <cstring>
#include <json.hpp>
#include <thread>

#include "eqmorph/errors.hpp"
#include "eqmorph/sql.hpp"

namespace eqmorph {

using ordered_json = nlohmann::ordered_json;

// ---- builtin ------------------------------------------------------------------

BuiltinExecutor::BuiltinExecutor(std::optional<std::string> fault)
    : engine_(fault ? with_fault(*fault) : Engine()) {}

std::optional<EngineError> BuiltinExecutor::reset_schema(const std::string& script) {
  db_ = Database();
  try {
    apply_script(db_, script);
  } catch (const SyntaxError& e) {
    return EngineError{std::string(codes::kSyntaxError), e.what()};
  } catch (const ScriptError& e) {
    return EngineError{"SCRIPT_ERROR", e.what()};
  }
  return std::nullopt;
}

ExecResult BuiltinExecutor::exec_sql(const std::string& sql) {
  try {
    const SqlQuery q = parse(sql);
    RenderedResult r = engine_.execute_rendered(db_, q);
    return Rows{std::move(r.types), std::move(r.rows)};
  } catch (const SyntaxError& e) {
    return EngineError{std::string(codes::kSyntaxError), e.what()};
  } catch (const ExecError& e) {
    return EngineError{e.code(), e.message()};
  }
}

std::string BuiltinExecutor::id() const {
  return engine_.fault() ? "builtin:" + engine_.fault()->name : std::string("builtin");
}

// ---- wire format ------------------------------------------------------------------

std::string encode_response(std::uint64_t id, const ExecResult& result) {
  ordered_json j;
  j["id"] = id;
  if (const auto* rows = std::get_if<Rows>(&result)) {
    j["ok"] = true;
    ordered_json data = ordered_json::array();
    for (const auto& r : rows->rows) {
      ordered_json line = ordered_json::array();
      for (const auto& v : r) {
        if (v) {
          line.push_back(*v);
        } else {
          line.push_back(nullptr);
        }
      }
      data.push_back(std::move(line));
    }
    j["rows"] = std::move(data);
    if (!rows->types.empty()) j["types"] = rows->types;
  } else {
    const auto& err = std::get<EngineError>(result);
    j["ok"] = false;
    j["code"] = err.code;
    j["message"] = err.message;
  }
  return j.dump();
}

std::pair<std::uint64_t, ExecResult> decode_response(const std::string& line) {
  ordered_json j;
  try {
    j = ordered_json::parse(line);
  } catch (const ordered_json::exception& e) {
    throw ProtocolError(std::string("malformed response: ") + e.what());
  }
  try {
    const auto id = j.at("id").get<std::uint64_t>();
    if (!j.at("ok").get<bool>()) {
      return {id, EngineError{j.at("code").get<std::string>(), j.value("message", std::string())}};
    }
    Rows rows;
    for (const auto& r : j.at("rows")) {
      std::vector<std::optional<std::string>> out;
      for (const auto& v : r) {
        if (v.is_null()) {
          out.emplace_back(std::nullopt);
        } else if (v.is_string()) {
          out.emplace_back(v.get<std::string>());
        } else {
          out.emplace_back(v.dump());
        }
      }
      rows.rows.push_back(std::move(out));
    }
    if (j.contains("types")) rows.types = j.at("types").get<std::vector<std::string>>();
    return {id, std::move(rows)};
  } catch (const ordered_json::exception& e) {
    throw ProtocolError(std::string("bad response shape: ") + e.what());
  }
}

std::vector<std::string> split_command(const std::string& command) {
  std::vector<std::string> out;
  std::string cur;
  bool in_word = false;
  char quote = 0;
  for (char c : command) {
    if (quote) {
      if (c == quote) {
        quote = 0;
      } else {
        cur.push_back(c);
      }
    } else if (c == '\'' || c == '"') {
      quote = c;
      in_word = true;
    } else if (c == ' ' || c == '\t' || c == '\n') {
      if (in_word) out.push_back(std::move(cur));
      cur.clear();
      in_word = false;
    } else {
      cur.push_back(c);
      in_word = true;
    }
  }
  if (quote) throw std::invalid_argument("unterminated quote in command: " + command);
  if (in_word) out.push_back(std::move(cur));
  return out;
}

// ---- external ---------------------------------------------------------------------

ExternalExecutor::ExternalExecutor(std::string command, ExternalOptions opts)
    : command_(std::move(command)), opts_(opts) {
  const char* dbg = std::getenv("EQMORPH_SHIM_DEBUG");
  if (dbg != nullptr && std::string(dbg) == "1") {
    const char* path = std::getenv("EQMORPH_SHIM_LOG");
    debug_log_ = std::make_unique<std::ofstream>(path ? path : "eqmorph-shim-debug.log", std::ios::app);
  }
}

ExternalExecutor::~ExternalExecutor() { stop(); }

void ExternalExecutor::log(const std::string& direction, const std::string& line) {
  if (debug_log_) *debug_log_ << "[" << command_ << "] " << direction << " " << line << "\n" << std::flush;
}

void ExternalExecutor::start() {
  if (pid_ > 0) return;
  const auto argv_s = split_command(command_);
  if (argv_s.empty()) throw TargetUnavailable("empty external command");
  ::signal(SIGPIPE, SIG_IGN);

  int in_pipe[2];
  int out_pipe[2];
  int err_pipe[2];
  if (::pipe2(in_pipe, O_CLOEXEC) != 0 || ::pipe2(out_pipe, O_CLOEXEC) != 0 || ::pipe2(err_pipe, O_CLOEXEC) != 0) {
    throw TargetUnavailable(std::string("pipe: ") + std::strerror(errno));
  }
  std::vector<char*> argv;
  for (const auto& a : argv_s) argv.push_back(const_cast<char*>(a.c_str()));
  argv.push_back(nullptr);

  const pid_t pid = ::fork();
  if (pid < 0) throw TargetUnavailable(std::string("fork: ") + std::strerror(errno));
  if (pid == 0) {
    ::dup2(in_pipe[0], STDIN_FILENO);
    ::dup2(out_pipe[1], STDOUT_FILENO);
    ::execvp(argv[0], argv.data());
    const int err = errno;
    [[maybe_unused]] auto n = ::write(err_pipe[1], &err, sizeof err);
    ::_exit(127);
  }
  ::close(in_pipe[0]);
  ::close(out_pipe[1]);
  ::close(err_pipe[1]);
  int child_errno = 0;
  const ssize_t got = ::read(err_pipe[0], &child_errno, sizeof child_errno);
  ::close(err_pipe[0]);
  if (got > 0) {
    ::close(in_pipe[1]);
    ::close(out_pipe[0]);
    ::waitpid(pid, nullptr, 0);
    throw TargetUnavailable("cannot run '" + argv_s[0] + "': " + std::strerror(child_errno));
  }
  pid_ = pid;
  to_child_ = in_pipe[1];
  from_child_ = out_pipe[0];
  buffer_.clear();

  try {
    const auto r = request("reset", "", opts_.startupTimeout);
    if (const auto* e = std::get_if<EngineError>(&r)) {
      throw TargetUnavailable("startup handshake failed: " + e->code + ": " + e->message);
    }
  } catch (...) {
    stop();
    throw;
  }
}

void ExternalExecutor::stop() {
  if (pid_ <= 0) return;
  if (to_child_ >= 0) ::close(to_child_);
  to_child_ = -1;
  bool reaped = false;
  for (int i = 0; i < 50 && !reaped; ++i) {
    if (::waitpid(pid_, nullptr, WNOHANG) == pid_) {
      reaped = true;
    } else {
      std::this_thread::sleep_for(std::chrono::milliseconds(10));
    }
  }
  if (!reaped) {
    ::kill(pid_, SIGKILL);
    ::waitpid(pid_, nullptr, 0);
  }
  if (from_child_ >= 0) ::close(from_child_);
  from_child_ = -1;
  pid_ = -1;
}

std::string ExternalExecutor::read_line(std::chrono::milliseconds timeout) {
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  for (;;) {
    if (const auto nl = buffer_.find('\n'); nl != std::string::npos) {
      std::string line = buffer_.substr(0, nl);
      buffer_.erase(0, nl + 1);
      return line;
    }
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) throw Timeout("no response from " + command_ + " within " + std::to_string(timeout.count()) + " ms");
    pollfd p{from_child_, POLLIN, 0};
    const int rc = ::poll(&p, 1, static_cast<int>(left.count()));
    if (rc < 0) {
      if (errno == EINTR) continue;
      throw TargetUnavailable(std::string("poll: ") + std::strerror(errno));
    }
    if (rc == 0) continue;
    char buf[4096];
    const ssize_t n = ::read(from_child_, buf, sizeof buf);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw TargetUnavailable(std::string("read: ") + std::strerror(errno));
    }
    if (n == 0) throw TargetUnavailable("target " + command_ + " closed its output");
    buffer_.append(buf, static_cast<std::size_t>(n));
  }
}

ExecResult ExternalExecutor::request(const std::string& op, const std::string& sql, std::chrono::milliseconds timeout) {
  if (pid_ <= 0) throw TargetUnavailable("target not started");
  const std::uint64_t id = next_id_++;
  ordered_json req;
  req["id"] = id;
  req["op"] = op;
  req["sql"] = sql;
  const std::string line = req.dump() + "\n";
  log(">", req.dump());
  for (std::size_t off = 0; off < line.size();) {
    const ssize_t n = ::write(to_child_, line.data() + off, line.size() - off);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw TargetUnavailable("write to " + command_ + " failed: " + std::strerror(errno));
    }
    off += static_cast<std::size_t>(n);
  }
  std::string reply;
  try {
    reply = read_line(timeout);
  } catch (const Timeout&) {
    stop();
    throw;
  }
  log("<", reply);
  auto [rid, result] = decode_response(reply);
  if (rid != id) throw ProtocolError("response id " + std::to_string(rid) + " for request " + std::to_string(id));
  return result;
}

std::optional<EngineError> ExternalExecutor::reset_schema(const std::string& script) {
  auto r = request("reset", script, opts_.queryTimeout);
  if (auto* e = std::get_if<EngineError>(&r)) return std::move(*e);
  return std::nullopt;
}

ExecResult ExternalExecutor::exec_sql(const std::string& sql) { return request("exec", sql, opts_.queryTimeout); }

std::unique_ptr<Executor> make_executor(const std::string& endpoint, ExternalOptions opts) {
  if (endpoint == "builtin") return std::make_unique<BuiltinExecutor>();
  if (endpoint.rfind("builtin:", 0) == 0) return std::make_unique<BuiltinExecutor>(endpoint.substr(8));
  if (endpoint.rfind("extern:", 0) == 0) {
    if (endpoint.size() == 7) throw std::invalid_argument("extern: needs a command");
    return std::make_unique<ExternalExecutor>(endpoint.substr(7), opts);
  }
  throw std::invalid_argument("unknown target '" + endpoint + "' (expected builtin, builtin:FAULT or extern:CMD)");
}

}  // namespace eqmorph
