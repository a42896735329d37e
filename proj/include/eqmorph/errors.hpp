#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace eqmorph {

// Stable error codes shared by the reference engine, the adapter and the
// error filter list.
namespace codes {
inline constexpr std::string_view kUnknownTable = "UNKNOWN_TABLE";
inline constexpr std::string_view kUnknownColumn = "UNKNOWN_COLUMN";
inline constexpr std::string_view kAmbiguousColumn = "AMBIGUOUS_COLUMN";
inline constexpr std::string_view kNonGroupedColumn = "NON_GROUPED_COLUMN";
inline constexpr std::string_view kTypeMismatch = "TYPE_MISMATCH";
inline constexpr std::string_view kUnsupported = "UNSUPPORTED";
inline constexpr std::string_view kDivByZero = "DIV_BY_ZERO";
inline constexpr std::string_view kSyntaxError = "SYNTAX_ERROR";
inline constexpr std::string_view kOverflow = "NUMERIC_OVERFLOW";
}  // namespace codes

/// Runtime failure raised by the reference engine.
class ExecError : public std::runtime_error {
 public:
  ExecError(std::string_view code, const std::string& message)
      : std::runtime_error(std::string(code) + ": " + message), code_(code), message_(message) {}

  const std::string& code() const noexcept { return code_; }
  const std::string& message() const noexcept { return message_; }

 private:
  std::string code_;
  std::string message_;
};

/// Raised by the parser for malformed or out-of-subset input. `position` is a
/// byte offset into the statement text.
class SyntaxError : public std::runtime_error {
 public:
  SyntaxError(std::size_t position, std::vector<std::string> expected, std::string found);

  std::size_t position() const noexcept { return position_; }
  const std::vector<std::string>& expected() const noexcept { return expected_; }
  const std::string& found() const noexcept { return found_; }

 private:
  std::size_t position_;
  std::vector<std::string> expected_;
  std::string found_;
};

}  // namespace eqmorph
