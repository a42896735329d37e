#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

namespace eqmorph {

enum class ColumnType : std::uint8_t { Int, Dec, Str };

std::string_view to_string(ColumnType type);
/// Accepts INT/INTEGER/BIGINT, DECIMAL/NUMERIC/DEC, VARCHAR/TEXT/CHAR (case-insensitive).
std::optional<ColumnType> column_type_from_name(std::string_view name);

/// Exact fixed-point number: mantissa / 10^scale. Always kept normalized
/// (no trailing zero digits in the fraction), so equality is numeric equality.
struct Decimal {
  static constexpr int kMaxScale = 18;

  std::int64_t mantissa = 0;
  std::uint8_t scale = 0;

  /// Builds and normalizes. Throws ExecError(NUMERIC_OVERFLOW) if the value
  /// does not fit.
  static Decimal make(__int128 mantissa, int scale);
  /// Parses "[-]digits[.digits]". Throws std::invalid_argument.
  static Decimal parse(std::string_view text);

  std::string to_string() const;
  double to_double() const;

  friend bool operator==(const Decimal&, const Decimal&) = default;
};

std::strong_ordering compare(const Decimal& a, const Decimal& b);
Decimal operator+(const Decimal& a, const Decimal& b);
/// Quotient rounded half away from zero to `scale` fractional digits.
Decimal divide(const Decimal& numerator, std::int64_t denominator, int scale);

enum class TruthValue : std::uint8_t { False, True, Unknown };

std::string_view to_string(TruthValue t);
TruthValue truth_and(TruthValue a, TruthValue b);
TruthValue truth_or(TruthValue a, TruthValue b);
TruthValue truth_not(TruthValue a);

/// SQL value: NULL, 64-bit integer, exact decimal or string.
class Value {
 public:
  Value() = default;

  static Value null() { return Value(); }
  static Value integer(std::int64_t v) { return Value(Storage(v)); }
  static Value decimal(Decimal v) { return Value(Storage(v)); }
  static Value string(std::string v) { return Value(Storage(std::move(v))); }

  bool is_null() const noexcept { return data_.index() == 0; }
  bool is_int() const noexcept { return data_.index() == 1; }
  bool is_dec() const noexcept { return data_.index() == 2; }
  bool is_str() const noexcept { return data_.index() == 3; }
  bool is_numeric() const noexcept { return is_int() || is_dec(); }

  std::int64_t as_int() const { return std::get<1>(data_); }
  const Decimal& as_dec() const { return std::get<2>(data_); }
  const std::string& as_str() const { return std::get<3>(data_); }
  /// Int or Dec widened to Decimal.
  Decimal as_numeric() const;

  /// Canonical text: integers plainly, decimals trimmed, strings raw, NULL as "NULL".
  std::string to_string() const;
  /// SQL literal form (strings quoted and escaped).
  std::string to_sql() const;

  friend bool operator==(const Value&, const Value&) = default;
  /// Total order used for canonical multiset layout: NULL < numbers < strings.
  /// Numbers compare numerically; an Int sorts before an equal Dec.
  friend std::strong_ordering operator<=>(const Value& a, const Value& b);

 private:
  using Storage = std::variant<std::monostate, std::int64_t, Decimal, std::string>;
  explicit Value(Storage s) : data_(std::move(s)) {}
  Storage data_;
};

/// SQL comparison. Returns nullopt when either side is NULL. Throws
/// ExecError(TYPE_MISMATCH) for string vs number.
std::optional<std::strong_ordering> sql_compare(const Value& a, const Value& b);

}  // namespace eqmorph
