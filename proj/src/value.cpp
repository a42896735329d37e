#include "eqmorph/value.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <limits>
#include <stdexcept>

#include "eqmorph/errors.hpp"

namespace eqmorph {

namespace {

__int128 pow10(int n) {
  __int128 r = 1;
  for (int i = 0; i < n; ++i) r *= 10;
  return r;
}

std::string int128_to_string(__int128 v) {
  if (v == 0) return "0";
  bool neg = v < 0;
  unsigned __int128 u = neg ? static_cast<unsigned __int128>(-(v + 1)) + 1 : static_cast<unsigned __int128>(v);
  std::string out;
  while (u > 0) {
    out.push_back(static_cast<char>('0' + static_cast<int>(u % 10)));
    u /= 10;
  }
  if (neg) out.push_back('-');
  std::reverse(out.begin(), out.end());
  return out;
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

}  // namespace

std::string_view to_string(ColumnType type) {
  switch (type) {
    case ColumnType::Int: return "INT";
    case ColumnType::Dec: return "DECIMAL";
    case ColumnType::Str: return "VARCHAR";
  }
  return "?";
}

std::optional<ColumnType> column_type_from_name(std::string_view name) {
  const std::string n = lower(name);
  if (n == "int" || n == "integer" || n == "bigint") return ColumnType::Int;
  if (n == "decimal" || n == "numeric" || n == "dec") return ColumnType::Dec;
  if (n == "varchar" || n == "text" || n == "char") return ColumnType::Str;
  return std::nullopt;
}

Decimal Decimal::make(__int128 mantissa, int scale) {
  while (scale > 0 && mantissa % 10 == 0) {
    mantissa /= 10;
    --scale;
  }
  // Drop excess precision rather than fail; only reachable through AVG of
  // very long fractions.
  while (scale > kMaxScale) {
    mantissa /= 10;
    --scale;
  }
  if (mantissa > std::numeric_limits<std::int64_t>::max() || mantissa < std::numeric_limits<std::int64_t>::min()) {
    throw ExecError(codes::kOverflow, "decimal out of range");
  }
  Decimal d;
  d.mantissa = static_cast<std::int64_t>(mantissa);
  d.scale = static_cast<std::uint8_t>(scale);
  return d;
}

Decimal Decimal::parse(std::string_view text) {
  std::size_t i = 0;
  bool neg = false;
  if (i < text.size() && (text[i] == '-' || text[i] == '+')) {
    neg = text[i] == '-';
    ++i;
  }
  __int128 m = 0;
  int scale = 0;
  bool digits = false;
  bool frac = false;
  for (; i < text.size(); ++i) {
    const char c = text[i];
    if (c == '.' && !frac) {
      frac = true;
      continue;
    }
    if (!std::isdigit(static_cast<unsigned char>(c))) throw std::invalid_argument("bad decimal: " + std::string(text));
    digits = true;
    if (frac && scale >= kMaxScale) continue;  // truncate beyond max scale
    m = m * 10 + (c - '0');
    if (m > static_cast<__int128>(std::numeric_limits<std::int64_t>::max()) * 10) {
      throw std::invalid_argument("decimal too large: " + std::string(text));
    }
    if (frac) ++scale;
  }
  if (!digits) throw std::invalid_argument("bad decimal: " + std::string(text));
  try {
    return make(neg ? -m : m, scale);
  } catch (const ExecError&) {
    throw std::invalid_argument("decimal too large: " + std::string(text));
  }
}

std::string Decimal::to_string() const {
  std::string digits = int128_to_string(mantissa < 0 ? -static_cast<__int128>(mantissa) : mantissa);
  if (scale > 0) {
    if (digits.size() <= scale) digits.insert(0, scale - digits.size() + 1, '0');
    digits.insert(digits.size() - scale, 1, '.');
  }
  return mantissa < 0 ? "-" + digits : digits;
}

double Decimal::to_double() const {
  return static_cast<double>(mantissa) / static_cast<double>(pow10(scale));
}

std::strong_ordering compare(const Decimal& a, const Decimal& b) {
  const int s = std::max(a.scale, b.scale);
  const __int128 x = static_cast<__int128>(a.mantissa) * pow10(s - a.scale);
  const __int128 y = static_cast<__int128>(b.mantissa) * pow10(s - b.scale);
  return x <=> y;
}

Decimal operator+(const Decimal& a, const Decimal& b) {
  const int s = std::max(a.scale, b.scale);
  return Decimal::make(static_cast<__int128>(a.mantissa) * pow10(s - a.scale) +
                           static_cast<__int128>(b.mantissa) * pow10(s - b.scale),
                       s);
}

Decimal divide(const Decimal& numerator, std::int64_t denominator, int scale) {
  if (denominator == 0) throw ExecError(codes::kDivByZero, "division by zero");
  // numerator * 10^(scale - num.scale) / denominator, rounded half away from zero.
  const int shift = scale - numerator.scale;
  __int128 n = numerator.mantissa;
  __int128 d = denominator;
  if (shift >= 0) {
    n *= pow10(shift);
  } else {
    d *= pow10(-shift);
  }
  __int128 q = n / d;
  const __int128 r = n % d;
  const __int128 twice = (r < 0 ? -r : r) * 2;
  if (twice >= (d < 0 ? -d : d)) q += ((n < 0) != (d < 0)) ? -1 : 1;
  return Decimal::make(q, scale);
}

std::string_view to_string(TruthValue t) {
  switch (t) {
    case TruthValue::True: return "TRUE";
    case TruthValue::False: return "FALSE";
    case TruthValue::Unknown: return "UNKNOWN";
  }
  return "?";
}

TruthValue truth_and(TruthValue a, TruthValue b) {
  if (a == TruthValue::False || b == TruthValue::False) return TruthValue::False;
  if (a == TruthValue::True && b == TruthValue::True) return TruthValue::True;
  return TruthValue::Unknown;
}

TruthValue truth_or(TruthValue a, TruthValue b) {
  if (a == TruthValue::True || b == TruthValue::True) return TruthValue::True;
  if (a == TruthValue::False && b == TruthValue::False) return TruthValue::False;
  return TruthValue::Unknown;
}

TruthValue truth_not(TruthValue a) {
  switch (a) {
    case TruthValue::True: return TruthValue::False;
    case TruthValue::False: return TruthValue::True;
    case TruthValue::Unknown: return TruthValue::Unknown;
  }
  return TruthValue::Unknown;
}

Decimal Value::as_numeric() const {
  if (is_int()) return Decimal::make(as_int(), 0);
  return as_dec();
}

std::string Value::to_string() const {
  switch (data_.index()) {
    case 0: return "NULL";
    case 1: return std::to_string(as_int());
    case 2: return as_dec().to_string();
    default: return as_str();
  }
}

std::string Value::to_sql() const {
  if (is_dec()) {
    // Keep the point so the literal reads back as a decimal.
    std::string out = to_string();
    if (out.find('.') == std::string::npos) out += ".0";
    return out;
  }
  if (!is_str()) return to_string();
  std::string out = "'";
  for (char c : as_str()) {
    if (c == '\'') out.push_back('\'');
    out.push_back(c);
  }
  out.push_back('\'');
  return out;
}

std::strong_ordering operator<=>(const Value& a, const Value& b) {
  auto rank = [](const Value& v) { return v.is_null() ? 0 : v.is_numeric() ? 1 : 2; };
  const int ra = rank(a);
  const int rb = rank(b);
  if (ra != rb) return ra <=> rb;
  if (ra == 0) return std::strong_ordering::equal;
  if (ra == 2) {
    const int c = a.as_str().compare(b.as_str());
    return c <=> 0;
  }
  if (a.is_int() && b.is_int()) return a.as_int() <=> b.as_int();
  const auto c = compare(a.as_numeric(), b.as_numeric());
  if (c != 0) return c;
  return a.data_.index() <=> b.data_.index();
}

std::optional<std::strong_ordering> sql_compare(const Value& a, const Value& b) {
  if (a.is_null() || b.is_null()) return std::nullopt;
  if (a.is_str() != b.is_str()) {
    throw ExecError(codes::kTypeMismatch, "cannot compare " + a.to_sql() + " with " + b.to_sql());
  }
  if (a.is_str()) return a.as_str().compare(b.as_str()) <=> 0;
  if (a.is_int() && b.is_int()) return a.as_int() <=> b.as_int();
  return compare(a.as_numeric(), b.as_numeric());
}

}  // namespace eqmorph
