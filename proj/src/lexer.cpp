#include "eqmorph/lexer.hpp"

#include <algorithm>
#include <array>
#include <cctype>

#include "eqmorph/errors.hpp"

namespace eqmorph {

namespace {

constexpr std::array<std::string_view, 30> kReserved = {
    "select", "distinct", "from",  "where", "group",  "by",     "having", "union",  "all",   "and",
    "or",     "not",      "true",  "false", "null",   "count",  "sum",    "min",    "max",   "avg",
    "create", "table",    "insert", "into", "values", "drop",   "if",     "exists", "order", "limit"};

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }
bool digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }

}  // namespace

SyntaxError::SyntaxError(std::size_t position, std::vector<std::string> expected, std::string found)
    : std::runtime_error([&] {
        std::string msg = "syntax error at position " + std::to_string(position) + ": found " + found;
        if (!expected.empty()) {
          msg += ", expected ";
          for (std::size_t i = 0; i < expected.size(); ++i) msg += (i ? " | " : "") + expected[i];
        }
        return msg;
      }()),
      position_(position),
      expected_(std::move(expected)),
      found_(std::move(found)) {}

std::string Token::describe() const {
  switch (kind) {
    case Kind::End: return "end of input";
    case Kind::String: return "'" + text + "'";
    case Kind::Keyword: {
      std::string up = text;
      std::transform(up.begin(), up.end(), up.begin(), [](unsigned char c) { return std::toupper(c); });
      return up;
    }
    default: return text;
  }
}

bool is_reserved_word(std::string_view lowered) {
  return std::find(kReserved.begin(), kReserved.end(), lowered) != kReserved.end();
}

std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < text.size()) {
    const char c = text[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    if (c == '-' && i + 1 < text.size() && text[i + 1] == '-') {  // line comment
      while (i < text.size() && text[i] != '\n') ++i;
      continue;
    }
    Token tok;
    tok.position = i;
    if (ident_start(c)) {
      std::size_t j = i;
      while (j < text.size() && ident_char(text[j])) ++j;
      tok.text.assign(text.substr(i, j - i));
      std::transform(tok.text.begin(), tok.text.end(), tok.text.begin(),
                     [](unsigned char ch) { return std::tolower(ch); });
      tok.kind = is_reserved_word(tok.text) ? Token::Kind::Keyword : Token::Kind::Identifier;
      i = j;
    } else if (digit(c) || (c == '.' && i + 1 < text.size() && digit(text[i + 1]))) {
      std::size_t j = i;
      bool dot = false;
      while (j < text.size() && (digit(text[j]) || (text[j] == '.' && !dot))) {
        if (text[j] == '.') dot = true;
        ++j;
      }
      tok.kind = Token::Kind::Number;
      tok.text.assign(text.substr(i, j - i));
      i = j;
    } else if (c == '\'') {
      std::size_t j = i + 1;
      for (;;) {
        if (j >= text.size()) throw SyntaxError(i, {"closing quote"}, "end of input");
        if (text[j] == '\'') {
          if (j + 1 < text.size() && text[j + 1] == '\'') {
            tok.text.push_back('\'');
            j += 2;
            continue;
          }
          ++j;
          break;
        }
        tok.text.push_back(text[j++]);
      }
      tok.kind = Token::Kind::String;
      i = j;
    } else {
      static constexpr std::array<std::string_view, 4> two = {"<=", ">=", "<>", "!="};
      tok.kind = Token::Kind::Symbol;
      const auto pair = text.substr(i, 2);
      if (std::find(two.begin(), two.end(), pair) != two.end()) {
        tok.text.assign(pair);
        i += 2;
      } else if (std::string_view("(),.;*=<>-+").find(c) != std::string_view::npos) {
        tok.text.assign(1, c);
        ++i;
      } else {
        throw SyntaxError(i, {}, std::string("character '") + c + "'");
      }
    }
    out.push_back(std::move(tok));
  }
  Token end;
  end.position = text.size();
  out.push_back(end);
  return out;
}

}  // namespace eqmorph
