#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace eqmorph {

struct Token {
  enum class Kind { Identifier, Keyword, Number, String, Symbol, End };

  Kind kind = Kind::End;
  std::string text;  // identifiers/keywords lowercased, strings unescaped
  std::size_t position = 0;

  bool is_keyword(std::string_view kw) const { return kind == Kind::Keyword && text == kw; }
  bool is_symbol(std::string_view s) const { return kind == Kind::Symbol && text == s; }
  std::string describe() const;
};

bool is_reserved_word(std::string_view lowered);

/// Splits SQL text into tokens, ending with a single End token. Throws
/// SyntaxError on unterminated strings or stray characters.
std::vector<Token> tokenize(std::string_view text);

}  // namespace eqmorph
