#pragma once

#include <array>
#include <string>
#include <string_view>

namespace copri {

enum class TokenKind {
  Keyword,
  Identifier,
  Integer,
  Float,
  String,
  Punct,
  End,
};

struct Token {
  TokenKind kind = TokenKind::End;
  std::string lexeme;   // exact source slice (quotes included for strings)
  std::string text;     // decoded value for String tokens, else == lexeme
  int line = 1;
  int column = 1;

  bool is(TokenKind k) const { return kind == k; }
  bool is_keyword(std::string_view kw) const {
    return kind == TokenKind::Keyword && lexeme == kw;
  }
  bool is_punct(std::string_view p) const {
    return kind == TokenKind::Punct && lexeme == p;
  }
};

inline constexpr std::array<std::string_view, 27> kKeywords = {
    "concept", "reference", "object",  "in",     "super",  "sub",   "this",
    "new",     "continue",  "create",  "delete", "if",     "else",  "while",
    "return",  "null",      "true",    "false",  "static", "void",  "double",
    "int",     "boolean",   "String",  "char",   "Object", "Map",
};

inline bool is_keyword_word(std::string_view w) {
  for (auto kw : kKeywords)
    if (kw == w) return true;
  return false;
}

// Type names usable in declarations that are not concepts.
inline bool is_builtin_type_name(std::string_view w) {
  return w == "double" || w == "int" || w == "boolean" || w == "String" ||
         w == "char" || w == "Object" || w == "Map";
}

}  // namespace copri
