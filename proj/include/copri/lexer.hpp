#pragma once

#include <cctype>
#include <string>
#include <string_view>
#include <vector>

#include "copri/diagnostics.hpp"
#include "copri/token.hpp"

namespace copri {

// Splits source text into tokens. The token stream always ends with a single
// End marker. Positions are 1-based; the first lexically invalid character
// aborts with a Lex error.
inline std::vector<Token> tokenize(std::string_view src) {
  std::vector<Token> out;
  std::size_t i = 0;
  int line = 1, col = 1;

  auto peek = [&](std::size_t off = 0) -> char {
    return i + off < src.size() ? src[i + off] : '\0';
  };
  auto advance = [&]() {
    char c = src[i++];
    if (c == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
    return c;
  };

  while (i < src.size()) {
    char c = peek();
    if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
      advance();
      continue;
    }
    if (c == '/' && peek(1) == '/') {
      while (i < src.size() && peek() != '\n') advance();
      continue;
    }

    int tl = line, tc = col;
    std::size_t start = i;

    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      while (i < src.size() &&
             (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_'))
        advance();
      std::string word(src.substr(start, i - start));
      Token t;
      t.kind = is_keyword_word(word) ? TokenKind::Keyword : TokenKind::Identifier;
      t.lexeme = word;
      t.text = word;
      t.line = tl;
      t.column = tc;
      out.push_back(std::move(t));
      continue;
    }

    if (std::isdigit(static_cast<unsigned char>(c))) {
      while (std::isdigit(static_cast<unsigned char>(peek()))) advance();
      bool is_float = false;
      if (peek() == '.' && std::isdigit(static_cast<unsigned char>(peek(1)))) {
        is_float = true;
        advance();
        while (std::isdigit(static_cast<unsigned char>(peek()))) advance();
      }
      Token t;
      t.kind = is_float ? TokenKind::Float : TokenKind::Integer;
      t.lexeme = std::string(src.substr(start, i - start));
      t.text = t.lexeme;
      t.line = tl;
      t.column = tc;
      out.push_back(std::move(t));
      continue;
    }

    if (c == '"') {
      advance();
      std::string decoded;
      bool closed = false;
      while (i < src.size()) {
        char d = advance();
        if (d == '"') {
          closed = true;
          break;
        }
        if (d == '\n') break;
        if (d == '\\') {
          if (i >= src.size()) break;
          char e = advance();
          switch (e) {
            case 'n': decoded += '\n'; break;
            case 't': decoded += '\t'; break;
            case '"': decoded += '"'; break;
            case '\\': decoded += '\\'; break;
            default:
              fail(ErrorKind::Lex, std::string("unknown escape '\\") + e + "'",
                   tl, tc);
          }
          continue;
        }
        decoded += d;
      }
      if (!closed) fail(ErrorKind::Lex, "unterminated string literal", tl, tc);
      Token t;
      t.kind = TokenKind::String;
      t.lexeme = std::string(src.substr(start, i - start));
      t.text = std::move(decoded);
      t.line = tl;
      t.column = tc;
      out.push_back(std::move(t));
      continue;
    }

    auto punct = [&](int len) {
      Token t;
      t.kind = TokenKind::Punct;
      t.lexeme = std::string(src.substr(start, static_cast<std::size_t>(len)));
      t.text = t.lexeme;
      t.line = tl;
      t.column = tc;
      for (int k = 0; k < len; ++k) advance();
      out.push_back(std::move(t));
    };

    char n = peek(1);
    if ((c == '=' && n == '=') || (c == '!' && n == '=') ||
        (c == '<' && n == '=') || (c == '>' && n == '=')) {
      punct(2);
      continue;
    }
    switch (c) {
      case '{': case '}': case '(': case ')': case '[': case ']':
      case ';': case ',': case '.': case ':': case '=': case '<':
      case '>': case '+': case '-': case '*': case '/':
        punct(1);
        continue;
      default:
        fail(ErrorKind::Lex,
             std::string("unexpected character '") + c + "'", tl, tc);
    }
  }

  Token end;
  end.kind = TokenKind::End;
  end.line = line;
  end.column = col;
  out.push_back(std::move(end));
  return out;
}

}  // namespace copri
