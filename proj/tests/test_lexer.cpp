#include <catch2/catch_amalgamated.hpp>

#include "copri/lexer.hpp"
#include "support.hpp"

using namespace copri;

TEST_CASE("keywords and identifiers split correctly") {
  auto toks = tokenize("concept Account in Bank");
  REQUIRE(toks.size() == 5);  // incl. End
  CHECK(toks[0].is_keyword("concept"));
  CHECK(toks[1].kind == TokenKind::Identifier);
  CHECK(toks[1].lexeme == "Account");
  CHECK(toks[2].is_keyword("in"));
  CHECK(toks[3].lexeme == "Bank");
  CHECK(toks[4].kind == TokenKind::End);
}

TEST_CASE("numbers keep int/double distinction") {
  auto toks = tokenize("10 10.0 0.5");
  CHECK(toks[0].kind == TokenKind::Integer);
  CHECK(toks[1].kind == TokenKind::Float);
  CHECK(toks[2].kind == TokenKind::Float);
  CHECK(toks[2].lexeme == "0.5");
}

TEST_CASE("strings decode escapes and keep exact text") {
  auto toks = tokenize("print(\"=> Bank: enter bank scope\");");
  REQUIRE(toks.size() >= 4);
  CHECK(toks[2].kind == TokenKind::String);
  CHECK(toks[2].text == "=> Bank: enter bank scope");
}

TEST_CASE("line comments are skipped") {
  auto toks = tokenize("x = 1; // Go inside\ny = 2;");
  bool sawComment = false;
  for (auto& t : toks) sawComment = sawComment || t.lexeme.find("Go") != std::string::npos;
  CHECK_FALSE(sawComment);
  CHECK(toks.back().kind == TokenKind::End);
}

TEST_CASE("multi-char operators lex as one token") {
  auto toks = tokenize("a >= b == c != d <= e");
  CHECK(toks[1].is_punct(">="));
  CHECK(toks[3].is_punct("=="));
  CHECK(toks[5].is_punct("!="));
  CHECK(toks[7].is_punct("<="));
}

TEST_CASE("positions point at the offending lexeme") {
  try {
    tokenize("x = 1;\n  y = @;");
    FAIL("expected a lex error");
  } catch (const CopError& e) {
    CHECK(e.kind == ErrorKind::Lex);
    CHECK(e.line == 2);
    CHECK(e.column == 7);
  }
}

TEST_CASE("unterminated string reports its start line") {
  try {
    tokenize("print(\"oops\n);");
    FAIL("expected a lex error");
  } catch (const CopError& e) {
    CHECK(e.kind == ErrorKind::Lex);
    CHECK(e.line == 1);
  }
}

TEST_CASE("tokenizing is deterministic over corpus files") {
  auto text = read_file(std::string(COPRI_CORPUS_DIR) + "/lifecycle_create.cop");
  REQUIRE(text.has_value());
  auto a = tokenize(*text);
  auto b = tokenize(*text);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].lexeme == b[i].lexeme);
    CHECK(a[i].line == b[i].line);
  }
}
