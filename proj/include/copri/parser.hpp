#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "copri/ast.hpp"
#include "copri/diagnostics.hpp"
#include "copri/lexer.hpp"
#include "copri/token.hpp"

namespace copri {

namespace detail {

class Parser {
 public:
  explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

  Program parse_program() {
    Program prog;
    while (!at_end()) {
      if (peek().is_keyword("concept")) {
        prog.concepts.push_back(parse_concept());
        prog.items.push_back({TopItemKind::Concept, prog.concepts.size() - 1});
        continue;
      }
      if (looks_like_function()) {
        prog.functions.push_back(parse_function());
        prog.items.push_back({TopItemKind::Function, prog.functions.size() - 1});
        continue;
      }
      prog.statements.push_back(parse_statement(/*allow_static=*/true));
      prog.items.push_back({TopItemKind::Statement, prog.statements.size() - 1});
    }
    return prog;
  }

  ExprPtr parse_single_expression() {
    ExprPtr e = parse_expr();
    if (!at_end())
      err("expected end of input", peek());
    return e;
  }

 private:
  std::vector<Token> toks_;
  std::size_t pos_ = 0;

  const Token& peek(std::size_t off = 0) const {
    std::size_t i = pos_ + off;
    return i < toks_.size() ? toks_[i] : toks_.back();
  }
  const Token& advance() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }
  bool at_end() const { return peek().kind == TokenKind::End; }

  [[noreturn]] void err(const std::string& expected, const Token& got) const {
    std::string found = got.kind == TokenKind::End ? "end of input"
                                                   : "'" + got.lexeme + "'";
    fail(ErrorKind::Parse, expected + ", found " + found, got.line, got.column);
  }

  const Token& expect_punct(std::string_view p) {
    if (!peek().is_punct(p)) err("expected '" + std::string(p) + "'", peek());
    return advance();
  }
  const Token& expect_keyword(std::string_view k) {
    if (!peek().is_keyword(k)) err("expected '" + std::string(k) + "'", peek());
    return advance();
  }
  std::string expect_identifier(const char* what) {
    if (peek().kind != TokenKind::Identifier) err(std::string("expected ") + what, peek());
    return advance().lexeme;
  }

  // ---- declarations ----------------------------------------------------

  bool is_type_start(std::size_t off = 0) const {
    const Token& t = peek(off);
    return t.kind == TokenKind::Identifier ||
           (t.kind == TokenKind::Keyword && is_builtin_type_name(t.lexeme));
  }

  // A declaration begins with one of:
  //   BuiltinType ...            Concept name ...
  //   Concept : Type name ...
  bool looks_like_decl() const {
    const Token& t = peek();
    if (t.kind == TokenKind::Keyword && is_builtin_type_name(t.lexeme)) return true;
    if (t.kind != TokenKind::Identifier) return false;
    if (peek(1).kind == TokenKind::Identifier) return true;
    if (peek(1).is_punct(":") && is_type_start(2) &&
        peek(3).kind == TokenKind::Identifier)
      return true;
    return false;
  }

  bool looks_like_function() const {
    // TYPE name ( ... (top level only). void is only valid here.
    std::size_t off = 0;
    if (peek().is_keyword("void")) {
      off = 1;
    } else if (looks_like_decl()) {
      off = peek(1).is_punct(":") ? 3 : 1;
      if (peek(off).is_punct("[")) off += 3;  // char[N]
    } else {
      return false;
    }
    return peek(off).kind == TokenKind::Identifier && peek(off + 1).is_punct("(");
  }

  TypeExpr parse_type() {
    TypeExpr ty;
    ty.line = peek().line;
    ty.column = peek().column;
    if (!is_type_start()) err("expected a type name", peek());
    const Token& first = advance();
    ty.name = first.lexeme;
    ty.is_builtin = first.kind == TokenKind::Keyword;
    if (peek().is_punct(":") && is_type_start(1)) {
      ty.context_name = ty.name;
      if (ty.is_builtin)
        fail(ErrorKind::Parse, "context must be a concept name", ty.line, ty.column);
      const Token& second = peek(1);
      advance();
      advance();
      ty.name = second.lexeme;
      ty.is_builtin = second.kind == TokenKind::Keyword;
    }
    if (peek().is_punct("[")) {
      advance();
      if (peek().kind != TokenKind::Integer) err("expected array length", peek());
      ty.char_len = static_cast<int>(std::stoll(advance().lexeme));
      expect_punct("]");
    }
    return ty;
  }

  StmtPtr parse_var_decl(bool is_static) {
    auto stmt = std::make_unique<Stmt>(StmtKind::VarDecl);
    stmt->line = peek().line;
    stmt->column = peek().column;
    stmt->is_static = is_static;
    stmt->type = parse_type();
    stmt->name = expect_identifier("variable name");
    if (peek().is_punct(".")) {
      advance();
      expect_keyword("create");
      expect_punct("(");
      stmt->is_create = true;
      stmt->create_args = parse_args();
      expect_punct(";");
      return stmt;
    }
    if (peek().is_punct("=")) {
      advance();
      stmt->init = parse_expr();
    }
    expect_punct(";");
    return stmt;
  }

  // ---- concepts ----------------------------------------------------------

  ConceptDecl parse_concept() {
    ConceptDecl decl;
    const Token& kw = expect_keyword("concept");
    decl.line = kw.line;
    decl.column = kw.column;
    decl.name = expect_identifier("concept name");
    if (peek().is_keyword("in")) {
      advance();
      decl.parent = expect_identifier("parent concept name");
    }
    if (peek().is_keyword("reference")) {
      advance();
      decl.ref_class = parse_class_body();
    }
    if (peek().is_keyword("object")) {
      advance();
      decl.obj_class = parse_class_body();
    }
    return decl;
  }

  ClassBody parse_class_body() {
    ClassBody body;
    expect_punct("{");
    while (!peek().is_punct("}")) {
      if (at_end()) err("expected '}'", peek());
      if (peek().is_keyword("static"))
        fail(ErrorKind::Parse, "'static' is only allowed at top level",
             peek().line, peek().column);
      parse_member(body);
    }
    expect_punct("}");
    return body;
  }

  static bool is_member_name(const Token& t) {
    return t.kind == TokenKind::Identifier || t.is_keyword("continue") ||
           t.is_keyword("create") || t.is_keyword("delete");
  }

  void parse_member(ClassBody& body) {
    int line = peek().line, column = peek().column;
    bool returns_void = peek().is_keyword("void");
    TypeExpr ty;
    if (returns_void)
      advance();
    else
      ty = parse_type();
    if (!is_member_name(peek())) err("expected member name", peek());
    std::string name = advance().lexeme;

    if (peek().is_punct("(")) {
      MethodDecl m;
      m.name = std::move(name);
      m.returns_void = returns_void;
      m.ret = std::move(ty);
      m.line = line;
      m.column = column;
      parse_params(m.params);
      m.body = parse_block_stmts();
      body.methods.push_back(std::move(m));
      return;
    }
    if (returns_void)
      fail(ErrorKind::Parse, "a field cannot have type void", line, column);
    FieldDecl f;
    f.type = std::move(ty);
    f.name = std::move(name);
    f.line = line;
    f.column = column;
    if (peek().is_punct("=")) {
      advance();
      f.init = parse_expr();
    }
    expect_punct(";");
    body.fields.push_back(std::move(f));
  }

  MethodDecl parse_function() {
    MethodDecl fn;
    fn.line = peek().line;
    fn.column = peek().column;
    fn.returns_void = peek().is_keyword("void");
    if (fn.returns_void)
      advance();
    else
      fn.ret = parse_type();
    fn.name = expect_identifier("function name");
    parse_params(fn.params);
    fn.body = parse_block_stmts();
    return fn;
  }

  void parse_params(std::vector<Param>& out) {
    expect_punct("(");
    if (!peek().is_punct(")")) {
      while (true) {
        Param p;
        p.type = parse_type();
        p.name = expect_identifier("parameter name");
        out.push_back(std::move(p));
        if (!peek().is_punct(",")) break;
        advance();
      }
    }
    expect_punct(")");
  }

  // ---- statements ----------------------------------------------------------

  std::vector<StmtPtr> parse_block_stmts() {
    expect_punct("{");
    std::vector<StmtPtr> out;
    while (!peek().is_punct("}")) {
      if (at_end()) err("expected '}'", peek());
      out.push_back(parse_statement(/*allow_static=*/false));
    }
    expect_punct("}");
    return out;
  }

  StmtPtr parse_statement(bool allow_static) {
    const Token& t = peek();
    if (t.is_keyword("static")) {
      if (!allow_static)
        fail(ErrorKind::Parse, "'static' is only allowed at top level", t.line,
             t.column);
      advance();
      return parse_var_decl(/*is_static=*/true);
    }
    if (t.is_keyword("if")) return parse_if();
    if (t.is_keyword("while")) return parse_while();
    if (t.is_punct("{")) {
      auto s = std::make_unique<Stmt>(StmtKind::Block);
      s->line = t.line;
      s->column = t.column;
      s->stmts = parse_block_stmts();
      return s;
    }
    if (looks_like_decl()) return parse_var_decl(/*is_static=*/false);
    auto s = std::make_unique<Stmt>(StmtKind::ExprStmt);
    s->line = t.line;
    s->column = t.column;
    s->expr = parse_expr();
    expect_punct(";");
    return s;
  }

  StmtPtr parse_if() {
    auto s = std::make_unique<Stmt>(StmtKind::If);
    const Token& kw = expect_keyword("if");
    s->line = kw.line;
    s->column = kw.column;
    expect_punct("(");
    s->expr = parse_expr();
    expect_punct(")");
    s->body = parse_statement(false);
    if (peek().is_keyword("else")) {
      advance();
      s->else_body = parse_statement(false);
    }
    return s;
  }

  StmtPtr parse_while() {
    auto s = std::make_unique<Stmt>(StmtKind::While);
    const Token& kw = expect_keyword("while");
    s->line = kw.line;
    s->column = kw.column;
    expect_punct("(");
    s->expr = parse_expr();
    expect_punct(")");
    s->body = parse_statement(false);
    return s;
  }

  // ---- expressions ----------------------------------------------------------
  // Binding, loosest first:  =  :  comparisons  + -  * /  unary -  postfix .

  std::vector<ExprPtr> parse_args() {
    std::vector<ExprPtr> args;
    if (!peek().is_punct(")")) {
      while (true) {
        args.push_back(parse_expr());
        if (!peek().is_punct(",")) break;
        advance();
      }
    }
    expect_punct(")");
    return args;
  }

  ExprPtr parse_expr() { return parse_assign(); }

  ExprPtr parse_assign() {
    ExprPtr lhs = parse_colon();
    if (peek().is_punct("=")) {
      const Token& eq = advance();
      auto e = std::make_unique<Expr>(ExprKind::Assign);
      e->line = eq.line;
      e->column = eq.column;
      e->lhs = std::move(lhs);
      e->rhs = parse_assign();
      return e;
    }
    return lhs;
  }

  ExprPtr parse_colon() {
    ExprPtr lhs = parse_compare();
    if (peek().is_punct(":")) {
      const Token& c = advance();
      auto e = std::make_unique<Expr>(ExprKind::Colon);
      e->line = c.line;
      e->column = c.column;
      e->lhs = std::move(lhs);
      e->rhs = parse_colon();  // right-associative
      return e;
    }
    return lhs;
  }

  ExprPtr parse_compare() {
    ExprPtr lhs = parse_additive();
    while (true) {
      BinaryOp op;
      if (peek().is_punct("==")) op = BinaryOp::Eq;
      else if (peek().is_punct("!=")) op = BinaryOp::Ne;
      else if (peek().is_punct("<")) op = BinaryOp::Lt;
      else if (peek().is_punct(">")) op = BinaryOp::Gt;
      else if (peek().is_punct("<=")) op = BinaryOp::Le;
      else if (peek().is_punct(">=")) op = BinaryOp::Ge;
      else return lhs;
      const Token& t = advance();
      auto e = std::make_unique<Expr>(ExprKind::Binary);
      e->line = t.line;
      e->column = t.column;
      e->bin_op = op;
      e->lhs = std::move(lhs);
      e->rhs = parse_additive();
      lhs = std::move(e);
    }
  }

  ExprPtr parse_additive() {
    ExprPtr lhs = parse_multiplicative();
    while (peek().is_punct("+") || peek().is_punct("-")) {
      const Token& t = advance();
      auto e = std::make_unique<Expr>(ExprKind::Binary);
      e->line = t.line;
      e->column = t.column;
      e->bin_op = t.lexeme == "+" ? BinaryOp::Add : BinaryOp::Sub;
      e->lhs = std::move(lhs);
      e->rhs = parse_multiplicative();
      lhs = std::move(e);
    }
    return lhs;
  }

  ExprPtr parse_multiplicative() {
    ExprPtr lhs = parse_unary();
    while (peek().is_punct("*") || peek().is_punct("/")) {
      const Token& t = advance();
      auto e = std::make_unique<Expr>(ExprKind::Binary);
      e->line = t.line;
      e->column = t.column;
      e->bin_op = t.lexeme == "*" ? BinaryOp::Mul : BinaryOp::Div;
      e->lhs = std::move(lhs);
      e->rhs = parse_unary();
      lhs = std::move(e);
    }
    return lhs;
  }

  ExprPtr parse_unary() {
    if (peek().is_punct("-")) {
      const Token& t = advance();
      auto e = std::make_unique<Expr>(ExprKind::Unary);
      e->line = t.line;
      e->column = t.column;
      e->lhs = parse_unary();
      return e;
    }
    return parse_postfix();
  }

  ExprPtr parse_postfix() {
    ExprPtr e = parse_primary();
    while (true) {
      if (peek().is_punct(".")) {
        advance();
        if (!is_member_name(peek())) err("expected member name after '.'", peek());
        const Token& nameTok = advance();
        auto m = std::make_unique<Expr>(ExprKind::Member);
        m->line = nameTok.line;
        m->column = nameTok.column;
        m->text = nameTok.lexeme;
        m->lhs = std::move(e);
        if (peek().is_punct("(")) {
          advance();
          auto call = std::make_unique<Expr>(ExprKind::Call);
          call->line = m->line;
          call->column = m->column;
          call->args = parse_args();
          call->lhs = std::move(m);
          e = std::move(call);
        } else {
          e = std::move(m);
        }
        continue;
      }
      if (peek().is_punct("(") && e->kind == ExprKind::Name) {
        advance();
        auto call = std::make_unique<Expr>(ExprKind::Call);
        call->line = e->line;
        call->column = e->column;
        call->args = parse_args();
        call->lhs = std::move(e);
        e = std::move(call);
        continue;
      }
      return e;
    }
  }

  static bool is_type_op_name(std::string_view s) {
    return s == "conceptof" || s == "instanceof" || s == "contextof" ||
           s == "context";
  }
  static TypeOpKind type_op_kind(std::string_view s) {
    if (s == "conceptof") return TypeOpKind::DeclaredConcept;
    if (s == "context") return TypeOpKind::DeclaredContext;
    if (s == "instanceof") return TypeOpKind::RealConcept;
    return TypeOpKind::RealContext;
  }

  ExprPtr parse_primary() {
    const Token& t = peek();
    switch (t.kind) {
      case TokenKind::Integer: {
        advance();
        auto e = std::make_unique<Expr>(ExprKind::IntLit);
        e->line = t.line;
        e->column = t.column;
        e->int_value = std::stoll(t.lexeme);
        return e;
      }
      case TokenKind::Float: {
        advance();
        auto e = std::make_unique<Expr>(ExprKind::FloatLit);
        e->line = t.line;
        e->column = t.column;
        e->float_value = std::stod(t.lexeme);
        return e;
      }
      case TokenKind::String: {
        advance();
        auto e = std::make_unique<Expr>(ExprKind::StringLit);
        e->line = t.line;
        e->column = t.column;
        e->text = t.text;
        return e;
      }
      case TokenKind::Punct:
        if (t.is_punct("(")) {
          advance();
          ExprPtr inner = parse_expr();
          expect_punct(")");
          return inner;
        }
        break;
      case TokenKind::Keyword: {
        if (t.is_keyword("true") || t.is_keyword("false")) {
          advance();
          auto e = std::make_unique<Expr>(ExprKind::BoolLit);
          e->line = t.line;
          e->column = t.column;
          e->bool_value = t.lexeme == "true";
          return e;
        }
        if (t.is_keyword("null")) {
          advance();
          auto e = std::make_unique<Expr>(ExprKind::NullLit);
          e->line = t.line;
          e->column = t.column;
          return e;
        }
        if (t.is_keyword("new")) {
          advance();
          auto e = std::make_unique<Expr>(ExprKind::New);
          e->line = t.line;
          e->column = t.column;
          if (peek().is_keyword("Map")) {
            advance();
            e->text = "Map";
          } else {
            e->text = expect_identifier("concept name after 'new'");
          }
          expect_punct("(");
          e->args = parse_args();
          return e;
        }
        if (t.is_keyword("return")) {
          advance();
          auto e = std::make_unique<Expr>(ExprKind::ReturnSlot);
          e->line = t.line;
          e->column = t.column;
          return e;
        }
        if (t.is_keyword("continue") && peek(1).is_punct("(")) {
          advance();
          advance();
          expect_punct(")");
          auto e = std::make_unique<Expr>(ExprKind::BareContinue);
          e->line = t.line;
          e->column = t.column;
          return e;
        }
        if (t.is_keyword("concept") && peek(1).is_punct("(")) {
          advance();
          advance();
          auto e = std::make_unique<Expr>(ExprKind::TypeOp);
          e->line = t.line;
          e->column = t.column;
          e->type_op = TypeOpKind::DeclaredConcept;
          e->lhs = parse_expr();
          expect_punct(")");
          return e;
        }
        auto qual_of = [](const Token& tok) -> std::optional<Qualifier> {
          if (tok.is_keyword("this")) return Qualifier::This;
          if (tok.is_keyword("reference")) return Qualifier::Reference;
          if (tok.is_keyword("object")) return Qualifier::Object;
          if (tok.is_keyword("super")) return Qualifier::Super;
          if (tok.is_keyword("sub")) return Qualifier::Sub;
          return std::nullopt;
        };
        if (auto q = qual_of(t)) {
          advance();
          auto e = std::make_unique<Expr>(ExprKind::Qualifier);
          e->line = t.line;
          e->column = t.column;
          e->qual = *q;
          return e;
        }
        break;
      }
      case TokenKind::Identifier: {
        if (is_type_op_name(t.lexeme) && peek(1).is_punct("(")) {
          advance();
          advance();
          auto e = std::make_unique<Expr>(ExprKind::TypeOp);
          e->line = t.line;
          e->column = t.column;
          e->type_op = type_op_kind(t.lexeme);
          e->lhs = parse_expr();
          expect_punct(")");
          return e;
        }
        advance();
        auto e = std::make_unique<Expr>(ExprKind::Name);
        e->line = t.line;
        e->column = t.column;
        e->text = t.lexeme;
        return e;
      }
      default:
        break;
    }
    err("expected an expression", t);
  }
};

}  // namespace detail

inline Program parse_program(std::vector<Token> tokens) {
  return detail::Parser(std::move(tokens)).parse_program();
}

inline Program parse_program(std::string_view source) {
  return parse_program(tokenize(source));
}

// Parses exactly one expression; used by the REPL and by tests.
inline ExprPtr parse_expression(std::string_view source) {
  return detail::Parser(tokenize(source)).parse_single_expression();
}

}  // namespace copri
