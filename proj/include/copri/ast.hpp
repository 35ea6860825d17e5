#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace copri {

// A declared type: optional context concept before the colon, then a concept
// or builtin name. char carries an optional length that only matters for
// diagnostics.
struct TypeExpr {
  std::string context_name;  // empty when unrestricted (Root for concepts)
  std::string name;
  bool is_builtin = false;
  int char_len = -1;
  int line = 0;
  int column = 0;

  bool is_void() const { return name == "void"; }
};

enum class ExprKind {
  IntLit,
  FloatLit,
  StringLit,
  BoolLit,
  NullLit,
  Name,          // plain identifier
  ReturnSlot,    // the special 'return' variable
  Qualifier,     // bare this / reference / object / super / sub
  Member,        // base.name
  Call,          // callee(args); callee is Name or Member
  BareContinue,  // continue()
  New,           // new Concept(args)
  TypeOp,        // concept/conceptof/context/instanceof/contextof (arg)
  Colon,         // lhs : rhs
  Assign,        // target = value
  Binary,
  Unary,         // -operand
};

enum class Qualifier { This, Reference, Object, Super, Sub };

enum class BinaryOp { Add, Sub, Mul, Div, Eq, Ne, Lt, Gt, Le, Ge };

enum class TypeOpKind {
  DeclaredConcept,  // concept(x), conceptof(x)
  DeclaredContext,  // context(x)
  RealConcept,      // instanceof(x)
  RealContext,      // contextof(x)
};

struct Expr;
using ExprPtr = std::unique_ptr<Expr>;

struct Expr {
  ExprKind kind;
  int line = 0;
  int column = 0;

  // literal payloads
  long long int_value = 0;
  double float_value = 0.0;
  bool bool_value = false;
  std::string text;  // string literal value / identifier / member name

  Qualifier qual = Qualifier::This;
  BinaryOp bin_op = BinaryOp::Add;
  TypeOpKind type_op = TypeOpKind::DeclaredConcept;

  ExprPtr lhs;  // base / target / operand
  ExprPtr rhs;  // value / rhs
  std::vector<ExprPtr> args;

  explicit Expr(ExprKind k) : kind(k) {}
};

enum class StmtKind { VarDecl, ExprStmt, If, While, Block };

struct Stmt;
using StmtPtr = std::unique_ptr<Stmt>;

struct Stmt {
  StmtKind kind;
  int line = 0;
  int column = 0;

  // VarDecl
  TypeExpr type;
  std::string name;
  ExprPtr init;
  bool is_static = false;
  bool is_create = false;                // `T name.create(args);`
  std::vector<ExprPtr> create_args;

  // ExprStmt / If / While
  ExprPtr expr;               // expression or condition
  StmtPtr body;               // then-branch / loop body
  StmtPtr else_body;
  std::vector<StmtPtr> stmts; // Block

  explicit Stmt(StmtKind k) : kind(k) {}
};

struct Param {
  TypeExpr type;
  std::string name;
};

struct MethodDecl {
  std::string name;
  bool returns_void = false;
  TypeExpr ret;
  std::vector<Param> params;
  std::vector<StmtPtr> body;
  int line = 0;
  int column = 0;
};

struct FieldDecl {
  TypeExpr type;
  std::string name;
  ExprPtr init;
  int line = 0;
  int column = 0;
};

struct ClassBody {
  std::vector<FieldDecl> fields;
  std::vector<MethodDecl> methods;
};

struct ConceptDecl {
  std::string name;
  std::string parent;  // empty = Root
  ClassBody ref_class;
  ClassBody obj_class;
  int line = 0;
  int column = 0;
};

// Top-level items keep their source order for execution.
enum class TopItemKind { Concept, Function, Statement };

struct TopItem {
  TopItemKind kind;
  std::size_t index;
};

struct Program {
  std::vector<ConceptDecl> concepts;
  std::vector<MethodDecl> functions;
  std::vector<StmtPtr> statements;
  std::vector<TopItem> items;
};

}  // namespace copri
