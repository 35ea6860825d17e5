#pragma once

#include <charconv>
#include <string>

#include "copri/ast.hpp"

namespace copri {

// Canonical source renderer. Parenthesizes every nested compound expression,
// so print(parse(print(parse(s)))) == print(parse(s)) holds for legal s.
class AstPrinter {
 public:
  std::string print(const Program& prog) {
    out_.clear();
    for (const TopItem& item : prog.items) {
      switch (item.kind) {
        case TopItemKind::Concept: print_concept(prog.concepts[item.index]); break;
        case TopItemKind::Function: print_method(prog.functions[item.index], 0); break;
        case TopItemKind::Statement: print_stmt(*prog.statements[item.index], 0); break;
      }
    }
    return out_;
  }

  std::string print(const Expr& e) {
    out_.clear();
    expr(e);
    return out_;
  }

 private:
  std::string out_;

  void indent(int depth) { out_.append(static_cast<std::size_t>(depth) * 2, ' '); }

  static std::string float_text(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    std::string s(buf, end);
    if (s.find('.') == std::string::npos && s.find('e') == std::string::npos &&
        s.find("inf") == std::string::npos && s.find("nan") == std::string::npos)
      s += ".0";
    return s;
  }

  static std::string escape(const std::string& s) {
    std::string r = "\"";
    for (char c : s) {
      switch (c) {
        case '\n': r += "\\n"; break;
        case '\t': r += "\\t"; break;
        case '"': r += "\\\""; break;
        case '\\': r += "\\\\"; break;
        default: r += c;
      }
    }
    r += '"';
    return r;
  }

  void type(const TypeExpr& ty) {
    if (!ty.context_name.empty()) {
      out_ += ty.context_name;
      out_ += " : ";
    }
    out_ += ty.name;
    if (ty.char_len >= 0) {
      out_ += '[';
      out_ += std::to_string(ty.char_len);
      out_ += ']';
    }
  }

  void print_concept(const ConceptDecl& c) {
    out_ += "concept ";
    out_ += c.name;
    if (!c.parent.empty()) {
      out_ += " in ";
      out_ += c.parent;
    }
    out_ += " reference {\n";
    class_body(c.ref_class);
    out_ += "} object {\n";
    class_body(c.obj_class);
    out_ += "}\n";
  }

  void class_body(const ClassBody& body) {
    for (const FieldDecl& f : body.fields) {
      indent(1);
      type(f.type);
      out_ += ' ';
      out_ += f.name;
      if (f.init) {
        out_ += " = ";
        expr(*f.init);
      }
      out_ += ";\n";
    }
    for (const MethodDecl& m : body.methods) print_method(m, 1);
  }

  void print_method(const MethodDecl& m, int depth) {
    indent(depth);
    if (m.returns_void)
      out_ += "void";
    else
      type(m.ret);
    out_ += ' ';
    out_ += m.name;
    out_ += '(';
    bool first = true;
    for (const Param& p : m.params) {
      if (!first) out_ += ", ";
      first = false;
      type(p.type);
      out_ += ' ';
      out_ += p.name;
    }
    out_ += ") {\n";
    for (const StmtPtr& s : m.body) print_stmt(*s, depth + 1);
    indent(depth);
    out_ += "}\n";
  }

  void print_stmt(const Stmt& s, int depth) {
    indent(depth);
    switch (s.kind) {
      case StmtKind::VarDecl:
        if (s.is_static) out_ += "static ";
        type(s.type);
        out_ += ' ';
        out_ += s.name;
        if (s.is_create) {
          out_ += ".create(";
          bool first = true;
          for (const ExprPtr& a : s.create_args) {
            if (!first) out_ += ", ";
            first = false;
            expr(*a);
          }
          out_ += ')';
        } else if (s.init) {
          out_ += " = ";
          expr(*s.init);
        }
        out_ += ";\n";
        break;
      case StmtKind::ExprStmt:
        expr(*s.expr);
        out_ += ";\n";
        break;
      case StmtKind::If:
        out_ += "if (";
        expr(*s.expr);
        out_ += ")\n";
        print_stmt(*s.body, depth + 1);
        if (s.else_body) {
          indent(depth);
          out_ += "else\n";
          print_stmt(*s.else_body, depth + 1);
        }
        break;
      case StmtKind::While:
        out_ += "while (";
        expr(*s.expr);
        out_ += ")\n";
        print_stmt(*s.body, depth + 1);
        break;
      case StmtKind::Block:
        out_ += "{\n";
        for (const StmtPtr& inner : s.stmts) print_stmt(*inner, depth + 1);
        indent(depth);
        out_ += "}\n";
        break;
    }
  }

  static bool is_atom(const Expr& e) {
    switch (e.kind) {
      case ExprKind::Assign:
      case ExprKind::Binary:
      case ExprKind::Colon:
      case ExprKind::Unary:
        return false;
      default:
        return true;
    }
  }

  void sub_expr(const Expr& e) {
    if (is_atom(e)) {
      expr(e);
    } else {
      out_ += '(';
      expr(e);
      out_ += ')';
    }
  }

  void expr(const Expr& e) {
    switch (e.kind) {
      case ExprKind::IntLit: out_ += std::to_string(e.int_value); break;
      case ExprKind::FloatLit: out_ += float_text(e.float_value); break;
      case ExprKind::StringLit: out_ += escape(e.text); break;
      case ExprKind::BoolLit: out_ += e.bool_value ? "true" : "false"; break;
      case ExprKind::NullLit: out_ += "null"; break;
      case ExprKind::Name: out_ += e.text; break;
      case ExprKind::ReturnSlot: out_ += "return"; break;
      case ExprKind::Qualifier:
        switch (e.qual) {
          case Qualifier::This: out_ += "this"; break;
          case Qualifier::Reference: out_ += "reference"; break;
          case Qualifier::Object: out_ += "object"; break;
          case Qualifier::Super: out_ += "super"; break;
          case Qualifier::Sub: out_ += "sub"; break;
        }
        break;
      case ExprKind::Member:
        sub_expr(*e.lhs);
        out_ += '.';
        out_ += e.text;
        break;
      case ExprKind::Call: {
        sub_expr(*e.lhs);
        out_ += '(';
        bool first = true;
        for (const ExprPtr& a : e.args) {
          if (!first) out_ += ", ";
          first = false;
          expr(*a);
        }
        out_ += ')';
        break;
      }
      case ExprKind::BareContinue: out_ += "continue()"; break;
      case ExprKind::New: {
        out_ += "new ";
        out_ += e.text;
        out_ += '(';
        bool first = true;
        for (const ExprPtr& a : e.args) {
          if (!first) out_ += ", ";
          first = false;
          expr(*a);
        }
        out_ += ')';
        break;
      }
      case ExprKind::TypeOp:
        switch (e.type_op) {
          case TypeOpKind::DeclaredConcept: out_ += "concept"; break;
          case TypeOpKind::DeclaredContext: out_ += "context"; break;
          case TypeOpKind::RealConcept: out_ += "instanceof"; break;
          case TypeOpKind::RealContext: out_ += "contextof"; break;
        }
        out_ += '(';
        expr(*e.lhs);
        out_ += ')';
        break;
      case ExprKind::Colon:
        sub_expr(*e.lhs);
        out_ += " : ";
        sub_expr(*e.rhs);
        break;
      case ExprKind::Assign:
        sub_expr(*e.lhs);
        out_ += " = ";
        sub_expr(*e.rhs);
        break;
      case ExprKind::Binary: {
        sub_expr(*e.lhs);
        const char* op = "";
        switch (e.bin_op) {
          case BinaryOp::Add: op = " + "; break;
          case BinaryOp::Sub: op = " - "; break;
          case BinaryOp::Mul: op = " * "; break;
          case BinaryOp::Div: op = " / "; break;
          case BinaryOp::Eq: op = " == "; break;
          case BinaryOp::Ne: op = " != "; break;
          case BinaryOp::Lt: op = " < "; break;
          case BinaryOp::Gt: op = " > "; break;
          case BinaryOp::Le: op = " <= "; break;
          case BinaryOp::Ge: op = " >= "; break;
        }
        out_ += op;
        sub_expr(*e.rhs);
        break;
      }
      case ExprKind::Unary:
        out_ += '-';
        sub_expr(*e.lhs);
        break;
    }
  }
};

inline std::string print_source(const Program& prog) { return AstPrinter().print(prog); }

}  // namespace copri
