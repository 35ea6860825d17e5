#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "copri/ast.hpp"
#include "copri/diagnostics.hpp"

namespace copri {

inline constexpr std::string_view kRootName = "Root";

struct ConceptInfo {
  std::string name;
  std::string parent;  // "" = Root
  const ConceptDecl* decl = nullptr;
  int depth = 0;  // direct children of Root have depth 1
};

// Registry of declared concepts plus the inclusion queries everything else
// is built on. "" and "Root" both mean the universal top concept.
class ConceptTable {
 public:
  void build(const Program& prog) {
    concepts_.clear();
    for (const ConceptDecl& decl : prog.concepts) {
      if (decl.name == kRootName)
        fail(ErrorKind::Sema, "'Root' is reserved and cannot be declared",
             decl.line, decl.column);
      if (concepts_.count(decl.name))
        fail(ErrorKind::Sema, "duplicate concept '" + decl.name + "'", decl.line,
             decl.column);
      ConceptInfo info;
      info.name = decl.name;
      info.parent = decl.parent == kRootName ? "" : decl.parent;
      info.decl = &decl;
      concepts_.emplace(decl.name, std::move(info));
    }
    for (auto& [name, info] : concepts_) {
      if (!info.parent.empty() && !concepts_.count(info.parent))
        fail(ErrorKind::Sema,
             "unknown parent concept '" + info.parent + "' of '" + name + "'",
             info.decl->line, info.decl->column);
      check_members(info.decl->ref_class, name, "reference");
      check_members(info.decl->obj_class, name, "object");
    }
    compute_depths();
    check_program_types(prog);
  }

  bool is_root(std::string_view name) const { return name.empty() || name == kRootName; }

  const ConceptInfo* find(std::string_view name) const {
    auto it = concepts_.find(std::string(name));
    return it == concepts_.end() ? nullptr : &it->second;
  }

  const ConceptInfo& require(std::string_view name, int line = 0, int column = 0) const {
    const ConceptInfo* info = find(name);
    if (!info)
      fail(ErrorKind::Sema, "unknown concept '" + std::string(name) + "'", line, column);
    return *info;
  }

  // Chain of concepts from the top (direct child of Root) down to `name`.
  std::vector<std::string> lineage(std::string_view name) const {
    std::vector<std::string> chain;
    std::string cur(name);
    while (!is_root(cur)) {
      chain.push_back(cur);
      cur = require(cur).parent;
    }
    std::reverse(chain.begin(), chain.end());
    return chain;
  }

  // True when `inner` sits strictly below `outer` in the inclusion tree.
  bool is_strictly_included(std::string_view inner, std::string_view outer) const {
    if (is_root(inner)) return false;
    if (is_root(outer)) return true;
    std::string cur = require(inner).parent;
    while (!cur.empty()) {
      if (cur == outer) return true;
      cur = require(cur).parent;
    }
    return false;
  }

  bool is_included(std::string_view inner, std::string_view outer) const {
    if (is_root(outer)) return true;
    return inner == outer || is_strictly_included(inner, outer);
  }

  int depth_of(std::string_view name) const {
    return is_root(name) ? 0 : require(name).depth;
  }

  // ---- member lookup -------------------------------------------------------

  const FieldDecl* ref_field(std::string_view cname, std::string_view field) const {
    return find_field(require(cname).decl->ref_class, field);
  }
  const FieldDecl* obj_field(std::string_view cname, std::string_view field) const {
    return find_field(require(cname).decl->obj_class, field);
  }

  // Plain methods are unique per name; create is overloaded by arity.
  const MethodDecl* ref_method(std::string_view cname, std::string_view m) const {
    return find_method(require(cname).decl->ref_class, m);
  }
  const MethodDecl* obj_method(std::string_view cname, std::string_view m) const {
    return find_method(require(cname).decl->obj_class, m);
  }
  const MethodDecl* ref_create(std::string_view cname, std::size_t arity) const {
    return find_create(require(cname).decl->ref_class, arity);
  }
  const MethodDecl* obj_create(std::string_view cname, std::size_t arity) const {
    return find_create(require(cname).decl->obj_class, arity);
  }
  bool has_create(std::string_view cname) const {
    const ConceptDecl* d = require(cname).decl;
    return find_method(d->ref_class, "create") || find_method(d->obj_class, "create");
  }

  bool has_custom_continue(std::string_view cname) const {
    return ref_method(cname, "continue") != nullptr;
  }

  // A method name is known on a concept when either side declares it.
  bool declares_method(std::string_view cname, std::string_view m) const {
    const ConceptDecl* d = require(cname).decl;
    return find_method(d->ref_class, m) || find_method(d->obj_class, m);
  }

  std::vector<std::string> names() const {
    std::vector<std::string> out;
    for (const auto& [name, info] : concepts_) out.push_back(name);
    return out;
  }

 private:
  static const FieldDecl* find_field(const ClassBody& body, std::string_view name) {
    for (const FieldDecl& f : body.fields)
      if (f.name == name) return &f;
    return nullptr;
  }
  static const MethodDecl* find_method(const ClassBody& body, std::string_view name) {
    for (const MethodDecl& m : body.methods)
      if (m.name == name) return &m;
    return nullptr;
  }
  static const MethodDecl* find_create(const ClassBody& body, std::size_t arity) {
    for (const MethodDecl& m : body.methods)
      if (m.name == "create" && m.params.size() == arity) return &m;
    return nullptr;
  }

  void check_members(const ClassBody& body, const std::string& cname,
                     const char* side) const {
    std::set<std::string> field_names;
    for (const FieldDecl& f : body.fields) {
      if (!field_names.insert(f.name).second)
        fail(ErrorKind::Sema,
             "duplicate field '" + f.name + "' in " + side + " class of '" + cname + "'",
             f.line, f.column);
    }
    std::set<std::string> method_names;
    std::set<std::size_t> create_arities;
    for (const MethodDecl& m : body.methods) {
      if (field_names.count(m.name))
        fail(ErrorKind::Sema,
             "'" + m.name + "' is both a field and a method in " + side +
                 " class of '" + cname + "'",
             m.line, m.column);
      if (m.name == "create") {
        if (!create_arities.insert(m.params.size()).second)
          fail(ErrorKind::Sema,
               "duplicate create overload in " + std::string(side) + " class of '" +
                   cname + "'",
               m.line, m.column);
        continue;
      }
      if (!method_names.insert(m.name).second)
        fail(ErrorKind::Sema,
             "duplicate method '" + m.name + "' in " + side + " class of '" + cname + "'",
             m.line, m.column);
      if (m.name == "continue" && !m.params.empty())
        fail(ErrorKind::Sema, "continue takes no parameters", m.line, m.column);
    }
  }

  void compute_depths() {
    for (auto& [name, info] : concepts_) {
      int d = 0;
      std::string cur = name;
      std::set<std::string> seen;
      while (!cur.empty()) {
        if (!seen.insert(cur).second)
          fail(ErrorKind::Sema, "inclusion cycle through concept '" + name + "'",
               info.decl->line, info.decl->column);
        ++d;
        cur = require(cur).parent;
      }
      info.depth = d;
    }
  }

  // ---- whole-program type references ---------------------------------------

  void check_type(const TypeExpr& ty) const {
    if (!ty.context_name.empty() && !concepts_.count(ty.context_name) &&
        ty.context_name != kRootName)
      fail(ErrorKind::Sema, "unknown concept '" + ty.context_name + "' used as context",
           ty.line, ty.column);
    if (!ty.is_builtin && !ty.name.empty() && !concepts_.count(ty.name))
      fail(ErrorKind::Sema, "unknown concept '" + ty.name + "'", ty.line, ty.column);
    if (!ty.context_name.empty() && ty.is_builtin)
      fail(ErrorKind::Sema, "a built-in type cannot have a context", ty.line, ty.column);
  }

  void check_expr(const Expr& e) const {
    if (e.kind == ExprKind::New && e.text != "Map" && !concepts_.count(e.text))
      fail(ErrorKind::Sema, "unknown concept '" + e.text + "' in new", e.line, e.column);
    if (e.lhs) check_expr(*e.lhs);
    if (e.rhs) check_expr(*e.rhs);
    for (const ExprPtr& a : e.args) check_expr(*a);
  }

  void check_stmt(const Stmt& s) const {
    switch (s.kind) {
      case StmtKind::VarDecl:
        check_type(s.type);
        if (s.init) check_expr(*s.init);
        for (const ExprPtr& a : s.create_args) check_expr(*a);
        break;
      case StmtKind::ExprStmt:
        check_expr(*s.expr);
        break;
      case StmtKind::If:
        check_expr(*s.expr);
        check_stmt(*s.body);
        if (s.else_body) check_stmt(*s.else_body);
        break;
      case StmtKind::While:
        check_expr(*s.expr);
        check_stmt(*s.body);
        break;
      case StmtKind::Block:
        for (const StmtPtr& inner : s.stmts) check_stmt(*inner);
        break;
    }
  }

  void check_method(const MethodDecl& m) const {
    if (!m.returns_void && !m.ret.name.empty()) check_type(m.ret);
    for (const Param& p : m.params) check_type(p.type);
    for (const StmtPtr& s : m.body) check_stmt(*s);
  }

  void check_program_types(const Program& prog) const {
    for (const ConceptDecl& c : prog.concepts) {
      for (const FieldDecl& f : c.ref_class.fields) {
        check_type(f.type);
        if (f.init) check_expr(*f.init);
      }
      for (const FieldDecl& f : c.obj_class.fields) {
        check_type(f.type);
        if (f.init) check_expr(*f.init);
      }
      for (const MethodDecl& m : c.ref_class.methods) check_method(m);
      for (const MethodDecl& m : c.obj_class.methods) check_method(m);
    }
    for (const MethodDecl& fn : prog.functions) check_method(fn);
    for (const StmtPtr& s : prog.statements) check_stmt(*s);
  }

  std::map<std::string, ConceptInfo> concepts_;
};

}  // namespace copri
