#pragma once

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "copri/ast.hpp"
#include "copri/concept_table.hpp"
#include "copri/context_stack.hpp"
#include "copri/diagnostics.hpp"
#include "copri/object_store.hpp"
#include "copri/refops.hpp"
#include "copri/trace.hpp"
#include "copri/value.hpp"

namespace copri {

inline std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

inline std::string format_for_print(const Value& v, int line = 0, int column = 0) {
  switch (v.kind()) {
    case ValueKind::Text: return v.as_text();
    case ValueKind::Int: return std::to_string(v.as_int());
    case ValueKind::Double: return format_double(v.as_double());
    case ValueKind::Bool: return v.as_bool() ? "true" : "false";
    case ValueKind::Concept: return v.concept_value();
    default:
      fail(ErrorKind::Print,
           std::string("cannot print a ") + value_kind_name(v.kind()) + " value", line,
           column);
  }
}

class Interpreter {
 public:
  explicit Interpreter(Program& prog) : prog_(&prog) {
    output_ = [](std::string_view s) { std::fwrite(s.data(), 1, s.size(), stdout); };
    reload();
  }

  Interpreter(const Interpreter&) = delete;
  Interpreter& operator=(const Interpreter&) = delete;

  // Re-reads concept/function declarations from the program; used after the
  // REPL appends new top-level items.
  void reload() { table_.build(*prog_); }

  // Drops not-yet-executed top-level items after a failed chunk.
  void skip_pending() { cursor_ = prog_->items.size(); }

  void set_output(std::function<void(std::string_view)> fn) { output_ = std::move(fn); }
  void set_trace(TraceFn fn) { trace_ = std::move(fn); }

  // Executes top-level statements that have not run yet, in source order.
  void run() {
    Frame top;
    FrameGuard guard(*this, top);
    while (cursor_ < prog_->items.size()) {
      const TopItem& item = prog_->items[cursor_];
      ++cursor_;
      if (item.kind == TopItemKind::Statement)
        exec_stmt(*prog_->statements[item.index], top);
    }
  }

  // ---- introspection / embedding --------------------------------------------

  const ConceptTable& concepts() const { return table_; }
  ObjectStore& store() { return store_; }
  MapStore& maps() { return maps_; }

  const Value* global(const std::string& name) const {
    auto it = globals_.find(name);
    return it == globals_.end() ? nullptr : &it->second.value;
  }
  void set_global(const std::string& name, TypeExpr type, Value v) {
    globals_[name] = VarSlot{std::move(type), std::move(v)};
  }

  Value call_function(const std::string& name, const std::vector<Value>& args) {
    Frame top;
    FrameGuard guard(*this, top);
    const MethodDecl* fn = find_function(name);
    if (!fn) fail(ErrorKind::UnknownMethod, "unknown function '" + name + "'");
    return exec_method(nullptr, 0, Side::RefSide, *fn, 0, Proto::None, args, 0, 0);
  }

  Value eval_expression(const Expr& e) {
    Frame top;
    FrameGuard guard(*this, top);
    return eval(e, top);
  }

  void exec_top_statement(const Stmt& s) {
    Frame top;
    FrameGuard guard(*this, top);
    exec_stmt(s, top);
  }

  // Invokes a method access on a reference the caller owns.
  Value run_access(Ref& ref, const std::string& method, const std::vector<Value>& args) {
    Frame top;
    FrameGuard guard(*this, top);
    return apply_method(ref, method, args, 0, 0);
  }

  Ref create(const std::string& context, const std::string& concept_name,
             const std::vector<Value>& args = {}) {
    Frame top;
    FrameGuard guard(*this, top);
    return create_instance(context, concept_name, args, 0, 0);
  }

  void destroy(Ref& ref, const std::vector<Value>& args = {}) {
    Frame top;
    FrameGuard guard(*this, top);
    delete_instance(ref, args, 0, 0);
  }

  std::size_t frame_depth() const { return frames_.size(); }
  std::size_t access_depth() const { return access_stack_.size(); }

 private:
  enum class Side { RefSide, ObjSide };
  enum class Proto { None, Continue, Create, Delete };

  struct VarSlot {
    TypeExpr type;
    Value value;
  };

  struct PendingTarget {
    bool armed = false;
    bool consumed = false;
    std::function<Value()> action;
    Value result;
  };

  struct AccessState {
    Ref* ref = nullptr;
    Ref owned;
    std::string method;
    Proto proto = Proto::None;
    ContextStack stack;
    std::map<std::size_t, std::uint64_t> created;
    bool resolved = false;
    bool resolving = false;
    PendingTarget pending;
    int line = 0;
    int column = 0;

    std::size_t levels() const { return ref->segments.size(); }
    Segment& segment(std::size_t level) { return ref->segments[level - 1]; }
    const std::string& concept_at(std::size_t level) {
      return segment(level).concept_name;
    }
  };

  struct Frame {
    AccessState* access = nullptr;
    std::size_t level = 0;
    Side side = Side::RefSide;
    const MethodDecl* method = nullptr;
    std::uint64_t handle = 0;
    Proto frame_proto = Proto::None;
    std::vector<std::map<std::string, VarSlot>> scopes;
    Value ret = Value::void_value();
  };

  class FrameGuard {
   public:
    FrameGuard(Interpreter& in, Frame& f) : in_(in) {
      if (in_.frames_.size() > kMaxFrames)
        fail(ErrorKind::Runtime, "call nesting too deep");
      in_.frames_.push_back(&f);
    }
    ~FrameGuard() { in_.frames_.pop_back(); }

   private:
    // Each frame costs a few kB of native stack (more under sanitizers),
    // so this must stay small enough to trip before the process stack does.
    static constexpr std::size_t kMaxFrames = 512;
    Interpreter& in_;
  };

  class AccessGuard {
   public:
    AccessGuard(Interpreter& in, AccessState& acc) : in_(in), acc_(acc) {
      in_.access_stack_.push_back(&acc);
    }
    ~AccessGuard() {
      in_.access_stack_.pop_back();
      in_.emit(TraceKind::Pop, "", acc_.method, 0);
    }

   private:
    Interpreter& in_;
    AccessState& acc_;
  };

  class ScopeGuard {
   public:
    explicit ScopeGuard(Frame& f) : f_(f) { f_.scopes.emplace_back(); }
    ~ScopeGuard() { f_.scopes.pop_back(); }

   private:
    Frame& f_;
  };

  // ---- trace -----------------------------------------------------------------

  void emit(TraceKind kind, std::string concept_name, std::string method,
            std::size_t level) {
    if (trace_) trace_({kind, std::move(concept_name), std::move(method), level});
  }

  // ---- method access pipeline ------------------------------------------------

  Value apply_method(Ref& ref, const std::string& method, const std::vector<Value>& args,
                     int line, int column) {
    if (ref.segments.empty())
      fail(ErrorKind::MalformedReference, "reference has no levels", line, column);
    if (method == "continue" || method == "create" || method == "delete")
      fail(ErrorKind::IllegalQualifier,
           "'" + method + "' cannot be invoked as a plain method here", line, column);
    bool known = false;
    for (const Segment& seg : ref.segments)
      if (table_.declares_method(seg.concept_name, method)) known = true;
    if (!known)
      fail(ErrorKind::UnknownMethod,
           "no level of the reference declares '" + method + "'", line, column);

    AccessState acc;
    acc.ref = &ref;
    acc.method = method;
    acc.line = line;
    acc.column = column;
    AccessGuard guard(*this, acc);
    return run_reference_chain(acc, 1, args);
  }

  Value run_reference_chain(AccessState& acc, std::size_t i,
                            const std::vector<Value>& args) {
    const std::string& cname = acc.concept_at(i);
    emit(TraceKind::RefEnter, cname, acc.method, i);
    Value out;
    if (const MethodDecl* m = table_.ref_method(cname, acc.method))
      out = exec_method(&acc, i, Side::RefSide, *m, 0, Proto::None, args, acc.line,
                        acc.column);
    else
      out = sub_dispatch(acc, i, args);  // implicit: return = sub.<method>(args)
    emit(TraceKind::RefExit, cname, acc.method, i);
    return out;
  }

  Value sub_dispatch(AccessState& acc, std::size_t i, const std::vector<Value>& args) {
    if (i < acc.levels()) return run_reference_chain(acc, i + 1, args);
    bool any_object_side = false;
    for (const Segment& seg : acc.ref->segments)
      if (table_.obj_method(seg.concept_name, acc.method)) any_object_side = true;
    if (!any_object_side) return Value::void_value();
    return object_dispatch(acc, args, acc.line, acc.column);
  }

  Value object_dispatch(AccessState& acc, const std::vector<Value>& args, int line,
                        int column) {
    if (acc.resolved) return run_object_chain(acc, args, acc.levels(), line, column);
    if (acc.resolving)
      return run_object_chain(acc, args, acc.stack.depth(), line, column);
    std::vector<Value> copied = args;
    return resolve_then(
        acc,
        [this, &acc, copied, line, column] {
          return run_object_chain(acc, copied, acc.levels(), line, column);
        },
        line, column);
  }

  // Runs the continuation protocol once, executing `action` at the target.
  Value resolve_then(AccessState& acc, std::function<Value()> action, int line,
                     int column) {
    acc.proto = Proto::Continue;
    acc.resolving = true;
    acc.pending = PendingTarget{};
    acc.pending.armed = true;
    acc.pending.action = std::move(action);
    run_ref_continue(acc, 1, line, column);
    acc.resolving = false;
    if (!acc.pending.consumed)
      fail(ErrorKind::Resolution,
           "continuation ended before reaching level " +
               std::to_string(acc.stack.depth() + 1) + " of the reference",
           line, column);
    acc.resolved = true;
    Value out = std::move(acc.pending.result);
    acc.pending = PendingTarget{};
    return out;
  }

  void run_ref_continue(AccessState& acc, std::size_t i, int line, int column) {
    const std::string& cname = acc.concept_at(i);
    emit(TraceKind::Resolve, cname, "continue", i);
    if (const MethodDecl* m = table_.ref_method(cname, "continue")) {
      exec_method(&acc, i, Side::RefSide, *m, 0, Proto::Continue, {}, line, column);
      return;
    }
    const std::optional<std::uint64_t>& hidden = acc.segment(i).hidden;
    if (!hidden)
      fail(ErrorKind::Resolution,
           "level " + std::to_string(i) + " ('" + cname + "') has no stored object",
           line, column);
    continue_on_handle(acc, i, Value::handle(*hidden), line, column);
    if (i < acc.levels()) run_ref_continue(acc, i + 1, line, column);
  }

  // `o.continue()` inside a continue or create frame: records the object for
  // the frame's level and lets the object class take part.
  void continue_on_handle(AccessState& acc, std::size_t level, const Value& hv, int line,
                          int column) {
    if (hv.is_null())
      fail(ErrorKind::Resolution, "cannot continue with a null object", line, column);
    if (hv.kind() != ValueKind::Handle)
      fail(ErrorKind::Type, "continue needs an Object value", line, column);
    std::uint64_t h = hv.handle_id();
    ObjectRecord& rec = store_.live(h, line, column);
    const std::string& cname = acc.concept_at(level);
    if (rec.concept_name != cname)
      fail(ErrorKind::Resolution,
           "object is a '" + rec.concept_name + "' but level " + std::to_string(level) +
               " expects '" + cname + "'",
           line, column);
    if (acc.proto == Proto::Create) {
      if (acc.created.count(level))
        fail(ErrorKind::Runtime,
             "level " + std::to_string(level) + " already has an object", line, column);
      acc.created[level] = h;
      if (!table_.has_custom_continue(cname)) acc.segment(level).hidden = h;
    } else {
      acc.stack.push(level, h, line, column);
    }
    emit(TraceKind::Push, cname, acc.method, level);
    if (const MethodDecl* oc = table_.obj_method(cname, "continue"))
      exec_method(&acc, level, Side::ObjSide, *oc, h, acc.proto, {}, line, column);
    else if (acc.proto == Proto::Continue)
      bare_continue_core(acc, level, line, column);
  }

  // `continue()` inside an object-side continue method.
  void bare_continue_core(AccessState& acc, std::size_t level, int line, int column) {
    (void)line;
    (void)column;
    if (acc.proto != Proto::Continue) return;
    if (level != acc.levels()) return;
    if (!acc.pending.armed || acc.pending.consumed) return;
    acc.pending.consumed = true;
    emit(TraceKind::Target, "", acc.method, 0);
    acc.pending.result = acc.pending.action();
  }

  Value run_object_chain(AccessState& acc, const std::vector<Value>& args,
                         std::size_t limit, int line, int column) {
    for (std::size_t j = std::min(limit, acc.levels()); j >= 1; --j) {
      if (const MethodDecl* m = table_.obj_method(acc.concept_at(j), acc.method))
        return run_object_method(acc, j, *m, args, line, column);
    }
    fail(ErrorKind::EmptyStack,
         "object method '" + acc.method + "' is not reachable before resolution", line,
         column);
  }

  Value run_object_method(AccessState& acc, std::size_t level, const MethodDecl& m,
                          const std::vector<Value>& args, int line, int column) {
    std::uint64_t h = level_object(acc, level, line, column);
    const std::string& cname = acc.concept_at(level);
    emit(TraceKind::ObjEnter, cname, m.name, level);
    Value out =
        exec_method(&acc, level, Side::ObjSide, m, h, Proto::None, args, line, column);
    emit(TraceKind::ObjExit, cname, m.name, level);
    return out;
  }

  std::uint64_t level_object(AccessState& acc, std::size_t level, int line, int column) {
    if (acc.proto == Proto::Create) {
      auto it = acc.created.find(level);
      if (it == acc.created.end())
        fail(ErrorKind::EmptyStack,
             "no object created yet for level " + std::to_string(level), line, column);
      return it->second;
    }
    return acc.stack.handle_at(level, line, column);
  }

  std::optional<std::uint64_t> try_level_object(AccessState& acc, std::size_t level) {
    if (acc.proto == Proto::Create) {
      auto it = acc.created.find(level);
      return it == acc.created.end() ? std::nullopt
                                     : std::optional<std::uint64_t>(it->second);
    }
    if (acc.proto == Proto::Delete) return std::nullopt;
    if (acc.stack.has(level)) return acc.stack.handle_at(level);
    return std::nullopt;
  }

  bool limited_mode(const AccessState& acc) const {
    return acc.resolving || acc.proto == Proto::Create || acc.proto == Proto::Delete;
  }

  // ---- creation --------------------------------------------------------------

  Ref create_instance(const std::string& context, const std::string& concept_name,
                      const std::vector<Value>& args, int line, int column) {
    table_.require(concept_name, line, column);
    Ref ref = build_default_ref(table_, context, concept_name, line, column);
    for (Segment& seg : ref.segments) init_segment_fields(seg, line, column);

    AccessState acc;
    acc.ref = &ref;
    acc.method = "create";
    acc.proto = Proto::Create;
    acc.line = line;
    acc.column = column;
    AccessGuard guard(*this, acc);
    run_ref_create(acc, 1, args, line, column);
    return ref;
  }

  void init_segment_fields(Segment& seg, int line, int column) {
    const ConceptDecl* decl = table_.require(seg.concept_name).decl;
    for (const FieldDecl& f : decl->ref_class.fields) {
      if (!f.init) continue;
      Frame plain;
      FrameGuard guard(*this, plain);
      Value v = coerce_store(f.type, eval(*f.init, plain), f.line, f.column);
      set_segment_field(seg, f.name, std::move(v));
    }
    (void)line;
    (void)column;
  }

  void run_ref_create(AccessState& acc, std::size_t i, const std::vector<Value>& args,
                      int line, int column) {
    const std::string& cname = acc.concept_at(i);
    emit(TraceKind::RefEnter, cname, "create", i);
    if (const MethodDecl* m = table_.ref_create(cname, args.size())) {
      exec_method(&acc, i, Side::RefSide, *m, 0, Proto::Create, args, line, column);
    } else if (has_any_create(table_.require(cname).decl->ref_class)) {
      fail(ErrorKind::Arity,
           "no create overload of '" + cname + "' takes " + std::to_string(args.size()) +
               " arguments",
           line, column);
    } else {
      // Concepts that resolve through their own continue method manage their
      // object storage themselves; allocate only for default-continue levels.
      if (!table_.has_custom_continue(cname)) {
        std::uint64_t h = alloc_level_object(acc, i, args, line, column);
        acc.segment(i).hidden = h;
      }
      if (i < acc.levels()) run_ref_create(acc, i + 1, args, line, column);
    }
    emit(TraceKind::RefExit, cname, "create", i);
  }

  static bool has_any_create(const ClassBody& body) {
    for (const MethodDecl& m : body.methods)
      if (m.name == "create") return true;
    return false;
  }

  std::uint64_t alloc_level_object(AccessState& acc, std::size_t level,
                                   const std::vector<Value>& args, int line, int column) {
    const std::string& cname = acc.concept_at(level);
    const ConceptDecl* decl = table_.require(cname).decl;
    std::vector<FieldSlot> fields;
    for (const FieldDecl& f : decl->obj_class.fields) {
      Value v = default_value_for(f.type);
      if (f.init) {
        Frame plain;
        FrameGuard guard(*this, plain);
        v = coerce_store(f.type, eval(*f.init, plain), f.line, f.column);
      }
      fields.push_back({f.name, std::move(v)});
    }
    std::uint64_t parent = 0;
    if (level > 1) {
      if (auto ph = try_level_object(acc, level - 1)) parent = *ph;
    }
    std::uint64_t h = store_.alloc(cname, std::move(fields), parent);
    if (acc.created.count(level))
      fail(ErrorKind::Runtime, "level " + std::to_string(level) + " already has an object",
           line, column);
    acc.created[level] = h;
    emit(TraceKind::Push, cname, "create", level);
    if (const MethodDecl* ctor = table_.obj_create(cname, args.size()))
      exec_method_traced(acc, level, *ctor, h, Proto::Create, args, line, column);
    else if (has_any_create(decl->obj_class) || !args.empty())
      fail(ErrorKind::Arity,
           "no create overload of '" + cname + "' object class takes " +
               std::to_string(args.size()) + " arguments",
           line, column);
    return h;
  }

  void exec_method_traced(AccessState& acc, std::size_t level, const MethodDecl& m,
                          std::uint64_t h, Proto proto, const std::vector<Value>& args,
                          int line, int column) {
    const std::string& cname = acc.concept_at(level);
    emit(TraceKind::ObjEnter, cname, m.name, level);
    exec_method(&acc, level, Side::ObjSide, m, h, proto, args, line, column);
    emit(TraceKind::ObjExit, cname, m.name, level);
  }

  // ---- deletion --------------------------------------------------------------

  void delete_instance(Ref& ref, const std::vector<Value>& args, int line, int column) {
    if (ref.segments.empty())
      fail(ErrorKind::MalformedReference, "reference has no levels", line, column);
    AccessState acc;
    acc.ref = &ref;
    acc.method = "delete";
    acc.proto = Proto::Delete;
    acc.line = line;
    acc.column = column;
    AccessGuard guard(*this, acc);
    run_ref_delete(acc, 1, args, line, column);
  }

  void run_ref_delete(AccessState& acc, std::size_t i, const std::vector<Value>& args,
                      int line, int column) {
    const std::string& cname = acc.concept_at(i);
    emit(TraceKind::RefEnter, cname, "delete", i);
    if (const MethodDecl* m = table_.ref_method(cname, "delete")) {
      exec_method(&acc, i, Side::RefSide, *m, 0, Proto::Delete, args, line, column);
    } else {
      if (i < acc.levels()) run_ref_delete(acc, i + 1, args, line, column);
      const std::optional<std::uint64_t>& hidden = acc.segment(i).hidden;
      if (!hidden)
        fail(ErrorKind::Resolution,
             "level " + std::to_string(i) + " ('" + cname +
                 "') has no stored object to delete",
             line, column);
      delete_on_handle(acc, i, Value::handle(*hidden), {}, line, column);
    }
    emit(TraceKind::RefExit, cname, "delete", i);
  }

  void delete_on_handle(AccessState& acc, std::size_t level, const Value& hv,
                        const std::vector<Value>& args, int line, int column) {
    if (hv.is_null())
      fail(ErrorKind::Resolution, "cannot delete a null object", line, column);
    if (hv.kind() != ValueKind::Handle)
      fail(ErrorKind::Type, "delete needs an Object value", line, column);
    std::uint64_t h = hv.handle_id();
    ObjectRecord& rec = store_.live(h, line, column);
    if (const MethodDecl* dm = table_.obj_method(rec.concept_name, "delete")) {
      emit(TraceKind::ObjEnter, rec.concept_name, "delete", level);
      exec_method(&acc, level, Side::ObjSide, *dm, h, Proto::Delete, args, line, column);
      emit(TraceKind::ObjExit, rec.concept_name, "delete", level);
    }
    store_.free(h, line, column);
  }

  // ---- method frames ---------------------------------------------------------

  Value exec_method(AccessState* acc, std::size_t level, Side side, const MethodDecl& m,
                    std::uint64_t handle, Proto frame_proto,
                    const std::vector<Value>& args, int line, int column) {
    if (args.size() != m.params.size())
      fail(ErrorKind::Arity,
           "'" + m.name + "' expects " + std::to_string(m.params.size()) +
               " arguments, got " + std::to_string(args.size()),
           line, column);
    Frame f;
    f.access = acc;
    f.level = level;
    f.side = side;
    f.method = &m;
    f.handle = handle;
    f.frame_proto = frame_proto;
    f.scopes.emplace_back();
    for (std::size_t k = 0; k < args.size(); ++k) {
      const Param& p = m.params[k];
      f.scopes.back()[p.name] =
          VarSlot{p.type, coerce_store(p.type, args[k], m.line, m.column)};
    }
    FrameGuard guard(*this, f);
    for (const StmtPtr& s : m.body) exec_stmt(*s, f);
    return std::move(f.ret);
  }

  const MethodDecl* find_function(const std::string& name) const {
    for (const MethodDecl& fn : prog_->functions)
      if (fn.name == name) return &fn;
    return nullptr;
  }

  // ---- statements ------------------------------------------------------------

  void exec_stmt(const Stmt& s, Frame& f) {
    switch (s.kind) {
      case StmtKind::VarDecl: exec_var_decl(s, f); break;
      case StmtKind::ExprStmt: eval(*s.expr, f); break;
      case StmtKind::If: {
        Value c = eval(*s.expr, f);
        if (c.kind() != ValueKind::Bool)
          fail(ErrorKind::Type, "if condition must be a boolean", s.line, s.column);
        if (c.as_bool())
          exec_stmt(*s.body, f);
        else if (s.else_body)
          exec_stmt(*s.else_body, f);
        break;
      }
      case StmtKind::While: {
        while (true) {
          Value c = eval(*s.expr, f);
          if (c.kind() != ValueKind::Bool)
            fail(ErrorKind::Type, "while condition must be a boolean", s.line, s.column);
          if (!c.as_bool()) break;
          exec_stmt(*s.body, f);
        }
        break;
      }
      case StmtKind::Block: {
        ScopeGuard scope(f);
        for (const StmtPtr& inner : s.stmts) exec_stmt(*inner, f);
        break;
      }
    }
  }

  void exec_var_decl(const Stmt& s, Frame& f) {
    Value v;
    if (s.is_create) {
      std::vector<Value> args = eval_args(s.create_args, f);
      if (s.type.is_builtin) {
        if (s.type.name != "Object")
          fail(ErrorKind::Type, "only concept and Object variables can be created",
               s.line, s.column);
        v = Value::handle(object_create_in_frame(f, args, s.line, s.column));
      } else {
        v = Value::of(create_instance(s.type.context_name, s.type.name, args, s.line,
                                      s.column));
      }
    } else if (s.init) {
      v = eval(*s.init, f);
    } else {
      v = default_value_for(s.type);
    }
    v = coerce_store(s.type, std::move(v), s.line, s.column);
    if (f.scopes.empty())
      globals_[s.name] = VarSlot{s.type, std::move(v)};
    else
      f.scopes.back()[s.name] = VarSlot{s.type, std::move(v)};
  }

  // `Object o.create(args)` / `o.create(args)` inside a reference-side create
  // frame: allocates this level's object.
  std::uint64_t object_create_in_frame(Frame& f, const std::vector<Value>& args, int line,
                                       int column) {
    if (!f.access || f.side != Side::RefSide || f.frame_proto != Proto::Create)
      fail(ErrorKind::IllegalQualifier,
           "objects can only be created inside a create method", line, column);
    AccessState& acc = *f.access;
    std::uint64_t h = alloc_level_object(acc, f.level, args, line, column);
    if (!table_.has_custom_continue(acc.concept_at(f.level)))
      acc.segment(f.level).hidden = h;
    return h;
  }

  std::vector<Value> eval_args(const std::vector<ExprPtr>& exprs, Frame& f) {
    std::vector<Value> out;
    out.reserve(exprs.size());
    for (const ExprPtr& e : exprs) out.push_back(eval(*e, f));
    return out;
  }

  // ---- store coercion --------------------------------------------------------

  Value coerce_store(const TypeExpr& ty, Value v, int line, int column) {
    if (ty.name.empty()) return v;  // untyped slot (internal)
    if (!ty.is_builtin) {
      if (v.is_null()) return v;
      if (v.kind() != ValueKind::Reference)
        fail(ErrorKind::Type,
             std::string("expected a reference to '") + ty.name + "', got " +
                 value_kind_name(v.kind()),
             line, column);
      const Ref& r = v.as_ref();
      const std::string& real = ref_real_concept(r, line, column);
      if (!table_.is_included(real, ty.name))
        fail(ErrorKind::Type,
             "a reference to '" + real + "' does not fit a '" + ty.name + "' variable",
             line, column);
      std::string declared_ctx =
          table_.is_root(ty.context_name) ? "" : ty.context_name;
      if (r.context_name != declared_ctx)
        fail(ErrorKind::Type,
             "reference context '" +
                 (r.context_name.empty() ? std::string(kRootName) : r.context_name) +
                 "' does not match declared context '" +
                 (declared_ctx.empty() ? std::string(kRootName) : declared_ctx) + "'",
             line, column);
      return v;
    }
    if (ty.name == "double") {
      if (v.kind() == ValueKind::Double) return v;
      if (v.kind() == ValueKind::Int) return Value::of(static_cast<double>(v.as_int()));
      fail(ErrorKind::Type, std::string("expected a double, got ") +
               value_kind_name(v.kind()), line, column);
    }
    if (ty.name == "int") {
      if (v.kind() == ValueKind::Int) return v;
      fail(ErrorKind::Type,
           std::string("expected an int, got ") + value_kind_name(v.kind()), line,
           column);
    }
    if (ty.name == "boolean") {
      if (v.kind() == ValueKind::Bool) return v;
      fail(ErrorKind::Type,
           std::string("expected a boolean, got ") + value_kind_name(v.kind()), line,
           column);
    }
    if (ty.name == "String" || ty.name == "char") {
      // Identity fields can hold "no value yet" (a failed lookup), so text
      // slots are nullable; numeric and boolean slots stay strict.
      if (v.is_null() || v.kind() == ValueKind::Text) return v;
      fail(ErrorKind::Type,
           std::string("expected a string, got ") + value_kind_name(v.kind()), line,
           column);
    }
    if (ty.name == "Object") {
      if (v.is_null() || v.kind() == ValueKind::Handle) return v;
      fail(ErrorKind::Type,
           std::string("expected an Object, got ") + value_kind_name(v.kind()), line,
           column);
    }
    if (ty.name == "Map") {
      if (v.is_null() || v.kind() == ValueKind::Map) return v;
      fail(ErrorKind::Type, std::string("expected a Map, got ") +
               value_kind_name(v.kind()), line, column);
    }
    return v;
  }

  // ---- name and field access --------------------------------------------------

  static FieldSlot* find_field_slot(std::vector<FieldSlot>& fields,
                                    const std::string& name) {
    for (FieldSlot& fs : fields)
      if (fs.name == name) return &fs;
    return nullptr;
  }

  Value& segment_field(Segment& seg, const std::string& name) {
    if (FieldSlot* fs = find_field_slot(seg.fields, name)) return fs->value;
    const FieldDecl* decl = table_.ref_field(seg.concept_name, name);
    seg.fields.push_back({name, decl ? default_value_for(decl->type) : Value::null()});
    return seg.fields.back().value;
  }

  void set_segment_field(Segment& seg, const std::string& name, Value v) {
    segment_field(seg, name) = std::move(v);
  }

  Value read_record_field(std::uint64_t h, const std::string& name, int line,
                          int column) {
    ObjectRecord& rec = store_.live(h, line, column);
    if (FieldSlot* fs = find_field_slot(rec.fields, name)) return fs->value;
    fail(ErrorKind::UnknownField,
         "object '" + rec.concept_name + "' has no field '" + name + "'", line, column);
  }

  void write_record_field(std::uint64_t h, const std::string& name, Value v, int line,
                          int column) {
    ObjectRecord& rec = store_.live(h, line, column);
    if (const FieldDecl* decl = table_.obj_field(rec.concept_name, name))
      v = coerce_store(decl->type, std::move(v), line, column);
    if (FieldSlot* fs = find_field_slot(rec.fields, name)) {
      fs->value = std::move(v);
      return;
    }
    fail(ErrorKind::UnknownField,
         "object '" + rec.concept_name + "' has no field '" + name + "'", line, column);
  }

  // Deepest level at or outside `from` whose object class declares `name`.
  std::optional<std::size_t> find_obj_field_level(AccessState& acc, std::size_t from,
                                                  const std::string& name) {
    for (std::size_t j = from; j >= 1; --j)
      if (table_.obj_field(acc.concept_at(j), name)) return j;
    return std::nullopt;
  }

  VarSlot* find_scope_slot(Frame& f, const std::string& name) {
    for (auto it = f.scopes.rbegin(); it != f.scopes.rend(); ++it) {
      auto hit = it->find(name);
      if (hit != it->end()) return &hit->second;
    }
    return nullptr;
  }

  // Access to an object field via the protocol-aware level bookkeeping; used
  // by unqualified names, object.f, and super.f.
  Value obj_field_access(AccessState& acc, std::size_t level, const std::string& name,
                         bool write, Value v, int line, int column) {
    if (write) {
      write_record_field(level_object(acc, level, line, column), name, std::move(v),
                         line, column);
      return Value::void_value();
    }
    return read_record_field(level_object(acc, level, line, column), name, line, column);
  }

  // Unqualified name lookup shared by reads and writes. Search order: locals,
  // this level's reference fields (reference side), object fields from this
  // level outward, then globals. During an unfinished protocol, levels whose
  // object is not yet recorded are skipped.
  Value name_access(Frame& f, const std::string& name, bool write, Value v, int line,
                    int column) {
    if (VarSlot* slot = find_scope_slot(f, name)) {
      if (!write) return slot->value;
      slot->value = coerce_store(slot->type, std::move(v), line, column);
      return Value::void_value();
    }
    if (f.access && f.level > 0) {
      AccessState& acc = *f.access;
      if (f.side == Side::RefSide) {
        Segment& seg = acc.segment(f.level);
        if (const FieldDecl* decl = table_.ref_field(seg.concept_name, name)) {
          if (!write) return segment_field(seg, name);
          set_segment_field(seg, name, coerce_store(decl->type, std::move(v), line, column));
          return Value::void_value();
        }
      } else {
        ObjectRecord& rec = store_.live(f.handle, line, column);
        if (find_field_slot(rec.fields, name)) {
          if (!write) return read_record_field(f.handle, name, line, column);
          write_record_field(f.handle, name, std::move(v), line, column);
          return Value::void_value();
        }
      }
      if (f.frame_proto != Proto::Delete && acc.proto != Proto::Delete) {
        std::size_t start = f.side == Side::RefSide ? f.level : f.level - 1;
        for (std::size_t j = start; j >= 1; --j) {
          if (!table_.obj_field(acc.concept_at(j), name)) continue;
          if (limited_mode(acc)) {
            if (try_level_object(acc, j))
              return obj_field_access(acc, j, name, write, std::move(v), line, column);
            continue;  // not recorded yet: invisible at this point of the protocol
          }
          if (!acc.resolved) {
            Value moved = std::move(v);
            return resolve_then(
                acc,
                [this, &acc, j, name, write, moved, line, column]() mutable {
                  return obj_field_access(acc, j, name, write, std::move(moved), line,
                                          column);
                },
                line, column);
          }
          return obj_field_access(acc, j, name, write, std::move(v), line, column);
        }
      }
    }
    auto g = globals_.find(name);
    if (g != globals_.end()) {
      if (!write) return g->second.value;
      g->second.value = coerce_store(g->second.type, std::move(v), line, column);
      return Value::void_value();
    }
    fail(ErrorKind::UnknownName, "unknown name '" + name + "'", line, column);
  }

  // ---- qualified member access -------------------------------------------------

  AccessState& need_access(Frame& f, const char* what, int line, int column) {
    if (!f.access || f.level == 0)
      fail(ErrorKind::IllegalQualifier,
           std::string(what) + " is only meaningful inside a concept method", line,
           column);
    return *f.access;
  }

  Value qualified_field_access(Frame& f, Qualifier q, const std::string& name, bool write,
                               Value v, int line, int column) {
    AccessState& acc = need_access(f, "the qualifier", line, column);
    switch (q) {
      case Qualifier::This: {
        if (f.side == Side::RefSide) {
          Segment& seg = acc.segment(f.level);
          const FieldDecl* decl = table_.ref_field(seg.concept_name, name);
          if (!decl)
            fail(ErrorKind::UnknownField,
                 "'" + seg.concept_name + "' reference class has no field '" + name + "'",
                 line, column);
          if (!write) return segment_field(seg, name);
          set_segment_field(seg, name, coerce_store(decl->type, std::move(v), line, column));
          return Value::void_value();
        }
        if (!write) return read_record_field(f.handle, name, line, column);
        write_record_field(f.handle, name, std::move(v), line, column);
        return Value::void_value();
      }
      case Qualifier::Reference: {
        Segment& seg = acc.segment(f.level);
        const FieldDecl* decl = table_.ref_field(seg.concept_name, name);
        if (!decl)
          fail(ErrorKind::UnknownField,
               "'" + seg.concept_name + "' reference class has no field '" + name + "'",
               line, column);
        if (!write) return segment_field(seg, name);
        set_segment_field(seg, name, coerce_store(decl->type, std::move(v), line, column));
        return Value::void_value();
      }
      case Qualifier::Object: {
        if (f.side == Side::ObjSide) {
          if (!write) return read_record_field(f.handle, name, line, column);
          write_record_field(f.handle, name, std::move(v), line, column);
          return Value::void_value();
        }
        std::optional<std::size_t> j = find_obj_field_level(acc, f.level, name);
        if (!j)
          fail(ErrorKind::UnknownField, "no object field '" + name + "' at this level",
               line, column);
        return protocol_field_access(f, acc, *j, name, write, std::move(v), line, column);
      }
      case Qualifier::Super: {
        if (f.frame_proto == Proto::Delete || acc.proto == Proto::Delete)
          fail(ErrorKind::IllegalQualifier, "super is not available during deletion",
               line, column);
        if (f.level <= 1)
          fail(ErrorKind::UnknownField, "there is no enclosing level for super", line,
               column);
        std::optional<std::size_t> j = find_obj_field_level(acc, f.level - 1, name);
        if (!j)
          fail(ErrorKind::UnknownField,
               "no enclosing object field '" + name + "'", line, column);
        return protocol_field_access(f, acc, *j, name, write, std::move(v), line, column);
      }
      case Qualifier::Sub:
        fail(ErrorKind::IllegalQualifier, "sub has no fields", line, column);
    }
    fail(ErrorKind::Runtime, "unreachable", line, column);
  }

  Value protocol_field_access(Frame& f, AccessState& acc, std::size_t level,
                              const std::string& name, bool write, Value v, int line,
                              int column) {
    (void)f;
    if (limited_mode(acc)) {
      if (!try_level_object(acc, level))
        fail(ErrorKind::EmptyStack,
             "level " + std::to_string(level) + " is not resolved yet", line, column);
      return obj_field_access(acc, level, name, write, std::move(v), line, column);
    }
    if (!acc.resolved) {
      Value moved = std::move(v);
      return resolve_then(
          acc,
          [this, &acc, level, name, write, moved, line, column]() mutable {
            return obj_field_access(acc, level, name, write, std::move(moved), line,
                                    column);
          },
          line, column);
    }
    return obj_field_access(acc, level, name, write, std::move(v), line, column);
  }

  // ---- expression evaluation -----------------------------------------------------

  Frame& current_frame() { return *frames_.back(); }

  Value eval(const Expr& e, Frame& f) {
    switch (e.kind) {
      case ExprKind::IntLit:
        return Value::of(static_cast<std::int64_t>(e.int_value));
      case ExprKind::FloatLit: return Value::of(e.float_value);
      case ExprKind::StringLit: return Value::of(e.text);
      case ExprKind::BoolLit: return Value::of(e.bool_value);
      case ExprKind::NullLit: return Value::null();
      case ExprKind::Name:
        return name_access(f, e.text, false, Value(), e.line, e.column);
      case ExprKind::ReturnSlot: return f.ret;
      case ExprKind::Qualifier: {
        if (e.qual == Qualifier::This) {
          AccessState& acc = need_access(f, "this", e.line, e.column);
          return Value::of(*acc.ref);
        }
        fail(ErrorKind::IllegalQualifier,
             "this qualifier cannot be used as a value on its own", e.line, e.column);
      }
      case ExprKind::Member:
        return eval_member_read(e, f);
      case ExprKind::Call:
        return eval_call(e, f);
      case ExprKind::BareContinue: {
        AccessState& acc = need_access(f, "continue()", e.line, e.column);
        if (f.side != Side::ObjSide || !f.method || f.method->name != "continue")
          fail(ErrorKind::IllegalQualifier,
               "continue() is only allowed inside an object-side continue method",
               e.line, e.column);
        bare_continue_core(acc, f.level, e.line, e.column);
        return Value::void_value();
      }
      case ExprKind::New: {
        if (e.text == "Map") {
          if (!e.args.empty())
            fail(ErrorKind::Arity, "new Map() takes no arguments", e.line, e.column);
          return Value::map(maps_.make());
        }
        std::vector<Value> args = eval_args(e.args, f);
        return Value::of(create_instance("", e.text, args, e.line, e.column));
      }
      case ExprKind::TypeOp:
        return eval_type_op(e, f);
      case ExprKind::Colon:
        return eval_colon(e, f);
      case ExprKind::Assign: {
        Value v = eval(*e.rhs, f);
        assign_to(*e.lhs, v, f);
        return v;
      }
      case ExprKind::Binary:
        return eval_binary(e, f);
      case ExprKind::Unary: {
        Value v = eval(*e.lhs, f);
        if (v.kind() == ValueKind::Int) return Value::of(-v.as_int());
        if (v.kind() == ValueKind::Double) return Value::of(-v.as_double());
        fail(ErrorKind::Type, "unary minus needs a number", e.line, e.column);
      }
    }
    fail(ErrorKind::Runtime, "unreachable", e.line, e.column);
  }

  void assign_to(const Expr& target, const Value& v, Frame& f) {
    switch (target.kind) {
      case ExprKind::Name:
        name_access(f, target.text, true, v, target.line, target.column);
        return;
      case ExprKind::ReturnSlot: {
        Value stored = v;
        if (f.method && !f.method->returns_void && f.method->ret.is_builtin &&
            f.method->ret.name == "double" && stored.kind() == ValueKind::Int)
          stored = Value::of(static_cast<double>(stored.as_int()));
        f.ret = std::move(stored);
        return;
      }
      case ExprKind::Member: {
        const Expr& base = *target.lhs;
        if (base.kind == ExprKind::Qualifier) {
          qualified_field_access(f, base.qual, target.text, true, v, target.line,
                                 target.column);
          return;
        }
        Value* slot = locate_value_slot(base, f);
        if (slot && slot->kind() == ValueKind::Reference) {
          write_ref_field(slot->as_ref(), target.text, v, target.line, target.column);
          return;
        }
        Value bv = slot ? *slot : eval(base, f);
        if (bv.kind() == ValueKind::Reference) {
          Ref tmp = bv.as_ref();
          write_ref_field(tmp, target.text, v, target.line, target.column);
          return;  // write to a temporary reference is lost by design of values
        }
        fail(ErrorKind::UnknownField,
             std::string("cannot assign a field of a ") + value_kind_name(bv.kind()),
             target.line, target.column);
      }
      default:
        fail(ErrorKind::Parse, "this expression cannot be assigned to", target.line,
             target.column);
    }
  }

  void write_ref_field(Ref& r, const std::string& name, const Value& v, int line,
                       int column) {
    for (std::size_t i = r.segments.size(); i >= 1; --i) {
      Segment& seg = r.segments[i - 1];
      if (const FieldDecl* decl = table_.ref_field(seg.concept_name, name)) {
        set_segment_field(seg, name, coerce_store(decl->type, v, line, column));
        return;
      }
    }
    fail(ErrorKind::UnknownField, "reference has no field '" + name + "'", line, column);
  }

  Value read_ref_field(Ref& r, const std::string& name, int line, int column) {
    for (std::size_t i = r.segments.size(); i >= 1; --i) {
      Segment& seg = r.segments[i - 1];
      if (table_.ref_field(seg.concept_name, name)) return segment_field(seg, name);
    }
    fail(ErrorKind::UnknownField, "reference has no field '" + name + "'", line, column);
  }

  Value eval_member_read(const Expr& e, Frame& f) {
    const Expr& base = *e.lhs;
    if (base.kind == ExprKind::Qualifier)
      return qualified_field_access(f, base.qual, e.text, false, Value(), e.line,
                                    e.column);
    Value* slot = locate_value_slot(base, f);
    Value bv = slot ? *slot : eval(base, f);
    if (bv.kind() == ValueKind::Reference) {
      if (slot) return read_ref_field(slot->as_ref(), e.text, e.line, e.column);
      Ref tmp = bv.as_ref();
      return read_ref_field(tmp, e.text, e.line, e.column);
    }
    if (bv.is_null())
      fail(ErrorKind::Runtime, "cannot read field '" + e.text + "' of null", e.line,
           e.column);
    fail(ErrorKind::UnknownField,
         std::string("a ") + value_kind_name(bv.kind()) + " has no fields", e.line,
         e.column);
  }

  // Returns a stable slot pointer when the expression names a variable or an
  // own-side field; the receiver of a method access aliases it so mutations
  // survive the call.
  Value* locate_value_slot(const Expr& e, Frame& f) {
    if (e.kind != ExprKind::Name) return nullptr;
    if (VarSlot* s = find_scope_slot(f, e.text)) return &s->value;
    if (f.access && f.level > 0) {
      AccessState& acc = *f.access;
      if (f.side == Side::RefSide) {
        Segment& seg = acc.segment(f.level);
        if (table_.ref_field(seg.concept_name, e.text))
          return &segment_field(seg, e.text);
      } else {
        ObjectRecord& rec = store_.live(f.handle, e.line, e.column);
        if (FieldSlot* fs = find_field_slot(rec.fields, e.text)) return &fs->value;
      }
    }
    auto g = globals_.find(e.text);
    if (g != globals_.end()) return &g->second.value;
    return nullptr;
  }

  const TypeExpr* locate_declared_type(const Expr& e, Frame& f) {
    if (e.kind != ExprKind::Name) return nullptr;
    if (VarSlot* s = find_scope_slot(f, e.text)) return &s->type;
    if (f.access && f.level > 0) {
      AccessState& acc = *f.access;
      for (std::size_t j = f.level; j >= 1; --j) {
        if (const FieldDecl* d = table_.ref_field(acc.concept_at(j), e.text))
          return &d->type;
        if (const FieldDecl* d = table_.obj_field(acc.concept_at(j), e.text))
          return &d->type;
      }
    }
    auto g = globals_.find(e.text);
    if (g != globals_.end()) return &g->second.type;
    return nullptr;
  }

  // ---- calls -----------------------------------------------------------------

  Value eval_call(const Expr& e, Frame& f) {
    const Expr& callee = *e.lhs;
    if (callee.kind == ExprKind::Name)
      return eval_plain_call(e, callee.text, f);
    if (callee.kind == ExprKind::Member)
      return eval_member_call(e, callee, f);
    fail(ErrorKind::Parse, "this expression cannot be called", e.line, e.column);
  }

  Value eval_plain_call(const Expr& e, const std::string& name, Frame& f) {
    // Object-side unqualified calls dispatch on the real type first.
    if (f.access && f.level > 0 && f.side == Side::ObjSide) {
      AccessState& acc = *f.access;
      bool declared = false;
      for (const Segment& seg : acc.ref->segments)
        if (table_.obj_method(seg.concept_name, name)) declared = true;
      if (declared) {
        std::vector<Value> args = eval_args(e.args, f);
        std::size_t limit = acc.resolved ? acc.levels() : acc.stack.depth();
        if (acc.proto == Proto::Create) limit = acc.levels();
        std::string saved = acc.method;
        acc.method = name;
        Value out;
        try {
          out = run_object_chain(acc, args, limit, e.line, e.column);
        } catch (...) {
          acc.method = std::move(saved);
          throw;
        }
        acc.method = std::move(saved);
        return out;
      }
    }
    if (name == "print") {
      if (e.args.size() != 1)
        fail(ErrorKind::Arity, "print takes exactly one argument", e.line, e.column);
      Value v = eval(*e.args[0], f);
      if (output_) output_(format_for_print(v, e.line, e.column) + "\n");
      return Value::void_value();
    }
    if (name == "getUniqueNo") {
      if (!e.args.empty())
        fail(ErrorKind::Arity, "getUniqueNo takes no arguments", e.line, e.column);
      char buf[16];
      std::snprintf(buf, sizeof(buf), "ACC-%04llu",
                    static_cast<unsigned long long>(++unique_no_));
      return Value::of(std::string(buf));
    }
    if (const MethodDecl* fn = find_function(name)) {
      std::vector<Value> args = eval_args(e.args, f);
      return exec_method(nullptr, 0, Side::RefSide, *fn, 0, Proto::None, args, e.line,
                         e.column);
    }
    fail(ErrorKind::UnknownMethod, "unknown function '" + name + "'", e.line, e.column);
  }

  Value eval_member_call(const Expr& e, const Expr& callee, Frame& f) {
    const Expr& base = *callee.lhs;
    const std::string& m = callee.text;
    if (base.kind == ExprKind::Qualifier)
      return eval_qualified_call(e, base.qual, m, f);

    // Method access through a named variable aliases its slot so the
    // reference keeps any state the access writes into it.
    Value* slot = locate_value_slot(base, f);
    if (slot) return call_on_slot(e, base, *slot, m, f);
    Value bv = eval(base, f);
    return call_on_value(e, std::move(bv), m, f);
  }

  Value call_on_slot(const Expr& e, const Expr& base, Value& slot, const std::string& m,
                     Frame& f) {
    if (slot.is_null()) {
      const TypeExpr* ty = locate_declared_type(base, f);
      if (m == "create" && ty) {
        std::vector<Value> args = eval_args(e.args, f);
        if (!ty->is_builtin) {
          Ref r = create_instance(ty->context_name, ty->name, args, e.line, e.column);
          slot = coerce_store(*ty, Value::of(std::move(r)), e.line, e.column);
          return slot;
        }
        if (ty->name == "Object") {
          slot = Value::handle(object_create_in_frame(f, args, e.line, e.column));
          return slot;
        }
      }
      if (m == "continue") {
        // continue on a never-resolved Object variable
        return protocol_continue_call(e, Value::null(), f);
      }
      fail(ErrorKind::Runtime, "'" + base.text + "' is null", e.line, e.column);
    }
    switch (slot.kind()) {
      case ValueKind::Reference: {
        if (m == "create")
          fail(ErrorKind::Runtime, "'" + base.text + "' is already created", e.line,
               e.column);
        if (m == "continue")
          fail(ErrorKind::IllegalQualifier,
               "continue cannot be invoked on a reference", e.line, e.column);
        std::vector<Value> args = eval_args(e.args, f);
        if (m == "delete") {
          delete_instance(slot.as_ref(), args, e.line, e.column);
          return Value::void_value();
        }
        return apply_method(slot.as_ref(), m, args, e.line, e.column);
      }
      case ValueKind::Handle: {
        if (m == "create")
          fail(ErrorKind::Runtime, "'" + base.text + "' is already created", e.line,
               e.column);
        return call_on_value(e, slot, m, f);
      }
      default:
        return call_on_value(e, slot, m, f);
    }
  }

  Value call_on_value(const Expr& e, Value bv, const std::string& m, Frame& f) {
    switch (bv.kind()) {
      case ValueKind::Reference: {
        std::vector<Value> args = eval_args(e.args, f);
        if (m == "create")
          fail(ErrorKind::Runtime, "the reference is already created", e.line, e.column);
        if (m == "continue")
          fail(ErrorKind::IllegalQualifier, "continue cannot be invoked on a reference",
               e.line, e.column);
        AccessState acc;
        acc.owned = std::move(bv.as_ref());
        acc.ref = &acc.owned;
        if (m == "delete") {
          delete_instance(acc.owned, args, e.line, e.column);
          return Value::void_value();
        }
        return apply_method(acc.owned, m, args, e.line, e.column);
      }
      case ValueKind::Handle:
      case ValueKind::Null: {
        if (m == "continue") return protocol_continue_call(e, bv, f);
        if (m == "delete") return protocol_delete_call(e, bv, f);
        if (bv.is_null())
          fail(ErrorKind::Runtime, "receiver is null", e.line, e.column);
        fail(ErrorKind::UnknownMethod, "an Object value has no method '" + m + "'",
             e.line, e.column);
      }
      case ValueKind::Map:
        return eval_map_call(e, bv.map_id(), m, f);
      default:
        fail(ErrorKind::UnknownMethod,
             std::string("a ") + value_kind_name(bv.kind()) + " has no methods", e.line,
             e.column);
    }
  }

  Value protocol_continue_call(const Expr& e, const Value& hv, Frame& f) {
    AccessState& acc = need_access(f, "continue", e.line, e.column);
    bool continue_frame = f.side == Side::RefSide && f.frame_proto == Proto::Continue;
    bool create_frame = f.side == Side::RefSide && f.frame_proto == Proto::Create;
    if (!continue_frame && !create_frame)
      fail(ErrorKind::IllegalQualifier,
           "objects can only be continued inside a continue or create method", e.line,
           e.column);
    if (!e.args.empty())
      fail(ErrorKind::Arity, "continue takes no arguments", e.line, e.column);
    continue_on_handle(acc, f.level, hv, e.line, e.column);
    return Value::void_value();
  }

  Value protocol_delete_call(const Expr& e, const Value& hv, Frame& f) {
    AccessState& acc = need_access(f, "delete", e.line, e.column);
    if (f.side != Side::RefSide || f.frame_proto != Proto::Delete)
      fail(ErrorKind::IllegalQualifier,
           "objects can only be deleted inside a delete method", e.line, e.column);
    std::vector<Value> args = eval_args(e.args, f);
    delete_on_handle(acc, f.level, hv, args, e.line, e.column);
    return Value::void_value();
  }

  Value eval_map_call(const Expr& e, std::uint64_t map_id, const std::string& m,
                      Frame& f) {
    std::vector<Value> args = eval_args(e.args, f);
    if (m == "get") {
      if (args.size() != 1)
        fail(ErrorKind::Arity, "Map.get takes one argument", e.line, e.column);
      return maps_.get(map_id, args[0]);
    }
    if (m == "add") {
      if (args.size() != 2)
        fail(ErrorKind::Arity, "Map.add takes two arguments", e.line, e.column);
      maps_.add(map_id, args[0], args[1]);
      return Value::void_value();
    }
    if (m == "remove") {
      if (args.size() != 1)
        fail(ErrorKind::Arity, "Map.remove takes one argument", e.line, e.column);
      maps_.remove(map_id, args[0]);
      return Value::void_value();
    }
    fail(ErrorKind::UnknownMethod, "Map has no method '" + m + "'", e.line, e.column);
  }

  Value eval_qualified_call(const Expr& e, Qualifier q, const std::string& m, Frame& f) {
    AccessState& acc = need_access(f, "the qualifier", e.line, e.column);
    switch (q) {
      case Qualifier::This: {
        if (f.side == Side::ObjSide) return obj_virtual_call(e, m, f);
        const MethodDecl* rm = table_.ref_method(acc.concept_at(f.level), m);
        if (!rm)
          fail(ErrorKind::UnknownMethod,
               "'" + acc.concept_at(f.level) + "' reference class has no method '" + m +
                   "'",
               e.line, e.column);
        std::vector<Value> args = eval_args(e.args, f);
        return exec_method(&acc, f.level, Side::RefSide, *rm, 0, f.frame_proto, args,
                           e.line, e.column);
      }
      case Qualifier::Reference: {
        const MethodDecl* rm = table_.ref_method(acc.concept_at(f.level), m);
        if (!rm)
          fail(ErrorKind::UnknownMethod,
               "'" + acc.concept_at(f.level) + "' reference class has no method '" + m +
                   "'",
               e.line, e.column);
        std::vector<Value> args = eval_args(e.args, f);
        return exec_method(&acc, f.level, Side::RefSide, *rm, 0, f.frame_proto, args,
                           e.line, e.column);
      }
      case Qualifier::Object: {
        bool declared = false;
        for (const Segment& seg : acc.ref->segments)
          if (table_.obj_method(seg.concept_name, m)) declared = true;
        if (!declared)
          fail(ErrorKind::UnknownMethod, "no object class declares '" + m + "'", e.line,
               e.column);
        if (f.side == Side::ObjSide) return obj_virtual_call(e, m, f);
        std::vector<Value> args = eval_args(e.args, f);
        std::string saved = acc.method;
        acc.method = m;
        Value out;
        try {
          out = object_dispatch(acc, args, e.line, e.column);
        } catch (...) {
          acc.method = std::move(saved);
          throw;
        }
        acc.method = std::move(saved);
        return out;
      }
      case Qualifier::Super: {
        if (f.frame_proto == Proto::Delete || acc.proto == Proto::Delete)
          fail(ErrorKind::IllegalQualifier, "super is not available during deletion",
               e.line, e.column);
        std::vector<Value> args = eval_args(e.args, f);
        std::size_t from = f.level > 0 ? f.level - 1 : 0;
        for (std::size_t j = from; j >= 1; --j) {
          if (const MethodDecl* om = table_.obj_method(acc.concept_at(j), m)) {
            if (f.side == Side::RefSide && !acc.resolved && !limited_mode(acc)) {
              return resolve_then(
                  acc,
                  [this, &acc, j, om, args, &e] {
                    return run_object_method(acc, j, *om, args, e.line, e.column);
                  },
                  e.line, e.column);
            }
            if (limited_mode(acc) && !try_level_object(acc, j))
              fail(ErrorKind::EmptyStack,
                   "level " + std::to_string(j) + " is not resolved yet", e.line,
                   e.column);
            return run_object_method(acc, j, *om, args, e.line, e.column);
          }
        }
        return Value::void_value();  // outermost level: nothing above to run
      }
      case Qualifier::Sub:
        return eval_sub_call(e, m, f, acc);
    }
    fail(ErrorKind::Runtime, "unreachable", e.line, e.column);
  }

  Value obj_virtual_call(const Expr& e, const std::string& m, Frame& f) {
    AccessState& acc = *f.access;
    std::vector<Value> args = eval_args(e.args, f);
    std::size_t limit =
        acc.resolved || acc.proto == Proto::Create ? acc.levels() : acc.stack.depth();
    std::string saved = acc.method;
    acc.method = m;
    Value out;
    try {
      out = run_object_chain(acc, args, limit, e.line, e.column);
    } catch (...) {
      acc.method = std::move(saved);
      throw;
    }
    acc.method = std::move(saved);
    return out;
  }

  Value eval_sub_call(const Expr& e, const std::string& m, Frame& f, AccessState& acc) {
    if (f.side != Side::RefSide)
      fail(ErrorKind::IllegalQualifier, "sub is only available in reference methods",
           e.line, e.column);
    if (m == "continue") {
      if (f.frame_proto != Proto::Continue)
        fail(ErrorKind::IllegalQualifier,
             "sub.continue() is only allowed inside a continue method", e.line,
             e.column);
      if (!e.args.empty())
        fail(ErrorKind::Arity, "continue takes no arguments", e.line, e.column);
      if (f.level < acc.levels()) run_ref_continue(acc, f.level + 1, e.line, e.column);
      return Value::void_value();
    }
    if (m == "create") {
      if (f.frame_proto != Proto::Create)
        fail(ErrorKind::IllegalQualifier,
             "sub.create() is only allowed inside a create method", e.line, e.column);
      std::vector<Value> args = eval_args(e.args, f);
      if (f.level < acc.levels())
        run_ref_create(acc, f.level + 1, args, e.line, e.column);
      return Value::void_value();
    }
    if (m == "delete") {
      if (f.frame_proto != Proto::Delete)
        fail(ErrorKind::IllegalQualifier,
             "sub.delete() is only allowed inside a delete method", e.line, e.column);
      std::vector<Value> args = eval_args(e.args, f);
      if (f.level < acc.levels())
        run_ref_delete(acc, f.level + 1, args, e.line, e.column);
      return Value::void_value();
    }
    if (f.frame_proto != Proto::None)
      fail(ErrorKind::IllegalQualifier,
           "sub methods cannot be accessed during a protocol", e.line, e.column);
    std::vector<Value> args = eval_args(e.args, f);
    std::string saved = acc.method;
    acc.method = m;
    Value out;
    try {
      out = sub_dispatch(acc, f.level, args);
    } catch (...) {
      acc.method = std::move(saved);
      throw;
    }
    acc.method = std::move(saved);
    return out;
  }

  // ---- operators -------------------------------------------------------------

  static std::string normalize_concept(const std::string& n) {
    return n.empty() ? std::string(kRootName) : n;
  }
  std::string denormalize_concept(const std::string& n) const {
    return table_.is_root(n) ? std::string() : n;
  }

  Value eval_type_op(const Expr& e, Frame& f) {
    switch (e.type_op) {
      case TypeOpKind::DeclaredConcept:
      case TypeOpKind::DeclaredContext: {
        const TypeExpr* ty = locate_declared_type(*e.lhs, f);
        if (!ty)
          fail(ErrorKind::TypeOperator,
               "the operand must be a declared variable or field", e.line, e.column);
        if (ty->is_builtin)
          fail(ErrorKind::TypeOperator,
               "the operand must have a concept type, not '" + ty->name + "'", e.line,
               e.column);
        if (e.type_op == TypeOpKind::DeclaredConcept)
          return Value::concept_name(ty->name);
        return Value::concept_name(normalize_concept(ty->context_name));
      }
      case TypeOpKind::RealConcept:
      case TypeOpKind::RealContext: {
        Value v = eval(*e.lhs, f);
        if (v.is_null())
          fail(ErrorKind::TypeOperator, "the reference is null", e.line, e.column);
        if (v.kind() != ValueKind::Reference)
          fail(ErrorKind::TypeOperator,
               std::string("the operand must be a reference, got ") +
                   value_kind_name(v.kind()),
               e.line, e.column);
        if (e.type_op == TypeOpKind::RealConcept)
          return Value::concept_name(ref_real_concept(v.as_ref(), e.line, e.column));
        return Value::concept_name(normalize_concept(v.as_ref().context_name));
      }
    }
    fail(ErrorKind::Runtime, "unreachable", e.line, e.column);
  }

  // Operand of ':' only; a bare name that is no variable may denote a concept.
  Value eval_colon_operand(const Expr& e, Frame& f) {
    if (e.kind == ExprKind::Name) {
      if (e.text == kRootName && !find_scope_slot(f, e.text) &&
          !globals_.count(e.text))
        return Value::concept_name(std::string(kRootName));
      if (table_.find(e.text) && !find_scope_slot(f, e.text) &&
          !locate_value_slot(e, f))
        return Value::concept_name(e.text);
    }
    return eval(e, f);
  }

  std::vector<const Ref*> enclosing_refs() const {
    std::vector<const Ref*> out;
    for (auto it = access_stack_.rbegin(); it != access_stack_.rend(); ++it)
      out.push_back((*it)->ref);
    return out;
  }

  Value eval_colon(const Expr& e, Frame& f) {
    Value l = eval_colon_operand(*e.lhs, f);
    Value r = eval_colon_operand(*e.rhs, f);
    bool lc = l.kind() == ValueKind::Concept;
    bool rc = r.kind() == ValueKind::Concept;
    bool lr = l.kind() == ValueKind::Reference;
    bool rr = r.kind() == ValueKind::Reference;
    if (lc && rr)
      return Value::of(ref_left_cast(table_, denormalize_concept(l.concept_value()),
                                     r.as_ref(), enclosing_refs(), 0, e.line, e.column));
    if (lr && rc)
      return Value::of(ref_right_cast(table_, l.as_ref(),
                                      denormalize_concept(r.concept_value()), e.line,
                                      e.column));
    if (lr && rr) return Value::of(ref_concat(l.as_ref(), r.as_ref(), e.line, e.column));
    fail(ErrorKind::Cast,
         std::string("':' cannot combine ") + value_kind_name(l.kind()) + " and " +
             value_kind_name(r.kind()),
         e.line, e.column);
  }

  bool concept_compare(BinaryOp op, const std::string& a, const std::string& b) const {
    std::string ia = denormalize_concept(a);
    std::string ib = denormalize_concept(b);
    switch (op) {
      case BinaryOp::Eq: return ia == ib;
      case BinaryOp::Ne: return ia != ib;
      case BinaryOp::Lt: return table_.is_strictly_included(ia, ib);
      case BinaryOp::Le: return table_.is_included(ia, ib);
      case BinaryOp::Gt: return table_.is_strictly_included(ib, ia);
      case BinaryOp::Ge: return table_.is_included(ib, ia);
      default: return false;
    }
  }

  Value eval_binary(const Expr& e, Frame& f) {
    // `sub == null` / `sub != null`: probes whether this level is innermost.
    const Expr* sub_side = nullptr;
    const Expr* other = nullptr;
    if (e.lhs->kind == ExprKind::Qualifier && e.lhs->qual == Qualifier::Sub) {
      sub_side = e.lhs.get();
      other = e.rhs.get();
    } else if (e.rhs->kind == ExprKind::Qualifier && e.rhs->qual == Qualifier::Sub) {
      sub_side = e.rhs.get();
      other = e.lhs.get();
    }
    if (sub_side) {
      if ((e.bin_op != BinaryOp::Eq && e.bin_op != BinaryOp::Ne) ||
          other->kind != ExprKind::NullLit)
        fail(ErrorKind::IllegalQualifier, "sub can only be compared against null",
             e.line, e.column);
      AccessState& acc = need_access(f, "sub", e.line, e.column);
      if (f.side != Side::RefSide)
        fail(ErrorKind::IllegalQualifier, "sub is only available in reference methods",
             e.line, e.column);
      bool innermost = f.level == acc.levels();
      return Value::of(e.bin_op == BinaryOp::Eq ? innermost : !innermost);
    }

    Value l = eval(*e.lhs, f);
    Value r = eval(*e.rhs, f);
    switch (e.bin_op) {
      case BinaryOp::Eq:
      case BinaryOp::Ne: {
        if (l.kind() == ValueKind::Concept && r.kind() == ValueKind::Concept)
          return Value::of(concept_compare(e.bin_op, l.concept_value(),
                                           r.concept_value()));
        bool eq = value_equals(l, r);
        return Value::of(e.bin_op == BinaryOp::Eq ? eq : !eq);
      }
      case BinaryOp::Lt:
      case BinaryOp::Gt:
      case BinaryOp::Le:
      case BinaryOp::Ge: {
        if (l.kind() == ValueKind::Concept && r.kind() == ValueKind::Concept)
          return Value::of(concept_compare(e.bin_op, l.concept_value(),
                                           r.concept_value()));
        if (!l.is_number() || !r.is_number())
          fail(ErrorKind::Type, "comparison needs two numbers or two concepts", e.line,
               e.column);
        double a = l.number(), b = r.number();
        switch (e.bin_op) {
          case BinaryOp::Lt: return Value::of(a < b);
          case BinaryOp::Gt: return Value::of(a > b);
          case BinaryOp::Le: return Value::of(a <= b);
          default: return Value::of(a >= b);
        }
      }
      case BinaryOp::Add:
        if (l.kind() == ValueKind::Text && r.kind() == ValueKind::Text)
          return Value::of(l.as_text() + r.as_text());
        [[fallthrough]];
      case BinaryOp::Sub:
      case BinaryOp::Mul:
      case BinaryOp::Div: {
        if (!l.is_number() || !r.is_number())
          fail(ErrorKind::Type, "arithmetic needs two numbers", e.line, e.column);
        if (l.kind() == ValueKind::Int && r.kind() == ValueKind::Int) {
          std::int64_t a = l.as_int(), b = r.as_int();
          switch (e.bin_op) {
            case BinaryOp::Add: return Value::of(a + b);
            case BinaryOp::Sub: return Value::of(a - b);
            case BinaryOp::Mul: return Value::of(a * b);
            default:
              if (b == 0) fail(ErrorKind::Runtime, "division by zero", e.line, e.column);
              return Value::of(a / b);
          }
        }
        double a = l.number(), b = r.number();
        switch (e.bin_op) {
          case BinaryOp::Add: return Value::of(a + b);
          case BinaryOp::Sub: return Value::of(a - b);
          case BinaryOp::Mul: return Value::of(a * b);
          default: return Value::of(a / b);
        }
      }
    }
    fail(ErrorKind::Runtime, "unreachable", e.line, e.column);
  }

  // ---- state -------------------------------------------------------------------

  Program* prog_;
  ConceptTable table_;
  ObjectStore store_;
  MapStore maps_;
  std::map<std::string, VarSlot> globals_;
  std::vector<Frame*> frames_;
  std::vector<AccessState*> access_stack_;
  std::function<void(std::string_view)> output_;
  TraceFn trace_;
  std::uint64_t unique_no_ = 0;
  std::size_t cursor_ = 0;
};

}  // namespace copri
