#pragma once

#include <iostream>
#include <string>
#include <utility>

#include "copri/diagnostics.hpp"
#include "copri/interpreter.hpp"
#include "copri/lexer.hpp"
#include "copri/parser.hpp"

namespace copri {

// Printable form for values echoed by the session; unlike print(), every kind
// has one.
inline std::string repl_format(const Value& v) {
  switch (v.kind()) {
    case ValueKind::Null: return "null";
    case ValueKind::Void: return "";
    case ValueKind::Int: return std::to_string(v.as_int());
    case ValueKind::Double: return format_double(v.as_double());
    case ValueKind::Bool: return v.as_bool() ? "true" : "false";
    case ValueKind::Text: return v.as_text();
    case ValueKind::Concept: return v.concept_value();
    case ValueKind::Handle: return "<object " + std::to_string(v.handle_id()) + ">";
    case ValueKind::Map: return "<map " + std::to_string(v.map_id()) + ">";
    case ValueKind::Reference: {
      const Ref& r = v.as_ref();
      std::string s = "<";
      if (!r.context_name.empty()) s += r.context_name + " : ";
      for (std::size_t i = 0; i < r.segments.size(); ++i) {
        if (i) s += " : ";
        s += r.segments[i].concept_name;
      }
      s += ">";
      return s;
    }
  }
  return "";
}

class Repl {
 public:
  Repl(std::istream& in, std::ostream& out, std::ostream& err, bool prompts = true)
      : in_(in), out_(out), err_(err), prompts_(prompts), interp_(session_) {
    interp_.set_output([this](std::string_view s) { out_ << s; });
  }

  int run() {
    std::string chunk;
    std::string line;
    while (true) {
      if (prompts_) out_ << (chunk.empty() ? "copri> " : "  ...> ") << std::flush;
      if (!std::getline(in_, line)) break;
      if (chunk.empty() && line == "exit") break;
      chunk += line;
      chunk += '\n';
      if (!balanced(chunk)) continue;
      if (!blank(chunk)) feed(chunk);
      chunk.clear();
    }
    if (prompts_) out_ << "\n";
    return 0;
  }

  // Processes one complete chunk; public so tests can drive the session.
  void feed(const std::string& chunk) {
    ExprPtr e;
    try {
      e = parse_expression(chunk);
    } catch (const CopError&) {
      e = nullptr;  // not a single expression; treat as program text below
    }
    if (e) {
      try {
        Value v = interp_.eval_expression(*e);
        std::string text = repl_format(v);
        if (!text.empty()) out_ << text << "\n";
      } catch (const CopError& err) {
        err_ << format_diagnostic("<repl>", err) << "\n";
      }
      return;
    }
    try {
      Program fresh = parse_program(chunk);
      absorb(std::move(fresh));
      interp_.reload();
      interp_.run();
    } catch (const CopError& e) {
      interp_.skip_pending();
      try {
        interp_.reload();
      } catch (const CopError&) {
        // a rejected declaration stays in the session; drop it again
        rollback_last_chunk();
      }
      err_ << format_diagnostic("<repl>", e) << "\n";
    }
  }

  Interpreter& interpreter() { return interp_; }

 private:
  void absorb(Program&& fresh) {
    mark_ = {session_.concepts.size(), session_.functions.size(),
             session_.statements.size(), session_.items.size()};
    for (const TopItem& item : fresh.items) {
      TopItem moved = item;
      switch (item.kind) {
        case TopItemKind::Concept:
          moved.index = session_.concepts.size();
          session_.concepts.push_back(std::move(fresh.concepts[item.index]));
          break;
        case TopItemKind::Function:
          moved.index = session_.functions.size();
          session_.functions.push_back(std::move(fresh.functions[item.index]));
          break;
        case TopItemKind::Statement:
          moved.index = session_.statements.size();
          session_.statements.push_back(std::move(fresh.statements[item.index]));
          break;
      }
      session_.items.push_back(moved);
    }
  }

  void rollback_last_chunk() {
    session_.concepts.resize(mark_.concepts);
    session_.functions.resize(mark_.functions);
    session_.statements.resize(mark_.statements);
    session_.items.resize(mark_.items);
    interp_.skip_pending();
    interp_.reload();
  }

  static bool blank(const std::string& s) {
    for (char c : s)
      if (c != ' ' && c != '\t' && c != '\n' && c != '\r') return false;
    return true;
  }

  // Open delimiters outside strings and comments keep the chunk growing.
  static bool balanced(const std::string& s) {
    int depth = 0;
    bool in_string = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
      char c = s[i];
      if (in_string) {
        if (c == '\\')
          ++i;
        else if (c == '"')
          in_string = false;
        continue;
      }
      if (c == '"') {
        in_string = true;
      } else if (c == '/' && i + 1 < s.size() && s[i + 1] == '/') {
        while (i < s.size() && s[i] != '\n') ++i;
      } else if (c == '{' || c == '(') {
        ++depth;
      } else if (c == '}' || c == ')') {
        --depth;
      }
    }
    return depth <= 0 && !in_string;
  }

  struct Mark {
    std::size_t concepts = 0, functions = 0, statements = 0, items = 0;
  };

  std::istream& in_;
  std::ostream& out_;
  std::ostream& err_;
  bool prompts_;
  Program session_;
  Interpreter interp_;
  Mark mark_;
};

}  // namespace copri
