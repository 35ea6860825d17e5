#pragma once

// Shared test helpers: one-shot program runs with captured output and trace,
// plus small source generators for hierarchy-shaped programs.

#include <functional>
#include <random>
#include <string>
#include <vector>

#include "copri/copri.hpp"

namespace copri::testing {

struct RunResult {
  std::string output;
  std::vector<TraceEvent> events;
  int exit_code = 0;
  ErrorKind error_kind = ErrorKind::Runtime;
  std::string message;
};

inline RunResult run_text(const std::string& src) {
  RunResult r;
  try {
    Program prog = parse_program(src);
    Interpreter interp(prog);
    interp.set_output([&](std::string_view s) { r.output.append(s); });
    interp.set_trace([&](const TraceEvent& e) { r.events.push_back(e); });
    interp.run();
  } catch (const CopError& e) {
    r.exit_code = is_static_error(e.kind) ? 1 : 2;
    r.error_kind = e.kind;
    r.message = e.what();
  }
  return r;
}

// A parsed program plus a live interpreter, for tests that inspect state
// after running. Not movable: the interpreter points into `prog`.
struct Session {
  Program prog;
  Interpreter interp;
  std::string output;
  std::vector<TraceEvent> events;

  explicit Session(const std::string& src) : prog(parse_program(src)), interp(prog) {
    interp.set_output([this](std::string_view s) { output.append(s); });
    interp.set_trace([this](const TraceEvent& e) { events.push_back(e); });
  }
  Session(const Session&) = delete;
  Session& operator=(const Session&) = delete;
};

inline std::vector<TraceEvent> events_for_method(const std::vector<TraceEvent>& all,
                                                 const std::string& method) {
  std::vector<TraceEvent> out;
  for (const TraceEvent& e : all)
    if (e.method == method) out.push_back(e);
  return out;
}

// Everything after the last creation finished: the access portion of a run.
inline std::vector<TraceEvent> access_events(const std::vector<TraceEvent>& all) {
  std::size_t start = 0;
  for (std::size_t i = 0; i < all.size(); ++i)
    if (all[i].kind == TraceKind::Pop && all[i].method == "create") start = i + 1;
  return {all.begin() + static_cast<std::ptrdiff_t>(start), all.end()};
}

inline std::size_t count_kind(const std::vector<TraceEvent>& events, TraceKind k) {
  std::size_t n = 0;
  for (const TraceEvent& e : events)
    if (e.kind == k) ++n;
  return n;
}

inline std::string render_events(const std::vector<TraceEvent>& events) {
  std::string out;
  for (const TraceEvent& e : events) {
    out += format_trace_event(e);
    out += '\n';
  }
  return out;
}

// Linear chain C1 .. Cdepth, each level optionally carrying a printing
// reference method (descending via sub) and/or object method (ascending via
// super), mirroring the canonical interception/override shapes.
struct ChainSpec {
  std::size_t depth = 1;
  bool ref_methods = true;
  bool obj_methods = true;
  std::string method = "work";
};

inline std::string chain_concept_name(std::size_t level) {
  return "C" + std::to_string(level);
}

inline std::string chain_source(const ChainSpec& spec) {
  std::string src;
  for (std::size_t i = 1; i <= spec.depth; ++i) {
    src += "concept " + chain_concept_name(i);
    if (i > 1) src += " in " + chain_concept_name(i - 1);
    src += "\n  reference {\n";
    if (spec.ref_methods) {
      src += "    void " + spec.method + "() {\n";
      src += "      print(\"ref-" + std::to_string(i) + "\");\n";
      src += "      sub." + spec.method + "();\n";
      src += "      print(\"ref-" + std::to_string(i) + "-out\");\n";
      src += "    }\n";
    }
    src += "  }\n  object {\n";
    if (spec.obj_methods) {
      src += "    void " + spec.method + "() {\n";
      src += "      print(\"obj-" + std::to_string(i) + "\");\n";
      src += "      super." + spec.method + "();\n";
      src += "      print(\"obj-" + std::to_string(i) + "-out\");\n";
      src += "    }\n";
    }
    src += "  }\n\n";
  }
  src += chain_concept_name(spec.depth) + " it = new " + chain_concept_name(spec.depth) +
         "();\nit." + spec.method + "();\n";
  return src;
}

}  // namespace copri::testing
