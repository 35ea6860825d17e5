#pragma once

#include <cstdint>
#include <functional>
#include <string>

namespace copri {

enum class TraceKind {
  RefEnter,   // reference method starts at a level (defaults included)
  RefExit,    // reference method finishes at a level
  Resolve,    // continuation reaches a level
  Push,       // object handle recorded for a level
  ObjEnter,   // object method starts at a level
  ObjExit,    // object method finishes at a level
  Target,     // continuation reached the accessed target
  Pop         // access finished, its context discarded
};

inline const char* trace_kind_name(TraceKind k) {
  switch (k) {
    case TraceKind::RefEnter: return "ref-enter";
    case TraceKind::RefExit: return "ref-exit";
    case TraceKind::Resolve: return "resolve";
    case TraceKind::Push: return "push";
    case TraceKind::ObjEnter: return "obj-enter";
    case TraceKind::ObjExit: return "obj-exit";
    case TraceKind::Target: return "target";
    case TraceKind::Pop: return "pop";
  }
  return "?";
}

struct TraceEvent {
  TraceKind kind;
  std::string concept_name;  // empty for target/pop
  std::string method;
  std::size_t level = 0;  // 1-based segment position, 0 when not applicable
};

using TraceFn = std::function<void(const TraceEvent&)>;

inline const char* trace_side_name(TraceKind k) {
  switch (k) {
    case TraceKind::RefEnter:
    case TraceKind::RefExit:
    case TraceKind::Resolve: return "ref";
    case TraceKind::Push:
    case TraceKind::ObjEnter:
    case TraceKind::ObjExit:
    case TraceKind::Target: return "obj";
    case TraceKind::Pop: return "-";
  }
  return "?";
}

inline std::string format_trace_event(const TraceEvent& e) {
  std::string s = "EVT ";
  s += trace_kind_name(e.kind);
  s += ' ';
  s += e.concept_name.empty() ? "-" : e.concept_name;
  s += ' ';
  s += trace_side_name(e.kind);
  s += ' ';
  s += e.method.empty() ? "-" : e.method;
  s += ' ';
  s += std::to_string(e.level);
  return s;
}

}  // namespace copri
