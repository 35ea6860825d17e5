#pragma once

#include <stdexcept>
#include <string>

namespace copri {

// Static errors (Lex/Parse/Sema) abort before execution and map to exit
// code 1; everything else is raised while a program runs and maps to exit
// code 2.
enum class ErrorKind {
  Lex,
  Parse,
  Sema,
  UnknownMethod,
  UnknownField,
  UnknownName,
  DeadObject,
  Resolution,
  StackOrder,
  EmptyStack,
  IllegalQualifier,
  TypeOperator,
  Cast,
  ConcatMismatch,
  EmptyReference,
  WideningUnavailable,
  MalformedReference,
  Print,
  Type,
  Arity,
  Runtime,
};

inline const char* error_kind_name(ErrorKind k) {
  switch (k) {
    case ErrorKind::Lex: return "lex error";
    case ErrorKind::Parse: return "parse error";
    case ErrorKind::Sema: return "semantic error";
    case ErrorKind::UnknownMethod: return "unknown method";
    case ErrorKind::UnknownField: return "unknown field";
    case ErrorKind::UnknownName: return "unknown name";
    case ErrorKind::DeadObject: return "dead object";
    case ErrorKind::Resolution: return "resolution error";
    case ErrorKind::StackOrder: return "context stack order violation";
    case ErrorKind::EmptyStack: return "empty context stack";
    case ErrorKind::IllegalQualifier: return "illegal qualifier";
    case ErrorKind::TypeOperator: return "type operator error";
    case ErrorKind::Cast: return "cast error";
    case ErrorKind::ConcatMismatch: return "concatenation mismatch";
    case ErrorKind::EmptyReference: return "empty reference";
    case ErrorKind::WideningUnavailable: return "widening unavailable";
    case ErrorKind::MalformedReference: return "malformed reference";
    case ErrorKind::Print: return "print error";
    case ErrorKind::Type: return "type error";
    case ErrorKind::Arity: return "arity error";
    case ErrorKind::Runtime: return "runtime error";
  }
  return "error";
}

struct CopError : std::runtime_error {
  ErrorKind kind;
  int line;
  int column;

  CopError(ErrorKind k, const std::string& msg, int ln = 0, int col = 0)
      : std::runtime_error(msg), kind(k), line(ln), column(col) {}
};

[[noreturn]] inline void fail(ErrorKind k, const std::string& msg, int line = 0,
                              int column = 0) {
  throw CopError(k, msg, line, column);
}

inline bool is_static_error(ErrorKind k) {
  return k == ErrorKind::Lex || k == ErrorKind::Parse || k == ErrorKind::Sema;
}

// "file:line:col: message", the shape every CLI diagnostic uses on stderr.
inline std::string format_diagnostic(const std::string& file, const CopError& e) {
  std::string out = file;
  out += ':';
  out += std::to_string(e.line);
  out += ':';
  out += std::to_string(e.column);
  out += ": ";
  out += error_kind_name(e.kind);
  out += ": ";
  out += e.what();
  return out;
}

}  // namespace copri
