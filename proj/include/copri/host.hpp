#pragma once

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "copri/diagnostics.hpp"
#include "copri/interpreter.hpp"
#include "copri/lexer.hpp"
#include "copri/parser.hpp"
#include "copri/trace.hpp"

namespace copri {

inline std::optional<std::string> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct RunOutcome {
  int exit_code = 0;  // 0 ok, 1 parse or sema diagnostic, 2 runtime error
  std::string output;
  std::string diagnostic;
};

// Runs a whole program, capturing standard output. Output produced before a
// runtime error is kept.
inline RunOutcome run_program_text(const std::string& text, const std::string& file_name,
                                   TraceFn trace = nullptr) {
  RunOutcome out;
  try {
    Program prog = parse_program(text);
    Interpreter interp(prog);
    interp.set_output([&](std::string_view s) { out.output.append(s); });
    if (trace) interp.set_trace(std::move(trace));
    interp.run();
  } catch (const CopError& e) {
    out.exit_code = is_static_error(e.kind) ? 1 : 2;
    out.diagnostic = format_diagnostic(file_name, e);
  }
  return out;
}

// Frontend and declaration checks only; nothing executes.
inline RunOutcome check_program_text(const std::string& text,
                                     const std::string& file_name) {
  RunOutcome out;
  try {
    Program prog = parse_program(text);
    ConceptTable table;
    table.build(prog);
  } catch (const CopError& e) {
    out.exit_code = 1;
    out.diagnostic = format_diagnostic(file_name, e);
  }
  return out;
}

// ---- golden-file harness -----------------------------------------------------

struct GoldenCase {
  std::string name;
  std::string program_path;
  std::string expected_output;
  int expected_exit = 0;
  bool complete = true;  // false when the .expected side is missing
};

struct CaseResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

inline std::vector<GoldenCase> load_golden_cases(const std::string& dir) {
  namespace fs = std::filesystem;
  std::vector<GoldenCase> cases;
  if (!fs::is_directory(dir)) return cases;
  for (const fs::directory_entry& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".cop") continue;
    GoldenCase c;
    c.name = entry.path().stem().string();
    c.program_path = entry.path().string();
    fs::path expected = entry.path();
    expected.replace_extension(".expected");
    if (auto text = read_file(expected.string())) {
      c.expected_output = std::move(*text);
    } else {
      c.complete = false;
    }
    fs::path exit_file = entry.path();
    exit_file.replace_extension(".exit");
    if (auto text = read_file(exit_file.string()))
      c.expected_exit = std::stoi(*text);
    cases.push_back(std::move(c));
  }
  std::sort(cases.begin(), cases.end(),
            [](const GoldenCase& a, const GoldenCase& b) { return a.name < b.name; });
  return cases;
}

inline std::string first_difference(const std::string& got, const std::string& want) {
  std::istringstream gs(got), ws(want);
  std::string gl, wl;
  int line = 0;
  while (true) {
    ++line;
    bool has_g = static_cast<bool>(std::getline(gs, gl));
    bool has_w = static_cast<bool>(std::getline(ws, wl));
    if (!has_g && !has_w) return "outputs differ in trailing bytes";
    if (!has_g)
      return "line " + std::to_string(line) + ": missing, expected \"" + wl + "\"";
    if (!has_w)
      return "line " + std::to_string(line) + ": unexpected \"" + gl + "\"";
    if (gl != wl)
      return "line " + std::to_string(line) + ": expected \"" + wl + "\", got \"" + gl +
             "\"";
  }
}

inline CaseResult run_golden_case(const GoldenCase& c) {
  CaseResult r;
  r.name = c.name;
  if (!c.complete) {
    r.detail = "missing expected output file";
    return r;
  }
  auto text = read_file(c.program_path);
  if (!text) {
    r.detail = "cannot read program";
    return r;
  }
  RunOutcome out = run_program_text(*text, c.program_path);
  if (out.exit_code != c.expected_exit) {
    r.detail = "exit code " + std::to_string(out.exit_code) + ", expected " +
               std::to_string(c.expected_exit);
    if (!out.diagnostic.empty()) r.detail += " (" + out.diagnostic + ")";
    return r;
  }
  if (out.output != c.expected_output) {
    r.detail = first_difference(out.output, c.expected_output);
    return r;
  }
  r.passed = true;
  return r;
}

// Runs every case, optionally across threads; results come back in case order.
inline std::vector<CaseResult> run_corpus(const std::vector<GoldenCase>& cases,
                                          unsigned jobs = 1) {
  std::vector<CaseResult> results(cases.size());
  if (cases.empty()) return results;
  jobs = std::max(1u, std::min<unsigned>(jobs, cases.size()));
  if (jobs == 1) {
    for (std::size_t i = 0; i < cases.size(); ++i) results[i] = run_golden_case(cases[i]);
    return results;
  }
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    while (true) {
      std::size_t i = next.fetch_add(1);
      if (i >= cases.size()) break;
      results[i] = run_golden_case(cases[i]);
    }
  };
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < jobs; ++t) pool.emplace_back(worker);
  for (std::thread& t : pool) t.join();
  return results;
}

}  // namespace copri
