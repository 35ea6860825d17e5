#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "support.hpp"

using namespace copri;
using namespace copri::testing;

namespace {

namespace fs = std::filesystem;

struct TempCorpus {
  fs::path dir;

  TempCorpus() : dir(fs::temp_directory_path() / "copri_host_cases") {
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  ~TempCorpus() { fs::remove_all(dir); }

  void put(const std::string& name, const std::string& text) {
    std::ofstream out(dir / name, std::ios::binary);
    out << text;
  }
};

}  // namespace

TEST_CASE("running program text captures output and exit codes") {
  RunOutcome ok = run_program_text("print(1 + 2);\n", "mem.cop");
  CHECK(ok.exit_code == 0);
  CHECK(ok.output == "3\n");
  CHECK(ok.diagnostic.empty());

  RunOutcome bad = run_program_text("print(;\n", "mem.cop");
  CHECK(bad.exit_code == 1);
  CHECK(bad.output.empty());
  CHECK(bad.diagnostic.rfind("mem.cop:", 0) == 0);
  CHECK(bad.diagnostic.find("parse error") != std::string::npos);

  RunOutcome mid = run_program_text("print(\"early\");\nint x = 1 / 0;\n", "mem.cop");
  CHECK(mid.exit_code == 2);
  CHECK(mid.output == "early\n");  // output before the failure is kept
  CHECK(mid.diagnostic.find("runtime error") != std::string::npos);
}

TEST_CASE("running program text forwards trace events") {
  std::vector<TraceEvent> events;
  RunOutcome out = run_program_text(
      "concept A\n  reference { }\n  object { }\nA a = new A();\n", "mem.cop",
      [&](const TraceEvent& e) { events.push_back(e); });
  REQUIRE(out.exit_code == 0);
  CHECK(count_kind(events, TraceKind::Push) == 1);
  CHECK(count_kind(events, TraceKind::Pop) == 1);
}

TEST_CASE("checking validates declarations without executing anything") {
  CHECK(check_program_text("print(1 / 0);\n", "mem.cop").exit_code == 0);

  RunOutcome sema = check_program_text(
      "concept A in Missing\n  reference { }\n  object { }\n", "mem.cop");
  CHECK(sema.exit_code == 1);
  CHECK(sema.diagnostic.find("semantic error") != std::string::npos);

  RunOutcome parse = check_program_text("concept\n", "mem.cop");
  CHECK(parse.exit_code == 1);
  CHECK(parse.diagnostic.find("parse error") != std::string::npos);
}

TEST_CASE("reading files distinguishes missing from empty") {
  TempCorpus tmp;
  tmp.put("data.txt", "bytes\n");
  auto text = read_file((tmp.dir / "data.txt").string());
  REQUIRE(text.has_value());
  CHECK(*text == "bytes\n");
  CHECK(!read_file((tmp.dir / "nope.txt").string()).has_value());
}

TEST_CASE("golden cases load sorted with expected output and exit sidecars") {
  TempCorpus tmp;
  tmp.put("alpha.cop", "print(1);\n");
  tmp.put("alpha.expected", "1\n");
  tmp.put("beta.cop", "int x = 1 / 0;\n");
  tmp.put("beta.expected", "");
  tmp.put("beta.exit", "2");
  tmp.put("delta.cop", "print(4);\n");  // no .expected side
  tmp.put("gamma.cop", "print(2);\n");
  tmp.put("gamma.expected", "3\n");

  std::vector<GoldenCase> cases = load_golden_cases(tmp.dir.string());
  REQUIRE(cases.size() == 4);
  CHECK(cases[0].name == "alpha");
  CHECK(cases[1].name == "beta");
  CHECK(cases[2].name == "delta");
  CHECK(cases[3].name == "gamma");
  CHECK(cases[0].expected_exit == 0);
  CHECK(cases[1].expected_exit == 2);
  CHECK(cases[0].complete);
  CHECK(!cases[2].complete);

  CaseResult pass = run_golden_case(cases[0]);
  CHECK(pass.passed);
  CaseResult exit_ok = run_golden_case(cases[1]);
  CHECK(exit_ok.passed);
  CaseResult incomplete = run_golden_case(cases[2]);
  CHECK(!incomplete.passed);
  CHECK(incomplete.detail == "missing expected output file");
  CaseResult diff = run_golden_case(cases[3]);
  CHECK(!diff.passed);
  CHECK(diff.detail == "line 1: expected \"3\", got \"2\"");

  std::vector<CaseResult> serial = run_corpus(cases, 1);
  std::vector<CaseResult> parallel = run_corpus(cases, 2);
  REQUIRE(serial.size() == parallel.size());
  for (std::size_t i = 0; i < serial.size(); ++i) {
    CHECK(serial[i].name == parallel[i].name);
    CHECK(serial[i].passed == parallel[i].passed);
  }

  CHECK(load_golden_cases((tmp.dir / "absent").string()).empty());
}

TEST_CASE("the first difference report names the earliest mismatching line") {
  CHECK(first_difference("a\nb\n", "a\nc\n") == "line 2: expected \"c\", got \"b\"");
  CHECK(first_difference("a\n", "a\nb\n") == "line 2: missing, expected \"b\"");
  CHECK(first_difference("a\nb\n", "a\n") == "line 2: unexpected \"b\"");
  CHECK(first_difference("x", "x\n") == "outputs differ in trailing bytes");
}

TEST_CASE("the bundled corpus passes serially and across threads") {
  std::vector<GoldenCase> cases = load_golden_cases(COPRI_CORPUS_DIR);
  REQUIRE(cases.size() >= 14);
  for (const GoldenCase& c : cases) CHECK(c.complete);

  std::vector<CaseResult> serial = run_corpus(cases, 1);
  for (const CaseResult& r : serial) {
    INFO(r.name << ": " << r.detail);
    CHECK(r.passed);
  }
  std::vector<CaseResult> parallel = run_corpus(cases, 4);
  for (std::size_t i = 0; i < serial.size(); ++i)
    CHECK(parallel[i].passed == serial[i].passed);
}

TEST_CASE("a session evaluates expressions and keeps state across chunks") {
  std::istringstream in(
      "int x = 40;\n"
      "x + 2\n"
      "concept A reference { void hi() { print(\"inside\"); } } object { }\n"
      "A a = new A();\n"
      "a.hi()\n"
      "1 / 0\n"
      "x\n"
      "exit\n");
  std::ostringstream out, err;
  Repl repl(in, out, err, false);
  CHECK(repl.run() == 0);
  CHECK(out.str() == "42\ninside\n40\n");
  CHECK(err.str().find("<repl>:") != std::string::npos);
  CHECK(err.str().find("runtime error") != std::string::npos);
}

TEST_CASE("a session keeps reading while delimiters are open") {
  std::istringstream in(
      "(1 +\n"
      "2) * 3\n"
      "exit\n");
  std::ostringstream out, err;
  Repl repl(in, out, err, false);
  repl.run();
  CHECK(out.str() == "9\n");
  CHECK(err.str().empty());
}

TEST_CASE("a rejected declaration rolls back and the session stays usable") {
  std::istringstream in(
      "concept B reference { } object { }\n"
      "new B()\n"
      "concept B reference { } object { }\n"
      "new B()\n"
      "exit\n");
  std::ostringstream out, err;
  Repl repl(in, out, err, false);
  repl.run();
  CHECK(out.str() == "<B>\n<B>\n");
  CHECK(err.str().find("semantic error") != std::string::npos);
}

TEST_CASE("session echo covers every value kind") {
  CHECK(repl_format(Value::null()) == "null");
  CHECK(repl_format(Value::void_value()) == "");
  CHECK(repl_format(Value::of(false)) == "false");
  CHECK(repl_format(Value::of(2.5)) == "2.5");
  CHECK(repl_format(Value::of(std::string("t"))) == "t");
  CHECK(repl_format(Value::concept_name("A")) == "A");
  CHECK(repl_format(Value::handle(7)) == "<object 7>");
  CHECK(repl_format(Value::map(3)) == "<map 3>");

  Ref r;
  r.context_name = "Bank";
  r.segments.push_back({"Account", {}, std::nullopt});
  CHECK(repl_format(Value::of(r)) == "<Bank : Account>");
}

TEST_CASE("prompts appear only in interactive mode") {
  std::istringstream in("exit\n");
  std::ostringstream out, err;
  Repl repl(in, out, err);
  repl.run();
  CHECK(out.str() == "copri> \n");
}
