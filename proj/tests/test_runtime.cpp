#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <random>

#include "support.hpp"

using namespace copri;
using namespace copri::testing;

TEST_CASE("print renders each printable kind") {
  RunResult r = run_text(
      "print(10.0);\n"
      "print(0.5);\n"
      "print(7);\n"
      "print(true);\n"
      "print(false);\n"
      "print(\"text\");\n");
  REQUIRE(r.exit_code == 0);
  CHECK(r.output == "10\n0.5\n7\ntrue\nfalse\ntext\n");
}

TEST_CASE("printing an unprintable value is a print error") {
  RunResult r = run_text("Map m = new Map();\nprint(m);\n");
  CHECK(r.exit_code == 2);
  CHECK(r.error_kind == ErrorKind::Print);
}

TEST_CASE("shortest round-trip double formatting") {
  CHECK(format_double(10.0) == "10");
  CHECK(format_double(0.5) == "0.5");
  CHECK(format_double(-3.25) == "-3.25");
  std::mt19937_64 rng(20260816);
  std::uniform_real_distribution<double> dist(-1e9, 1e9);
  for (int i = 0; i < 1000; ++i) {
    double d = dist(rng);
    std::string s = format_double(d);
    CHECK(std::strtod(s.c_str(), nullptr) == d);
  }
}

TEST_CASE("unique numbers count up per interpreter") {
  RunResult r = run_text("print(getUniqueNo());\nprint(getUniqueNo());\n");
  CHECK(r.output == "ACC-0001\nACC-0002\n");
  RunResult again = run_text("print(getUniqueNo());\n");
  CHECK(again.output == "ACC-0001\n");
}

TEST_CASE("assigning return does not exit the method") {
  RunResult r = run_text(
      "int f() {\n"
      "  return = 2;\n"
      "  print(\"after\");\n"
      "}\n"
      "print(f());\n");
  CHECK(r.output == "after\n2\n");
}

TEST_CASE("arithmetic keeps ints until a double appears") {
  RunResult r = run_text(
      "print(7 / 2);\n"
      "print(7.0 / 2);\n"
      "print(1 + 2 * 3);\n"
      "print(\"a\" + \"b\");\n"
      "print(-(3) + 1);\n");
  CHECK(r.output == "3\n3.5\n7\nab\n-2\n");
}

TEST_CASE("integer division by zero is a runtime error") {
  RunResult r = run_text("print(1 / 0);\n");
  CHECK(r.exit_code == 2);
  CHECK(r.error_kind == ErrorKind::Runtime);
}

TEST_CASE("control flow and block scoping") {
  RunResult r = run_text(
      "int i = 0;\n"
      "int total = 0;\n"
      "while (i < 4) {\n"
      "  int step = i * 2;\n"
      "  total = total + step;\n"
      "  i = i + 1;\n"
      "}\n"
      "if (total == 12) print(\"yes\"); else print(\"no\");\n"
      "print(total);\n");
  CHECK(r.output == "yes\n12\n");
  RunResult leak = run_text("if (true) { int inner = 1; }\nprint(inner);\n");
  CHECK(leak.exit_code == 2);
  CHECK(leak.error_kind == ErrorKind::UnknownName);
}

TEST_CASE("a non-boolean condition is a type error") {
  RunResult r = run_text("if (1) print(\"x\");\n");
  CHECK(r.exit_code == 2);
  CHECK(r.error_kind == ErrorKind::Type);
}

TEST_CASE("maps store, overwrite, remove, and miss with null") {
  RunResult r = run_text(
      "Map m = new Map();\n"
      "m.add(\"k\", 1);\n"
      "m.add(\"k\", 2);\n"
      "print(m.get(\"k\"));\n"
      "m.remove(\"k\");\n"
      "if (m.get(\"k\") == null) print(\"gone\");\n");
  CHECK(r.output == "2\ngone\n");
}

TEST_CASE("text slots accept null, numeric slots stay strict") {
  RunResult ok = run_text(
      "String s = null;\n"
      "if (s == null) print(\"empty\");\n"
      "s = \"v\";\n"
      "print(s);\n");
  CHECK(ok.output == "empty\nv\n");
  CHECK(run_text("int n = null;\n").error_kind == ErrorKind::Type);
  CHECK(run_text("double d = \"x\";\n").error_kind == ErrorKind::Type);
  CHECK(run_text("boolean b = 1;\n").error_kind == ErrorKind::Type);
  CHECK(run_text("int n = 1.5;\n").error_kind == ErrorKind::Type);
  RunResult widen = run_text("double d = 3;\nprint(d);\n");
  CHECK(widen.output == "3\n");
}

TEST_CASE("equality is total, never an error") {
  RunResult r = run_text(
      "concept A\n  reference { String no; }\n  object { }\n"
      "A a = new A();\n"
      "if (a == null) print(\"null\"); else print(\"set\");\n"
      "if (null == null) print(\"same\");\n"
      "if (1 == 1.0) print(\"numeric\");\n"
      "if (\"x\" == 1) print(\"?\"); else print(\"diff\");\n");
  CHECK(r.output == "set\nsame\nnumeric\ndiff\n");
}

TEST_CASE("references copy by value") {
  RunResult r = run_text(
      "concept A\n"
      "  reference {\n"
      "    String no;\n"
      "    void setNo(String v) { this.no = v; }\n"
      "    String getNo() { return = this.no; }\n"
      "  }\n"
      "  object { }\n"
      "A a = new A();\n"
      "a.setNo(\"X\");\n"
      "A b = a;\n"
      "b.setNo(\"Y\");\n"
      "print(a.getNo());\n"
      "print(b.getNo());\n");
  CHECK(r.output == "X\nY\n");
}

TEST_CASE("declared concept slots reject wider or unrelated references") {
  const std::string chain =
      "concept Bank\n  reference { }\n  object { }\n"
      "concept Account in Bank\n  reference { }\n  object { }\n"
      "concept Other\n  reference { }\n  object { }\n";
  CHECK(run_text(chain + "Account a = new Bank();\n").error_kind == ErrorKind::Type);
  CHECK(run_text(chain + "Account a = new Other();\n").error_kind == ErrorKind::Type);
  RunResult ctx = run_text(chain + "Bank : Account a = new Account();\n");
  CHECK(ctx.error_kind == ErrorKind::Type);  // full-context value, narrowed slot
  RunResult ok = run_text(chain + "Account a = new Account();\nprint(\"ok\");\n");
  CHECK(ok.output == "ok\n");
}

TEST_CASE("default creation fills every level and deletion frees them") {
  Session s(
      "concept Bank\n  reference { }\n  object { }\n"
      "concept Account in Bank\n  reference { }\n  object { double balance; }\n");
  s.interp.run();
  Ref r = s.interp.create("", "Account", {});
  REQUIRE(r.segments.size() == 2);
  CHECK(r.segments[0].concept_name == "Bank");
  CHECK(r.segments[1].concept_name == "Account");
  REQUIRE(r.segments[0].hidden.has_value());
  REQUIRE(r.segments[1].hidden.has_value());
  CHECK(*r.segments[0].hidden != *r.segments[1].hidden);
  CHECK(s.interp.store().live_count() == 2);
  CHECK(s.interp.store().record(*r.segments[1].hidden).parent == *r.segments[0].hidden);
  s.interp.destroy(r);
  CHECK(s.interp.store().live_count() == 0);
  CHECK(s.interp.store().size() == 2);  // ids are never reused
}

TEST_CASE("a dead handle is detected on any later use") {
  Session s("concept A\n  reference { }\n  object { double balance; }\n");
  s.interp.run();
  Ref r = s.interp.create("", "A", {});
  std::uint64_t h = *r.segments[0].hidden;
  s.interp.destroy(r);
  try {
    s.interp.store().live(h);
    FAIL("expected a dead object error");
  } catch (const CopError& e) {
    CHECK(e.kind == ErrorKind::DeadObject);
  }
}

TEST_CASE("error taxonomy maps to the documented kinds") {
  CHECK(run_text("print(missing);\n").error_kind == ErrorKind::UnknownName);
  CHECK(run_text("missing();\n").error_kind == ErrorKind::UnknownMethod);
  CHECK(run_text("print(1, 2);\n").error_kind == ErrorKind::Arity);
  CHECK(run_text("concept A\n  reference { }\n  object { }\n"
                 "A a = new A();\na.poke();\n")
            .error_kind == ErrorKind::UnknownMethod);
  CHECK(run_text("concept A\n  reference { }\n  object { }\n"
                 "A a;\na.poke();\n")
            .error_kind == ErrorKind::Runtime);  // null variable
  CHECK(run_text("concept A\n  reference { }\n  object { }\n"
                 "A a = new A();\na.continue();\n")
            .error_kind == ErrorKind::IllegalQualifier);
  CHECK(run_text("Object o;\no.create();\n").error_kind == ErrorKind::IllegalQualifier);
}

TEST_CASE("runaway recursion is caught") {
  RunResult r = run_text("void f() { f(); }\nf();\n");
  CHECK(r.exit_code == 2);
  CHECK(r.error_kind == ErrorKind::Runtime);
}

TEST_CASE("frames and accesses unwind fully after an error") {
  Session s(
      "concept A\n"
      "  reference { void boom() { print(missing); } }\n"
      "  object { }\n"
      "A a = new A();\n"
      "a.boom();\n");
  CHECK_THROWS_AS(s.interp.run(), CopError);
  CHECK(s.interp.frame_depth() == 0);
  CHECK(s.interp.access_depth() == 0);
}

TEST_CASE("programmatic entry points mirror the language") {
  Session s(
      "concept A\n  reference { }\n  object { double balance = 5.0; "
      "double getBalance() { return = balance; } }\n"
      "int twice(int x) { return = x * 2; }\n");
  s.interp.run();
  Value v = s.interp.call_function("twice", {Value::of(std::int64_t{21})});
  CHECK(v.as_int() == 42);
  s.interp.set_global("g", TypeExpr{"", "int", true}, Value::of(std::int64_t{7}));
  REQUIRE(s.interp.global("g") != nullptr);
  CHECK(s.interp.global("g")->as_int() == 7);
  Ref r = s.interp.create("", "A", {});
  Value b = s.interp.run_access(r, "getBalance", {});
  CHECK(b.as_double() == 5.0);
}
