#include <catch2/catch_amalgamated.hpp>

#include "support.hpp"

using namespace copri;

namespace {

ConceptTable table_for(const std::string& src, Program& out) {
  out = parse_program(src);
  ConceptTable t;
  t.build(out);
  return t;
}

ErrorKind build_error(const std::string& src) {
  Program p = parse_program(src);
  ConceptTable t;
  try {
    t.build(p);
  } catch (const CopError& e) {
    return e.kind;
  }
  FAIL("expected a build error");
  return ErrorKind::Runtime;
}

const std::string kChain =
    "concept Bank\n  reference { }\n  object { }\n"
    "concept Account in Bank\n  reference { String accNo; double getBalance() { return = 0; } }\n"
    "  object { double balance; double getBalance() { return = balance; } }\n"
    "concept SavingsAccount in Account\n  reference { }\n  object { }\n";

}  // namespace

TEST_CASE("inclusion is reflexive, transitive, and rooted") {
  Program p;
  ConceptTable t = table_for(kChain, p);
  CHECK(t.is_included("SavingsAccount", "SavingsAccount"));
  CHECK(t.is_included("SavingsAccount", "Account"));
  CHECK(t.is_included("SavingsAccount", "Bank"));
  CHECK(t.is_included("SavingsAccount", "Root"));
  CHECK(t.is_included("Bank", ""));
  CHECK_FALSE(t.is_included("Bank", "Account"));
  CHECK(t.is_strictly_included("Account", "Bank"));
  CHECK_FALSE(t.is_strictly_included("Account", "Account"));
  CHECK(t.depth_of("SavingsAccount") == 3);
  CHECK(t.lineage("SavingsAccount") ==
        std::vector<std::string>{"Bank", "Account", "SavingsAccount"});
}

TEST_CASE("dual member lookup distinguishes the two sides") {
  Program p;
  ConceptTable t = table_for(kChain, p);
  REQUIRE(t.ref_method("Account", "getBalance") != nullptr);
  REQUIRE(t.obj_method("Account", "getBalance") != nullptr);
  CHECK(t.ref_method("Bank", "getBalance") == nullptr);
  CHECK(t.ref_field("Account", "accNo") != nullptr);
  CHECK(t.obj_field("Account", "accNo") == nullptr);
  CHECK(t.obj_field("Account", "balance") != nullptr);
  CHECK_FALSE(t.has_custom_continue("Account"));
}

TEST_CASE("custom protocol methods are found by side and arity") {
  Program p;
  ConceptTable t = table_for(
      "concept A\n"
      "  reference {\n"
      "    void create() { }\n"
      "    void create(String name) { }\n"
      "    void continue() { }\n"
      "    void delete() { }\n"
      "  }\n"
      "  object { void create() { } }\n",
      p);
  CHECK(t.has_custom_continue("A"));
  CHECK(t.has_create("A"));
  CHECK(t.ref_create("A", 0) != nullptr);
  CHECK(t.ref_create("A", 1) != nullptr);
  CHECK(t.ref_create("A", 2) == nullptr);
  CHECK(t.obj_create("A", 0) != nullptr);
  CHECK(t.obj_create("A", 1) == nullptr);
}

TEST_CASE("ill-formed hierarchies are rejected") {
  CHECK(build_error("concept A\n  reference { }\n  object { }\n"
                    "concept A\n  reference { }\n  object { }\n") == ErrorKind::Sema);
  CHECK(build_error("concept A in Missing\n  reference { }\n  object { }\n") ==
        ErrorKind::Sema);
  CHECK(build_error("concept A in B\n  reference { }\n  object { }\n"
                    "concept B in A\n  reference { }\n  object { }\n") == ErrorKind::Sema);
  CHECK(build_error("concept Root\n  reference { }\n  object { }\n") == ErrorKind::Sema);
}

TEST_CASE("ill-formed members are rejected") {
  CHECK(build_error("concept A\n  reference { int x; int x; }\n  object { }\n") ==
        ErrorKind::Sema);
  CHECK(build_error("concept A\n  reference { void f() { } void f() { } }\n"
                    "  object { }\n") == ErrorKind::Sema);
  CHECK(build_error("concept A\n  reference { void continue(int x) { } }\n"
                    "  object { }\n") == ErrorKind::Sema);
  CHECK(build_error("concept A\n  reference { int x; void x() { } }\n  object { }\n") ==
        ErrorKind::Sema);
}

TEST_CASE("unknown type references are static errors") {
  CHECK(build_error("Missing m;\n") == ErrorKind::Sema);
  CHECK(build_error("concept A\n  reference { Missing m; }\n  object { }\n") ==
        ErrorKind::Sema);
  CHECK(build_error("void f() { x = new Missing(); }\n") == ErrorKind::Sema);
  CHECK(build_error("concept A\n  reference { }\n  object { }\n"
                    "Missing : A v;\n") == ErrorKind::Sema);
  CHECK(build_error("Bank : int v;\n"
                    "concept Bank\n  reference { }\n  object { }\n") == ErrorKind::Sema);
}

TEST_CASE("concept names enumerate and resolve") {
  Program p;
  ConceptTable t = table_for(kChain, p);
  auto names = t.names();
  CHECK(names.size() == 3);
  CHECK(t.find("Account") != nullptr);
  CHECK(t.find("Missing") == nullptr);
  CHECK_THROWS_AS(t.require("Missing"), CopError);
}
