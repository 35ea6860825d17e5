#include <catch2/catch_amalgamated.hpp>

#include "support.hpp"

using namespace copri;
using namespace copri::testing;

namespace {

struct Algebra {
  Program prog;
  ConceptTable table;

  explicit Algebra(const std::string& src) : prog(parse_program(src)) {
    table.build(prog);
  }
};

const std::string kChain =
    "concept Bank\n  reference { String bankNo; }\n  object { }\n"
    "concept Account in Bank\n  reference { String accNo; }\n  object { }\n"
    "concept SavingsAccount in Account\n  reference { String subAccNo; }\n  object { }\n";

}  // namespace

TEST_CASE("a default reference is the lineage below its context") {
  Algebra a(kChain);
  Ref full = build_default_ref(a.table, "", "SavingsAccount");
  REQUIRE(full.segments.size() == 3);
  CHECK(full.context_name == "");
  CHECK(full.segments[0].concept_name == "Bank");
  CHECK(full.segments[2].concept_name == "SavingsAccount");
  CHECK(is_well_formed_ref(a.table, full));
  CHECK(ref_real_concept(full) == "SavingsAccount");

  Ref narrow = build_default_ref(a.table, "Account", "SavingsAccount");
  REQUIRE(narrow.segments.size() == 1);
  CHECK(narrow.context_name == "Account");

  CHECK_THROWS_AS(build_default_ref(a.table, "SavingsAccount", "SavingsAccount"),
                  CopError);
  CHECK_THROWS_AS(build_default_ref(a.table, "Account", "Bank"), CopError);
}

TEST_CASE("right cast truncates or extends the tail") {
  Algebra a(kChain);
  Ref full = build_default_ref(a.table, "", "SavingsAccount");

  Ref cut = ref_right_cast(a.table, full, "Account");
  CHECK(ref_real_concept(cut) == "Account");
  CHECK(cut.segments.size() == 2);
  CHECK(cut.context_name == "");

  Ref back = ref_right_cast(a.table, cut, "SavingsAccount");
  CHECK(ref_real_concept(back) == "SavingsAccount");
  CHECK(back.segments.size() == 3);

  CHECK(reference_equals(ref_right_cast(a.table, full, "SavingsAccount"), full));
  CHECK_THROWS_AS(ref_right_cast(a.table, full, "Root"), CopError);
}

TEST_CASE("left cast narrows the context or widens from an enclosing reference") {
  Algebra a(kChain);
  Ref full = build_default_ref(a.table, "", "SavingsAccount");

  Ref tail = ref_left_cast(a.table, "Account", full, {});
  CHECK(tail.context_name == "Account");
  REQUIRE(tail.segments.size() == 1);
  CHECK(tail.segments[0].concept_name == "SavingsAccount");

  CHECK(reference_equals(ref_left_cast(a.table, "Root", full, {}), full));

  // Widening needs an enclosing reference that still holds the outer levels.
  CHECK_THROWS_AS(ref_left_cast(a.table, "Root", tail, {}), CopError);
  Ref widened = ref_left_cast(a.table, "Root", tail, {&full});
  CHECK(reference_equals(widened, full));
}

TEST_CASE("concatenation joins exactly at the junction") {
  Algebra a(kChain);
  Ref full = build_default_ref(a.table, "", "SavingsAccount");
  Ref upper = ref_right_cast(a.table, full, "Account");
  Ref lower = ref_left_cast(a.table, "Account", full, {});

  Ref whole = ref_concat(upper, lower);
  CHECK(reference_equals(whole, full));

  Ref bank_only = ref_right_cast(a.table, full, "Bank");
  try {
    ref_concat(bank_only, lower);  // junction Bank != context Account
    FAIL("expected a junction mismatch");
  } catch (const CopError& e) {
    CHECK(e.kind == ErrorKind::ConcatMismatch);
  }
}

TEST_CASE("field values ride along through casts by value") {
  Algebra a(kChain);
  Ref full = build_default_ref(a.table, "", "SavingsAccount");
  full.segments[1].fields[0].value = Value::of(std::string("ACC-7"));

  Ref cut = ref_right_cast(a.table, full, "Account");
  cut.segments[1].fields[0].value = Value::of(std::string("ACC-8"));
  CHECK(full.segments[1].fields[0].value.as_text() == "ACC-7");  // unshared

  Ref lower = ref_left_cast(a.table, "Account", full, {});
  Ref whole = ref_concat(ref_right_cast(a.table, full, "Account"), lower);
  CHECK(whole.segments[1].fields[0].value.as_text() == "ACC-7");
}

TEST_CASE("surface operators agree with the reference algebra") {
  RunResult r = run_text(
      kChain +
      "SavingsAccount acc = new SavingsAccount();\n"
      "Account up = acc : Account;\n"
      "Account : SavingsAccount down = Account : acc;\n"
      "SavingsAccount whole = up : down;\n"
      "print(instanceof(up));\n"
      "print(contextof(down));\n"
      "print(instanceof(whole));\n"
      "print(concept(up) == instanceof(up));\n"
      "print(concept(acc) >= instanceof(acc));\n"
      "print(contextof(acc) > instanceof(acc));\n"
      "print(instanceof(acc) > instanceof(acc));\n");
  REQUIRE(r.exit_code == 0);
  CHECK(r.output == "Account\nAccount\nSavingsAccount\ntrue\ntrue\ntrue\nfalse\n");
}

TEST_CASE("type operators reject unusable operands") {
  CHECK(run_text("int x = 1;\nprint(concept(x));\n").error_kind ==
        ErrorKind::TypeOperator);
  CHECK(run_text(kChain + "Account a;\nprint(instanceof(a));\n").error_kind ==
        ErrorKind::TypeOperator);
  CHECK(run_text("print(concept(noSuchVar));\n").error_kind == ErrorKind::TypeOperator);
}

TEST_CASE("the declared context operator reads the declaration, not the value") {
  RunResult r = run_text(
      kChain +
      "Bank : Account a = Bank : (new Account());\n"
      "print(context(a));\n"
      "print(contextof(a));\n"
      "print(concept(a));\n");
  REQUIRE(r.exit_code == 0);
  CHECK(r.output == "Bank\nBank\nAccount\n");
}
