#include <doctest.h>

#include "difflang/diagnostics.hpp"
#include "difflang/models.hpp"
#include "difflang/parser.hpp"
#include "difflang/printer.hpp"
#include "difflang/sema.hpp"

using namespace difflang;

TEST_CASE("parser round-trips the full corpus") {
  for (const ModelEntry& m : all_models()) {
    CAPTURE(m.name);
    Program p1 = parse(m.source);
    std::string printed = print(p1);
    Program p2 = parse(printed);
    CHECK(equal(p1, p2));
    // printing is deterministic: a second round gives identical bytes
    CHECK(print(p2) == printed);
  }
}

TEST_CASE("parser reports positions on syntax errors") {
  try {
    parse("double f(double x) { return x + ; }");
    FAIL("expected a syntax error");
  } catch (const DlError& e) {
    CHECK(e.kind() == DiagKind::SyntaxError);
    CHECK(e.loc().line == 1);
  }
}

TEST_CASE("missing return is rejected") {
  CHECK_THROWS_AS(parse("double f(double x) { double y = x; }"), DlError);
}

TEST_CASE("duplicate parameter names are rejected") {
  CHECK_THROWS_AS(parse("double f(double x, double x) { return x; }"),
                  DlError);
}

TEST_CASE("duplicate function names are rejected") {
  CHECK_THROWS_AS(
      parse("double f(double x) { return x; } double f(double y) { return y; }"),
      DlError);
}

TEST_CASE("calls to unknown functions are rejected") {
  CHECK_THROWS_AS(parse("double f(double x) { return g(x); }"), DlError);
}

TEST_CASE("validate collects diagnostics instead of throwing") {
  Program p = parse_syntax("double f(double x) { return g(x); }");
  std::vector<Diagnostic> diags = validate(p);
  REQUIRE(!diags.empty());
  CHECK(diags[0].kind == DiagKind::UnknownFunction);
}

TEST_CASE("implicit int to double conversion in mixed arithmetic") {
  Program p = parse(
      "double f(int n) { double s = 0.0; s = s + n; return s; }");
  CHECK(p.find("f") != nullptr);
}

TEST_CASE("printed text parses back for generated-looking constructs") {
  const char* src =
      "double g(double* p, int dim) {\n"
      "  tape<int> t;\n"
      "  double r = 0.0;\n"
      "  for (int i = 0; i < dim; i++) {\n"
      "    r += p[push(t, i)];\n"
      "  }\n"
      "  for (int j = 0; j < dim; j++) {\n"
      "    int i = pop(t);\n"
      "    r += (double)(i == 0);\n"
      "  }\n"
      "  return r;\n"
      "}\n";
  Program p1 = parse(src);
  Program p2 = parse(print(p1));
  CHECK(equal(p1, p2));
}
