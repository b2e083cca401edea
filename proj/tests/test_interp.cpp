#include <doctest.h>

#include <cmath>

#include "difflang/interp.hpp"
#include "difflang/parser.hpp"

using namespace difflang;

namespace {

double run1(const char* src, const char* fn, std::vector<Value> args) {
  Program p = parse(src);
  Interpreter interp(p);
  return interp.call(fn, std::move(args)).as_double();
}

}  // namespace

TEST_CASE("basic arithmetic and control flow") {
  CHECK(run1("double f(double x) { return 2.0 * x + 1.0; }", "f", {Value(3.0)})
        == 7.0);
  CHECK(run1("double f(double x) { if (x > 0.0) { return x; } return -x; }",
             "f", {Value(-4.0)}) == 4.0);
  CHECK(run1("double f(int n) { double s = 0.0;"
             " for (int i = 0; i < n; i++) { s += 1.0; } return s; }",
             "f", {Value(5)}) == 5.0);
}

TEST_CASE("intrinsics match libm") {
  CHECK(run1("double f(double x) { return sin(x); }", "f", {Value(0.3)})
        == std::sin(0.3));
  CHECK(run1("double f(double x) { return pow(x, 3.0); }", "f", {Value(2.0)})
        == 8.0);
}

TEST_CASE("arrays have reference semantics") {
  Program p = parse(
      "double store(double* a) { a[0] = 7.0; return 0.0; }");
  Interpreter interp(p);
  Value arr = make_array({1.0, 2.0});
  interp.call("store", {arr});
  CHECK((*arr.as_array())[0] == 7.0);
}

TEST_CASE("default arguments are filled in") {
  CHECK(run1("double f(double x, double y = 2.5) { return x + y; }", "f",
             {Value(1.0)}) == 3.5);
}

TEST_CASE("domain errors") {
  CHECK_THROWS_AS(run1("double f(double x) { return log(x); }", "f",
                       {Value(-1.0)}),
                  DlError);
  CHECK_THROWS_AS(run1("double f(double x) { return sqrt(x); }", "f",
                       {Value(-1.0)}),
                  DlError);
}

TEST_CASE("out-of-bounds indexing throws") {
  Program p = parse("double f(double* a) { return a[3]; }");
  Interpreter interp(p);
  CHECK_THROWS_AS(interp.call("f", {make_array({1.0})}), DlError);
}

TEST_CASE("non-terminating loops hit the step guard") {
  Program p = parse(
      "double f(int n) { double s = 0.0;"
      " for (int i = 0; i < n; i++) { s += 1.0; } return s; }");
  EvalOptions opts;
  opts.max_steps = 10000;
  Interpreter interp(p, opts);
  CHECK_THROWS_AS(interp.call("f", {Value(2000000000LL)}), DlError);
}

TEST_CASE("tape push/pop is LIFO") {
  const char* src =
      "double f(int n) {\n"
      "  tape<double> t;\n"
      "  for (int i = 0; i < n; i++) {\n"
      "    double v = push(t, 1.0 + i);\n"
      "    v = v;\n"
      "  }\n"
      "  double bad = 0.0;\n"
      "  for (int j = 0; j < n; j++) {\n"
      "    double expect = (double)(n - j);\n"
      "    if (pop(t) != expect) { bad += 1.0; }\n"
      "  }\n"
      "  return bad;\n"
      "}\n";
  CHECK(run1(src, "f", {Value(17)}) == 0.0);
}

TEST_CASE("push returns the pushed value") {
  CHECK(run1("double f(double x) { tape<double> t; return push(t, x) * 2.0; }",
             "f", {Value(3.0)}) == 6.0);
}

TEST_CASE("pop on an empty tape throws") {
  Program p = parse("double f() { tape<double> t; return pop(t); }");
  Interpreter interp(p);
  try {
    interp.call("f", {});
    FAIL("expected PopOnEmpty");
  } catch (const DlError& e) {
    CHECK(e.kind() == DiagKind::PopOnEmpty);
  }
}

TEST_CASE("EvalStats counts calls and operations") {
  Program p = parse(
      "double g(double x) { return x * x; }\n"
      "double f(double x) { return g(x) + g(2.0 * x); }");
  Interpreter interp(p);
  EvalStats stats;
  interp.set_stats(&stats);
  interp.call("f", {Value(1.5)});
  CHECK(stats.func_evals == 3);  // f plus two calls to g
  CHECK(stats.scalar_ops > 0);

  // deterministic: the same call costs the same ops
  EvalStats again;
  interp.set_stats(&again);
  interp.call("f", {Value(1.5)});
  CHECK(again.scalar_ops == stats.scalar_ops);
  CHECK(again.func_evals == stats.func_evals);
}

TEST_CASE("arity and type mismatches at call time") {
  Program p = parse("double f(double x) { return x; }");
  Interpreter interp(p);
  CHECK_THROWS_AS(interp.call("f", {}), DlError);
  CHECK_THROWS_AS(interp.call("f", {make_array({1.0})}), DlError);
  CHECK_THROWS_AS(interp.call("nope", {Value(1.0)}), DlError);
}
