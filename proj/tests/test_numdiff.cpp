#include <doctest.h>

#include <cmath>
#include <cstring>

#include "difflang/interp.hpp"
#include "difflang/numdiff.hpp"
#include "difflang/parser.hpp"

using namespace difflang;

TEST_CASE("central difference accuracy on smooth functions") {
  Program p = parse("double f(double x) { return sin(x) * exp(x); }");
  Interpreter interp(p);
  std::vector<Value> args{Value(0.7)};
  double got = fd_partial(interp, "f", args, ArgSlot{0, -1});
  double want = std::cos(0.7) * std::exp(0.7) + std::sin(0.7) * std::exp(0.7);
  CHECK(std::fabs(got - want) <= 1e-6 * std::fabs(want));
}

TEST_CASE("fd restores perturbed inputs bitwise") {
  Program p = parse(
      "double f(double* a, double s, int dim) {\n"
      "  double r = 0.0;\n"
      "  for (int i = 0; i < dim; i++) { r += a[i] * a[i]; }\n"
      "  return r * s;\n"
      "}\n");
  Interpreter interp(p);
  std::vector<double> orig{0.1, 0.2, 0.30000000000000004, -1.5};
  std::vector<Value> args{make_array(orig), Value(1.75), Value(4)};

  std::vector<ArgSlot> slots{{0, 0}, {0, 1}, {0, 2}, {0, 3}, {1, -1}};
  fd_gradient(interp, "f", args, slots);

  const std::vector<double>& after = *args[0].as_array();
  CHECK(std::memcmp(after.data(), orig.data(),
                    orig.size() * sizeof(double)) == 0);
  CHECK(args[1].as_double() == 1.75);
}

TEST_CASE("each partial costs exactly two evaluations") {
  Program p = parse("double f(double x, double y) { return x * y; }");
  Interpreter interp(p);
  EvalStats stats;
  interp.set_stats(&stats);
  std::vector<Value> args{Value(2.0), Value(3.0)};
  fd_gradient(interp, "f", args, {{0, -1}, {1, -1}});
  CHECK(stats.func_evals == 4);
}

TEST_CASE("eps is configurable") {
  Program p = parse("double f(double x) { return x * x; }");
  Interpreter interp(p);
  std::vector<Value> args{Value(1.0)};
  // (f(1+e) - f(1-e)) / 2e == 2 exactly for e = 0.5
  double got = fd_partial(interp, "f", args, ArgSlot{0, -1}, NdOptions{0.5});
  CHECK(got == 2.0);
}
