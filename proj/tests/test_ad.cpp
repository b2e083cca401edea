#include <doctest.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "difflang/forward.hpp"
#include "difflang/interp.hpp"
#include "difflang/models.hpp"
#include "difflang/numdiff.hpp"
#include "difflang/parser.hpp"
#include "difflang/printer.hpp"
#include "difflang/reverse.hpp"

#include "support.hpp"

using namespace difflang;
using testsupport::Rng;

namespace {

// Forward derivative value of `fn` wrt one request at `args`.
double fwd_at(const Program& base, const std::string& fn,
              const DiffRequest& req, const std::vector<Value>& args) {
  Program p;
  for (const FuncDef& f : base.functions) p.functions.push_back(clone(f));
  DerivedFunc d = differentiate(*p.find(fn), req);
  std::string name = d.derivative.name;
  p.functions.push_back(std::move(d.derivative));
  Interpreter interp(p);
  return interp.call(name, args).as_double();
}

}  // namespace

TEST_CASE("forward and reverse match the closed form on random points") {
  const long long dim = 7;
  for (const ModelEntry& m : all_models()) {
    CAPTURE(m.name);
    Program prog = parse_model(m);
    const FuncDef& f = *prog.find(m.name);
    long long n = wrt_dim(m, dim);
    std::vector<ArgSlot> slots = wrt_slots(m, dim);

    GradFunc g = gradient(f, GradRequest{m.wrt});
    std::string grad_name = g.gradient.name;
    Program gprog;
    gprog.functions.push_back(clone(f));
    gprog.functions.push_back(std::move(g.gradient));
    Interpreter interp(gprog);

    Rng rng{0x5eed0000 + (std::uint64_t)m.name.size()};
    for (int pt = 0; pt < 100; ++pt) {
      std::vector<Value> args = testsupport::random_args(f, dim, rng);
      std::vector<double> ref = reference_gradient(m, args);
      std::vector<double> ad =
          testsupport::eval_gradient(interp, grad_name, args, std::size_t(n));
      std::vector<double> fd = fd_gradient(interp, m.name, args, slots);
      for (long long k = 0; k < n; ++k) {
        double scale = std::max(1.0, std::fabs(ref[std::size_t(k)]));
        CHECK(std::fabs(ad[std::size_t(k)] - ref[std::size_t(k)]) <=
              1e-12 * scale);
        CHECK(std::fabs(fd[std::size_t(k)] - ref[std::size_t(k)]) <=
              1e-5 * scale);
      }
      // forward mode, spot-checked on three slots to keep runtime low
      for (long long k = 0; k < std::min<long long>(n, 3); ++k) {
        DiffRequest req;
        if (m.dim_scalable) {
          req.wrt = m.wrt[0];
          req.wrt_index = k;
        } else {
          req.wrt = m.wrt[std::size_t(k)];
        }
        double dv = fwd_at(prog, m.name, req, args);
        double scale = std::max(1.0, std::fabs(ref[std::size_t(k)]));
        CHECK(std::fabs(dv - ref[std::size_t(k)]) <= 1e-12 * scale);
      }
    }
  }
}

TEST_CASE("differentiating by an unknown parameter throws") {
  Program p = parse("double f(double x) { return x * x; }");
  DiffRequest req;
  req.wrt = "y";
  CHECK_THROWS_AS(differentiate(*p.find("f"), req), DlError);
  CHECK_THROWS_AS(gradient(*p.find("f"), GradRequest{{"y"}}), DlError);
}

TEST_CASE("generated sources survive a print/parse round trip") {
  for (const ModelEntry& m : all_models()) {
    CAPTURE(m.name);
    std::string gsrc = gradient_source(m.source, m.name, m.wrt);
    Program back = parse(m.source + "\n" + gsrc);
    CHECK(back.find(m.name + "_grad") != nullptr);
  }
}

TEST_CASE("gradient accumulates: calling twice doubles _result") {
  const ModelEntry& m = get_model("mvn");
  Program prog = parse_model(m);
  const FuncDef& f = *prog.find(m.name);
  GradFunc g = gradient(f, GradRequest{m.wrt});
  std::string grad_name = g.gradient.name;
  prog.functions.push_back(std::move(g.gradient));
  Interpreter interp(prog);

  const long long dim = 6;
  Rng rng{99};
  std::vector<Value> args = testsupport::random_args(prog.functions[0], dim,
                                                     rng);
  std::vector<double> once =
      testsupport::eval_gradient(interp, grad_name, args, std::size_t(dim));

  Value res = make_array(std::vector<double>(std::size_t(dim), 0.0));
  for (int rep = 0; rep < 2; ++rep) {
    std::vector<Value> a = args;
    a.push_back(res);
    interp.call(grad_name, std::move(a));
  }
  for (long long k = 0; k < dim; ++k)
    CHECK((*res.as_array())[std::size_t(k)] == 2.0 * once[std::size_t(k)]);
}

TEST_CASE("scalar gradient slots follow the request order") {
  Program p = parse(
      "double f(double a, double b) { return a * b * b; }");
  GradFunc g = gradient(*p.find("f"), GradRequest{{"b", "a"}});
  std::string name = g.gradient.name;
  p.functions.push_back(std::move(g.gradient));
  Interpreter interp(p);
  std::vector<double> got = testsupport::eval_gradient(
      interp, name, {Value(3.0), Value(2.0)}, 2);
  CHECK(got[0] == 12.0);  // d/db = 2ab, requested first
  CHECK(got[1] == 4.0);   // d/da = b^2
}

TEST_CASE("structural golden: sum gradient") {
  const ModelEntry& m = get_model("sum");
  Program prog = parse_model(m);
  GradFunc g = gradient(*prog.find("sum"), GradRequest{m.wrt});

  std::ifstream in(std::string(GOLDEN_DIR) + "/sum_grad.dl");
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  Program golden = parse(ss.str());
  REQUIRE(golden.functions.size() == 1);
  CHECK(equal(g.gradient, golden.functions[0]));
}

TEST_CASE("sum gradient evaluates to all ones") {
  const ModelEntry& m = get_model("sum");
  Program prog = parse_model(m);
  GradFunc g = gradient(*prog.find("sum"), GradRequest{m.wrt});
  std::string name = g.gradient.name;
  prog.functions.push_back(std::move(g.gradient));
  Interpreter interp(prog);
  for (long long dim : {1LL, 5LL, 64LL}) {
    std::vector<double> ones =
        testsupport::eval_gradient(interp, name,
                                   model_args(m, dim), std::size_t(dim));
    for (double v : ones) CHECK(v == 1.0);
  }
}

TEST_CASE("unsupported constructs are rejected with a diagnostic") {
  // user-defined calls inside the differentiated function
  Program p1 = parse(
      "double h(double x) { return x; }\n"
      "double f(double x) { return h(x); }");
  CHECK_THROWS_AS(gradient(*p1.find("f"), GradRequest{{"x"}}), DlError);

  // assigning through an array parameter
  Program p2 = parse(
      "double f(double* a, int dim) { a[0] = 1.0; return a[0]; }");
  CHECK_THROWS_AS(gradient(*p2.find("f"), GradRequest{{"a"}}), DlError);

  // mixing an array and a scalar in one request
  Program p3 = parse(
      "double f(double* a, double s, int dim) { return a[0] * s; }");
  CHECK_THROWS_AS(gradient(*p3.find("f"), GradRequest{{"a", "s"}}), DlError);
}
