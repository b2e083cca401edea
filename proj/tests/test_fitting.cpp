#include <doctest.h>

#include <cmath>

#include "difflang/fitting.hpp"
#include "difflang/models.hpp"
#include "difflang/parser.hpp"

using namespace difflang;

TEST_CASE("histogram synthesis is deterministic") {
  Histogram a = synthesize_histogram(20000, 50, -5, 5, 0.0, 1.0, 7);
  Histogram b = synthesize_histogram(20000, 50, -5, 5, 0.0, 1.0, 7);
  CHECK(a.edges == b.edges);
  CHECK(a.counts == b.counts);
  CHECK(a.total() <= 20000.0);
}

TEST_CASE("synthesized sample mean is near mu") {
  Histogram h = synthesize_histogram(1000000, 100, -5, 5, 0.0, 1.0, 11);
  double mean = 0.0;
  for (std::size_t b = 0; b < h.bins(); ++b)
    mean += h.center(b) * h.counts[b];
  mean /= h.total();
  CHECK(std::fabs(mean) < 0.01);
}

TEST_CASE("one bin catches every in-range sample") {
  Histogram h = synthesize_histogram(5000, 1, -100, 100, 0.0, 1.0, 3);
  REQUIRE(h.bins() == 1);
  CHECK(h.counts[0] == 5000.0);
}

TEST_CASE("histogram CSV round trip") {
  Histogram h = synthesize_histogram(10000, 25, -4, 4, 0.5, 1.5, 21);
  Histogram back = histogram_from_csv(histogram_to_csv(h));
  CHECK(h.edges == back.edges);
  CHECK(h.counts == back.counts);
}

TEST_CASE("histogram CSV rejects malformed input") {
  CHECK_THROWS_AS(histogram_from_csv("nope\n"), DlError);
  CHECK_THROWS_AS(histogram_from_csv("lo,hi,count\n"), DlError);
  // non-contiguous bins
  CHECK_THROWS_AS(histogram_from_csv("lo,hi,count\n0,1,5\n2,3,5\n"), DlError);
}

TEST_CASE("objective construction inlines the model per bin") {
  const ModelEntry& m = get_model("gaus");
  Program prog = parse_model(m);
  FuncDef obj = build_objective(*prog.find("gaus"), "x", m.wrt);
  CHECK(obj.params.size() == 4);  // th, cx, y, nbins
  CHECK(obj.params[0].type == TypeKind::DoubleArray);
}

TEST_CASE("zero-count histogram with A=0 is already optimal") {
  const ModelEntry& m = get_model("gaus");
  Program prog = parse_model(m);
  Histogram h;
  h.edges = {-1.0, 0.0, 1.0};
  h.counts = {0.0, 0.0};
  FitResult r = fit(*prog.find("gaus"), "x", m.wrt, h, {0.0, 0.0, 1.0});
  CHECK(r.converged);
  CHECK(r.objective == 0.0);
  CHECK(r.iterations <= 1);
}

TEST_CASE("gaus fit recovers the synthesis parameters") {
  const ModelEntry& m = get_model("gaus");
  Program prog = parse_model(m);
  const FuncDef& f = *prog.find("gaus");
  Histogram h = synthesize_histogram(100000, 100, -5, 5, 0.0, 1.0, 42);

  FitOptions ad;  // defaults: AD backend
  FitResult ra = fit(f, "x", m.wrt, h, {0.5, 0.5, 2.0}, ad);
  FitOptions nd;
  nd.backend = GradBackend::ND;
  FitResult rn = fit(f, "x", m.wrt, h, {0.5, 0.5, 2.0}, nd);

  for (const FitResult& r : {ra, rn}) {
    CHECK(r.converged);
    CHECK(std::fabs(r.params[1] - 0.0) < 0.05);  // mu
    CHECK(std::fabs(r.params[2] - 1.0) < 0.05);  // sigma
  }
  for (int k = 0; k < 3; ++k)
    CHECK(std::fabs(ra.params[k] - rn.params[k]) < 1e-4);

  // cost accounting: one gradient per iteration for both backends; AD pays
  // one function evaluation per gradient, ND pays 2 per parameter
  CHECK(ra.grad_evals == (std::uint64_t)ra.iterations);
  CHECK(ra.gradient_func_evals == ra.grad_evals);
  CHECK(rn.grad_evals == (std::uint64_t)rn.iterations);
  CHECK(rn.gradient_func_evals == 2 * 3 * rn.grad_evals);
}
