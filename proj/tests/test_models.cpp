#include <doctest.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "difflang/interp.hpp"
#include "difflang/models.hpp"

using namespace difflang;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// models/<name>.dl; breitwigner_pdf lives in breitwigner.dl
std::string model_file(const std::string& name) {
  std::string base = name == "breitwigner_pdf" ? "breitwigner" : name;
  return std::string(MODELS_DIR) + "/" + base + ".dl";
}

}  // namespace

TEST_CASE("embedded sources match the files byte for byte") {
  for (const ModelEntry& m : all_models()) {
    CAPTURE(m.name);
    CHECK(m.source == slurp(model_file(m.name)));
  }
}

TEST_CASE("get_model rejects unknown names") {
  try {
    get_model("nope");
    FAIL("expected UnknownModel");
  } catch (const DlError& e) {
    CHECK(e.kind() == DiagKind::UnknownModel);
  }
}

TEST_CASE("model_args are deterministic and in-domain") {
  for (const ModelEntry& m : all_models()) {
    CAPTURE(m.name);
    Program prog = parse_model(m);
    Interpreter interp(prog);
    std::vector<Value> a1 = model_args(m, 9);
    double v = interp.call(m.name, a1).as_double();
    CHECK(std::isfinite(v));

    std::vector<Value> a2 = model_args(m, 9);
    double v2 = interp.call(m.name, std::move(a2)).as_double();
    CHECK(v == v2);
  }
}

TEST_CASE("wrt_dim and wrt_slots agree") {
  for (const ModelEntry& m : all_models()) {
    for (long long dim : {1LL, 5LL, 32LL}) {
      CHECK((long long)wrt_slots(m, dim).size() == wrt_dim(m, dim));
      if (!m.dim_scalable) break;
    }
  }
}

TEST_CASE("closed-form sum gradient is all ones") {
  const ModelEntry& m = get_model("sum");
  std::vector<double> g = reference_gradient(m, model_args(m, 11));
  REQUIRE(g.size() == 11);
  for (double v : g) CHECK(v == 1.0);
}

TEST_CASE("closed-form gaus gradient spot check") {
  // at x=mu the mu-partial vanishes and dA is exp(0) = 1
  const ModelEntry& m = get_model("gaus");
  std::vector<Value> args{Value(0.3), Value(2.0), Value(0.3), Value(1.3)};
  std::vector<double> g = reference_gradient(m, args);
  REQUIRE(g.size() == 3);
  CHECK(g[0] == 1.0);
  CHECK(g[1] == 0.0);
  CHECK(g[2] == 0.0);
}
