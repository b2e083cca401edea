#include <doctest.h>

#include "difflang/bench.hpp"

using namespace difflang;

namespace {

const BenchRow& find_row(const BenchReport& r, long long dim,
                         const std::string& backend) {
  for (const BenchRow& row : r.rows)
    if (row.dim == dim && row.backend == backend) return row;
  REQUIRE(false);
  return r.rows.front();
}

}  // namespace

TEST_CASE("evaluation counts: one sweep for reverse AD, 2*dim for ND") {
  for (const char* name : {"sum", "mvn"}) {
    CAPTURE(name);
    const ModelEntry& m = get_model(name);
    BenchReport r =
        run_scaling(m, {5, 64, 512}, {"rev-ad", "nd"}, 1, false);
    for (long long dim : {5LL, 64LL, 512LL}) {
      CHECK(find_row(r, dim, "rev-ad").func_evals == 1);
      CHECK(find_row(r, dim, "nd").func_evals == 2 * (std::uint64_t)dim);
    }
  }
}

TEST_CASE("every row is validated against the closed form") {
  for (const ModelEntry& m : all_models()) {
    CAPTURE(m.name);
    BenchReport r = run_accuracy(m, false);
    REQUIRE(r.rows.size() == 3);
    for (const BenchRow& row : r.rows) {
      CAPTURE(row.backend);
      CHECK(row.validated);
    }
  }
}

TEST_CASE("untimed reports are byte-stable") {
  const ModelEntry& m = get_model("mvn");
  BenchReport a = run_scaling(m, {5, 64}, {"rev-ad", "fwd-ad", "nd"}, 1, false);
  BenchReport b = run_scaling(m, {5, 64}, {"rev-ad", "fwd-ad", "nd"}, 1, false);
  CHECK(a.to_csv() == b.to_csv());
  CHECK(a.to_json() == b.to_json());
  for (const BenchRow& row : a.rows) CHECK(row.median_ns == 0.0);
}

TEST_CASE("rows are sorted by (model, dim, backend)") {
  const ModelEntry& m = get_model("sum");
  BenchReport r = run_scaling(m, {64, 5}, {"nd", "rev-ad"}, 1, false);
  REQUIRE(r.rows.size() == 4);
  CHECK(r.rows[0].dim == 5);
  CHECK(r.rows[0].backend == "nd");
  CHECK(r.rows[1].backend == "rev-ad");
  CHECK(r.rows[2].dim == 64);
}

TEST_CASE("timed runs require at least five repetitions") {
  const ModelEntry& m = get_model("sum");
  CHECK_THROWS_AS(run_scaling(m, {5}, {"rev-ad"}, 2, true), DlError);
}

TEST_CASE("speedups pairs ND and reverse-AD rows per dim") {
  const ModelEntry& m = get_model("sum");
  BenchReport r = run_scaling(m, {5, 64}, {"rev-ad", "nd"}, 5, true);
  std::vector<double> s = speedups(r, "sum");
  REQUIRE(s.size() == 2);
  for (double v : s) CHECK(v > 0.0);
}
