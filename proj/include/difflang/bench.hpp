#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "difflang/models.hpp"

namespace difflang {

struct BenchRow {
  std::string model;
  long long dim = 0;
  std::string backend;  // "rev-ad", "fwd-ad" or "nd"
  double median_ns = 0.0;  // 0 when timing is disabled
  std::uint64_t scalar_ops = 0;
  std::uint64_t func_evals = 0;
  double max_abs_err = 0.0;  // against the closed-form reference
  bool validated = false;
};

struct BenchReport {
  std::vector<BenchRow> rows;  // sorted by (model, dim, backend)
  std::string environment;
  int repetitions = 0;
  bool timing = true;

  std::string to_json() const;
  std::string to_csv() const;
};

// Times one whole-gradient evaluation per backend at each dim, validating
// every result against reference_gradient before its row is emitted. A row
// that fails validation is kept with validated=false, never dropped. With
// timing=false the report is byte-stable across runs.
BenchReport run_scaling(const ModelEntry& m, const std::vector<long long>& dims,
                        const std::vector<std::string>& backends, int reps,
                        bool timing = true);

// Derivative accuracy per backend at the model's canonical point.
BenchReport run_accuracy(const ModelEntry& m, bool timing = false);

// t_nd / t_rev_ad from a scaling report, one entry per dim.
std::vector<double> speedups(const BenchReport& r, const std::string& model);

}  // namespace difflang
