#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "difflang/ast.hpp"
#include "difflang/interp.hpp"

namespace difflang {

struct Histogram {
  std::vector<double> edges;   // B+1, strictly increasing
  std::vector<double> counts;  // B, non-negative

  std::size_t bins() const { return counts.size(); }
  double center(std::size_t b) const {
    return 0.5 * (edges[b] + edges[b + 1]);
  }
  double width(std::size_t b) const { return edges[b + 1] - edges[b]; }
  double total() const;
};

// Gaussian(mu, sigma) samples binned over [lo, hi]; out-of-range samples are
// dropped. Sampling uses splitmix64 + Box-Muller (documented in
// docs/formats.md) so the result is identical across platforms for a given
// seed.
Histogram synthesize_histogram(std::uint64_t nsamples, std::size_t bins,
                               double lo, double hi, double mu, double sigma,
                               std::uint64_t seed);

// CSV with header "lo,hi,count", one row per bin.
std::string histogram_to_csv(const Histogram& h);
Histogram histogram_from_csv(const std::string& text);

enum class GradBackend { AD, ND };

struct FitOptions {
  GradBackend backend = GradBackend::AD;
  int max_iter = 10000;
  double gtol = 1e-8;     // sup-norm of the gradient
  double step0 = 1.0;     // initial line search step
  double armijo_c = 1e-4;
  double shrink = 0.5;
  int max_backtracks = 60;
  double nd_eps = 1e-8;
};

struct FitResult {
  std::vector<double> params;
  double objective = 0.0;
  int iterations = 0;
  bool converged = false;
  // Cost accounting. grad_evals counts gradient computations (one per
  // iteration for either backend); gradient_func_evals counts interpreter
  // function calls spent on those gradients (1 per gradient for AD,
  // 2 * #params for ND); objective_evals counts line-search and progress
  // evaluations of the objective, identical per trajectory for both backends.
  std::uint64_t grad_evals = 0;
  std::uint64_t gradient_func_evals = 0;
  std::uint64_t objective_evals = 0;
};

// Builds the least-squares objective as a DSL function
//   obj(double* th, double* cx, double* y, int nbins)
// with the model body inlined per bin (x_param reads cx[bin], the k-th fit
// parameter reads th[k]). Differentiating this one function in reverse mode
// yields the whole parameter gradient in a single evaluation.
FuncDef build_objective(const FuncDef& model, const std::string& x_param,
                        const std::vector<std::string>& fit_params);

// Gradient descent with Armijo backtracking; the two backends share the
// optimizer and differ only in how the gradient is computed. Bin counts are
// normalized to densities (count / (total * width)) before fitting.
FitResult fit(const FuncDef& model, const std::string& x_param,
              const std::vector<std::string>& fit_params,
              const Histogram& hist, std::vector<double> init,
              const FitOptions& opts = {});

}  // namespace difflang
