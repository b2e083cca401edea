#pragma once

#include <string>
#include <vector>

#include "difflang/ast.hpp"
#include "difflang/interp.hpp"
#include "difflang/numdiff.hpp"

namespace difflang {

// A corpus function together with the parameters its gradient is taken over.
// `source` is byte-stable; the files under models/ hold the same text.
struct ModelEntry {
  std::string name;  // also the DSL function name
  std::string source;
  std::vector<std::string> wrt;
  bool dim_scalable = false;  // sum/mvn accept any dim; the rest are fixed
};

const std::vector<ModelEntry>& all_models();

// Throws UnknownModel for names outside the corpus.
const ModelEntry& get_model(const std::string& name);

// Parsed and resolved single-function program for the entry.
Program parse_model(const ModelEntry& m);

// Deterministic inputs used by tests and benchmarks. For dim-scalable models
// arrays are filled with a fixed ramp; for fixed-arity models `dim` is
// ignored.
std::vector<Value> model_args(const ModelEntry& m, long long dim);

// Number of gradient slots at this dim.
long long wrt_dim(const ModelEntry& m, long long dim);

// The ND perturbation slots matching the gradient layout.
std::vector<ArgSlot> wrt_slots(const ModelEntry& m, long long dim);

// Closed-form gradient, the independent oracle. Positional `args` follow the
// model signature (defaults must be filled in by the caller).
std::vector<double> reference_gradient(const ModelEntry& m,
                                       const std::vector<Value>& args);

}  // namespace difflang
