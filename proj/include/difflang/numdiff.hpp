#pragma once

#include <string>
#include <vector>

#include "difflang/interp.hpp"

namespace difflang {

struct NdOptions {
  double eps = 1e-8;
};

// One scalar slot among a call's arguments: either a double argument
// (index == -1) or one element of a double* argument.
struct ArgSlot {
  std::size_t arg = 0;
  long long index = -1;
};

// Central difference (f(x+eps) - f(x-eps)) / (2*eps). The perturbed slot is
// restored to its original bits afterwards; every call costs two function
// evaluations, which show up in the interpreter's stats like any other call.
double fd_partial(Interpreter& interp, const std::string& fname,
                  std::vector<Value>& args, const ArgSlot& slot,
                  const NdOptions& opts = {});

std::vector<double> fd_gradient(Interpreter& interp, const std::string& fname,
                                std::vector<Value>& args,
                                const std::vector<ArgSlot>& slots,
                                const NdOptions& opts = {});

}  // namespace difflang
