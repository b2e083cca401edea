#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "difflang/ast.hpp"
#include "difflang/forward.hpp"

namespace difflang {

// Which inputs the gradient accumulates into `_result`: either one double*
// parameter (slots 0..dim-1) or a list of scalar double parameters (slots
// follow the order of the request).
struct GradRequest {
  std::vector<std::string> wrt;
};

struct GradFunc {
  FuncDef original;
  // Signature: (original params..., double* _result). Partials are
  // accumulated with += into caller-allocated, caller-zeroed _result; the
  // double return value is a 0.0 sentinel.
  FuncDef gradient;
  Mode mode = Mode::Reverse;
};

// Reverse-mode source transformation: forward sweep with trip counters and
// tapes, then a reverse sweep accumulating adjoints. Throws DlError
// (UnknownParameter, UnsupportedConstruct, NonScalarOutput).
GradFunc gradient(const FuncDef& func, const GradRequest& req);

// parse -> gradient -> print convenience composition.
std::string gradient_source(std::string_view source, const std::string& fname,
                            const std::vector<std::string>& wrt);

}  // namespace difflang
