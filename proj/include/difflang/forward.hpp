#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "difflang/ast.hpp"

namespace difflang {

// What to differentiate with respect to: a scalar double parameter, or a
// single slot of a double* parameter.
struct DiffRequest {
  std::string wrt;
  std::optional<long long> wrt_index;  // set for an array slot
};

enum class Mode { Forward, Reverse };

struct DerivedFunc {
  FuncDef original;
  FuncDef derivative;  // same parameter list, returns d(output)/d(wrt)
  Mode mode = Mode::Forward;
};

// Forward-mode source transformation: produces a new function computing the
// partial derivative of `func`'s return value with respect to the requested
// input. Throws DlError (UnknownParameter, UnsupportedConstruct).
DerivedFunc differentiate(const FuncDef& func, const DiffRequest& req);

// parse -> differentiate -> print convenience composition.
std::string differentiate_source(std::string_view source,
                                 const std::string& fname,
                                 const DiffRequest& req);

}  // namespace difflang
