#pragma once

#include "difflang/ast.hpp"

namespace difflang {

// Constant-folding expression builders used when assembling derivative
// expressions: algebraic identities with 0 and 1 keep generated code close to
// what one would write by hand and keep the op-count overhead factors small.
ExprPtr fadd(ExprPtr a, ExprPtr b);
ExprPtr fsub(ExprPtr a, ExprPtr b);
ExprPtr fmul(ExprPtr a, ExprPtr b);
ExprPtr fdiv(ExprPtr a, ExprPtr b);
ExprPtr fneg(ExprPtr a);

}  // namespace difflang
