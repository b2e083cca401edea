#pragma once

#include <vector>

#include "difflang/ast.hpp"
#include "difflang/diagnostics.hpp"

namespace difflang {

// Type-checks and slot-resolves every function in the program, inserting
// implicit int->double casts where arithmetic mixes the two. Throws DlError
// on the first violation. Idempotent.
void resolve_program(Program& p);

// Same, for a single function. `context` supplies previously defined
// functions callable from this one; pass nullptr if only intrinsics may be
// called (e.g. generated derivative code).
void resolve_function(FuncDef& f, const Program* context);

// Non-throwing variant: collects one diagnostic per violation.
std::vector<Diagnostic> validate(Program& p);

}  // namespace difflang
