#pragma once

#include <string>

#include "difflang/ast.hpp"

namespace difflang {

// Deterministic pretty-printer. parse(print(p)) is structurally equal to p
// for any resolved program, and identical ASTs yield byte-identical text.
std::string print(const Program& p);
std::string print(const FuncDef& f);
std::string print(const Expr& e);

}  // namespace difflang
