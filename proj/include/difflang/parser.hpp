#pragma once

#include <string_view>

#include "difflang/ast.hpp"

namespace difflang {

// Parses DSL source text into a fully type-annotated, slot-resolved Program.
// Throws DlError with position info on syntax or type errors.
Program parse(std::string_view source);

// Syntax only; no type checking or slot resolution. Used by validate() so it
// can report semantic problems as a diagnostic list instead of throwing.
Program parse_syntax(std::string_view source);

}  // namespace difflang
