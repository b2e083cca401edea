#pragma once

#include <string>
#include <vector>

#include "difflang/ast.hpp"
#include "difflang/interp.hpp"

namespace difflang {

// One `name=value` binding from the CLI point syntax
//   point   = binding { "," binding }
//   binding = name "=" ( number | "[" [ number { "," number } ] "]" )
// (EBNF in docs/formats.md).
struct PointValue {
  std::string name;
  bool is_array = false;
  double scalar = 0.0;
  std::vector<double> array;
};

std::vector<PointValue> parse_point(const std::string& text);

// Matches bindings to parameters by name; missing parameters fall back to
// their declared defaults. Int parameters take integer-valued numbers.
std::vector<Value> bind_point(const FuncDef& f,
                              const std::vector<PointValue>& values);

}  // namespace difflang
