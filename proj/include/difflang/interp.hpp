#pragma once

#include <cstdint>
#include <memory>
#include <variant>
#include <vector>

#include "difflang/ast.hpp"
#include "difflang/diagnostics.hpp"

namespace difflang {

using ArrayRef = std::shared_ptr<std::vector<double>>;
using IntTapeRef = std::shared_ptr<std::vector<long long>>;

// Distinct from ArrayRef so the Value variant can tell the two apart.
struct DoubleTapeData {
  std::vector<double> data;
};
using DoubleTapeRef = std::shared_ptr<DoubleTapeData>;

// Runtime value. Arrays and tapes have reference semantics: mutations made by
// the callee are visible to the caller, matching C pointer arguments.
struct Value {
  std::variant<std::monostate, double, long long, ArrayRef, IntTapeRef,
               DoubleTapeRef>
      v;

  Value() = default;
  Value(double d) : v(d) {}
  Value(long long i) : v(i) {}
  Value(int i) : v((long long)i) {}
  Value(ArrayRef a) : v(std::move(a)) {}

  bool is_unset() const { return std::holds_alternative<std::monostate>(v); }
  double as_double() const;      // throws TypeMismatch
  long long as_int() const;      // throws TypeMismatch
  const ArrayRef& as_array() const;
};

Value make_array(std::vector<double> data);

struct EvalStats {
  std::uint64_t scalar_ops = 0;
  std::uint64_t intrinsic_calls = 0;
  std::uint64_t func_evals = 0;
};

struct EvalOptions {
  // Guard against non-terminating DSL loops; counted per top-level call.
  std::uint64_t max_steps = 1'000'000'000;
};

// Tree-walking interpreter over a resolved Program. Single execution
// substrate for original functions, AD-generated derivatives and the ND
// baseline. One instance is single-threaded; distinct instances over the
// same Program may run concurrently.
class Interpreter {
 public:
  explicit Interpreter(const Program& prog, EvalOptions opts = {})
      : prog_(prog), opts_(opts) {}

  // Optional op/eval accounting; owned by the caller, may be null.
  void set_stats(EvalStats* stats) { stats_ = stats; }
  EvalStats* stats() const { return stats_; }

  Value call(const std::string& fname, std::vector<Value> args);
  Value call(const FuncDef& f, std::vector<Value> args);

  const Program& program() const { return prog_; }

 private:
  friend class Exec;
  const Program& prog_;
  EvalOptions opts_;
  EvalStats* stats_ = nullptr;
  std::uint64_t steps_ = 0;
  int depth_ = 0;
};

// Convenience matching the stats-taking entry point: as call(), additionally
// accumulating into `stats`.
Value call_counted(Interpreter& interp, const std::string& fname,
                   std::vector<Value> args, EvalStats& stats);

}  // namespace difflang
