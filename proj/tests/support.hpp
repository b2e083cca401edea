#pragma once

// Shared helpers for the unit and acceptance tests: a deterministic PRNG and
// random-but-in-domain argument generation for the model corpus.

#include <cstdint>
#include <string>
#include <vector>

#include "difflang/ast.hpp"
#include "difflang/interp.hpp"
#include "difflang/models.hpp"
#include "difflang/numdiff.hpp"
#include "difflang/reverse.hpp"

namespace testsupport {

struct Rng {
  std::uint64_t s;
  std::uint64_t next() {
    std::uint64_t z = (s += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  // [0.5, 1.5): keeps sigma-like parameters and intrinsic arguments away
  // from singularities for every corpus model
  double sample() { return 0.5 + (next() >> 11) * 0x1.0p-53; }
};

// Positional arguments with every parameter drawn at random (defaults are
// not relied on, so reference_gradient sees the same values).
inline std::vector<difflang::Value> random_args(const difflang::FuncDef& f,
                                                long long dim, Rng& rng) {
  std::vector<difflang::Value> args;
  for (const difflang::Param& p : f.params) {
    switch (p.type) {
      case difflang::TypeKind::Double:
        args.push_back(difflang::Value(rng.sample()));
        break;
      case difflang::TypeKind::Int:
        args.push_back(difflang::Value(dim));
        break;
      case difflang::TypeKind::DoubleArray: {
        std::vector<double> a(static_cast<std::size_t>(dim));
        for (double& x : a) x = rng.sample();
        args.push_back(difflang::make_array(a));
        break;
      }
      default:
        throw std::runtime_error("unexpected parameter type");
    }
  }
  return args;
}

// Evaluates the reverse-mode gradient in a fresh result array.
inline std::vector<double> eval_gradient(difflang::Interpreter& interp,
                                         const std::string& grad_name,
                                         const std::vector<difflang::Value>& args,
                                         std::size_t n) {
  difflang::Value res =
      difflang::make_array(std::vector<double>(n, 0.0));
  std::vector<difflang::Value> a = args;
  a.push_back(res);
  interp.call(grad_name, std::move(a));
  return *res.as_array();
}

}  // namespace testsupport
