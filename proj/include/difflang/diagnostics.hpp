#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "difflang/ast.hpp"

namespace difflang {

enum class DiagKind {
  SyntaxError,
  TypeError,
  MissingReturn,
  DuplicateParam,
  DuplicateFunction,
  UnknownFunction,
  UnknownParameter,
  UnsupportedConstruct,
  NonScalarOutput,
  // runtime
  ArityMismatch,
  TypeMismatch,
  IndexOutOfBounds,
  UnboundName,
  DomainError,
  NonTermination,
  PopOnEmpty,
  UnknownModel,
  NonConvergence,
};

const char* diag_kind_name(DiagKind k);

struct Diagnostic {
  DiagKind kind;
  std::string message;
  SrcLoc loc;
  std::string file;  // optional, filled in by callers that know it

  // "file:line:col: severity: message"
  std::string format() const;
};

// Thrown by parse/transform entry points on the first hard error, and by the
// interpreter for runtime errors.
class DlError : public std::runtime_error {
 public:
  DlError(DiagKind kind, std::string message, SrcLoc loc = {})
      : std::runtime_error(message), kind_(kind), message_(std::move(message)),
        loc_(loc) {}

  DiagKind kind() const { return kind_; }
  const std::string& message() const { return message_; }
  SrcLoc loc() const { return loc_; }

  Diagnostic diagnostic() const { return {kind_, message_, loc_, ""}; }

 private:
  DiagKind kind_;
  std::string message_;
  SrcLoc loc_;
};

}  // namespace difflang
