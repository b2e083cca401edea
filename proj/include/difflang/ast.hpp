#pragma once

#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace difflang {

struct SrcLoc {
  int line = 0;
  int col = 0;
};

enum class TypeKind {
  Double,
  Int,
  DoubleArray,
  IntTape,
  DoubleTape,
};

const char* type_name(TypeKind k);

enum class BinOp { Add, Sub, Mul, Div, Lt, Le, Gt, Ge, Eq, Ne };
enum class UnOp { Neg, IntToDouble };

bool is_arith(BinOp op);
bool is_compare(BinOp op);
const char* binop_spelling(BinOp op);

// Builtin functions callable from DSL code. Push/Pop operate on tape-typed
// locals; push returns its second argument so it can be used inline.
enum class Intrinsic { Sin, Cos, Exp, Log, Sqrt, Pow, Push, Pop };

std::optional<Intrinsic> intrinsic_by_name(const std::string& name);
const char* intrinsic_name(Intrinsic i);

struct Expr;
using ExprPtr = std::unique_ptr<Expr>;

struct Expr {
  struct Literal {
    double dval = 0.0;
    long long ival = 0;
    bool is_int = false;
  };
  struct VarRef {
    std::string name;
    int slot = -1;
  };
  struct Index {
    std::string array;
    int slot = -1;
    ExprPtr index;
  };
  struct Unary {
    UnOp op;
    ExprPtr operand;
  };
  struct Binary {
    BinOp op;
    ExprPtr lhs;
    ExprPtr rhs;
  };
  struct Call {
    std::string callee;
    std::optional<Intrinsic> intrinsic;
    std::vector<ExprPtr> args;
  };

  std::variant<Literal, VarRef, Index, Unary, Binary, Call> node =
      Literal{};
  TypeKind type = TypeKind::Double;
  SrcLoc loc;
};

struct LValue {
  std::string name;
  int slot = -1;
  ExprPtr index;  // null for scalars, set for array element stores
  SrcLoc loc;
};

struct Stmt;
using StmtPtr = std::unique_ptr<Stmt>;

struct Stmt {
  struct Decl {
    std::string name;
    TypeKind type;
    ExprPtr init;  // may be null (tape decls, uninitialized scalars)
    int slot = -1;
  };
  struct Assign {
    LValue lv;
    ExprPtr value;
  };
  struct CompoundAssign {
    BinOp op;  // Add..Div
    LValue lv;
    ExprPtr value;
  };
  // Canonical loop: for (int c = start; c < bound; c++) body
  struct For {
    std::string counter;
    int slot = -1;
    ExprPtr start;
    ExprPtr bound;
    std::vector<StmtPtr> body;
  };
  struct If {
    ExprPtr cond;
    std::vector<StmtPtr> then_body;
    std::vector<StmtPtr> else_body;
  };
  struct Return {
    ExprPtr value;
  };
  struct Block {
    std::vector<StmtPtr> body;
  };

  std::variant<Decl, Assign, CompoundAssign, For, If, Return, Block> node =
      Return{};
  SrcLoc loc;
};

struct Param {
  std::string name;
  TypeKind type = TypeKind::Double;
  std::optional<double> default_value;
  int slot = -1;
  SrcLoc loc;
};

struct FuncDef {
  std::string name;
  std::vector<Param> params;
  std::vector<StmtPtr> body;
  int num_slots = -1;  // set by sema
  SrcLoc loc;
};

struct Program {
  std::vector<FuncDef> functions;

  const FuncDef* find(const std::string& name) const;
};

// Deep copies. Transforms always clone; nodes are never shared between
// functions (slot annotations are per-function).
ExprPtr clone(const Expr& e);
StmtPtr clone(const Stmt& s);
std::vector<StmtPtr> clone(const std::vector<StmtPtr>& body);
FuncDef clone(const FuncDef& f);

// Structural equality ignoring source locations and slot annotations.
bool equal(const Expr& a, const Expr& b);
bool equal(const Stmt& a, const Stmt& b);
bool equal(const FuncDef& a, const FuncDef& b);
bool equal(const Program& a, const Program& b);

// Construction helpers.
ExprPtr lit_d(double v);
ExprPtr lit_i(long long v);
ExprPtr var(std::string name, TypeKind type = TypeKind::Double);
ExprPtr index(std::string array, ExprPtr idx);
ExprPtr unary(UnOp op, ExprPtr e);
ExprPtr binary(BinOp op, ExprPtr l, ExprPtr r);
ExprPtr call(Intrinsic i, std::vector<ExprPtr> args);

bool is_literal(const Expr& e, double v);
bool is_int_literal(const Expr& e);

}  // namespace difflang
