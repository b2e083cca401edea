#include "difflang/ast.hpp"

#include <cmath>
#include <cstring>

namespace difflang {

const char* type_name(TypeKind k) {
  switch (k) {
    case TypeKind::Double: return "double";
    case TypeKind::Int: return "int";
    case TypeKind::DoubleArray: return "double*";
    case TypeKind::IntTape: return "tape<int>";
    case TypeKind::DoubleTape: return "tape<double>";
  }
  return "?";
}

bool is_arith(BinOp op) {
  return op == BinOp::Add || op == BinOp::Sub || op == BinOp::Mul ||
         op == BinOp::Div;
}

bool is_compare(BinOp op) { return !is_arith(op); }

const char* binop_spelling(BinOp op) {
  switch (op) {
    case BinOp::Add: return "+";
    case BinOp::Sub: return "-";
    case BinOp::Mul: return "*";
    case BinOp::Div: return "/";
    case BinOp::Lt: return "<";
    case BinOp::Le: return "<=";
    case BinOp::Gt: return ">";
    case BinOp::Ge: return ">=";
    case BinOp::Eq: return "==";
    case BinOp::Ne: return "!=";
  }
  return "?";
}

std::optional<Intrinsic> intrinsic_by_name(const std::string& name) {
  if (name == "sin") return Intrinsic::Sin;
  if (name == "cos") return Intrinsic::Cos;
  if (name == "exp") return Intrinsic::Exp;
  if (name == "log") return Intrinsic::Log;
  if (name == "sqrt") return Intrinsic::Sqrt;
  if (name == "pow") return Intrinsic::Pow;
  if (name == "push") return Intrinsic::Push;
  if (name == "pop") return Intrinsic::Pop;
  return std::nullopt;
}

const char* intrinsic_name(Intrinsic i) {
  switch (i) {
    case Intrinsic::Sin: return "sin";
    case Intrinsic::Cos: return "cos";
    case Intrinsic::Exp: return "exp";
    case Intrinsic::Log: return "log";
    case Intrinsic::Sqrt: return "sqrt";
    case Intrinsic::Pow: return "pow";
    case Intrinsic::Push: return "push";
    case Intrinsic::Pop: return "pop";
  }
  return "?";
}

const FuncDef* Program::find(const std::string& name) const {
  for (const auto& f : functions)
    if (f.name == name) return &f;
  return nullptr;
}

ExprPtr clone(const Expr& e) {
  auto out = std::make_unique<Expr>();
  out->type = e.type;
  out->loc = e.loc;
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Expr::Literal>) {
          out->node = n;
        } else if constexpr (std::is_same_v<T, Expr::VarRef>) {
          out->node = n;
        } else if constexpr (std::is_same_v<T, Expr::Index>) {
          out->node = Expr::Index{n.array, n.slot, clone(*n.index)};
        } else if constexpr (std::is_same_v<T, Expr::Unary>) {
          out->node = Expr::Unary{n.op, clone(*n.operand)};
        } else if constexpr (std::is_same_v<T, Expr::Binary>) {
          out->node = Expr::Binary{n.op, clone(*n.lhs), clone(*n.rhs)};
        } else if constexpr (std::is_same_v<T, Expr::Call>) {
          Expr::Call c{n.callee, n.intrinsic, {}};
          c.args.reserve(n.args.size());
          for (const auto& a : n.args) c.args.push_back(clone(*a));
          out->node = std::move(c);
        }
      },
      e.node);
  return out;
}

static LValue clone_lv(const LValue& lv) {
  LValue out;
  out.name = lv.name;
  out.slot = lv.slot;
  out.index = lv.index ? clone(*lv.index) : nullptr;
  out.loc = lv.loc;
  return out;
}

StmtPtr clone(const Stmt& s) {
  auto out = std::make_unique<Stmt>();
  out->loc = s.loc;
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Stmt::Decl>) {
          out->node = Stmt::Decl{n.name, n.type,
                                 n.init ? clone(*n.init) : nullptr, n.slot};
        } else if constexpr (std::is_same_v<T, Stmt::Assign>) {
          out->node = Stmt::Assign{clone_lv(n.lv), clone(*n.value)};
        } else if constexpr (std::is_same_v<T, Stmt::CompoundAssign>) {
          out->node =
              Stmt::CompoundAssign{n.op, clone_lv(n.lv), clone(*n.value)};
        } else if constexpr (std::is_same_v<T, Stmt::For>) {
          out->node = Stmt::For{n.counter, n.slot, clone(*n.start),
                                clone(*n.bound), clone(n.body)};
        } else if constexpr (std::is_same_v<T, Stmt::If>) {
          out->node =
              Stmt::If{clone(*n.cond), clone(n.then_body), clone(n.else_body)};
        } else if constexpr (std::is_same_v<T, Stmt::Return>) {
          out->node = Stmt::Return{clone(*n.value)};
        } else if constexpr (std::is_same_v<T, Stmt::Block>) {
          out->node = Stmt::Block{clone(n.body)};
        }
      },
      s.node);
  return out;
}

std::vector<StmtPtr> clone(const std::vector<StmtPtr>& body) {
  std::vector<StmtPtr> out;
  out.reserve(body.size());
  for (const auto& s : body) out.push_back(clone(*s));
  return out;
}

FuncDef clone(const FuncDef& f) {
  FuncDef out;
  out.name = f.name;
  out.params = f.params;
  out.body = clone(f.body);
  out.num_slots = f.num_slots;
  out.loc = f.loc;
  return out;
}

static bool equal_body(const std::vector<StmtPtr>& a,
                       const std::vector<StmtPtr>& b) {
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); ++i)
    if (!equal(*a[i], *b[i])) return false;
  return true;
}

bool equal(const Expr& a, const Expr& b) {
  if (a.node.index() != b.node.index()) return false;
  return std::visit(
      [&](const auto& x) {
        using T = std::decay_t<decltype(x)>;
        const auto& y = std::get<T>(b.node);
        if constexpr (std::is_same_v<T, Expr::Literal>) {
          if (x.is_int != y.is_int) return false;
          if (x.is_int) return x.ival == y.ival;
          // bit-compare so 0.0 vs -0.0 are distinct
          double xv = x.dval, yv = y.dval;
          return std::memcmp(&xv, &yv, sizeof xv) == 0;
        } else if constexpr (std::is_same_v<T, Expr::VarRef>) {
          return x.name == y.name;
        } else if constexpr (std::is_same_v<T, Expr::Index>) {
          return x.array == y.array && equal(*x.index, *y.index);
        } else if constexpr (std::is_same_v<T, Expr::Unary>) {
          return x.op == y.op && equal(*x.operand, *y.operand);
        } else if constexpr (std::is_same_v<T, Expr::Binary>) {
          return x.op == y.op && equal(*x.lhs, *y.lhs) && equal(*x.rhs, *y.rhs);
        } else if constexpr (std::is_same_v<T, Expr::Call>) {
          if (x.callee != y.callee || x.args.size() != y.args.size())
            return false;
          for (size_t i = 0; i < x.args.size(); ++i)
            if (!equal(*x.args[i], *y.args[i])) return false;
          return true;
        }
      },
      a.node);
}

static bool equal_lv(const LValue& a, const LValue& b) {
  if (a.name != b.name) return false;
  if ((a.index == nullptr) != (b.index == nullptr)) return false;
  return !a.index || equal(*a.index, *b.index);
}

bool equal(const Stmt& a, const Stmt& b) {
  if (a.node.index() != b.node.index()) return false;
  return std::visit(
      [&](const auto& x) {
        using T = std::decay_t<decltype(x)>;
        const auto& y = std::get<T>(b.node);
        if constexpr (std::is_same_v<T, Stmt::Decl>) {
          if (x.name != y.name || x.type != y.type) return false;
          if ((x.init == nullptr) != (y.init == nullptr)) return false;
          return !x.init || equal(*x.init, *y.init);
        } else if constexpr (std::is_same_v<T, Stmt::Assign>) {
          return equal_lv(x.lv, y.lv) && equal(*x.value, *y.value);
        } else if constexpr (std::is_same_v<T, Stmt::CompoundAssign>) {
          return x.op == y.op && equal_lv(x.lv, y.lv) &&
                 equal(*x.value, *y.value);
        } else if constexpr (std::is_same_v<T, Stmt::For>) {
          return x.counter == y.counter && equal(*x.start, *y.start) &&
                 equal(*x.bound, *y.bound) && equal_body(x.body, y.body);
        } else if constexpr (std::is_same_v<T, Stmt::If>) {
          return equal(*x.cond, *y.cond) &&
                 equal_body(x.then_body, y.then_body) &&
                 equal_body(x.else_body, y.else_body);
        } else if constexpr (std::is_same_v<T, Stmt::Return>) {
          return equal(*x.value, *y.value);
        } else if constexpr (std::is_same_v<T, Stmt::Block>) {
          return equal_body(x.body, y.body);
        }
      },
      a.node);
}

bool equal(const FuncDef& a, const FuncDef& b) {
  if (a.name != b.name || a.params.size() != b.params.size()) return false;
  for (size_t i = 0; i < a.params.size(); ++i) {
    const auto& p = a.params[i];
    const auto& q = b.params[i];
    if (p.name != q.name || p.type != q.type ||
        p.default_value != q.default_value)
      return false;
  }
  return equal_body(a.body, b.body);
}

bool equal(const Program& a, const Program& b) {
  if (a.functions.size() != b.functions.size()) return false;
  for (size_t i = 0; i < a.functions.size(); ++i)
    if (!equal(a.functions[i], b.functions[i])) return false;
  return true;
}

ExprPtr lit_d(double v) {
  auto e = std::make_unique<Expr>();
  e->node = Expr::Literal{v, 0, false};
  e->type = TypeKind::Double;
  return e;
}

ExprPtr lit_i(long long v) {
  auto e = std::make_unique<Expr>();
  e->node = Expr::Literal{0.0, v, true};
  e->type = TypeKind::Int;
  return e;
}

ExprPtr var(std::string name, TypeKind type) {
  auto e = std::make_unique<Expr>();
  e->node = Expr::VarRef{std::move(name), -1};
  e->type = type;
  return e;
}

ExprPtr index(std::string array, ExprPtr idx) {
  auto e = std::make_unique<Expr>();
  e->node = Expr::Index{std::move(array), -1, std::move(idx)};
  e->type = TypeKind::Double;
  return e;
}

ExprPtr unary(UnOp op, ExprPtr operand) {
  auto e = std::make_unique<Expr>();
  e->type = op == UnOp::IntToDouble ? TypeKind::Double : operand->type;
  e->node = Expr::Unary{op, std::move(operand)};
  return e;
}

ExprPtr binary(BinOp op, ExprPtr l, ExprPtr r) {
  auto e = std::make_unique<Expr>();
  e->type = is_compare(op) ? TypeKind::Int : l->type;
  e->node = Expr::Binary{op, std::move(l), std::move(r)};
  return e;
}

ExprPtr call(Intrinsic i, std::vector<ExprPtr> args) {
  auto e = std::make_unique<Expr>();
  e->type = TypeKind::Double;
  e->node = Expr::Call{intrinsic_name(i), i, std::move(args)};
  return e;
}

bool is_literal(const Expr& e, double v) {
  const auto* l = std::get_if<Expr::Literal>(&e.node);
  if (!l) return false;
  return l->is_int ? double(l->ival) == v : l->dval == v;
}

bool is_int_literal(const Expr& e) {
  const auto* l = std::get_if<Expr::Literal>(&e.node);
  return l && l->is_int;
}

}  // namespace difflang
