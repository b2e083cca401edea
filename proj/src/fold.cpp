#include "difflang/fold.hpp"

namespace difflang {

namespace {

const Expr::Literal* dlit(const ExprPtr& e) {
  const auto* l = std::get_if<Expr::Literal>(&e->node);
  return (l && !l->is_int) ? l : nullptr;
}

bool is_zero(const ExprPtr& e) {
  const auto* l = dlit(e);
  return l && l->dval == 0.0;
}

bool is_one(const ExprPtr& e) {
  const auto* l = dlit(e);
  return l && l->dval == 1.0;
}

}  // namespace

ExprPtr fadd(ExprPtr a, ExprPtr b) {
  if (is_zero(a)) return b;
  if (is_zero(b)) return a;
  if (const auto *la = dlit(a), *lb = dlit(b); la && lb)
    return lit_d(la->dval + lb->dval);
  return binary(BinOp::Add, std::move(a), std::move(b));
}

ExprPtr fsub(ExprPtr a, ExprPtr b) {
  if (is_zero(b)) return a;
  if (is_zero(a)) return fneg(std::move(b));
  if (const auto *la = dlit(a), *lb = dlit(b); la && lb)
    return lit_d(la->dval - lb->dval);
  return binary(BinOp::Sub, std::move(a), std::move(b));
}

ExprPtr fmul(ExprPtr a, ExprPtr b) {
  if (is_zero(a) || is_zero(b)) return lit_d(0.0);
  if (is_one(a)) return b;
  if (is_one(b)) return a;
  if (const auto *la = dlit(a), *lb = dlit(b); la && lb)
    return lit_d(la->dval * lb->dval);
  return binary(BinOp::Mul, std::move(a), std::move(b));
}

ExprPtr fdiv(ExprPtr a, ExprPtr b) {
  if (is_zero(a)) return lit_d(0.0);
  if (is_one(b)) return a;
  if (const auto *la = dlit(a), *lb = dlit(b);
      la && lb && lb->dval != 0.0)
    return lit_d(la->dval / lb->dval);
  return binary(BinOp::Div, std::move(a), std::move(b));
}

ExprPtr fneg(ExprPtr a) {
  if (const auto* l = dlit(a)) return lit_d(-l->dval);
  if (auto* u = std::get_if<Expr::Unary>(&a->node); u && u->op == UnOp::Neg)
    return std::move(u->operand);
  return unary(UnOp::Neg, std::move(a));
}

}  // namespace difflang
