#include "difflang/forward.hpp"

#include <unordered_map>
#include <unordered_set>

#include "difflang/diagnostics.hpp"
#include "difflang/fold.hpp"
#include "difflang/parser.hpp"
#include "difflang/printer.hpp"
#include "difflang/sema.hpp"

namespace difflang {

namespace {

StmtPtr mk_stmt(Stmt::Decl d) {
  auto s = std::make_unique<Stmt>();
  s->node = std::move(d);
  return s;
}

StmtPtr mk_assign(std::string name, ExprPtr value) {
  auto s = std::make_unique<Stmt>();
  s->node = Stmt::Assign{LValue{std::move(name), -1, nullptr, {}},
                         std::move(value)};
  return s;
}

class ForwardDiff {
 public:
  ForwardDiff(const FuncDef& f, const DiffRequest& req) : f_(f), req_(req) {
    collect_names(f_.body);
    for (const auto& p : f_.params) used_.insert(p.name);
  }

  FuncDef run() {
    check_request();
    FuncDef d;
    d.name = f_.name + "_d" + req_.wrt;
    if (req_.wrt_index) d.name += "_" + std::to_string(*req_.wrt_index);
    d.params = f_.params;
    for (auto& p : d.params) p.slot = -1;
    d.body = transform(f_.body);
    resolve_function(d, nullptr);
    return d;
  }

 private:
  const FuncDef& f_;
  const DiffRequest& req_;
  std::unordered_set<std::string> used_;
  std::unordered_map<std::string, std::string> shadow_;  // double local -> _d_*
  std::unordered_set<std::string> double_locals_;

  void check_request() {
    for (const auto& p : f_.params) {
      if (p.name != req_.wrt) continue;
      if (p.type == TypeKind::Double && !req_.wrt_index) return;
      if (p.type == TypeKind::DoubleArray && req_.wrt_index) return;
      throw DlError(DiagKind::UnknownParameter,
                    req_.wrt_index
                        ? "parameter '" + req_.wrt + "' is not an array"
                        : "parameter '" + req_.wrt +
                              "' is not a double scalar",
                    p.loc);
    }
    throw DlError(DiagKind::UnknownParameter,
                  "'" + f_.name + "' has no parameter '" + req_.wrt + "'",
                  f_.loc);
  }

  void collect_names(const std::vector<StmtPtr>& body) {
    for (const auto& s : body) {
      std::visit(
          [&](const auto& n) {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, Stmt::Decl>) {
              used_.insert(n.name);
            } else if constexpr (std::is_same_v<T, Stmt::For>) {
              used_.insert(n.counter);
              collect_names(n.body);
            } else if constexpr (std::is_same_v<T, Stmt::If>) {
              collect_names(n.then_body);
              collect_names(n.else_body);
            } else if constexpr (std::is_same_v<T, Stmt::Block>) {
              collect_names(n.body);
            }
          },
          s->node);
    }
  }

  std::string fresh(std::string base) {
    while (used_.count(base)) base += "_";
    used_.insert(base);
    return base;
  }

  const std::string& shadow(const std::string& name) {
    auto it = shadow_.find(name);
    if (it != shadow_.end()) return it->second;
    return shadow_.emplace(name, fresh("_d_" + name)).first->second;
  }

  bool is_param(const std::string& name, TypeKind* type = nullptr) const {
    for (const auto& p : f_.params)
      if (p.name == name) {
        if (type) *type = p.type;
        return true;
      }
    return false;
  }

  [[noreturn]] void unsupported(const char* what, SrcLoc loc) {
    throw DlError(DiagKind::UnsupportedConstruct,
                  std::string(what) + " cannot be differentiated", loc);
  }

  // dv/d(wrt) for the expression; returns a folded Double expression.
  ExprPtr deriv(const Expr& e) {
    if (e.type == TypeKind::Int) return lit_d(0.0);
    return std::visit([&](const auto& n) { return dnode(e, n); }, e.node);
  }

  ExprPtr dnode(const Expr&, const Expr::Literal&) { return lit_d(0.0); }

  ExprPtr dnode(const Expr&, const Expr::VarRef& v) {
    TypeKind pt;
    if (is_param(v.name, &pt)) {
      if (pt == TypeKind::Double)
        return lit_d(v.name == req_.wrt && !req_.wrt_index ? 1.0 : 0.0);
      return lit_d(0.0);
    }
    if (double_locals_.count(v.name)) return var(shadow_.at(v.name));
    return lit_d(0.0);  // int locals and loop counters carry no derivative
  }

  ExprPtr dnode(const Expr&, const Expr::Index& ix) {
    if (req_.wrt_index && ix.array == req_.wrt) {
      // seed: 1 where the read index equals the chosen slot, else 0
      auto eq = binary(BinOp::Eq, clone(*ix.index), lit_i(*req_.wrt_index));
      return unary(UnOp::IntToDouble, std::move(eq));
    }
    return lit_d(0.0);
  }

  ExprPtr dnode(const Expr&, const Expr::Unary& u) {
    if (u.op == UnOp::IntToDouble) return lit_d(0.0);
    return fneg(deriv(*u.operand));
  }

  ExprPtr dnode(const Expr& e, const Expr::Binary& b) {
    if (is_compare(b.op)) return lit_d(0.0);
    ExprPtr da = deriv(*b.lhs);
    ExprPtr db = deriv(*b.rhs);
    switch (b.op) {
      case BinOp::Add: return fadd(std::move(da), std::move(db));
      case BinOp::Sub: return fsub(std::move(da), std::move(db));
      case BinOp::Mul:
        return fadd(fmul(std::move(da), clone(*b.rhs)),
                    fmul(clone(*b.lhs), std::move(db)));
      case BinOp::Div:
        // constant denominator: da / b
        if (is_literal(*db, 0.0)) return fdiv(std::move(da), clone(*b.rhs));
        // (da*b - a*db) / (b*b)
        return fdiv(fsub(fmul(std::move(da), clone(*b.rhs)),
                         fmul(clone(*b.lhs), std::move(db))),
                    fmul(clone(*b.rhs), clone(*b.rhs)));
      default: unsupported("operator", e.loc);
    }
  }

  ExprPtr dnode(const Expr& e, const Expr::Call& c) {
    if (!c.intrinsic) unsupported("call to a user-defined function", e.loc);
    switch (*c.intrinsic) {
      case Intrinsic::Sin: {
        auto arg = clone(*c.args[0]);
        return fmul(call(Intrinsic::Cos, vec(std::move(arg))),
                    deriv(*c.args[0]));
      }
      case Intrinsic::Cos:
        return fneg(fmul(call(Intrinsic::Sin, vec(clone(*c.args[0]))),
                         deriv(*c.args[0])));
      case Intrinsic::Exp:
        return fmul(call(Intrinsic::Exp, vec(clone(*c.args[0]))),
                    deriv(*c.args[0]));
      case Intrinsic::Log:
        return fdiv(deriv(*c.args[0]), clone(*c.args[0]));
      case Intrinsic::Sqrt:
        return fdiv(deriv(*c.args[0]),
                    fmul(lit_d(2.0), call(Intrinsic::Sqrt,
                                          vec(clone(*c.args[0])))));
      case Intrinsic::Pow: {
        const Expr& base = *c.args[0];
        const Expr& expo = *c.args[1];
        if (const auto* l = std::get_if<Expr::Literal>(&expo.node);
            l && !l->is_int) {
          // constant exponent: c * a^(c-1) * da
          ExprPtr p = call(Intrinsic::Pow,
                           vec(clone(base), lit_d(l->dval - 1.0)));
          return fmul(fmul(lit_d(l->dval), std::move(p)), deriv(base));
        }
        // general: a^b * (db*log(a) + b*da/a)
        ExprPtr lhs = fmul(deriv(expo),
                           call(Intrinsic::Log, vec(clone(base))));
        ExprPtr rhs = fdiv(fmul(clone(expo), deriv(base)), clone(base));
        return fmul(call(Intrinsic::Pow, vec(clone(base), clone(expo))),
                    fadd(std::move(lhs), std::move(rhs)));
      }
      case Intrinsic::Push:
      case Intrinsic::Pop:
        unsupported("tape operation", e.loc);
    }
    unsupported("call", e.loc);
  }

  static std::vector<ExprPtr> vec(ExprPtr a) {
    std::vector<ExprPtr> v;
    v.push_back(std::move(a));
    return v;
  }
  static std::vector<ExprPtr> vec(ExprPtr a, ExprPtr b) {
    std::vector<ExprPtr> v;
    v.push_back(std::move(a));
    v.push_back(std::move(b));
    return v;
  }

  std::vector<StmtPtr> transform(const std::vector<StmtPtr>& body) {
    std::vector<StmtPtr> out;
    for (const auto& s : body) stmt(*s, out);
    return out;
  }

  void stmt(const Stmt& s, std::vector<StmtPtr>& out) {
    std::visit([&](const auto& n) { stmt_node(s, n, out); }, s.node);
  }

  void stmt_node(const Stmt& s, const Stmt::Decl& d,
                 std::vector<StmtPtr>& out) {
    if (d.type == TypeKind::Double) {
      double_locals_.insert(d.name);
      Stmt::Decl sd{shadow(d.name), TypeKind::Double,
                    d.init ? deriv(*d.init) : nullptr, -1};
      out.push_back(mk_stmt(std::move(sd)));
    } else if (d.type != TypeKind::Int) {
      unsupported("tape declaration", s.loc);
    }
    out.push_back(clone(s));
  }

  void stmt_node(const Stmt& s, const Stmt::Assign& a,
                 std::vector<StmtPtr>& out) {
    if (a.lv.index) unsupported("assignment through an array", s.loc);
    if (double_locals_.count(a.lv.name))
      out.push_back(mk_assign(shadow(a.lv.name), deriv(*a.value)));
    else if (is_param(a.lv.name))
      unsupported("assignment to a parameter", s.loc);
    out.push_back(clone(s));
  }

  void stmt_node(const Stmt& s, const Stmt::CompoundAssign& a,
                 std::vector<StmtPtr>& out) {
    if (a.lv.index) unsupported("assignment through an array", s.loc);
    if (!double_locals_.count(a.lv.name)) {
      if (is_param(a.lv.name)) unsupported("assignment to a parameter", s.loc);
      out.push_back(clone(s));  // int compound assign; no derivative
      return;
    }
    const std::string& sh = shadow(a.lv.name);
    ExprPtr de = deriv(*a.value);
    switch (a.op) {
      case BinOp::Add:
      case BinOp::Sub: {
        if (!is_literal(*de, 0.0)) {
          auto st = std::make_unique<Stmt>();
          st->node = Stmt::CompoundAssign{a.op, LValue{sh, -1, nullptr, {}},
                                          std::move(de)};
          out.push_back(std::move(st));
        }
        break;
      }
      case BinOp::Mul: {
        // d(v*e) = dv*e + v*de
        ExprPtr upd = fadd(fmul(var(sh), clone(*a.value)),
                           fmul(var(a.lv.name), std::move(de)));
        out.push_back(mk_assign(sh, std::move(upd)));
        break;
      }
      case BinOp::Div: {
        // d(v/e) = (dv*e - v*de) / (e*e)
        ExprPtr upd = fdiv(fsub(fmul(var(sh), clone(*a.value)),
                                fmul(var(a.lv.name), std::move(de))),
                           fmul(clone(*a.value), clone(*a.value)));
        out.push_back(mk_assign(sh, std::move(upd)));
        break;
      }
      default: unsupported("compound assignment", s.loc);
    }
    out.push_back(clone(s));
  }

  void stmt_node(const Stmt&, const Stmt::For& f, std::vector<StmtPtr>& out) {
    auto st = std::make_unique<Stmt>();
    st->node = Stmt::For{f.counter, -1, clone(*f.start), clone(*f.bound),
                         transform(f.body)};
    out.push_back(std::move(st));
  }

  void stmt_node(const Stmt&, const Stmt::If& i, std::vector<StmtPtr>& out) {
    auto st = std::make_unique<Stmt>();
    st->node = Stmt::If{clone(*i.cond), transform(i.then_body),
                        transform(i.else_body)};
    out.push_back(std::move(st));
  }

  void stmt_node(const Stmt&, const Stmt::Return& r,
                 std::vector<StmtPtr>& out) {
    auto st = std::make_unique<Stmt>();
    st->node = Stmt::Return{deriv(*r.value)};
    out.push_back(std::move(st));
  }

  void stmt_node(const Stmt&, const Stmt::Block& b,
                 std::vector<StmtPtr>& out) {
    auto st = std::make_unique<Stmt>();
    st->node = Stmt::Block{transform(b.body)};
    out.push_back(std::move(st));
  }
};

}  // namespace

DerivedFunc differentiate(const FuncDef& func, const DiffRequest& req) {
  if (func.num_slots < 0)
    throw DlError(DiagKind::UnsupportedConstruct,
                  "function must be resolved before differentiation",
                  func.loc);
  DerivedFunc out;
  out.original = clone(func);
  out.derivative = ForwardDiff(func, req).run();
  out.mode = Mode::Forward;
  return out;
}

std::string differentiate_source(std::string_view source,
                                 const std::string& fname,
                                 const DiffRequest& req) {
  Program p = parse(source);
  const FuncDef* f = p.find(fname);
  if (!f)
    throw DlError(DiagKind::UnknownFunction,
                  "no function named '" + fname + "'");
  DerivedFunc d = differentiate(*f, req);
  return print(d.derivative);
}

}  // namespace difflang
