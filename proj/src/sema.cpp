#include "difflang/sema.hpp"

#include <unordered_map>
#include <unordered_set>

namespace difflang {

namespace {

bool is_tape(TypeKind t) {
  return t == TypeKind::IntTape || t == TypeKind::DoubleTape;
}

struct VarInfo {
  int slot;
  TypeKind type;
};

class FuncSema {
 public:
  FuncSema(FuncDef& f, const Program* ctx, size_t visible)
      : f_(f), ctx_(ctx), visible_(visible) {}

  void run() {
    check_params();
    push_scope();
    for (auto& p : f_.params) declare(p.name, p.type, p.loc, &p.slot);
    for (auto& s : f_.body) stmt(*s);
    pop_scope();
    if (!returns(f_.body))
      throw DlError(DiagKind::MissingReturn,
                    "function '" + f_.name +
                        "' has a control path that does not return",
                    f_.loc);
    f_.num_slots = next_slot_;
  }

 private:
  FuncDef& f_;
  const Program* ctx_;
  size_t visible_;
  std::vector<std::unordered_map<std::string, VarInfo>> scopes_;
  int next_slot_ = 0;

  void push_scope() { scopes_.emplace_back(); }
  void pop_scope() { scopes_.pop_back(); }

  void declare(const std::string& name, TypeKind type, SrcLoc loc, int* slot) {
    for (const auto& s : scopes_)
      if (s.count(name))
        throw DlError(DiagKind::TypeError,
                      "redeclaration of '" + name + "'", loc);
    *slot = next_slot_++;
    scopes_.back()[name] = {*slot, type};
  }

  const VarInfo* lookup(const std::string& name) const {
    for (auto it = scopes_.rbegin(); it != scopes_.rend(); ++it) {
      auto f = it->find(name);
      if (f != it->end()) return &f->second;
    }
    return nullptr;
  }

  const VarInfo& require(const std::string& name, SrcLoc loc) const {
    const VarInfo* v = lookup(name);
    if (!v)
      throw DlError(DiagKind::TypeError, "use of undeclared name '" + name + "'",
                    loc);
    return *v;
  }

  void check_params() {
    std::unordered_set<std::string> names;
    bool seen_default = false;
    for (const auto& p : f_.params) {
      if (!names.insert(p.name).second)
        throw DlError(DiagKind::DuplicateParam,
                      "duplicate parameter '" + p.name + "'", p.loc);
      if (p.default_value) {
        seen_default = true;
        if (p.type == TypeKind::DoubleArray)
          throw DlError(DiagKind::TypeError,
                        "array parameter '" + p.name + "' cannot have a default",
                        p.loc);
      } else if (seen_default) {
        throw DlError(DiagKind::TypeError,
                      "parameter '" + p.name +
                          "' without default follows a defaulted parameter",
                      p.loc);
      }
    }
  }

  // Wraps e in an int->double cast (or rewrites an int literal in place).
  void coerce_to_double(ExprPtr& e) {
    if (e->type == TypeKind::Double) return;
    if (e->type != TypeKind::Int)
      throw DlError(DiagKind::TypeError,
                    std::string("expected a double value, got ") +
                        type_name(e->type),
                    e->loc);
    if (auto* l = std::get_if<Expr::Literal>(&e->node); l && l->is_int) {
      l->dval = double(l->ival);
      l->ival = 0;
      l->is_int = false;
      e->type = TypeKind::Double;
      return;
    }
    SrcLoc loc = e->loc;
    auto cast = unary(UnOp::IntToDouble, std::move(e));
    cast->loc = loc;
    e = std::move(cast);
  }

  void require_int(const Expr& e, const char* what) {
    if (e.type != TypeKind::Int)
      throw DlError(DiagKind::TypeError,
                    std::string(what) + " must have type int, got " +
                        type_name(e.type),
                    e.loc);
  }

  TypeKind expr(Expr& e) {
    std::visit([&](auto& n) { node(e, n); }, e.node);
    return e.type;
  }

  void node(Expr& e, Expr::Literal& l) {
    e.type = l.is_int ? TypeKind::Int : TypeKind::Double;
  }

  void node(Expr& e, Expr::VarRef& v) {
    const VarInfo& info = require(v.name, e.loc);
    v.slot = info.slot;
    e.type = info.type;
  }

  void node(Expr& e, Expr::Index& ix) {
    const VarInfo& info = require(ix.array, e.loc);
    if (info.type != TypeKind::DoubleArray)
      throw DlError(DiagKind::TypeError,
                    "'" + ix.array + "' is not an array", e.loc);
    ix.slot = info.slot;
    expr(*ix.index);
    require_int(*ix.index, "array index");
    e.type = TypeKind::Double;
  }

  void node(Expr& e, Expr::Unary& u) {
    TypeKind t = expr(*u.operand);
    if (u.op == UnOp::Neg) {
      if (t != TypeKind::Double && t != TypeKind::Int)
        throw DlError(DiagKind::TypeError, "cannot negate a non-scalar", e.loc);
      e.type = t;
    } else {  // IntToDouble
      require_int(*u.operand, "cast operand");
      e.type = TypeKind::Double;
    }
  }

  void node(Expr& e, Expr::Binary& b) {
    TypeKind lt = expr(*b.lhs);
    TypeKind rt = expr(*b.rhs);
    if (is_tape(lt) || is_tape(rt) || lt == TypeKind::DoubleArray ||
        rt == TypeKind::DoubleArray)
      throw DlError(DiagKind::TypeError,
                    "operator requires scalar operands", e.loc);
    if (lt != rt) {
      coerce_to_double(b.lhs);
      coerce_to_double(b.rhs);
      lt = rt = TypeKind::Double;
    }
    e.type = is_compare(b.op) ? TypeKind::Int : lt;
  }

  void node(Expr& e, Expr::Call& c) {
    if (c.intrinsic) {
      intrinsic_call(e, c);
      return;
    }
    if (!ctx_)
      throw DlError(DiagKind::UnknownFunction,
                    "call to unknown function '" + c.callee + "'", e.loc);
    const FuncDef* callee = nullptr;
    for (size_t i = 0; i < visible_ && i < ctx_->functions.size(); ++i)
      if (ctx_->functions[i].name == c.callee) callee = &ctx_->functions[i];
    if (!callee)
      throw DlError(DiagKind::UnknownFunction,
                    "call to unknown function '" + c.callee + "'", e.loc);
    size_t required = 0;
    for (const auto& p : callee->params)
      if (!p.default_value) required++;
    if (c.args.size() < required || c.args.size() > callee->params.size())
      throw DlError(DiagKind::ArityMismatch,
                    "'" + c.callee + "' expects between " +
                        std::to_string(required) + " and " +
                        std::to_string(callee->params.size()) + " arguments",
                    e.loc);
    for (size_t i = 0; i < c.args.size(); ++i) {
      TypeKind at = expr(*c.args[i]);
      TypeKind pt = callee->params[i].type;
      if (pt == TypeKind::Double) coerce_to_double(c.args[i]);
      else if (at != pt)
        throw DlError(DiagKind::TypeError,
                      "argument " + std::to_string(i + 1) + " of '" +
                          c.callee + "' must have type " + type_name(pt),
                      c.args[i]->loc);
    }
    e.type = TypeKind::Double;
  }

  void intrinsic_call(Expr& e, Expr::Call& c) {
    Intrinsic in = *c.intrinsic;
    auto arity = [&](size_t n) {
      if (c.args.size() != n)
        throw DlError(DiagKind::ArityMismatch,
                      "'" + c.callee + "' takes exactly " + std::to_string(n) +
                          (n == 1 ? " argument" : " arguments"),
                      e.loc);
    };
    switch (in) {
      case Intrinsic::Sin:
      case Intrinsic::Cos:
      case Intrinsic::Exp:
      case Intrinsic::Log:
      case Intrinsic::Sqrt:
        arity(1);
        expr(*c.args[0]);
        coerce_to_double(c.args[0]);
        e.type = TypeKind::Double;
        return;
      case Intrinsic::Pow:
        arity(2);
        expr(*c.args[0]);
        expr(*c.args[1]);
        coerce_to_double(c.args[0]);
        coerce_to_double(c.args[1]);
        e.type = TypeKind::Double;
        return;
      case Intrinsic::Push:
      case Intrinsic::Pop: {
        arity(in == Intrinsic::Push ? 2 : 1);
        auto* tv = std::get_if<Expr::VarRef>(&c.args[0]->node);
        if (!tv)
          throw DlError(DiagKind::TypeError,
                        "first argument of '" + c.callee + "' must be a tape",
                        e.loc);
        TypeKind tt = expr(*c.args[0]);
        if (!is_tape(tt))
          throw DlError(DiagKind::TypeError,
                        "'" + tv->name + "' is not a tape", e.loc);
        TypeKind elem =
            tt == TypeKind::IntTape ? TypeKind::Int : TypeKind::Double;
        if (in == Intrinsic::Push) {
          TypeKind vt = expr(*c.args[1]);
          if (elem == TypeKind::Double) coerce_to_double(c.args[1]);
          else if (vt != TypeKind::Int)
            throw DlError(DiagKind::TypeError,
                          "cannot push a non-int value onto tape<int>",
                          c.args[1]->loc);
        }
        e.type = elem;
        return;
      }
    }
  }

  void stmt(Stmt& s) {
    std::visit([&](auto& n) { stmt_node(s, n); }, s.node);
  }

  void stmt_node(Stmt& s, Stmt::Decl& d) {
    if (is_tape(d.type)) {
      if (d.init)
        throw DlError(DiagKind::TypeError,
                      "tape declarations cannot have initializers", s.loc);
    } else if (d.init) {
      TypeKind t = expr(*d.init);
      if (d.type == TypeKind::Double) coerce_to_double(d.init);
      else if (t != TypeKind::Int)
        throw DlError(DiagKind::TypeError,
                      "cannot initialize int '" + d.name + "' from " +
                          type_name(t),
                      s.loc);
    }
    declare(d.name, d.type, s.loc, &d.slot);
  }

  // Resolves the lvalue and returns the type the assigned value must have.
  TypeKind lvalue(LValue& lv) {
    const VarInfo& info = require(lv.name, lv.loc);
    lv.slot = info.slot;
    if (lv.index) {
      if (info.type != TypeKind::DoubleArray)
        throw DlError(DiagKind::TypeError, "'" + lv.name + "' is not an array",
                      lv.loc);
      expr(*lv.index);
      require_int(*lv.index, "array index");
      return TypeKind::Double;
    }
    if (info.type == TypeKind::DoubleArray || is_tape(info.type))
      throw DlError(DiagKind::TypeError,
                    "cannot assign to '" + lv.name + "' as a scalar", lv.loc);
    return info.type;
  }

  void stmt_node(Stmt& s, Stmt::Assign& a) {
    TypeKind target = lvalue(a.lv);
    TypeKind vt = expr(*a.value);
    if (target == TypeKind::Double) coerce_to_double(a.value);
    else if (vt != TypeKind::Int)
      throw DlError(DiagKind::TypeError,
                    "cannot assign " + std::string(type_name(vt)) +
                        " to int '" + a.lv.name + "'",
                    s.loc);
  }

  void stmt_node(Stmt& s, Stmt::CompoundAssign& a) {
    TypeKind target = lvalue(a.lv);
    TypeKind vt = expr(*a.value);
    if (target == TypeKind::Double) coerce_to_double(a.value);
    else if (vt != TypeKind::Int)
      throw DlError(DiagKind::TypeError,
                    "cannot combine " + std::string(type_name(vt)) +
                        " into int '" + a.lv.name + "'",
                    s.loc);
  }

  void stmt_node(Stmt& s, Stmt::For& f) {
    expr(*f.start);
    require_int(*f.start, "loop start");
    push_scope();
    declare(f.counter, TypeKind::Int, s.loc, &f.slot);
    expr(*f.bound);
    require_int(*f.bound, "loop bound");
    check_counter_not_assigned(f.counter, f.body, s.loc);
    for (auto& b : f.body) stmt(*b);
    pop_scope();
  }

  void check_counter_not_assigned(const std::string& counter,
                                  const std::vector<StmtPtr>& body,
                                  SrcLoc loc) {
    for (const auto& sp : body) {
      std::visit(
          [&](const auto& n) {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, Stmt::Assign> ||
                          std::is_same_v<T, Stmt::CompoundAssign>) {
              if (n.lv.name == counter && !n.lv.index)
                throw DlError(DiagKind::TypeError,
                              "loop counter '" + counter +
                                  "' reassigned inside loop body",
                              sp->loc);
            } else if constexpr (std::is_same_v<T, Stmt::For>) {
              check_counter_not_assigned(counter, n.body, loc);
            } else if constexpr (std::is_same_v<T, Stmt::If>) {
              check_counter_not_assigned(counter, n.then_body, loc);
              check_counter_not_assigned(counter, n.else_body, loc);
            } else if constexpr (std::is_same_v<T, Stmt::Block>) {
              check_counter_not_assigned(counter, n.body, loc);
            }
          },
          sp->node);
    }
  }

  void stmt_node(Stmt&, Stmt::If& i) {
    expr(*i.cond);
    require_int(*i.cond, "if condition");
    push_scope();
    for (auto& b : i.then_body) stmt(*b);
    pop_scope();
    push_scope();
    for (auto& b : i.else_body) stmt(*b);
    pop_scope();
  }

  void stmt_node(Stmt&, Stmt::Return& r) {
    expr(*r.value);
    coerce_to_double(r.value);
  }

  void stmt_node(Stmt&, Stmt::Block& b) {
    push_scope();
    for (auto& s : b.body) stmt(*s);
    pop_scope();
  }

  static bool returns(const std::vector<StmtPtr>& body) {
    for (const auto& s : body) {
      bool r = std::visit(
          [&](const auto& n) {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, Stmt::Return>) return true;
            else if constexpr (std::is_same_v<T, Stmt::If>)
              return !n.else_body.empty() && returns(n.then_body) &&
                     returns(n.else_body);
            else if constexpr (std::is_same_v<T, Stmt::Block>)
              return returns(n.body);
            else
              return false;
          },
          s->node);
      if (r) return true;
    }
    return false;
  }
};

void resolve_one(FuncDef& f, const Program* ctx, size_t visible) {
  FuncSema(f, ctx, visible).run();
}

}  // namespace

void resolve_program(Program& p) {
  std::unordered_set<std::string> names;
  for (const auto& f : p.functions)
    if (!names.insert(f.name).second)
      throw DlError(DiagKind::DuplicateFunction,
                    "duplicate function '" + f.name + "'", f.loc);
  for (size_t i = 0; i < p.functions.size(); ++i)
    resolve_one(p.functions[i], &p, i);
}

void resolve_function(FuncDef& f, const Program* context) {
  size_t visible = 0;
  if (context) {
    visible = context->functions.size();
    for (size_t i = 0; i < context->functions.size(); ++i)
      if (context->functions[i].name == f.name) {
        visible = i;
        break;
      }
  }
  resolve_one(f, context, visible);
}

std::vector<Diagnostic> validate(Program& p) {
  std::vector<Diagnostic> diags;
  std::unordered_set<std::string> names;
  for (const auto& f : p.functions)
    if (!names.insert(f.name).second)
      diags.push_back({DiagKind::DuplicateFunction,
                       "duplicate function '" + f.name + "'", f.loc, ""});
  for (size_t i = 0; i < p.functions.size(); ++i) {
    try {
      resolve_one(p.functions[i], &p, i);
    } catch (const DlError& e) {
      diags.push_back(e.diagnostic());
    }
  }
  return diags;
}

const char* diag_kind_name(DiagKind k) {
  switch (k) {
    case DiagKind::SyntaxError: return "syntax error";
    case DiagKind::TypeError: return "type error";
    case DiagKind::MissingReturn: return "missing return";
    case DiagKind::DuplicateParam: return "duplicate parameter";
    case DiagKind::DuplicateFunction: return "duplicate function";
    case DiagKind::UnknownFunction: return "unknown function";
    case DiagKind::UnknownParameter: return "unknown parameter";
    case DiagKind::UnsupportedConstruct: return "unsupported construct";
    case DiagKind::NonScalarOutput: return "non-scalar output";
    case DiagKind::ArityMismatch: return "arity mismatch";
    case DiagKind::TypeMismatch: return "type mismatch";
    case DiagKind::IndexOutOfBounds: return "index out of bounds";
    case DiagKind::UnboundName: return "unbound name";
    case DiagKind::DomainError: return "domain error";
    case DiagKind::NonTermination: return "step limit exceeded";
    case DiagKind::PopOnEmpty: return "pop on empty tape";
    case DiagKind::UnknownModel: return "unknown model";
    case DiagKind::NonConvergence: return "no convergence";
  }
  return "error";
}

std::string Diagnostic::format() const {
  std::string f = file.empty() ? "<input>" : file;
  return f + ":" + std::to_string(loc.line) + ":" + std::to_string(loc.col) +
         ": error: " + std::string(diag_kind_name(kind)) + ": " + message;
}

}  // namespace difflang
