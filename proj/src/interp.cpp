#include "difflang/interp.hpp"

#include <cmath>

namespace difflang {

double Value::as_double() const {
  if (const double* d = std::get_if<double>(&v)) return *d;
  throw DlError(DiagKind::TypeMismatch, "expected a double value");
}

long long Value::as_int() const {
  if (const long long* i = std::get_if<long long>(&v)) return *i;
  throw DlError(DiagKind::TypeMismatch, "expected an int value");
}

const ArrayRef& Value::as_array() const {
  if (const ArrayRef* a = std::get_if<ArrayRef>(&v)) return *a;
  throw DlError(DiagKind::TypeMismatch, "expected an array value");
}

Value make_array(std::vector<double> data) {
  Value v;
  v.v = std::make_shared<std::vector<double>>(std::move(data));
  return v;
}

namespace {

bool matches_type(const Value& v, TypeKind t) {
  switch (t) {
    case TypeKind::Double: return std::holds_alternative<double>(v.v);
    case TypeKind::Int: return std::holds_alternative<long long>(v.v);
    case TypeKind::DoubleArray: return std::holds_alternative<ArrayRef>(v.v);
    default: return false;
  }
}

}  // namespace

class Exec {
 public:
  Exec(Interpreter& interp, const FuncDef& f)
      : interp_(interp), f_(f), frame_(size_t(f.num_slots)) {}

  Value run(std::vector<Value>& args) {
    for (size_t i = 0; i < args.size(); ++i)
      frame_[f_.params[i].slot] = std::move(args[i]);
    Value result;
    if (exec_body(f_.body, result)) return result;
    // unreachable for resolved functions (sema checks all paths return)
    throw DlError(DiagKind::MissingReturn,
                  "function '" + f_.name + "' fell off the end");
  }

 private:
  Interpreter& interp_;
  const FuncDef& f_;
  std::vector<Value> frame_;

  void step(SrcLoc loc) {
    if (++interp_.steps_ > interp_.opts_.max_steps)
      throw DlError(DiagKind::NonTermination,
                    "step limit exceeded in '" + f_.name + "'", loc);
  }

  void count_op() {
    if (interp_.stats_) interp_.stats_->scalar_ops++;
  }

  bool exec_body(const std::vector<StmtPtr>& body, Value& result) {
    for (const auto& s : body)
      if (exec(*s, result)) return true;
    return false;
  }

  // returns true if a Return was executed
  bool exec(const Stmt& s, Value& result) {
    step(s.loc);
    return std::visit([&](const auto& n) { return stmt(s, n, result); },
                      s.node);
  }

  bool stmt(const Stmt& s, const Stmt::Decl& d, Value&) {
    switch (d.type) {
      case TypeKind::IntTape:
        frame_[d.slot].v = std::make_shared<std::vector<long long>>();
        break;
      case TypeKind::DoubleTape:
        frame_[d.slot].v = std::make_shared<DoubleTapeData>();
        break;
      default:
        if (d.init) frame_[d.slot] = eval(*d.init);
        else frame_[d.slot] = Value();
        break;
    }
    (void)s;
    return false;
  }

  double* array_slot(const LValue& lv) {
    const ArrayRef& arr = frame_[lv.slot].as_array();
    long long i = eval(*lv.index).as_int();
    if (i < 0 || size_t(i) >= arr->size())
      throw DlError(DiagKind::IndexOutOfBounds,
                    "index " + std::to_string(i) + " out of bounds for '" +
                        lv.name + "' of length " + std::to_string(arr->size()),
                    lv.loc);
    return &(*arr)[size_t(i)];
  }

  bool stmt(const Stmt&, const Stmt::Assign& a, Value&) {
    Value v = eval(*a.value);
    if (a.lv.index) *array_slot(a.lv) = v.as_double();
    else frame_[a.lv.slot] = std::move(v);
    return false;
  }

  bool stmt(const Stmt& s, const Stmt::CompoundAssign& a, Value&) {
    Value rhs = eval(*a.value);
    if (a.lv.index) {
      double* slot = array_slot(a.lv);
      *slot = arith_d(a.op, *slot, rhs.as_double(), s.loc);
    } else {
      Value& cur = frame_[a.lv.slot];
      if (cur.is_unset())
        throw DlError(DiagKind::UnboundName,
                      "'" + a.lv.name + "' used before assignment", s.loc);
      if (std::holds_alternative<double>(cur.v))
        cur.v = arith_d(a.op, std::get<double>(cur.v), rhs.as_double(), s.loc);
      else
        cur.v = arith_i(a.op, cur.as_int(), rhs.as_int(), s.loc);
    }
    count_op();
    return false;
  }

  bool stmt(const Stmt& s, const Stmt::For& f, Value& result) {
    long long start = eval(*f.start).as_int();
    frame_[f.slot].v = start;
    // the bound is re-evaluated every iteration, as written
    while (true) {
      step(s.loc);
      long long i = std::get<long long>(frame_[f.slot].v);
      long long bound = eval(*f.bound).as_int();
      count_op();  // the i < bound comparison
      if (i >= bound) break;
      if (exec_body(f.body, result)) return true;
      frame_[f.slot].v = i + 1;
      count_op();  // i++
    }
    return false;
  }

  bool stmt(const Stmt&, const Stmt::If& i, Value& result) {
    long long c = eval(*i.cond).as_int();
    return exec_body(c != 0 ? i.then_body : i.else_body, result);
  }

  bool stmt(const Stmt&, const Stmt::Return& r, Value& result) {
    result = eval(*r.value);
    return true;
  }

  bool stmt(const Stmt&, const Stmt::Block& b, Value& result) {
    return exec_body(b.body, result);
  }

  double arith_d(BinOp op, double a, double b, SrcLoc loc) {
    switch (op) {
      case BinOp::Add: return a + b;
      case BinOp::Sub: return a - b;
      case BinOp::Mul: return a * b;
      case BinOp::Div: return a / b;  // IEEE semantics, inf/nan propagate
      default:
        throw DlError(DiagKind::TypeMismatch, "not an arithmetic operator",
                      loc);
    }
  }

  long long arith_i(BinOp op, long long a, long long b, SrcLoc loc) {
    switch (op) {
      case BinOp::Add: return a + b;
      case BinOp::Sub: return a - b;
      case BinOp::Mul: return a * b;
      case BinOp::Div:
        if (b == 0)
          throw DlError(DiagKind::DomainError, "integer division by zero", loc);
        return a / b;
      default:
        throw DlError(DiagKind::TypeMismatch, "not an arithmetic operator",
                      loc);
    }
  }

  Value eval(const Expr& e) {
    step(e.loc);
    return std::visit([&](const auto& n) { return node(e, n); }, e.node);
  }

  Value node(const Expr&, const Expr::Literal& l) {
    if (l.is_int) return Value(l.ival);
    return Value(l.dval);
  }

  Value node(const Expr& e, const Expr::VarRef& v) {
    const Value& val = frame_[v.slot];
    if (val.is_unset())
      throw DlError(DiagKind::UnboundName,
                    "'" + v.name + "' used before assignment", e.loc);
    return val;
  }

  Value node(const Expr& e, const Expr::Index& ix) {
    const ArrayRef& arr = frame_[ix.slot].as_array();
    long long i = eval(*ix.index).as_int();
    if (i < 0 || size_t(i) >= arr->size())
      throw DlError(DiagKind::IndexOutOfBounds,
                    "index " + std::to_string(i) + " out of bounds for '" +
                        ix.array + "' of length " + std::to_string(arr->size()),
                    e.loc);
    return Value((*arr)[size_t(i)]);
  }

  Value node(const Expr&, const Expr::Unary& u) {
    Value v = eval(*u.operand);
    if (u.op == UnOp::Neg) {
      count_op();
      if (std::holds_alternative<double>(v.v))
        return Value(-std::get<double>(v.v));
      return Value(-v.as_int());
    }
    return Value(double(v.as_int()));
  }

  Value node(const Expr& e, const Expr::Binary& b) {
    Value lv = eval(*b.lhs);
    Value rv = eval(*b.rhs);
    count_op();
    bool dd = std::holds_alternative<double>(lv.v);
    if (is_arith(b.op)) {
      if (dd) return Value(arith_d(b.op, std::get<double>(lv.v),
                                   rv.as_double(), e.loc));
      return Value(arith_i(b.op, lv.as_int(), rv.as_int(), e.loc));
    }
    bool r;
    if (dd) {
      double a = std::get<double>(lv.v), c = rv.as_double();
      switch (b.op) {
        case BinOp::Lt: r = a < c; break;
        case BinOp::Le: r = a <= c; break;
        case BinOp::Gt: r = a > c; break;
        case BinOp::Ge: r = a >= c; break;
        case BinOp::Eq: r = a == c; break;
        default: r = a != c; break;
      }
    } else {
      long long a = lv.as_int(), c = rv.as_int();
      switch (b.op) {
        case BinOp::Lt: r = a < c; break;
        case BinOp::Le: r = a <= c; break;
        case BinOp::Gt: r = a > c; break;
        case BinOp::Ge: r = a >= c; break;
        case BinOp::Eq: r = a == c; break;
        default: r = a != c; break;
      }
    }
    return Value((long long)(r ? 1 : 0));
  }

  Value node(const Expr& e, const Expr::Call& c) {
    if (!c.intrinsic) {
      const FuncDef* callee = interp_.prog_.find(c.callee);
      if (!callee)
        throw DlError(DiagKind::UnknownFunction,
                      "call to unknown function '" + c.callee + "'", e.loc);
      std::vector<Value> args;
      args.reserve(c.args.size());
      for (const auto& a : c.args) args.push_back(eval(*a));
      return interp_.call(*callee, std::move(args));
    }
    switch (*c.intrinsic) {
      case Intrinsic::Sin:
      case Intrinsic::Cos:
      case Intrinsic::Exp: {
        double x = eval(*c.args[0]).as_double();
        if (interp_.stats_) interp_.stats_->intrinsic_calls++;
        if (*c.intrinsic == Intrinsic::Sin) return Value(std::sin(x));
        if (*c.intrinsic == Intrinsic::Cos) return Value(std::cos(x));
        return Value(std::exp(x));
      }
      case Intrinsic::Log: {
        double x = eval(*c.args[0]).as_double();
        if (x <= 0.0)
          throw DlError(DiagKind::DomainError,
                        "log of non-positive value " + std::to_string(x),
                        e.loc);
        if (interp_.stats_) interp_.stats_->intrinsic_calls++;
        return Value(std::log(x));
      }
      case Intrinsic::Sqrt: {
        double x = eval(*c.args[0]).as_double();
        if (x < 0.0)
          throw DlError(DiagKind::DomainError,
                        "sqrt of negative value " + std::to_string(x), e.loc);
        if (interp_.stats_) interp_.stats_->intrinsic_calls++;
        return Value(std::sqrt(x));
      }
      case Intrinsic::Pow: {
        double base = eval(*c.args[0]).as_double();
        double exp = eval(*c.args[1]).as_double();
        if (base < 0.0 && exp != std::floor(exp))
          throw DlError(DiagKind::DomainError,
                        "pow of negative base with non-integer exponent",
                        e.loc);
        if (base == 0.0 && exp < 0.0)
          throw DlError(DiagKind::DomainError, "pow(0, negative)", e.loc);
        if (interp_.stats_) interp_.stats_->intrinsic_calls++;
        return Value(std::pow(base, exp));
      }
      case Intrinsic::Push: {
        const Value& tape = frame_[std::get<Expr::VarRef>(c.args[0]->node).slot];
        Value v = eval(*c.args[1]);
        if (const auto* ti = std::get_if<IntTapeRef>(&tape.v)) {
          (*ti)->push_back(v.as_int());
        } else if (const auto* td = std::get_if<DoubleTapeRef>(&tape.v)) {
          (*td)->data.push_back(v.as_double());
        } else {
          throw DlError(DiagKind::TypeMismatch, "push target is not a tape",
                        e.loc);
        }
        return v;  // push returns its value, usable inline
      }
      case Intrinsic::Pop: {
        const Value& tape = frame_[std::get<Expr::VarRef>(c.args[0]->node).slot];
        if (const auto* ti = std::get_if<IntTapeRef>(&tape.v)) {
          if ((*ti)->empty())
            throw DlError(DiagKind::PopOnEmpty, "pop on empty tape", e.loc);
          long long v = (*ti)->back();
          (*ti)->pop_back();
          return Value(v);
        }
        if (const auto* td = std::get_if<DoubleTapeRef>(&tape.v)) {
          if ((*td)->data.empty())
            throw DlError(DiagKind::PopOnEmpty, "pop on empty tape", e.loc);
          double v = (*td)->data.back();
          (*td)->data.pop_back();
          return Value(v);
        }
        throw DlError(DiagKind::TypeMismatch, "pop target is not a tape",
                      e.loc);
      }
    }
    throw DlError(DiagKind::TypeMismatch, "bad intrinsic", e.loc);
  }
};

Value Interpreter::call(const std::string& fname, std::vector<Value> args) {
  const FuncDef* f = prog_.find(fname);
  if (!f)
    throw DlError(DiagKind::UnknownFunction,
                  "no function named '" + fname + "'");
  return call(*f, std::move(args));
}

Value Interpreter::call(const FuncDef& f, std::vector<Value> args) {
  if (f.num_slots < 0)
    throw DlError(DiagKind::TypeMismatch,
                  "function '" + f.name + "' was not resolved");
  size_t required = 0;
  for (const auto& p : f.params)
    if (!p.default_value) required++;
  if (args.size() < required || args.size() > f.params.size())
    throw DlError(DiagKind::ArityMismatch,
                  "'" + f.name + "' expects between " +
                      std::to_string(required) + " and " +
                      std::to_string(f.params.size()) + " arguments, got " +
                      std::to_string(args.size()));
  for (size_t i = 0; i < args.size(); ++i)
    if (!matches_type(args[i], f.params[i].type))
      throw DlError(DiagKind::TypeMismatch,
                    "argument '" + f.params[i].name + "' of '" + f.name +
                        "' has the wrong type");
  for (size_t i = args.size(); i < f.params.size(); ++i) {
    const Param& p = f.params[i];
    if (p.type == TypeKind::Int) args.push_back(Value((long long)*p.default_value));
    else args.push_back(Value(*p.default_value));
  }

  if (depth_ == 0) steps_ = 0;
  depth_++;
  if (stats_) stats_->func_evals++;
  try {
    Exec exec(*this, f);
    Value result = exec.run(args);
    depth_--;
    return result;
  } catch (...) {
    depth_--;
    throw;
  }
}

Value call_counted(Interpreter& interp, const std::string& fname,
                   std::vector<Value> args, EvalStats& stats) {
  EvalStats* prev = interp.stats();
  interp.set_stats(&stats);
  try {
    Value v = interp.call(fname, std::move(args));
    interp.set_stats(prev);
    return v;
  } catch (...) {
    interp.set_stats(prev);
    throw;
  }
}

}  // namespace difflang
