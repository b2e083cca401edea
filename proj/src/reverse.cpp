#include "difflang/reverse.hpp"

#include <unordered_map>
#include <unordered_set>

#include "difflang/diagnostics.hpp"
#include "difflang/fold.hpp"
#include "difflang/parser.hpp"
#include "difflang/printer.hpp"
#include "difflang/sema.hpp"

namespace difflang {

namespace {

StmtPtr mk_decl(std::string name, TypeKind type, ExprPtr init) {
  auto s = std::make_unique<Stmt>();
  s->node = Stmt::Decl{std::move(name), type, std::move(init), -1};
  return s;
}

StmtPtr mk_assign(std::string name, ExprPtr value) {
  auto s = std::make_unique<Stmt>();
  s->node = Stmt::Assign{LValue{std::move(name), -1, nullptr, {}},
                         std::move(value)};
  return s;
}

StmtPtr mk_accum(std::string name, ExprPtr idx, ExprPtr value) {
  auto s = std::make_unique<Stmt>();
  s->node = Stmt::CompoundAssign{
      BinOp::Add, LValue{std::move(name), -1, std::move(idx), {}},
      std::move(value)};
  return s;
}

std::vector<ExprPtr> vec(ExprPtr a) {
  std::vector<ExprPtr> v;
  v.push_back(std::move(a));
  return v;
}
std::vector<ExprPtr> vec(ExprPtr a, ExprPtr b) {
  std::vector<ExprPtr> v;
  v.push_back(std::move(a));
  v.push_back(std::move(b));
  return v;
}

ExprPtr tape_push(const std::string& tape, TypeKind elem, ExprPtr value) {
  TypeKind tk = elem == TypeKind::Int ? TypeKind::IntTape : TypeKind::DoubleTape;
  auto c = call(Intrinsic::Push, vec(var(tape, tk), std::move(value)));
  c->type = elem;
  return c;
}

ExprPtr tape_pop(const std::string& tape, TypeKind elem) {
  TypeKind tk = elem == TypeKind::Int ? TypeKind::IntTape : TypeKind::DoubleTape;
  auto c = call(Intrinsic::Pop, vec(var(tape, tk)));
  c->type = elem;
  return c;
}

// The gradient body is emitted in two sweeps. The forward sweep re-runs the
// original statements, counting loop trips and pushing onto tapes every value
// the reverse sweep will consume: loop counters, branch selectors, and the
// overwritten values of variables that appear in adjoint expressions. The
// reverse sweep walks the statements backwards, popping those tapes and
// accumulating adjoints into _d_* locals and the _result slots.
class ReverseDiff {
 public:
  ReverseDiff(const FuncDef& f, const GradRequest& req) : f_(f), req_(req) {
    for (const auto& p : f_.params) used_.insert(p.name);
    collect_locals(f_.body);
  }

  FuncDef run() {
    check_request();
    analyze(f_.body, /*top=*/true);
    result_name_ = fresh("_result");
    collect_needed(f_.body);

    std::vector<StmtPtr> fwd_stmts = fwd(f_.body, /*top=*/true);

    FuncDef g;
    g.name = f_.name + "_grad";
    g.params = f_.params;
    for (auto& p : g.params) {
      p.slot = -1;
      // _result comes last and arrays cannot carry defaults, so the gradient
      // takes every argument explicitly.
      p.default_value.reset();
    }
    g.params.push_back(Param{result_name_, TypeKind::DoubleArray, {}, -1, {}});

    for (auto& d : top_) g.body.push_back(std::move(d));
    for (auto& s : fwd_stmts) g.body.push_back(std::move(s));

    std::vector<StmtPtr> rev_stmts = rev_scope(f_.body, /*top=*/true);
    for (auto& s : rev_stmts) g.body.push_back(std::move(s));

    for (const auto& p : f_.params) {
      if (wrt_scalars_.count(p.name)) {
        long long slot = scalar_slot_.at(p.name);
        g.body.push_back(
            mk_accum(result_name_, lit_i(slot), var(adjoint(p.name))));
      }
    }
    auto ret = std::make_unique<Stmt>();
    ret->node = Stmt::Return{lit_d(0.0)};
    g.body.push_back(std::move(ret));

    resolve_function(g, nullptr);
    return g;
  }

 private:
  struct LoopMeta {
    std::string trip;
    std::string ctr_tape;  // empty when the counter is not needed in reverse
    std::string cnt_tape;  // empty for top-level loops
  };

  const FuncDef& f_;
  const GradRequest& req_;
  std::unordered_set<std::string> used_;
  std::string result_name_;
  std::string wrt_array_;  // empty when differentiating w.r.t. scalars
  std::unordered_set<std::string> wrt_scalars_;
  std::unordered_map<std::string, long long> scalar_slot_;
  std::unordered_map<std::string, TypeKind> local_type_;  // locals + counters
  std::unordered_map<std::string, std::string> adj_;
  std::unordered_set<std::string> needed_;
  std::unordered_map<const Stmt*, LoopMeta> loops_;
  std::unordered_map<const Stmt*, std::string> if_tapes_;
  std::unordered_map<const Stmt*, std::string> decl_tapes_;
  std::unordered_map<std::string, std::string> restore_;  // var -> tape
  std::vector<StmtPtr> top_;  // counter and tape declarations
  int tseq_ = 0;   // _t<k>: trip counters and tapes
  int vseq_ = 0;   // _v<k>: dummy locals carrying a push
  int nseq_ = 0;   // _n<k>: popped trip counts of nested loops
  int rseq_ = 0;   // _r<k>: reverse loop counters
  int rdseq_ = 0;  // _r_d<k>: captured adjoint seeds

  std::string fresh(std::string base) {
    while (used_.count(base)) base += "_";
    used_.insert(base);
    return base;
  }

  std::string tname() { return fresh("_t" + std::to_string(tseq_++)); }

  const std::string& adjoint(const std::string& name) {
    auto it = adj_.find(name);
    if (it != adj_.end()) return it->second;
    return adj_.emplace(name, fresh("_d_" + name)).first->second;
  }

  const Param* find_param(const std::string& name) const {
    for (const auto& p : f_.params)
      if (p.name == name) return &p;
    return nullptr;
  }

  [[noreturn]] void unsupported(const std::string& what, SrcLoc loc) const {
    throw DlError(DiagKind::UnsupportedConstruct,
                  what + " cannot be differentiated in reverse mode", loc);
  }

  void check_request() {
    if (req_.wrt.empty())
      throw DlError(DiagKind::UnknownParameter,
                    "gradient request names no parameters", f_.loc);
    std::unordered_set<std::string> seen;
    for (const auto& name : req_.wrt) {
      if (!seen.insert(name).second)
        throw DlError(DiagKind::UnknownParameter,
                      "parameter '" + name + "' listed twice", f_.loc);
      const Param* p = find_param(name);
      if (!p)
        throw DlError(DiagKind::UnknownParameter,
                      "'" + f_.name + "' has no parameter '" + name + "'",
                      f_.loc);
      if (p->type == TypeKind::DoubleArray) {
        if (!wrt_array_.empty())
          unsupported("a gradient over two array parameters", f_.loc);
        wrt_array_ = name;
      } else if (p->type == TypeKind::Double) {
        scalar_slot_[name] = (long long)wrt_scalars_.size();
        wrt_scalars_.insert(name);
      } else {
        throw DlError(DiagKind::UnknownParameter,
                      "parameter '" + name + "' is not differentiable",
                      p->loc);
      }
    }
    if (!wrt_array_.empty() && !wrt_scalars_.empty())
      unsupported("a gradient mixing an array parameter with scalars", f_.loc);
  }

  void collect_locals(const std::vector<StmtPtr>& body) {
    for (const auto& s : body) {
      std::visit(
          [&](const auto& n) {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, Stmt::Decl>) {
              used_.insert(n.name);
              local_type_[n.name] = n.type;
            } else if constexpr (std::is_same_v<T, Stmt::For>) {
              used_.insert(n.counter);
              local_type_[n.counter] = TypeKind::Int;
              collect_locals(n.body);
            } else if constexpr (std::is_same_v<T, Stmt::If>) {
              collect_locals(n.then_body);
              collect_locals(n.else_body);
            } else if constexpr (std::is_same_v<T, Stmt::Block>) {
              collect_locals(n.body);
            }
          },
          s->node);
    }
  }

  // Reject what the transform cannot handle and require the single trailing
  // return shape.
  void analyze(const std::vector<StmtPtr>& body, bool top) {
    for (size_t i = 0; i < body.size(); i++) {
      const Stmt& s = *body[i];
      std::visit(
          [&](const auto& n) {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, Stmt::Decl>) {
              if (n.type == TypeKind::IntTape || n.type == TypeKind::DoubleTape)
                unsupported("a tape declaration", s.loc);
              if (n.init) check_expr(*n.init);
            } else if constexpr (std::is_same_v<T, Stmt::Assign>) {
              if (n.lv.index) unsupported("a store through an array", s.loc);
              if (find_param(n.lv.name))
                unsupported("an assignment to a parameter", s.loc);
              check_expr(*n.value);
            } else if constexpr (std::is_same_v<T, Stmt::CompoundAssign>) {
              if (n.lv.index) unsupported("a store through an array", s.loc);
              if (find_param(n.lv.name))
                unsupported("an assignment to a parameter", s.loc);
              check_expr(*n.value);
            } else if constexpr (std::is_same_v<T, Stmt::For>) {
              check_expr(*n.start);
              check_expr(*n.bound);
              analyze(n.body, false);
            } else if constexpr (std::is_same_v<T, Stmt::If>) {
              check_expr(*n.cond);
              analyze(n.then_body, false);
              analyze(n.else_body, false);
            } else if constexpr (std::is_same_v<T, Stmt::Block>) {
              analyze(n.body, false);
            } else if constexpr (std::is_same_v<T, Stmt::Return>) {
              if (!top || i + 1 != body.size())
                unsupported("a return before the end of the function", s.loc);
              check_expr(*n.value);
            }
          },
          s.node);
    }
    if (top) {
      if (body.empty() || !std::holds_alternative<Stmt::Return>(body.back()->node))
        unsupported("a function without a trailing return", f_.loc);
    }
  }

  void check_expr(const Expr& e) const {
    std::visit(
        [&](const auto& n) {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, Expr::Call>) {
            if (!n.intrinsic)
              unsupported("a call to a user-defined function", e.loc);
            if (*n.intrinsic == Intrinsic::Push || *n.intrinsic == Intrinsic::Pop)
              unsupported("a tape operation", e.loc);
            for (const auto& a : n.args) check_expr(*a);
          } else if constexpr (std::is_same_v<T, Expr::Index>) {
            check_expr(*n.index);
          } else if constexpr (std::is_same_v<T, Expr::Unary>) {
            check_expr(*n.operand);
          } else if constexpr (std::is_same_v<T, Expr::Binary>) {
            check_expr(*n.lhs);
            check_expr(*n.rhs);
          }
        },
        e.node);
  }

  // ---- needed set -------------------------------------------------------
  // A variable must be recoverable during the reverse sweep iff it is read
  // by some emitted adjoint expression. Found by a dry emission run.

  void collect_needed(const std::vector<StmtPtr>& body) {
    for (const auto& s : body) {
      std::visit(
          [&](const auto& n) {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, Stmt::Decl>) {
              if (n.type == TypeKind::Double && n.init) scratch(*n.init);
            } else if constexpr (std::is_same_v<T, Stmt::Assign>) {
              if (local_type_.at(n.lv.name) == TypeKind::Double)
                scratch(*n.value);
            } else if constexpr (std::is_same_v<T, Stmt::CompoundAssign>) {
              if (local_type_.at(n.lv.name) == TypeKind::Double) {
                scratch(*n.value);
                if (n.op == BinOp::Mul || n.op == BinOp::Div) {
                  needed_.insert(n.lv.name);
                  scan_expr(*n.value);
                }
              }
            } else if constexpr (std::is_same_v<T, Stmt::For>) {
              collect_needed(n.body);
            } else if constexpr (std::is_same_v<T, Stmt::If>) {
              collect_needed(n.then_body);
              collect_needed(n.else_body);
            } else if constexpr (std::is_same_v<T, Stmt::Block>) {
              collect_needed(n.body);
            } else if constexpr (std::is_same_v<T, Stmt::Return>) {
              scratch(*n.value);
            }
          },
          s->node);
    }
  }

  void scratch(const Expr& e) {
    std::vector<StmtPtr> out;
    adj(e, lit_d(1.0), out);
    for (const auto& s : out) {
      if (const auto* ca = std::get_if<Stmt::CompoundAssign>(&s->node)) {
        if (ca->lv.index) scan_expr(*ca->lv.index);
        scan_expr(*ca->value);
      }
    }
  }

  void scan_expr(const Expr& e) {
    std::visit(
        [&](const auto& n) {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, Expr::VarRef>) {
            if (local_type_.count(n.name)) needed_.insert(n.name);
          } else if constexpr (std::is_same_v<T, Expr::Index>) {
            scan_expr(*n.index);
          } else if constexpr (std::is_same_v<T, Expr::Unary>) {
            scan_expr(*n.operand);
          } else if constexpr (std::is_same_v<T, Expr::Binary>) {
            scan_expr(*n.lhs);
            scan_expr(*n.rhs);
          } else if constexpr (std::is_same_v<T, Expr::Call>) {
            for (const auto& a : n.args) scan_expr(*a);
          }
        },
        e.node);
  }

  // ---- forward sweep ----------------------------------------------------

  const std::string& restore_tape(const std::string& name) {
    auto it = restore_.find(name);
    if (it != restore_.end()) return it->second;
    TypeKind elem = local_type_.at(name);
    std::string t = tname();
    top_.push_back(mk_decl(t, elem == TypeKind::Int ? TypeKind::IntTape
                                                    : TypeKind::DoubleTape,
                           nullptr));
    return restore_.emplace(name, std::move(t)).first->second;
  }

  // Wraps one read of `name` in push(tape, ...) so the forward value lands on
  // the tape without an extra statement. Returns false when the expression
  // never reads the variable.
  bool wrap_read(ExprPtr& e, const std::string& name, const std::string& tape,
                 TypeKind elem) {
    if (auto* v = std::get_if<Expr::VarRef>(&e->node)) {
      if (v->name == name) {
        e = tape_push(tape, elem, std::move(e));
        return true;
      }
      return false;
    }
    if (auto* ix = std::get_if<Expr::Index>(&e->node))
      return wrap_read(ix->index, name, tape, elem);
    if (auto* u = std::get_if<Expr::Unary>(&e->node))
      return wrap_read(u->operand, name, tape, elem);
    if (auto* b = std::get_if<Expr::Binary>(&e->node))
      return wrap_read(b->lhs, name, tape, elem) ||
             wrap_read(b->rhs, name, tape, elem);
    if (auto* c = std::get_if<Expr::Call>(&e->node)) {
      for (auto& a : c->args)
        if (wrap_read(a, name, tape, elem)) return true;
    }
    return false;
  }

  // Tries the unconditional straight-line statements of an instrumented loop
  // body; control-flow statements are skipped because a read inside them may
  // not execute exactly once per iteration.
  bool wrap_read_in_stmts(std::vector<StmtPtr>& stmts, const std::string& name,
                          const std::string& tape, TypeKind elem) {
    for (auto& s : stmts) {
      if (auto* d = std::get_if<Stmt::Decl>(&s->node)) {
        if (d->init && wrap_read(d->init, name, tape, elem)) return true;
      } else if (auto* a = std::get_if<Stmt::Assign>(&s->node)) {
        if (wrap_read(a->value, name, tape, elem)) return true;
      } else if (auto* ca = std::get_if<Stmt::CompoundAssign>(&s->node)) {
        if (wrap_read(ca->value, name, tape, elem)) return true;
      }
    }
    return false;
  }

  StmtPtr dummy_push(const std::string& tape, TypeKind elem, ExprPtr value) {
    return mk_decl(fresh("_v" + std::to_string(vseq_++)), elem,
                   tape_push(tape, elem, std::move(value)));
  }

  std::vector<StmtPtr> fwd(const std::vector<StmtPtr>& body, bool top) {
    std::vector<StmtPtr> out;
    for (const auto& sp : body) {
      const Stmt& s = *sp;
      std::visit([&](const auto& n) { fwd_node(s, n, out, top); }, s.node);
    }
    if (!top) {
      // Scope exit: save the final value of every local the reverse sweep
      // will rebind when it re-enters this scope backwards.
      for (const auto& sp : body) {
        const auto* d = std::get_if<Stmt::Decl>(&sp->node);
        if (!d || !needed_.count(d->name)) continue;
        if (d->type != TypeKind::Double && d->type != TypeKind::Int) continue;
        std::string t = tname();
        top_.push_back(mk_decl(t, d->type == TypeKind::Int
                                      ? TypeKind::IntTape
                                      : TypeKind::DoubleTape,
                               nullptr));
        out.push_back(dummy_push(t, d->type, var(d->name, d->type)));
        decl_tapes_[sp.get()] = std::move(t);
      }
    }
    return out;
  }

  void fwd_node(const Stmt& s, const Stmt::Decl& d, std::vector<StmtPtr>& out,
                bool) {
    if (needed_.count(d.name) && !d.init) {
      // Give the variable a defined value so scope-exit and overwrite pushes
      // never read an uninitialized slot.
      out.push_back(mk_decl(d.name, d.type,
                            d.type == TypeKind::Int ? lit_i(0) : lit_d(0.0)));
      return;
    }
    out.push_back(clone(s));
  }

  void fwd_node(const Stmt&, const Stmt::Assign& a, std::vector<StmtPtr>& out,
                bool) {
    ExprPtr value = clone(*a.value);
    if (needed_.count(a.lv.name)) {
      TypeKind elem = local_type_.at(a.lv.name);
      const std::string& t = restore_tape(a.lv.name);
      if (!wrap_read(value, a.lv.name, t, elem))
        out.push_back(dummy_push(t, elem, var(a.lv.name, elem)));
    }
    out.push_back(mk_assign(a.lv.name, std::move(value)));
  }

  void fwd_node(const Stmt& s, const Stmt::CompoundAssign& a,
                std::vector<StmtPtr>& out, bool) {
    if (!needed_.count(a.lv.name)) {
      out.push_back(clone(s));
      return;
    }
    // v op= e  becomes  v = push(t, v) op e, saving the overwritten value.
    TypeKind elem = local_type_.at(a.lv.name);
    const std::string& t = restore_tape(a.lv.name);
    ExprPtr rhs = binary(a.op, tape_push(t, elem, var(a.lv.name, elem)),
                         clone(*a.value));
    out.push_back(mk_assign(a.lv.name, std::move(rhs)));
  }

  void fwd_node(const Stmt& s, const Stmt::For& f, std::vector<StmtPtr>& out,
                bool top) {
    LoopMeta meta;
    meta.trip = tname();
    top_.push_back(mk_decl(meta.trip, TypeKind::Int, nullptr));
    out.push_back(mk_assign(meta.trip, lit_i(0)));

    std::vector<StmtPtr> body = fwd(f.body, false);
    if (needed_.count(f.counter)) {
      meta.ctr_tape = tname();
      top_.push_back(mk_decl(meta.ctr_tape, TypeKind::IntTape, nullptr));
      if (!wrap_read_in_stmts(body, f.counter, meta.ctr_tape, TypeKind::Int)) {
        body.insert(body.begin(),
                    dummy_push(meta.ctr_tape, TypeKind::Int,
                               var(f.counter, TypeKind::Int)));
      }
    }
    {
      auto inc = std::make_unique<Stmt>();
      inc->node = Stmt::CompoundAssign{
          BinOp::Add, LValue{meta.trip, -1, nullptr, {}}, lit_i(1)};
      body.insert(body.begin(), std::move(inc));
    }

    auto loop = std::make_unique<Stmt>();
    loop->node = Stmt::For{f.counter, -1, clone(*f.start), clone(*f.bound),
                           std::move(body)};
    out.push_back(std::move(loop));

    if (!top) {
      meta.cnt_tape = tname();
      top_.push_back(mk_decl(meta.cnt_tape, TypeKind::IntTape, nullptr));
      out.push_back(dummy_push(meta.cnt_tape, TypeKind::Int,
                               var(meta.trip, TypeKind::Int)));
    }
    loops_[&s] = std::move(meta);
  }

  void fwd_node(const Stmt& s, const Stmt::If& i, std::vector<StmtPtr>& out,
                bool) {
    std::string t = tname();
    top_.push_back(mk_decl(t, TypeKind::IntTape, nullptr));
    auto st = std::make_unique<Stmt>();
    st->node = Stmt::If{tape_push(t, TypeKind::Int, clone(*i.cond)),
                        fwd(i.then_body, false), fwd(i.else_body, false)};
    out.push_back(std::move(st));
    if_tapes_[&s] = std::move(t);
  }

  void fwd_node(const Stmt&, const Stmt::Return&, std::vector<StmtPtr>&,
                bool) {
    // The trailing return feeds the adjoint seed; nothing to execute here.
  }

  void fwd_node(const Stmt&, const Stmt::Block& b, std::vector<StmtPtr>& out,
                bool) {
    auto st = std::make_unique<Stmt>();
    st->node = Stmt::Block{fwd(b.body, false)};
    out.push_back(std::move(st));
  }

  // ---- reverse sweep ----------------------------------------------------

  std::vector<StmtPtr> rev_scope(const std::vector<StmtPtr>& body, bool top) {
    std::vector<StmtPtr> out;
    if (top) {
      for (const auto& p : f_.params)
        if (wrt_scalars_.count(p.name))
          out.push_back(mk_decl(adjoint(p.name), TypeKind::Double, lit_d(0.0)));
    }
    for (const auto& sp : body) {
      const auto* d = std::get_if<Stmt::Decl>(&sp->node);
      if (!d) continue;
      if (d->type == TypeKind::Double)
        out.push_back(mk_decl(adjoint(d->name), TypeKind::Double, lit_d(0.0)));
      if (auto it = decl_tapes_.find(sp.get()); it != decl_tapes_.end())
        out.push_back(mk_decl(d->name, d->type, tape_pop(it->second, d->type)));
    }
    if (top) {
      const auto& ret = std::get<Stmt::Return>(body.back()->node);
      adj(*ret.value, lit_d(1.0), out);
    }
    for (auto it = body.rbegin(); it != body.rend(); ++it) {
      const Stmt& s = **it;
      std::visit([&](const auto& n) { rev_node(s, n, out); }, s.node);
    }
    return out;
  }

  bool has_adjoints(const Expr& e) {
    std::vector<StmtPtr> tmp;
    adj(e, lit_d(1.0), tmp);
    return !tmp.empty();
  }

  void emit_restore(const std::string& name, std::vector<StmtPtr>& out) {
    if (auto it = restore_.find(name); it != restore_.end())
      out.push_back(
          mk_assign(name, tape_pop(it->second, local_type_.at(name))));
  }

  std::string capture(const std::string& of, std::vector<StmtPtr>& out) {
    std::string c = fresh("_r_d" + std::to_string(rdseq_++));
    out.push_back(mk_decl(c, TypeKind::Double, var(of)));
    return c;
  }

  void rev_node(const Stmt&, const Stmt::Decl& d, std::vector<StmtPtr>& out) {
    if (d.type != TypeKind::Double || !d.init) return;
    if (has_adjoints(*d.init)) adj(*d.init, var(adjoint(d.name)), out);
  }

  void rev_node(const Stmt&, const Stmt::Assign& a, std::vector<StmtPtr>& out) {
    const std::string& v = a.lv.name;
    emit_restore(v, out);
    if (local_type_.at(v) != TypeKind::Double) return;
    const std::string& dv = adjoint(v);
    if (has_adjoints(*a.value)) {
      std::string c = capture(dv, out);
      out.push_back(mk_assign(dv, lit_d(0.0)));
      adj(*a.value, var(c), out);
    } else {
      out.push_back(mk_assign(dv, lit_d(0.0)));
    }
  }

  void rev_node(const Stmt& s, const Stmt::CompoundAssign& a,
                std::vector<StmtPtr>& out) {
    const std::string& v = a.lv.name;
    emit_restore(v, out);
    if (local_type_.at(v) != TypeKind::Double) return;
    const std::string& dv = adjoint(v);
    switch (a.op) {
      case BinOp::Add:
        if (has_adjoints(*a.value)) adj(*a.value, var(capture(dv, out)), out);
        break;
      case BinOp::Sub:
        if (has_adjoints(*a.value))
          adj(*a.value, fneg(var(capture(dv, out))), out);
        break;
      case BinOp::Mul: {
        std::string c = capture(dv, out);
        out.push_back(mk_assign(dv, fmul(var(c), clone(*a.value))));
        adj(*a.value, fmul(var(v), var(c)), out);
        break;
      }
      case BinOp::Div: {
        std::string c = capture(dv, out);
        out.push_back(mk_assign(dv, fdiv(var(c), clone(*a.value))));
        adj(*a.value,
            fneg(fdiv(fmul(var(c), var(v)),
                      fmul(clone(*a.value), clone(*a.value)))),
            out);
        break;
      }
      default:
        unsupported("compound assignment", s.loc);
    }
  }

  void rev_node(const Stmt& s, const Stmt::For& f, std::vector<StmtPtr>& out) {
    const LoopMeta& meta = loops_.at(&s);
    ExprPtr bound;
    if (!meta.cnt_tape.empty()) {
      std::string n = fresh("_n" + std::to_string(nseq_++));
      out.push_back(mk_decl(n, TypeKind::Int,
                            tape_pop(meta.cnt_tape, TypeKind::Int)));
      bound = var(n, TypeKind::Int);
    } else {
      bound = var(meta.trip, TypeKind::Int);
    }
    std::vector<StmtPtr> body;
    if (!meta.ctr_tape.empty())
      body.push_back(mk_decl(f.counter, TypeKind::Int,
                             tape_pop(meta.ctr_tape, TypeKind::Int)));
    for (auto& st : rev_scope(f.body, false)) body.push_back(std::move(st));

    auto loop = std::make_unique<Stmt>();
    loop->node = Stmt::For{fresh("_r" + std::to_string(rseq_++)), -1, lit_i(0),
                           std::move(bound), std::move(body)};
    out.push_back(std::move(loop));
  }

  void rev_node(const Stmt& s, const Stmt::If& i, std::vector<StmtPtr>& out) {
    auto st = std::make_unique<Stmt>();
    st->node = Stmt::If{tape_pop(if_tapes_.at(&s), TypeKind::Int),
                        rev_scope(i.then_body, false),
                        rev_scope(i.else_body, false)};
    out.push_back(std::move(st));
  }

  void rev_node(const Stmt&, const Stmt::Return&, std::vector<StmtPtr>&) {
    // Seeded at the top of the reverse sweep.
  }

  void rev_node(const Stmt&, const Stmt::Block& b, std::vector<StmtPtr>& out) {
    auto st = std::make_unique<Stmt>();
    st->node = Stmt::Block{rev_scope(b.body, false)};
    out.push_back(std::move(st));
  }

  // ---- adjoint emission -------------------------------------------------
  // Accumulates partial * d(e)/d(input) into each differentiable input read
  // by e. `partial` is the adjoint of e itself.

  void adj(const Expr& e, ExprPtr partial, std::vector<StmtPtr>& out) {
    if (e.type == TypeKind::Int) return;
    std::visit([&](const auto& n) { adj_node(e, n, std::move(partial), out); },
               e.node);
  }

  void adj_node(const Expr&, const Expr::Literal&, ExprPtr,
                std::vector<StmtPtr>&) {}

  void adj_node(const Expr&, const Expr::VarRef& v, ExprPtr partial,
                std::vector<StmtPtr>& out) {
    if (const Param* p = find_param(v.name)) {
      if (p->type == TypeKind::Double && wrt_scalars_.count(v.name)) {
        auto st = std::make_unique<Stmt>();
        st->node = Stmt::CompoundAssign{
            BinOp::Add, LValue{adjoint(v.name), -1, nullptr, {}},
            std::move(partial)};
        out.push_back(std::move(st));
      }
      return;
    }
    auto it = local_type_.find(v.name);
    if (it != local_type_.end() && it->second == TypeKind::Double) {
      auto st = std::make_unique<Stmt>();
      st->node = Stmt::CompoundAssign{
          BinOp::Add, LValue{adjoint(v.name), -1, nullptr, {}},
          std::move(partial)};
      out.push_back(std::move(st));
    }
  }

  void adj_node(const Expr&, const Expr::Index& ix, ExprPtr partial,
                std::vector<StmtPtr>& out) {
    if (ix.array != wrt_array_) return;
    out.push_back(
        mk_accum(result_name_, clone(*ix.index), std::move(partial)));
  }

  void adj_node(const Expr&, const Expr::Unary& u, ExprPtr partial,
                std::vector<StmtPtr>& out) {
    if (u.op == UnOp::IntToDouble) return;
    adj(*u.operand, fneg(std::move(partial)), out);
  }

  void adj_node(const Expr& e, const Expr::Binary& b, ExprPtr partial,
                std::vector<StmtPtr>& out) {
    if (is_compare(b.op)) return;
    switch (b.op) {
      case BinOp::Add:
        adj(*b.lhs, clone(*partial), out);
        adj(*b.rhs, std::move(partial), out);
        return;
      case BinOp::Sub:
        adj(*b.lhs, clone(*partial), out);
        adj(*b.rhs, fneg(std::move(partial)), out);
        return;
      case BinOp::Mul:
        adj(*b.lhs, fmul(clone(*partial), clone(*b.rhs)), out);
        adj(*b.rhs, fmul(std::move(partial), clone(*b.lhs)), out);
        return;
      case BinOp::Div:
        adj(*b.lhs, fdiv(clone(*partial), clone(*b.rhs)), out);
        // d(a/b)/db = -a/b^2, grouped as -((p*a) / (b*b))
        adj(*b.rhs,
            fneg(fdiv(fmul(std::move(partial), clone(*b.lhs)),
                      fmul(clone(*b.rhs), clone(*b.rhs)))),
            out);
        return;
      default:
        unsupported("operator", e.loc);
    }
  }

  void adj_node(const Expr& e, const Expr::Call& c, ExprPtr partial,
                std::vector<StmtPtr>& out) {
    if (!c.intrinsic) unsupported("a call to a user-defined function", e.loc);
    switch (*c.intrinsic) {
      case Intrinsic::Sin:
        adj(*c.args[0],
            fmul(std::move(partial),
                 call(Intrinsic::Cos, vec(clone(*c.args[0])))),
            out);
        return;
      case Intrinsic::Cos:
        adj(*c.args[0],
            fneg(fmul(std::move(partial),
                      call(Intrinsic::Sin, vec(clone(*c.args[0]))))),
            out);
        return;
      case Intrinsic::Exp:
        adj(*c.args[0],
            fmul(std::move(partial),
                 call(Intrinsic::Exp, vec(clone(*c.args[0])))),
            out);
        return;
      case Intrinsic::Log:
        adj(*c.args[0], fdiv(std::move(partial), clone(*c.args[0])), out);
        return;
      case Intrinsic::Sqrt:
        adj(*c.args[0],
            fdiv(std::move(partial),
                 fmul(lit_d(2.0),
                      call(Intrinsic::Sqrt, vec(clone(*c.args[0]))))),
            out);
        return;
      case Intrinsic::Pow: {
        const Expr& base = *c.args[0];
        const Expr& expo = *c.args[1];
        if (const auto* l = std::get_if<Expr::Literal>(&expo.node);
            l && !l->is_int) {
          ExprPtr p = call(Intrinsic::Pow,
                           vec(clone(base), lit_d(l->dval - 1.0)));
          adj(base,
              fmul(std::move(partial), fmul(lit_d(l->dval), std::move(p))),
              out);
          return;
        }
        adj(base,
            fmul(clone(*partial),
                 fmul(clone(expo),
                      call(Intrinsic::Pow,
                           vec(clone(base),
                               fsub(clone(expo), lit_d(1.0)))))),
            out);
        adj(expo,
            fmul(std::move(partial),
                 fmul(call(Intrinsic::Pow, vec(clone(base), clone(expo))),
                      call(Intrinsic::Log, vec(clone(base))))),
            out);
        return;
      }
      case Intrinsic::Push:
      case Intrinsic::Pop:
        unsupported("a tape operation", e.loc);
    }
  }
};

}  // namespace

GradFunc gradient(const FuncDef& func, const GradRequest& req) {
  if (func.num_slots < 0)
    throw DlError(DiagKind::UnsupportedConstruct,
                  "function must be resolved before differentiation",
                  func.loc);
  GradFunc out;
  out.original = clone(func);
  out.gradient = ReverseDiff(func, req).run();
  out.mode = Mode::Reverse;
  return out;
}

std::string gradient_source(std::string_view source, const std::string& fname,
                            const std::vector<std::string>& wrt) {
  Program p = parse(source);
  const FuncDef* f = p.find(fname);
  if (!f)
    throw DlError(DiagKind::UnknownFunction,
                  "no function named '" + fname + "'");
  GradFunc g = gradient(*f, GradRequest{wrt});
  return print(g.gradient);
}

}  // namespace difflang
