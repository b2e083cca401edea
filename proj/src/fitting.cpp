#include "difflang/fitting.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <unordered_map>

#include "difflang/diagnostics.hpp"
#include "difflang/numdiff.hpp"
#include "difflang/reverse.hpp"
#include "difflang/sema.hpp"

namespace difflang {

double Histogram::total() const {
  double t = 0.0;
  for (double c : counts) t += c;
  return t;
}

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double uniform01(std::uint64_t& state) {
  // 53 top bits -> [0, 1)
  return double(splitmix64(state) >> 11) * 0x1.0p-53;
}

}  // namespace

Histogram synthesize_histogram(std::uint64_t nsamples, std::size_t bins,
                               double lo, double hi, double mu, double sigma,
                               std::uint64_t seed) {
  if (bins < 1 || !(hi > lo))
    throw DlError(DiagKind::TypeMismatch, "bad histogram shape");
  Histogram h;
  h.edges.resize(bins + 1);
  for (std::size_t b = 0; b <= bins; ++b)
    h.edges[b] = lo + (hi - lo) * double(b) / double(bins);
  h.counts.assign(bins, 0.0);

  std::uint64_t state = seed;
  const double two_pi = 2.0 * std::numbers::pi;
  double spare = 0.0;
  bool have_spare = false;
  auto next_normal = [&]() {
    if (have_spare) {
      have_spare = false;
      return spare;
    }
    double u1 = 1.0 - uniform01(state);  // (0, 1], keeps log() finite
    double u2 = uniform01(state);
    double r = std::sqrt(-2.0 * std::log(u1));
    spare = r * std::sin(two_pi * u2);
    have_spare = true;
    return r * std::cos(two_pi * u2);
  };

  const double scale = double(bins) / (hi - lo);
  for (std::uint64_t i = 0; i < nsamples; ++i) {
    double x = mu + sigma * next_normal();
    if (x < lo || x >= hi) continue;
    auto b = std::size_t((x - lo) * scale);
    if (b >= bins) b = bins - 1;
    h.counts[b] += 1.0;
  }
  return h;
}

std::string histogram_to_csv(const Histogram& h) {
  std::ostringstream os;
  os.precision(17);
  os << "lo,hi,count\n";
  for (std::size_t b = 0; b < h.bins(); ++b)
    os << h.edges[b] << "," << h.edges[b + 1] << "," << h.counts[b] << "\n";
  return os.str();
}

Histogram histogram_from_csv(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line) || line != "lo,hi,count")
    throw DlError(DiagKind::SyntaxError,
                  "histogram CSV must start with header 'lo,hi,count'");
  Histogram h;
  std::size_t row = 1;
  while (std::getline(is, line)) {
    row++;
    if (line.empty()) continue;
    std::istringstream ls(line);
    double lo, hi, count;
    char c1, c2;
    if (!(ls >> lo >> c1 >> hi >> c2 >> count) || c1 != ',' || c2 != ',')
      throw DlError(DiagKind::SyntaxError,
                    "bad histogram CSV row " + std::to_string(row));
    if (!(hi > lo) || count < 0.0)
      throw DlError(DiagKind::SyntaxError,
                    "bad bin in histogram CSV row " + std::to_string(row));
    if (h.edges.empty()) {
      h.edges.push_back(lo);
    } else if (h.edges.back() != lo) {
      throw DlError(DiagKind::SyntaxError,
                    "non-contiguous bins at histogram CSV row " +
                        std::to_string(row));
    }
    h.edges.push_back(hi);
    h.counts.push_back(count);
  }
  if (h.counts.empty())
    throw DlError(DiagKind::SyntaxError, "histogram CSV has no bins");
  return h;
}

namespace {

// Inlines a scalar model into the per-bin objective body. Model locals get a
// _m_ prefix so they cannot collide with the objective's own names.
class Inliner {
 public:
  Inliner(const FuncDef& model, const std::string& x_param,
          const std::vector<std::string>& fit_params)
      : model_(model) {
    bool saw_x = false;
    for (const Param& p : model.params) {
      if (p.name == x_param) {
        if (p.type != TypeKind::Double)
          throw DlError(DiagKind::TypeMismatch,
                        "observable '" + x_param + "' must be a double",
                        p.loc);
        saw_x = true;
        x_ = p.name;
        continue;
      }
      long long k = -1;
      for (std::size_t j = 0; j < fit_params.size(); ++j)
        if (fit_params[j] == p.name) k = (long long)j;
      if (k < 0)
        throw DlError(DiagKind::UnknownParameter,
                      "model parameter '" + p.name +
                          "' is neither the observable nor a fit parameter",
                      p.loc);
      if (p.type != TypeKind::Double)
        throw DlError(DiagKind::TypeMismatch,
                      "fit parameter '" + p.name + "' must be a double",
                      p.loc);
      slot_[p.name] = k;
    }
    if (!saw_x)
      throw DlError(DiagKind::UnknownParameter,
                    "model has no parameter '" + x_param + "'", model.loc);
    if (slot_.size() != fit_params.size())
      throw DlError(DiagKind::UnknownParameter,
                    "fit parameter list does not match the model signature",
                    model.loc);
  }

  // Statements computing the bin residual and accumulating its square.
  std::vector<StmtPtr> body() { return stmts(model_.body, true); }

 private:
  const FuncDef& model_;
  std::string x_;
  std::unordered_map<std::string, long long> slot_;

  static ExprPtr idx(const char* arr, ExprPtr i) {
    return index(arr, std::move(i));
  }

  std::string rename(const std::string& n) const { return "_m_" + n; }

  ExprPtr subst(const Expr& e) {
    ExprPtr out = clone(e);
    rewrite(*out);
    return out;
  }

  void rewrite(Expr& e) {
    std::visit(
        [&](auto& n) {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, Expr::VarRef>) {
            if (n.name == x_) {
              e.node = Expr::Index{"cx", -1, var("_b", TypeKind::Int)};
            } else if (auto it = slot_.find(n.name); it != slot_.end()) {
              e.node = Expr::Index{"th", -1, lit_i(it->second)};
            } else {
              n.name = rename(n.name);
            }
          } else if constexpr (std::is_same_v<T, Expr::Index>) {
            throw DlError(DiagKind::UnsupportedConstruct,
                          "array-valued models cannot be fitted", e.loc);
          } else if constexpr (std::is_same_v<T, Expr::Unary>) {
            rewrite(*n.operand);
          } else if constexpr (std::is_same_v<T, Expr::Binary>) {
            rewrite(*n.lhs);
            rewrite(*n.rhs);
          } else if constexpr (std::is_same_v<T, Expr::Call>) {
            if (!n.intrinsic)
              throw DlError(DiagKind::UnsupportedConstruct,
                            "models calling user functions cannot be fitted",
                            e.loc);
            for (auto& a : n.args) rewrite(*a);
          }
        },
        e.node);
  }

  std::vector<StmtPtr> stmts(const std::vector<StmtPtr>& in, bool top) {
    std::vector<StmtPtr> out;
    for (const auto& sp : in) {
      const Stmt& s = *sp;
      std::visit(
          [&](const auto& n) {
            using T = std::decay_t<decltype(n)>;
            auto st = std::make_unique<Stmt>();
            if constexpr (std::is_same_v<T, Stmt::Decl>) {
              st->node = Stmt::Decl{rename(n.name), n.type,
                                    n.init ? subst(*n.init) : nullptr, -1};
              out.push_back(std::move(st));
            } else if constexpr (std::is_same_v<T, Stmt::Assign>) {
              if (n.lv.index)
                throw DlError(DiagKind::UnsupportedConstruct,
                              "array stores cannot be fitted", s.loc);
              st->node = Stmt::Assign{LValue{rename(n.lv.name), -1, nullptr,
                                             {}},
                                      subst(*n.value)};
              out.push_back(std::move(st));
            } else if constexpr (std::is_same_v<T, Stmt::CompoundAssign>) {
              if (n.lv.index)
                throw DlError(DiagKind::UnsupportedConstruct,
                              "array stores cannot be fitted", s.loc);
              st->node = Stmt::CompoundAssign{
                  n.op, LValue{rename(n.lv.name), -1, nullptr, {}},
                  subst(*n.value)};
              out.push_back(std::move(st));
            } else if constexpr (std::is_same_v<T, Stmt::For>) {
              st->node = Stmt::For{rename(n.counter), -1, subst(*n.start),
                                   subst(*n.bound), stmts(n.body, false)};
              out.push_back(std::move(st));
            } else if constexpr (std::is_same_v<T, Stmt::If>) {
              st->node = Stmt::If{subst(*n.cond), stmts(n.then_body, false),
                                  stmts(n.else_body, false)};
              out.push_back(std::move(st));
            } else if constexpr (std::is_same_v<T, Stmt::Block>) {
              st->node = Stmt::Block{stmts(n.body, false)};
              out.push_back(std::move(st));
            } else if constexpr (std::is_same_v<T, Stmt::Return>) {
              if (!top)
                throw DlError(DiagKind::UnsupportedConstruct,
                              "models with early returns cannot be fitted",
                              s.loc);
              auto resid = std::make_unique<Stmt>();
              resid->node = Stmt::Decl{
                  "_r", TypeKind::Double,
                  binary(BinOp::Sub, subst(*n.value),
                         idx("y", var("_b", TypeKind::Int))),
                  -1};
              out.push_back(std::move(resid));
              auto acc = std::make_unique<Stmt>();
              acc->node = Stmt::CompoundAssign{
                  BinOp::Add, LValue{"_acc", -1, nullptr, {}},
                  binary(BinOp::Mul, var("_r"), var("_r"))};
              out.push_back(std::move(acc));
            }
          },
          s.node);
    }
    return out;
  }
};

}  // namespace

FuncDef build_objective(const FuncDef& model, const std::string& x_param,
                        const std::vector<std::string>& fit_params) {
  Inliner inl(model, x_param, fit_params);

  FuncDef obj;
  obj.name = "obj";
  obj.params = {Param{"th", TypeKind::DoubleArray, {}, -1, {}},
                Param{"cx", TypeKind::DoubleArray, {}, -1, {}},
                Param{"y", TypeKind::DoubleArray, {}, -1, {}},
                Param{"nbins", TypeKind::Int, {}, -1, {}}};

  auto acc = std::make_unique<Stmt>();
  acc->node = Stmt::Decl{"_acc", TypeKind::Double, lit_d(0.0), -1};
  obj.body.push_back(std::move(acc));

  auto loop = std::make_unique<Stmt>();
  loop->node = Stmt::For{"_b", -1, lit_i(0), var("nbins", TypeKind::Int),
                         inl.body()};
  obj.body.push_back(std::move(loop));

  auto ret = std::make_unique<Stmt>();
  ret->node = Stmt::Return{var("_acc")};
  obj.body.push_back(std::move(ret));

  resolve_function(obj, nullptr);
  return obj;
}

FitResult fit(const FuncDef& model, const std::string& x_param,
              const std::vector<std::string>& fit_params,
              const Histogram& hist, std::vector<double> init,
              const FitOptions& opts) {
  if (init.size() != fit_params.size())
    throw DlError(DiagKind::ArityMismatch,
                  "initial point has " + std::to_string(init.size()) +
                      " entries for " + std::to_string(fit_params.size()) +
                      " fit parameters");
  const std::size_t p = fit_params.size();
  const std::size_t B = hist.bins();

  Program prog;
  prog.functions.push_back(build_objective(model, x_param, fit_params));
  GradFunc g = gradient(prog.functions[0], GradRequest{{"th"}});
  prog.functions.push_back(std::move(g.gradient));
  const std::string grad_name = prog.functions[1].name;
  Interpreter interp(prog);

  std::vector<double> cx(B), y(B);
  const double total = hist.total();
  for (std::size_t b = 0; b < B; ++b) {
    cx[b] = hist.center(b);
    y[b] = total > 0.0 ? hist.counts[b] / (total * hist.width(b)) : 0.0;
  }

  Value th = make_array(init);
  Value cxv = make_array(std::move(cx));
  Value yv = make_array(std::move(y));
  std::vector<Value> args = {th, cxv, yv, Value((long long)B)};

  FitResult res;
  res.params = init;

  auto objective = [&](void) -> double {
    res.objective_evals++;
    try {
      return interp.call("obj", args).as_double();
    } catch (const DlError& e) {
      if (e.kind() == DiagKind::DomainError)
        return std::numeric_limits<double>::infinity();
      throw;
    }
  };

  std::vector<ArgSlot> nd_slots;
  for (std::size_t k = 0; k < p; ++k)
    nd_slots.push_back({0, (long long)k});
  Value gres = make_array(std::vector<double>(p, 0.0));
  std::vector<Value> gargs = args;
  gargs.push_back(gres);

  auto grad_at = [&](void) -> std::vector<double> {
    res.grad_evals++;
    if (opts.backend == GradBackend::AD) {
      auto& out = *gres.as_array();
      std::fill(out.begin(), out.end(), 0.0);
      interp.call(grad_name, gargs);
      res.gradient_func_evals += 1;
      return out;
    }
    NdOptions nd;
    nd.eps = opts.nd_eps;
    auto out = fd_gradient(interp, "obj", args, nd_slots, nd);
    res.gradient_func_evals += 2 * p;
    return out;
  };

  std::vector<double>& theta = *th.as_array();
  double f = objective();

  for (int iter = 0; iter < opts.max_iter; ++iter) {
    std::vector<double> gv = grad_at();
    res.iterations++;

    double sup = 0.0, gg = 0.0;
    for (double v : gv) {
      sup = std::max(sup, std::fabs(v));
      gg += v * v;
    }
    if (sup <= opts.gtol) {
      res.converged = true;
      break;
    }

    std::vector<double> saved(theta);
    double t = opts.step0;
    bool accepted = false;
    for (int bt = 0; bt < opts.max_backtracks; ++bt) {
      for (std::size_t k = 0; k < p; ++k) theta[k] = saved[k] - t * gv[k];
      double ft = objective();
      if (ft <= f - opts.armijo_c * t * gg) {
        f = ft;
        accepted = true;
        break;
      }
      t *= opts.shrink;
    }
    if (!accepted) {
      // no descent step found at the smallest trial step; report best-so-far
      for (std::size_t k = 0; k < p; ++k) theta[k] = saved[k];
      break;
    }
  }

  res.params = theta;
  res.objective = f;
  return res;
}

}  // namespace difflang
