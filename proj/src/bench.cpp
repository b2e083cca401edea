#include "difflang/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

#include <json.hpp>

#include "difflang/forward.hpp"
#include "difflang/numdiff.hpp"
#include "difflang/printer.hpp"
#include "difflang/reverse.hpp"

namespace difflang {

namespace {

std::string host_environment() {
  std::ostringstream os;
  os << "cxx " << __VERSION__ << ", "
#if defined(__linux__)
     << "linux"
#elif defined(__APPLE__)
     << "macos"
#else
     << "unknown-os"
#endif
#if defined(__x86_64__)
     << " x86_64";
#elif defined(__aarch64__)
     << " aarch64";
#else
     << " unknown-arch";
#endif
  return os.str();
}

double fmt_median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v[v.size() / 2];
}

struct BackendRun {
  // One whole-gradient evaluation; returns the gradient values.
  std::vector<double> grad;
  EvalStats stats;
};

class ModelBench {
 public:
  ModelBench(const ModelEntry& m, long long dim, const std::string& backend)
      : m_(m), dim_(dim), backend_(backend) {
    prog_ = parse_model(m);
    const FuncDef* f = prog_.find(m.name);
    n_ = wrt_dim(m, dim);
    if (backend == "rev-ad") {
      GradFunc g = gradient(*f, GradRequest{m.wrt});
      grad_name_ = g.gradient.name;
      prog_.functions.push_back(std::move(g.gradient));
    } else if (backend == "fwd-ad") {
      // Build every derivative before appending any: push_back can
      // reallocate prog_.functions and invalidate f.
      std::vector<FuncDef> derivs;
      for (long long k = 0; k < n_; ++k) {
        DiffRequest r;
        if (m.dim_scalable) {
          r.wrt = m.wrt[0];
          r.wrt_index = k;
        } else {
          r.wrt = m.wrt[std::size_t(k)];
        }
        DerivedFunc d = differentiate(*f, r);
        fwd_names_.push_back(d.derivative.name);
        derivs.push_back(std::move(d.derivative));
      }
      for (FuncDef& d : derivs) prog_.functions.push_back(std::move(d));
    } else if (backend != "nd") {
      throw DlError(DiagKind::TypeMismatch,
                    "unknown backend '" + backend + "'");
    }
    args_ = model_args(m, dim);
    slots_ = wrt_slots(m, dim);
  }

  BackendRun run() {
    Interpreter interp(prog_);
    BackendRun out;
    interp.set_stats(&out.stats);
    if (backend_ == "rev-ad") {
      Value res = make_array(std::vector<double>(std::size_t(n_), 0.0));
      std::vector<Value> a = args_;
      a.push_back(res);
      interp.call(grad_name_, std::move(a));
      out.grad = *res.as_array();
    } else if (backend_ == "fwd-ad") {
      for (const std::string& fn : fwd_names_)
        out.grad.push_back(interp.call(fn, args_).as_double());
    } else {
      out.grad = fd_gradient(interp, m_.name, args_, slots_);
    }
    return out;
  }

  const std::vector<Value>& args() const { return args_; }
  long long n() const { return n_; }

 private:
  const ModelEntry& m_;
  long long dim_;
  std::string backend_;
  Program prog_;
  long long n_ = 0;
  std::string grad_name_;
  std::vector<std::string> fwd_names_;
  std::vector<Value> args_;
  std::vector<ArgSlot> slots_;
};

BenchRow bench_one(const ModelEntry& m, long long dim,
                   const std::string& backend, int reps, bool timing) {
  ModelBench mb(m, dim, backend);

  BenchRow row;
  row.model = m.name;
  row.dim = wrt_dim(m, dim);
  row.backend = backend;

  BackendRun first = mb.run();
  row.scalar_ops = first.stats.scalar_ops;
  row.func_evals = first.stats.func_evals;

  std::vector<double> ref = reference_gradient(m, mb.args());
  double err = 0.0, scale = 1.0;
  for (std::size_t k = 0; k < ref.size(); ++k) {
    err = std::max(err, std::fabs(first.grad[k] - ref[k]));
    scale = std::max(scale, std::fabs(ref[k]));
  }
  row.max_abs_err = err;
  double tol = (backend == "nd" ? 1e-4 : 1e-9) * scale;
  row.validated = err <= tol;

  if (timing && row.validated) {
    std::vector<double> times;
    for (int r = 0; r < reps; ++r) {
      auto t0 = std::chrono::steady_clock::now();
      mb.run();
      auto t1 = std::chrono::steady_clock::now();
      times.push_back(double(
          std::chrono::duration_cast<std::chrono::nanoseconds>(t1 - t0)
              .count()));
    }
    row.median_ns = fmt_median(std::move(times));
  }
  return row;
}

}  // namespace

BenchReport run_scaling(const ModelEntry& m, const std::vector<long long>& dims,
                        const std::vector<std::string>& backends, int reps,
                        bool timing) {
  if (timing && reps < 5)
    throw DlError(DiagKind::TypeMismatch,
                  "timed runs need at least 5 repetitions");
  BenchReport rep;
  rep.environment = host_environment();
  rep.repetitions = timing ? reps : 1;
  rep.timing = timing;
  for (long long dim : dims)
    for (const std::string& b : backends)
      rep.rows.push_back(bench_one(m, dim, b, reps, timing));
  std::stable_sort(rep.rows.begin(), rep.rows.end(),
                   [](const BenchRow& a, const BenchRow& b) {
                     return std::tie(a.model, a.dim, a.backend) <
                            std::tie(b.model, b.dim, b.backend);
                   });
  return rep;
}

BenchReport run_accuracy(const ModelEntry& m, bool timing) {
  long long dim = m.dim_scalable ? 5 : 0;
  return run_scaling(m, {dim}, {"fwd-ad", "nd", "rev-ad"}, 5, timing);
}

std::vector<double> speedups(const BenchReport& r, const std::string& model) {
  std::vector<double> out;
  for (const BenchRow& nd : r.rows) {
    if (nd.model != model || nd.backend != "nd") continue;
    for (const BenchRow& ad : r.rows) {
      if (ad.model == model && ad.backend == "rev-ad" && ad.dim == nd.dim &&
          ad.median_ns > 0.0) {
        out.push_back(nd.median_ns / ad.median_ns);
        break;
      }
    }
  }
  return out;
}

std::string BenchReport::to_json() const {
  nlohmann::json j;
  j["environment"] = environment;
  j["repetitions"] = repetitions;
  j["timing"] = timing;
  j["rows"] = nlohmann::json::array();
  for (const BenchRow& r : rows) {
    j["rows"].push_back({{"model", r.model},
                         {"dim", r.dim},
                         {"backend", r.backend},
                         {"median_ns", r.median_ns},
                         {"scalar_ops", r.scalar_ops},
                         {"func_evals", r.func_evals},
                         {"max_abs_err", r.max_abs_err},
                         {"validated", r.validated}});
  }
  return j.dump(2) + "\n";
}

std::string BenchReport::to_csv() const {
  std::ostringstream os;
  os.precision(17);
  os << "model,dim,backend,median_ns,scalar_ops,func_evals,max_abs_err,"
        "validated\n";
  for (const BenchRow& r : rows)
    os << r.model << "," << r.dim << "," << r.backend << "," << r.median_ns
       << "," << r.scalar_ops << "," << r.func_evals << "," << r.max_abs_err
       << "," << (r.validated ? 1 : 0) << "\n";
  return os.str();
}

}  // namespace difflang
