// difflang command line tool.
//
// Exit codes: 0 success, 1 domain or validation error, 2 usage error.

#include <cinttypes>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include <CLI11.hpp>

#include "difflang/bench.hpp"
#include "difflang/diagnostics.hpp"
#include "difflang/fitting.hpp"
#include "difflang/forward.hpp"
#include "difflang/interp.hpp"
#include "difflang/models.hpp"
#include "difflang/numdiff.hpp"
#include "difflang/parser.hpp"
#include "difflang/point.hpp"
#include "difflang/printer.hpp"
#include "difflang/reverse.hpp"
#include "difflang/sema.hpp"

namespace {

using namespace difflang;

bool use_color() {
  if (const char* e = std::getenv("DIFFLANG_COLOR")) {
    return std::strcmp(e, "0") != 0;
  }
  return isatty(fileno(stderr));
}

void print_error(const std::string& msg) {
  if (use_color())
    std::cerr << "\x1b[1;31merror:\x1b[0m " << msg << "\n";
  else
    std::cerr << "error: " << msg << "\n";
}

// Shortest decimal form that parses back to the same double.
std::string fmt_double(double v) {
  char buf[40];
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) return buf;
  }
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt_vector(const std::vector<double>& v) {
  std::string out = "[";
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ", ";
    out += fmt_double(v[i]);
  }
  return out + "]";
}

std::string read_source(const std::string& path) {
  if (path == "-") {
    std::ostringstream os;
    os << std::cin.rdbuf();
    return os.str();
  }
  std::ifstream in(path);
  if (!in)
    throw DlError(DiagKind::SyntaxError, "cannot open '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

const FuncDef& find_function(const Program& prog, const std::string& name) {
  const FuncDef* f = prog.find(name);
  if (!f)
    throw DlError(DiagKind::UnknownFunction,
                  "no function named '" + name + "'");
  return *f;
}

// Deterministic generator for `check`, identical across platforms.
struct SplitMix64 {
  std::uint64_t s;
  std::uint64_t next() {
    std::uint64_t z = (s += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  // in [0.5, 1.5): keeps log/sqrt/pow arguments and sigma-like
  // parameters away from their singularities
  double sample() { return 0.5 + (next() >> 11) * 0x1.0p-53; }
};

struct CheckCmd {
  std::string file, fn;
  std::vector<std::string> wrt;
  long long dim = 5;
  int points = 100;
  std::uint64_t seed = 1;
  double eps = 1e-8;
  double tol = 1e-5;
};

int run_check(const CheckCmd& c) {
  Program prog = parse(read_source(c.file));
  const FuncDef& f = find_function(prog, c.fn);

  GradFunc g = gradient(f, GradRequest{c.wrt});
  std::string grad_name = g.gradient.name;
  // Copied out: push_back below may reallocate prog.functions and
  // invalidate f.
  std::vector<Param> params = f.params;
  prog.functions.push_back(std::move(g.gradient));
  Interpreter interp(prog);

  // Gradient slots mirror the wrt request: every element of the one array
  // parameter, or the named scalars in declaration order.
  std::vector<ArgSlot> slots;
  long long n = 0;
  bool array_mode = false;
  std::size_t array_arg = 0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const Param& p = params[i];
    bool requested = false;
    for (const std::string& w : c.wrt) requested = requested || w == p.name;
    if (!requested) continue;
    if (p.type == TypeKind::DoubleArray) {
      array_mode = true;
      array_arg = i;
    } else {
      slots.push_back({i, -1});
      n++;
    }
  }
  if (array_mode) {
    n = c.dim;
    slots.clear();
    for (long long k = 0; k < n; ++k) slots.push_back({array_arg, k});
  }

  SplitMix64 rng{c.seed};
  double worst = 0.0;
  for (int pt = 0; pt < c.points; ++pt) {
    std::vector<Value> args;
    for (const Param& p : params) {
      switch (p.type) {
        case TypeKind::Double:
          args.push_back(Value(rng.sample()));
          break;
        case TypeKind::Int:
          args.push_back(Value(c.dim));
          break;
        case TypeKind::DoubleArray: {
          std::vector<double> a(std::size_t(c.dim));
          for (double& x : a) x = rng.sample();
          args.push_back(make_array(a));
          break;
        }
        default:
          throw DlError(DiagKind::UnsupportedConstruct,
                        "cannot generate a random '" + p.name + "'");
      }
    }

    Value res = make_array(std::vector<double>(std::size_t(n), 0.0));
    std::vector<Value> ga = args;
    ga.push_back(res);
    interp.call(grad_name, std::move(ga));
    const std::vector<double>& ad = *res.as_array();

    std::vector<double> fd =
        fd_gradient(interp, c.fn, args, slots, NdOptions{c.eps});
    for (long long k = 0; k < n; ++k) {
      double scale = std::max(1.0, std::fabs(ad[std::size_t(k)]));
      worst = std::max(worst,
                       std::fabs(ad[std::size_t(k)] - fd[std::size_t(k)]) /
                           scale);
    }
  }

  bool ok = worst <= c.tol;
  std::cout << "check " << c.fn << ": " << c.points
            << " points, max ad-vs-fd relative error " << fmt_double(worst)
            << " (tol " << fmt_double(c.tol) << "): " << (ok ? "OK" : "FAIL")
            << "\n";
  return ok ? 0 : 1;
}

struct BenchCmd {
  std::string model;
  std::vector<long long> dims{5, 64, 512};
  std::vector<std::string> backends{"rev-ad", "nd"};
  int reps = 5;
  bool no_timing = false;
  bool accuracy = false;
  std::string format = "csv";
  std::string out;
};

int run_bench(const BenchCmd& c) {
  const ModelEntry& m = get_model(c.model);
  BenchReport rep = c.accuracy
                        ? run_accuracy(m, !c.no_timing)
                        : run_scaling(m, c.dims, c.backends, c.reps,
                                      !c.no_timing);
  std::string text;
  if (c.format == "json") {
    text = rep.to_json();
  } else if (c.format == "csv") {
    text = rep.to_csv();
  } else {
    std::ostringstream os;
    os << "# " << rep.environment << ", " << rep.repetitions
       << " repetitions\n";
    for (const BenchRow& r : rep.rows) {
      os << r.model << " dim=" << r.dim << " " << r.backend
         << ": median " << fmt_double(r.median_ns / 1e6) << " ms, "
         << r.scalar_ops << " ops, " << r.func_evals << " evals, err "
         << fmt_double(r.max_abs_err)
         << (r.validated ? "" : "  [VALIDATION FAILED]") << "\n";
    }
    text = os.str();
  }
  if (!c.out.empty()) {
    std::ofstream f(c.out);
    if (!f) throw DlError(DiagKind::SyntaxError, "cannot write '" + c.out + "'");
    f << text;
  } else {
    std::cout << text;
  }
  for (const BenchRow& r : rep.rows)
    if (!r.validated) {
      print_error("one or more rows failed validation");
      return 1;
    }
  return 0;
}

struct FitCmd {
  std::string model;
  std::string hist;
  std::vector<double> init;
  std::string backend = "ad";
  int max_iter = 10000;
  double gtol = 1e-8;
  double eps = 1e-8;
};

int run_fit(const FitCmd& c) {
  const ModelEntry& m = get_model(c.model);
  if (m.dim_scalable)
    throw DlError(DiagKind::UnknownModel,
                  "'" + m.name + "' is not a fittable density model");
  Program prog = parse_model(m);
  const FuncDef& f = find_function(prog, m.name);

  // The observable is the one double parameter not being fitted.
  std::string x_param;
  for (const Param& p : f.params) {
    bool fitted = false;
    for (const std::string& w : m.wrt) fitted = fitted || w == p.name;
    if (!fitted && p.type == TypeKind::Double) {
      x_param = p.name;
      break;
    }
  }
  if (x_param.empty())
    throw DlError(DiagKind::UnknownParameter,
                  "'" + m.name + "' has no observable parameter");

  Histogram h = histogram_from_csv(read_source(c.hist));
  if (c.init.size() != m.wrt.size())
    throw DlError(DiagKind::ArityMismatch,
                  "--init needs " + std::to_string(m.wrt.size()) +
                      " values for '" + m.name + "'");

  FitOptions opts;
  opts.backend = c.backend == "ad" ? GradBackend::AD : GradBackend::ND;
  opts.max_iter = c.max_iter;
  opts.gtol = c.gtol;
  opts.nd_eps = c.eps;
  FitResult r = fit(f, x_param, m.wrt, h, c.init, opts);

  for (std::size_t k = 0; k < r.params.size(); ++k)
    std::cout << m.wrt[k] << " = " << fmt_double(r.params[k]) << "\n";
  std::cout << "objective = " << fmt_double(r.objective) << "\n"
            << "iterations = " << r.iterations << "\n"
            << "converged = " << (r.converged ? "yes" : "no") << "\n"
            << "grad_evals = " << r.grad_evals << "\n"
            << "gradient_func_evals = " << r.gradient_func_evals << "\n"
            << "objective_evals = " << r.objective_evals << "\n";
  if (!r.converged) {
    print_error("fit did not converge; best parameters shown");
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"source-transformation automatic differentiation for a small "
               "numerical DSL"};
  app.require_subcommand(1);

  // differentiate
  std::string d_file, d_fn, d_wrt;
  long long d_index = -1;
  auto* diff = app.add_subcommand(
      "differentiate", "print the forward-mode derivative of a function");
  diff->add_option("-f,--file", d_file, "DSL source file ('-' for stdin)")
      ->required();
  diff->add_option("--fn", d_fn, "function name")->required();
  diff->add_option("--wrt", d_wrt, "parameter to differentiate by")
      ->required();
  diff->add_option("--wrt-index", d_index,
                   "array slot when --wrt names a double* parameter");

  // grad
  std::string g_file, g_fn, g_backend = "ad", g_at;
  std::vector<std::string> g_wrt;
  double g_eps = 1e-8;
  auto* grad = app.add_subcommand(
      "grad", "print or evaluate the gradient of a function");
  grad->add_option("-f,--file", g_file, "DSL source file ('-' for stdin)")
      ->required();
  grad->add_option("--fn", g_fn, "function name")->required();
  grad->add_option("--wrt", g_wrt,
                   "gradient parameters (one double* or repeated scalars)")
      ->required();
  grad->add_option("--backend", g_backend, "ad (reverse mode) or fd")
      ->check(CLI::IsMember({"ad", "fd"}));
  grad->add_option("--at", g_at,
                   "evaluation point, e.g. \"p=[1,2,3],dim=3\"");
  grad->add_option("--eps", g_eps, "central difference step for fd");

  // eval
  std::string e_file, e_fn, e_at;
  auto* eval = app.add_subcommand("eval", "evaluate a function at a point");
  eval->add_option("-f,--file", e_file, "DSL source file ('-' for stdin)")
      ->required();
  eval->add_option("--fn", e_fn, "function name")->required();
  eval->add_option("--at", e_at, "evaluation point");

  // check
  CheckCmd chk;
  auto* check = app.add_subcommand(
      "check", "compare the AD gradient against finite differences at "
               "random points");
  check->add_option("-f,--file", chk.file, "DSL source file ('-' for stdin)")
      ->required();
  check->add_option("--fn", chk.fn, "function name")->required();
  check->add_option("--wrt", chk.wrt, "gradient parameters")->required();
  check->add_option("--dim", chk.dim, "array length for double* parameters");
  check->add_option("--points", chk.points, "number of random points");
  check->add_option("--seed", chk.seed, "random seed");
  check->add_option("--eps", chk.eps, "central difference step");
  check->add_option("--tol", chk.tol, "relative tolerance");

  // bench
  BenchCmd bch;
  auto* bench = app.add_subcommand(
      "bench", "time and validate gradient backends on a corpus model");
  bench->add_option("--model", bch.model, "corpus model name")->required();
  bench->add_option("--dims", bch.dims, "array dimensions")
      ->delimiter(',');
  bench->add_option("--backends", bch.backends,
                    "subset of rev-ad, fwd-ad, nd")
      ->delimiter(',');
  bench->add_option("--reps", bch.reps, "timing repetitions (min 5)");
  bench->add_flag("--no-timing", bch.no_timing,
                  "skip timing; output is byte-stable");
  bench->add_flag("--accuracy", bch.accuracy,
                  "accuracy table at the canonical point instead of scaling");
  bench->add_option("--format", bch.format, "text, json or csv")
      ->check(CLI::IsMember({"text", "json", "csv"}));
  bench->add_option("-o,--output", bch.out, "write the report to a file");

  // fit
  FitCmd fc;
  auto* fitc = app.add_subcommand(
      "fit", "fit a corpus density model to a histogram");
  fitc->add_option("--model", fc.model, "corpus model name")->required();
  fitc->add_option("--hist", fc.hist, "histogram CSV (lo,hi,count)")
      ->required();
  fitc->add_option("--init", fc.init, "initial parameter values")
      ->delimiter(',')
      ->required();
  fitc->add_option("--backend", fc.backend, "ad or nd")
      ->check(CLI::IsMember({"ad", "nd"}));
  fitc->add_option("--max-iter", fc.max_iter, "iteration cap");
  fitc->add_option("--gtol", fc.gtol, "gradient sup-norm tolerance");
  fitc->add_option("--eps", fc.eps, "central difference step for nd");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    std::cout << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp& e) {
    std::cout << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    print_error(e.what());
    std::cerr << app.help();
    return 2;
  }

  try {
    if (diff->parsed()) {
      DiffRequest req;
      req.wrt = d_wrt;
      if (d_index >= 0) req.wrt_index = d_index;
      std::cout << differentiate_source(read_source(d_file), d_fn, req);
      return 0;
    }

    if (grad->parsed()) {
      if (g_backend == "fd" && g_at.empty()) {
        print_error("--backend fd needs --at (there is no fd source form)");
        std::cerr << app.help();
        return 2;
      }
      if (g_at.empty()) {
        std::cout << gradient_source(read_source(g_file), g_fn, g_wrt);
        return 0;
      }
      Program prog = parse(read_source(g_file));
      const FuncDef& f = find_function(prog, g_fn);
      std::vector<Value> args = bind_point(f, parse_point(g_at));

      // Slot layout mirrors the gradient: whole array or named scalars.
      std::vector<ArgSlot> slots;
      for (std::size_t i = 0; i < f.params.size(); ++i) {
        bool requested = false;
        for (const std::string& w : g_wrt)
          requested = requested || w == f.params[i].name;
        if (!requested) continue;
        if (f.params[i].type == TypeKind::DoubleArray) {
          long long len = (long long)args[i].as_array()->size();
          for (long long k = 0; k < len; ++k) slots.push_back({i, k});
        } else {
          slots.push_back({i, -1});
        }
      }
      if (slots.empty())
        throw DlError(DiagKind::UnknownParameter,
                      "no gradient slots for the requested parameters");

      std::vector<double> out;
      if (g_backend == "ad") {
        GradFunc g = gradient(f, GradRequest{g_wrt});
        std::string grad_name = g.gradient.name;
        prog.functions.push_back(std::move(g.gradient));
        Interpreter interp(prog);
        Value res =
            make_array(std::vector<double>(slots.size(), 0.0));
        args.push_back(res);
        interp.call(grad_name, std::move(args));
        out = *res.as_array();
      } else {
        Interpreter interp(prog);
        out = fd_gradient(interp, g_fn, args, slots, NdOptions{g_eps});
      }
      std::cout << fmt_vector(out) << "\n";
      return 0;
    }

    if (eval->parsed()) {
      Program prog = parse(read_source(e_file));
      const FuncDef& f = find_function(prog, e_fn);
      std::vector<Value> args = bind_point(f, parse_point(e_at));
      Interpreter interp(prog);
      std::cout << fmt_double(interp.call(f, std::move(args)).as_double())
                << "\n";
      return 0;
    }

    if (check->parsed()) return run_check(chk);
    if (bench->parsed()) return run_bench(bch);
    if (fitc->parsed()) return run_fit(fc);
  } catch (const DlError& e) {
    print_error(e.diagnostic().format());
    return 1;
  } catch (const std::exception& e) {
    print_error(e.what());
    return 1;
  }
  return 2;
}
