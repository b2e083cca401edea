#include "difflang/models.hpp"

#include <cmath>
#include <numbers>

#include "difflang/parser.hpp"
#include "difflang/sema.hpp"

namespace difflang {

namespace {

// Kept in sync with the files under models/ (a test enforces byte equality).

const char* SUM_SRC =
    "double sum(double* p, int dim) {\n"
    "  double r = 0.0;\n"
    "  for (int i = 0; i < dim; i++) {\n"
    "    r += p[i];\n"
    "  }\n"
    "  return r;\n"
    "}\n";

// The normalization term pow(sigma, -0.5) is transcribed as published, even
// though the usual multivariate normal carries pow(sigma, -dim). The
// benchmark reproduces the published workload, not a statistics library.
const char* MVN_SRC =
    "double mvn(double* x, double* p, double sigma, int dim) {\n"
    "  double t = 0.0;\n"
    "  for (int i = 0; i < dim; i++) {\n"
    "    t += (x[i] - p[i]) * (x[i] - p[i]);\n"
    "  }\n"
    "  t = -t / (2.0 * sigma * sigma);\n"
    "  return pow(2.0 * M_PI, -dim / 2.0) * pow(sigma, -0.5) * exp(t);\n"
    "}\n";

const char* BW_SRC =
    "double breitwigner_pdf(double x, double gamma, double x0 = 0.0) {\n"
    "  double gammahalf = gamma / 2.0;\n"
    "  return gammahalf / (M_PI * ((x - x0) * (x - x0) + gammahalf * "
    "gammahalf));\n"
    "}\n";

const char* GAUS_SRC =
    "double gaus(double x, double A, double mu, double sigma) {\n"
    "  double d = x - mu;\n"
    "  return A * exp(-(d * d) / (2.0 * sigma * sigma));\n"
    "}\n";

const char* EXPO_SRC =
    "double expo(double x, double a, double b) {\n"
    "  return exp(a + b * x);\n"
    "}\n";

std::vector<ModelEntry> build_corpus() {
  return {
      {"sum", SUM_SRC, {"p"}, true},
      {"mvn", MVN_SRC, {"p"}, true},
      {"breitwigner_pdf", BW_SRC, {"x", "gamma", "x0"}, false},
      {"gaus", GAUS_SRC, {"A", "mu", "sigma"}, false},
      {"expo", EXPO_SRC, {"a", "b"}, false},
  };
}

std::size_t param_index(const ModelEntry& m, const Program& prog,
                        const std::string& pname) {
  const FuncDef* f = prog.find(m.name);
  for (std::size_t i = 0; i < f->params.size(); ++i)
    if (f->params[i].name == pname) return i;
  throw DlError(DiagKind::UnknownParameter,
                "model '" + m.name + "' has no parameter '" + pname + "'");
}

}  // namespace

const std::vector<ModelEntry>& all_models() {
  static const std::vector<ModelEntry> corpus = build_corpus();
  return corpus;
}

const ModelEntry& get_model(const std::string& name) {
  for (const ModelEntry& m : all_models())
    if (m.name == name) return m;
  throw DlError(DiagKind::UnknownModel, "unknown model '" + name + "'");
}

Program parse_model(const ModelEntry& m) { return parse(m.source); }

std::vector<Value> model_args(const ModelEntry& m, long long dim) {
  if (m.name == "sum") {
    std::vector<double> p(static_cast<std::size_t>(dim));
    for (long long i = 0; i < dim; ++i)
      p[std::size_t(i)] = 1.0 + double(i) / double(dim);
    return {make_array(std::move(p)), Value(dim)};
  }
  if (m.name == "mvn") {
    std::vector<double> x(static_cast<std::size_t>(dim));
    std::vector<double> p(static_cast<std::size_t>(dim));
    for (long long i = 0; i < dim; ++i) {
      x[std::size_t(i)] = 0.5 + double(i) / double(dim);
      p[std::size_t(i)] = 1.0 + double(i) / double(dim);
    }
    return {make_array(std::move(x)), make_array(std::move(p)), Value(1.0),
            Value(dim)};
  }
  if (m.name == "breitwigner_pdf")
    return {Value(1.0), Value(2.0), Value(0.0)};
  if (m.name == "gaus") return {Value(0.5), Value(1.0), Value(0.0), Value(1.0)};
  if (m.name == "expo") return {Value(0.5), Value(0.1), Value(-0.7)};
  throw DlError(DiagKind::UnknownModel, "unknown model '" + m.name + "'");
}

long long wrt_dim(const ModelEntry& m, long long dim) {
  if (m.dim_scalable) return dim;
  return (long long)m.wrt.size();
}

std::vector<ArgSlot> wrt_slots(const ModelEntry& m, long long dim) {
  Program prog = parse_model(m);
  std::vector<ArgSlot> out;
  if (m.dim_scalable) {
    std::size_t arg = param_index(m, prog, m.wrt[0]);
    for (long long i = 0; i < dim; ++i) out.push_back({arg, i});
    return out;
  }
  for (const std::string& w : m.wrt)
    out.push_back({param_index(m, prog, w), -1});
  return out;
}

std::vector<double> reference_gradient(const ModelEntry& m,
                                       const std::vector<Value>& args) {
  const double pi = std::numbers::pi;
  if (m.name == "sum") {
    long long dim = args.at(1).as_int();
    return std::vector<double>(static_cast<std::size_t>(dim), 1.0);
  }
  if (m.name == "mvn") {
    const auto& x = *args.at(0).as_array();
    const auto& p = *args.at(1).as_array();
    double sigma = args.at(2).as_double();
    long long dim = args.at(3).as_int();
    double t = 0.0;
    for (long long i = 0; i < dim; ++i) {
      double d = x[std::size_t(i)] - p[std::size_t(i)];
      t += d * d;
    }
    double value = std::pow(2.0 * pi, -double(dim) / 2.0) *
                   std::pow(sigma, -0.5) *
                   std::exp(-t / (2.0 * sigma * sigma));
    std::vector<double> g(static_cast<std::size_t>(dim));
    for (long long i = 0; i < dim; ++i)
      g[std::size_t(i)] = value * (x[std::size_t(i)] - p[std::size_t(i)]) /
                          (sigma * sigma);
    return g;
  }
  if (m.name == "breitwigner_pdf") {
    double x = args.at(0).as_double();
    double gamma = args.at(1).as_double();
    double x0 = args.at(2).as_double();
    double u = x - x0;
    double den = pi * (4.0 * u * u + gamma * gamma) *
                 (4.0 * u * u + gamma * gamma);
    double dx = -16.0 * gamma * u / den;
    double dgamma = 2.0 * (4.0 * u * u - gamma * gamma) / den;
    return {dx, dgamma, -dx};
  }
  if (m.name == "gaus") {
    double x = args.at(0).as_double();
    double A = args.at(1).as_double();
    double mu = args.at(2).as_double();
    double sigma = args.at(3).as_double();
    double d = x - mu;
    double e = std::exp(-(d * d) / (2.0 * sigma * sigma));
    return {e, A * e * d / (sigma * sigma),
            A * e * d * d / (sigma * sigma * sigma)};
  }
  if (m.name == "expo") {
    double x = args.at(0).as_double();
    double a = args.at(1).as_double();
    double b = args.at(2).as_double();
    double v = std::exp(a + b * x);
    return {v, x * v};
  }
  throw DlError(DiagKind::UnknownModel, "unknown model '" + m.name + "'");
}

}  // namespace difflang
