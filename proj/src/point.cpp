#include "difflang/point.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>

#include "difflang/diagnostics.hpp"

namespace difflang {

namespace {

class PointParser {
 public:
  explicit PointParser(const std::string& text) : s_(text) {}

  std::vector<PointValue> run() {
    std::vector<PointValue> out;
    skip_ws();
    if (at_end()) return out;
    out.push_back(binding());
    while (skip_ws(), !at_end()) {
      expect(',');
      out.push_back(binding());
    }
    return out;
  }

 private:
  const std::string& s_;
  std::size_t i_ = 0;

  bool at_end() const { return i_ >= s_.size(); }
  void skip_ws() {
    while (!at_end() && std::isspace((unsigned char)s_[i_])) i_++;
  }
  [[noreturn]] void fail(const std::string& what) {
    throw DlError(DiagKind::SyntaxError,
                  "bad point syntax at offset " + std::to_string(i_) + ": " +
                      what);
  }
  void expect(char c) {
    skip_ws();
    if (at_end() || s_[i_] != c) fail(std::string("expected '") + c + "'");
    i_++;
  }

  PointValue binding() {
    PointValue v;
    skip_ws();
    std::size_t start = i_;
    while (!at_end() &&
           (std::isalnum((unsigned char)s_[i_]) || s_[i_] == '_'))
      i_++;
    if (i_ == start) fail("expected a parameter name");
    v.name = s_.substr(start, i_ - start);
    expect('=');
    skip_ws();
    if (!at_end() && s_[i_] == '[') {
      i_++;
      v.is_array = true;
      skip_ws();
      if (!at_end() && s_[i_] == ']') {
        i_++;
        return v;
      }
      v.array.push_back(number());
      while (skip_ws(), !at_end() && s_[i_] == ',') {
        i_++;
        v.array.push_back(number());
      }
      expect(']');
      return v;
    }
    v.scalar = number();
    return v;
  }

  double number() {
    skip_ws();
    const char* begin = s_.c_str() + i_;
    char* end = nullptr;
    double d = std::strtod(begin, &end);
    if (end == begin) fail("expected a number");
    i_ += std::size_t(end - begin);
    return d;
  }
};

}  // namespace

std::vector<PointValue> parse_point(const std::string& text) {
  return PointParser(text).run();
}

std::vector<Value> bind_point(const FuncDef& f,
                              const std::vector<PointValue>& values) {
  auto find = [&](const std::string& name) -> const PointValue* {
    for (const PointValue& v : values)
      if (v.name == name) return &v;
    return nullptr;
  };
  for (const PointValue& v : values) {
    bool known = false;
    for (const Param& p : f.params) known = known || p.name == v.name;
    if (!known)
      throw DlError(DiagKind::UnknownParameter,
                    "'" + f.name + "' has no parameter '" + v.name + "'");
  }

  std::vector<Value> out;
  for (const Param& p : f.params) {
    const PointValue* v = find(p.name);
    if (!v) {
      if (!p.default_value)
        throw DlError(DiagKind::ArityMismatch,
                      "point does not bind parameter '" + p.name + "'");
      if (p.type == TypeKind::Int)
        out.push_back(Value((long long)*p.default_value));
      else
        out.push_back(Value(*p.default_value));
      continue;
    }
    switch (p.type) {
      case TypeKind::Double:
        if (v->is_array)
          throw DlError(DiagKind::TypeMismatch,
                        "parameter '" + p.name + "' takes a number");
        out.push_back(Value(v->scalar));
        break;
      case TypeKind::Int: {
        if (v->is_array || v->scalar != std::floor(v->scalar))
          throw DlError(DiagKind::TypeMismatch,
                        "parameter '" + p.name + "' takes an integer");
        out.push_back(Value((long long)v->scalar));
        break;
      }
      case TypeKind::DoubleArray:
        if (!v->is_array)
          throw DlError(DiagKind::TypeMismatch,
                        "parameter '" + p.name + "' takes an array");
        out.push_back(make_array(v->array));
        break;
      default:
        throw DlError(DiagKind::TypeMismatch,
                      "parameter '" + p.name + "' cannot be bound from a point");
    }
  }
  return out;
}

}  // namespace difflang
