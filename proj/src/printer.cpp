#include "difflang/printer.hpp"

#include <charconv>
#include <cmath>
#include <string>

namespace difflang {

namespace {

std::string format_double(double v) {
  if (std::isnan(v)) return "(0.0 / 0.0)";  // not produced by transforms
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  std::string s(buf, p);
  // keep the token lexable as a double literal
  if (s.find('.') == std::string::npos && s.find('e') == std::string::npos &&
      s.find("inf") == std::string::npos)
    s += ".0";
  return s;
}

// precedence levels: 1 comparison, 2 additive, 3 multiplicative, 4 unary,
// 5 primary
int level_of(const Expr& e) {
  return std::visit(
      [](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Expr::Binary>) {
          switch (n.op) {
            case BinOp::Add:
            case BinOp::Sub: return 2;
            case BinOp::Mul:
            case BinOp::Div: return 3;
            default: return 1;
          }
        } else if constexpr (std::is_same_v<T, Expr::Unary>) {
          return 4;
        } else if constexpr (std::is_same_v<T, Expr::Literal>) {
          // negative literals print with a leading '-'
          return (n.is_int ? n.ival < 0 : std::signbit(n.dval)) ? 4 : 5;
        } else {
          return 5;
        }
      },
      e.node);
}

class Printer {
 public:
  std::string out;

  void expr(const Expr& e, int min_level) {
    bool parens = level_of(e) < min_level;
    if (parens) out += '(';
    std::visit([&](const auto& n) { node(n); }, e.node);
    if (parens) out += ')';
  }

  void node(const Expr::Literal& l) {
    if (l.is_int) out += std::to_string(l.ival);
    else out += format_double(l.dval);
  }

  void node(const Expr::VarRef& v) { out += v.name; }

  void node(const Expr::Index& ix) {
    out += ix.array;
    out += '[';
    expr(*ix.index, 1);
    out += ']';
  }

  void node(const Expr::Unary& u) {
    if (u.op == UnOp::Neg) {
      out += '-';
      expr(*u.operand, 4);
    } else {
      out += "(double)";
      expr(*u.operand, 4);
    }
  }

  void node(const Expr::Binary& b) {
    int lvl = 1;
    switch (b.op) {
      case BinOp::Add:
      case BinOp::Sub: lvl = 2; break;
      case BinOp::Mul:
      case BinOp::Div: lvl = 3; break;
      default: lvl = 1; break;
    }
    expr(*b.lhs, lvl);
    out += ' ';
    out += binop_spelling(b.op);
    out += ' ';
    expr(*b.rhs, lvl + 1);
  }

  void node(const Expr::Call& c) {
    out += c.callee;
    out += '(';
    for (size_t i = 0; i < c.args.size(); ++i) {
      if (i) out += ", ";
      expr(*c.args[i], 1);
    }
    out += ')';
  }

  void indent(int depth) { out.append(size_t(depth) * 2, ' '); }

  void stmt(const Stmt& s, int depth) {
    std::visit([&](const auto& n) { stmt_node(n, depth); }, s.node);
  }

  void body(const std::vector<StmtPtr>& stmts, int depth) {
    out += "{\n";
    for (const auto& s : stmts) stmt(*s, depth + 1);
    indent(depth);
    out += "}";
  }

  void stmt_node(const Stmt::Decl& d, int depth) {
    indent(depth);
    out += type_name(d.type);
    out += ' ';
    out += d.name;
    if (d.init) {
      out += " = ";
      expr(*d.init, 1);
    }
    out += ";\n";
  }

  void lvalue(const LValue& lv) {
    out += lv.name;
    if (lv.index) {
      out += '[';
      expr(*lv.index, 1);
      out += ']';
    }
  }

  void stmt_node(const Stmt::Assign& a, int depth) {
    indent(depth);
    lvalue(a.lv);
    out += " = ";
    expr(*a.value, 1);
    out += ";\n";
  }

  void stmt_node(const Stmt::CompoundAssign& a, int depth) {
    indent(depth);
    lvalue(a.lv);
    out += ' ';
    out += binop_spelling(a.op);
    out += "= ";
    expr(*a.value, 1);
    out += ";\n";
  }

  void stmt_node(const Stmt::For& f, int depth) {
    indent(depth);
    out += "for (int ";
    out += f.counter;
    out += " = ";
    expr(*f.start, 1);
    out += "; ";
    out += f.counter;
    out += " < ";
    expr(*f.bound, 1);
    out += "; ";
    out += f.counter;
    out += "++) ";
    body(f.body, depth);
    out += "\n";
  }

  void stmt_node(const Stmt::If& i, int depth) {
    indent(depth);
    out += "if (";
    expr(*i.cond, 1);
    out += ") ";
    body(i.then_body, depth);
    if (!i.else_body.empty()) {
      out += " else ";
      body(i.else_body, depth);
    }
    out += "\n";
  }

  void stmt_node(const Stmt::Return& r, int depth) {
    indent(depth);
    out += "return ";
    expr(*r.value, 1);
    out += ";\n";
  }

  void stmt_node(const Stmt::Block& b, int depth) {
    indent(depth);
    body(b.body, depth);
    out += "\n";
  }

  void func(const FuncDef& f) {
    out += "double ";
    out += f.name;
    out += '(';
    for (size_t i = 0; i < f.params.size(); ++i) {
      const Param& p = f.params[i];
      if (i) out += ", ";
      out += type_name(p.type);
      out += ' ';
      out += p.name;
      if (p.default_value) {
        out += " = ";
        if (p.type == TypeKind::Int)
          out += std::to_string((long long)*p.default_value);
        else
          out += format_double(*p.default_value);
      }
    }
    out += ") ";
    body(f.body, 0);
    out += "\n";
  }
};

}  // namespace

std::string print(const Expr& e) {
  Printer p;
  p.expr(e, 1);
  return p.out;
}

std::string print(const FuncDef& f) {
  Printer p;
  p.func(f);
  return p.out;
}

std::string print(const Program& prog) {
  Printer p;
  for (size_t i = 0; i < prog.functions.size(); ++i) {
    if (i) p.out += "\n";
    p.func(prog.functions[i]);
  }
  return p.out;
}

}  // namespace difflang
