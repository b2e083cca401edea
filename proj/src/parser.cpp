#include "difflang/parser.hpp"

#include <numbers>

#include "difflang/diagnostics.hpp"
#include "difflang/lexer.hpp"
#include "difflang/sema.hpp"

namespace difflang {

namespace {

class Parser {
 public:
  explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

  Program program() {
    Program p;
    while (peek().kind != Tok::End) p.functions.push_back(funcdef());
    return p;
  }

 private:
  std::vector<Token> toks_;
  size_t pos_ = 0;

  const Token& peek(size_t ahead = 0) const {
    size_t i = pos_ + ahead;
    return i < toks_.size() ? toks_[i] : toks_.back();
  }
  const Token& advance() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }
  bool check(Tok k) const { return peek().kind == k; }
  bool match(Tok k) {
    if (!check(k)) return false;
    advance();
    return true;
  }
  const Token& expect(Tok k, const char* what) {
    if (!check(k))
      throw DlError(DiagKind::SyntaxError,
                    std::string("expected ") + what + ", got '" + peek().text +
                        "'",
                    peek().loc);
    return toks_[pos_++];
  }

  [[noreturn]] void fail(const std::string& msg) {
    throw DlError(DiagKind::SyntaxError, msg + " (got '" + peek().text + "')",
                  peek().loc);
  }

  FuncDef funcdef() {
    FuncDef f;
    f.loc = peek().loc;
    expect(Tok::KwDouble, "'double' at start of function definition");
    f.name = expect(Tok::Ident, "function name").text;
    expect(Tok::LParen, "'('");
    if (!check(Tok::RParen)) {
      do {
        f.params.push_back(param());
      } while (match(Tok::Comma));
    }
    expect(Tok::RParen, "')'");
    f.body = block_body();
    return f;
  }

  Param param() {
    Param p;
    p.loc = peek().loc;
    if (match(Tok::KwDouble)) {
      p.type = match(Tok::Star) ? TypeKind::DoubleArray : TypeKind::Double;
    } else if (match(Tok::KwInt)) {
      p.type = TypeKind::Int;
    } else {
      fail("expected parameter type");
    }
    p.name = expect(Tok::Ident, "parameter name").text;
    if (match(Tok::Assign)) {
      bool neg = match(Tok::Minus);
      double v;
      if (check(Tok::DoubleLit)) v = advance().dval;
      else if (check(Tok::IntLit)) v = double(advance().ival);
      else fail("expected literal default value");
      p.default_value = neg ? -v : v;
    }
    return p;
  }

  std::vector<StmtPtr> block_body() {
    expect(Tok::LBrace, "'{'");
    std::vector<StmtPtr> body;
    while (!check(Tok::RBrace) && !check(Tok::End)) body.push_back(stmt());
    expect(Tok::RBrace, "'}'");
    return body;
  }

  // A statement in "body" position (for/if): a block is flattened into the
  // owning statement list, anything else becomes a singleton list.
  std::vector<StmtPtr> stmt_or_block() {
    if (check(Tok::LBrace)) return block_body();
    std::vector<StmtPtr> body;
    body.push_back(stmt());
    return body;
  }

  StmtPtr stmt() {
    SrcLoc loc = peek().loc;
    auto out = std::make_unique<Stmt>();
    out->loc = loc;
    switch (peek().kind) {
      case Tok::KwDouble:
      case Tok::KwInt:
      case Tok::KwTape:
        out->node = decl();
        return out;
      case Tok::KwFor:
        out->node = for_stmt();
        return out;
      case Tok::KwIf:
        out->node = if_stmt();
        return out;
      case Tok::KwReturn: {
        advance();
        Stmt::Return r{expr()};
        expect(Tok::Semi, "';'");
        out->node = std::move(r);
        return out;
      }
      case Tok::LBrace:
        out->node = Stmt::Block{block_body()};
        return out;
      case Tok::Ident:
        return assign_stmt();
      default:
        fail("expected statement");
    }
  }

  Stmt::Decl decl() {
    Stmt::Decl d;
    if (match(Tok::KwDouble)) {
      d.type = TypeKind::Double;
    } else if (match(Tok::KwInt)) {
      d.type = TypeKind::Int;
    } else {
      expect(Tok::KwTape, "type");
      expect(Tok::Lt, "'<'");
      if (match(Tok::KwInt)) d.type = TypeKind::IntTape;
      else if (match(Tok::KwDouble)) d.type = TypeKind::DoubleTape;
      else fail("expected 'int' or 'double' tape element type");
      expect(Tok::Gt, "'>'");
    }
    d.name = expect(Tok::Ident, "variable name").text;
    if (match(Tok::Assign)) d.init = expr();
    expect(Tok::Semi, "';'");
    return d;
  }

  StmtPtr assign_stmt() {
    auto out = std::make_unique<Stmt>();
    out->loc = peek().loc;
    LValue lv;
    lv.loc = peek().loc;
    lv.name = expect(Tok::Ident, "identifier").text;
    if (match(Tok::LBracket)) {
      lv.index = expr();
      expect(Tok::RBracket, "']'");
    }
    BinOp op{};
    bool compound = true;
    switch (peek().kind) {
      case Tok::Assign: compound = false; break;
      case Tok::PlusEq: op = BinOp::Add; break;
      case Tok::MinusEq: op = BinOp::Sub; break;
      case Tok::StarEq: op = BinOp::Mul; break;
      case Tok::SlashEq: op = BinOp::Div; break;
      default: fail("expected assignment operator");
    }
    advance();
    ExprPtr value = expr();
    expect(Tok::Semi, "';'");
    if (compound)
      out->node = Stmt::CompoundAssign{op, std::move(lv), std::move(value)};
    else
      out->node = Stmt::Assign{std::move(lv), std::move(value)};
    return out;
  }

  Stmt::For for_stmt() {
    expect(Tok::KwFor, "'for'");
    expect(Tok::LParen, "'('");
    match(Tok::KwInt);  // counter declaration keyword is optional
    Stmt::For f;
    f.counter = expect(Tok::Ident, "loop counter").text;
    expect(Tok::Assign, "'='");
    f.start = expr();
    expect(Tok::Semi, "';'");
    std::string c2 = expect(Tok::Ident, "loop counter").text;
    expect(Tok::Lt, "'<' (canonical loop form)");
    f.bound = expr();
    expect(Tok::Semi, "';'");
    std::string c3 = expect(Tok::Ident, "loop counter").text;
    expect(Tok::PlusPlus, "'++'");
    expect(Tok::RParen, "')'");
    if (c2 != f.counter || c3 != f.counter)
      throw DlError(DiagKind::SyntaxError,
                    "loop condition and increment must use counter '" +
                        f.counter + "'",
                    peek().loc);
    f.body = stmt_or_block();
    return f;
  }

  Stmt::If if_stmt() {
    expect(Tok::KwIf, "'if'");
    expect(Tok::LParen, "'('");
    Stmt::If s;
    s.cond = expr();
    expect(Tok::RParen, "')'");
    s.then_body = stmt_or_block();
    if (match(Tok::KwElse)) s.else_body = stmt_or_block();
    return s;
  }

  ExprPtr expr() { return comparison(); }

  ExprPtr comparison() {
    ExprPtr lhs = additive();
    BinOp op;
    switch (peek().kind) {
      case Tok::Lt: op = BinOp::Lt; break;
      case Tok::Le: op = BinOp::Le; break;
      case Tok::Gt: op = BinOp::Gt; break;
      case Tok::Ge: op = BinOp::Ge; break;
      case Tok::EqEq: op = BinOp::Eq; break;
      case Tok::NotEq: op = BinOp::Ne; break;
      default: return lhs;
    }
    SrcLoc loc = advance().loc;
    ExprPtr rhs = additive();
    auto e = binary(op, std::move(lhs), std::move(rhs));
    e->loc = loc;
    return e;
  }

  ExprPtr additive() {
    ExprPtr lhs = term();
    while (check(Tok::Plus) || check(Tok::Minus)) {
      BinOp op = check(Tok::Plus) ? BinOp::Add : BinOp::Sub;
      SrcLoc loc = advance().loc;
      auto e = binary(op, std::move(lhs), term());
      e->loc = loc;
      lhs = std::move(e);
    }
    return lhs;
  }

  ExprPtr term() {
    ExprPtr lhs = unary_expr();
    while (check(Tok::Star) || check(Tok::Slash)) {
      BinOp op = check(Tok::Star) ? BinOp::Mul : BinOp::Div;
      SrcLoc loc = advance().loc;
      auto e = binary(op, std::move(lhs), unary_expr());
      e->loc = loc;
      lhs = std::move(e);
    }
    return lhs;
  }

  ExprPtr unary_expr() {
    if (check(Tok::Minus)) {
      SrcLoc loc = advance().loc;
      ExprPtr operand = unary_expr();
      // fold negated literals so printed negative constants round-trip
      if (auto* l = std::get_if<Expr::Literal>(&operand->node)) {
        if (l->is_int) l->ival = -l->ival;
        else l->dval = -l->dval;
        operand->loc = loc;
        return operand;
      }
      auto e = unary(UnOp::Neg, std::move(operand));
      e->loc = loc;
      return e;
    }
    // cast: "(double)" unary
    if (check(Tok::LParen) && peek(1).kind == Tok::KwDouble &&
        peek(2).kind == Tok::RParen) {
      SrcLoc loc = advance().loc;
      advance();
      advance();
      auto e = unary(UnOp::IntToDouble, unary_expr());
      e->loc = loc;
      return e;
    }
    return primary();
  }

  ExprPtr primary() {
    SrcLoc loc = peek().loc;
    if (check(Tok::IntLit)) {
      auto e = lit_i(advance().ival);
      e->loc = loc;
      return e;
    }
    if (check(Tok::DoubleLit)) {
      auto e = lit_d(advance().dval);
      e->loc = loc;
      return e;
    }
    if (match(Tok::LParen)) {
      ExprPtr e = expr();
      expect(Tok::RParen, "')'");
      return e;
    }
    if (check(Tok::Ident)) {
      std::string name = advance().text;
      if (name == "M_PI") {
        auto e = lit_d(std::numbers::pi);
        e->loc = loc;
        return e;
      }
      if (match(Tok::LParen)) {
        Expr::Call c;
        c.callee = name;
        c.intrinsic = intrinsic_by_name(name);
        if (!check(Tok::RParen)) {
          do {
            c.args.push_back(expr());
          } while (match(Tok::Comma));
        }
        expect(Tok::RParen, "')'");
        auto e = std::make_unique<Expr>();
        e->node = std::move(c);
        e->loc = loc;
        return e;
      }
      if (match(Tok::LBracket)) {
        ExprPtr idx = expr();
        expect(Tok::RBracket, "']'");
        auto e = index(name, std::move(idx));
        e->loc = loc;
        return e;
      }
      auto e = var(name);
      e->loc = loc;
      return e;
    }
    fail("expected expression");
  }
};

}  // namespace

Program parse_syntax(std::string_view source) {
  return Parser(lex(source)).program();
}

Program parse(std::string_view source) {
  Program p = parse_syntax(source);
  resolve_program(p);  // throws on first semantic error
  return p;
}

}  // namespace difflang
