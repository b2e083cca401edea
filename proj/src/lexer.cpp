#include "difflang/lexer.hpp"

#include <cctype>
#include <charconv>
#include <cstdlib>

#include "difflang/diagnostics.hpp"

namespace difflang {

namespace {

struct Cursor {
  std::string_view src;
  size_t pos = 0;
  int line = 1;
  int col = 1;

  bool done() const { return pos >= src.size(); }
  char peek(size_t ahead = 0) const {
    return pos + ahead < src.size() ? src[pos + ahead] : '\0';
  }
  char advance() {
    char c = src[pos++];
    if (c == '\n') {
      line++;
      col = 1;
    } else {
      col++;
    }
    return c;
  }
  SrcLoc loc() const { return {line, col}; }
};

bool ident_start(char c) { return std::isalpha((unsigned char)c) || c == '_'; }
bool ident_char(char c) { return std::isalnum((unsigned char)c) || c == '_'; }

}  // namespace

std::vector<Token> lex(std::string_view source) {
  std::vector<Token> out;
  Cursor c{source};

  auto push = [&](Tok k, std::string text, SrcLoc loc) {
    out.push_back(Token{k, std::move(text), 0.0, 0, loc});
  };

  while (!c.done()) {
    char ch = c.peek();
    SrcLoc loc = c.loc();
    if (ch == ' ' || ch == '\t' || ch == '\r' || ch == '\n') {
      c.advance();
      continue;
    }
    if (ch == '/' && c.peek(1) == '/') {
      while (!c.done() && c.peek() != '\n') c.advance();
      continue;
    }
    if (ch == '/' && c.peek(1) == '*') {
      c.advance();
      c.advance();
      while (!c.done() && !(c.peek() == '*' && c.peek(1) == '/')) c.advance();
      if (c.done())
        throw DlError(DiagKind::SyntaxError, "unterminated block comment", loc);
      c.advance();
      c.advance();
      continue;
    }
    if (ident_start(ch)) {
      std::string text;
      while (!c.done() && ident_char(c.peek())) text += c.advance();
      Tok k = Tok::Ident;
      if (text == "double") k = Tok::KwDouble;
      else if (text == "int") k = Tok::KwInt;
      else if (text == "tape") k = Tok::KwTape;
      else if (text == "for") k = Tok::KwFor;
      else if (text == "if") k = Tok::KwIf;
      else if (text == "else") k = Tok::KwElse;
      else if (text == "return") k = Tok::KwReturn;
      push(k, std::move(text), loc);
      continue;
    }
    if (std::isdigit((unsigned char)ch) ||
        (ch == '.' && std::isdigit((unsigned char)c.peek(1)))) {
      std::string text;
      bool is_double = false;
      while (std::isdigit((unsigned char)c.peek())) text += c.advance();
      if (c.peek() == '.') {
        is_double = true;
        text += c.advance();
        while (std::isdigit((unsigned char)c.peek())) text += c.advance();
      }
      if (c.peek() == 'e' || c.peek() == 'E') {
        is_double = true;
        text += c.advance();
        if (c.peek() == '+' || c.peek() == '-') text += c.advance();
        if (!std::isdigit((unsigned char)c.peek()))
          throw DlError(DiagKind::SyntaxError, "malformed exponent", loc);
        while (std::isdigit((unsigned char)c.peek())) text += c.advance();
      }
      Token t;
      t.text = text;
      t.loc = loc;
      if (is_double) {
        t.kind = Tok::DoubleLit;
        t.dval = std::strtod(text.c_str(), nullptr);
      } else {
        t.kind = Tok::IntLit;
        auto [p, ec] =
            std::from_chars(text.data(), text.data() + text.size(), t.ival);
        if (ec != std::errc{})
          throw DlError(DiagKind::SyntaxError, "integer literal out of range",
                        loc);
      }
      out.push_back(std::move(t));
      continue;
    }
    c.advance();
    switch (ch) {
      case '(': push(Tok::LParen, "(", loc); break;
      case ')': push(Tok::RParen, ")", loc); break;
      case '{': push(Tok::LBrace, "{", loc); break;
      case '}': push(Tok::RBrace, "}", loc); break;
      case '[': push(Tok::LBracket, "[", loc); break;
      case ']': push(Tok::RBracket, "]", loc); break;
      case ',': push(Tok::Comma, ",", loc); break;
      case ';': push(Tok::Semi, ";", loc); break;
      case '*':
        if (c.peek() == '=') { c.advance(); push(Tok::StarEq, "*=", loc); }
        else push(Tok::Star, "*", loc);
        break;
      case '/':
        if (c.peek() == '=') { c.advance(); push(Tok::SlashEq, "/=", loc); }
        else push(Tok::Slash, "/", loc);
        break;
      case '+':
        if (c.peek() == '+') { c.advance(); push(Tok::PlusPlus, "++", loc); }
        else if (c.peek() == '=') { c.advance(); push(Tok::PlusEq, "+=", loc); }
        else push(Tok::Plus, "+", loc);
        break;
      case '-':
        if (c.peek() == '=') { c.advance(); push(Tok::MinusEq, "-=", loc); }
        else push(Tok::Minus, "-", loc);
        break;
      case '<':
        if (c.peek() == '=') { c.advance(); push(Tok::Le, "<=", loc); }
        else push(Tok::Lt, "<", loc);
        break;
      case '>':
        if (c.peek() == '=') { c.advance(); push(Tok::Ge, ">=", loc); }
        else push(Tok::Gt, ">", loc);
        break;
      case '=':
        if (c.peek() == '=') { c.advance(); push(Tok::EqEq, "==", loc); }
        else push(Tok::Assign, "=", loc);
        break;
      case '!':
        if (c.peek() == '=') { c.advance(); push(Tok::NotEq, "!=", loc); }
        else
          throw DlError(DiagKind::SyntaxError, "unexpected character '!'", loc);
        break;
      default:
        throw DlError(DiagKind::SyntaxError,
                      std::string("unexpected character '") + ch + "'", loc);
    }
  }
  out.push_back(Token{Tok::End, "", 0.0, 0, c.loc()});
  return out;
}

}  // namespace difflang
