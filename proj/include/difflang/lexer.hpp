#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "difflang/ast.hpp"

namespace difflang {

enum class Tok {
  Ident,
  IntLit,
  DoubleLit,
  KwDouble,
  KwInt,
  KwTape,
  KwFor,
  KwIf,
  KwElse,
  KwReturn,
  LParen,
  RParen,
  LBrace,
  RBrace,
  LBracket,
  RBracket,
  Comma,
  Semi,
  Star,
  Plus,
  Minus,
  Slash,
  PlusPlus,
  PlusEq,
  MinusEq,
  StarEq,
  SlashEq,
  Assign,
  Lt,
  Le,
  Gt,
  Ge,
  EqEq,
  NotEq,
  End,
};

struct Token {
  Tok kind;
  std::string text;
  double dval = 0.0;
  long long ival = 0;
  SrcLoc loc;
};

// Tokenizes the whole input; throws DlError(SyntaxError) on bad characters or
// malformed numbers. Comments: // to end of line, /* ... */.
std::vector<Token> lex(std::string_view source);

}  // namespace difflang
