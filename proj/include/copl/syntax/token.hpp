#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "copl/error.hpp"

namespace copl::syntax {

enum class TokenKind { Keyword, Identifier, IntLiteral, DoubleLiteral, StringLiteral, Punct, EndOfInput };

struct Token {
  TokenKind kind = TokenKind::EndOfInput;
  // Keyword/identifier/punctuation spelling; decoded contents for string literals.
  std::string lexeme;
  SourcePos pos;

  bool is(TokenKind k, std::string_view text) const { return kind == k && lexeme == text; }
  bool is_keyword(std::string_view text) const { return is(TokenKind::Keyword, text); }
  bool is_punct(std::string_view text) const { return is(TokenKind::Punct, text); }
};

bool is_keyword(std::string_view word);
const std::vector<std::string_view>& keywords();

std::string describe(const Token& tok);

/// Splits CopLang source into tokens. The result always ends with an
/// EndOfInput token. Throws LexError.
std::vector<Token> tokenize(std::string_view source);

}  // namespace copl::syntax
