#include <algorithm>
#include <array>
#include <cctype>

#include "copl/syntax/token.hpp"

namespace copl {

std::string to_string(SourcePos pos) {
  return std::to_string(pos.line) + ":" + std::to_string(pos.column);
}

const char* to_string(RuntimeErrorKind kind) {
  switch (kind) {
    case RuntimeErrorKind::NullReference: return "NullReference";
    case RuntimeErrorKind::NoSuchMethod: return "NoSuchMethod";
    case RuntimeErrorKind::NoSuchField: return "NoSuchField";
    case RuntimeErrorKind::UnresolvedReference: return "UnresolvedReference";
    case RuntimeErrorKind::MissingContext: return "MissingContext";
    case RuntimeErrorKind::MissingSuper: return "MissingSuper";
    case RuntimeErrorKind::IncomparableConcepts: return "IncomparableConcepts";
    case RuntimeErrorKind::MalformedResult: return "MalformedResult";
    case RuntimeErrorKind::IncompatibleConcatenation: return "IncompatibleConcatenation";
    case RuntimeErrorKind::CreateFailed: return "CreateFailed";
    case RuntimeErrorKind::UnknownConcept: return "UnknownConcept";
    case RuntimeErrorKind::TypeMismatch: return "TypeMismatch";
    case RuntimeErrorKind::DivisionByZero: return "DivisionByZero";
    case RuntimeErrorKind::StepLimit: return "StepLimit";
    case RuntimeErrorKind::Internal: return "Internal";
  }
  return "Unknown";
}

}  // namespace copl

namespace copl::syntax {

namespace {

constexpr std::array<std::string_view, 31> kKeywords = {
    "concept", "reference", "class",   "in",         "this",      "sub",
    "super",   "continue",  "create",  "delete",     "new",       "return",
    "if",      "else",      "forall",  "break",      "null",      "true",
    "false",   "static",    "print",   "instanceof", "contextof", "conceptof",
    "Root",    "Object",    "void",    "int",        "double",    "boolean",
    "String"};

// Longest match first.
constexpr std::array<std::string_view, 23> kPuncts = {
    "==", "!=", "<=", ">=", "&&", "||", "{", "}", "(", ")", ";", ",",
    ".", ":", "=", "<", ">", "+", "-", "*", "/", "%", "!"};

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      skip_trivia();
      if (at_end()) {
        out.push_back(Token{TokenKind::EndOfInput, "", here()});
        return out;
      }
      out.push_back(next());
    }
  }

 private:
  bool at_end() const { return i_ >= src_.size(); }
  char peek(size_t ahead = 0) const {
    return i_ + ahead < src_.size() ? src_[i_ + ahead] : '\0';
  }
  SourcePos here() const { return {line_, col_}; }

  void advance() {
    if (src_[i_] == '\n') {
      ++line_;
      col_ = 1;
    } else if ((static_cast<unsigned char>(src_[i_]) & 0xC0) != 0x80) {
      // Columns count code points, not UTF-8 continuation bytes.
      ++col_;
    }
    ++i_;
  }

  void skip_trivia() {
    while (!at_end()) {
      char c = peek();
      if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        advance();
      } else if (c == '/' && peek(1) == '/') {
        while (!at_end() && peek() != '\n') advance();
      } else if (c == '/' && peek(1) == '*') {
        SourcePos start = here();
        advance();
        advance();
        for (;;) {
          if (at_end()) throw LexError(start, "unterminated comment");
          if (peek() == '*' && peek(1) == '/') {
            advance();
            advance();
            break;
          }
          advance();
        }
      } else {
        return;
      }
    }
  }

  Token next() {
    SourcePos start = here();
    char c = peek();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      size_t b = i_;
      while (!at_end() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_'))
        advance();
      std::string word(src_.substr(b, i_ - b));
      return Token{is_keyword(word) ? TokenKind::Keyword : TokenKind::Identifier, word, start};
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      size_t b = i_;
      while (std::isdigit(static_cast<unsigned char>(peek()))) advance();
      bool real = false;
      if (peek() == '.' && std::isdigit(static_cast<unsigned char>(peek(1)))) {
        real = true;
        advance();
        while (std::isdigit(static_cast<unsigned char>(peek()))) advance();
      }
      return Token{real ? TokenKind::DoubleLiteral : TokenKind::IntLiteral,
                   std::string(src_.substr(b, i_ - b)), start};
    }
    if (c == '"') return string_literal(start);
    for (std::string_view p : kPuncts) {
      if (src_.substr(i_, p.size()) == p) {
        for (size_t k = 0; k < p.size(); ++k) advance();
        return Token{TokenKind::Punct, std::string(p), start};
      }
    }
    throw LexError(start, std::string("illegal character '") + c + "'");
  }

  Token string_literal(SourcePos start) {
    advance();
    std::string text;
    for (;;) {
      if (at_end() || peek() == '\n') throw LexError(start, "unterminated string literal");
      char c = peek();
      if (c == '"') {
        advance();
        break;
      }
      if (c == '\\') {
        advance();
        if (at_end()) throw LexError(start, "unterminated string literal");
        char e = peek();
        switch (e) {
          case 'n': text += '\n'; break;
          case 't': text += '\t'; break;
          case '"': text += '"'; break;
          case '\\': text += '\\'; break;
          default: throw LexError(here(), std::string("unknown escape '\\") + e + "'");
        }
        advance();
        continue;
      }
      text += c;
      advance();
    }
    return Token{TokenKind::StringLiteral, std::move(text), start};
  }

  std::string_view src_;
  size_t i_ = 0;
  int line_ = 1;
  int col_ = 1;
};

}  // namespace

bool is_keyword(std::string_view word) {
  return std::find(kKeywords.begin(), kKeywords.end(), word) != kKeywords.end();
}

const std::vector<std::string_view>& keywords() {
  static const std::vector<std::string_view> all(kKeywords.begin(), kKeywords.end());
  return all;
}

std::string describe(const Token& tok) {
  switch (tok.kind) {
    case TokenKind::EndOfInput: return "end of input";
    case TokenKind::Keyword: return "keyword '" + tok.lexeme + "'";
    case TokenKind::Identifier: return "identifier '" + tok.lexeme + "'";
    case TokenKind::IntLiteral:
    case TokenKind::DoubleLiteral: return "number " + tok.lexeme;
    case TokenKind::StringLiteral: return "string literal";
    case TokenKind::Punct: return "'" + tok.lexeme + "'";
  }
  return "token";
}

std::vector<Token> tokenize(std::string_view source) { return Lexer(source).run(); }

}  // namespace copl::syntax
