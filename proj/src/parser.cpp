#include <set>

#include "copl/syntax/parser.hpp"

namespace copl::syntax {

namespace {

bool is_primitive_type_keyword(const Token& t) {
  return t.kind == TokenKind::Keyword &&
         (t.lexeme == "void" || t.lexeme == "int" || t.lexeme == "double" ||
          t.lexeme == "boolean" || t.lexeme == "String" || t.lexeme == "Object");
}

bool is_special_method_keyword(const Token& t) {
  return t.kind == TokenKind::Keyword &&
         (t.lexeme == "continue" || t.lexeme == "create" || t.lexeme == "delete");
}

class Parser {
 public:
  explicit Parser(const std::vector<Token>& toks) : toks_(toks) {
    if (toks_.empty() || toks_.back().kind != TokenKind::EndOfInput)
      throw ParseError(toks_.empty() ? SourcePos{} : toks_.back().pos,
                       "token stream must end with end of input");
    for (size_t i = 0; i + 1 < toks_.size(); ++i) {
      if (toks_[i].is_keyword("concept") && toks_[i + 1].kind == TokenKind::Identifier)
        concepts_.insert(toks_[i + 1].lexeme);
    }
  }

  SourceProgram program() {
    SourceProgram prog;
    while (!at_end()) {
      if (peek().is_keyword("concept")) {
        prog.concepts.push_back(concept_decl());
      } else if (peek().is_keyword("static")) {
        SourcePos pos = take().pos;
        auto decl = var_decl_after_type(pos, type_ref(true), true);
        prog.static_decls.push_back(std::move(decl));
      } else {
        prog.statements.push_back(statement());
      }
    }
    return prog;
  }

 private:
  // ---- token helpers -------------------------------------------------------
  const Token& peek(size_t ahead = 0) const {
    size_t i = std::min(pos_ + ahead, toks_.size() - 1);
    return toks_[i];
  }
  bool at_end() const { return peek().kind == TokenKind::EndOfInput; }
  const Token& take() {
    const Token& t = toks_[pos_];
    if (pos_ + 1 < toks_.size()) ++pos_;
    return t;
  }
  [[noreturn]] void fail(const std::string& expected) const {
    throw ParseError(peek().pos, "expected " + expected + ", found " + describe(peek()));
  }
  const Token& expect_punct(std::string_view p) {
    if (!peek().is_punct(p)) fail("'" + std::string(p) + "'");
    return take();
  }
  const Token& expect_keyword(std::string_view k) {
    if (!peek().is_keyword(k)) fail("keyword '" + std::string(k) + "'");
    return take();
  }
  std::string expect_identifier(const std::string& what = "identifier") {
    if (peek().kind != TokenKind::Identifier) fail(what);
    return take().lexeme;
  }
  bool accept_punct(std::string_view p) {
    if (peek().is_punct(p)) {
      take();
      return true;
    }
    return false;
  }

  // ---- declarations --------------------------------------------------------
  ConceptDecl concept_decl() {
    ConceptDecl c;
    c.pos = expect_keyword("concept").pos;
    c.name = expect_identifier("concept name");
    if (peek().is_keyword("in")) {
      take();
      if (peek().is_keyword("Root")) {
        take();
        c.parent = "Root";
      } else {
        c.parent = expect_identifier("parent concept name");
      }
    }
    if (peek().is_keyword("reference")) {
      take();
      c.ref_members = member_block();
    }
    if (peek().is_keyword("class")) {
      take();
      c.obj_members = member_block();
    }
    return c;
  }

  std::vector<MemberDecl> member_block() {
    expect_punct("{");
    std::vector<MemberDecl> members;
    while (!peek().is_punct("}")) {
      if (at_end()) fail("'}'");
      members.push_back(member());
    }
    take();
    return members;
  }

  MemberDecl member() {
    MemberDecl m;
    m.pos = peek().pos;
    m.type = type_ref(false);
    if (peek().kind == TokenKind::Identifier || is_special_method_keyword(peek())) {
      m.name = take().lexeme;
    } else {
      fail("member name");
    }
    if (peek().is_punct("(")) {
      m.is_method = true;
      take();
      if (!peek().is_punct(")")) {
        do {
          Param p;
          p.type = type_ref(false);
          p.name = expect_identifier("parameter name");
          m.params.push_back(std::move(p));
        } while (accept_punct(","));
      }
      expect_punct(")");
      m.body = block_body();
      return m;
    }
    if (is_special_method_keyword(Token{TokenKind::Keyword, m.name, {}}))
      throw ParseError(m.pos, "'" + m.name + "' can only name a method");
    if (accept_punct("=")) m.init = expression();
    expect_punct(";");
    return m;
  }

  // A type with an optional `Context:` prefix when allow_context is set.
  TypeRef type_ref(bool allow_context) {
    TypeRef t;
    auto simple = [&]() -> std::string {
      if (is_primitive_type_keyword(peek())) return take().lexeme;
      if (peek().is_keyword("Root")) {
        take();
        return "Root";
      }
      if (peek().kind == TokenKind::Identifier) return take().lexeme;
      fail("type name");
    };
    t.name = simple();
    if (allow_context && peek().is_punct(":")) {
      take();
      t.context = t.name;
      t.name = simple();
    }
    return t;
  }

  StmtPtr var_decl_after_type(SourcePos pos, TypeRef type, bool is_static) {
    VarDeclStmt d;
    d.type = std::move(type);
    d.name = expect_identifier("variable name");
    d.is_static = is_static;
    if (accept_punct("=")) d.init = expression();
    expect_punct(";");
    return make_stmt(pos, std::move(d));
  }

  // ---- statements ----------------------------------------------------------
  template <typename T>
  static StmtPtr make_stmt(SourcePos pos, T node) {
    auto s = std::make_unique<Stmt>();
    s->pos = pos;
    s->node = std::move(node);
    return s;
  }

  std::vector<StmtPtr> block_body() {
    expect_punct("{");
    std::vector<StmtPtr> out;
    while (!peek().is_punct("}")) {
      if (at_end()) fail("'}'");
      out.push_back(statement());
    }
    take();
    return out;
  }

  bool looks_like_declaration() const {
    const Token& t0 = peek();
    const Token& t1 = peek(1);
    bool type_word = t0.kind == TokenKind::Identifier || t0.is_keyword("Root") ||
                     is_primitive_type_keyword(t0);
    if (!type_word) return false;
    if (t1.kind == TokenKind::Identifier) return true;
    if (t1.is_punct(":") && !is_primitive_type_keyword(t0)) {
      const Token& t2 = peek(2);
      const Token& t3 = peek(3);
      return (t2.kind == TokenKind::Identifier || is_primitive_type_keyword(t2)) &&
             t3.kind == TokenKind::Identifier;
    }
    return false;
  }

  StmtPtr statement() {
    const Token& t = peek();
    SourcePos pos = t.pos;
    if (t.is_punct("{")) return make_stmt(pos, BlockStmt{block_body()});
    if (t.is_keyword("if")) {
      take();
      expect_punct("(");
      IfStmt s;
      s.cond = expression();
      expect_punct(")");
      s.then_branch = statement();
      if (peek().is_keyword("else")) {
        take();
        s.else_branch = statement();
      }
      return make_stmt(pos, std::move(s));
    }
    if (t.is_keyword("forall")) {
      take();
      expect_punct("(");
      ForallStmt s;
      s.type = type_ref(false);
      s.var = expect_identifier("loop variable name");
      expect_keyword("in");
      s.source = expression();
      expect_punct(")");
      s.body = statement();
      return make_stmt(pos, std::move(s));
    }
    if (t.is_keyword("break")) {
      take();
      expect_punct(";");
      return make_stmt(pos, BreakStmt{});
    }
    if (t.is_keyword("return")) {
      take();
      ReturnStmt s;
      if (!peek().is_punct(";")) s.value = expression();
      expect_punct(";");
      return make_stmt(pos, std::move(s));
    }
    if (t.is_keyword("print")) {
      take();
      expect_punct("(");
      PrintStmt s{expression()};
      expect_punct(")");
      expect_punct(";");
      return make_stmt(pos, std::move(s));
    }
    if (t.is_keyword("static")) throw ParseError(pos, "static declarations are only allowed at top level");
    if (looks_like_declaration()) return var_decl_after_type(pos, type_ref(true), false);

    ExprPtr e = expression();
    if (peek().is_punct(":") && peek(1).is_punct("{")) {
      take();
      ContextBlockStmt cb;
      cb.context = std::move(e);
      cb.body = block_body();
      return make_stmt(pos, std::move(cb));
    }
    expect_punct(";");
    return make_stmt(pos, ExprStmt{std::move(e)});
  }

  // ---- expressions ---------------------------------------------------------
  template <typename T>
  static ExprPtr make_expr(SourcePos pos, T node) {
    auto e = std::make_unique<Expr>();
    e->pos = pos;
    e->node = std::move(node);
    return e;
  }

  ExprPtr expression() { return assignment(); }

  ExprPtr assignment() {
    ExprPtr lhs = logical_or();
    if (peek().is_punct("=")) {
      SourcePos pos = take().pos;
      bool lvalue = std::holds_alternative<NameExpr>(lhs->node) ||
                    std::holds_alternative<MemberExpr>(lhs->node);
      if (!lvalue) throw ParseError(pos, "expected assignable expression before '='");
      ExprPtr rhs = assignment();
      return make_expr(pos, AssignExpr{std::move(lhs), std::move(rhs)});
    }
    return lhs;
  }

  template <typename Next>
  ExprPtr binary_level(Next next, std::initializer_list<std::pair<std::string_view, BinaryOp>> ops) {
    ExprPtr lhs = (this->*next)();
    for (;;) {
      bool matched = false;
      for (auto [text, op] : ops) {
        if (peek().is_punct(text)) {
          SourcePos pos = take().pos;
          ExprPtr rhs = (this->*next)();
          lhs = make_expr(pos, BinaryExpr{op, std::move(lhs), std::move(rhs)});
          matched = true;
          break;
        }
      }
      if (!matched) return lhs;
    }
  }

  ExprPtr logical_or() { return binary_level(&Parser::logical_and, {{"||", BinaryOp::Or}}); }
  ExprPtr logical_and() { return binary_level(&Parser::equality, {{"&&", BinaryOp::And}}); }
  ExprPtr equality() {
    return binary_level(&Parser::relational, {{"==", BinaryOp::Eq}, {"!=", BinaryOp::Ne}});
  }
  ExprPtr relational() {
    return binary_level(&Parser::additive, {{"<=", BinaryOp::Le},
                                            {">=", BinaryOp::Ge},
                                            {"<", BinaryOp::Lt},
                                            {">", BinaryOp::Gt}});
  }
  ExprPtr additive() {
    return binary_level(&Parser::multiplicative, {{"+", BinaryOp::Add}, {"-", BinaryOp::Sub}});
  }
  ExprPtr multiplicative() {
    return binary_level(&Parser::unary,
                        {{"*", BinaryOp::Mul}, {"/", BinaryOp::Div}, {"%", BinaryOp::Mod}});
  }

  ExprPtr unary() {
    if (peek().is_punct("!") || peek().is_punct("-")) {
      const Token& t = take();
      UnaryOp op = t.lexeme == "!" ? UnaryOp::Not : UnaryOp::Neg;
      return make_expr(t.pos, UnaryExpr{op, unary()});
    }
    return postfix();
  }

  ExprPtr postfix() {
    ExprPtr e = colon_chain();
    while (peek().is_punct(".")) {
      take();
      SourcePos pos = peek().pos;
      std::string name;
      if (peek().kind == TokenKind::Identifier || is_special_method_keyword(peek()))
        name = take().lexeme;
      else
        fail("member name");
      if (peek().is_punct("(")) {
        e = make_expr(pos, CallExpr{std::move(e), std::move(name), arguments()});
      } else {
        e = make_expr(pos, MemberExpr{std::move(e), std::move(name)});
      }
    }
    return e;
  }

  bool colon_continues() const { return peek().is_punct(":") && !peek(1).is_punct("{"); }

  bool designates_concept(const Expr& e) const {
    if (std::holds_alternative<RootExpr>(e.node)) return true;
    if (std::holds_alternative<IntrospectExpr>(e.node)) return true;
    if (auto* n = std::get_if<NameExpr>(&e.node)) return concepts_.count(n->name) > 0;
    return false;
  }

  ExprPtr colon_chain() {
    ExprPtr e;
    if (colon_continues()) {
      SourcePos pos = take().pos;
      e = make_expr(pos, ColonPrefixExpr{primary()});
    } else {
      e = primary();
    }
    while (colon_continues()) {
      SourcePos pos = take().pos;
      ExprPtr rhs = primary();
      bool lc = designates_concept(*e);
      bool rc = designates_concept(*rhs);
      if (lc && rc) throw ParseError(pos, "a colon expression needs at least one reference operand");
      ColonKind kind = lc ? ColonKind::LeftCast : rc ? ColonKind::RightCast : ColonKind::Concat;
      e = make_expr(pos, ColonExpr{kind, std::move(e), std::move(rhs)});
    }
    return e;
  }

  std::vector<ExprPtr> arguments() {
    expect_punct("(");
    std::vector<ExprPtr> args;
    if (!peek().is_punct(")")) {
      do {
        args.push_back(expression());
      } while (accept_punct(","));
    }
    expect_punct(")");
    return args;
  }

  ExprPtr primary() {
    const Token& t = peek();
    SourcePos pos = t.pos;
    switch (t.kind) {
      case TokenKind::IntLiteral:
        return make_expr(pos, LiteralExpr{LiteralKind::Int, take().lexeme});
      case TokenKind::DoubleLiteral:
        return make_expr(pos, LiteralExpr{LiteralKind::Double, take().lexeme});
      case TokenKind::StringLiteral:
        return make_expr(pos, LiteralExpr{LiteralKind::String, take().lexeme});
      case TokenKind::Identifier: {
        std::string name = take().lexeme;
        if (peek().is_punct("(")) return make_expr(pos, CallExpr{nullptr, std::move(name), arguments()});
        return make_expr(pos, NameExpr{std::move(name)});
      }
      case TokenKind::Punct:
        if (t.is_punct("(")) {
          take();
          ExprPtr inner = expression();
          expect_punct(")");
          return inner;
        }
        break;
      case TokenKind::Keyword: {
        if (t.is_keyword("true") || t.is_keyword("false"))
          return make_expr(pos, LiteralExpr{LiteralKind::Bool, take().lexeme});
        if (t.is_keyword("null")) {
          take();
          return make_expr(pos, LiteralExpr{LiteralKind::Null, "null"});
        }
        if (t.is_keyword("Root")) {
          take();
          return make_expr(pos, RootExpr{});
        }
        if (t.is_keyword("this")) {
          take();
          return make_expr(pos, ThisExpr{});
        }
        if (t.is_keyword("sub")) {
          take();
          return make_expr(pos, SubExpr{});
        }
        if (t.is_keyword("super")) {
          take();
          return make_expr(pos, SuperExpr{});
        }
        if (t.is_keyword("new")) {
          take();
          std::string name;
          if (peek().is_keyword("Object")) {
            take();
            name = "Object";
          } else {
            name = expect_identifier("concept name after 'new'");
          }
          expect_punct("(");
          expect_punct(")");
          return make_expr(pos, NewExpr{std::move(name)});
        }
        if (t.is_keyword("instanceof") || t.is_keyword("contextof") || t.is_keyword("conceptof")) {
          IntrospectOp op = t.lexeme == "instanceof"  ? IntrospectOp::InstanceOf
                            : t.lexeme == "contextof" ? IntrospectOp::ContextOf
                                                      : IntrospectOp::ConceptOf;
          take();
          expect_punct("(");
          ExprPtr operand = expression();
          expect_punct(")");
          return make_expr(pos, IntrospectExpr{op, std::move(operand)});
        }
        if (is_special_method_keyword(t)) {
          std::string name = take().lexeme;
          return make_expr(pos, CallExpr{nullptr, std::move(name), arguments()});
        }
        break;
      }
      case TokenKind::EndOfInput:
        break;
    }
    fail("expression");
  }

  const std::vector<Token>& toks_;
  size_t pos_ = 0;
  std::set<std::string> concepts_;
};

}  // namespace

SourceProgram parse(const std::vector<Token>& tokens) { return Parser(tokens).program(); }

}  // namespace copl::syntax
