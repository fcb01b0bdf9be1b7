#include <filesystem>

#include <gtest/gtest.h>

#include "copl/syntax/parser.hpp"
#include "support.hpp"

namespace copl::syntax {
namespace {

using testing::corpus_dir;
using testing::read_text;

TEST(Tokenize, ConceptHeader) {
  auto toks = tokenize("concept A in B");
  ASSERT_EQ(toks.size(), 5u);
  EXPECT_TRUE(toks[0].is_keyword("concept"));
  EXPECT_TRUE(toks[1].is(TokenKind::Identifier, "A"));
  EXPECT_TRUE(toks[2].is_keyword("in"));
  EXPECT_TRUE(toks[3].is(TokenKind::Identifier, "B"));
  EXPECT_EQ(toks[4].kind, TokenKind::EndOfInput);
}

TEST(Tokenize, MethodCall) {
  auto toks = tokenize("account.getBalance();");
  ASSERT_EQ(toks.size(), 7u);
  EXPECT_TRUE(toks[0].is(TokenKind::Identifier, "account"));
  EXPECT_TRUE(toks[1].is_punct("."));
  EXPECT_TRUE(toks[2].is(TokenKind::Identifier, "getBalance"));
  EXPECT_TRUE(toks[3].is_punct("("));
  EXPECT_TRUE(toks[4].is_punct(")"));
  EXPECT_TRUE(toks[5].is_punct(";"));
  EXPECT_EQ(toks[6].kind, TokenKind::EndOfInput);
}

TEST(Tokenize, UnterminatedCommentIsLexError) {
  try {
    tokenize("/* open");
    FAIL() << "expected LexError";
  } catch (const LexError& e) {
    EXPECT_EQ(e.pos().line, 1);
  }
}

TEST(Tokenize, UnterminatedStringAndIllegalCharacter) {
  EXPECT_THROW(tokenize("print(\"abc"), LexError);
  EXPECT_THROW(tokenize("int x = 1 # 2;"), LexError);
}

TEST(Tokenize, KeywordSetIsExact) {
  const char* expected[] = {"concept",    "reference", "class",     "in",     "this",    "sub",     "super",
                            "continue",   "create",    "delete",    "new",    "return",  "if",      "else",
                            "forall",     "break",     "null",      "true",   "false",   "static",  "print",
                            "instanceof", "contextof", "conceptof", "Root",   "Object",  "void",    "int",
                            "double",     "boolean",   "String"};
  EXPECT_EQ(keywords().size(), std::size(expected));
  for (const char* k : expected) EXPECT_TRUE(is_keyword(k)) << k;
  EXPECT_FALSE(is_keyword("Map"));
}

TEST(Tokenize, CommentsSkippedAndPositionsIncrease) {
  auto toks = tokenize("// line\nint /* x */ y = 3;\n  print(y);");
  EXPECT_TRUE(toks[0].is_keyword("int"));
  EXPECT_EQ(toks[0].pos, (SourcePos{2, 1}));
  for (size_t i = 1; i + 1 < toks.size(); ++i) EXPECT_LT(toks[i - 1].pos, toks[i].pos);
}

TEST(Tokenize, PositionsIncreaseOverCorpus) {
  for (const auto& entry : std::filesystem::directory_iterator(corpus_dir())) {
    if (entry.path().extension() != ".cop") continue;
    auto toks = tokenize(read_text(entry.path().string()));
    for (size_t i = 1; i + 1 < toks.size(); ++i)
      ASSERT_LT(toks[i - 1].pos, toks[i].pos) << entry.path() << " token " << i;
  }
}

TEST(Parse, AccountDefinition) {
  const char* src = R"(concept Account
  reference { // Reference class
    String accountNumber; // Object identifier
  }
  class { // Object class
    double balance = 0;
  }

Account account = new Account();
doSomething(account);
)";
  SourceProgram p = parse_source(src);
  ASSERT_EQ(p.concepts.size(), 1u);
  EXPECT_EQ(p.concepts[0].name, "Account");
  EXPECT_FALSE(p.concepts[0].parent.has_value());
  EXPECT_EQ(p.concepts[0].ref_members.size(), 1u);
  EXPECT_EQ(p.concepts[0].obj_members.size(), 1u);
  EXPECT_EQ(p.statements.size(), 2u);
}

TEST(Parse, MinimalConceptWithParent) {
  SourceProgram p = parse_source("concept C in B reference { } class { }");
  ASSERT_EQ(p.concepts.size(), 1u);
  EXPECT_EQ(p.concepts[0].name, "C");
  EXPECT_EQ(p.concepts[0].parent, "B");
  EXPECT_TRUE(p.concepts[0].ref_members.empty());
  EXPECT_TRUE(p.concepts[0].obj_members.empty());
}

TEST(Parse, BlocksMayBeAbsent) {
  SourceProgram p = parse_source("concept A class { int x; }\nconcept B in A");
  ASSERT_EQ(p.concepts.size(), 2u);
  EXPECT_TRUE(p.concepts[0].ref_members.empty());
  EXPECT_EQ(p.concepts[0].obj_members.size(), 1u);
}

TEST(Parse, ConceptofOperandIsLeftCast) {
  SourceProgram p = parse_source("tail = conceptof(var):var;");
  ASSERT_EQ(p.statements.size(), 1u);
  const auto& es = std::get<ExprStmt>(p.statements[0]->node);
  const auto& assign = std::get<AssignExpr>(es.expr->node);
  const auto& colon = std::get<ColonExpr>(assign.value->node);
  EXPECT_EQ(colon.kind, ColonKind::LeftCast);
  const auto& intro = std::get<IntrospectExpr>(colon.left->node);
  EXPECT_EQ(intro.op, IntrospectOp::ConceptOf);
  EXPECT_EQ(std::get<NameExpr>(colon.right->node).name, "var");
}

TEST(Parse, ColonClassification) {
  SourceProgram p = parse_source(
      "concept A reference { } class { }\nconcept B in A\n"
      "x = A:y; x = y:B; x = y:z; x = Root:y; x = y:instanceof(z);");
  std::vector<ColonKind> kinds;
  for (const auto& s : p.statements) {
    const auto& a = std::get<AssignExpr>(std::get<ExprStmt>(s->node).expr->node);
    kinds.push_back(std::get<ColonExpr>(a.value->node).kind);
  }
  EXPECT_EQ(kinds, (std::vector<ColonKind>{ColonKind::LeftCast, ColonKind::RightCast, ColonKind::Concat,
                                           ColonKind::LeftCast, ColonKind::RightCast}));
}

TEST(Parse, ColonIsLeftAssociative) {
  SourceProgram p = parse_source("concept A reference { } class { }\nconcept C in A\nx = A : b : C;");
  const auto& a = std::get<AssignExpr>(std::get<ExprStmt>(p.statements[0]->node).expr->node);
  const auto& outer = std::get<ColonExpr>(a.value->node);
  EXPECT_EQ(outer.kind, ColonKind::RightCast);
  const auto& inner = std::get<ColonExpr>(outer.left->node);
  EXPECT_EQ(inner.kind, ColonKind::LeftCast);
  EXPECT_EQ(std::get<NameExpr>(inner.right->node).name, "b");
}

TEST(Parse, ContextBlockAndColonPrefix) {
  SourceProgram p = parse_source("ctx : { someMethod(); :localVar.action(); }");
  ASSERT_EQ(p.statements.size(), 1u);
  const auto& block = std::get<ContextBlockStmt>(p.statements[0]->node);
  ASSERT_EQ(block.body.size(), 2u);
  const auto& call = std::get<CallExpr>(std::get<ExprStmt>(block.body[1]->node).expr->node);
  EXPECT_EQ(call.method, "action");
  EXPECT_TRUE(std::holds_alternative<ColonPrefixExpr>(call.receiver->node));
}

TEST(Parse, StaticDeclarationsAreSeparate) {
  SourceProgram p = parse_source("static Map banks = new Map();\nprint(1);");
  EXPECT_EQ(p.static_decls.size(), 1u);
  EXPECT_EQ(p.statements.size(), 1u);
  EXPECT_TRUE(std::get<VarDeclStmt>(p.static_decls[0]->node).is_static);
}

TEST(Parse, ErrorsNameExpectedAndFound) {
  try {
    parse_source("concept A reference { int x } class { }");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    std::string msg = e.what();
    EXPECT_NE(msg.find("expected"), std::string::npos) << msg;
    EXPECT_NE(msg.find("found"), std::string::npos) << msg;
    EXPECT_EQ(e.pos().line, 1);
  }
  EXPECT_THROW(parse_source("print(1"), ParseError);
  EXPECT_THROW(parse_source("concept"), ParseError);
}

TEST(Parse, NodesCarryPositions) {
  SourceProgram p = parse_source("int x = 1;\n  print(x + 2);");
  EXPECT_EQ(p.statements[1]->pos, (SourcePos{2, 3}));
  const auto& pr = std::get<PrintStmt>(p.statements[1]->node);
  EXPECT_EQ(pr.value->pos.line, 2);
}

TEST(PrettyPrint, EmptyProgram) { EXPECT_EQ(pretty_print(parse_source("")), ""); }

TEST(PrettyPrint, CanonicalConceptLayout) {
  EXPECT_EQ(pretty_print(parse_source("concept A reference { } class { }")),
            "concept A\n  reference { }\n  class { }\n");
}

TEST(PrettyPrint, ExpressionPrecedence) {
  SourceProgram p = parse_source("x = (1 + 2) * 3 - -y; z = !(a && b) || c;");
  auto expr_text = [&](size_t i) {
    return pretty_print(*std::get<ExprStmt>(p.statements[i]->node).expr);
  };
  EXPECT_EQ(expr_text(0), "x = (1 + 2) * 3 - -y");
  EXPECT_EQ(expr_text(1), "z = !(a && b) || c");
}

TEST(PrettyPrint, RoundTripOverCorpus) {
  int n = 0;
  for (const auto& entry : std::filesystem::directory_iterator(corpus_dir())) {
    if (entry.path().extension() != ".cop") continue;
    SourceProgram first = parse_source(read_text(entry.path().string()));
    std::string printed = pretty_print(first);
    SourceProgram second = parse_source(printed);
    EXPECT_TRUE(structurally_equal(first, second)) << entry.path() << "\n" << printed;
    EXPECT_EQ(pretty_print(second), printed) << entry.path();
    ++n;
  }
  EXPECT_GT(n, 10);
}

TEST(DumpAst, ShowsPositionsOnDemand) {
  SourceProgram p = parse_source("concept A reference { int f; } class { }\nprint(1);");
  std::string with = dump_ast(p);
  std::string without = dump_ast(p, false);
  EXPECT_NE(with.find("Concept A @1:1"), std::string::npos) << with;
  EXPECT_EQ(without.find('@'), std::string::npos) << without;
  EXPECT_NE(without.find("Field int f"), std::string::npos) << without;
  EXPECT_NE(without.find("Print"), std::string::npos) << without;
}

TEST(DumpAst, StructuralEqualityIgnoresPositions) {
  EXPECT_TRUE(structurally_equal(parse_source("print(1);"), parse_source("\n\n   print( 1 ) ;")));
  EXPECT_FALSE(structurally_equal(parse_source("print(1);"), parse_source("print(2);")));
}

}  // namespace
}  // namespace copl::syntax
