#pragma once

#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "copl/error.hpp"

namespace copl::syntax {

struct Expr;
struct Stmt;
using ExprPtr = std::unique_ptr<Expr>;
using StmtPtr = std::unique_ptr<Stmt>;

/// A declared type, optionally prefixed by a context concept
/// (`MyContext:MyConcept v;`). `context` is empty when no prefix was written.
struct TypeRef {
  std::string context;
  std::string name;

  bool is_void() const { return name == "void"; }
};

enum class LiteralKind { Int, Double, Bool, String, Null };

struct LiteralExpr {
  LiteralKind kind;
  std::string text;  // source digits, "true"/"false", or decoded string contents
};

// An identifier: local, field, static or concept name, resolved at run time.
struct NameExpr {
  std::string name;
};

struct RootExpr {};
struct ThisExpr {};
struct SubExpr {};
struct SuperExpr {};

struct MemberExpr {
  ExprPtr object;
  std::string member;
};

// `receiver` is null for a bare call `m(args)`.
struct CallExpr {
  ExprPtr receiver;
  std::string method;
  std::vector<ExprPtr> args;
};

struct NewExpr {
  std::string concept_name;
};

enum class ColonKind { LeftCast, RightCast, Concat };

struct ColonExpr {
  ColonKind kind;
  ExprPtr left;
  ExprPtr right;
};

// `:localVar` inside a context block.
struct ColonPrefixExpr {
  ExprPtr local;
};

enum class IntrospectOp { InstanceOf, ContextOf, ConceptOf };

struct IntrospectExpr {
  IntrospectOp op;
  ExprPtr operand;
};

enum class UnaryOp { Not, Neg };

struct UnaryExpr {
  UnaryOp op;
  ExprPtr operand;
};

enum class BinaryOp { Or, And, Eq, Ne, Lt, Le, Gt, Ge, Add, Sub, Mul, Div, Mod };

struct BinaryExpr {
  BinaryOp op;
  ExprPtr lhs;
  ExprPtr rhs;
};

struct AssignExpr {
  ExprPtr target;
  ExprPtr value;
};

struct Expr {
  SourcePos pos;
  std::variant<LiteralExpr, NameExpr, RootExpr, ThisExpr, SubExpr, SuperExpr, MemberExpr,
               CallExpr, NewExpr, ColonExpr, ColonPrefixExpr, IntrospectExpr, UnaryExpr,
               BinaryExpr, AssignExpr>
      node;
};

struct VarDeclStmt {
  TypeRef type;
  std::string name;
  ExprPtr init;  // may be null
  bool is_static = false;
};

struct ExprStmt {
  ExprPtr expr;
};

struct PrintStmt {
  ExprPtr value;
};

struct ReturnStmt {
  ExprPtr value;  // may be null
};

struct IfStmt {
  ExprPtr cond;
  StmtPtr then_branch;
  StmtPtr else_branch;  // may be null
};

struct ForallStmt {
  TypeRef type;
  std::string var;
  ExprPtr source;
  StmtPtr body;
};

struct BreakStmt {};

struct BlockStmt {
  std::vector<StmtPtr> stmts;
};

struct ContextBlockStmt {
  ExprPtr context;
  std::vector<StmtPtr> body;
};

struct Stmt {
  SourcePos pos;
  std::variant<VarDeclStmt, ExprStmt, PrintStmt, ReturnStmt, IfStmt, ForallStmt, BreakStmt,
               BlockStmt, ContextBlockStmt>
      node;
};

struct Param {
  TypeRef type;
  std::string name;
};

/// Field or method of a reference class or object class.
struct MemberDecl {
  SourcePos pos;
  TypeRef type;  // field type or method return type
  std::string name;
  bool is_method = false;
  ExprPtr init;                // fields only, may be null
  std::vector<Param> params;   // methods only
  std::vector<StmtPtr> body;   // methods only
};

struct ConceptDecl {
  SourcePos pos;
  std::string name;
  std::optional<std::string> parent;
  std::vector<MemberDecl> ref_members;
  std::vector<MemberDecl> obj_members;
};

struct SourceProgram {
  std::vector<ConceptDecl> concepts;
  std::vector<StmtPtr> statements;
  std::vector<StmtPtr> static_decls;  // each holds a VarDeclStmt with is_static set
};

}  // namespace copl::syntax
