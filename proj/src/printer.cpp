#include <sstream>

#include "copl/syntax/parser.hpp"

namespace copl::syntax {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

const char* binary_text(BinaryOp op) {
  switch (op) {
    case BinaryOp::Or: return "||";
    case BinaryOp::And: return "&&";
    case BinaryOp::Eq: return "==";
    case BinaryOp::Ne: return "!=";
    case BinaryOp::Lt: return "<";
    case BinaryOp::Le: return "<=";
    case BinaryOp::Gt: return ">";
    case BinaryOp::Ge: return ">=";
    case BinaryOp::Add: return "+";
    case BinaryOp::Sub: return "-";
    case BinaryOp::Mul: return "*";
    case BinaryOp::Div: return "/";
    case BinaryOp::Mod: return "%";
  }
  return "?";
}

int binary_prec(BinaryOp op) {
  switch (op) {
    case BinaryOp::Or: return 2;
    case BinaryOp::And: return 3;
    case BinaryOp::Eq:
    case BinaryOp::Ne: return 4;
    case BinaryOp::Lt:
    case BinaryOp::Le:
    case BinaryOp::Gt:
    case BinaryOp::Ge: return 5;
    case BinaryOp::Add:
    case BinaryOp::Sub: return 6;
    case BinaryOp::Mul:
    case BinaryOp::Div:
    case BinaryOp::Mod: return 7;
  }
  return 0;
}

const char* introspect_text(IntrospectOp op) {
  switch (op) {
    case IntrospectOp::InstanceOf: return "instanceof";
    case IntrospectOp::ContextOf: return "contextof";
    case IntrospectOp::ConceptOf: return "conceptof";
  }
  return "?";
}

const char* colon_text(ColonKind k) {
  switch (k) {
    case ColonKind::LeftCast: return "LeftCast";
    case ColonKind::RightCast: return "RightCast";
    case ColonKind::Concat: return "Concat";
  }
  return "?";
}

// Binding strength of the grammar levels: assignment 1, binary 2..7,
// unary 8, postfix 9, colon chain 10, primary 11.
int precedence(const Expr& e) {
  return std::visit(overloaded{
                        [](const AssignExpr&) { return 1; },
                        [](const BinaryExpr& b) { return binary_prec(b.op); },
                        [](const UnaryExpr&) { return 8; },
                        [](const MemberExpr&) { return 9; },
                        [](const CallExpr& c) { return c.receiver ? 9 : 11; },
                        [](const ColonExpr&) { return 10; },
                        [](const ColonPrefixExpr&) { return 10; },
                        [](const auto&) { return 11; },
                    },
                    e.node);
}

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default: out += c;
    }
  }
  return out + "\"";
}

std::string type_text(const TypeRef& t) {
  return t.context.empty() ? t.name : t.context + ":" + t.name;
}

std::string expr_text(const Expr& e, int min_prec);

std::string args_text(const std::vector<ExprPtr>& args) {
  std::string out = "(";
  for (size_t i = 0; i < args.size(); ++i) {
    if (i) out += ", ";
    out += expr_text(*args[i], 1);
  }
  return out + ")";
}

std::string expr_text(const Expr& e, int min_prec) {
  std::string s = std::visit(
      overloaded{
          [](const LiteralExpr& l) -> std::string {
            return l.kind == LiteralKind::String ? quote(l.text) : l.text;
          },
          [](const NameExpr& n) -> std::string { return n.name; },
          [](const RootExpr&) -> std::string { return "Root"; },
          [](const ThisExpr&) -> std::string { return "this"; },
          [](const SubExpr&) -> std::string { return "sub"; },
          [](const SuperExpr&) -> std::string { return "super"; },
          [](const MemberExpr& m) -> std::string { return expr_text(*m.object, 9) + "." + m.member; },
          [](const CallExpr& c) -> std::string {
            std::string head = c.receiver ? expr_text(*c.receiver, 9) + "." : "";
            return head + c.method + args_text(c.args);
          },
          [](const NewExpr& n) -> std::string { return "new " + n.concept_name + "()"; },
          [](const ColonExpr& c) -> std::string {
            return expr_text(*c.left, 10) + " : " + expr_text(*c.right, 11);
          },
          [](const ColonPrefixExpr& c) -> std::string { return ":" + expr_text(*c.local, 11); },
          [](const IntrospectExpr& i) -> std::string {
            return std::string(introspect_text(i.op)) + "(" + expr_text(*i.operand, 1) + ")";
          },
          [](const UnaryExpr& u) -> std::string {
            return std::string(u.op == UnaryOp::Not ? "!" : "-") + expr_text(*u.operand, 8);
          },
          [](const BinaryExpr& b) -> std::string {
            int p = binary_prec(b.op);
            return expr_text(*b.lhs, p) + " " + binary_text(b.op) + " " + expr_text(*b.rhs, p + 1);
          },
          [](const AssignExpr& a) -> std::string {
            return expr_text(*a.target, 2) + " = " + expr_text(*a.value, 1);
          },
      },
      e.node);
  if (precedence(e) < min_prec) return "(" + s + ")";
  return s;
}

class PrettyPrinter {
 public:
  std::string program(const SourceProgram& p) {
    bool first = true;
    auto separate = [&] {
      if (!first) out_ << "\n";
      first = false;
    };
    if (!p.static_decls.empty()) {
      separate();
      for (const auto& s : p.static_decls) stmt(*s, 0);
    }
    for (const auto& c : p.concepts) {
      separate();
      concept_decl(c);
    }
    if (!p.statements.empty()) {
      separate();
      for (const auto& s : p.statements) stmt(*s, 0);
    }
    return out_.str();
  }

 private:
  void indent(int level) { out_ << std::string(static_cast<size_t>(level) * 2, ' '); }

  void concept_decl(const ConceptDecl& c) {
    out_ << "concept " << c.name;
    if (c.parent) out_ << " in " << *c.parent;
    out_ << "\n";
    member_block("reference", c.ref_members);
    out_ << "\n";
    member_block("class", c.obj_members);
    out_ << "\n";
  }

  void member_block(const char* keyword, const std::vector<MemberDecl>& members) {
    indent(1);
    out_ << keyword << " {";
    if (members.empty()) {
      out_ << " }";
      return;
    }
    out_ << "\n";
    for (const auto& m : members) member(m);
    indent(1);
    out_ << "}";
  }

  void member(const MemberDecl& m) {
    indent(2);
    out_ << type_text(m.type) << " " << m.name;
    if (!m.is_method) {
      if (m.init) out_ << " = " << expr_text(*m.init, 1);
      out_ << ";\n";
      return;
    }
    out_ << "(";
    for (size_t i = 0; i < m.params.size(); ++i) {
      if (i) out_ << ", ";
      out_ << type_text(m.params[i].type) << " " << m.params[i].name;
    }
    out_ << ") ";
    body(m.body, 2);
    out_ << "\n";
  }

  // Emits `{ ... }` starting at the current column; closing brace at `level`.
  void body(const std::vector<StmtPtr>& stmts, int level) {
    if (stmts.empty()) {
      out_ << "{ }";
      return;
    }
    out_ << "{\n";
    for (const auto& s : stmts) stmt(*s, level + 1);
    indent(level);
    out_ << "}";
  }

  // A nested statement after `if (...)`, `else` or `forall (...)`.
  void child(const Stmt& s, int level) {
    if (auto* b = std::get_if<BlockStmt>(&s.node)) {
      out_ << " ";
      body(b->stmts, level);
    } else {
      out_ << "\n";
      stmt_inline(s, level + 1);
    }
  }

  void stmt(const Stmt& s, int level) {
    stmt_inline(s, level);
    out_ << "\n";
  }

  void stmt_inline(const Stmt& s, int level) {
    indent(level);
    std::visit(overloaded{
                   [&](const VarDeclStmt& d) {
                     if (d.is_static) out_ << "static ";
                     out_ << type_text(d.type) << " " << d.name;
                     if (d.init) out_ << " = " << expr_text(*d.init, 1);
                     out_ << ";";
                   },
                   [&](const ExprStmt& e) { out_ << expr_text(*e.expr, 1) << ";"; },
                   [&](const PrintStmt& p) { out_ << "print(" << expr_text(*p.value, 1) << ");"; },
                   [&](const ReturnStmt& r) {
                     out_ << "return";
                     if (r.value) out_ << " " << expr_text(*r.value, 1);
                     out_ << ";";
                   },
                   [&](const IfStmt& i) {
                     out_ << "if (" << expr_text(*i.cond, 1) << ")";
                     child(*i.then_branch, level);
                     if (i.else_branch) {
                       if (std::holds_alternative<BlockStmt>(i.then_branch->node)) {
                         out_ << " else";
                       } else {
                         out_ << "\n";
                         indent(level);
                         out_ << "else";
                       }
                       child(*i.else_branch, level);
                     }
                   },
                   [&](const ForallStmt& f) {
                     out_ << "forall (" << type_text(f.type) << " " << f.var << " in "
                          << expr_text(*f.source, 1) << ")";
                     child(*f.body, level);
                   },
                   [&](const BreakStmt&) { out_ << "break;"; },
                   [&](const BlockStmt& b) { body(b.stmts, level); },
                   [&](const ContextBlockStmt& c) {
                     // The context must not itself end in a colon chain that
                     // would swallow the block's colon.
                     out_ << expr_text(*c.context, 9) << " : ";
                     body(c.body, level);
                   },
               },
               s.node);
  }

  std::ostringstream out_;
};

class AstDumper {
 public:
  explicit AstDumper(bool positions) : positions_(positions) {}

  std::string program(const SourceProgram& p) {
    line(0, "Program");
    for (const auto& s : p.static_decls) stmt(*s, 1);
    for (const auto& c : p.concepts) concept_decl(c, 1);
    for (const auto& s : p.statements) stmt(*s, 1);
    return out_.str();
  }

 private:
  void line(int level, const std::string& text, const SourcePos* pos = nullptr) {
    out_ << std::string(static_cast<size_t>(level) * 2, ' ') << text;
    if (positions_ && pos) out_ << " @" << to_string(*pos);
    out_ << "\n";
  }

  void concept_decl(const ConceptDecl& c, int level) {
    line(level, "Concept " + c.name + (c.parent ? " in " + *c.parent : ""), &c.pos);
    line(level + 1, "Reference");
    for (const auto& m : c.ref_members) member(m, level + 2);
    line(level + 1, "Class");
    for (const auto& m : c.obj_members) member(m, level + 2);
  }

  void member(const MemberDecl& m, int level) {
    if (!m.is_method) {
      line(level, "Field " + type_text(m.type) + " " + m.name, &m.pos);
      if (m.init) expr(*m.init, level + 1);
      return;
    }
    std::string sig = "Method " + type_text(m.type) + " " + m.name + "(";
    for (size_t i = 0; i < m.params.size(); ++i) {
      if (i) sig += ", ";
      sig += type_text(m.params[i].type) + " " + m.params[i].name;
    }
    line(level, sig + ")", &m.pos);
    for (const auto& s : m.body) stmt(*s, level + 1);
  }

  void stmt(const Stmt& s, int level) {
    std::visit(overloaded{
                   [&](const VarDeclStmt& d) {
                     line(level, std::string(d.is_static ? "StaticDecl " : "VarDecl ") +
                                     type_text(d.type) + " " + d.name,
                          &s.pos);
                     if (d.init) expr(*d.init, level + 1);
                   },
                   [&](const ExprStmt& e) {
                     line(level, "ExprStmt", &s.pos);
                     expr(*e.expr, level + 1);
                   },
                   [&](const PrintStmt& p) {
                     line(level, "Print", &s.pos);
                     expr(*p.value, level + 1);
                   },
                   [&](const ReturnStmt& r) {
                     line(level, "Return", &s.pos);
                     if (r.value) expr(*r.value, level + 1);
                   },
                   [&](const IfStmt& i) {
                     line(level, i.else_branch ? "IfElse" : "If", &s.pos);
                     expr(*i.cond, level + 1);
                     stmt(*i.then_branch, level + 1);
                     if (i.else_branch) stmt(*i.else_branch, level + 1);
                   },
                   [&](const ForallStmt& f) {
                     line(level, "Forall " + type_text(f.type) + " " + f.var, &s.pos);
                     expr(*f.source, level + 1);
                     stmt(*f.body, level + 1);
                   },
                   [&](const BreakStmt&) { line(level, "Break", &s.pos); },
                   [&](const BlockStmt& b) {
                     line(level, "Block", &s.pos);
                     for (const auto& c : b.stmts) stmt(*c, level + 1);
                   },
                   [&](const ContextBlockStmt& c) {
                     line(level, "ContextBlock", &s.pos);
                     expr(*c.context, level + 1);
                     line(level + 1, "Body");
                     for (const auto& b : c.body) stmt(*b, level + 2);
                   },
               },
               s.node);
  }

  void expr(const Expr& e, int level) {
    std::visit(
        overloaded{
            [&](const LiteralExpr& l) {
              static const char* names[] = {"Int", "Double", "Bool", "String", "Null"};
              line(level,
                   std::string("Literal ") + names[static_cast<int>(l.kind)] + " " +
                       (l.kind == LiteralKind::String ? quote(l.text) : l.text),
                   &e.pos);
            },
            [&](const NameExpr& n) { line(level, "Name " + n.name, &e.pos); },
            [&](const RootExpr&) { line(level, "Root", &e.pos); },
            [&](const ThisExpr&) { line(level, "This", &e.pos); },
            [&](const SubExpr&) { line(level, "Sub", &e.pos); },
            [&](const SuperExpr&) { line(level, "Super", &e.pos); },
            [&](const MemberExpr& m) {
              line(level, "Member ." + m.member, &e.pos);
              expr(*m.object, level + 1);
            },
            [&](const CallExpr& c) {
              line(level, std::string(c.receiver ? "Call ." : "BareCall ") + c.method, &e.pos);
              if (c.receiver) expr(*c.receiver, level + 1);
              for (const auto& a : c.args) expr(*a, level + 1);
            },
            [&](const NewExpr& n) { line(level, "New " + n.concept_name, &e.pos); },
            [&](const ColonExpr& c) {
              line(level, colon_text(c.kind), &e.pos);
              expr(*c.left, level + 1);
              expr(*c.right, level + 1);
            },
            [&](const ColonPrefixExpr& c) {
              line(level, "ColonPrefix", &e.pos);
              expr(*c.local, level + 1);
            },
            [&](const IntrospectExpr& i) {
              line(level, std::string("Introspect ") + introspect_text(i.op), &e.pos);
              expr(*i.operand, level + 1);
            },
            [&](const UnaryExpr& u) {
              line(level, std::string("Unary ") + (u.op == UnaryOp::Not ? "!" : "-"), &e.pos);
              expr(*u.operand, level + 1);
            },
            [&](const BinaryExpr& b) {
              line(level, std::string("Binary ") + binary_text(b.op), &e.pos);
              expr(*b.lhs, level + 1);
              expr(*b.rhs, level + 1);
            },
            [&](const AssignExpr& a) {
              line(level, "Assign", &e.pos);
              expr(*a.target, level + 1);
              expr(*a.value, level + 1);
            },
        },
        e.node);
  }

  bool positions_;
  std::ostringstream out_;
};

}  // namespace

std::string pretty_print(const SourceProgram& program) { return PrettyPrinter().program(program); }

std::string pretty_print(const Expr& expr) { return expr_text(expr, 1); }

std::string dump_ast(const SourceProgram& program, bool with_positions) {
  return AstDumper(with_positions).program(program);
}

bool structurally_equal(const SourceProgram& a, const SourceProgram& b) {
  return dump_ast(a, false) == dump_ast(b, false);
}

}  // namespace copl::syntax
