#include <algorithm>
#include <functional>
#include <set>
#include <sstream>

#include "copl/model/concept_table.hpp"

namespace copl::model {

namespace {

template <class Range>
auto find_named(const Range& r, const std::string& n) -> decltype(&*r.begin()) {
  for (const auto& x : r) {
    if (x.name == n) return &x;
  }
  return nullptr;
}

const syntax::MemberDecl* find_method(const std::vector<const syntax::MemberDecl*>& ms,
                                      const std::string& n) {
  for (const auto* m : ms) {
    if (m->name == n) return m;
  }
  return nullptr;
}

}  // namespace

const FieldInfo* ConceptInfo::ref_field(const std::string& n) const { return find_named(ref_fields, n); }
const FieldInfo* ConceptInfo::obj_field(const std::string& n) const { return find_named(obj_fields, n); }
const syntax::MemberDecl* ConceptInfo::ref_method(const std::string& n) const {
  return find_method(ref_methods, n);
}
const syntax::MemberDecl* ConceptInfo::obj_method(const std::string& n) const {
  return find_method(obj_methods, n);
}

ConceptTable::ConceptTable() {
  ConceptInfo root;
  root.name = kRoot;
  root.ref_fields.push_back(FieldInfo{kHandleField, syntax::TypeRef{"", "Object"}, nullptr});
  // Root's continue/create/delete are built into the runtime.
  root.has_continue = root.has_create = root.has_delete = true;
  add(std::move(root));
}

void ConceptTable::add(ConceptInfo info) {
  std::string name = info.name;
  order_.push_back(name);
  by_name_.emplace(std::move(name), std::move(info));
}

const ConceptInfo& ConceptTable::get(const std::string& name) const {
  auto it = by_name_.find(name);
  if (it == by_name_.end())
    throw RuntimeError(RuntimeErrorKind::UnknownConcept, "unknown concept '" + name + "'");
  return it->second;
}

std::vector<std::string> ConceptTable::chain(const std::string& c) const {
  std::vector<std::string> out;
  const ConceptInfo* cur = &get(c);
  for (;;) {
    out.push_back(cur->name);
    if (!cur->parent) break;
    cur = &get(*cur->parent);
  }
  std::reverse(out.begin(), out.end());
  return out;
}

bool ConceptTable::is_subconcept_of(const std::string& s, const std::string& c) const {
  const ConceptInfo& target = get(c);
  const ConceptInfo* cur = &get(s);
  while (cur->depth > target.depth) cur = &get(*cur->parent);
  return cur->name == target.name;
}

std::optional<MethodOwner> ConceptTable::lookup_ref_method(const std::string& start,
                                                           const std::string& m) const {
  for (const auto& c : chain(start)) {
    if (const auto* d = get(c).ref_method(m)) return MethodOwner{c, d};
  }
  return std::nullopt;
}

std::optional<MethodOwner> ConceptTable::lookup_obj_method(const std::string& start,
                                                           const std::string& m) const {
  auto ch = chain(start);
  for (auto it = ch.rbegin(); it != ch.rend(); ++it) {
    if (const auto* d = get(*it).obj_method(m)) return MethodOwner{*it, d};
  }
  return std::nullopt;
}

std::string ConceptTable::dump() const {
  std::ostringstream out;
  auto join_fields = [](const std::vector<FieldInfo>& fs) {
    std::string s;
    for (const auto& f : fs) s += (s.empty() ? "" : ",") + f.name;
    return s;
  };
  auto join_methods = [](const std::vector<const syntax::MemberDecl*>& ms) {
    std::string s;
    for (const auto* m : ms) s += (s.empty() ? "" : ",") + m->name;
    return s;
  };
  for (const auto& name : order_) {
    const ConceptInfo& c = get(name);
    out << c.name;
    if (c.parent) out << " < " << *c.parent;
    std::string ref_methods = join_methods(c.ref_methods);
    if (!c.decl) ref_methods = "continue,create,delete";
    out << " [" << join_fields(c.ref_fields) << "|" << ref_methods << "|"
        << join_fields(c.obj_fields) << "|" << join_methods(c.obj_methods) << "]\n";
  }
  return out.str();
}

bool is_builtin_function(const std::string& name) {
  return name == "getUniqueString" || name == "heapSize";
}

// ---------------------------------------------------------------------------
// Semantic analysis

namespace {

using namespace syntax;

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

enum class FrameKind { TopLevel, Initializer, RefMethod, ObjMethod };

class Checker {
 public:
  Checker(const SourceProgram& prog, const ConceptTable& table) : prog_(prog), table_(table) {}

  void run() {
    for (const auto& s : prog_.static_decls) {
      const auto& d = std::get<VarDeclStmt>(s->node);
      check_value_type(d.type, s->pos);
      check_not_concept(d.name, s->pos);
      if (!statics_.insert(d.name).second)
        throw SemError(s->pos, "duplicate static variable '" + d.name + "'");
    }
    for (const auto& s : prog_.static_decls) {
      const auto& d = std::get<VarDeclStmt>(s->node);
      if (d.init) {
        enter(FrameKind::TopLevel, nullptr, nullptr);
        expr(*d.init);
      }
    }
    for (const auto& c : prog_.concepts) concept_decl(c);
    enter(FrameKind::TopLevel, nullptr, nullptr);
    for (const auto& s : prog_.statements) stmt(*s);
  }

 private:
  struct Frame {
    FrameKind kind = FrameKind::TopLevel;
    const ConceptInfo* concept_info = nullptr;
    const MemberDecl* method = nullptr;
    std::vector<std::set<std::string>> scopes;
    int loops = 0;
    int context_blocks = 0;
  };

  void enter(FrameKind kind, const ConceptInfo* c, const MemberDecl* m) {
    f_ = Frame{};
    f_.kind = kind;
    f_.concept_info = c;
    f_.method = m;
    f_.scopes.emplace_back();
  }

  bool is_type_name(const std::string& n) const {
    static const std::set<std::string> builtin = {"int", "double", "boolean", "String",
                                                  "Object", "Root", "Map"};
    return builtin.count(n) > 0 || table_.contains(n);
  }

  void check_value_type(const TypeRef& t, SourcePos pos) const {
    if (t.is_void()) throw SemError(pos, "'void' is only valid as a method return type");
    if (!is_type_name(t.name)) throw SemError(pos, "unknown type '" + t.name + "'");
    if (t.context.empty()) return;
    if (!table_.contains(t.context))
      throw SemError(pos, "context prefix '" + t.context + "' is not a concept");
    std::string target = t.name == "Object" ? kRoot : t.name;
    if (!table_.contains(target))
      throw SemError(pos, "only concept types take a context prefix");
    if (!table_.is_subconcept_of(target, t.context))
      throw SemError(pos, "'" + t.context + "' is not a context of '" + t.name + "'");
  }

  void check_not_concept(const std::string& name, SourcePos pos) const {
    if (table_.contains(name))
      throw SemError(pos, "variable '" + name + "' clashes with a concept name");
  }

  void declare(const std::string& name, SourcePos pos) {
    check_not_concept(name, pos);
    if (!f_.scopes.back().insert(name).second)
      throw SemError(pos, "variable '" + name + "' is already declared in this scope");
  }

  bool is_local(const std::string& name) const {
    for (const auto& s : f_.scopes) {
      if (s.count(name)) return true;
    }
    return false;
  }

  bool object_field_on_chain(const std::string& concept_name, const std::string& field) const {
    for (const auto& c : table_.chain(concept_name)) {
      if (table_.get(c).obj_field(field)) return true;
    }
    return false;
  }

  void concept_decl(const ConceptDecl& decl) {
    const ConceptInfo& info = table_.get(decl.name);
    for (const auto& m : decl.ref_members) member(info, m, true);
    for (const auto& m : decl.obj_members) member(info, m, false);
  }

  void member(const ConceptInfo& info, const MemberDecl& m, bool in_reference) {
    if (!m.is_method) {
      check_value_type(m.type, m.pos);
      if (m.init) {
        enter(FrameKind::Initializer, &info, nullptr);
        expr(*m.init);
      }
      return;
    }
    if (!m.type.is_void()) check_value_type(m.type, m.pos);
    enter(in_reference ? FrameKind::RefMethod : FrameKind::ObjMethod, &info, &m);
    for (const auto& p : m.params) {
      check_value_type(p.type, m.pos);
      declare(p.name, m.pos);
    }
    block(m.body);
  }

  void block(const std::vector<StmtPtr>& stmts) {
    f_.scopes.emplace_back();
    for (const auto& s : stmts) stmt(*s);
    f_.scopes.pop_back();
  }

  void stmt(const Stmt& s) {
    std::visit(overloaded{
                   [&](const VarDeclStmt& d) {
                     check_value_type(d.type, s.pos);
                     if (d.init) expr(*d.init);
                     declare(d.name, s.pos);
                   },
                   [&](const ExprStmt& e) { expr(*e.expr); },
                   [&](const PrintStmt& p) { expr(*p.value); },
                   [&](const ReturnStmt& r) {
                     if (f_.kind == FrameKind::TopLevel)
                       throw SemError(s.pos, "'return' outside a method");
                     if (r.value) expr(*r.value);
                   },
                   [&](const IfStmt& i) {
                     expr(*i.cond);
                     nested(*i.then_branch);
                     if (i.else_branch) nested(*i.else_branch);
                   },
                   [&](const ForallStmt& fl) {
                     check_value_type(fl.type, s.pos);
                     expr(*fl.source);
                     f_.scopes.emplace_back();
                     declare(fl.var, s.pos);
                     ++f_.loops;
                     nested(*fl.body);
                     --f_.loops;
                     f_.scopes.pop_back();
                   },
                   [&](const BreakStmt&) {
                     if (f_.loops == 0) throw SemError(s.pos, "'break' outside a forall loop");
                   },
                   [&](const BlockStmt& b) { block(b.stmts); },
                   [&](const ContextBlockStmt& c) {
                     expr(*c.context);
                     ++f_.context_blocks;
                     block(c.body);
                     --f_.context_blocks;
                   },
               },
               s.node);
  }

  // A branch or loop body gets its own scope even without braces.
  void nested(const Stmt& s) {
    f_.scopes.emplace_back();
    stmt(s);
    f_.scopes.pop_back();
  }

  bool in_method() const { return f_.kind == FrameKind::RefMethod || f_.kind == FrameKind::ObjMethod; }

  void name(const std::string& n, SourcePos pos) const {
    if (is_local(n) || statics_.count(n) || table_.contains(n)) return;
    if (f_.context_blocks > 0) return;  // may name a member of the context object
    if (f_.concept_info && f_.kind != FrameKind::Initializer) {
      if (f_.kind == FrameKind::RefMethod && f_.concept_info->ref_field(n)) return;
      if (object_field_on_chain(f_.concept_info->name, n)) return;
    }
    throw SemError(pos, "unknown name '" + n + "'");
  }

  void bare_call(const CallExpr& c, SourcePos pos) const {
    const std::string& m = c.method;
    if (m == "continue") throw SemError(pos, "'continue()' needs a receiver");
    if (m == "create" || m == "delete") {
      bool ok = f_.kind == FrameKind::RefMethod && f_.method && f_.method->name == m;
      if (!ok)
        throw SemError(pos, "bare '" + m + "()' is only valid inside a reference '" + m + "' method");
      return;
    }
    if (is_builtin_function(m)) return;
    if (f_.context_blocks > 0) return;
    if (in_method() && table_.lookup_obj_method(f_.concept_info->name, m)) return;
    throw SemError(pos, "unknown method '" + m + "'");
  }

  void member_of_this(const std::string& field, SourcePos pos) const {
    if (!f_.concept_info->ref_field(field))
      throw SemError(pos, "'" + f_.concept_info->name + "' has no reference field '" + field + "'");
  }

  void expr(const Expr& e) {
    std::visit(
        overloaded{
            [&](const LiteralExpr&) {},
            [&](const NameExpr& n) { name(n.name, e.pos); },
            [&](const RootExpr&) {},
            [&](const ThisExpr&) {
              if (!in_method()) throw SemError(e.pos, "'this' outside a method");
            },
            [&](const SubExpr&) {
              if (f_.kind != FrameKind::RefMethod)
                throw SemError(e.pos, "'sub' is only valid inside a reference method");
            },
            [&](const SuperExpr&) {
              if (!in_method()) throw SemError(e.pos, "'super' outside a method");
            },
            [&](const MemberExpr& m) {
              if (std::holds_alternative<ThisExpr>(m.object->node) && in_method()) {
                member_of_this(m.member, e.pos);
                return;
              }
              expr(*m.object);
            },
            [&](const CallExpr& c) {
              if (c.receiver)
                expr(*c.receiver);
              else
                bare_call(c, e.pos);
              for (const auto& a : c.args) expr(*a);
            },
            [&](const NewExpr& n) {
              if (n.concept_name == "Object" || n.concept_name == "Map") return;
              if (!table_.contains(n.concept_name))
                throw SemError(e.pos, "unknown concept '" + n.concept_name + "'");
            },
            [&](const ColonExpr& c) {
              expr(*c.left);
              expr(*c.right);
            },
            [&](const ColonPrefixExpr& c) {
              if (f_.context_blocks == 0)
                throw SemError(e.pos, "':' prefix is only valid inside a context block");
              expr(*c.local);
            },
            [&](const IntrospectExpr& i) { expr(*i.operand); },
            [&](const UnaryExpr& u) { expr(*u.operand); },
            [&](const BinaryExpr& b) {
              expr(*b.lhs);
              expr(*b.rhs);
            },
            [&](const AssignExpr& a) {
              expr(*a.target);
              expr(*a.value);
            },
        },
        e.node);
  }

  const SourceProgram& prog_;
  const ConceptTable& table_;
  std::set<std::string> statics_;
  Frame f_;
};

ConceptInfo build_info(const ConceptDecl& decl) {
  ConceptInfo info;
  info.name = decl.name;
  info.parent = decl.parent.value_or(kRoot);
  info.decl = &decl;
  auto fill = [&](const std::vector<MemberDecl>& members, std::vector<FieldInfo>& fields,
                  std::vector<const MemberDecl*>& methods, const char* what) {
    std::set<std::string> seen;
    for (const auto& m : members) {
      if (!seen.insert(m.name).second)
        throw SemError(m.pos, "duplicate member '" + m.name + "' in " + what + " of '" +
                                  decl.name + "'");
      if (m.is_method)
        methods.push_back(&m);
      else
        fields.push_back(FieldInfo{m.name, m.type, m.init.get()});
    }
  };
  fill(decl.ref_members, info.ref_fields, info.ref_methods, "reference class");
  fill(decl.obj_members, info.obj_fields, info.obj_methods, "object class");
  if (info.obj_method("continue"))
    throw SemError(info.obj_method("continue")->pos,
                   "'continue' cannot be declared in an object class");
  info.has_continue = info.ref_method("continue") != nullptr;
  info.has_create = info.ref_method("create") != nullptr;
  info.has_delete = info.ref_method("delete") != nullptr;
  return info;
}

}  // namespace

ConceptTable analyze(const SourceProgram& program) {
  std::map<std::string, const ConceptDecl*> decls;
  for (const auto& c : program.concepts) {
    if (!decls.emplace(c.name, &c).second)
      throw SemError(c.pos, "duplicate concept '" + c.name + "'");
  }

  ConceptTable table;
  // Add concepts parents-first; `state` 1 = in progress, 2 = done.
  std::map<std::string, int> state;
  std::function<void(const ConceptDecl&)> visit = [&](const ConceptDecl& c) {
    int& st = state[c.name];
    if (st == 2) return;
    if (st == 1) throw SemError(c.pos, "inclusion cycle through concept '" + c.name + "'");
    st = 1;
    std::string parent = c.parent.value_or(kRoot);
    if (parent != kRoot) {
      auto it = decls.find(parent);
      if (it == decls.end()) throw SemError(c.pos, "unknown parent concept '" + parent + "'");
      visit(*it->second);
    }
    ConceptInfo info = build_info(c);
    info.depth = table.depth(parent) + 1;
    table.add(std::move(info));
    state[c.name] = 2;
  };
  for (const auto& c : program.concepts) visit(c);

  Checker(program, table).run();
  return table;
}

}  // namespace copl::model
