#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "copl/syntax/ast.hpp"

namespace copl::model {

inline constexpr const char* kRoot = "Root";
// Hidden reference field of Root holding the native handle.
inline constexpr const char* kHandleField = "handle";

struct FieldInfo {
  std::string name;
  syntax::TypeRef type;
  const syntax::Expr* init = nullptr;
};

struct ConceptInfo {
  std::string name;
  std::optional<std::string> parent;  // empty only for Root
  int depth = 0;
  std::vector<FieldInfo> ref_fields;
  std::vector<const syntax::MemberDecl*> ref_methods;
  std::vector<FieldInfo> obj_fields;
  std::vector<const syntax::MemberDecl*> obj_methods;
  bool has_continue = false;
  bool has_create = false;
  bool has_delete = false;
  const syntax::ConceptDecl* decl = nullptr;  // null for Root

  const FieldInfo* ref_field(const std::string& n) const;
  const FieldInfo* obj_field(const std::string& n) const;
  const syntax::MemberDecl* ref_method(const std::string& n) const;
  const syntax::MemberDecl* obj_method(const std::string& n) const;
};

/// Result of a method lookup along an inclusion chain.
struct MethodOwner {
  std::string concept_name;
  const syntax::MemberDecl* decl = nullptr;
};

/// The inclusion hierarchy of one program. Member declarations point into
/// the SourceProgram it was built from, which must outlive the table.
class ConceptTable {
 public:
  ConceptTable();

  bool contains(const std::string& name) const { return by_name_.count(name) > 0; }
  // Throws RuntimeError(UnknownConcept).
  const ConceptInfo& get(const std::string& name) const;

  int depth(const std::string& name) const { return get(name).depth; }
  const std::optional<std::string>& parent(const std::string& name) const {
    return get(name).parent;
  }
  // [Root, ..., parent(c), c]
  std::vector<std::string> chain(const std::string& c) const;
  // Reflexive: is_subconcept_of(c, c) holds.
  bool is_subconcept_of(const std::string& s, const std::string& c) const;
  // True when one of the two lies on the other's chain.
  bool comparable(const std::string& a, const std::string& b) const {
    return is_subconcept_of(a, b) || is_subconcept_of(b, a);
  }

  // Highest (closest to Root) declarer in the reference classes of [Root..start].
  std::optional<MethodOwner> lookup_ref_method(const std::string& start, const std::string& m) const;
  // Lowest declarer in the object classes of [Root..start].
  std::optional<MethodOwner> lookup_obj_method(const std::string& start, const std::string& m) const;

  // Concept names, parents before children, Root first.
  const std::vector<std::string>& names() const { return order_; }

  // One line per concept: `name < parent [refFields|refMethods|objFields|objMethods]`.
  std::string dump() const;

  void add(ConceptInfo info);

 private:
  std::map<std::string, ConceptInfo> by_name_;
  std::vector<std::string> order_;
};

/// Builds the concept table and checks keyword usage, names and types.
/// Throws SemError on the first problem.
ConceptTable analyze(const syntax::SourceProgram& program);

/// Names callable without a receiver from anywhere.
bool is_builtin_function(const std::string& name);

}  // namespace copl::model
