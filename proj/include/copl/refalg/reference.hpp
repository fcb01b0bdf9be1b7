#pragma once

#include <string>
#include <utility>
#include <vector>

#include "copl/model/concept_table.hpp"
#include "copl/refalg/value.hpp"

namespace copl::refalg {

using FieldMap = std::vector<std::pair<std::string, Value>>;

struct Segment {
  std::string concept_name;
  FieldMap fields;  // declaration order of the concept's reference fields

  const Value* field(const std::string& name) const;
  Value* field(const std::string& name);
};

struct ComplexReference {
  std::vector<Segment> segments;
  std::string declared_concept = model::kRoot;
  std::string declared_context = model::kRoot;

  bool empty() const { return segments.empty(); }
  // Index of the segment of concept `c`, or -1.
  int index_of(const std::string& c) const;
};

bool segments_equal(const Segment& a, const Segment& b);

// Same concepts in order with equal field values; declared types are ignored.
bool equals(const ComplexReference& a, const ComplexReference& b);

/// `⟨A{f=v,...}, B{...}⟩ as Declared/Context`
std::string to_text(const ComplexReference& r);

using model::ConceptTable;

// A segment of concept `c` with every reference field null.
Segment null_segment(const ConceptTable& t, const std::string& c);

// Consecutive segments are exactly parent and child.
bool well_formed(const ConceptTable& t, const std::vector<Segment>& segs);

std::string instance_of(const ComplexReference& r);
std::string context_of(const ConceptTable& t, const ComplexReference& r);
inline const std::string& concept_of(const ComplexReference& r) { return r.declared_concept; }

/// `Target : r`. Lengthening copies the missing leading segments from
/// `current_context`, the executing object's full reference.
ComplexReference left_cast(const ConceptTable& t, const std::string& target, const ComplexReference& r,
                           const ComplexReference* current_context);

/// `r : Target`. Lengthening appends null segments.
ComplexReference right_cast(const ConceptTable& t, const ComplexReference& r, const std::string& target);

ComplexReference intersect(const ConceptTable& t, const ComplexReference& a, const ComplexReference& b);

// The right operand's field values win on shared concepts.
ComplexReference unite(const ConceptTable& t, const ComplexReference& a, const ComplexReference& b);

/// `context : local` = right cast of `context` to instanceof(local), then
/// the local segments copied over it.
ComplexReference concatenate(const ConceptTable& t, const ComplexReference& context,
                             const ComplexReference& local);

/// Assignment into a variable holding `target`. A source whose real type is
/// within the target's declared concept replaces it wholesale; otherwise the
/// common segments are copied (into the declared shape if the target is
/// empty) and an empty intersection leaves the target unchanged.
ComplexReference assign(const ConceptTable& t, const ComplexReference& target,
                        const ComplexReference& source);

// Declared metadata for a computed reference: context from its first
// segment, declared concept clamped onto its own chain.
void normalize_declared(const ConceptTable& t, ComplexReference& r, const std::string& declared);

}  // namespace copl::refalg
