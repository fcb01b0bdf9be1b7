#include <algorithm>
#include <map>

#include "copl/refalg/reference.hpp"

namespace copl::refalg {

namespace {

RuntimeError error(RuntimeErrorKind kind, std::string msg) { return RuntimeError(kind, std::move(msg)); }

std::string concepts_text(const std::vector<Segment>& segs) {
  std::string s = "<";
  for (size_t i = 0; i < segs.size(); ++i) s += (i ? "," : "") + segs[i].concept_name;
  return s + ">";
}

}  // namespace

const Value* Segment::field(const std::string& name) const {
  for (const auto& [k, v] : fields) {
    if (k == name) return &v;
  }
  return nullptr;
}

Value* Segment::field(const std::string& name) {
  for (auto& [k, v] : fields) {
    if (k == name) return &v;
  }
  return nullptr;
}

int ComplexReference::index_of(const std::string& c) const {
  for (size_t i = 0; i < segments.size(); ++i) {
    if (segments[i].concept_name == c) return static_cast<int>(i);
  }
  return -1;
}

bool segments_equal(const Segment& a, const Segment& b) {
  if (a.concept_name != b.concept_name || a.fields.size() != b.fields.size()) return false;
  for (size_t i = 0; i < a.fields.size(); ++i) {
    if (a.fields[i].first != b.fields[i].first) return false;
    if (!values_equal(a.fields[i].second, b.fields[i].second)) return false;
  }
  return true;
}

bool equals(const ComplexReference& a, const ComplexReference& b) {
  if (a.segments.size() != b.segments.size()) return false;
  for (size_t i = 0; i < a.segments.size(); ++i) {
    if (!segments_equal(a.segments[i], b.segments[i])) return false;
  }
  return true;
}

std::string to_text(const ComplexReference& r) {
  std::string s = "⟨";
  for (size_t i = 0; i < r.segments.size(); ++i) {
    const Segment& seg = r.segments[i];
    if (i) s += ", ";
    s += seg.concept_name + "{";
    for (size_t k = 0; k < seg.fields.size(); ++k) {
      if (k) s += ",";
      const Value& v = seg.fields[k].second;
      s += seg.fields[k].first + "=" + (v.is_string() ? "\"" + v.as_string() + "\"" : format_value(v));
    }
    s += "}";
  }
  return s + "⟩ as " + r.declared_concept + "/" + r.declared_context;
}

Segment null_segment(const ConceptTable& t, const std::string& c) {
  Segment s;
  s.concept_name = c;
  for (const auto& f : t.get(c).ref_fields) s.fields.emplace_back(f.name, Value{});
  return s;
}

bool well_formed(const ConceptTable& t, const std::vector<Segment>& segs) {
  for (size_t i = 1; i < segs.size(); ++i) {
    const auto& parent = t.parent(segs[i].concept_name);
    if (!parent || *parent != segs[i - 1].concept_name) return false;
  }
  return true;
}

std::string instance_of(const ComplexReference& r) {
  if (r.empty()) throw error(RuntimeErrorKind::NullReference, "instanceof of a null reference");
  return r.segments.back().concept_name;
}

std::string context_of(const ConceptTable& t, const ComplexReference& r) {
  if (r.empty()) throw error(RuntimeErrorKind::NullReference, "contextof of a null reference");
  const auto& parent = t.parent(r.segments.front().concept_name);
  return parent ? *parent : std::string(model::kRoot);
}

void normalize_declared(const ConceptTable& t, ComplexReference& r, const std::string& declared) {
  if (r.empty()) {
    r.declared_concept = declared;
    return;
  }
  r.declared_context = context_of(t, r);
  std::string inst = instance_of(r);
  const std::string& first = r.segments.front().concept_name;
  if (!t.contains(declared) || !t.is_subconcept_of(inst, declared)) {
    r.declared_concept = inst;
  } else if (t.depth(declared) < t.depth(first)) {
    r.declared_concept = first;
  } else {
    r.declared_concept = declared;
  }
}

ComplexReference left_cast(const ConceptTable& t, const std::string& target, const ComplexReference& r,
                           const ComplexReference* current_context) {
  if (r.empty()) {
    ComplexReference out = r;
    out.declared_context = target;
    return out;
  }
  std::string ctx = context_of(t, r);
  if (!t.comparable(target, ctx))
    throw error(RuntimeErrorKind::IncomparableConcepts,
                "cannot cast context " + ctx + " to " + target);
  ComplexReference out;
  if (target == ctx) {
    out = r;
  } else if (t.is_subconcept_of(ctx, target)) {
    // Lengthen: the concepts strictly below target down to ctx come from
    // the current context.
    auto ch = t.chain(ctx);
    auto from = std::find(ch.begin(), ch.end(), target) + 1;
    for (auto it = from; it != ch.end(); ++it) {
      int i = current_context ? current_context->index_of(*it) : -1;
      if (i < 0)
        throw error(RuntimeErrorKind::MissingContext,
                    "no current context supplies a " + *it + " segment for " + target + ":" +
                        concepts_text(r.segments));
      out.segments.push_back(current_context->segments[static_cast<size_t>(i)]);
    }
    out.segments.insert(out.segments.end(), r.segments.begin(), r.segments.end());
  } else {
    int i = r.index_of(target);
    if (i < 0)
      throw error(RuntimeErrorKind::IncomparableConcepts,
                  target + " is not a segment of " + concepts_text(r.segments));
    out.segments.assign(r.segments.begin() + i + 1, r.segments.end());
  }
  out.declared_context = target;
  normalize_declared(t, out, r.declared_concept);
  if (out.empty()) out.declared_context = target;
  return out;
}

ComplexReference right_cast(const ConceptTable& t, const ComplexReference& r, const std::string& target) {
  std::string inst = instance_of(r);
  if (!t.comparable(target, inst))
    throw error(RuntimeErrorKind::IncomparableConcepts,
                "cannot cast real type " + inst + " to " + target);
  ComplexReference out;
  int target_depth = t.depth(target);
  if (t.is_subconcept_of(inst, target)) {
    for (const auto& s : r.segments) {
      if (t.depth(s.concept_name) <= target_depth) out.segments.push_back(s);
    }
  } else {
    out.segments = r.segments;
    auto ch = t.chain(target);
    for (size_t k = static_cast<size_t>(t.depth(inst)) + 1; k < ch.size(); ++k)
      out.segments.push_back(null_segment(t, ch[k]));
  }
  normalize_declared(t, out, r.declared_concept);
  if (out.empty()) out.declared_context = r.declared_context;
  return out;
}

ComplexReference intersect(const ConceptTable& t, const ComplexReference& a, const ComplexReference& b) {
  ComplexReference out;
  for (const auto& s : a.segments) {
    if (b.index_of(s.concept_name) >= 0) out.segments.push_back(s);
  }
  if (!well_formed(t, out.segments))
    throw error(RuntimeErrorKind::MalformedResult,
                "intersection " + concepts_text(out.segments) + " is not a chain");
  out.declared_context = a.declared_context;
  normalize_declared(t, out, a.declared_concept);
  return out;
}

ComplexReference unite(const ConceptTable& t, const ComplexReference& a, const ComplexReference& b) {
  std::map<int, Segment> by_depth;
  auto put = [&](const Segment& s) {
    int d = t.depth(s.concept_name);
    auto it = by_depth.find(d);
    if (it != by_depth.end() && it->second.concept_name != s.concept_name)
      throw error(RuntimeErrorKind::MalformedResult,
                  "union mixes " + it->second.concept_name + " and " + s.concept_name);
    by_depth[d] = s;
  };
  for (const auto& s : a.segments) put(s);
  for (const auto& s : b.segments) put(s);
  ComplexReference out;
  for (auto& [d, s] : by_depth) out.segments.push_back(std::move(s));
  if (!well_formed(t, out.segments))
    throw error(RuntimeErrorKind::MalformedResult,
                "union " + concepts_text(out.segments) + " is not a chain");
  out.declared_context = a.empty() ? b.declared_context : a.declared_context;
  normalize_declared(t, out, b.empty() ? a.declared_concept : b.declared_concept);
  return out;
}

ComplexReference concatenate(const ConceptTable& t, const ComplexReference& context,
                             const ComplexReference& local) {
  if (local.empty()) return context;
  if (context.empty()) return local;
  std::string ci = instance_of(context);
  std::string li = instance_of(local);
  const std::string& c1 = context.segments.front().concept_name;
  const std::string& l1 = local.segments.front().concept_name;
  if (!t.comparable(ci, li) || t.depth(l1) < t.depth(c1))
    throw error(RuntimeErrorKind::IncompatibleConcatenation,
                "cannot attach " + concepts_text(local.segments) + " to " +
                    concepts_text(context.segments));
  ComplexReference out = right_cast(t, context, li);
  for (auto& s : out.segments) {
    int i = local.index_of(s.concept_name);
    if (i >= 0) s = local.segments[static_cast<size_t>(i)];
  }
  normalize_declared(t, out, local.declared_concept);
  return out;
}

ComplexReference assign(const ConceptTable& t, const ComplexReference& target,
                        const ComplexReference& source) {
  ComplexReference out = target;
  if (source.empty()) {
    out.segments.clear();
    return out;
  }
  const std::string& declared = target.declared_concept;
  std::string inst = instance_of(source);
  if (t.contains(declared) && t.is_subconcept_of(inst, declared)) {
    out.segments = source.segments;
    std::string src_ctx = context_of(t, source);
    // A short variable keeps only the part below its declared context.
    if (target.declared_context != src_ctx && t.contains(target.declared_context) &&
        t.is_subconcept_of(target.declared_context, src_ctx)) {
      int i = out.index_of(target.declared_context);
      if (i >= 0) out.segments.erase(out.segments.begin(), out.segments.begin() + i + 1);
    }
    return out;
  }
  if (out.empty() && t.contains(declared) && t.contains(target.declared_context) &&
      t.is_subconcept_of(declared, target.declared_context)) {
    auto ch = t.chain(declared);
    for (size_t k = static_cast<size_t>(t.depth(target.declared_context)) + 1; k < ch.size(); ++k)
      out.segments.push_back(null_segment(t, ch[k]));
  }
  bool matched = false;
  for (auto& s : out.segments) {
    int i = source.index_of(s.concept_name);
    if (i >= 0) {
      s.fields = source.segments[static_cast<size_t>(i)].fields;
      matched = true;
    }
  }
  return matched ? out : target;
}

}  // namespace copl::refalg
