#pragma once

#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "copl/cli/driver.hpp"
#include "copl/model/concept_table.hpp"
#include "copl/refalg/reference.hpp"
#include "copl/syntax/parser.hpp"

namespace copl::testing {

inline std::string corpus_dir() { return COPL_CORPUS_DIR; }

inline std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline cli::RunResult run_program(const std::string& source, bool strict = false, bool trace = false) {
  cli::RunConfig config;
  config.strict = strict;
  config.trace = trace;
  return cli::run_source(source, "test.cop", config);
}

inline std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

// Trace events of one kind for one concept, e.g. ("CONT-ENTER", "Bank").
inline int count_events(const std::string& err, const std::string& kind, const std::string& concept_name) {
  int n = 0;
  for (const auto& line : lines_of(err)) {
    std::istringstream in(line);
    std::string evt, k, c;
    in >> evt >> k >> c;
    if (evt == "EVT" && k == kind && c == concept_name) ++n;
  }
  return n;
}

/// A parsed program kept alive next to its concept table.
struct Analyzed {
  syntax::SourceProgram program;
  model::ConceptTable table;
};

inline std::unique_ptr<Analyzed> analyze_source(const std::string& source) {
  auto a = std::make_unique<Analyzed>();
  a->program = syntax::parse_source(source);
  a->table = model::analyze(a->program);
  return a;
}

// ---- reference-algebra oracle ------------------------------------------
//
// A chain hierarchy C1 < C2 < C3 < C4 below Root plus an off-chain concept
// X in C1. Chain references are modelled as depth -> field values; every
// operation is recomputed from that map, independent of the library.

struct ChainWorld {
  std::unique_ptr<Analyzed> a;
  std::vector<std::string> names;         // index = depth, names[0] = Root
  std::vector<std::vector<std::string>> fields;  // reference fields per depth
};

inline ChainWorld make_chain_world(std::mt19937& rng) {
  ChainWorld w;
  std::ostringstream src;
  w.names = {"Root"};
  w.fields = {{}};
  std::string parent;
  for (int d = 1; d <= 4; ++d) {
    std::string name = "K" + std::to_string(d) + char('a' + rng() % 26);
    w.names.push_back(name);
    int nf = static_cast<int>(rng() % 3);
    std::vector<std::string> fs;
    src << "concept " << name;
    if (!parent.empty()) src << " in " << parent;
    src << " reference { ";
    for (int k = 0; k < nf; ++k) {
      fs.push_back("f" + std::to_string(d) + std::to_string(k));
      src << "int " << fs.back() << "; ";
    }
    src << "} class { }\n";
    w.fields.push_back(fs);
    parent = name;
  }
  src << "concept X in " << w.names[1] << " reference { int x; } class { }\n";
  w.a = analyze_source(src.str());
  return w;
}

// depth -> field values, in depth order.
using Model = std::map<int, std::vector<std::int64_t>>;

inline refalg::ComplexReference to_ref(const ChainWorld& w, const Model& m) {
  refalg::ComplexReference r;
  for (const auto& [d, vals] : m) {
    refalg::Segment s;
    s.concept_name = w.names[static_cast<size_t>(d)];
    for (size_t k = 0; k < vals.size(); ++k) s.fields.emplace_back(w.fields[static_cast<size_t>(d)][k], refalg::Value(vals[k]));
    r.segments.push_back(std::move(s));
  }
  if (!m.empty()) {
    r.declared_concept = w.names[static_cast<size_t>(m.rbegin()->first)];
    r.declared_context = w.names[static_cast<size_t>(m.begin()->first - 1)];
  }
  return r;
}

// Field values of a segment as the oracle sees them; null fields read as -1.
inline std::optional<Model> from_ref(const ChainWorld& w, const refalg::ComplexReference& r) {
  Model m;
  for (const auto& s : r.segments) {
    int d = -1;
    for (size_t k = 0; k < w.names.size(); ++k)
      if (w.names[k] == s.concept_name) d = static_cast<int>(k);
    if (d < 0) return std::nullopt;
    std::vector<std::int64_t> vals;
    for (const auto& [name, v] : s.fields) vals.push_back(v.is_int() ? v.as_int() : -1);
    m[d] = vals;
  }
  return m;
}

inline bool contiguous(const Model& m) {
  int prev = -1;
  for (const auto& [d, v] : m) {
    if (prev >= 0 && d != prev + 1) return false;
    prev = d;
  }
  return true;
}

inline std::vector<std::int64_t> null_fields(const ChainWorld& w, int d) {
  return std::vector<std::int64_t>(w.fields[static_cast<size_t>(d)].size(), -1);
}

// Every contiguous sub-chain of C1..C4 plus the empty reference, with
// random field values.
inline std::vector<Model> all_subchains(const ChainWorld& w, std::mt19937& rng) {
  std::vector<Model> out{Model{}};
  for (int lo = 1; lo <= 4; ++lo) {
    for (int hi = lo; hi <= 4; ++hi) {
      Model m;
      for (int d = lo; d <= hi; ++d) {
        std::vector<std::int64_t> vals;
        for (size_t k = 0; k < w.fields[static_cast<size_t>(d)].size(); ++k) vals.push_back(static_cast<std::int64_t>(rng() % 5));
        m[d] = vals;
      }
      out.push_back(m);
    }
  }
  return out;
}

// The result is either a reference model or the name of an error.
struct Outcome {
  std::optional<Model> model;
  std::string error;
};

inline Outcome oracle_intersect(const Model& a, const Model& b) {
  Model out;
  for (const auto& [d, v] : a)
    if (b.count(d)) out[d] = v;
  if (!contiguous(out)) return {std::nullopt, "MalformedResult"};
  return {out, ""};
}

inline Outcome oracle_unite(const Model& a, const Model& b) {
  Model out = a;
  for (const auto& [d, v] : b) out[d] = v;
  if (!contiguous(out)) return {std::nullopt, "MalformedResult"};
  return {out, ""};
}

inline Outcome oracle_right_cast(const ChainWorld& w, const Model& r, int target) {
  if (r.empty()) return {std::nullopt, "NullReference"};
  Model out;
  int inst = r.rbegin()->first;
  for (const auto& [d, v] : r)
    if (d <= target) out[d] = v;
  for (int d = inst + 1; d <= target; ++d) out[d] = null_fields(w, d);
  return {out, ""};
}

// `ctx` is a full chain reference standing for the current context.
inline Outcome oracle_left_cast(const Model& r, int target, const Model& ctx) {
  if (r.empty()) return {Model{}, ""};
  int first = r.begin()->first;
  int context = first - 1;
  Model out;
  if (target == context) return {r, ""};
  if (target < context) {
    for (int d = target + 1; d < first; ++d) out[d] = ctx.at(d);
    for (const auto& [d, v] : r) out[d] = v;
    return {out, ""};
  }
  if (!r.count(target)) return {std::nullopt, "IncomparableConcepts"};
  for (const auto& [d, v] : r)
    if (d > target) out[d] = v;
  return {out, ""};
}

inline Outcome oracle_concatenate(const ChainWorld& w, const Model& ctx, const Model& local) {
  if (local.empty()) return {ctx, ""};
  if (ctx.empty()) return {local, ""};
  int c1 = ctx.begin()->first, l1 = local.begin()->first, ln = local.rbegin()->first;
  if (l1 < c1) return {std::nullopt, "IncompatibleConcatenation"};
  Model out;
  for (int d = c1; d <= ln; ++d) {
    if (local.count(d))
      out[d] = local.at(d);
    else if (ctx.count(d))
      out[d] = ctx.at(d);
    else
      out[d] = null_fields(w, d);
  }
  return {out, ""};
}

// ---- dispatch oracle -------------------------------------------------------

struct DispatchCase {
  std::vector<std::string> chain;  // concepts of depth 1..n
  std::vector<bool> ref_decl;      // per depth-1 index
  std::vector<bool> obj_decl;
  std::string source;
};

inline DispatchCase make_dispatch_case(std::mt19937& rng) {
  DispatchCase c;
  int n = 1 + static_cast<int>(rng() % 6);
  std::ostringstream src;
  bool any = false;
  for (int i = 0; i < n; ++i) {
    c.chain.push_back("D" + std::to_string(i + 1));
    c.ref_decl.push_back(rng() % 3 == 0);
    c.obj_decl.push_back(rng() % 2 == 0);
    any = any || c.ref_decl.back() || c.obj_decl.back();
  }
  if (!any) c.obj_decl[rng() % static_cast<size_t>(n)] = true;
  // A sibling branch declaring both methods must never be picked.
  src << "concept Side in D1 reference { void m() { print(\"R Side\"); } } class { void m() { print(\"O Side\"); } }\n";
  for (int i = 0; i < n; ++i) {
    src << "concept " << c.chain[static_cast<size_t>(i)];
    if (i > 0) src << " in " << c.chain[static_cast<size_t>(i - 1)];
    src << "\n  reference { ";
    if (c.ref_decl[static_cast<size_t>(i)]) src << "void m() { print(\"R " << c.chain[static_cast<size_t>(i)] << "\"); } ";
    src << "}\n  class { ";
    if (c.obj_decl[static_cast<size_t>(i)]) src << "void m() { print(\"O " << c.chain[static_cast<size_t>(i)] << "\"); } ";
    src << "}\n";
  }
  src << c.chain.back() << " v = new " << c.chain.back() << "();\nv.m();\n";
  c.source = src.str();
  return c;
}

// Linear scans: the first (highest) reference declarer intercepts; failing
// that the last (lowest) object declarer executes.
inline std::string oracle_dispatch(const DispatchCase& c) {
  for (size_t i = 0; i < c.chain.size(); ++i)
    if (c.ref_decl[i]) return "R " + c.chain[i];
  for (size_t i = c.chain.size(); i-- > 0;)
    if (c.obj_decl[i]) return "O " + c.chain[i];
  return "";
}

// ---- value-semantics fuzz --------------------------------------------------

struct ValueCase {
  std::string source;
  std::string expected;
};

// Two variables of one concept with k int reference fields, a random
// sequence of field writes, copies and prints; the expected output comes
// from simulating two independent arrays.
inline ValueCase make_value_case(std::mt19937& rng) {
  int k = 1 + static_cast<int>(rng() % 3);
  std::ostringstream src, expect;
  src << "concept P reference { ";
  for (int i = 0; i < k; ++i) src << "int f" << i << "; ";
  src << "} class { int hits = 0; }\n";
  src << "P a = new P();\nP b = new P();\n";
  std::vector<std::int64_t> va(static_cast<size_t>(k), 0), vb(static_cast<size_t>(k), 0);
  int ops = 5 + static_cast<int>(rng() % 20);
  for (int o = 0; o < ops; ++o) {
    int f = static_cast<int>(rng() % static_cast<unsigned>(k));
    std::int64_t lit = static_cast<std::int64_t>(rng() % 1000) - 500;
    switch (rng() % 7) {
      case 0: src << "a.f" << f << " = " << lit << ";\n"; va[static_cast<size_t>(f)] = lit; break;
      case 1: src << "b.f" << f << " = " << lit << ";\n"; vb[static_cast<size_t>(f)] = lit; break;
      case 2: src << "a = b;\n"; va = vb; break;
      case 3: src << "b = a;\n"; vb = va; break;
      case 4: src << "print(a.f" << f << ");\n"; expect << va[static_cast<size_t>(f)] << "\n"; break;
      case 5: src << "print(b.f" << f << ");\n"; expect << vb[static_cast<size_t>(f)] << "\n"; break;
      default: src << "print(a == b);\n"; expect << (va == vb ? "true" : "false") << "\n"; break;
    }
  }
  return {src.str(), expect.str()};
}

}  // namespace copl::testing
