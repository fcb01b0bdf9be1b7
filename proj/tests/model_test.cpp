#include <gtest/gtest.h>

#include "support.hpp"

namespace copl::model {
namespace {

using testing::analyze_source;

const char* kThreeLevels =
    "concept A reference { void myMethod() { } } class { void myMethod() { } }\n"
    "concept B in A reference { void myMethod() { } } class { void myMethod() { } }\n"
    "concept C in B reference { void myMethod() { } } class { void myMethod() { } }\n";

void expect_sem_error(const std::string& src, const std::string& fragment) {
  try {
    analyze_source(src);
    FAIL() << "expected SemError for: " << src;
  } catch (const SemError& e) {
    EXPECT_NE(std::string(e.what()).find(fragment), std::string::npos) << e.what();
  }
}

TEST(Analyze, ChainsAndDepths) {
  auto a = analyze_source(kThreeLevels);
  const ConceptTable& t = a->table;
  EXPECT_EQ(t.chain("C"), (std::vector<std::string>{"Root", "A", "B", "C"}));
  EXPECT_EQ(t.depth("A"), 1);
  EXPECT_EQ(t.depth("B"), 2);
  EXPECT_EQ(t.depth("C"), 3);
  EXPECT_EQ(t.depth("Root"), 0);
  EXPECT_FALSE(t.parent("Root").has_value());
  EXPECT_EQ(t.names(), (std::vector<std::string>{"Root", "A", "B", "C"}));
}

TEST(Analyze, DefaultParentIsRoot) {
  auto a = analyze_source("concept X reference { } class { }");
  EXPECT_EQ(a->table.parent("X"), "Root");
  EXPECT_EQ(a->table.depth("X"), 1);
}

TEST(Analyze, ParentsMayBeDeclaredLater) {
  auto a = analyze_source("concept B in A\nconcept A");
  EXPECT_EQ(a->table.chain("B"), (std::vector<std::string>{"Root", "A", "B"}));
  EXPECT_EQ(a->table.names(), (std::vector<std::string>{"Root", "A", "B"}));
}

TEST(Analyze, SpecialMethodFlags) {
  auto a = analyze_source(
      "concept A reference { void continue() { } void create() { } } class { void create() { } void delete() { } }");
  const ConceptInfo& c = a->table.get("A");
  EXPECT_TRUE(c.has_continue);
  EXPECT_TRUE(c.has_create);
  EXPECT_FALSE(c.has_delete);
  EXPECT_NE(c.obj_method("delete"), nullptr);
}

TEST(AnalyzeErrors, InclusionCycle) {
  expect_sem_error("concept A in A reference { } class { }", "cycle");
  expect_sem_error("concept A in B\nconcept B in A", "cycle");
}

TEST(AnalyzeErrors, StructuralProblems) {
  expect_sem_error("concept A\nconcept A", "duplicate");
  expect_sem_error("concept A in Missing", "Missing");
  expect_sem_error("concept A reference { int x; int x; }", "duplicate");
  expect_sem_error("concept A class { void continue() { } }", "continue");
}

TEST(AnalyzeErrors, KeywordPlacement) {
  expect_sem_error("concept A class { void m() { sub.m(); } }", "sub");
  expect_sem_error("print(this);", "this");
  expect_sem_error("super.m();", "super");
  expect_sem_error("return;", "return");
  expect_sem_error("break;", "break");
}

TEST(AnalyzeErrors, UnknownNames) {
  expect_sem_error("Unknown u;", "Unknown");
  expect_sem_error("print(nothing);", "nothing");
  expect_sem_error("int x; int x;", "x");
}

TEST(AnalyzeErrors, AllowsWhatListingsUse) {
  EXPECT_NO_THROW(analyze_source(kThreeLevels));
  EXPECT_NO_THROW(analyze_source(
      "concept A reference { String n; void continue() { Object o; o.continue(); } "
      "double m() { if (sub == null) return getB(); return 0; } } class { double getB() { return 1; } }"));
}

TEST(Subconcept, ReflexiveAndTransitive) {
  auto a = analyze_source(kThreeLevels + std::string("concept X in A\n"));
  const ConceptTable& t = a->table;
  EXPECT_TRUE(t.is_subconcept_of("C", "C"));
  EXPECT_TRUE(t.is_subconcept_of("C", "A"));
  EXPECT_TRUE(t.is_subconcept_of("C", "Root"));
  EXPECT_FALSE(t.is_subconcept_of("A", "C"));
  EXPECT_FALSE(t.is_subconcept_of("X", "B"));
  EXPECT_TRUE(t.comparable("B", "C"));
  EXPECT_FALSE(t.comparable("X", "C"));
  EXPECT_THROW(t.is_subconcept_of("Nope", "A"), RuntimeError);
}

TEST(MethodLookup, ReferenceTopDownObjectBottomUp) {
  auto a = analyze_source(
      "concept A reference { } class { void m() { } }\n"
      "concept B in A reference { void m() { } } class { }\n"
      "concept C in B reference { void m() { } } class { void m() { } }\n");
  const ConceptTable& t = a->table;
  EXPECT_EQ(t.lookup_ref_method("C", "m")->concept_name, "B");
  EXPECT_EQ(t.lookup_obj_method("C", "m")->concept_name, "C");
  EXPECT_EQ(t.lookup_obj_method("B", "m")->concept_name, "A");
  EXPECT_FALSE(t.lookup_ref_method("A", "m").has_value());
  EXPECT_FALSE(t.lookup_obj_method("C", "other").has_value());
}

TEST(Dump, ListsRootAndMembers) {
  auto a = analyze_source("concept A reference { int f; void m() { } } class { int g; }");
  std::string d = a->table.dump();
  EXPECT_NE(d.find("Root [handle|continue,create,delete||]"), std::string::npos) << d;
  EXPECT_NE(d.find("A < Root [f|m|g|]"), std::string::npos) << d;
}

}  // namespace
}  // namespace copl::model
