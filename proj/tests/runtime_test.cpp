#include <sstream>

#include <gtest/gtest.h>

#include "copl/runtime/interpreter.hpp"
#include "support.hpp"

namespace copl::runtime {
namespace {

using testing::analyze_source;
using testing::count_events;
using testing::lines_of;
using testing::run_program;

std::string out_of(const std::string& src, bool strict = false) {
  auto r = run_program(src, strict);
  EXPECT_EQ(r.exit_code, 0) << r.err;
  return r.out;
}

// Runs expecting a runtime error; returns the diagnostic text.
std::string error_of(const std::string& src, bool strict = false) {
  auto r = run_program(src, strict);
  EXPECT_EQ(r.exit_code, 1) << r.out;
  return r.err;
}

const char* kAccount =
    "concept Account\n"
    "  reference {\n"
    "    String number = getUniqueString();\n"
    "  }\n"
    "  class {\n"
    "    double balance = 0;\n"
    "    void deposit(double x) { balance = balance + x; }\n"
    "    double getBalance() { return balance; }\n"
    "  }\n";

TEST(Dispatch, ObjectOnlyMethodRunsLowestDeclarer) {
  EXPECT_EQ(out_of("concept A reference { } class { void m() { print(\"A\"); } }\n"
                   "concept B in A reference { } class { void m() { print(\"B\"); } }\n"
                   "concept C in B reference { } class { }\n"
                   "C v = new C(); v.m();"),
            "B\n");
}

TEST(Dispatch, SubOnLastSegment) {
  const char* src =
      "concept A reference { void m() { print(sub == null); sub.m(); print(\"after\"); } } class { }\n"
      "A v = new A(); v.m();";
  EXPECT_EQ(out_of(src), "true\nafter\n");
  EXPECT_NE(error_of(src, true).find("NullReference"), std::string::npos);
}

TEST(Dispatch, ThisCallStartsAtOwnSegment) {
  EXPECT_EQ(out_of("concept A reference { void m() { print(\"A\"); this.n(); } void n() { print(\"nA\"); } } class { }\n"
                   "concept B in A reference { void n() { print(\"nB\"); } } class { }\n"
                   "B v = new B(); v.m();"),
            "A\nnA\n");
}

TEST(Dispatch, UnknownMethod) {
  EXPECT_NE(error_of("concept A reference { } class { }\nA v = new A(); v.nothing();").find("NoSuchMethod"),
            std::string::npos);
}

TEST(Dispatch, NullReceiver) {
  EXPECT_NE(error_of(std::string(kAccount) + "Account a; a.deposit(1);").find("NullReference"), std::string::npos);
}

TEST(Fields, ReferenceFieldsShadowObjectFields) {
  EXPECT_EQ(out_of("concept A reference { int v; } class { int v = 7; int get() { return v; } }\n"
                   "A a = new A(); print(a.v); print(a.get()); A b = a; b.v = 3; print(b.v); print(a.v);"),
            "0\n7\n3\n0\n");
}

TEST(Fields, ObjectFieldThroughDefaultResolution) {
  EXPECT_EQ(out_of(std::string(kAccount) + "Account a = new Account(); a.deposit(2.5); print(a.balance); "
                                           "a.balance = 4; print(a.getBalance());"),
            "2.5\n4\n");
}

TEST(Resolution, DistinctFieldValuesGiveDistinctObjects) {
  EXPECT_EQ(out_of(std::string(kAccount) +
                   "Account a = new Account(); Account b = new Account(); a.deposit(1); b.deposit(5);\n"
                   "print(a.getBalance()); print(b.getBalance()); print(heapSize());"),
            "1\n5\n2\n");
}

TEST(Resolution, ForgedSegmentIsUnresolved) {
  std::string src = std::string(kAccount) + "Account a = new Account(); a.number = \"forged\"; print(a.getBalance());";
  EXPECT_NE(error_of(src, true).find("UnresolvedReference"), std::string::npos);
  EXPECT_EQ(out_of(src), "null\n");
}

TEST(Resolution, AbortedContinuationYieldsNull) {
  std::string src =
      "concept A reference { void continue() { print(\"enter\"); return; } } "
      "class { int get() { print(\"never\"); return 1; } }\n"
      "A a = new A(); print(a.get());";
  EXPECT_EQ(out_of(src), "enter\nnull\n");
  EXPECT_NE(error_of(src, true).find("UnresolvedReference"), std::string::npos);
}

TEST(Resolution, ContinuationWrapsTheTarget) {
  std::string src =
      "static Map store = new Map();\n"
      "concept A reference { String k = \"key\"; "
      "  void continue() { print(\"> A\"); Object o = store.get(this.k); int r = o.continue(); print(\"< A \" + r); } "
      "  void create() { Object o; o.create(); store.put(this.k, o); } } "
      "class { int get() { print(\"get\"); return 41 + 1; } }\n"
      "A a = new A(); print(a.get());";
  EXPECT_EQ(out_of(src), "> A\nget\n< A 42\n42\n");
}

TEST(Resolution, ObjectRecordsChainedByParent) {
  auto a = analyze_source(
      "concept A reference { } class { }\nconcept B in A reference { } class { }\n"
      "concept C in B reference { } class { }\nC v = new C();");
  std::ostringstream out;
  Interpreter interp(a->program, a->table, out);
  interp.run();
  Heap& heap = const_cast<Heap&>(interp.heap());
  ASSERT_EQ(heap.size(), 3u);
  ObjectRecord* c = heap.find(NativeHandle{3});
  ASSERT_NE(c, nullptr);
  EXPECT_EQ(c->concept_name, "C");
  ASSERT_TRUE(c->parent.has_value());
  ObjectRecord* b = heap.find(*c->parent);
  EXPECT_EQ(b->concept_name, "B");
  ObjectRecord* top = heap.find(*b->parent);
  EXPECT_EQ(top->concept_name, "A");
  EXPECT_FALSE(top->parent.has_value());
}

TEST(Lifecycle, CreateArgumentsReachConstructor) {
  EXPECT_EQ(out_of("concept A reference { } class { int v; void create(int x) { v = x; } int get() { return v; } }\n"
                   "A a; a.create(12); print(a.get());"),
            "12\n");
}

TEST(Lifecycle, DeleteTwiceIsUnresolved) {
  std::string src = std::string(kAccount) + "Account a = new Account(); a.delete(); a.delete();";
  EXPECT_NE(error_of(src, true).find("UnresolvedReference"), std::string::npos);
}

TEST(Lifecycle, UserCreateMustAllocate) {
  EXPECT_NE(error_of("concept A reference { void create() { print(\"skip\"); } } class { }\nA a = new A();")
                .find("CreateFailed"),
            std::string::npos);
}

TEST(Lifecycle, DefaultCreateReusesExistingContext) {
  std::string src =
      "concept Box reference { int id = 1; } class { int items = 0; void add() { items = items + 1; } int n() { return items; } }\n"
      "concept Thing in Box reference { String name = getUniqueString(); } class { void create() { super.add(); } }\n"
      "Thing a = new Thing(); Thing b = new Thing(); print(heapSize()); print(b.n());";
  EXPECT_EQ(out_of(src), "3\n2\n");
}

TEST(ContextBlock, ResolvesOnceAndReachesMembers) {
  std::string src =
      "static Map store = new Map();\n"
      "concept A reference { String k = \"key\"; "
      "  void continue() { print(\"enter\"); Object o = store.get(this.k); o.continue(); print(\"leave\"); } "
      "  void create() { Object o; o.create(); store.put(this.k, o); } } "
      "class { int count = 0; void bump() { count = count + 1; } }\n"
      "A a = new A();\n"
      "a : { bump(); bump(); print(count); }\n"
      "a : { }\n";
  auto r = run_program(src, false, true);
  EXPECT_EQ(r.out, "enter\n2\nleave\nenter\nleave\n");
  EXPECT_EQ(count_events(r.err, "CONT-ENTER", "A"), 2);
}

TEST(Values, ArithmeticAndFormatting) {
  EXPECT_EQ(out_of("print(10 / 4); print(10 % 4); print(0.5 + 1); print(1.0 * 2); print(\"n=\" + 3 + true);"
                   "print(-7 / 2); print(2 < 3 && !(1 == 2)); print(\"ab\" < \"b\");"),
            "2\n2\n1.5\n2\nn=3true\n-3\ntrue\ntrue\n");
  EXPECT_NE(error_of("int z = 0; print(1 / z);").find("DivisionByZero"), std::string::npos);
  EXPECT_NE(error_of("if (1) print(1);").find("TypeMismatch"), std::string::npos);
  EXPECT_NE(error_of("int x = \"s\";").find("TypeMismatch"), std::string::npos);
}

TEST(Values, MapOperations) {
  EXPECT_EQ(out_of("Map m = new Map(); m.put(\"a\", 1); m.add(\"b\", 2); m.put(\"a\", 3);"
                   "print(m.size()); print(m.get(\"a\")); print(m.contains(\"b\")); print(m.get(\"zz\"));"
                   "m.remove(\"a\"); int total = 0; forall (int v in m) { total = total + v; } print(total);"),
            "2\n3\ntrue\nnull\n2\n");
}

TEST(Values, ForallBreak) {
  EXPECT_EQ(out_of("Map m = new Map(); m.put(1, 10); m.put(2, 20); m.put(3, 30);"
                   "forall (int v in m) { if (v > 15) break; print(v); }"),
            "10\n");
}

TEST(Values, UniqueStringsAreSequential) {
  EXPECT_EQ(out_of("concept A reference { String s = getUniqueString(); } class { }\n"
                   "A a = new A(); A b = new A(); print(a.s); print(b.s);"),
            "123456789\n123456790\n");
}

TEST(Limits, RunawayRecursionStops) {
  std::string src = "concept A reference { void m() { this.m(); } } class { }\nA a = new A(); a.m();";
  EXPECT_NE(error_of(src).find("StepLimit"), std::string::npos);
}

TEST(Limits, StepBudget) {
  auto a = analyze_source("Map m = new Map(); m.put(1, 1); forall (int v in m) { print(v); }");
  std::ostringstream out;
  RunOptions opt;
  opt.max_steps = 3;
  Interpreter interp(a->program, a->table, out, nullptr, opt);
  try {
    interp.run();
    FAIL();
  } catch (const RuntimeError& e) {
    EXPECT_EQ(e.kind(), RuntimeErrorKind::StepLimit);
  }
}

TEST(Errors, DiagnosticNamesMethodChain) {
  std::string err = error_of(
      "concept A reference { int r(int x) { return f(x); } } class { int f(int x) { return 10 / x; } }\n"
      "A a = new A(); print(a.r(0));");
  EXPECT_NE(err.find("test.cop:1:"), std::string::npos) << err;
  EXPECT_NE(err.find("in A.f (object method)"), std::string::npos) << err;
  EXPECT_NE(err.find("in A.r (reference method)"), std::string::npos) << err;
}

TEST(Errors, EmptyProgram) {
  auto r = run_program("");
  EXPECT_EQ(r.exit_code, 0);
  EXPECT_EQ(r.out, "");
}

// Every CONT-ENTER has a matching CONT-EXIT, and each TURN happens while
// the innermost open resolution is the last one entered.
void expect_balanced(const std::string& trace) {
  std::vector<std::string> open;
  for (const auto& line : lines_of(trace)) {
    std::istringstream in(line);
    std::string evt, kind, concept_name, index;
    in >> evt >> kind >> concept_name >> index;
    if (evt != "EVT") continue;
    if (kind == "CONT-ENTER") open.push_back(concept_name + " " + index);
    if (kind == "CONT-EXIT") {
      ASSERT_FALSE(open.empty()) << line;
      EXPECT_EQ(open.back(), concept_name + " " + index) << line;
      open.pop_back();
    }
  }
  EXPECT_TRUE(open.empty());
}

TEST(Trace, BalancedOverCorpus) {
  for (const char* name : {"listing3", "listing7", "listing10", "listing11", "context_block", "multi_extension"}) {
    std::string src = testing::read_text(testing::corpus_dir() + "/" + name + ".cop");
    auto r = run_program(src, false, true);
    SCOPED_TRACE(name);
    expect_balanced(r.err);
  }
}

TEST(Trace, BalancedOnRandomNestedResolutions) {
  std::mt19937 rng(11);
  for (int round = 0; round < 50; ++round) {
    int n = 1 + static_cast<int>(rng() % 4);
    std::ostringstream src;
    src << "static Map store = new Map();\n";
    std::vector<bool> custom;
    for (int i = 0; i < n; ++i) {
      custom.push_back(rng() % 2 == 0);
      src << "concept L" << i;
      if (i) src << " in L" << (i - 1);
      src << " reference { ";
      if (custom.back()) {
        src << "String k = getUniqueString(); "
            << "void continue() { print(\"> L" << i << "\"); Object o = store.get(this.k); o.continue(); print(\"< L" << i << "\"); } "
            << "void create() { Object o; o.create(); store.put(this.k, o); } ";
      }
      src << "} class { int hit() { return " << i << "; } }\n";
    }
    src << "L" << (n - 1) << " v = new L" << (n - 1) << "();\nprint(v.hit());\n";
    auto r = run_program(src.str(), true, true);
    ASSERT_EQ(r.exit_code, 0) << src.str() << r.err;
    std::string expected;
    for (int i = 0; i < n; ++i)
      if (custom[static_cast<size_t>(i)]) expected += "> L" + std::to_string(i) + "\n";
    for (int i = n; i-- > 0;)
      if (custom[static_cast<size_t>(i)]) expected += "< L" + std::to_string(i) + "\n";
    expected += std::to_string(n - 1) + "\n";
    EXPECT_EQ(r.out, expected);
    expect_balanced(r.err);
    EXPECT_EQ(count_events(r.err, "TURN", "L" + std::to_string(n - 1)), 1);
  }
}

}  // namespace
}  // namespace copl::runtime
