#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>

#include "copl/model/concept_table.hpp"
#include "copl/runtime/heap.hpp"
#include "copl/syntax/ast.hpp"

namespace copl::runtime {

inline constexpr std::uint64_t kDefaultMaxSteps = 1'000'000;

struct RunOptions {
  // Aborted or unresolvable accesses and calls through a null `sub` raise
  // errors instead of yielding null.
  bool strict = false;
  std::uint64_t max_steps = kDefaultMaxSteps;
  // Nested method activations before the run is aborted with StepLimit.
  int max_call_depth = 1000;
};

/// Tree-walking evaluator for one analyzed program. `print` writes to
/// `out`; when `trace` is non-null every dispatch event is written there as
/// `EVT kind concept segment-index detail`.
///
/// Not thread-safe; use one instance per run.
class Interpreter {
 public:
  Interpreter(const syntax::SourceProgram& program, const model::ConceptTable& table, std::ostream& out,
              std::ostream* trace = nullptr, RunOptions options = {});
  ~Interpreter();
  Interpreter(const Interpreter&) = delete;
  Interpreter& operator=(const Interpreter&) = delete;

  /// Runs static initializers then top-level statements. Throws RuntimeError.
  void run();

  const Heap& heap() const;
  std::uint64_t steps() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace copl::runtime
