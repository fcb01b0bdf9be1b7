#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>

#include "copl/runtime/interpreter.hpp"

namespace copl::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitStatic = 2;  // missing file, lex, parse or semantic error

struct RunConfig {
  std::filesystem::path source_path;
  bool trace = false;
  bool strict = false;
  bool dump_ast = false;
  bool dump_concepts = false;
  std::uint64_t max_steps = runtime::kDefaultMaxSteps;
};

struct RunResult {
  int exit_code = kExitOk;
  std::string out;
  std::string err;  // diagnostics, then trace events when tracing
};

/// Default step limit: COPL_MAX_STEPS when set to a positive integer.
std::uint64_t default_max_steps();

/// Full pipeline over in-memory source. `display_name` prefixes diagnostics.
RunResult run_source(std::string_view source, const std::string& display_name, const RunConfig& config);

/// Reads config.source_path and runs it, writing program output to `out`
/// and diagnostics plus trace events to `err`.
int run(const RunConfig& config, std::ostream& out, std::ostream& err);

/// Unified diff of two texts, empty when they are equal.
std::string unified_diff(const std::string& expected, const std::string& actual, const std::string& expected_name,
                         const std::string& actual_name);

/// Runs every `<name>.cop` in `dir` against `<name>.expected` (stdout) and
/// the optional `<name>.exit` (exit status, default 0). A first line
/// `// copl-flags: --strict` enables strict mode for that case.
int run_corpus(const std::filesystem::path& dir, std::ostream& out, std::ostream& err);

}  // namespace copl::cli
