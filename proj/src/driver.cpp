#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <vector>

#include "copl/cli/driver.hpp"
#include "copl/model/concept_table.hpp"
#include "copl/syntax/parser.hpp"

namespace copl::cli {

namespace fs = std::filesystem;

namespace {

void report(std::ostream& err, const std::string& name, const Error& e) {
  err << name << ":" << e.pos().line << ":" << e.pos().column << ": " << e.category() << ": ";
  if (auto* rt = dynamic_cast<const RuntimeError*>(&e)) {
    err << to_string(rt->kind()) << ": " << e.what() << "\n";
    for (const auto& line : rt->trace()) err << "  " << line << "\n";
  } else {
    err << e.what() << "\n";
  }
}

int execute(std::string_view source, const std::string& name, const RunConfig& config, std::ostream& out,
            std::ostream& err) {
  syntax::SourceProgram program;
  model::ConceptTable table;
  try {
    program = syntax::parse_source(source);
    if (config.dump_ast) {
      out << syntax::dump_ast(program);
      return kExitOk;
    }
    table = model::analyze(program);
  } catch (const Error& e) {
    report(err, name, e);
    return kExitStatic;
  }
  if (config.dump_concepts) {
    out << table.dump();
    return kExitOk;
  }
  runtime::RunOptions options;
  options.strict = config.strict;
  options.max_steps = config.max_steps;
  runtime::Interpreter interp(program, table, out, config.trace ? &err : nullptr, options);
  try {
    interp.run();
  } catch (const RuntimeError& e) {
    out.flush();
    report(err, name, e);
    return kExitRuntime;
  }
  return kExitOk;
}

std::optional<std::string> read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string normalize_newlines(const std::string& s) {
  std::string r;
  r.reserve(s.size());
  for (size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '\r') {
      r += '\n';
      if (i + 1 < s.size() && s[i + 1] == '\n') ++i;
    } else {
      r += s[i];
    }
  }
  return r;
}

std::vector<std::string> split_lines(const std::string& s) {
  std::vector<std::string> lines;
  std::string cur;
  for (char c : s) {
    if (c == '\n') {
      lines.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) lines.push_back(cur);
  return lines;
}

std::string trim(std::string s) {
  auto ws = [](unsigned char c) { return std::isspace(c) != 0; };
  s.erase(s.begin(), std::find_if_not(s.begin(), s.end(), ws));
  s.erase(std::find_if_not(s.rbegin(), s.rend(), ws).base(), s.end());
  return s;
}

}  // namespace

std::uint64_t default_max_steps() {
  if (const char* env = std::getenv("COPL_MAX_STEPS")) {
    char* end = nullptr;
    unsigned long long v = std::strtoull(env, &end, 10);
    if (end && *end == '\0' && v > 0) return v;
  }
  return runtime::kDefaultMaxSteps;
}

RunResult run_source(std::string_view source, const std::string& display_name, const RunConfig& config) {
  std::ostringstream out, err;
  RunResult r;
  r.exit_code = execute(source, display_name, config, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

int run(const RunConfig& config, std::ostream& out, std::ostream& err) {
  std::string name = config.source_path.string();
  auto text = read_file(config.source_path);
  if (!text || fs::is_directory(config.source_path)) {
    err << name << ": error: file not found\n";
    return kExitStatic;
  }
  return execute(*text, name, config, out, err);
}

std::string unified_diff(const std::string& expected, const std::string& actual, const std::string& expected_name,
                         const std::string& actual_name) {
  auto a = split_lines(expected);
  auto b = split_lines(actual);
  if (a == b && expected == actual) return "";
  // Longest common subsequence table, then a walk producing an edit script.
  size_t n = a.size(), m = b.size();
  std::vector<std::vector<int>> lcs(n + 1, std::vector<int>(m + 1, 0));
  for (size_t i = n; i-- > 0;)
    for (size_t j = m; j-- > 0;)
      lcs[i][j] = a[i] == b[j] ? lcs[i + 1][j + 1] + 1 : std::max(lcs[i + 1][j], lcs[i][j + 1]);
  struct Edit {
    char op;
    size_t ai, bi;
  };
  std::vector<Edit> script;
  size_t i = 0, j = 0;
  while (i < n || j < m) {
    if (i < n && j < m && a[i] == b[j]) {
      script.push_back({' ', i++, j++});
    } else if (i < n && (j == m || lcs[i + 1][j] >= lcs[i][j + 1])) {
      script.push_back({'-', i++, j});
    } else {
      script.push_back({'+', i, j++});
    }
  }
  std::ostringstream d;
  d << "--- " << expected_name << "\n+++ " << actual_name << "\n";
  if (a == b) {
    d << "@@ trailing newline differs @@\n";
    return d.str();
  }
  constexpr size_t kContext = 3;
  size_t k = 0;
  while (k < script.size()) {
    if (script[k].op == ' ') {
      ++k;
      continue;
    }
    size_t start = k >= kContext ? k - kContext : 0;
    size_t end = k;
    size_t last_change = k;
    while (end < script.size()) {
      if (script[end].op != ' ') last_change = end;
      if (end - last_change > 2 * kContext) break;
      ++end;
    }
    end = std::min(script.size(), last_change + kContext + 1);
    size_t a_start = script[start].ai, b_start = script[start].bi;
    size_t a_len = 0, b_len = 0;
    for (size_t x = start; x < end; ++x) {
      if (script[x].op != '+') ++a_len;
      if (script[x].op != '-') ++b_len;
    }
    d << "@@ -" << (a_len ? a_start + 1 : a_start) << "," << a_len << " +" << (b_len ? b_start + 1 : b_start)
      << "," << b_len << " @@\n";
    for (size_t x = start; x < end; ++x) {
      const Edit& e = script[x];
      d << e.op << (e.op == '+' ? b[e.bi] : a[e.ai]) << "\n";
    }
    k = end;
  }
  return d.str();
}

int run_corpus(const fs::path& dir, std::ostream& out, std::ostream& err) {
  if (!fs::is_directory(dir)) {
    err << dir.string() << ": error: not a directory\n";
    return kExitStatic;
  }
  std::vector<fs::path> cases;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".cop") cases.push_back(entry.path());
  }
  std::sort(cases.begin(), cases.end());
  std::vector<std::string> failed;
  for (const auto& path : cases) {
    std::string name = path.stem().string();
    fs::path expected_path = path;
    expected_path.replace_extension(".expected");
    auto expected = read_file(expected_path);
    if (!expected) {
      out << "FAIL " << name << ": missing " << expected_path.filename().string() << "\n";
      failed.push_back(name);
      continue;
    }
    int expected_exit = kExitOk;
    fs::path exit_path = path;
    exit_path.replace_extension(".exit");
    if (auto ex = read_file(exit_path)) expected_exit = std::atoi(trim(*ex).c_str());

    std::string source = *read_file(path);
    RunConfig config;
    config.source_path = path;
    config.max_steps = default_max_steps();
    std::string first_line = source.substr(0, source.find('\n'));
    if (first_line.rfind("// copl-flags:", 0) == 0 && first_line.find("--strict") != std::string::npos)
      config.strict = true;
    RunResult r = run_source(source, path.string(), config);

    std::string want = normalize_newlines(*expected);
    std::string got = normalize_newlines(r.out);
    bool ok = want == got && r.exit_code == expected_exit;
    out << (ok ? "PASS " : "FAIL ") << name << "\n";
    if (ok) continue;
    failed.push_back(name);
    if (r.exit_code != expected_exit)
      out << "  exit status " << r.exit_code << ", expected " << expected_exit << "\n";
    if (want != got) out << unified_diff(want, got, expected_path.filename().string(), name + " (stdout)");
    if (!r.err.empty()) out << "  stderr:\n" << r.err;
  }
  out << cases.size() << " cases, " << (cases.size() - failed.size()) << " passed, " << failed.size()
      << " failed\n";
  if (failed.empty()) return kExitOk;
  err << "failing cases:";
  for (const auto& f : failed) err << " " << f;
  err << "\n";
  return kExitRuntime;
}

}  // namespace copl::cli
