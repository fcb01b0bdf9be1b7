#include <iostream>

#include "CLI11.hpp"
#include "copl/cli/driver.hpp"

int main(int argc, char** argv) {
  CLI::App app{"copl: interpreter for concept-oriented programs"};
  app.require_subcommand(1);

  copl::cli::RunConfig config;
  config.max_steps = copl::cli::default_max_steps();
  std::string source;
  auto* run = app.add_subcommand("run", "Run a program");
  run->add_option("file", source, "Source file")->required();
  run->add_flag("--trace", config.trace, "Write dispatch events to standard error");
  run->add_flag("--strict", config.strict, "Treat aborted resolutions as errors");
  run->add_flag("--dump-ast", config.dump_ast, "Print the syntax tree and exit");
  run->add_flag("--dump-concepts", config.dump_concepts, "Print the concept table and exit");
  run->add_option("--max-steps", config.max_steps, "Evaluation step limit")->check(CLI::PositiveNumber);

  std::string dir;
  auto* test = app.add_subcommand("test", "Run a golden corpus directory");
  test->add_option("dir", dir, "Directory of .cop/.expected pairs")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  if (*run) {
    config.source_path = source;
    return copl::cli::run(config, std::cout, std::cerr);
  }
  return copl::cli::run_corpus(dir, std::cout, std::cerr);
}
