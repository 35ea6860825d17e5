#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include <copri/copri.hpp>

namespace {

bool trace_from_env() {
  const char* v = std::getenv("COPRI_TRACE");
  return v && std::string(v) == "1";
}

int cmd_run(const std::string& path, bool trace) {
  auto text = copri::read_file(path);
  if (!text) {
    std::cerr << "copri: cannot open '" << path << "'\n";
    return 1;
  }
  try {
    copri::Program prog = copri::parse_program(*text);
    copri::Interpreter interp(prog);
    interp.set_output([](std::string_view s) { std::cout << s; });
    if (trace)
      interp.set_trace([](const copri::TraceEvent& e) {
        std::cerr << copri::format_trace_event(e) << "\n";
      });
    interp.run();
  } catch (const copri::CopError& e) {
    std::cout.flush();
    std::cerr << copri::format_diagnostic(path, e) << "\n";
    return copri::is_static_error(e.kind) ? 1 : 2;
  }
  return 0;
}

int cmd_check(const std::string& path) {
  auto text = copri::read_file(path);
  if (!text) {
    std::cerr << "copri: cannot open '" << path << "'\n";
    return 1;
  }
  copri::RunOutcome out = copri::check_program_text(*text, path);
  if (!out.diagnostic.empty()) std::cerr << out.diagnostic << "\n";
  return out.exit_code;
}

int cmd_test(const std::string& dir, unsigned jobs) {
  std::vector<copri::GoldenCase> cases = copri::load_golden_cases(dir);
  std::vector<copri::CaseResult> results = copri::run_corpus(cases, jobs);
  std::size_t failed = 0;
  for (const copri::CaseResult& r : results) {
    if (r.passed) {
      std::cout << "PASS " << r.name << "\n";
    } else {
      ++failed;
      std::cout << "FAIL " << r.name << " (" << r.detail << ")\n";
    }
  }
  std::cout << results.size() << " cases, " << failed << " failed\n";
  return failed == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"copri: concept-oriented program interpreter"};
  app.require_subcommand(1);

  std::string run_file;
  bool run_trace = false;
  CLI::App* run = app.add_subcommand("run", "run a program");
  run->add_option("FILE", run_file, "program file")->required();
  run->add_flag("--trace", run_trace, "emit dispatch events to standard error");

  std::string check_file;
  CLI::App* check = app.add_subcommand("check", "parse and check a program");
  check->add_option("FILE", check_file, "program file")->required();

  std::string test_dir;
  unsigned jobs = 1;
  CLI::App* test = app.add_subcommand("test", "run a golden-file corpus");
  test->add_option("DIR", test_dir, "corpus directory")->required();
  test->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);

  CLI::App* repl = app.add_subcommand("repl", "interactive session");

  CLI11_PARSE(app, argc, argv);

  if (run->parsed()) return cmd_run(run_file, run_trace || trace_from_env());
  if (check->parsed()) return cmd_check(check_file);
  if (test->parsed()) return cmd_test(test_dir, jobs);
  if (repl->parsed()) {
    copri::Repl session(std::cin, std::cout, std::cerr);
    return session.run();
  }
  return 0;
}
