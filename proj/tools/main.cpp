#include "cli/run.hpp"

#include "CLI11.hpp"

#include "biortheq/parallel.hpp"

#include <fstream>
#include <iostream>

int main(int argc, char** argv) {
  using namespace biortheq::cli;
  CLI::App app{"Equilibrium measures and ensembles for bi-orthogonal log kernels", "biortheq"};
  app.set_version_flag("--version", BIORTHEQ_VERSION);

  std::string task;
  std::string config_path;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  app.add_option("task", task, "Task to run")->required()->check(CLI::IsMember(kTasks));
  app.add_option("--config", config_path, "JSON configuration file")
      ->required()
      ->check(CLI::ExistingFile);
  app.add_option("--out", out, "Output directory (overrides output.directory)");
  app.add_option("--seed", seed, "RNG seed (overrides task.seed)");
  app.add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitValidation;
  }

  json doc;
  try {
    std::ifstream is(config_path);
    doc = json::parse(is);
  } catch (const json::exception& e) {
    std::cerr << "config: " << e.what() << "\n";
    return kExitValidation;
  }

  if (threads) biortheq::set_thread_count(*threads);

  try {
    const RunOutcome r = run(doc, Overrides{task, out, seed});
    for (const auto& d : r.diagnostics) std::cerr << to_string(d) << "\n";
    if (r.summary.contains("error"))
      std::cerr << r.summary["error"]["kind"].get<std::string>() << ": "
                << r.summary["error"]["message"].get<std::string>() << "\n";
    if (r.exit_code != kExitValidation)
      std::cout << r.summary.value("status", "") << " " << r.directory.string() << "\n";
    return r.exit_code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}
