#pragma once

#include "config.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace biortheq::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitValidation = 2,
  kExitNoConvergence = 3,
  kExitResource = 4,
};

struct RunOutcome {
  int exit_code = kExitOk;
  json summary;
  std::vector<Diagnostic> diagnostics;
  std::filesystem::path directory;
  std::vector<std::string> files;  // written artifacts, manifest excluded
};

struct Overrides {
  std::optional<std::string> task;  // must match task.type when given
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
};

/// Applies the overrides, validates, runs the task and writes summary.json,
/// the CSV tables and manifest.csv. Validation failures write nothing.
RunOutcome run(const json& doc, const Overrides& overrides = {});

}  // namespace biortheq::cli
