#pragma once

#include "biortheq/ensemble.hpp"
#include "biortheq/equilibrium.hpp"
#include "biortheq/extremal.hpp"
#include "biortheq/fekete.hpp"
#include "biortheq/geometry.hpp"

#include "json.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace biortheq::cli {

using nlohmann::json;

inline const std::vector<std::string> kTasks = {
    "equilibrium", "fekete", "sample", "partition", "frostman", "extremal", "admissibility"};

struct Diagnostic {
  std::string path;  // JSON pointer-like location, e.g. "task.k"
  std::string message;
};

std::string to_string(const Diagnostic& d);

struct ProblemConfig {
  std::optional<DomainSet> domain;
  MapSpec map = MapSpec::identity();
  WeightSpec weight;
  std::size_t grid_size = 400;
  TruncationOptions truncation;
  ShellSchedule admissibility;
};

enum class ReferenceCdf { none, arcsine, semicircle, uniform };

struct TaskConfig {
  std::string type;
  std::optional<std::uint64_t> seed;

  // equilibrium / frostman
  SolverOptions solver;
  double frostman_tol = 5e-3;

  // fekete
  int k = 10;
  std::optional<int> k_max;
  int k_step = 1;
  ExchangeOptions exchange;
  bool reference = true;  // also solve for the equilibrium reference

  // sample
  std::uint64_t steps = 100000;
  std::optional<std::uint64_t> burn;
  std::optional<std::uint64_t> thin;
  std::string base_measure = "lebesgue";
  std::optional<double> eta;
  std::optional<double> delta_ref;
  std::optional<double> rho;
  ReferenceCdf reference_cdf = ReferenceCdf::none;
  double reference_radius = 2.0;
  CdfMetric metric = CdfMetric::kolmogorov;

  // partition
  std::vector<int> k_list;
  std::size_t N = 10000;
  ZkMethod method = ZkMethod::automatic;
  double exact_budget = 1e6;

  // extremal
  std::vector<Point> test_points;
  std::optional<GreenFunctionSpec> green;
  double max_spread = 0.5;

  // admissibility
  std::optional<double> delta;
};

struct OutputConfig {
  std::string directory = "out";
  bool json = true;
  bool csv = true;
};

struct RunConfig {
  ProblemConfig problem;
  TaskConfig task;
  OutputConfig output;
  json resolved;  // the input with every default filled in
};

struct ParseResult {
  std::optional<RunConfig> config;
  std::vector<Diagnostic> diagnostics;
};

/// Parses and checks a configuration document. `config` is set only when
/// there are no diagnostics.
ParseResult parse_config(const json& doc);

/// Diagnostics for a configuration; empty iff run() would get past validation.
std::vector<Diagnostic> validate(const json& doc);

}  // namespace biortheq::cli
