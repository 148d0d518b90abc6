#pragma once

#include "biortheq/geometry.hpp"
#include "biortheq/kernel.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace biortheq {

/// An ordered (k+1)-tuple of points. Grid-constrained configurations also
/// carry the grid index of every point.
struct Configuration {
  std::vector<Point> points;
  std::vector<std::size_t> indices;
  int k = 0;
  double log_vdm = 0.0;

  std::vector<double> real_parts() const;
};

/// sum_{i<j} [log|z_i - z_j| + log|f(z_i) - f(z_j)|] - k sum_i Q(z_i), k = #points - 1.
/// Returns -inf when two points or two f-values coincide.
double log_vdm(std::span<const Point> points, const WeightSpec& Q, const MapSpec& f);

/// Same objective from precomputed grid values.
double log_vdm_indexed(const GridSet& grid, const GridValues& vals,
                       std::span<const std::size_t> indices);

/// Configuration from grid indices with its log_vdm filled in.
Configuration make_configuration(const GridSet& grid, const GridValues& vals,
                                 std::vector<std::size_t> indices);

/// Weighted Leja-type greedy start on the grid; deterministic, ties go to the
/// lowest grid index.
Configuration greedy_leja(const GridSet& grid, int k, const WeightSpec& Q, const MapSpec& f);

struct ExchangeOptions {
  int max_passes = 200;
  /// Upper bound on k(k+1)/2 * n^2 for the two-point exchange that runs when
  /// single-point passes stall. 0 disables it.
  double pair_budget = 2e7;
};

/// Coordinate-wise grid argmax refinement. `pass_log` receives log_vdm after
/// every pass (entry 0 is the input value).
Configuration exchange_optimize(const Configuration& config, const GridSet& grid,
                                const WeightSpec& Q, const MapSpec& f,
                                const ExchangeOptions& opts = {},
                                std::vector<double>* pass_log = nullptr);

/// |VDM_k^Q|^{2/(k(k+1))}; 0 for colliding configurations.
double delta_k(const Configuration& config);

/// greedy_leja followed by exchange_optimize.
Configuration fekete_configuration(const GridSet& grid, int k, const WeightSpec& Q,
                                   const MapSpec& f, const ExchangeOptions& opts = {},
                                   std::vector<double>* pass_log = nullptr);

struct FeketeEntry {
  int k;
  double delta;
  double log_vdm;
  Configuration config;
  std::vector<double> empirical_cdf;  // on the grid; empty for complex grids
  bool monotone_passes;               // log_vdm never decreased across exchange passes
};

struct FeketeSeries {
  std::vector<FeketeEntry> entries;
  std::optional<double> reference;  // exp(-V_w)
};

/// Fekete-type configurations for k = 2..k_max (every `k_step`-th k, always
/// including k_max).
FeketeSeries fekete_sequence(const GridSet& grid, int k_max, const WeightSpec& Q,
                             const MapSpec& f, std::optional<double> equilibrium_energy = {},
                             int k_step = 1, const ExchangeOptions& opts = {});

/// Fraction of the configuration inside the closed disk |z| <= M.
double tightness_report(const Configuration& config, double M);

}  // namespace biortheq
