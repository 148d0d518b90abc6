#pragma once

#include "biortheq/fekete.hpp"
#include "biortheq/geometry.hpp"
#include "biortheq/kernel.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <vector>

namespace biortheq {

/// Base measure nu as nonnegative weights over a grid.
struct BaseMeasure {
  GridPtr grid;
  std::vector<double> weights;
  double total = 0.0;
  std::optional<double> T;      // mass-density exponent
  std::optional<double> r0;     // mass-density radius
  std::optional<double> alpha;  // decay witness for unbounded domains

  /// nu_i = cell mass (restriction of Lebesgue measure).
  static BaseMeasure lebesgue(GridPtr grid);
  /// nu_i = 1 on every grid point.
  static BaseMeasure counting(GridPtr grid);
  /// nu_i = density(x_i) * cell mass.
  static BaseMeasure from_density(GridPtr grid, const std::function<double(Point)>& density);
  /// Throws StructuralError on size mismatch or zero total, ParameterError on
  /// negative or non-finite weights.
  static BaseMeasure from_weights(GridPtr grid, std::vector<double> weights);

  /// nu of the closed disk D(z, r), summing cells whose centre lies within r.
  double disk_mass(Point z, double r) const;
  BaseMeasure scaled(double c) const;
};

struct MassDensityReport {
  bool pass = true;
  double worst_ratio = kInf;  // min over (z, r) of nu(D(z,r)) / r^T
  Point worst_z{};
  double worst_r = 0.0;
  std::size_t checks = 0;
};

/// Checks nu(D(z,r)) >= r^T for every grid point z and r = r0 / 2^m, m = 0..12.
MassDensityReport mass_density_check(const BaseMeasure& nu, double T, double r0);

struct ChainState {
  std::vector<std::size_t> indices;
  double log_density = 0.0;
  std::uint64_t seed = 0;
  std::uint64_t proposals = 0;
  std::uint64_t accepted = 0;
};

/// Single-site Metropolis chain on (k+1)-point grid configurations targeting
/// the density |VDM_k^Q| against nu^{k+1}. Proposals redraw one coordinate
/// from nu / nu(K).
class MetropolisChain {
 public:
  MetropolisChain(const BaseMeasure& nu, int k, const WeightSpec& Q, const MapSpec& f,
                  std::uint64_t seed);

  void step();
  /// log_vdm of the current configuration from scratch.
  double recompute() const;
  /// Replaces the cached log-density by the recomputed one; returns the drift.
  double resync();

  const ChainState& state() const { return state_; }
  int k() const { return k_; }

 private:
  double pair(std::size_t a, std::size_t b) const;
  std::size_t draw_from_nu();
  double uniform01();

  GridPtr grid_;
  GridValues vals_;
  std::vector<double> cumulative_;
  double total_;
  int k_;
  std::vector<double> table_;  // pair log terms, when the grid is small enough
  std::mt19937_64 rng_;
  ChainState state_;
};

struct SampleBatch {
  GridPtr grid;
  int k = 0;
  std::vector<std::vector<std::size_t>> samples;  // grid indices per kept configuration
  std::vector<double> log_vdm;
  std::vector<double> mean_cdf;  // on the grid; empty for complex grids
  double acceptance_rate = 0.0;
  std::uint64_t seed = 0;
  std::uint64_t steps = 0;
  std::uint64_t burn = 0;
  std::uint64_t thin = 0;
  double max_drift = 0.0;

  std::size_t size() const { return log_vdm.size(); }
  /// |VDM_k^Q|^{2/(k(k+1))} of sample i.
  double root(std::size_t i) const;
  std::vector<Point> points(std::size_t i) const;
};

struct McmcOptions {
  std::uint64_t steps = 100000;
  std::optional<std::uint64_t> burn;  // default: steps / 4
  std::optional<std::uint64_t> thin;  // default: max(1, k n / 10)
  std::uint64_t seed = 0;
  std::uint64_t checkpoint = 10000;  // proposals between drift checks
  bool store = true;                 // keep configurations in the batch
};

using SampleVisitor = std::function<void(std::span<const std::size_t> indices, double log_vdm)>;

/// Runs one chain. Keeps a sample after every `thin` proposals past burn-in, so
/// the batch holds floor((steps - burn) / thin) samples. `visit` sees every
/// kept sample, also when `store` is false.
SampleBatch mcmc_sample(const BaseMeasure& nu, int k, const WeightSpec& Q, const MapSpec& f,
                        const McmcOptions& opts, const SampleVisitor& visit = {});

/// Budget on n^{k+1} for exact enumeration.
inline constexpr double kDefaultZkBudget = 1e8;

/// log Z_k by exact summation over grid tuples.
double log_exact_Zk_grid(const BaseMeasure& nu, int k, const WeightSpec& Q, const MapSpec& f,
                         double budget = kDefaultZkBudget);
double exact_Zk_grid(const BaseMeasure& nu, int k, const WeightSpec& Q, const MapSpec& f,
                     double budget = kDefaultZkBudget);

struct ZkEstimate {
  double estimate = 0.0;
  double log_estimate = 0.0;
  double std_error = 0.0;    // estimate * log_stderr
  double log_stderr = 0.0;   // jackknife standard error of log_estimate
  bool degenerate = false;   // every draw had log_vdm = -inf
  std::size_t N = 0;
  std::uint64_t seed = 0;
};

/// Plain Monte Carlo over iid tuples from (nu / nu(K))^{k+1}. Needs N >= 100.
ZkEstimate estimate_Zk_mc(const BaseMeasure& nu, int k, const WeightSpec& Q, const MapSpec& f,
                          std::size_t N, std::uint64_t seed);

enum class ZkMethod { automatic, exact, monte_carlo };

struct ZkRoot {
  int k;
  double log_Z;
  double root;         // Z_k^{2/(k(k+1))}
  double root_stderr;  // 0 for exact values
  bool exact;
};

struct ZkRootSeries {
  std::vector<ZkRoot> entries;
  std::optional<double> reference;  // exp(-V_w)
  bool monotone_decreasing() const;
};

/// Roots of Z_k over k_list. The automatic method enumerates exactly when
/// n^{k+1} <= exact_budget and uses Monte Carlo otherwise.
ZkRootSeries zk_root_sequence(const BaseMeasure& nu, std::span<const int> k_list,
                              const WeightSpec& Q, const MapSpec& f, std::size_t N,
                              std::uint64_t seed, std::optional<double> equilibrium_energy = {},
                              ZkMethod method = ZkMethod::automatic, double exact_budget = 1e6);

/// Fraction of samples whose root falls below delta_ref - eta; 0 once
/// eta >= delta_ref.
double tail_probability(const SampleBatch& batch, double eta, double delta_ref);

enum class CdfMetric { kolmogorov, levy };

/// Ball of radius rho around a reference CDF on the real line.
struct CdfBall {
  std::function<double(double)> reference;
  double rho = 0.05;
  CdfMetric metric = CdfMetric::kolmogorov;

  double distance(std::vector<double> xs) const;
  /// Membership test; `xs` must be sorted.
  bool contains(std::span<const double> xs) const;
};

struct NeighborhoodMass {
  int k = 0;
  double sigma = 0.0;
  double root = 0.0;        // (2 / (k(k+1))) log sigma; -inf without hits
  double root_bound = 0.0;  // upper bound on root from one pseudo-hit when hits == 0
  std::size_t hits = 0;
  std::size_t samples = 0;
  bool one_sided = false;
};

NeighborhoodMass neighborhood_mass(const SampleBatch& batch, const CdfBall& ball);
/// Streams a fresh chain without storing configurations.
NeighborhoodMass neighborhood_mass(const BaseMeasure& nu, int k, const WeightSpec& Q,
                                   const MapSpec& f, const CdfBall& ball,
                                   const McmcOptions& opts);

struct LdpReport {
  std::vector<int> ks;
  std::vector<double> roots;
  double mean_root = 0.0;  // fitted constant
  double slope = 0.0;      // least-squares trend of root against k
  bool sigma_decreasing = false;
  bool roots_negative = false;
  bool within_factor = false;  // rate/3 <= -root <= 3 rate for every k
  bool degenerate = false;
  double rate_ref = 0.0;
};

/// Compares the neighborhood roots with -rate_ref. Needs at least three
/// entries; a series without hits yields a degenerate report.
LdpReport ldp_slope(std::span<const NeighborhoodMass> series, double rate_ref,
                    double factor = 3.0);

}  // namespace biortheq
