#pragma once

#include "biortheq/geometry.hpp"
#include "biortheq/kernel.hpp"

#include <cstddef>
#include <optional>
#include <vector>

namespace biortheq {

struct SolverOptions {
  int max_iters = 50000;
  double tol_energy = 1e-10;    // relative decrease, sustained over `stall_window` iterations
  double tol_frostman = 1e-4;   // max KKT (Frostman) residual
  int stall_window = 10;
  double armijo = 1e-4;         // sufficient-decrease factor
  double initial_step = 1.0;    // line search starts here every iteration
  int max_halvings = 60;
  /// Support threshold; 0 selects 1e-8 / n.
  double support_threshold = 0.0;
  bool record_trace = true;
};

struct ResidualReport {
  double r_minus = 0.0;  // max over grid of (F_w - U)_+
  double r_plus = 0.0;   // max over support of (U - F_w)_+
  std::size_t worst_minus = 0;
  std::size_t worst_plus = 0;
  double tol = 0.0;
  bool pass = false;

  double max() const { return r_minus > r_plus ? r_minus : r_plus; }
};

struct EquilibriumResult {
  DiscreteMeasure mu_star;
  double V_w = 0.0;  // minimal energy
  double F_w = 0.0;  // V_w - int Q dmu*
  std::vector<std::size_t> support_idx;
  ResidualReport residual_report;  // from the solver's own gradient
  int iterations = 0;
  bool converged = false;
  std::vector<double> energy_trace;  // energy after each accepted step (index 0: start)
};

/// Projected-gradient minimization of w^T K w over the probability simplex.
EquilibriumResult minimize_energy(const KernelMatrix& km, const SolverOptions& opts = {},
                                  std::optional<std::vector<double>> initial = std::nullopt);

/// Euclidean projection onto {w >= 0, sum w = 1} (sort-and-threshold).
void project_to_simplex(std::span<const double> v, std::span<double> out);

/// Frostman residuals of a solver result, recomputed from potentials.
ResidualReport frostman_check(const EquilibriumResult& res, const WeightSpec& Q,
                              const MapSpec& f, double tol);

struct CertificateReport {
  bool pass = false;
  double constant = 0.0;  // median of U over the support
  double worst_below = 0.0;  // max over grid of (C - tol - U)_+
  double worst_above = 0.0;  // max over support of (U - C - tol)_+
  bool degenerate = false;   // single-point support
};

/// Checks whether some constant C makes the Frostman inequalities hold for mu.
CertificateReport certify_minimizer(const DiscreteMeasure& mu, const WeightSpec& Q,
                                    const MapSpec& f, double tol);

/// E^Q(mu) - V_w.
double rate_function(const DiscreteMeasure& mu, const EquilibriumResult& res,
                     const KernelMatrix& km);

/// Equilibrium on a bounded domain or on an adaptively truncated unbounded one.
struct EquilibriumRun {
  GridPtr grid;
  KernelMatrix kernel;
  EquilibriumResult result;
  double radius = 0.0;  // truncation radius (sup |z| for bounded domains)
  int doublings = 0;
};

EquilibriumRun solve_equilibrium(const DomainSet& domain, const WeightSpec& Q, const MapSpec& f,
                                 std::size_t n, const SolverOptions& solver = {},
                                 const TruncationOptions& truncation = {},
                                 const ShellSchedule& schedule = {});

/// CDF of mu at the right edge of each cell (real grids only).
std::vector<double> cell_cdf(const DiscreteMeasure& mu);

/// max_i |cdf_i - F(x_i + width_i / 2)| for an analytic CDF F.
template <class Cdf>
double cdf_distance(const DiscreteMeasure& mu, Cdf&& F) {
  const auto cdf = cell_cdf(mu);
  double d = 0.0;
  const auto& g = *mu.grid;
  for (std::size_t i = 0; i < cdf.size(); ++i) {
    const double edge = g.points[i].real() + 0.5 * g.cell_width[i];
    const double diff = cdf[i] - F(edge);
    d = diff > d ? diff : (-diff > d ? -diff : d);
  }
  return d;
}

}  // namespace biortheq
