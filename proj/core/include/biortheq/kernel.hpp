#pragma once

#include "biortheq/geometry.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace biortheq {

/// Nonnegative weights over a grid. Probability measures have mass 1.
struct DiscreteMeasure {
  GridPtr grid;
  std::vector<double> weights;

  double mass() const;
  bool is_probability(double tol = 1e-12) const;

  static DiscreteMeasure uniform(GridPtr grid);
  /// Normalized cell masses, i.e. the restriction of Lebesgue measure.
  static DiscreteMeasure lebesgue(GridPtr grid);
  /// Throws StructuralError on size mismatch and ParameterError on negative weights.
  static DiscreteMeasure from_weights(GridPtr grid, std::vector<double> weights);
};

/// Per-point data needed to evaluate the regularized kernel on a grid.
struct GridValues {
  std::vector<double> q;  // Q(x_i)
  std::vector<Point> fx;  // f(x_i)
};

GridValues evaluate_on_grid(const GridSet& grid, const WeightSpec& Q, const MapSpec& f);

/// Largest grid size accepted by assemble_kernel_matrix. Reads BIORTHEQ_MAX_GRID
/// when set, otherwise 4096.
std::size_t max_grid_size();

/// Dense symmetric matrix of k_eps(x_i, x_j); row-major.
class KernelMatrix {
 public:
  KernelMatrix(GridPtr grid, GridValues values, double eps, bool use_map,
               std::vector<double> entries);

  std::size_t size() const { return n_; }
  double operator()(std::size_t i, std::size_t j) const { return entries_[i * n_ + j]; }
  std::span<const double> row(std::size_t i) const {
    return {entries_.data() + i * n_, n_};
  }
  double eps() const { return eps_; }
  bool uses_map() const { return use_map_; }
  const GridPtr& grid() const { return grid_; }
  std::span<const double> q_values() const { return values_.q; }
  std::span<const Point> f_values() const { return values_.fx; }
  const std::vector<double>& entries() const { return entries_; }

  /// out = K w with a fixed per-row summation order.
  void multiply(std::span<const double> w, std::span<double> out) const;
  /// w^T K w.
  double quadratic_form(std::span<const double> w) const;

 private:
  GridPtr grid_;
  GridValues values_;
  double eps_;
  bool use_map_;
  std::size_t n_;
  std::vector<double> entries_;
};

/// -log max(|x-y|, eps) - log max(|f(x)-f(y)|, eps) + Q(x) + Q(y).
double modified_kernel(Point x, Point y, const WeightSpec& Q, const MapSpec& f, double eps);

struct KernelOptions {
  std::size_t max_n = 0;  // 0: use max_grid_size()
  bool use_map = true;    // false drops the f factor (classical single-log kernel)
};

/// Kernel matrix with eps = grid.spacing. Throws ResourceError above the size cap.
KernelMatrix assemble_kernel_matrix(GridPtr grid, const WeightSpec& Q, const MapSpec& f,
                                    const KernelOptions& opts = {});

/// E^Q(mu) = sum_ij w_i w_j k_eps(x_i, x_j), diagonal included.
double energy(const DiscreteMeasure& mu, const KernelMatrix& km);

/// I(mu) under the regularized convention.
double log_energy(const DiscreteMeasure& mu);
/// I^Q(mu) = I(mu) + 2 mass * int Q dmu.
double weighted_log_energy(const DiscreteMeasure& mu, const WeightSpec& Q);
/// I(f_* mu).
double pushforward_energy(const DiscreteMeasure& mu, const MapSpec& f);
/// int Q dmu.
double integrate(const DiscreteMeasure& mu, const WeightSpec& Q);

/// p_mu(z) = sum_j w_j (-log max(|z - x_j|, eps)).
double potential(const DiscreteMeasure& mu, Point z);
/// p_mu(z) + p_{f_* mu}(f(z)) + Q(z).
double modified_potential(const DiscreteMeasure& mu, Point z, const WeightSpec& Q,
                          const MapSpec& f);
/// modified_potential at every grid point of mu's grid.
std::vector<double> modified_potential_on_grid(const DiscreteMeasure& mu, const WeightSpec& Q,
                                               const MapSpec& f);

/// exp(-min I) over probability measures on the grid.
double classical_capacity(GridPtr grid);

/// Throws StructuralError unless the two grids are the same object or hold
/// identical points.
void require_same_grid(const GridPtr& a, const GridPtr& b, const char* what);

}  // namespace biortheq
