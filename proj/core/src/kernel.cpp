#include "biortheq/kernel.hpp"

#include "biortheq/equilibrium.hpp"
#include "biortheq/error.hpp"
#include "biortheq/parallel.hpp"

#include <cmath>
#include <cstdlib>
#include <string>

namespace biortheq {

namespace {

inline double neg_log_reg(double d, double eps) { return -std::log(d > eps ? d : eps); }

double pair_log_energy(const DiscreteMeasure& mu, const std::vector<Point>& pts) {
  const auto& w = mu.weights;
  const double eps = mu.grid->spacing;
  const std::size_t n = w.size();
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (w[i] == 0.0) continue;
    double row = 0.0;
    for (std::size_t j = 0; j < n; ++j) row += w[j] * neg_log_reg(gap(pts[i], pts[j]), eps);
    total += w[i] * row;
  }
  return total;
}

}  // namespace

// ---------------------------------------------------------------------------
// DiscreteMeasure

double DiscreteMeasure::mass() const {
  double s = 0.0;
  for (double v : weights) s += v;
  return s;
}

bool DiscreteMeasure::is_probability(double tol) const {
  return std::abs(mass() - 1.0) <= tol;
}

DiscreteMeasure DiscreteMeasure::uniform(GridPtr grid) {
  if (!grid || grid->size() == 0) throw StructuralError("measure needs a non-empty grid");
  const std::size_t n = grid->size();
  return {std::move(grid), std::vector<double>(n, 1.0 / static_cast<double>(n))};
}

DiscreteMeasure DiscreteMeasure::lebesgue(GridPtr grid) {
  if (!grid || grid->size() == 0) throw StructuralError("measure needs a non-empty grid");
  const double total = grid->total_mass();
  std::vector<double> w;
  w.reserve(grid->size());
  for (double m : grid->cell_mass) w.push_back(m / total);
  return {std::move(grid), std::move(w)};
}

DiscreteMeasure DiscreteMeasure::from_weights(GridPtr grid, std::vector<double> weights) {
  if (!grid) throw StructuralError("measure needs a grid");
  if (weights.size() != grid->size())
    throw StructuralError("weight vector length " + std::to_string(weights.size()) +
                          " does not match grid size " + std::to_string(grid->size()));
  for (double v : weights)
    if (!(v >= 0.0) || !std::isfinite(v))
      throw ParameterError("measure weights must be finite and nonnegative");
  return {std::move(grid), std::move(weights)};
}

void require_same_grid(const GridPtr& a, const GridPtr& b, const char* what) {
  if (a == b) return;
  if (a && b && a->points == b->points && a->spacing == b->spacing) return;
  throw StructuralError(std::string(what) + ": measure and kernel live on different grids");
}

// ---------------------------------------------------------------------------
// Kernel

GridValues evaluate_on_grid(const GridSet& grid, const WeightSpec& Q, const MapSpec& f) {
  GridValues v;
  v.q.reserve(grid.size());
  v.fx.reserve(grid.size());
  for (const auto& z : grid.points) {
    v.q.push_back(Q(z));
    v.fx.push_back(f(z));
  }
  return v;
}

std::size_t max_grid_size() {
  if (const char* env = std::getenv("BIORTHEQ_MAX_GRID")) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (end != env && v > 0) return static_cast<std::size_t>(v);
  }
  return 4096;
}

double modified_kernel(Point x, Point y, const WeightSpec& Q, const MapSpec& f, double eps) {
  if (!(eps > 0.0)) throw ParameterError("kernel regularization eps must be positive");
  return neg_log_reg(gap(x, y), eps) + neg_log_reg(gap(f(x), f(y)), eps) + (Q(x) + Q(y));
}

KernelMatrix::KernelMatrix(GridPtr grid, GridValues values, double eps, bool use_map,
                           std::vector<double> entries)
    : grid_(std::move(grid)),
      values_(std::move(values)),
      eps_(eps),
      use_map_(use_map),
      n_(grid_->size()),
      entries_(std::move(entries)) {}

void KernelMatrix::multiply(std::span<const double> w, std::span<double> out) const {
  parallel_for(n_, [&](std::size_t i) {
    const double* r = entries_.data() + i * n_;
    const double* x = w.data();
    // four interleaved partial sums in a fixed order
    double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
    std::size_t j = 0;
    for (; j + 4 <= n_; j += 4) {
      s0 += r[j] * x[j];
      s1 += r[j + 1] * x[j + 1];
      s2 += r[j + 2] * x[j + 2];
      s3 += r[j + 3] * x[j + 3];
    }
    for (; j < n_; ++j) s0 += r[j] * x[j];
    out[i] = (s0 + s1) + (s2 + s3);
  });
}

double KernelMatrix::quadratic_form(std::span<const double> w) const {
  std::vector<double> kw(n_);
  multiply(w, kw);
  double s = 0.0;
  for (std::size_t i = 0; i < n_; ++i) s += w[i] * kw[i];
  return s;
}

KernelMatrix assemble_kernel_matrix(GridPtr grid, const WeightSpec& Q, const MapSpec& f,
                                    const KernelOptions& opts) {
  if (!grid || grid->size() == 0) throw StructuralError("kernel needs a non-empty grid");
  const std::size_t cap = opts.max_n ? opts.max_n : max_grid_size();
  const std::size_t n = grid->size();
  if (n > cap)
    throw ResourceError("grid of " + std::to_string(n) + " points exceeds the kernel cap of " +
                        std::to_string(cap) + " (set BIORTHEQ_MAX_GRID to raise it)");
  const double eps = grid->spacing;
  if (!(eps > 0.0)) throw ParameterError("grid spacing must be positive");

  GridValues vals = evaluate_on_grid(*grid, Q, f);
  std::vector<double> entries(n * n);
  const auto& pts = grid->points;
  const bool use_map = opts.use_map;
  parallel_for(n, [&](std::size_t i) {
    for (std::size_t j = i; j < n; ++j) {
      double v = neg_log_reg(gap(pts[i], pts[j]), eps);
      if (use_map) v += neg_log_reg(gap(vals.fx[i], vals.fx[j]), eps);
      v += vals.q[i] + vals.q[j];
      entries[i * n + j] = v;
      entries[j * n + i] = v;
    }
  });
  for (double v : entries)
    if (!std::isfinite(v)) throw NumericalError("kernel matrix has non-finite entries");
  return KernelMatrix(std::move(grid), std::move(vals), eps, use_map, std::move(entries));
}

// ---------------------------------------------------------------------------
// Energies

double energy(const DiscreteMeasure& mu, const KernelMatrix& km) {
  require_same_grid(mu.grid, km.grid(), "energy");
  return km.quadratic_form(mu.weights);
}

double log_energy(const DiscreteMeasure& mu) {
  if (!mu.grid) throw StructuralError("measure without grid");
  return pair_log_energy(mu, mu.grid->points);
}

double integrate(const DiscreteMeasure& mu, const WeightSpec& Q) {
  double s = 0.0;
  for (std::size_t i = 0; i < mu.weights.size(); ++i)
    if (mu.weights[i] != 0.0) s += mu.weights[i] * Q(mu.grid->points[i]);
  return s;
}

double weighted_log_energy(const DiscreteMeasure& mu, const WeightSpec& Q) {
  return log_energy(mu) + 2.0 * mu.mass() * integrate(mu, Q);
}

double pushforward_energy(const DiscreteMeasure& mu, const MapSpec& f) {
  if (!mu.grid) throw StructuralError("measure without grid");
  std::vector<Point> fx;
  fx.reserve(mu.grid->size());
  for (const auto& z : mu.grid->points) fx.push_back(f(z));
  return pair_log_energy(mu, fx);
}

// ---------------------------------------------------------------------------
// Potentials

double potential(const DiscreteMeasure& mu, Point z) {
  const double eps = mu.grid->spacing;
  double s = 0.0;
  for (std::size_t j = 0; j < mu.weights.size(); ++j)
    if (mu.weights[j] != 0.0) s += mu.weights[j] * neg_log_reg(gap(z, mu.grid->points[j]), eps);
  return s;
}

double modified_potential(const DiscreteMeasure& mu, Point z, const WeightSpec& Q,
                          const MapSpec& f) {
  const double eps = mu.grid->spacing;
  const Point fz = f(z);
  double s = 0.0;
  for (std::size_t j = 0; j < mu.weights.size(); ++j) {
    if (mu.weights[j] == 0.0) continue;
    const Point xj = mu.grid->points[j];
    s += mu.weights[j] * (neg_log_reg(gap(z, xj), eps) + neg_log_reg(gap(fz, f(xj)), eps));
  }
  return s + Q(z);
}

std::vector<double> modified_potential_on_grid(const DiscreteMeasure& mu, const WeightSpec& Q,
                                               const MapSpec& f) {
  const auto& g = *mu.grid;
  const GridValues vals = evaluate_on_grid(g, Q, f);
  const double eps = g.spacing;
  const std::size_t n = g.size();
  std::vector<double> u(n);
  parallel_for(n, [&](std::size_t i) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (mu.weights[j] == 0.0) continue;
      s += mu.weights[j] * (neg_log_reg(gap(g.points[i], g.points[j]), eps) +
                            neg_log_reg(gap(vals.fx[i], vals.fx[j]), eps));
    }
    u[i] = s + vals.q[i];
  });
  return u;
}

double classical_capacity(GridPtr grid) {
  if (!grid || grid->size() == 0) throw StructuralError("capacity needs a non-empty grid");
  KernelOptions ko;
  ko.use_map = false;
  const KernelMatrix km = assemble_kernel_matrix(grid, WeightSpec::zero(), MapSpec::identity(), ko);
  SolverOptions so;
  so.tol_frostman = 1e-5;
  const EquilibriumResult res = minimize_energy(km, so);
  return std::exp(-res.V_w);
}

}  // namespace biortheq
