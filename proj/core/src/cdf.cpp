#include "biortheq/cdf.hpp"

#include "biortheq/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace biortheq {

std::vector<double> empirical_grid_cdf(const GridSet& grid, std::span<const std::size_t> indices) {
  if (!grid.real_line) throw StructuralError("CDF needs a real grid");
  if (indices.empty()) throw StructuralError("CDF of an empty configuration");
  std::vector<double> counts(grid.size(), 0.0);
  for (auto i : indices) {
    if (i >= grid.size()) throw StructuralError("configuration index outside the grid");
    counts[i] += 1.0;
  }
  const double m = static_cast<double>(indices.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    acc += counts[i];
    counts[i] = acc / m;
  }
  return counts;
}

double sup_distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw StructuralError("CDF vectors differ in length");
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

double ks_distance(std::vector<double> xs, const std::function<double(double)>& cdf) {
  if (xs.empty()) throw StructuralError("KS distance of an empty sample");
  std::sort(xs.begin(), xs.end());
  const double m = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t j = 0; j < xs.size(); ++j) {
    const double F = cdf(xs[j]);
    d = std::max({d, static_cast<double>(j + 1) / m - F, F - static_cast<double>(j) / m});
  }
  return d;
}

bool levy_within(std::span<const double> xs, const std::function<double(double)>& cdf, double h) {
  const double m = static_cast<double>(xs.size());
  for (std::size_t j = 0; j < xs.size(); ++j) {
    // after the jump at xs[j]
    if (static_cast<double>(j + 1) / m > cdf(xs[j] + h) + h) return false;
    // just before the jump at xs[j]
    if (cdf(xs[j] - h) - h > static_cast<double>(j) / m) return false;
  }
  return true;
}

bool ks_within(std::span<const double> xs, const std::function<double(double)>& cdf, double h) {
  const double m = static_cast<double>(xs.size());
  for (std::size_t j = 0; j < xs.size(); ++j) {
    const double F = cdf(xs[j]);
    if (static_cast<double>(j + 1) / m - F > h || F - static_cast<double>(j) / m > h) return false;
  }
  return true;
}

double levy_distance(std::vector<double> xs, const std::function<double(double)>& cdf) {
  if (xs.empty()) throw StructuralError("Levy distance of an empty sample");
  std::sort(xs.begin(), xs.end());
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    (levy_within(xs, cdf, mid) ? hi : lo) = mid;
  }
  return hi;
}

double arcsine_cdf(double x, double a, double b) {
  if (x <= a) return 0.0;
  if (x >= b) return 1.0;
  const double t = (2.0 * x - a - b) / (b - a);
  return 0.5 + std::asin(t) / std::numbers::pi;
}

double semicircle_cdf(double x, double r) {
  if (x <= -r) return 0.0;
  if (x >= r) return 1.0;
  const double t = x / r;
  return 0.5 + (t * std::sqrt(1.0 - t * t) + std::asin(t)) / std::numbers::pi;
}

double uniform_cdf(double x, double a, double b) {
  if (x <= a) return 0.0;
  if (x >= b) return 1.0;
  return (x - a) / (b - a);
}

}  // namespace biortheq
