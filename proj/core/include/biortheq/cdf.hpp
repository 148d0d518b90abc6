#pragma once

#include "biortheq/geometry.hpp"

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace biortheq {

/// Fraction of the configuration points lying at or left of each grid point.
/// Grid must be real and ascending; indices refer to grid points.
std::vector<double> empirical_grid_cdf(const GridSet& grid, std::span<const std::size_t> indices);

/// max_i |a_i - b_i|.
double sup_distance(std::span<const double> a, std::span<const double> b);

/// Kolmogorov distance between the empirical CDF of `xs` and a continuous CDF,
/// taking both one-sided limits at every jump.
double ks_distance(std::vector<double> xs, const std::function<double(double)>& cdf);

/// Levy distance between the empirical CDF of `xs` and a continuous CDF:
/// the smallest h with F(x - h) - h <= G(x) <= F(x + h) + h for all x.
double levy_distance(std::vector<double> xs, const std::function<double(double)>& cdf);

/// True when the Levy distance is at most h. `xs` must be sorted.
bool levy_within(std::span<const double> xs, const std::function<double(double)>& cdf, double h);
/// True when the Kolmogorov distance is at most h. `xs` must be sorted.
bool ks_within(std::span<const double> xs, const std::function<double(double)>& cdf, double h);

/// CDF of the arcsine law on [a, b].
double arcsine_cdf(double x, double a = -1.0, double b = 1.0);
/// CDF of the semicircle law on [-r, r].
double semicircle_cdf(double x, double r = 2.0);
/// CDF of the uniform law on [a, b].
double uniform_cdf(double x, double a = -1.0, double b = 1.0);

}  // namespace biortheq
