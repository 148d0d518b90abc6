#pragma once

#include "biortheq/fekete.hpp"
#include "biortheq/geometry.hpp"

#include <span>
#include <string>
#include <vector>

namespace biortheq {

/// Green function of the complement of [a, b] with pole at infinity:
/// log|w + sqrt(w^2 - 1)|, w = (2z - a - b) / (b - a), branch with modulus >= 1.
double green_interval(Point z, double a, double b);

/// log+(|z - c| / R).
double green_disk(Point z, Point c, double R);

/// Closed-form Green function of an interval or a disk.
class GreenFunctionSpec {
 public:
  enum class Kind { interval, disk };

  /// Throws ParameterError unless a < b.
  static GreenFunctionSpec interval(double a, double b);
  /// Throws ParameterError unless R > 0.
  static GreenFunctionSpec disk(Point center, double R);

  Kind kind() const { return kind_; }
  double operator()(Point z) const;
  /// Logarithmic capacity: (b - a) / 4 or R.
  double capacity() const;
  std::string describe() const;

 private:
  GreenFunctionSpec(Kind kind, double a, double b, Point c, double R)
      : kind_(kind), a_(a), b_(b), c_(c), R_(R) {}
  Kind kind_;
  double a_, b_;
  Point c_;
  double R_;
};

/// Lower bound L_k(z) <= W_{K,Q}(z) from the one-variable slice of a Fekete-type
/// configuration with coordinate `slice` freed:
/// h(t) = prod_{i != slice} (t - a_i)(f(t) - f(a_i)),
/// L_k(z) = (1/k) [log|h(z)| - max_grid (log|h| - k Q)].
/// Throws StructuralError when the grid maximum is -inf.
double wkq_lower_estimate(Point z, const Configuration& config, const GridSet& grid,
                          const WeightSpec& Q, const MapSpec& f, std::size_t slice = 0);

struct BwReport {
  std::vector<int> ks;
  std::vector<double> max_gap;  // per k: max over test points of B_k(z)
  double overall_max = 0.0;
  double spread = 0.0;          // max - min of max_gap across k
  double trend = 0.0;           // least-squares slope times the k range
  bool pass = false;
};

/// B_k(z) = L_k(z) - V_D(z) - V_D(f(z)) over all configurations and test
/// points. Passes when the per-k maxima spread by less than `max_spread` and
/// do not trend upward by more than `max_trend`. Needs at least two
/// configurations.
BwReport bw_bound_check(std::span<const Configuration> configs, std::span<const Point> tests,
                        const GreenFunctionSpec& D, const GridSet& grid, const WeightSpec& Q,
                        const MapSpec& f, double max_spread = 0.5, double max_trend = 0.25);

}  // namespace biortheq
