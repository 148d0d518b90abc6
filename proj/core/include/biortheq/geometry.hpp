#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace biortheq {

/// Points live in the complex plane; sets on the real line have zero imaginary part.
using Point = std::complex<double>;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// |a - b| without the hypot cost when both points are real.
inline double gap(Point a, Point b) {
  if (a.imag() == 0.0 && b.imag() == 0.0) return std::abs(a.real() - b.real());
  return std::abs(a - b);
}

// ---------------------------------------------------------------------------
// Domain

struct Interval {
  double lo;
  double hi;
  double length() const { return hi - lo; }
  bool bounded() const { return std::isfinite(lo) && std::isfinite(hi); }
};

/// Axis-aligned closed rectangle [re_lo, re_hi] x [im_lo, im_hi].
struct Rectangle {
  double re_lo, re_hi;
  double im_lo, im_hi;
  double area() const { return (re_hi - re_lo) * (im_hi - im_lo); }
};

/// The closed set K: a union of disjoint real intervals (the first may start
/// at -inf, the last may end at +inf) or a single rectangle in C.
class DomainSet {
 public:
  static DomainSet intervals(std::vector<Interval> components);
  static DomainSet rectangle(Rectangle rect);

  bool is_real() const { return std::holds_alternative<std::vector<Interval>>(shape_); }
  bool unbounded() const;
  const std::vector<Interval>& components() const;
  const Rectangle& rect() const;

  bool contains(Point z, double tol = 1e-12) const;
  /// Total length (intervals) or area (rectangle); +inf when unbounded.
  double measure() const;
  /// Smallest and largest real part over K.
  double min_real() const;
  double max_real() const;
  /// sup |z| over K (+inf when unbounded).
  double max_modulus() const;
  /// K intersected with the closed disk |z| <= radius. Throws DomainError if empty.
  DomainSet truncated(double radius) const;

  std::string describe() const;

 private:
  explicit DomainSet(std::variant<std::vector<Interval>, Rectangle> shape)
      : shape_(std::move(shape)) {}
  std::variant<std::vector<Interval>, Rectangle> shape_;
};

// ---------------------------------------------------------------------------
// The map f

class MapSpec {
 public:
  enum class Kind { identity, power, exp, log, polynomial };

  static MapSpec identity() { return MapSpec(Kind::identity, 1.0, {}); }
  /// Principal branch of z^theta, theta > 0; defined for Re z >= 0.
  static MapSpec power(double theta);
  static MapSpec exp() { return MapSpec(Kind::exp, 0.0, {}); }
  /// Principal log; defined for Re z > 0.
  static MapSpec log() { return MapSpec(Kind::log, 0.0, {}); }
  /// coefficients[i] multiplies z^i.
  static MapSpec polynomial(std::vector<double> coefficients);

  Kind kind() const { return kind_; }
  double theta() const { return theta_; }
  const std::vector<double>& coefficients() const { return coeffs_; }

  /// Throws DomainError outside the branch domain.
  Point operator()(Point z) const;
  Point derivative(Point z) const;
  /// log|f(z)| evaluated without forming f(z) where that could overflow.
  double log_abs(Point z) const;
  /// True when the branch of f is defined at z.
  bool in_branch_domain(Point z) const;
  /// True when every point of the domain lies in the branch domain.
  bool admits(const DomainSet& domain) const;
  std::string describe() const;

 private:
  MapSpec(Kind kind, double theta, std::vector<double> coeffs)
      : kind_(kind), theta_(theta), coeffs_(std::move(coeffs)) {}
  Kind kind_;
  double theta_;
  std::vector<double> coeffs_;
};

// ---------------------------------------------------------------------------
// The external field Q

class WeightSpec {
 public:
  struct Term {
    enum class Kind {
      monomial,    // coef * x^power on the real line (real part for complex z)
      abs_power,   // coef * |z|^power
      log1p_abs2,  // coef * log(1 + |z|^2)
    };
    Kind kind;
    double coef;
    double power;
  };

  WeightSpec() = default;
  explicit WeightSpec(std::vector<Term> terms) : terms_(std::move(terms)) {}

  static WeightSpec zero() { return {}; }
  /// coef * x^power.
  static WeightSpec monomial(double coef, double power);

  WeightSpec& add(Term t) {
    terms_.push_back(t);
    return *this;
  }
  /// Adds piecewise-linear tabulated values (real points, ascending).
  WeightSpec& set_table(std::vector<double> xs, std::vector<double> values);
  /// Returns c * Q.
  WeightSpec scaled(double c) const;
  /// Returns Q + c.
  WeightSpec shifted(double c) const;

  const std::vector<Term>& terms() const { return terms_; }
  bool has_table() const { return !table_x_.empty(); }
  const std::vector<double>& table_x() const { return table_x_; }
  const std::vector<double>& table_values() const { return table_v_; }
  double scale() const { return scale_; }
  double offset() const { return offset_; }

  double operator()(Point z) const;
  std::string describe() const;

 private:
  std::vector<Term> terms_;
  std::vector<double> table_x_;
  std::vector<double> table_v_;
  double scale_ = 1.0;
  double offset_ = 0.0;
};

/// psi(z) = Q(z) - 1/2 log[(1+|z|^2)(1+|f(z)|^2)].
double psi(Point z, const WeightSpec& Q, const MapSpec& f);

/// log(1 + e^{2L}) for L = log|w|, stable for huge and tiny |w|.
double log1p_abs2_from_log(double log_abs);

// ---------------------------------------------------------------------------
// Admissibility screen

struct ShellSchedule {
  double r0 = 1.0;
  int shells = 20;          // J: shells [R_j, R_{j+1}) for j = 0..J
  double threshold = 1.0;   // required minimum of psi on the last shell
  int samples_per_shell = 257;
};

struct ShellRecord {
  int index;
  double r_inner;
  double r_outer;
  double min_psi;      // NaN when the shell misses K
  Point argmin;
  bool empty;
};

struct AdmissibilityReport {
  enum class Verdict { admissible, suspect };
  Verdict verdict = Verdict::admissible;
  bool trivially_bounded = false;
  std::optional<int> offending_shell;
  std::vector<ShellRecord> shells;
  std::vector<std::string> notes;

  bool admissible() const { return verdict == Verdict::admissible; }
};

const char* to_string(AdmissibilityReport::Verdict v);

AdmissibilityReport check_f_admissible(const DomainSet& domain, const WeightSpec& Q,
                                       const MapSpec& f, const ShellSchedule& schedule = {});

/// Screens (1 - delta) Q for f-admissibility; delta must lie in (0, 1).
AdmissibilityReport check_strong_f_admissible(const DomainSet& domain, const WeightSpec& Q,
                                              const MapSpec& f, double delta,
                                              const ShellSchedule& schedule = {});

// ---------------------------------------------------------------------------
// Grids

/// Midpoint discretization of a bounded domain.
struct GridSet {
  std::vector<Point> points;
  std::vector<double> cell_mass;   // length or area of each cell
  std::vector<double> cell_width;  // width of each cell along the real axis
  double spacing = 0.0;            // epsilon: half the minimum cell width
  std::optional<DomainSet> parent;
  bool real_line = true;

  std::size_t size() const { return points.size(); }
  double total_mass() const;

  /// Grid from explicit points; masses default to 1 and spacing to half the
  /// minimal pairwise gap.
  static GridSet from_points(std::vector<Point> points, std::vector<double> masses = {},
                             std::optional<double> spacing = std::nullopt);
  /// Real grid from x coordinates.
  static GridSet from_reals(const std::vector<double>& xs, std::vector<double> masses = {},
                            std::optional<double> spacing = std::nullopt);
};

using GridPtr = std::shared_ptr<const GridSet>;

/// Midpoint grid with cells allocated proportionally to component length/area.
GridSet build_grid(const DomainSet& domain, std::size_t n);

/// Real parts of the grid points; requires a real grid.
std::vector<double> real_coordinates(const GridSet& grid);

// ---------------------------------------------------------------------------
// Adaptive truncation

struct TruncationOptions {
  double initial_radius = 2.0;
  int max_doublings = 12;
  double margin = 0.05;  // outer fraction of the truncated region
};

/// What the equilibrium callback reports back for a truncated domain.
struct SupportProbe {
  std::vector<Point> support;
};

using SupportSolver = std::function<SupportProbe(const DomainSet& truncated)>;

struct TruncationResult {
  double radius;
  DomainSet domain;
  int doublings;
};

/// Doubles R from opts.initial_radius until the computed support sits strictly
/// inside |z| <= (1 - margin) R. Bounded domains are returned unchanged.
TruncationResult adaptive_truncation(const DomainSet& domain, const WeightSpec& Q,
                                     const MapSpec& f, const SupportSolver& solve,
                                     const TruncationOptions& opts = {},
                                     const ShellSchedule& schedule = {});

}  // namespace biortheq
