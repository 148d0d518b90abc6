#include "biortheq/extremal.hpp"

#include "biortheq/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace biortheq {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// log of prod_{i != slice} |t - a_i| |f(t) - f(a_i)|
double slice_log(Point t, Point ft, const Configuration& config, std::span<const Point> fa,
                 std::size_t slice) {
  double s = 0.0;
  for (std::size_t i = 0; i < config.points.size(); ++i) {
    if (i == slice) continue;
    const double d = gap(t, config.points[i]);
    const double e = gap(ft, fa[i]);
    if (d == 0.0 || e == 0.0) return kNegInf;
    s += std::log(d) + std::log(e);
  }
  return s;
}
}  // namespace

double green_interval(Point z, double a, double b) {
  if (z.imag() == 0.0 && z.real() >= a && z.real() <= b) return 0.0;
  const Point w = (2.0 * z - a - b) / (b - a);
  const Point s = std::sqrt(w * w - 1.0);
  const double v = std::max(std::abs(w + s), std::abs(w - s));
  return std::max(0.0, std::log(v));
}

double green_disk(Point z, Point c, double R) {
  const double r = std::abs(z - c) / R;
  return r > 1.0 ? std::log(r) : 0.0;
}

GreenFunctionSpec GreenFunctionSpec::interval(double a, double b) {
  if (!(a < b) || !std::isfinite(a) || !std::isfinite(b))
    throw ParameterError("interval Green function needs finite a < b");
  return {Kind::interval, a, b, {}, 0.0};
}

GreenFunctionSpec GreenFunctionSpec::disk(Point center, double R) {
  if (!(R > 0.0) || !std::isfinite(R)) throw ParameterError("disk radius must be positive");
  return {Kind::disk, 0.0, 0.0, center, R};
}

double GreenFunctionSpec::operator()(Point z) const {
  return kind_ == Kind::interval ? green_interval(z, a_, b_) : green_disk(z, c_, R_);
}

double GreenFunctionSpec::capacity() const {
  return kind_ == Kind::interval ? 0.25 * (b_ - a_) : R_;
}

std::string GreenFunctionSpec::describe() const {
  std::ostringstream os;
  if (kind_ == Kind::interval)
    os << "interval[" << a_ << ", " << b_ << "]";
  else
    os << "disk(" << c_.real() << (c_.imag() < 0 ? "" : "+") << c_.imag() << "i, " << R_ << ")";
  return os.str();
}

double wkq_lower_estimate(Point z, const Configuration& config, const GridSet& grid,
                          const WeightSpec& Q, const MapSpec& f, std::size_t slice) {
  if (config.points.size() < 2) throw ParameterError("slice needs at least two points");
  if (slice >= config.points.size()) throw ParameterError("slice index out of range");
  if (!std::isfinite(config.log_vdm))
    throw PreconditionError("configuration has a non-finite log_vdm");
  const int k = static_cast<int>(config.points.size()) - 1;
  std::vector<Point> fa;
  fa.reserve(config.points.size());
  for (const auto& p : config.points) fa.push_back(f(p));

  double norm = kNegInf;
  for (const auto& t : grid.points)
    norm = std::max(norm, slice_log(t, f(t), config, fa, slice) - k * Q(t));
  if (norm == kNegInf) throw StructuralError("slice vanishes on every grid point");
  return (slice_log(z, f(z), config, fa, slice) - norm) / static_cast<double>(k);
}

BwReport bw_bound_check(std::span<const Configuration> configs, std::span<const Point> tests,
                        const GreenFunctionSpec& D, const GridSet& grid, const WeightSpec& Q,
                        const MapSpec& f, double max_spread, double max_trend) {
  if (configs.size() < 2) throw ParameterError("Bernstein-Walsh check needs at least two k values");
  if (tests.empty()) throw ParameterError("Bernstein-Walsh check needs test points");
  BwReport rep;
  for (const auto& c : configs) {
    double worst = kNegInf;
    for (const auto& z : tests) {
      const double b = wkq_lower_estimate(z, c, grid, Q, f) - D(z) - D(f(z));
      worst = std::max(worst, b);
    }
    rep.ks.push_back(c.k);
    rep.max_gap.push_back(worst);
  }
  const auto [lo, hi] = std::minmax_element(rep.max_gap.begin(), rep.max_gap.end());
  rep.overall_max = *hi;
  rep.spread = *hi - *lo;

  const double n = static_cast<double>(rep.ks.size());
  const double km = std::accumulate(rep.ks.begin(), rep.ks.end(), 0.0) / n;
  const double gm = std::accumulate(rep.max_gap.begin(), rep.max_gap.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < rep.ks.size(); ++i) {
    sxy += (rep.ks[i] - km) * (rep.max_gap[i] - gm);
    sxx += (rep.ks[i] - km) * (rep.ks[i] - km);
  }
  const auto [kmin, kmax] = std::minmax_element(rep.ks.begin(), rep.ks.end());
  rep.trend = sxx > 0.0 ? sxy / sxx * (*kmax - *kmin) : 0.0;
  rep.pass = std::isfinite(rep.overall_max) && rep.spread < max_spread && rep.trend <= max_trend;
  return rep;
}

}  // namespace biortheq
