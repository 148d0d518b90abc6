#include "biortheq/geometry.hpp"

#include "biortheq/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace biortheq {

namespace {

std::string fmt_bound(double v) {
  if (v == kInf) return "+inf";
  if (v == -kInf) return "-inf";
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

// ---------------------------------------------------------------------------
// DomainSet

DomainSet DomainSet::intervals(std::vector<Interval> components) {
  if (components.empty()) throw DomainError("domain needs at least one interval");
  std::sort(components.begin(), components.end(),
            [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
  for (std::size_t i = 0; i < components.size(); ++i) {
    const auto& c = components[i];
    if (std::isnan(c.lo) || std::isnan(c.hi) || !(c.lo < c.hi))
      throw DomainError("interval [" + fmt_bound(c.lo) + ", " + fmt_bound(c.hi) +
                        "] must satisfy a < b");
    if (c.lo == -kInf && i != 0)
      throw DomainError("only the first interval may start at -inf");
    if (c.hi == kInf && i + 1 != components.size())
      throw DomainError("only the last interval may end at +inf");
    if (i > 0 && !(components[i - 1].hi < c.lo))
      throw DomainError("intervals must be pairwise disjoint");
  }
  if (components.size() > 1 && components.front().lo == -kInf && components.back().hi == kInf)
    throw DomainError("at most one unbounded component is supported");
  return DomainSet(std::move(components));
}

DomainSet DomainSet::rectangle(Rectangle r) {
  if (!(r.re_lo < r.re_hi) || !(r.im_lo < r.im_hi))
    throw DomainError("rectangle must have positive width and height");
  if (!std::isfinite(r.re_lo) || !std::isfinite(r.re_hi) || !std::isfinite(r.im_lo) ||
      !std::isfinite(r.im_hi))
    throw DomainError("rectangle must be bounded");
  return DomainSet(r);
}

bool DomainSet::unbounded() const {
  if (!is_real()) return false;
  const auto& cs = components();
  return !cs.front().bounded() || !cs.back().bounded();
}

const std::vector<Interval>& DomainSet::components() const {
  if (!is_real()) throw DomainError("rectangle domain has no interval components");
  return std::get<std::vector<Interval>>(shape_);
}

const Rectangle& DomainSet::rect() const {
  if (is_real()) throw DomainError("interval domain has no rectangle");
  return std::get<Rectangle>(shape_);
}

bool DomainSet::contains(Point z, double tol) const {
  if (is_real()) {
    if (std::abs(z.imag()) > tol) return false;
    const double x = z.real();
    for (const auto& c : components()) {
      const double slack = tol * std::max(1.0, std::abs(x));
      if (x >= c.lo - slack && x <= c.hi + slack) return true;
    }
    return false;
  }
  const auto& r = rect();
  return z.real() >= r.re_lo - tol && z.real() <= r.re_hi + tol && z.imag() >= r.im_lo - tol &&
         z.imag() <= r.im_hi + tol;
}

double DomainSet::measure() const {
  if (!is_real()) return rect().area();
  double total = 0.0;
  for (const auto& c : components()) total += c.length();
  return total;
}

double DomainSet::min_real() const {
  return is_real() ? components().front().lo : rect().re_lo;
}

double DomainSet::max_real() const {
  return is_real() ? components().back().hi : rect().re_hi;
}

double DomainSet::max_modulus() const {
  if (is_real()) {
    double m = 0.0;
    for (const auto& c : components()) m = std::max({m, std::abs(c.lo), std::abs(c.hi)});
    return m;
  }
  const auto& r = rect();
  double m = 0.0;
  for (double x : {r.re_lo, r.re_hi})
    for (double y : {r.im_lo, r.im_hi}) m = std::max(m, std::hypot(x, y));
  return m;
}

DomainSet DomainSet::truncated(double radius) const {
  if (!(radius > 0.0)) throw ParameterError("truncation radius must be positive");
  if (!is_real()) return *this;
  std::vector<Interval> kept;
  for (const auto& c : components()) {
    const double lo = std::max(c.lo, -radius);
    const double hi = std::min(c.hi, radius);
    if (lo < hi) kept.push_back({lo, hi});
  }
  if (kept.empty())
    throw DomainError("domain does not meet the disk of radius " + fmt_bound(radius));
  return intervals(std::move(kept));
}

std::string DomainSet::describe() const {
  std::ostringstream os;
  if (is_real()) {
    bool first = true;
    for (const auto& c : components()) {
      if (!first) os << " U ";
      first = false;
      os << "[" << fmt_bound(c.lo) << ", " << fmt_bound(c.hi) << "]";
    }
  } else {
    const auto& r = rect();
    os << "[" << fmt_bound(r.re_lo) << ", " << fmt_bound(r.re_hi) << "] x i["
       << fmt_bound(r.im_lo) << ", " << fmt_bound(r.im_hi) << "]";
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// MapSpec

MapSpec MapSpec::power(double theta) {
  if (!(theta > 0.0) || !std::isfinite(theta))
    throw ParameterError("power map needs a positive finite exponent");
  return MapSpec(Kind::power, theta, {});
}

MapSpec MapSpec::polynomial(std::vector<double> coefficients) {
  while (coefficients.size() > 1 && coefficients.back() == 0.0) coefficients.pop_back();
  if (coefficients.empty()) throw ParameterError("polynomial map needs coefficients");
  return MapSpec(Kind::polynomial, 0.0, std::move(coefficients));
}

bool MapSpec::in_branch_domain(Point z) const {
  switch (kind_) {
    case Kind::power:
      return z.real() >= 0.0;
    case Kind::log:
      return z.real() > 0.0;
    default:
      return true;
  }
}

bool MapSpec::admits(const DomainSet& domain) const {
  switch (kind_) {
    case Kind::power:
      return domain.min_real() >= 0.0;
    case Kind::log:
      return domain.min_real() > 0.0;
    default:
      return true;
  }
}

Point MapSpec::operator()(Point z) const {
  if (!in_branch_domain(z)) {
    std::ostringstream os;
    os << "point " << z << " outside the branch domain of " << describe();
    throw DomainError(os.str());
  }
  const bool real = z.imag() == 0.0;
  switch (kind_) {
    case Kind::identity:
      return z;
    case Kind::power:
      if (real) return std::pow(z.real(), theta_);
      if (z == Point{}) return {};
      return std::pow(z, theta_);
    case Kind::exp:
      return real ? Point(std::exp(z.real())) : std::exp(z);
    case Kind::log:
      return real ? Point(std::log(z.real())) : std::log(z);
    case Kind::polynomial: {
      Point acc = coeffs_.back();
      for (std::size_t i = coeffs_.size() - 1; i-- > 0;) acc = acc * z + coeffs_[i];
      return acc;
    }
  }
  return z;
}

Point MapSpec::derivative(Point z) const {
  if (!in_branch_domain(z)) throw DomainError("derivative requested outside branch domain");
  switch (kind_) {
    case Kind::identity:
      return 1.0;
    case Kind::power:
      if (z == Point{}) return theta_ >= 1.0 ? (theta_ == 1.0 ? 1.0 : 0.0) : kInf;
      if (z.imag() == 0.0) return theta_ * std::pow(z.real(), theta_ - 1.0);
      return theta_ * std::pow(z, theta_ - 1.0);
    case Kind::exp:
      return (*this)(z);
    case Kind::log:
      return 1.0 / z;
    case Kind::polynomial: {
      if (coeffs_.size() == 1) return 0.0;
      Point acc = coeffs_.back() * static_cast<double>(coeffs_.size() - 1);
      for (std::size_t i = coeffs_.size() - 1; i-- > 1;)
        acc = acc * z + coeffs_[i] * static_cast<double>(i);
      return acc;
    }
  }
  return 1.0;
}

double MapSpec::log_abs(Point z) const {
  if (!in_branch_domain(z)) throw DomainError("log|f| requested outside branch domain");
  switch (kind_) {
    case Kind::identity:
      return std::log(std::abs(z));
    case Kind::power:
      return theta_ * std::log(std::abs(z));
    case Kind::exp:
      return z.real();
    case Kind::log:
      return std::log(std::abs(std::log(z)));
    case Kind::polynomial: {
      const Point v = (*this)(z);
      if (std::isfinite(v.real()) && std::isfinite(v.imag())) return std::log(std::abs(v));
      // leading term dominates once evaluation overflows
      return std::log(std::abs(coeffs_.back())) +
             static_cast<double>(coeffs_.size() - 1) * std::log(std::abs(z));
    }
  }
  return 0.0;
}

std::string MapSpec::describe() const {
  std::ostringstream os;
  os.precision(17);
  switch (kind_) {
    case Kind::identity: return "identity";
    case Kind::power: os << "power(" << theta_ << ")"; return os.str();
    case Kind::exp: return "exp";
    case Kind::log: return "log";
    case Kind::polynomial:
      os << "polynomial(";
      for (std::size_t i = 0; i < coeffs_.size(); ++i) os << (i ? ", " : "") << coeffs_[i];
      os << ")";
      return os.str();
  }
  return "?";
}

// ---------------------------------------------------------------------------
// WeightSpec

WeightSpec WeightSpec::monomial(double coef, double power) {
  return WeightSpec({Term{Term::Kind::monomial, coef, power}});
}

WeightSpec& WeightSpec::set_table(std::vector<double> xs, std::vector<double> values) {
  if (xs.size() != values.size() || xs.empty())
    throw ParameterError("weight table needs matching non-empty x and value arrays");
  if (!std::is_sorted(xs.begin(), xs.end()) ||
      std::adjacent_find(xs.begin(), xs.end()) != xs.end())
    throw ParameterError("weight table abscissae must be strictly increasing");
  table_x_ = std::move(xs);
  table_v_ = std::move(values);
  return *this;
}

WeightSpec WeightSpec::scaled(double c) const {
  WeightSpec out = *this;
  out.scale_ *= c;
  out.offset_ *= c;
  return out;
}

WeightSpec WeightSpec::shifted(double c) const {
  WeightSpec out = *this;
  out.offset_ += c;
  return out;
}

double WeightSpec::operator()(Point z) const {
  double sum = 0.0;
  for (const auto& t : terms_) {
    switch (t.kind) {
      case Term::Kind::monomial: {
        const double x = z.real();
        if (x < 0.0 && t.power != std::floor(t.power)) {
          std::ostringstream os;
          os << "x^" << t.power << " undefined at x = " << x;
          throw DomainError(os.str());
        }
        sum += t.coef * (t.power == 0.0 ? 1.0 : std::pow(x, t.power));
        break;
      }
      case Term::Kind::abs_power:
        sum += t.coef * (t.power == 0.0 ? 1.0 : std::pow(std::abs(z), t.power));
        break;
      case Term::Kind::log1p_abs2:
        sum += t.coef * log1p_abs2_from_log(std::log(std::abs(z)));
        break;
    }
  }
  if (!table_x_.empty()) {
    const double x = z.real();
    if (x <= table_x_.front()) {
      sum += table_v_.front();
    } else if (x >= table_x_.back()) {
      sum += table_v_.back();
    } else {
      const auto it = std::upper_bound(table_x_.begin(), table_x_.end(), x);
      const std::size_t hi = static_cast<std::size_t>(it - table_x_.begin());
      const std::size_t lo = hi - 1;
      const double t = (x - table_x_[lo]) / (table_x_[hi] - table_x_[lo]);
      sum += (1.0 - t) * table_v_[lo] + t * table_v_[hi];
    }
  }
  return scale_ * sum + offset_;
}

std::string WeightSpec::describe() const {
  std::ostringstream os;
  os.precision(17);
  if (scale_ != 1.0) os << scale_ << "*(";
  if (terms_.empty() && table_x_.empty()) os << "0";
  bool first = true;
  for (const auto& t : terms_) {
    if (!first) os << " + ";
    first = false;
    switch (t.kind) {
      case Term::Kind::monomial: os << t.coef << "*x^" << t.power; break;
      case Term::Kind::abs_power: os << t.coef << "*|z|^" << t.power; break;
      case Term::Kind::log1p_abs2: os << t.coef << "*log(1+|z|^2)"; break;
    }
  }
  if (!table_x_.empty()) os << (first ? "" : " + ") << "table[" << table_x_.size() << "]";
  if (scale_ != 1.0) os << ")";
  if (offset_ != 0.0) os << " + " << offset_;
  return os.str();
}

double log1p_abs2_from_log(double log_abs) {
  if (log_abs == -kInf) return 0.0;
  if (log_abs > 0.0) return 2.0 * log_abs + std::log1p(std::exp(-2.0 * log_abs));
  return std::log1p(std::exp(2.0 * log_abs));
}

double psi(Point z, const WeightSpec& Q, const MapSpec& f) {
  const double q = Q(z);
  const double lz = log1p_abs2_from_log(std::log(std::abs(z)));
  const double lf = log1p_abs2_from_log(f.log_abs(z));
  return q - 0.5 * lz - 0.5 * lf;
}

// ---------------------------------------------------------------------------
// Admissibility

const char* to_string(AdmissibilityReport::Verdict v) {
  return v == AdmissibilityReport::Verdict::admissible ? "ADMISSIBLE" : "SUSPECT";
}

namespace {

// Samples of K within the annulus r_in <= |x| < r_out on the real line.
std::vector<double> shell_samples(const DomainSet& domain, double r_in, double r_out, int m) {
  std::vector<double> xs;
  for (const auto& c : domain.components()) {
    // positive side [r_in, r_out): the outer end is open
    const double a = std::max(c.lo, r_in);
    const double b = std::min(c.hi, r_out);
    if (a < b) {
      for (int t = 0; t < m; ++t) xs.push_back(a + (b - a) * static_cast<double>(t) / m);
      if (b < r_out) xs.push_back(b);
    } else if (a == b && b < r_out) {
      xs.push_back(a);
    }
    // negative side (-r_out, -r_in]
    const double na = std::max(c.lo, -r_out);
    const double nb = std::min(c.hi, -r_in);
    if (na < nb) {
      for (int t = 0; t < m; ++t) xs.push_back(nb - (nb - na) * static_cast<double>(t) / m);
      if (na > -r_out) xs.push_back(na);
    } else if (na == nb && na > -r_out) {
      xs.push_back(na);
    }
  }
  return xs;
}

}  // namespace

AdmissibilityReport check_f_admissible(const DomainSet& domain, const WeightSpec& Q,
                                       const MapSpec& f, const ShellSchedule& schedule) {
  if (!(schedule.r0 > 0.0) || schedule.shells < 1 || schedule.samples_per_shell < 2)
    throw ParameterError("shell schedule needs r0 > 0, at least one shell and two samples");
  AdmissibilityReport report;
  if (!domain.unbounded()) {
    report.trivially_bounded = true;
    const GridSet grid = build_grid(domain, 64);
    const bool any_finite = std::any_of(grid.points.begin(), grid.points.end(),
                                        [&](Point z) { return std::isfinite(Q(z)); });
    if (!any_finite) {
      report.verdict = AdmissibilityReport::Verdict::suspect;
      report.notes.push_back("Q is infinite at every sampled point of the compact domain");
    } else {
      report.notes.push_back("compact domain: every admissible Q qualifies");
    }
    return report;
  }

  std::vector<double> minima;
  std::vector<int> minima_shell;
  double r_in = schedule.r0;
  for (int j = 0; j <= schedule.shells; ++j) {
    const double r_out = 2.0 * r_in;
    ShellRecord rec{j, r_in, r_out, std::nan(""), Point{}, true};
    for (double x : shell_samples(domain, r_in, r_out, schedule.samples_per_shell)) {
      const Point z{x, 0.0};
      const double v = psi(z, Q, f);
      if (rec.empty || v < rec.min_psi || std::isnan(rec.min_psi)) {
        rec.min_psi = v;
        rec.argmin = z;
      }
      rec.empty = false;
    }
    if (rec.empty) {
      report.notes.push_back("shell " + std::to_string(j) + " misses K; skipped");
    } else {
      minima.push_back(rec.min_psi);
      minima_shell.push_back(j);
    }
    report.shells.push_back(rec);
    r_in = r_out;
  }
  if (minima.empty()) throw DomainError("every admissibility shell misses the domain");

  const std::size_t last = minima.size() - 1;
  bool ok = minima[last] > schedule.threshold;
  for (std::size_t i = 0; i < last && ok; ++i) ok = minima[last] > minima[i];
  for (std::size_t i = (last >= 2 ? last - 2 : 0); i < last && ok; ++i)
    ok = minima[i + 1] > minima[i];
  if (!ok) {
    report.verdict = AdmissibilityReport::Verdict::suspect;
    report.offending_shell = minima_shell[last];
    report.notes.push_back("shell minima of psi do not diverge past the threshold");
  }
  return report;
}

AdmissibilityReport check_strong_f_admissible(const DomainSet& domain, const WeightSpec& Q,
                                              const MapSpec& f, double delta,
                                              const ShellSchedule& schedule) {
  if (!(delta > 0.0 && delta < 1.0))
    throw ParameterError("strong admissibility needs delta in (0, 1)");
  return check_f_admissible(domain, Q.scaled(1.0 - delta), f, schedule);
}

// ---------------------------------------------------------------------------
// Grids

double GridSet::total_mass() const {
  double s = 0.0;
  for (double m : cell_mass) s += m;
  return s;
}

GridSet GridSet::from_points(std::vector<Point> points, std::vector<double> masses,
                             std::optional<double> spacing) {
  if (points.empty()) throw StructuralError("grid needs at least one point");
  if (masses.empty()) masses.assign(points.size(), 1.0);
  if (masses.size() != points.size())
    throw StructuralError("grid masses and points differ in length");
  for (double m : masses)
    if (!(m > 0.0)) throw StructuralError("grid cell masses must be positive");
  GridSet g;
  g.real_line = std::all_of(points.begin(), points.end(), [](Point z) { return z.imag() == 0.0; });
  if (spacing) {
    g.spacing = *spacing;
  } else if (points.size() == 1) {
    g.spacing = 0.5;
  } else {
    double dmin = kInf;
    for (std::size_t i = 0; i < points.size(); ++i)
      for (std::size_t j = i + 1; j < points.size(); ++j) {
        const double d = gap(points[i], points[j]);
        if (d > 0.0) dmin = std::min(dmin, d);
      }
    g.spacing = std::isfinite(dmin) ? 0.5 * dmin : 0.5;
  }
  if (!(g.spacing > 0.0)) throw ParameterError("grid spacing must be positive");
  g.cell_width.assign(points.size(), 2.0 * g.spacing);
  g.points = std::move(points);
  g.cell_mass = std::move(masses);
  return g;
}

GridSet GridSet::from_reals(const std::vector<double>& xs, std::vector<double> masses,
                            std::optional<double> spacing) {
  std::vector<Point> pts(xs.begin(), xs.end());
  return from_points(std::move(pts), std::move(masses), spacing);
}

GridSet build_grid(const DomainSet& domain, std::size_t n) {
  if (n < 2) throw ParameterError("grid needs n >= 2 points");
  if (domain.unbounded())
    throw PreconditionError("build_grid needs a bounded domain; truncate first");
  GridSet g;
  g.parent = domain;
  if (domain.is_real()) {
    const auto& cs = domain.components();
    if (n < cs.size()) throw ParameterError("grid size smaller than the number of components");
    const double total = domain.measure();
    std::vector<std::size_t> counts(cs.size());
    std::vector<std::pair<double, std::size_t>> remainders;
    std::size_t used = 0;
    for (std::size_t c = 0; c < cs.size(); ++c) {
      const double ideal = static_cast<double>(n) * cs[c].length() / total;
      counts[c] = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(ideal)));
      used += counts[c];
      remainders.emplace_back(ideal - std::floor(ideal), c);
    }
    std::stable_sort(remainders.begin(), remainders.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    for (std::size_t r = 0; used < n; r = (r + 1) % remainders.size()) {
      ++counts[remainders[r].second];
      ++used;
    }
    while (used > n) {
      // floor-to-one bumps can overshoot when many tiny components exist
      const auto big = std::max_element(counts.begin(), counts.end());
      --*big;
      --used;
    }
    double hmin = kInf;
    for (std::size_t c = 0; c < cs.size(); ++c) {
      const double h = cs[c].length() / static_cast<double>(counts[c]);
      hmin = std::min(hmin, h);
      for (std::size_t i = 0; i < counts[c]; ++i) {
        g.points.emplace_back(cs[c].lo + (static_cast<double>(i) + 0.5) * h, 0.0);
        g.cell_mass.push_back(h);
        g.cell_width.push_back(h);
      }
    }
    g.spacing = 0.5 * hmin;
    g.real_line = true;
    return g;
  }
  const auto& r = domain.rect();
  const double w = r.re_hi - r.re_lo;
  const double h = r.im_hi - r.im_lo;
  const auto nx = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(n) * w / h))));
  const std::size_t ny = std::max<std::size_t>(1, n / nx);
  const double dx = w / static_cast<double>(nx);
  const double dy = h / static_cast<double>(ny);
  for (std::size_t iy = 0; iy < ny; ++iy)
    for (std::size_t ix = 0; ix < nx; ++ix) {
      g.points.emplace_back(r.re_lo + (static_cast<double>(ix) + 0.5) * dx,
                            r.im_lo + (static_cast<double>(iy) + 0.5) * dy);
      g.cell_mass.push_back(dx * dy);
      g.cell_width.push_back(dx);
    }
  g.spacing = 0.5 * std::min(dx, dy);
  g.real_line = false;
  return g;
}

std::vector<double> real_coordinates(const GridSet& grid) {
  if (!grid.real_line) throw StructuralError("grid is not on the real line");
  std::vector<double> xs;
  xs.reserve(grid.size());
  for (const auto& p : grid.points) xs.push_back(p.real());
  return xs;
}

// ---------------------------------------------------------------------------
// Truncation

TruncationResult adaptive_truncation(const DomainSet& domain, const WeightSpec& Q,
                                     const MapSpec& f, const SupportSolver& solve,
                                     const TruncationOptions& opts,
                                     const ShellSchedule& schedule) {
  if (!domain.unbounded()) return {domain.max_modulus(), domain, 0};
  if (!(opts.initial_radius > 0.0) || !(opts.margin > 0.0 && opts.margin < 1.0) ||
      opts.max_doublings < 0)
    throw ParameterError("truncation options out of range");
  const auto report = check_f_admissible(domain, Q, f, schedule);
  if (!report.admissible())
    throw PreconditionError("Q is not f-admissible on " + domain.describe() +
                            "; truncation would not stabilize");

  // radial extent of K near the origin, used to place the outer margin
  double r_min = kInf;
  for (const auto& c : domain.components()) {
    if (c.lo <= 0.0 && c.hi >= 0.0) r_min = 0.0;
    else r_min = std::min(r_min, std::min(std::abs(c.lo), std::abs(c.hi)));
  }

  double radius = opts.initial_radius;
  for (int d = 0; d <= opts.max_doublings; ++d, radius *= 2.0) {
    if (radius <= r_min) continue;
    const DomainSet trunc = domain.truncated(radius);
    const SupportProbe probe = solve(trunc);
    const double cutoff = radius - opts.margin * (radius - r_min);
    const bool touches = std::any_of(probe.support.begin(), probe.support.end(),
                                     [&](Point z) { return std::abs(z) > cutoff; });
    if (!touches) return {radius, trunc, d};
  }
  throw NoConvergenceError("support did not stabilize within " +
                               std::to_string(opts.max_doublings) + " doublings",
                           radius / 2.0);
}

}  // namespace biortheq
