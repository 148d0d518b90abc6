#include "biortheq/equilibrium.hpp"

#include "biortheq/error.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

namespace biortheq {

void project_to_simplex(std::span<const double> v, std::span<double> out) {
  const std::size_t n = v.size();
  std::vector<double> u(v.begin(), v.end());
  std::sort(u.begin(), u.end(), std::greater<>());
  double cumsum = 0.0;
  double theta = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    cumsum += u[j];
    const double t = (cumsum - 1.0) / static_cast<double>(j + 1);
    if (u[j] - t > 0.0) theta = t;
  }
  for (std::size_t i = 0; i < n; ++i) out[i] = std::max(v[i] - theta, 0.0);
}

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// KKT residuals of the simplex-constrained quadratic in potential units:
// U_i - F_w = (Kw)_i - w^T K w.
ResidualReport kkt_residuals(std::span<const double> w, std::span<const double> kw, double e,
                             double tau, double tol) {
  ResidualReport r;
  r.tol = tol;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double below = e - kw[i];
    if (below > r.r_minus) {
      r.r_minus = below;
      r.worst_minus = i;
    }
    if (w[i] > tau) {
      const double above = kw[i] - e;
      if (above > r.r_plus) {
        r.r_plus = above;
        r.worst_plus = i;
      }
    }
  }
  r.pass = r.max() <= tol;
  return r;
}

std::vector<std::size_t> support_of(std::span<const double> w, double tau) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < w.size(); ++i)
    if (w[i] > tau) idx.push_back(i);
  return idx;
}

}  // namespace

EquilibriumResult minimize_energy(const KernelMatrix& km, const SolverOptions& opts,
                                  std::optional<std::vector<double>> initial) {
  const std::size_t n = km.size();
  if (n == 0) throw StructuralError("empty kernel matrix");
  if (opts.max_iters < 0 || !(opts.initial_step > 0.0) || opts.stall_window < 1)
    throw ParameterError("solver options out of range");
  const double tau =
      opts.support_threshold > 0.0 ? opts.support_threshold : 1e-8 / static_cast<double>(n);

  std::vector<double> w(n, 1.0 / static_cast<double>(n));
  if (initial) {
    if (initial->size() != n) throw StructuralError("initial weights do not match kernel size");
    project_to_simplex(*initial, w);
  }
  std::vector<double> kw(n), grad(n), trial(n), kw_trial(n), step(n);
  km.multiply(w, kw);
  double e = dot(w, kw);
  if (!std::isfinite(e)) throw NumericalError("initial energy is not finite");

  EquilibriumResult res;
  if (opts.record_trace) res.energy_trace.push_back(e);
  int stall = 0;
  int it = 0;
  bool converged = false;
  for (; it < opts.max_iters; ++it) {
    const ResidualReport rr = kkt_residuals(w, kw, e, tau, opts.tol_frostman);
    if (rr.max() < opts.tol_frostman) {
      converged = true;
      break;
    }
    for (std::size_t i = 0; i < n; ++i) {
      grad[i] = 2.0 * kw[i];
      if (!std::isfinite(grad[i]))
        throw NumericalError("non-finite gradient at index " + std::to_string(i) +
                             " in iteration " + std::to_string(it));
    }
    double t = opts.initial_step;
    bool accepted = false;
    double e_trial = e;
    for (int h = 0; h <= opts.max_halvings; ++h, t *= 0.5) {
      for (std::size_t i = 0; i < n; ++i) step[i] = w[i] - t * grad[i];
      project_to_simplex(step, trial);
      double decrease = 0.0;
      for (std::size_t i = 0; i < n; ++i) decrease += grad[i] * (trial[i] - w[i]);
      km.multiply(trial, kw_trial);
      e_trial = dot(trial, kw_trial);
      if (e_trial <= e + opts.armijo * decrease) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      // no descent direction left at machine precision
      converged = true;
      break;
    }
    const double rel = (e - e_trial) / std::max(std::abs(e), 1.0);
    w.swap(trial);
    kw.swap(kw_trial);
    e = e_trial;
    if (opts.record_trace) res.energy_trace.push_back(e);
    stall = rel < opts.tol_energy ? stall + 1 : 0;
    if (stall >= opts.stall_window) {
      ++it;
      converged = true;
      break;
    }
  }

  double q_int = 0.0;
  const auto q = km.q_values();
  for (std::size_t i = 0; i < n; ++i) q_int += w[i] * q[i];

  res.residual_report = kkt_residuals(w, kw, e, tau, opts.tol_frostman);
  res.support_idx = support_of(w, tau);
  res.mu_star = DiscreteMeasure{km.grid(), std::move(w)};
  res.V_w = e;
  res.F_w = e - q_int;
  res.iterations = it;
  res.converged = converged;
  return res;
}

ResidualReport frostman_check(const EquilibriumResult& res, const WeightSpec& Q,
                              const MapSpec& f, double tol) {
  const auto u = modified_potential_on_grid(res.mu_star, Q, f);
  ResidualReport r;
  r.tol = tol;
  std::vector<bool> in_support(u.size(), false);
  for (auto i : res.support_idx) in_support[i] = true;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double below = res.F_w - u[i];
    if (below > r.r_minus) {
      r.r_minus = below;
      r.worst_minus = i;
    }
    if (in_support[i]) {
      const double above = u[i] - res.F_w;
      if (above > r.r_plus) {
        r.r_plus = above;
        r.worst_plus = i;
      }
    }
  }
  r.pass = r.max() <= tol;
  return r;
}

CertificateReport certify_minimizer(const DiscreteMeasure& mu, const WeightSpec& Q,
                                    const MapSpec& f, double tol) {
  const std::size_t n = mu.weights.size();
  const double tau = 1e-8 / static_cast<double>(n);
  const auto support = support_of(mu.weights, tau);
  if (support.empty()) throw StructuralError("measure has empty support");
  const auto u = modified_potential_on_grid(mu, Q, f);

  std::vector<double> us;
  us.reserve(support.size());
  for (auto i : support) us.push_back(u[i]);
  std::sort(us.begin(), us.end());
  const std::size_t m = us.size();
  const double c = m % 2 ? us[m / 2] : 0.5 * (us[m / 2 - 1] + us[m / 2]);

  CertificateReport rep;
  rep.constant = c;
  rep.degenerate = m == 1;
  for (std::size_t i = 0; i < n; ++i) rep.worst_below = std::max(rep.worst_below, c - tol - u[i]);
  for (auto i : support) rep.worst_above = std::max(rep.worst_above, u[i] - c - tol);
  rep.pass = rep.worst_below <= 0.0 && rep.worst_above <= 0.0;
  return rep;
}

double rate_function(const DiscreteMeasure& mu, const EquilibriumResult& res,
                     const KernelMatrix& km) {
  require_same_grid(mu.grid, res.mu_star.grid, "rate_function");
  return energy(mu, km) - res.V_w;
}

EquilibriumRun solve_equilibrium(const DomainSet& domain, const WeightSpec& Q, const MapSpec& f,
                                 std::size_t n, const SolverOptions& solver,
                                 const TruncationOptions& truncation,
                                 const ShellSchedule& schedule) {
  if (!f.admits(domain))
    throw DomainError("branch domain violated: " + f.describe() + " is not defined on " +
                      domain.describe());
  auto run_on = [&](const DomainSet& d) {
    auto grid = std::make_shared<const GridSet>(build_grid(d, n));
    KernelMatrix km = assemble_kernel_matrix(grid, Q, f);
    EquilibriumResult res = minimize_energy(km, solver);
    return EquilibriumRun{grid, std::move(km), std::move(res), d.max_modulus(), 0};
  };
  if (!domain.unbounded()) return run_on(domain);

  std::optional<EquilibriumRun> last;
  const SupportSolver probe = [&](const DomainSet& d) {
    last.emplace(run_on(d));
    SupportProbe p;
    for (auto i : last->result.support_idx) p.support.push_back(last->grid->points[i]);
    return p;
  };
  const TruncationResult tr = adaptive_truncation(domain, Q, f, probe, truncation, schedule);
  last->radius = tr.radius;
  last->doublings = tr.doublings;
  return std::move(*last);
}

std::vector<double> cell_cdf(const DiscreteMeasure& mu) {
  const auto& g = *mu.grid;
  if (!g.real_line) throw StructuralError("CDF needs a real grid");
  std::vector<double> cdf(g.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (i > 0 && g.points[i].real() < g.points[i - 1].real())
      throw StructuralError("CDF needs grid points in ascending order");
    acc += mu.weights[i];
    cdf[i] = acc;
  }
  return cdf;
}

}  // namespace biortheq
