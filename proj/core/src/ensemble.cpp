#include "biortheq/ensemble.hpp"

#include "biortheq/cdf.hpp"
#include "biortheq/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace biortheq {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr std::size_t kTableLimit = 2048;

double pair_log(const GridSet& g, const GridValues& v, std::size_t a, std::size_t b) {
  return std::log(gap(g.points[a], g.points[b])) + std::log(gap(v.fx[a], v.fx[b]));
}

std::vector<double> pair_table(const GridSet& g, const GridValues& v) {
  const std::size_t n = g.size();
  std::vector<double> t(n * n);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a; b < n; ++b) t[a * n + b] = t[b * n + a] = pair_log(g, v, a, b);
  return t;
}

// Streaming log-sum-exp accumulator.
struct LogSum {
  double m = kNegInf;
  double s = 0.0;
  void add(double l) {
    if (l == kNegInf) return;
    if (l <= m) {
      s += std::exp(l - m);
    } else {
      s = s * std::exp(m - l) + 1.0;
      m = l;
    }
  }
  double value() const { return m == kNegInf ? kNegInf : m + std::log(s); }
};

std::uint64_t child_seed(std::uint64_t seed, std::uint64_t i) {
  // splitmix64 step
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (i + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double uniform_double(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::vector<double> cumulative_weights(const BaseMeasure& nu) {
  std::vector<double> c(nu.weights.size());
  std::partial_sum(nu.weights.begin(), nu.weights.end(), c.begin());
  return c;
}

std::size_t draw(const std::vector<double>& cumulative, double total, std::mt19937_64& rng) {
  const double u = uniform_double(rng) * total;
  const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
  if (it == cumulative.end()) {
    // u landed on the rounding gap above the last partial sum
    auto last = cumulative.size() - 1;
    while (last > 0 && cumulative[last] == cumulative[last - 1]) --last;
    return last;
  }
  return static_cast<std::size_t>(it - cumulative.begin());
}

void require_valid(const BaseMeasure& nu) {
  if (!nu.grid || nu.grid->size() == 0) throw StructuralError("base measure without grid");
  if (!(nu.total > 0.0)) throw StructuralError("base measure has zero total mass");
}

double log_factorial(int m) { return std::lgamma(static_cast<double>(m) + 1.0); }

}  // namespace

// ---------------------------------------------------------------------------
// BaseMeasure

BaseMeasure BaseMeasure::from_weights(GridPtr grid, std::vector<double> weights) {
  if (!grid) throw StructuralError("base measure needs a grid");
  if (weights.size() != grid->size())
    throw StructuralError("base measure has " + std::to_string(weights.size()) +
                          " weights for a grid of " + std::to_string(grid->size()));
  for (double w : weights)
    if (!(w >= 0.0) || !std::isfinite(w))
      throw ParameterError("base measure weights must be finite and nonnegative");
  BaseMeasure nu;
  nu.total = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (!(nu.total > 0.0)) throw StructuralError("base measure has zero total mass");
  nu.grid = std::move(grid);
  nu.weights = std::move(weights);
  return nu;
}

BaseMeasure BaseMeasure::lebesgue(GridPtr grid) {
  if (!grid) throw StructuralError("base measure needs a grid");
  auto w = grid->cell_mass;
  return from_weights(std::move(grid), std::move(w));
}

BaseMeasure BaseMeasure::counting(GridPtr grid) {
  if (!grid) throw StructuralError("base measure needs a grid");
  std::vector<double> w(grid->size(), 1.0);
  return from_weights(std::move(grid), std::move(w));
}

BaseMeasure BaseMeasure::from_density(GridPtr grid, const std::function<double(Point)>& density) {
  if (!grid) throw StructuralError("base measure needs a grid");
  std::vector<double> w(grid->size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = density(grid->points[i]) * grid->cell_mass[i];
  return from_weights(std::move(grid), std::move(w));
}

double BaseMeasure::disk_mass(Point z, double r) const {
  double s = 0.0;
  const double reach = r * (1.0 + 1e-12);
  for (std::size_t i = 0; i < weights.size(); ++i)
    if (gap(grid->points[i], z) <= reach) s += weights[i];
  return s;
}

BaseMeasure BaseMeasure::scaled(double c) const {
  if (!(c > 0.0) || !std::isfinite(c)) throw ParameterError("scale factor must be positive");
  BaseMeasure nu = *this;
  for (double& w : nu.weights) w *= c;
  nu.total = std::accumulate(nu.weights.begin(), nu.weights.end(), 0.0);
  return nu;
}

MassDensityReport mass_density_check(const BaseMeasure& nu, double T, double r0) {
  MassDensityReport rep;
  if (!nu.grid || nu.grid->size() == 0) return rep;
  for (const auto& z : nu.grid->points) {
    double r = r0;
    for (int m = 0; m <= 12; ++m, r *= 0.5) {
      const double ratio = nu.disk_mass(z, r) / std::pow(r, T);
      ++rep.checks;
      if (ratio < rep.worst_ratio) {
        rep.worst_ratio = ratio;
        rep.worst_z = z;
        rep.worst_r = r;
      }
    }
  }
  rep.pass = rep.worst_ratio >= 1.0;
  return rep;
}

// ---------------------------------------------------------------------------
// Chain

MetropolisChain::MetropolisChain(const BaseMeasure& nu, int k, const WeightSpec& Q,
                                 const MapSpec& f, std::uint64_t seed)
    : grid_(nu.grid), total_(nu.total), k_(k), rng_(seed) {
  require_valid(nu);
  if (k < 1) throw ParameterError("ensemble order k must be at least 1");
  const std::size_t positive =
      std::count_if(nu.weights.begin(), nu.weights.end(), [](double w) { return w > 0.0; });
  if (positive < static_cast<std::size_t>(k) + 1)
    throw StructuralError("base measure charges " + std::to_string(positive) +
                          " grid points, fewer than k+1 = " + std::to_string(k + 1));
  vals_ = evaluate_on_grid(*grid_, Q, f);
  cumulative_ = cumulative_weights(nu);
  if (grid_->size() <= kTableLimit) table_ = pair_table(*grid_, vals_);
  state_.seed = seed;

  // distinct start drawn from nu; retry until the configuration has finite density
  for (int attempt = 0; attempt < 1000; ++attempt) {
    state_.indices.clear();
    std::vector<bool> used(grid_->size(), false);
    while (state_.indices.size() < static_cast<std::size_t>(k) + 1) {
      const std::size_t t = draw_from_nu();
      if (!used[t]) {
        used[t] = true;
        state_.indices.push_back(t);
      }
    }
    state_.log_density = recompute();
    if (std::isfinite(state_.log_density)) return;
  }
  throw StructuralError("no starting configuration with positive density was found");
}

double MetropolisChain::pair(std::size_t a, std::size_t b) const {
  if (!table_.empty()) return table_[a * grid_->size() + b];
  return pair_log(*grid_, vals_, a, b);
}

double MetropolisChain::uniform01() { return uniform_double(rng_); }

std::size_t MetropolisChain::draw_from_nu() { return draw(cumulative_, total_, rng_); }

void MetropolisChain::step() {
  auto& idx = state_.indices;
  const std::size_t j = static_cast<std::size_t>(rng_() % idx.size());
  const std::size_t t = draw_from_nu();
  const std::size_t old = idx[j];
  const double u = uniform01();
  ++state_.proposals;
  double delta = -static_cast<double>(k_) * (vals_.q[t] - vals_.q[old]);
  if (t != old) {
    for (std::size_t s = 0; s < idx.size(); ++s) {
      if (s == j) continue;
      delta += pair(t, idx[s]) - pair(old, idx[s]);
    }
  }
  if (delta == kNegInf || std::isnan(delta)) return;
  if (delta >= 0.0 || std::log(u) < delta) {
    idx[j] = t;
    state_.log_density += delta;
    ++state_.accepted;
  }
}

double MetropolisChain::recompute() const {
  const auto& idx = state_.indices;
  double s = 0.0;
  for (std::size_t i = 0; i < idx.size(); ++i) {
    s -= static_cast<double>(k_) * vals_.q[idx[i]];
    for (std::size_t l = i + 1; l < idx.size(); ++l) s += pair(idx[i], idx[l]);
  }
  return s;
}

double MetropolisChain::resync() {
  const double fresh = recompute();
  const double drift = std::abs(fresh - state_.log_density);
  state_.log_density = fresh;
  return drift;
}

// ---------------------------------------------------------------------------
// Sampling

double SampleBatch::root(std::size_t i) const {
  const double l = log_vdm.at(i);
  if (l == kNegInf) return 0.0;
  return std::exp(2.0 * l / (static_cast<double>(k) * (k + 1.0)));
}

std::vector<Point> SampleBatch::points(std::size_t i) const {
  std::vector<Point> p;
  for (auto j : samples.at(i)) p.push_back(grid->points[j]);
  return p;
}

SampleBatch mcmc_sample(const BaseMeasure& nu, int k, const WeightSpec& Q, const MapSpec& f,
                        const McmcOptions& opts, const SampleVisitor& visit) {
  require_valid(nu);
  const std::uint64_t burn = opts.burn.value_or(opts.steps / 4);
  const std::uint64_t thin = opts.thin.value_or(std::max<std::uint64_t>(
      1, static_cast<std::uint64_t>(k) * nu.grid->size() / 10));
  if (opts.steps <= burn) throw ParameterError("steps must exceed burn-in");
  if (thin == 0) throw ParameterError("thinning interval must be positive");
  if (opts.checkpoint == 0) throw ParameterError("checkpoint interval must be positive");

  MetropolisChain chain(nu, k, Q, f, opts.seed);
  SampleBatch batch;
  batch.grid = nu.grid;
  batch.k = k;
  batch.seed = opts.seed;
  batch.steps = opts.steps;
  batch.burn = burn;
  batch.thin = thin;
  const bool cdf = opts.store && nu.grid->real_line;
  std::vector<double> counts(cdf ? nu.grid->size() : 0, 0.0);

  for (std::uint64_t s = 1; s <= opts.steps; ++s) {
    chain.step();
    if (s % opts.checkpoint == 0) batch.max_drift = std::max(batch.max_drift, chain.resync());
    if (s > burn && (s - burn) % thin == 0) {
      const auto& st = chain.state();
      if (visit) visit(st.indices, st.log_density);
      if (opts.store) {
        batch.samples.push_back(st.indices);
        batch.log_vdm.push_back(st.log_density);
        if (cdf)
          for (auto i : st.indices) counts[i] += 1.0;
      } else {
        batch.log_vdm.push_back(st.log_density);
      }
    }
  }
  const auto& st = chain.state();
  batch.acceptance_rate =
      st.proposals ? static_cast<double>(st.accepted) / static_cast<double>(st.proposals) : 0.0;
  if (cdf && !batch.samples.empty()) {
    const double denom = static_cast<double>(batch.samples.size()) * (k + 1.0);
    double acc = 0.0;
    batch.mean_cdf.resize(counts.size());
    for (std::size_t i = 0; i < counts.size(); ++i) {
      acc += counts[i];
      batch.mean_cdf[i] = acc / denom;
    }
  }
  return batch;
}

// ---------------------------------------------------------------------------
// Partition function

double log_exact_Zk_grid(const BaseMeasure& nu, int k, const WeightSpec& Q, const MapSpec& f,
                         double budget) {
  require_valid(nu);
  if (k < 1) throw ParameterError("ensemble order k must be at least 1");
  const std::size_t n = nu.grid->size();
  const double work = std::pow(static_cast<double>(n), k + 1.0);
  if (work > budget)
    throw ResourceError("exact Z_k needs n^(k+1) = " + std::to_string(work) +
                        " terms, above the budget " + std::to_string(budget));
  const GridValues vals = evaluate_on_grid(*nu.grid, Q, f);
  std::vector<double> base(n);  // log nu_i - k Q(x_i)
  for (std::size_t i = 0; i < n; ++i)
    base[i] = nu.weights[i] > 0.0 ? std::log(nu.weights[i]) - k * vals.q[i] : kNegInf;
  const std::vector<double> table = pair_table(*nu.grid, vals);

  // Only tuples of distinct points contribute, and the summand is symmetric:
  // enumerate increasing index sets and multiply by (k+1)!.
  LogSum acc;
  std::vector<std::size_t> chosen;
  const std::size_t m = static_cast<std::size_t>(k) + 1;
  auto rec = [&](auto&& self, std::size_t start, double partial) -> void {
    if (chosen.size() == m) {
      acc.add(partial);
      return;
    }
    for (std::size_t t = start; t + (m - chosen.size()) <= n; ++t) {
      if (base[t] == kNegInf) continue;
      double p = partial + base[t];
      for (auto c : chosen) p += table[c * n + t];
      if (p == kNegInf) continue;
      chosen.push_back(t);
      self(self, t + 1, p);
      chosen.pop_back();
    }
  };
  rec(rec, 0, 0.0);
  const double l = acc.value();
  return l == kNegInf ? kNegInf : l + log_factorial(k + 1);
}

double exact_Zk_grid(const BaseMeasure& nu, int k, const WeightSpec& Q, const MapSpec& f,
                     double budget) {
  return std::exp(log_exact_Zk_grid(nu, k, Q, f, budget));
}

ZkEstimate estimate_Zk_mc(const BaseMeasure& nu, int k, const WeightSpec& Q, const MapSpec& f,
                          std::size_t N, std::uint64_t seed) {
  require_valid(nu);
  if (k < 1) throw ParameterError("ensemble order k must be at least 1");
  if (N < 100) throw ParameterError("Monte Carlo Z_k needs N >= 100 draws");
  const std::size_t n = nu.grid->size();
  const GridValues vals = evaluate_on_grid(*nu.grid, Q, f);
  std::vector<double> table;
  if (n <= kTableLimit) table = pair_table(*nu.grid, vals);
  auto pair = [&](std::size_t a, std::size_t b) {
    return table.empty() ? pair_log(*nu.grid, vals, a, b) : table[a * n + b];
  };
  const auto cumulative = cumulative_weights(nu);
  std::mt19937_64 rng(seed);

  std::vector<double> logs(N);
  std::vector<std::size_t> tuple(static_cast<std::size_t>(k) + 1);
  for (std::size_t d = 0; d < N; ++d) {
    for (auto& t : tuple) t = draw(cumulative, nu.total, rng);
    double l = 0.0;
    for (std::size_t i = 0; i < tuple.size() && l != kNegInf; ++i) {
      l -= k * vals.q[tuple[i]];
      for (std::size_t j = i + 1; j < tuple.size(); ++j) {
        if (tuple[i] == tuple[j]) {
          l = kNegInf;
          break;
        }
        l += pair(tuple[i], tuple[j]);
      }
    }
    logs[d] = l;
  }

  ZkEstimate est;
  est.N = N;
  est.seed = seed;
  const double lmax = *std::max_element(logs.begin(), logs.end());
  const double log_scale = (k + 1.0) * std::log(nu.total);
  if (lmax == kNegInf || std::isnan(lmax)) {
    est.degenerate = true;
    est.log_estimate = kNegInf;
    return est;
  }
  std::vector<double> e(N);
  double sum = 0.0;
  for (std::size_t d = 0; d < N; ++d) sum += e[d] = std::exp(logs[d] - lmax);
  const double dn = static_cast<double>(N);
  est.log_estimate = lmax + std::log(sum / dn) + log_scale;
  est.estimate = std::exp(est.log_estimate);

  // jackknife over leave-one-out log means
  std::vector<double> theta(N);
  double mean_theta = 0.0;
  bool finite = true;
  for (std::size_t d = 0; d < N; ++d) {
    const double rest = sum - e[d];
    if (!(rest > 0.0)) {
      finite = false;
      break;
    }
    theta[d] = std::log(rest / (dn - 1.0));
    mean_theta += theta[d];
  }
  if (!finite) {
    est.log_stderr = kInf;
  } else {
    mean_theta /= dn;
    double ss = 0.0;
    for (double t : theta) ss += (t - mean_theta) * (t - mean_theta);
    est.log_stderr = std::sqrt((dn - 1.0) / dn * ss);
  }
  est.std_error = est.estimate * est.log_stderr;
  return est;
}

bool ZkRootSeries::monotone_decreasing() const {
  for (std::size_t i = 1; i < entries.size(); ++i)
    if (!(entries[i].root < entries[i - 1].root)) return false;
  return true;
}

ZkRootSeries zk_root_sequence(const BaseMeasure& nu, std::span<const int> k_list,
                              const WeightSpec& Q, const MapSpec& f, std::size_t N,
                              std::uint64_t seed, std::optional<double> equilibrium_energy,
                              ZkMethod method, double exact_budget) {
  if (k_list.empty()) throw ParameterError("k list is empty");
  require_valid(nu);
  ZkRootSeries series;
  if (equilibrium_energy) series.reference = std::exp(-*equilibrium_energy);
  const double n = static_cast<double>(nu.grid->size());
  for (std::size_t i = 0; i < k_list.size(); ++i) {
    const int k = k_list[i];
    if (k < 1) throw ParameterError("ensemble order k must be at least 1");
    const double expo = 2.0 / (static_cast<double>(k) * (k + 1.0));
    bool exact = method == ZkMethod::exact;
    if (method == ZkMethod::automatic) exact = std::pow(n, k + 1.0) <= exact_budget;
    ZkRoot r{k, 0.0, 0.0, 0.0, exact};
    if (exact) {
      r.log_Z = log_exact_Zk_grid(nu, k, Q, f, method == ZkMethod::exact ? kInf : exact_budget);
    } else {
      const ZkEstimate est = estimate_Zk_mc(nu, k, Q, f, N, child_seed(seed, i));
      r.log_Z = est.log_estimate;
      r.root_stderr = std::exp(expo * r.log_Z) * expo * est.log_stderr;
    }
    r.root = r.log_Z == kNegInf ? 0.0 : std::exp(expo * r.log_Z);
    series.entries.push_back(r);
  }
  return series;
}

// ---------------------------------------------------------------------------
// Tail sets and neighborhoods

double tail_probability(const SampleBatch& batch, double eta, double delta_ref) {
  if (batch.size() == 0) throw StructuralError("tail probability of an empty batch");
  if (!(delta_ref > 0.0)) throw ParameterError("delta reference must be positive");
  if (!(eta >= 0.0)) throw ParameterError("eta must be nonnegative");
  if (eta >= delta_ref) return 0.0;
  const double threshold = delta_ref - eta;
  std::size_t below = 0;
  for (std::size_t i = 0; i < batch.size(); ++i)
    if (batch.root(i) < threshold) ++below;
  return static_cast<double>(below) / static_cast<double>(batch.size());
}

double CdfBall::distance(std::vector<double> xs) const {
  return metric == CdfMetric::levy ? levy_distance(std::move(xs), reference)
                                   : ks_distance(std::move(xs), reference);
}

bool CdfBall::contains(std::span<const double> xs) const {
  return metric == CdfMetric::levy ? levy_within(xs, reference, rho)
                                   : ks_within(xs, reference, rho);
}

namespace {

struct BallCounter {
  const GridSet& grid;
  const CdfBall& ball;
  std::vector<double> xs;
  std::size_t hits = 0;
  std::size_t samples = 0;

  void operator()(std::span<const std::size_t> idx) {
    xs.clear();
    for (auto i : idx) xs.push_back(grid.points[i].real());
    std::sort(xs.begin(), xs.end());
    ++samples;
    if (ball.contains(xs)) ++hits;
  }

  NeighborhoodMass finish(int k) const {
    NeighborhoodMass m;
    m.k = k;
    m.hits = hits;
    m.samples = samples;
    const double expo = 2.0 / (static_cast<double>(k) * (k + 1.0));
    if (hits == 0) {
      m.one_sided = true;
      m.root = kNegInf;
      m.root_bound = samples ? expo * std::log(1.0 / static_cast<double>(samples)) : 0.0;
      return m;
    }
    m.sigma = static_cast<double>(hits) / static_cast<double>(samples);
    m.root = expo * std::log(m.sigma);
    m.root_bound = m.root;
    return m;
  }
};

void check_ball(const GridSet& grid, const CdfBall& ball) {
  if (!grid.real_line) throw StructuralError("CDF balls need a real grid");
  if (!(ball.rho > 0.0)) throw ParameterError("ball radius rho must be positive");
  if (!ball.reference) throw ParameterError("ball needs a reference CDF");
}

}  // namespace

NeighborhoodMass neighborhood_mass(const SampleBatch& batch, const CdfBall& ball) {
  if (batch.samples.empty()) throw StructuralError("neighborhood mass of an empty batch");
  check_ball(*batch.grid, ball);
  BallCounter counter{*batch.grid, ball, {}};
  for (const auto& s : batch.samples) counter(s);
  return counter.finish(batch.k);
}

NeighborhoodMass neighborhood_mass(const BaseMeasure& nu, int k, const WeightSpec& Q,
                                   const MapSpec& f, const CdfBall& ball,
                                   const McmcOptions& opts) {
  require_valid(nu);
  check_ball(*nu.grid, ball);
  BallCounter counter{*nu.grid, ball, {}};
  McmcOptions o = opts;
  o.store = false;
  mcmc_sample(nu, k, Q, f, o,
              [&](std::span<const std::size_t> idx, double) { counter(idx); });
  return counter.finish(k);
}

LdpReport ldp_slope(std::span<const NeighborhoodMass> series, double rate_ref, double factor) {
  if (series.size() < 3) throw ParameterError("LDP comparison needs at least three k values");
  LdpReport rep;
  rep.rate_ref = rate_ref;
  for (const auto& m : series) {
    rep.ks.push_back(m.k);
    rep.roots.push_back(m.root);
  }
  const bool any_hits =
      std::any_of(series.begin(), series.end(), [](const auto& m) { return m.hits > 0; });
  rep.degenerate = !any_hits;
  rep.sigma_decreasing = true;
  for (std::size_t i = 1; i < series.size(); ++i)
    if (!(series[i].sigma < series[i - 1].sigma)) rep.sigma_decreasing = false;
  rep.roots_negative =
      std::all_of(rep.roots.begin(), rep.roots.end(), [](double r) { return r < 0.0; });
  rep.within_factor = !rep.degenerate && std::all_of(rep.roots.begin(), rep.roots.end(), [&](double r) {
    return std::isfinite(r) && -r >= rate_ref / factor && -r <= rate_ref * factor;
  });
  if (rep.degenerate) return rep;

  // constant fit and trend over the entries with hits
  std::vector<double> ks, rs;
  for (const auto& m : series)
    if (m.hits > 0) {
      ks.push_back(m.k);
      rs.push_back(m.root);
    }
  rep.mean_root = std::accumulate(rs.begin(), rs.end(), 0.0) / static_cast<double>(rs.size());
  if (ks.size() >= 2) {
    const double km = std::accumulate(ks.begin(), ks.end(), 0.0) / static_cast<double>(ks.size());
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < ks.size(); ++i) {
      sxy += (ks[i] - km) * (rs[i] - rep.mean_root);
      sxx += (ks[i] - km) * (ks[i] - km);
    }
    rep.slope = sxx > 0.0 ? sxy / sxx : 0.0;
  }
  return rep;
}

}  // namespace biortheq
