#include "biortheq/fekete.hpp"

#include "biortheq/cdf.hpp"
#include "biortheq/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace biortheq {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

struct GridView {
  const GridSet& grid;
  const GridValues& vals;

  // log|x_a - x_b| + log|f(x_a) - f(x_b)|
  double pair(std::size_t a, std::size_t b) const {
    const double d = gap(grid.points[a], grid.points[b]);
    const double e = gap(vals.fx[a], vals.fx[b]);
    return std::log(d) + std::log(e);
  }
};

// Score of placing grid point t against the fixed points in `others`.
void score_against(const GridView& g, std::span<const std::size_t> others, int k,
                   std::vector<double>& score) {
  const std::size_t n = g.grid.size();
  score.assign(n, 0.0);
  for (std::size_t t = 0; t < n; ++t) {
    double s = -static_cast<double>(k) * g.vals.q[t];
    for (auto o : others) s += g.pair(t, o);
    score[t] = s;
  }
}

// argmax with ties to the lowest index; -inf everywhere returns index 0.
std::size_t argmax(const std::vector<double>& v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] > v[best]) best = i;
  return best;
}

}  // namespace

std::vector<double> Configuration::real_parts() const {
  std::vector<double> xs;
  xs.reserve(points.size());
  for (const auto& p : points) xs.push_back(p.real());
  return xs;
}

double log_vdm(std::span<const Point> points, const WeightSpec& Q, const MapSpec& f) {
  if (points.size() < 2) throw ParameterError("log_vdm needs at least two points");
  const auto k = static_cast<double>(points.size() - 1);
  std::vector<Point> fx;
  fx.reserve(points.size());
  double qsum = 0.0;
  for (const auto& z : points) {
    fx.push_back(f(z));
    qsum += Q(z);
  }
  double s = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i)
    for (std::size_t j = i + 1; j < points.size(); ++j) {
      const double d = gap(points[i], points[j]);
      const double e = gap(fx[i], fx[j]);
      if (d == 0.0 || e == 0.0) return kNegInf;
      s += std::log(d) + std::log(e);
    }
  return s - k * qsum;
}

double log_vdm_indexed(const GridSet& grid, const GridValues& vals,
                       std::span<const std::size_t> indices) {
  if (indices.size() < 2) throw ParameterError("log_vdm needs at least two points");
  const GridView g{grid, vals};
  const auto k = static_cast<double>(indices.size() - 1);
  double s = 0.0;
  for (std::size_t i = 0; i < indices.size(); ++i) {
    s -= k * vals.q[indices[i]];
    for (std::size_t j = i + 1; j < indices.size(); ++j) {
      const double p = g.pair(indices[i], indices[j]);
      if (p == kNegInf) return kNegInf;
      s += p;
    }
  }
  return s;
}

Configuration make_configuration(const GridSet& grid, const GridValues& vals,
                                 std::vector<std::size_t> indices) {
  Configuration c;
  c.k = static_cast<int>(indices.size()) - 1;
  for (auto i : indices) c.points.push_back(grid.points.at(i));
  c.log_vdm = log_vdm_indexed(grid, vals, indices);
  c.indices = std::move(indices);
  return c;
}

Configuration greedy_leja(const GridSet& grid, int k, const WeightSpec& Q, const MapSpec& f) {
  if (k < 1) throw ParameterError("Fekete order k must be at least 1");
  const std::size_t n = grid.size();
  if (n < static_cast<std::size_t>(k) + 1)
    throw ParameterError("grid has " + std::to_string(n) + " points, fewer than k+1 = " +
                         std::to_string(k + 1));
  const GridValues vals = evaluate_on_grid(grid, Q, f);
  const GridView g{grid, vals};

  std::vector<double> score(n);
  for (std::size_t t = 0; t < n; ++t) score[t] = -2.0 * vals.q[t];
  std::vector<std::size_t> sel{argmax(score)};
  std::vector<bool> taken(n, false);
  taken[sel[0]] = true;

  // second point: best partner for the k = 1 pair objective
  for (std::size_t t = 0; t < n; ++t)
    score[t] = taken[t] ? kNegInf : g.pair(t, sel[0]) - vals.q[t];
  sel.push_back(argmax(score));
  taken[sel[1]] = true;

  // accumulated log terms against the selected set
  std::vector<double> acc(n, 0.0);
  for (std::size_t t = 0; t < n; ++t) acc[t] = g.pair(t, sel[0]) + g.pair(t, sel[1]);
  while (sel.size() < static_cast<std::size_t>(k) + 1) {
    for (std::size_t t = 0; t < n; ++t)
      score[t] = taken[t] ? kNegInf : acc[t] - static_cast<double>(k) * vals.q[t];
    std::size_t next = argmax(score);
    if (taken[next]) {
      // every remaining score is -inf; fall back to the first free index
      next = static_cast<std::size_t>(std::find(taken.begin(), taken.end(), false) - taken.begin());
    }
    sel.push_back(next);
    taken[next] = true;
    for (std::size_t t = 0; t < n; ++t) acc[t] += g.pair(t, next);
  }
  return make_configuration(grid, vals, std::move(sel));
}

Configuration exchange_optimize(const Configuration& config, const GridSet& grid,
                                const WeightSpec& Q, const MapSpec& f,
                                const ExchangeOptions& opts, std::vector<double>* pass_log) {
  if (config.indices.size() != config.points.size() || config.indices.size() < 2)
    throw ParameterError("exchange_optimize needs a grid-constrained configuration");
  const GridValues vals = evaluate_on_grid(grid, Q, f);
  const GridView g{grid, vals};
  const std::size_t n = grid.size();
  const int k = static_cast<int>(config.indices.size()) - 1;
  std::vector<std::size_t> sel = config.indices;
  if (pass_log) pass_log->assign(1, log_vdm_indexed(grid, vals, sel));

  std::vector<std::size_t> others;
  std::vector<double> score;

  auto single_pass = [&]() {
    bool improved = false;
    for (std::size_t j = 0; j < sel.size(); ++j) {
      others.clear();
      for (std::size_t s = 0; s < sel.size(); ++s)
        if (s != j) others.push_back(sel[s]);
      score_against(g, others, k, score);
      const std::size_t best = argmax(score);
      if (score[best] > score[sel[j]]) {
        sel[j] = best;
        improved = true;
      }
    }
    return improved;
  };

  const double pairs = 0.5 * k * (k + 1.0) * static_cast<double>(n) * static_cast<double>(n);
  const bool pair_enabled = opts.pair_budget > 0.0 && pairs <= opts.pair_budget;

  auto pair_phase = [&]() {
    for (std::size_t j = 0; j < sel.size(); ++j)
      for (std::size_t l = j + 1; l < sel.size(); ++l) {
        others.clear();
        for (std::size_t s = 0; s < sel.size(); ++s)
          if (s != j && s != l) others.push_back(sel[s]);
        score_against(g, others, k, score);
        const double now = score[sel[j]] + score[sel[l]] + g.pair(sel[j], sel[l]);
        double best = now;
        std::size_t bt = sel[j], bu = sel[l];
        for (std::size_t t = 0; t < n; ++t) {
          if (score[t] == kNegInf) continue;
          for (std::size_t u = t + 1; u < n; ++u) {
            const double v = score[t] + score[u] + g.pair(t, u);
            if (v > best) {
              best = v;
              bt = t;
              bu = u;
            }
          }
        }
        if (best > now) {
          sel[j] = bt;
          sel[l] = bu;
          return true;
        }
      }
    return false;
  };

  for (int pass = 0; pass < opts.max_passes; ++pass) {
    bool improved = single_pass();
    if (!improved && pair_enabled) improved = pair_phase();
    if (pass_log) pass_log->push_back(log_vdm_indexed(grid, vals, sel));
    if (!improved) break;
  }
  return make_configuration(grid, vals, std::move(sel));
}

double delta_k(const Configuration& config) {
  if (config.k < 1) throw ParameterError("delta_k needs k >= 1");
  if (config.log_vdm == kNegInf) return 0.0;
  const double k = config.k;
  return std::exp(2.0 * config.log_vdm / (k * (k + 1.0)));
}

Configuration fekete_configuration(const GridSet& grid, int k, const WeightSpec& Q,
                                   const MapSpec& f, const ExchangeOptions& opts,
                                   std::vector<double>* pass_log) {
  return exchange_optimize(greedy_leja(grid, k, Q, f), grid, Q, f, opts, pass_log);
}

FeketeSeries fekete_sequence(const GridSet& grid, int k_max, const WeightSpec& Q,
                             const MapSpec& f, std::optional<double> equilibrium_energy,
                             int k_step, const ExchangeOptions& opts) {
  if (k_max < 2) throw ParameterError("fekete_sequence needs k_max >= 2");
  if (k_step < 1) throw ParameterError("k_step must be positive");
  FeketeSeries series;
  if (equilibrium_energy) series.reference = std::exp(-*equilibrium_energy);
  std::vector<int> ks;
  for (int k = 2; k <= k_max; k += k_step) ks.push_back(k);
  if (ks.back() != k_max) ks.push_back(k_max);
  for (int k : ks) {
    std::vector<double> log;
    Configuration c = fekete_configuration(grid, k, Q, f, opts, &log);
    bool monotone = true;
    for (std::size_t i = 1; i < log.size(); ++i)
      if (log[i] < log[i - 1]) monotone = false;
    FeketeEntry e{k, delta_k(c), c.log_vdm, std::move(c), {}, monotone};
    if (grid.real_line) e.empirical_cdf = empirical_grid_cdf(grid, e.config.indices);
    series.entries.push_back(std::move(e));
  }
  return series;
}

double tightness_report(const Configuration& config, double M) {
  if (config.points.empty()) return 0.0;
  const auto inside = std::count_if(config.points.begin(), config.points.end(),
                                    [M](Point z) { return std::abs(z) <= M; });
  return static_cast<double>(inside) / static_cast<double>(config.points.size());
}

}  // namespace biortheq
