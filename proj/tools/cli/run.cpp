#include "run.hpp"

#include "artifacts.hpp"
#include "biortheq/cdf.hpp"
#include "biortheq/error.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#ifndef BIORTHEQ_VERSION
#define BIORTHEQ_VERSION "unknown"
#endif

namespace biortheq::cli {

namespace {

json point_json(Point z) { return json::array({z.real(), z.imag()}); }

// JSON has no infinities; encode them as strings so nothing is lost.
json num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

std::string fmt(double v) { return format_double(v); }
std::string fmt(std::size_t v) { return std::to_string(v); }
std::string fmt(int v) { return std::to_string(v); }

struct Prepared {
  GridPtr grid;
  std::optional<EquilibriumRun> eq;
  double radius = 0.0;
  int doublings = 0;
};

Prepared prepare(const RunConfig& c, bool need_equilibrium) {
  const auto& p = c.problem;
  Prepared out;
  if (p.domain->unbounded() || need_equilibrium) {
    out.eq.emplace(solve_equilibrium(*p.domain, p.weight, p.map, p.grid_size, c.task.solver,
                                     p.truncation, p.admissibility));
    out.grid = out.eq->grid;
    out.radius = out.eq->radius;
    out.doublings = out.eq->doublings;
    return out;
  }
  out.grid = std::make_shared<const GridSet>(build_grid(*p.domain, p.grid_size));
  out.radius = p.domain->max_modulus();
  return out;
}

json residual_json(const ResidualReport& r) {
  return {{"r_minus", num(r.r_minus)}, {"r_plus", num(r.r_plus)}, {"max", num(r.max())},
          {"worst_minus_index", r.worst_minus}, {"worst_plus_index", r.worst_plus},
          {"tol", num(r.tol)}, {"pass", r.pass}};
}

json equilibrium_json(const EquilibriumRun& run) {
  const auto& res = run.result;
  const auto& g = *run.grid;
  double lo = kInf, hi = -kInf, rmax = 0.0;
  for (auto i : res.support_idx) {
    lo = std::min(lo, g.points[i].real());
    hi = std::max(hi, g.points[i].real());
    rmax = std::max(rmax, std::abs(g.points[i]));
  }
  return {{"V_w", num(res.V_w)},
          {"F_w", num(res.F_w)},
          {"delta", num(std::exp(-res.V_w))},
          {"iterations", res.iterations},
          {"converged", res.converged},
          {"support_size", res.support_idx.size()},
          {"support_min_real", num(lo)},
          {"support_max_real", num(hi)},
          {"support_max_modulus", num(rmax)},
          {"truncation_radius", num(run.radius)},
          {"doublings", run.doublings},
          {"grid_size", g.size()},
          {"eps", num(g.spacing)},
          {"solver_residuals", residual_json(res.residual_report)}};
}

CsvTable measure_table(const EquilibriumRun& run, const std::vector<double>& potential) {
  const auto& g = *run.grid;
  const auto& w = run.result.mu_star.weights;
  CsvTable t({"index", "x", "y", "cell_mass", "weight", "cdf", "potential"});
  std::vector<double> cdf;
  if (g.real_line) cdf = cell_cdf(run.result.mu_star);
  for (std::size_t i = 0; i < g.size(); ++i)
    t.row({fmt(i), fmt(g.points[i].real()), fmt(g.points[i].imag()), fmt(g.cell_mass[i]),
           fmt(w[i]), cdf.empty() ? "" : fmt(cdf[i]), fmt(potential[i])});
  return t;
}

CsvTable trace_table(const EquilibriumResult& res) {
  CsvTable t({"iteration", "energy"});
  for (std::size_t i = 0; i < res.energy_trace.size(); ++i)
    t.row({fmt(i), fmt(res.energy_trace[i])});
  return t;
}

std::function<double(double)> reference_cdf(const TaskConfig& t, const DomainSet& d) {
  switch (t.reference_cdf) {
    case ReferenceCdf::arcsine: {
      const double a = d.min_real(), b = d.max_real();
      return [a, b](double x) { return arcsine_cdf(x, a, b); };
    }
    case ReferenceCdf::uniform: {
      const double a = d.min_real(), b = d.max_real();
      return [a, b](double x) { return uniform_cdf(x, a, b); };
    }
    case ReferenceCdf::semicircle: {
      const double r = t.reference_radius;
      return [r](double x) { return semicircle_cdf(x, r); };
    }
    default: return {};
  }
}

BaseMeasure base_measure(const TaskConfig& t, GridPtr grid) {
  return t.base_measure == "counting" ? BaseMeasure::counting(std::move(grid))
                                      : BaseMeasure::lebesgue(std::move(grid));
}

struct TaskResult {
  json results = json::object();
  bool nonconverged = false;
};

TaskResult run_equilibrium(const RunConfig& c, ArtifactWriter& out, bool certify) {
  TaskResult tr;
  const auto& p = c.problem;
  Prepared prep = prepare(c, true);
  const auto& run = *prep.eq;
  tr.results["equilibrium"] = equilibrium_json(run);
  const auto fr = frostman_check(run.result, p.weight, p.map, c.task.frostman_tol);
  tr.results["frostman"] = residual_json(fr);
  if (certify) {
    const auto cert = certify_minimizer(run.result.mu_star, p.weight, p.map, c.task.frostman_tol);
    tr.results["certificate"] = {{"pass", cert.pass},
                                 {"constant", num(cert.constant)},
                                 {"worst_below", num(cert.worst_below)},
                                 {"worst_above", num(cert.worst_above)},
                                 {"degenerate", cert.degenerate}};
  }
  tr.nonconverged = !run.result.converged;
  if (c.output.csv) {
    const auto u = modified_potential_on_grid(run.result.mu_star, p.weight, p.map);
    out.write("measure.csv", measure_table(run, u).str());
    out.write("energy_trace.csv", trace_table(run.result).str());
  }
  return tr;
}

TaskResult run_fekete(const RunConfig& c, ArtifactWriter& out) {
  TaskResult tr;
  const auto& p = c.problem;
  const auto& t = c.task;
  Prepared prep = prepare(c, t.reference);
  const auto& g = *prep.grid;
  std::optional<double> ve;
  if (prep.eq) {
    ve = prep.eq->result.V_w;
    tr.results["equilibrium"] = equilibrium_json(*prep.eq);
    tr.nonconverged = !prep.eq->result.converged;
  }

  FeketeSeries series;
  if (t.k_max) {
    series = fekete_sequence(g, *t.k_max, p.weight, p.map, ve, t.k_step, t.exchange);
  } else {
    std::vector<double> log;
    Configuration cfg = fekete_configuration(g, t.k, p.weight, p.map, t.exchange, &log);
    bool monotone = true;
    for (std::size_t i = 1; i < log.size(); ++i) monotone = monotone && log[i] >= log[i - 1];
    FeketeEntry e{t.k, delta_k(cfg), cfg.log_vdm, std::move(cfg), {}, monotone};
    if (g.real_line) e.empirical_cdf = empirical_grid_cdf(g, e.config.indices);
    series.entries.push_back(std::move(e));
    if (ve) series.reference = std::exp(-*ve);
  }

  json entries = json::array();
  bool all_monotone = true;
  for (const auto& e : series.entries) {
    all_monotone = all_monotone && e.monotone_passes;
    entries.push_back({{"k", e.k},
                       {"delta", num(e.delta)},
                       {"log_vdm", num(e.log_vdm)},
                       {"monotone_passes", e.monotone_passes},
                       {"tightness", num(tightness_report(e.config, prep.radius))}});
  }
  tr.results["fekete"] = {{"entries", entries},
                          {"reference_delta", series.reference ? num(*series.reference) : json()},
                          {"tightness_radius", num(prep.radius)},
                          {"monotone_passes", all_monotone}};
  const auto& last = series.entries.back();
  if (prep.eq && g.real_line)
    tr.results["fekete"]["cdf_sup_distance"] =
        num(sup_distance(last.empirical_cdf, cell_cdf(prep.eq->result.mu_star)));

  if (c.output.csv) {
    CsvTable pts({"k", "slot", "grid_index", "x", "y"});
    CsvTable ser({"k", "delta", "log_vdm", "reference_delta"});
    for (const auto& e : series.entries) {
      for (std::size_t i = 0; i < e.config.points.size(); ++i)
        pts.row({fmt(e.k), fmt(i), fmt(e.config.indices[i]), fmt(e.config.points[i].real()),
                 fmt(e.config.points[i].imag())});
      ser.row({fmt(e.k), fmt(e.delta), fmt(e.log_vdm),
               series.reference ? fmt(*series.reference) : ""});
    }
    out.write("fekete_points.csv", pts.str());
    out.write("fekete_series.csv", ser.str());
    if (g.real_line) {
      CsvTable cdf({"x", "fekete_cdf", "equilibrium_cdf"});
      std::vector<double> eqc;
      if (prep.eq) eqc = cell_cdf(prep.eq->result.mu_star);
      for (std::size_t i = 0; i < g.size(); ++i)
        cdf.row({fmt(g.points[i].real()), fmt(last.empirical_cdf[i]),
                 eqc.empty() ? "" : fmt(eqc[i])});
      out.write("fekete_cdf.csv", cdf.str());
    }
  }
  return tr;
}

TaskResult run_sample(const RunConfig& c, ArtifactWriter& out) {
  TaskResult tr;
  const auto& p = c.problem;
  const auto& t = c.task;
  Prepared prep = prepare(c, t.reference);
  if (prep.eq) {
    tr.results["equilibrium"] = equilibrium_json(*prep.eq);
    tr.nonconverged = !prep.eq->result.converged;
  }
  const BaseMeasure nu = base_measure(t, prep.grid);
  McmcOptions o;
  o.steps = t.steps;
  o.burn = t.burn;
  o.thin = t.thin;
  o.seed = *t.seed;
  const SampleBatch batch = mcmc_sample(nu, t.k, p.weight, p.map, o);

  double mean_root = 0.0;
  for (std::size_t i = 0; i < batch.size(); ++i) mean_root += batch.root(i);
  if (batch.size()) mean_root /= static_cast<double>(batch.size());
  json s = {{"k", batch.k},
            {"count", batch.size()},
            {"acceptance_rate", num(batch.acceptance_rate)},
            {"seed", batch.seed},
            {"steps", batch.steps},
            {"burn", batch.burn},
            {"thin", batch.thin},
            {"max_drift", num(batch.max_drift)},
            {"mean_root", num(mean_root)}};

  std::optional<double> delta_ref = t.delta_ref;
  if (!delta_ref && prep.eq) delta_ref = std::exp(-prep.eq->result.V_w);
  if (delta_ref) s["delta_ref"] = num(*delta_ref);
  if (t.eta && batch.size()) s["tail_probability"] = num(tail_probability(batch, *t.eta, *delta_ref));

  const auto ref = reference_cdf(t, *p.domain);
  if (ref && prep.grid->real_line && !batch.mean_cdf.empty()) {
    double d = 0.0;
    for (std::size_t i = 0; i < prep.grid->size(); ++i)
      d = std::max(d, std::abs(batch.mean_cdf[i] - ref(prep.grid->points[i].real())));
    s["mean_cdf_sup_distance"] = num(d);
  }
  if (t.rho && ref && batch.size()) {
    const CdfBall ball{ref, *t.rho, t.metric};
    const auto m = neighborhood_mass(batch, ball);
    s["neighborhood"] = {{"rho", num(*t.rho)},
                         {"metric", t.metric == CdfMetric::levy ? "levy" : "kolmogorov"},
                         {"sigma", num(m.sigma)},
                         {"root", num(m.root)},
                         {"root_bound", num(m.root_bound)},
                         {"hits", m.hits},
                         {"samples", m.samples},
                         {"one_sided", m.one_sided}};
  }
  tr.results["sample"] = s;

  if (c.output.json) {
    json bj = s;
    bj["grid"] = json::array();
    for (const auto& z : prep.grid->points) bj["grid"].push_back(point_json(z));
    bj["mean_cdf"] = batch.mean_cdf;
    out.write("sample_batch.json", bj.dump(2) + "\n");
  }
  if (c.output.csv) {
    const bool complex = !prep.grid->real_line;
    std::vector<std::string> header{"sample", "log_vdm", "root"};
    for (int i = 0; i <= t.k; ++i) header.push_back("x" + std::to_string(i));
    if (complex)
      for (int i = 0; i <= t.k; ++i) header.push_back("y" + std::to_string(i));
    CsvTable st(header);
    for (std::size_t s_i = 0; s_i < batch.size(); ++s_i) {
      std::vector<std::string> row{fmt(s_i), fmt(batch.log_vdm[s_i]), fmt(batch.root(s_i))};
      const auto pts = batch.points(s_i);
      for (const auto& z : pts) row.push_back(fmt(z.real()));
      if (complex)
        for (const auto& z : pts) row.push_back(fmt(z.imag()));
      st.row(std::move(row));
    }
    out.write("samples.csv", st.str());
    if (!batch.mean_cdf.empty()) {
      CsvTable cdf({"x", "mean_cdf", "reference_cdf", "equilibrium_cdf"});
      std::vector<double> eqc;
      if (prep.eq) eqc = cell_cdf(prep.eq->result.mu_star);
      for (std::size_t i = 0; i < prep.grid->size(); ++i) {
        const double x = prep.grid->points[i].real();
        cdf.row({fmt(x), fmt(batch.mean_cdf[i]), ref ? fmt(ref(x)) : "",
                 eqc.empty() ? "" : fmt(eqc[i])});
      }
      out.write("sample_cdf.csv", cdf.str());
    }
  }
  return tr;
}

TaskResult run_partition(const RunConfig& c, ArtifactWriter& out) {
  TaskResult tr;
  const auto& p = c.problem;
  const auto& t = c.task;
  Prepared prep = prepare(c, t.reference);
  std::optional<double> ve;
  if (prep.eq) {
    ve = prep.eq->result.V_w;
    tr.results["equilibrium"] = equilibrium_json(*prep.eq);
    tr.nonconverged = !prep.eq->result.converged;
  }
  const BaseMeasure nu = base_measure(t, prep.grid);
  const auto series =
      zk_root_sequence(nu, t.k_list, p.weight, p.map, t.N, *t.seed, ve, t.method, t.exact_budget);
  json entries = json::array();
  for (const auto& e : series.entries)
    entries.push_back({{"k", e.k},
                       {"log_Z", num(e.log_Z)},
                       {"root", num(e.root)},
                       {"root_stderr", num(e.root_stderr)},
                       {"exact", e.exact}});
  tr.results["partition"] = {{"entries", entries},
                             {"monotone_decreasing", series.monotone_decreasing()},
                             {"reference_delta", series.reference ? num(*series.reference) : json()},
                             {"N", t.N},
                             {"seed", *t.seed}};
  if (c.output.csv) {
    CsvTable z({"k", "log_Z", "root", "root_stderr", "exact", "reference_delta"});
    for (const auto& e : series.entries)
      z.row({fmt(e.k), fmt(e.log_Z), fmt(e.root), fmt(e.root_stderr), e.exact ? "1" : "0",
             series.reference ? fmt(*series.reference) : ""});
    out.write("zk_roots.csv", z.str());
  }
  return tr;
}

TaskResult run_extremal(const RunConfig& c, ArtifactWriter& out) {
  TaskResult tr;
  const auto& p = c.problem;
  const auto& t = c.task;
  Prepared prep = prepare(c, false);
  const auto& g = *prep.grid;
  std::vector<Configuration> configs;
  for (int k : t.k_list) configs.push_back(fekete_configuration(g, k, p.weight, p.map, t.exchange));
  const auto rep = bw_bound_check(configs, t.test_points, *t.green, g, p.weight, p.map,
                                  t.max_spread);
  json per_k = json::array();
  for (std::size_t i = 0; i < rep.ks.size(); ++i)
    per_k.push_back({{"k", rep.ks[i]}, {"max_gap", num(rep.max_gap[i])}});
  tr.results["extremal"] = {{"green", t.green->describe()},
                            {"per_k", per_k},
                            {"overall_max", num(rep.overall_max)},
                            {"spread", num(rep.spread)},
                            {"trend", num(rep.trend)},
                            {"pass", rep.pass}};
  if (c.output.csv) {
    CsvTable e({"k", "z_re", "z_im", "L_k", "green_z", "green_fz", "B_k"});
    for (const auto& cfg : configs)
      for (const auto& z : t.test_points) {
        const double L = wkq_lower_estimate(z, cfg, g, p.weight, p.map);
        const double gz = (*t.green)(z);
        const double gf = (*t.green)(p.map(z));
        e.row({fmt(cfg.k), fmt(z.real()), fmt(z.imag()), fmt(L), fmt(gz), fmt(gf),
               fmt(L - gz - gf)});
      }
    out.write("extremal.csv", e.str());
  }
  return tr;
}

TaskResult run_admissibility(const RunConfig& c, ArtifactWriter& out) {
  TaskResult tr;
  const auto& p = c.problem;
  const auto rep = c.task.delta ? check_strong_f_admissible(*p.domain, p.weight, p.map,
                                                           *c.task.delta, p.admissibility)
                                : check_f_admissible(*p.domain, p.weight, p.map, p.admissibility);
  tr.results["admissibility"] = {
      {"verdict", to_string(rep.verdict)},
      {"strong", c.task.delta.has_value()},
      {"delta", c.task.delta ? num(*c.task.delta) : json()},
      {"trivially_bounded", rep.trivially_bounded},
      {"offending_shell", rep.offending_shell ? json(*rep.offending_shell) : json()},
      {"notes", rep.notes}};
  if (c.output.csv) {
    CsvTable s({"shell", "r_inner", "r_outer", "min_psi", "argmin_re", "argmin_im", "empty"});
    for (const auto& r : rep.shells)
      s.row({fmt(r.index), fmt(r.r_inner), fmt(r.r_outer), fmt(r.min_psi), fmt(r.argmin.real()),
             fmt(r.argmin.imag()), r.empty ? "1" : "0"});
    out.write("shells.csv", s.str());
  }
  return tr;
}

int exit_code_for(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::resource: return kExitResource;
    case ErrorKind::no_convergence:
    case ErrorKind::numerical: return kExitNoConvergence;
    default: return kExitValidation;
  }
}

const char* status_for(int code) {
  switch (code) {
    case kExitOk: return "ok";
    case kExitValidation: return "validation_error";
    case kExitNoConvergence: return "no_convergence";
    case kExitResource: return "resource_limit";
    default: return "failure";
  }
}

}  // namespace

RunOutcome run(const json& input, const Overrides& ov) {
  RunOutcome outcome;
  json doc = input;
  if (doc.is_object()) {
    if (ov.out) doc["output"]["directory"] = *ov.out;
    if (ov.seed && doc.contains("task") && doc["task"].is_object()) doc["task"]["seed"] = *ov.seed;
  }
  ParseResult parsed = parse_config(doc);
  outcome.diagnostics = parsed.diagnostics;
  if (parsed.config && ov.task && *ov.task != parsed.config->task.type)
    outcome.diagnostics.push_back(
        {"task.type", "command line task \"" + *ov.task + "\" does not match configuration task \"" +
                          parsed.config->task.type + "\""});
  if (!outcome.diagnostics.empty()) {
    outcome.exit_code = kExitValidation;
    json d = json::array();
    for (const auto& x : outcome.diagnostics) d.push_back({{"path", x.path}, {"message", x.message}});
    outcome.summary = {{"status", status_for(kExitValidation)}, {"diagnostics", d}};
    return outcome;
  }
  const RunConfig& cfg = *parsed.config;
  outcome.directory = cfg.output.directory;
  ArtifactWriter writer(outcome.directory);

  json summary = {{"version", BIORTHEQ_VERSION},
                  {"task", cfg.task.type},
                  {"config", cfg.resolved},
                  {"seed", cfg.task.seed ? json(*cfg.task.seed) : json()}};
  int code = kExitOk;
  try {
    TaskResult tr;
    const std::string& ty = cfg.task.type;
    if (ty == "equilibrium") tr = run_equilibrium(cfg, writer, false);
    else if (ty == "frostman") tr = run_equilibrium(cfg, writer, true);
    else if (ty == "fekete") tr = run_fekete(cfg, writer);
    else if (ty == "sample") tr = run_sample(cfg, writer);
    else if (ty == "partition") tr = run_partition(cfg, writer);
    else if (ty == "extremal") tr = run_extremal(cfg, writer);
    else tr = run_admissibility(cfg, writer);
    summary["results"] = tr.results;
    if (tr.nonconverged) code = kExitNoConvergence;
  } catch (const NoConvergenceError& e) {
    code = kExitNoConvergence;
    summary["error"] = {{"kind", to_string(e.kind())},
                        {"message", e.what()},
                        {"last_value", num(e.last_value())}};
  } catch (const Error& e) {
    code = exit_code_for(e);
    summary["error"] = {{"kind", to_string(e.kind())}, {"message", e.what()}};
  }
  summary["exit_code"] = code;
  summary["status"] = status_for(code);
  writer.write("summary.json", summary.dump(2) + "\n");
  writer.write_manifest();
  for (const auto& e : writer.entries()) outcome.files.push_back(e.file);
  outcome.summary = std::move(summary);
  outcome.exit_code = code;
  return outcome;
}

}  // namespace biortheq::cli
