#include "config.hpp"

#include "biortheq/error.hpp"

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <set>

namespace biortheq::cli {

std::string to_string(const Diagnostic& d) {
  return d.path.empty() ? d.message : d.path + ": " + d.message;
}

namespace {

enum class Range { any, positive, nonnegative, open_unit };

const char* range_text(Range r) {
  switch (r) {
    case Range::positive: return "must be positive";
    case Range::nonnegative: return "must be nonnegative";
    case Range::open_unit: return "must lie in (0, 1)";
    default: return "";
  }
}

bool in_range(double v, Range r) {
  switch (r) {
    case Range::positive: return v > 0.0;
    case Range::nonnegative: return v >= 0.0;
    case Range::open_unit: return v > 0.0 && v < 1.0;
    default: return true;
  }
}

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

class Reader {
 public:
  explicit Reader(std::vector<Diagnostic>& diags) : diags_(diags) {}

  void error(const std::string& path, const std::string& msg) { diags_.push_back({path, msg}); }
  bool ok() const { return diags_.empty(); }

  const json* object(const json& parent, const char* key, const std::string& path,
                     bool required) {
    const std::string p = join(path, key);
    if (!parent.contains(key)) {
      if (required) error(p, "required block is missing");
      return nullptr;
    }
    const json& v = parent.at(key);
    if (!v.is_object()) {
      error(p, "must be an object");
      return nullptr;
    }
    return &v;
  }

  void allow_keys(const json& obj, const std::string& path,
                  std::initializer_list<const char*> keys) {
    const std::set<std::string> allowed(keys.begin(), keys.end());
    for (const auto& [key, value] : obj.items())
      if (!allowed.count(key)) error(join(path, key), "unknown key");
  }

  double number(const json& obj, const char* key, const std::string& path, double def,
                json& out, Range r = Range::any) {
    double v = def;
    if (obj.contains(key)) {
      const json& j = obj.at(key);
      if (!j.is_number()) {
        error(join(path, key), "must be a number");
      } else {
        v = j.get<double>();
        if (!std::isfinite(v)) error(join(path, key), "must be finite");
        else if (!in_range(v, r)) error(join(path, key), range_text(r));
      }
    }
    out[key] = v;
    return v;
  }

  std::optional<double> optional_number(const json& obj, const char* key, const std::string& path,
                                        json& out, Range r = Range::any) {
    if (!obj.contains(key)) {
      out[key] = nullptr;
      return std::nullopt;
    }
    return number(obj, key, path, 0.0, out, r);
  }

  std::int64_t integer(const json& obj, const char* key, const std::string& path,
                       std::int64_t def, json& out, std::int64_t min_value) {
    std::int64_t v = def;
    if (obj.contains(key)) {
      const json& j = obj.at(key);
      if (!j.is_number_integer()) {
        error(join(path, key), "must be an integer");
      } else {
        v = j.get<std::int64_t>();
        if (v < min_value)
          error(join(path, key), "must be at least " + std::to_string(min_value));
      }
    }
    out[key] = v;
    return v;
  }

  std::optional<std::uint64_t> optional_u64(const json& obj, const char* key,
                                            const std::string& path, json& out,
                                            std::uint64_t min_value = 0) {
    if (!obj.contains(key) || obj.at(key).is_null()) {
      out[key] = nullptr;
      return std::nullopt;
    }
    const json& j = obj.at(key);
    if (!j.is_number_integer() || (j.is_number_integer() && !j.is_number_unsigned() &&
                                   j.get<std::int64_t>() < 0)) {
      error(join(path, key), "must be a nonnegative integer");
      out[key] = nullptr;
      return std::nullopt;
    }
    const auto v = j.get<std::uint64_t>();
    if (v < min_value) error(join(path, key), "must be at least " + std::to_string(min_value));
    out[key] = v;
    return v;
  }

  bool boolean(const json& obj, const char* key, const std::string& path, bool def, json& out) {
    bool v = def;
    if (obj.contains(key)) {
      if (!obj.at(key).is_boolean()) error(join(path, key), "must be true or false");
      else v = obj.at(key).get<bool>();
    }
    out[key] = v;
    return v;
  }

  std::string choice(const json& obj, const char* key, const std::string& path,
                     const std::string& def, json& out, std::initializer_list<const char*> options) {
    std::string v = def;
    if (obj.contains(key)) {
      const json& j = obj.at(key);
      if (!j.is_string()) {
        error(join(path, key), "must be a string");
      } else {
        v = j.get<std::string>();
        if (std::none_of(options.begin(), options.end(), [&](const char* o) { return v == o; })) {
          std::string list;
          for (const char* o : options) list += (list.empty() ? "" : ", ") + std::string(o);
          error(join(path, key), "must be one of: " + list);
        }
      }
    }
    out[key] = v;
    return v;
  }

 private:
  std::vector<Diagnostic>& diags_;
};

// Accepts numbers and the strings "inf", "+inf", "-inf".
std::optional<double> extended_real(const json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf" || s == "+inf") return kInf;
    if (s == "-inf") return -kInf;
  }
  return std::nullopt;
}

json extended_json(double v) {
  if (v == kInf) return "inf";
  if (v == -kInf) return "-inf";
  return v;
}

std::optional<Point> parse_point(const json& j) {
  if (j.is_number()) return Point(j.get<double>(), 0.0);
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
    return Point(j[0].get<double>(), j[1].get<double>());
  return std::nullopt;
}

std::optional<DomainSet> parse_domain(const json& d, const std::string& path, Reader& rd,
                                      json& out) {
  rd.allow_keys(d, path, {"intervals", "rectangle"});
  if (d.contains("intervals") == d.contains("rectangle")) {
    rd.error(path, "give exactly one of \"intervals\" or \"rectangle\"");
    return std::nullopt;
  }
  try {
    if (d.contains("intervals")) {
      const json& arr = d.at("intervals");
      const std::string p = join(path, "intervals");
      if (!arr.is_array() || arr.empty()) {
        rd.error(p, "must be a non-empty array of [a, b] pairs");
        return std::nullopt;
      }
      std::vector<Interval> comps;
      json o = json::array();
      for (std::size_t i = 0; i < arr.size(); ++i) {
        const json& c = arr[i];
        const bool pair = c.is_array() && c.size() == 2;
        const std::optional<double> a = pair ? extended_real(c[0]) : std::nullopt;
        const std::optional<double> b = pair ? extended_real(c[1]) : std::nullopt;
        if (!a.has_value() || !b.has_value()) {
          rd.error(p + "[" + std::to_string(i) + "]",
                   "must be [a, b] with numbers or \"inf\"/\"-inf\"");
          return std::nullopt;
        }
        const double lo = a.value(), hi = b.value();
        comps.push_back({lo, hi});
        o.push_back({extended_json(lo), extended_json(hi)});
      }
      out["intervals"] = o;
      return DomainSet::intervals(std::move(comps));
    }
    const json& r = d.at("rectangle");
    const std::string p = join(path, "rectangle");
    if (!r.is_object() || !r.contains("re") || !r.contains("im")) {
      rd.error(p, "must be an object with \"re\" and \"im\" ranges");
      return std::nullopt;
    }
    rd.allow_keys(r, p, {"re", "im"});
    const json& re = r.at("re");
    const json& im = r.at("im");
    auto pair_ok = [](const json& j) {
      return j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number();
    };
    if (!pair_ok(re) || !pair_ok(im)) {
      rd.error(p, "\"re\" and \"im\" must be numeric [lo, hi] pairs");
      return std::nullopt;
    }
    Rectangle rect{re[0].get<double>(), re[1].get<double>(), im[0].get<double>(),
                   im[1].get<double>()};
    out["rectangle"] = {{"re", {rect.re_lo, rect.re_hi}}, {"im", {rect.im_lo, rect.im_hi}}};
    return DomainSet::rectangle(rect);
  } catch (const Error& e) {
    rd.error(path, e.what());
  }
  return std::nullopt;
}

MapSpec parse_map(const json& m, const std::string& path, Reader& rd, json& out) {
  rd.allow_keys(m, path, {"type", "theta", "coefficients"});
  const std::string type = rd.choice(m, "type", path, "identity", out,
                                     {"identity", "power", "exp", "log", "polynomial"});
  try {
    if (type == "power") {
      const double theta = rd.number(m, "theta", path, 2.0, out, Range::positive);
      return MapSpec::power(theta > 0.0 ? theta : 1.0);
    }
    if (type == "polynomial") {
      std::vector<double> coeffs;
      const std::string p = join(path, "coefficients");
      if (!m.contains("coefficients") || !m.at("coefficients").is_array()) {
        rd.error(p, "polynomial map needs a coefficient array");
        return MapSpec::identity();
      }
      for (const auto& c : m.at("coefficients")) {
        if (!c.is_number()) {
          rd.error(p, "coefficients must be numbers");
          return MapSpec::identity();
        }
        coeffs.push_back(c.get<double>());
      }
      out["coefficients"] = coeffs;
      return MapSpec::polynomial(coeffs);
    }
    if (type == "exp") return MapSpec::exp();
    if (type == "log") return MapSpec::log();
  } catch (const Error& e) {
    rd.error(path, e.what());
  }
  return MapSpec::identity();
}

WeightSpec parse_weight(const json& w, const std::string& path, Reader& rd, json& out) {
  rd.allow_keys(w, path, {"terms", "table"});
  WeightSpec Q;
  json terms = json::array();
  if (w.contains("terms")) {
    const json& arr = w.at("terms");
    const std::string p = join(path, "terms");
    if (!arr.is_array()) {
      rd.error(p, "must be an array");
    } else {
      for (std::size_t i = 0; i < arr.size(); ++i) {
        const std::string tp = p + "[" + std::to_string(i) + "]";
        if (!arr[i].is_object()) {
          rd.error(tp, "must be an object");
          continue;
        }
        json to;
        rd.allow_keys(arr[i], tp, {"kind", "coef", "power"});
        const std::string kind =
            rd.choice(arr[i], "kind", tp, "monomial", to, {"monomial", "abs_power", "log1p_abs2"});
        const double coef = rd.number(arr[i], "coef", tp, 1.0, to);
        const double power =
            kind == "log1p_abs2" ? 0.0 : rd.number(arr[i], "power", tp, 1.0, to, Range::nonnegative);
        using K = WeightSpec::Term::Kind;
        const K k = kind == "abs_power" ? K::abs_power
                    : kind == "log1p_abs2" ? K::log1p_abs2
                                           : K::monomial;
        Q.add({k, coef, power});
        terms.push_back(to);
      }
    }
  }
  out["terms"] = terms;
  if (w.contains("table")) {
    const json& t = w.at("table");
    const std::string p = join(path, "table");
    auto nums = [](const json& j, std::vector<double>& v) {
      if (!j.is_array()) return false;
      for (const auto& x : j) {
        if (!x.is_number()) return false;
        v.push_back(x.get<double>());
      }
      return true;
    };
    std::vector<double> xs, vs;
    if (!t.is_object() || !t.contains("x") || !t.contains("values") || !nums(t.at("x"), xs) ||
        !nums(t.at("values"), vs)) {
      rd.error(p, "table needs numeric \"x\" and \"values\" arrays");
    } else {
      try {
        Q.set_table(xs, vs);
        out["table"] = {{"x", xs}, {"values", vs}};
      } catch (const Error& e) {
        rd.error(p, e.what());
      }
    }
  }
  return Q;
}

void parse_solver(const json& t, const std::string& path, Reader& rd, json& out,
                  SolverOptions& s) {
  s.max_iters = static_cast<int>(rd.integer(t, "max_iters", path, s.max_iters, out, 0));
  s.tol_energy = rd.number(t, "tol_energy", path, s.tol_energy, out, Range::positive);
  s.tol_frostman = rd.number(t, "tol_frostman", path, s.tol_frostman, out, Range::positive);
}

void parse_exchange(const json& t, const std::string& path, Reader& rd, json& out,
                    ExchangeOptions& e) {
  e.max_passes = static_cast<int>(rd.integer(t, "max_passes", path, e.max_passes, out, 0));
  e.pair_budget = rd.number(t, "pair_budget", path, e.pair_budget, out, Range::nonnegative);
}

std::vector<int> parse_k_list(const json& t, const std::string& path, Reader& rd, json& out,
                              std::size_t min_len) {
  std::vector<int> ks;
  const std::string p = join(path, "k_list");
  if (!t.contains("k_list")) {
    rd.error(p, "k_list is required");
  } else if (!t.at("k_list").is_array()) {
    rd.error(p, "must be an array of integers");
  } else {
    for (const auto& v : t.at("k_list")) {
      if (!v.is_number_integer() || v.get<std::int64_t>() < 1) {
        rd.error(p, "entries must be integers >= 1");
        break;
      }
      ks.push_back(v.get<int>());
    }
    if (ks.size() < min_len)
      rd.error(p, "needs at least " + std::to_string(min_len) + " entr" +
                      (min_len == 1 ? "y" : "ies"));
  }
  out["k_list"] = ks;
  return ks;
}

void parse_task(const json& t, const std::string& path, Reader& rd, json& out, TaskConfig& task,
                const ProblemConfig& problem) {
  if (!t.contains("type") || !t.at("type").is_string()) {
    rd.error(join(path, "type"), "task type is required");
    return;
  }
  task.type = t.at("type").get<std::string>();
  out["type"] = task.type;
  if (std::find(kTasks.begin(), kTasks.end(), task.type) == kTasks.end()) {
    rd.error(join(path, "type"), "unknown task \"" + task.type + "\"");
    return;
  }
  const std::string& ty = task.type;
  const bool stochastic = ty == "sample" || ty == "partition";
  task.seed = rd.optional_u64(t, "seed", path, out);
  if (stochastic && !task.seed) rd.error(join(path, "seed"), "seed is required for " + ty);

  if (ty == "equilibrium" || ty == "frostman") {
    rd.allow_keys(t, path, {"type", "seed", "max_iters", "tol_energy", "tol_frostman", "tol"});
    parse_solver(t, path, rd, out, task.solver);
    task.frostman_tol = rd.number(t, "tol", path, task.frostman_tol, out, Range::positive);
  } else if (ty == "fekete") {
    rd.allow_keys(t, path, {"type", "seed", "k", "k_max", "k_step", "max_passes", "pair_budget",
                            "reference", "max_iters", "tol_energy", "tol_frostman"});
    task.k = static_cast<int>(rd.integer(t, "k", path, task.k, out, 1));
    if (t.contains("k_max")) task.k_max = static_cast<int>(rd.integer(t, "k_max", path, 2, out, 2));
    else out["k_max"] = nullptr;
    task.k_step = static_cast<int>(rd.integer(t, "k_step", path, task.k_step, out, 1));
    parse_exchange(t, path, rd, out, task.exchange);
    task.reference = rd.boolean(t, "reference", path, task.reference, out);
    parse_solver(t, path, rd, out, task.solver);
    const std::size_t need = static_cast<std::size_t>(task.k_max.value_or(task.k)) + 1;
    if (need > problem.grid_size)
      rd.error(join(path, task.k_max ? "k_max" : "k"),
               "needs " + std::to_string(need) + " grid points but grid_size is " +
                   std::to_string(problem.grid_size));
  } else if (ty == "sample") {
    rd.allow_keys(t, path, {"type", "seed", "k", "steps", "burn", "thin", "base_measure", "eta",
                            "delta_ref", "rho", "reference_cdf", "reference_radius", "metric",
                            "reference", "max_iters", "tol_energy", "tol_frostman"});
    task.k = static_cast<int>(rd.integer(t, "k", path, task.k, out, 1));
    task.steps = static_cast<std::uint64_t>(
        rd.integer(t, "steps", path, static_cast<std::int64_t>(task.steps), out, 1));
    task.burn = rd.optional_u64(t, "burn", path, out);
    task.thin = rd.optional_u64(t, "thin", path, out, 1);
    if (!task.burn) out["burn"] = task.steps / 4;
    if (!task.thin)
      out["thin"] = std::max<std::uint64_t>(
          1, static_cast<std::uint64_t>(task.k) * problem.grid_size / 10);
    const std::uint64_t burn = task.burn.value_or(task.steps / 4);
    if (task.steps <= burn) rd.error(join(path, "steps"), "steps must exceed burn");
    task.base_measure =
        rd.choice(t, "base_measure", path, task.base_measure, out, {"lebesgue", "counting"});
    task.eta = rd.optional_number(t, "eta", path, out, Range::nonnegative);
    task.delta_ref = rd.optional_number(t, "delta_ref", path, out, Range::positive);
    task.rho = rd.optional_number(t, "rho", path, out, Range::positive);
    const std::string ref = rd.choice(t, "reference_cdf", path, "none", out,
                                      {"none", "arcsine", "semicircle", "uniform"});
    task.reference_cdf = ref == "arcsine"      ? ReferenceCdf::arcsine
                         : ref == "semicircle" ? ReferenceCdf::semicircle
                         : ref == "uniform"    ? ReferenceCdf::uniform
                                               : ReferenceCdf::none;
    task.reference_radius =
        rd.number(t, "reference_radius", path, task.reference_radius, out, Range::positive);
    task.metric = rd.choice(t, "metric", path, "kolmogorov", out, {"kolmogorov", "levy"}) == "levy"
                      ? CdfMetric::levy
                      : CdfMetric::kolmogorov;
    task.reference = rd.boolean(t, "reference", path, task.reference, out);
    parse_solver(t, path, rd, out, task.solver);
    if (task.rho && task.reference_cdf == ReferenceCdf::none)
      rd.error(join(path, "reference_cdf"), "rho needs a reference CDF");
    if (task.eta && !task.delta_ref && !task.reference)
      rd.error(join(path, "delta_ref"), "eta needs delta_ref or reference = true");
    if (problem.grid_size < static_cast<std::size_t>(task.k) + 1)
      rd.error(join(path, "k"), "k+1 exceeds grid_size");
  } else if (ty == "partition") {
    rd.allow_keys(t, path, {"type", "seed", "k_list", "N", "method", "exact_budget",
                            "base_measure", "reference", "max_iters", "tol_energy",
                            "tol_frostman"});
    task.k_list = parse_k_list(t, path, rd, out, 1);
    task.N = static_cast<std::size_t>(
        rd.integer(t, "N", path, static_cast<std::int64_t>(task.N), out, 100));
    const std::string m =
        rd.choice(t, "method", path, "auto", out, {"auto", "exact", "monte_carlo"});
    task.method = m == "exact"         ? ZkMethod::exact
                  : m == "monte_carlo" ? ZkMethod::monte_carlo
                                       : ZkMethod::automatic;
    task.exact_budget =
        rd.number(t, "exact_budget", path, task.exact_budget, out, Range::positive);
    task.base_measure =
        rd.choice(t, "base_measure", path, task.base_measure, out, {"lebesgue", "counting"});
    task.reference = rd.boolean(t, "reference", path, task.reference, out);
    parse_solver(t, path, rd, out, task.solver);
  } else if (ty == "extremal") {
    rd.allow_keys(t, path, {"type", "seed", "k_list", "test_points", "green", "max_spread",
                            "max_passes", "pair_budget"});
    task.k_list = parse_k_list(t, path, rd, out, 2);
    parse_exchange(t, path, rd, out, task.exchange);
    task.max_spread = rd.number(t, "max_spread", path, task.max_spread, out, Range::positive);
    const std::string tp = join(path, "test_points");
    json pts = json::array();
    if (!t.contains("test_points") || !t.at("test_points").is_array() ||
        t.at("test_points").empty()) {
      rd.error(tp, "needs a non-empty array of points (numbers or [re, im])");
    } else {
      for (const auto& p : t.at("test_points")) {
        const auto z = parse_point(p);
        if (!z) {
          rd.error(tp, "points must be numbers or [re, im] pairs");
          break;
        }
        task.test_points.push_back(*z);
        pts.push_back({z->real(), z->imag()});
      }
    }
    out["test_points"] = pts;
    const std::string gp = join(path, "green");
    const json* g = rd.object(t, "green", path, true);
    if (g) {
      rd.allow_keys(*g, gp, {"disk", "interval"});
      try {
        if (g->contains("disk") && g->at("disk").is_object()) {
          const json& d = g->at("disk");
          const auto c = d.contains("center") ? parse_point(d.at("center")) : Point(0.0, 0.0);
          if (!c || !d.contains("radius") || !d.at("radius").is_number()) {
            rd.error(gp, "disk needs \"center\" and numeric \"radius\"");
          } else {
            task.green = GreenFunctionSpec::disk(*c, d.at("radius").get<double>());
            out["green"] = {{"disk",
                             {{"center", {c->real(), c->imag()}},
                              {"radius", d.at("radius").get<double>()}}}};
          }
        } else if (g->contains("interval") && g->at("interval").is_array() &&
                   g->at("interval").size() == 2 && g->at("interval")[0].is_number() &&
                   g->at("interval")[1].is_number()) {
          const double a = g->at("interval")[0].get<double>();
          const double b = g->at("interval")[1].get<double>();
          task.green = GreenFunctionSpec::interval(a, b);
          out["green"] = {{"interval", {a, b}}};
        } else {
          rd.error(gp, "needs {\"disk\": {...}} or {\"interval\": [a, b]}");
        }
      } catch (const Error& e) {
        rd.error(gp, e.what());
      }
    }
    if (!task.k_list.empty()) {
      const int kmax = *std::max_element(task.k_list.begin(), task.k_list.end());
      if (problem.grid_size < static_cast<std::size_t>(kmax) + 1)
        rd.error(join(path, "k_list"), "largest k needs more grid points than grid_size");
    }
  } else if (ty == "admissibility") {
    rd.allow_keys(t, path, {"type", "seed", "delta"});
    task.delta = rd.optional_number(t, "delta", path, out, Range::open_unit);
  }
}

}  // namespace

ParseResult parse_config(const json& doc) {
  ParseResult res;
  Reader rd(res.diagnostics);
  RunConfig cfg;
  json& resolved = cfg.resolved;
  resolved = json::object();

  if (!doc.is_object()) {
    rd.error("", "configuration must be a JSON object");
    return res;
  }
  rd.allow_keys(doc, "", {"problem", "task", "output"});

  if (const json* p = rd.object(doc, "problem", "", true)) {
    json& po = resolved["problem"];
    rd.allow_keys(*p, "problem", {"domain", "map", "weight", "grid_size", "truncation",
                                  "admissibility"});
    if (const json* d = rd.object(*p, "domain", "problem", true)) {
      json dout = json::object();
      cfg.problem.domain = parse_domain(*d, "problem.domain", rd, dout);
      po["domain"] = dout;
    }
    json mout = json::object();
    if (const json* m = rd.object(*p, "map", "problem", false))
      cfg.problem.map = parse_map(*m, "problem.map", rd, mout);
    else
      mout["type"] = "identity";
    po["map"] = mout;
    json wout = json::object();
    if (const json* w = rd.object(*p, "weight", "problem", false))
      cfg.problem.weight = parse_weight(*w, "problem.weight", rd, wout);
    else
      wout["terms"] = json::array();
    po["weight"] = wout;
    cfg.problem.grid_size = static_cast<std::size_t>(
        rd.integer(*p, "grid_size", "problem", 400, po, 2));

    json tout = json::object();
    const json empty = json::object();
    const json* tr = rd.object(*p, "truncation", "problem", false);
    const json& trj = tr ? *tr : empty;
    rd.allow_keys(trj, "problem.truncation", {"initial_radius", "max_doublings", "margin"});
    auto& to = cfg.problem.truncation;
    to.initial_radius = rd.number(trj, "initial_radius", "problem.truncation", to.initial_radius,
                                  tout, Range::positive);
    to.max_doublings = static_cast<int>(
        rd.integer(trj, "max_doublings", "problem.truncation", to.max_doublings, tout, 0));
    to.margin = rd.number(trj, "margin", "problem.truncation", to.margin, tout, Range::open_unit);
    po["truncation"] = tout;

    json aout = json::object();
    const json* ad = rd.object(*p, "admissibility", "problem", false);
    const json& adj = ad ? *ad : empty;
    rd.allow_keys(adj, "problem.admissibility", {"r0", "shells", "threshold", "samples_per_shell"});
    auto& sc = cfg.problem.admissibility;
    sc.r0 = rd.number(adj, "r0", "problem.admissibility", sc.r0, aout, Range::positive);
    sc.shells = static_cast<int>(rd.integer(adj, "shells", "problem.admissibility", sc.shells, aout, 1));
    sc.threshold = rd.number(adj, "threshold", "problem.admissibility", sc.threshold, aout);
    sc.samples_per_shell = static_cast<int>(rd.integer(
        adj, "samples_per_shell", "problem.admissibility", sc.samples_per_shell, aout, 2));
    po["admissibility"] = aout;

    if (cfg.problem.domain && !cfg.problem.map.admits(*cfg.problem.domain))
      rd.error("problem.map", "branch domain violated: " + cfg.problem.map.describe() +
                                  " is not defined on " + cfg.problem.domain->describe());
  }

  if (const json* t = rd.object(doc, "task", "", true)) {
    json tout = json::object();
    parse_task(*t, "task", rd, tout, cfg.task, cfg.problem);
    resolved["task"] = tout;
    // unbounded domains need an admissible field for every task but the screen itself
    if (rd.ok() && cfg.problem.domain && cfg.problem.domain->unbounded() &&
        cfg.task.type != "admissibility") {
      try {
        const auto rep = check_f_admissible(*cfg.problem.domain, cfg.problem.weight,
                                            cfg.problem.map, cfg.problem.admissibility);
        if (!rep.admissible())
          rd.error("problem.weight",
                   "weight is not f-admissible on the unbounded domain (suspect shell " +
                       std::to_string(rep.offending_shell.value_or(-1)) + ")");
      } catch (const Error& e) {
        rd.error("problem.weight", e.what());
      }
    }
  }

  json oout = json::object();
  const json empty = json::object();
  const json* o = rd.object(doc, "output", "", false);
  const json& oj = o ? *o : empty;
  rd.allow_keys(oj, "output", {"directory", "formats"});
  if (oj.contains("directory")) {
    if (!oj.at("directory").is_string()) rd.error("output.directory", "must be a string");
    else cfg.output.directory = oj.at("directory").get<std::string>();
  }
  oout["directory"] = cfg.output.directory;
  if (oj.contains("formats")) {
    const json& f = oj.at("formats");
    if (!f.is_array()) {
      rd.error("output.formats", "must be an array");
    } else {
      cfg.output.json = cfg.output.csv = false;
      for (const auto& v : f) {
        const std::string s = v.is_string() ? v.get<std::string>() : "";
        if (s == "json") cfg.output.json = true;
        else if (s == "csv") cfg.output.csv = true;
        else rd.error("output.formats", "entries must be \"json\" or \"csv\"");
      }
    }
  }
  json formats = json::array();
  if (cfg.output.json) formats.push_back("json");
  if (cfg.output.csv) formats.push_back("csv");
  oout["formats"] = formats;
  resolved["output"] = oout;

  if (rd.ok()) res.config = std::move(cfg);
  return res;
}

std::vector<Diagnostic> validate(const json& doc) { return parse_config(doc).diagnostics; }

}  // namespace biortheq::cli
