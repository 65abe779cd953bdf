#include "wlab/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace wlab {

using ordered_json = nlohmann::ordered_json;

std::string fmt17(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

struct KeyValueFile {
  std::map<std::string, std::string> kv;  // "section.key" -> value
  std::vector<std::string> monitor_sections;
  std::string origin;

  bool has(const std::string& key) const { return kv.count(key) > 0; }
  std::string get(const std::string& key, const std::string& fallback) const {
    auto it = kv.find(key);
    return it == kv.end() ? fallback : it->second;
  }
  double get_num(const std::string& key, double fallback) const {
    auto it = kv.find(key);
    if (it == kv.end()) return fallback;
    try {
      size_t pos = 0;
      const double v = std::stod(it->second, &pos);
      if (pos != it->second.size()) throw std::invalid_argument("");
      return v;
    } catch (...) {
      throw config_error(origin + ": key '" + key + "' is not a number: '" +
                         it->second + "'");
    }
  }
  int get_int(const std::string& key, int fallback) const {
    return static_cast<int>(get_num(key, fallback));
  }
  bool get_bool(const std::string& key, bool fallback) const {
    auto it = kv.find(key);
    if (it == kv.end()) return fallback;
    if (it->second == "true" || it->second == "1" || it->second == "yes")
      return true;
    if (it->second == "false" || it->second == "0" || it->second == "no")
      return false;
    throw config_error(origin + ": key '" + key + "' is not a boolean");
  }
};

KeyValueFile parse_kv(const std::string& text, const std::string& origin) {
  KeyValueFile f;
  f.origin = origin;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find_first_of("#;");
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw config_error(origin + ":" + std::to_string(lineno) +
                           ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section.rfind("monitor:", 0) == 0)
        f.monitor_sections.push_back(section);
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw config_error(origin + ":" + std::to_string(lineno) +
                         ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (section.empty() || key.empty())
      throw config_error(origin + ":" + std::to_string(lineno) +
                         ": key outside a section");
    f.kv[section + "." + key] = value;
  }
  return f;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

ModelKind model_kind_from_string(const std::string& s) {
  if (s == "euclidean") return ModelKind::euclidean;
  if (s == "sphere") return ModelKind::sphere;
  if (s == "hyperbolic") return ModelKind::hyperbolic;
  if (s == "circle") return ModelKind::circle;
  if (s == "interval") return ModelKind::interval;
  throw config_error("unknown model kind: " + s);
}

}  // namespace

ScenarioConfig ScenarioConfig::parse(const std::string& text,
                                     const std::string& origin) {
  const KeyValueFile f = parse_kv(text, origin);
  ScenarioConfig c;
  c.label = f.get("scenario.label", "scenario");

  c.kind = model_kind_from_string(f.get("model.kind", "sphere"));
  c.n = f.get_int("model.n", c.kind == ModelKind::circle ||
                                     c.kind == ModelKind::interval
                                 ? 1
                                 : 2);
  switch (c.kind) {
    case ModelKind::sphere: c.r_max = f.get_num("model.r_max", kPi); break;
    case ModelKind::hyperbolic: c.r_max = f.get_num("model.r_max", 6.0); break;
    case ModelKind::circle:
      c.r_max = f.get_num("model.r_max", 2.0 * kPi);
      break;
    case ModelKind::interval: c.r_max = f.get_num("model.r_max", kPi); break;
    case ModelKind::euclidean:
      if (!f.has("model.r_max"))
        throw config_error(origin + ": model.r_max required for euclidean");
      c.r_max = f.get_num("model.r_max", 0.0);
      break;
  }
  c.N = f.get_int("model.N", 400);

  c.potential = f.get("potential.preset", "zero");
  c.potential_a = f.get_num("potential.a", 1.0);

  c.flow = flow_name_from_string(f.get("flow.name", "static"));
  c.lambda = f.get_num("flow.lambda", 0.0);
  const std::string coup = f.get("flow.coupling", "independent");
  if (coup == "independent")
    c.coupling = Coupling::independent;
  else if (coup == "measure_preserving")
    c.coupling = Coupling::measure_preserving;
  else
    throw config_error(origin + ": unknown coupling '" + coup + "'");

  c.initial.kind = initial_kind_from_string(f.get("initial.kind", "uniform"));
  c.initial.center = f.get_num("initial.center", 0.0);
  c.initial.width = f.get_num("initial.width", 0.1);
  c.initial.t0 = f.get_num("initial.t0", 0.01);
  c.initial.mode = f.get_int("initial.mode", 1);
  c.initial.amplitude = f.get_num("initial.amplitude", 0.5);

  c.dt = f.get_num("solve.dt", 1e-3);
  c.horizon = f.get_num("solve.horizon", 1.0);
  c.scheme = scheme_from_string(f.get("solve.scheme", "crank_nicolson"));
  c.output_start = f.get_num("solve.output_start", 0.1);
  c.output_end = f.get_num("solve.output_end", -1.0);
  c.output_count = f.get_int("solve.output_count", 19);

  for (const auto& name : split_list(f.get("functionals.list", ""))) {
    if (name == "w_m") c.functionals.w_m = true;
    else if (name == "w_k") c.functionals.w_k = true;
    else if (name == "w_mk") c.functionals.w_mk = true;
    else if (name == "w_tilde") c.functionals.w_tilde = true;
    else if (name == "H" || name == "fisher") continue;  // always computed
    else throw config_error(origin + ": unknown functional '" + name + "'");
  }
  c.functionals.m = f.get_num("functionals.m", 2.0);
  c.functionals.K_mk = f.get_num("functionals.K_mk", 0.0);
  c.functionals.K_wk = f.get_num("functionals.K_wk", 0.0);
  c.functionals.gauge_offset = f.get_num("functionals.gauge_offset", 0.0);
  c.functionals.dk_variant =
      dk_variant_from_string(f.get("functionals.dk_variant", "derivation"));
  c.functionals.wm_mode = dissipation_mode_from_string(
      f.get("functionals.wm_mode", "gradient_formula"));
  c.s_sign_variant = f.get("functionals.s_sign_variant", "lemma") == "lemma"
                         ? STensorVariant::lemma
                         : STensorVariant::statement;

  c.c1 = f.get_num("tolerances.c1", 2.0);
  c.c2 = f.get_num("tolerances.c2", 2.0);
  for (const char* name : {"w_m", "w_k", "w_mk", "w_tilde"}) {
    const std::string key = std::string("tolerances.c2.") + name;
    if (f.has(key)) c.functionals.c2_override[name] = f.get_num(key, 0.0);
  }
  c.eps_cond = f.get_num("tolerances.eps_cond", 1e-9);
  c.pole_band = f.get_num("tolerances.pole_band", -1.0);
  c.boundary_band = f.get_num("tolerances.boundary_band", 0.0);

  c.refine_levels = f.get_int("refine.levels", 0);
  c.seed = static_cast<unsigned long long>(f.get_num("scenario.seed", 0x5EED));
  c.oracle_eigenmode = f.get_bool("oracle.eigenmode", false);

  for (const auto& section : f.monitor_sections) {
    MonitorConfig m;
    m.label = section.substr(std::string("monitor:").size());
    m.check = f.get(section + ".check", "");
    if (m.check.empty())
      throw config_error(origin + ": [" + section + "] needs a 'check' key");
    m.variant = f.get(section + ".variant", "");
    m.alpha = f.get_num(section + ".alpha", 1.0);
    m.m = f.get_num(section + ".m", static_cast<double>(c.n));
    m.K = f.get_num(section + ".K", 0.0);
    m.delta = f.get_num(section + ".delta", 1.0);
    m.negative_control = f.get_bool(section + ".negative_control", false);
    if (f.has(section + ".tol"))
      m.tol_override = f.get_num(section + ".tol", 0.0);
    c.monitors.push_back(std::move(m));
  }
  c.validate();
  return c;
}

ScenarioConfig ScenarioConfig::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path);
}

void ScenarioConfig::validate() const {
  if (N < 16) throw config_error(label + ": model.N must be >= 16");
  if (!(dt > 0.0)) throw config_error(label + ": solve.dt must be positive");
  if (!(horizon > 0.0))
    throw config_error(label + ": solve.horizon must be positive");
  if (output_count < 1)
    throw config_error(label + ": solve.output_count must be >= 1");
  const bool has_wfun = functionals.w_m || functionals.w_mk ||
                        functionals.w_tilde;
  if (has_wfun && functionals.m < n)
    throw config_error(label +
                       ": functionals.m violates the precondition m >= n");
  for (const auto& m : monitors) {
    static const std::vector<std::string> names{
        "li_yau", "hamilton", "lyh", "second_order", "lsi", "rlsi",
        "cor1",   "cor2"};
    if (std::find(names.begin(), names.end(), m.check) == names.end())
      throw config_error(label + ": unknown monitor check '" + m.check + "'");
    if ((m.check == "li_yau" || m.check == "lyh" ||
         m.check == "second_order" || m.check == "cor2") &&
        m.m < n)
      throw config_error(label + ": monitor '" + m.label +
                         "' violates the precondition m >= n");
  }
  const bool needs_coev =
      functionals.w_k ||
      std::any_of(monitors.begin(), monitors.end(), [](const MonitorConfig& m) {
        return m.check == "lsi" || m.check == "rlsi";
      });
  if (needs_coev && flow != FlowName::static_flow &&
      coupling != Coupling::measure_preserving)
    throw config_error(label +
                       ": semigroup entropies on a moving flow require "
                       "measure_preserving coupling");
  if ((functionals.w_mk || functionals.w_m) &&
      flow != FlowName::static_flow &&
      coupling != Coupling::measure_preserving)
    throw config_error(label +
                       ": W entropies on a moving flow require "
                       "measure_preserving coupling");
}

namespace {

struct Built {
  RadialModel model;
  PotentialSpec phi0;
  FlowSpec flow;
  Grid grid;
};

Built build_geometry(const ScenarioConfig& c, int level) {
  Built b;
  switch (c.kind) {
    case ModelKind::sphere: b.model = RadialModel::sphere(c.n, 0.0, c.r_max); break;
    case ModelKind::euclidean: b.model = RadialModel::euclidean(c.n, c.r_max); break;
    case ModelKind::hyperbolic: b.model = RadialModel::hyperbolic(c.n, c.r_max); break;
    case ModelKind::circle: b.model = RadialModel::circle(c.r_max); break;
    case ModelKind::interval: b.model = RadialModel::interval(c.r_max); break;
  }
  if (c.potential == "zero") b.phi0 = PotentialSpec::zero();
  else if (c.potential == "quadratic") b.phi0 = PotentialSpec::quadratic(c.potential_a);
  else if (c.potential == "cosine") b.phi0 = PotentialSpec::cosine(c.potential_a);
  else throw config_error(c.label + ": unknown potential preset '" + c.potential + "'");

  FlowParams fp;
  fp.lambda = c.lambda;
  b.flow = catalog(c.flow, b.model, b.phi0, c.coupling, fp);
  b.flow.validate(c.horizon);

  const int scale = 1 << level;
  const int N = b.model.periodic() ? c.N * scale : (c.N - 1) * scale + 1;
  b.grid = Grid::make(b.model, N);
  return b;
}

struct LevelResult {
  std::vector<double> times;  // shifted output times
  std::vector<std::pair<std::string, std::vector<double>>> series;
  std::vector<ViolationReport> monitors;
  std::vector<IdentityResidual> identities;
  Trajectory traj;
  double t_shift = 0.0;
  double dr = 0.0;
  double dt = 0.0;
  double dt_out = 0.0;
  double oracle_error = std::numeric_limits<double>::quiet_NaN();
  double self_adjointness = 0.0;
};

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

std::vector<double> nan_series(size_t n) { return std::vector<double>(n, kNan); }

LevelResult run_level(const ScenarioConfig& c, int level) {
  Built b = build_geometry(c, level);
  const int scale = 1 << level;
  const double dt = c.dt / scale;

  LevelResult lr;
  lr.dr = b.grid.dr;
  lr.dt = dt;

  const InitialData init =
      make_initial(c.initial, b.model, b.flow.phi, b.flow, b.grid);
  lr.t_shift = init.t_shift;

  // Output times are specified on the shifted (entropy) clock.
  const double out_end =
      c.output_end > 0.0 ? c.output_end : c.horizon + lr.t_shift;
  const int count = (c.output_count - 1) * scale + 1;
  std::vector<double> out_shifted(count);
  std::vector<double> out_pde(count);
  for (int k = 0; k < count; ++k) {
    out_shifted[k] =
        count == 1 ? out_end
                   : c.output_start + (out_end - c.output_start) * k / (count - 1);
    out_pde[k] = out_shifted[k] - lr.t_shift;
    if (out_pde[k] < -1e-12)
      throw config_error(c.label + ": output time before the shifted origin");
    out_pde[k] = std::max(out_pde[k], 0.0);
  }
  lr.times = out_shifted;
  lr.dt_out = count > 1 ? (out_end - c.output_start) / (count - 1) : dt;

  SolveParams solve{dt, c.horizon, c.scheme, out_pde};
  lr.traj = run(b.model, b.flow.phi, b.flow, b.grid, init.state, solve);

  // Randomized structure self-check: mu-symmetry of L on 100 pairs,
  // relative to the operator scale.
  {
    const auto op = assemble(b.model, b.flow.phi, b.flow, b.grid, 0.0);
    std::mt19937_64 rng(c.seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    double op_norm = 0.0;
    for (int i = 0; i < b.grid.size(); ++i)
      op_norm = std::max(op_norm,
                         2.0 * (op.kappa_left(i) + op.kappa_right(i)) /
                             op.weights.w[i]);
    for (int trial = 0; trial < 100; ++trial) {
      std::vector<double> u(b.grid.size()), v(b.grid.size());
      double nu = 0.0, nv = 0.0;
      for (int i = 0; i < b.grid.size(); ++i) {
        u[i] = dist(rng);
        v[i] = dist(rng);
        nu += u[i] * u[i] * op.weights.w[i];
        nv += v[i] * v[i] * op.weights.w[i];
      }
      const auto lu = op.apply(u);
      const auto lv = op.apply(v);
      double a = 0.0, bb = 0.0;
      for (int i = 0; i < b.grid.size(); ++i) {
        a += lu[i] * v[i] * op.weights.w[i];
        bb += u[i] * lv[i] * op.weights.w[i];
      }
      lr.self_adjointness =
          std::max(lr.self_adjointness,
                   std::abs(a - bb) / (std::sqrt(nu * nv) * op_norm));
    }
  }

  const bool needs_coev =
      c.functionals.w_k ||
      std::any_of(c.monitors.begin(), c.monitors.end(), [](const MonitorConfig& m) {
        return m.check == "lsi" || m.check == "rlsi";
      });
  CoevolvedFields coev;
  if (needs_coev)
    coev = coevolve(init.state.u, b.model, b.flow.phi, b.flow, b.grid, solve);

  EvalContext ctx{&b.model, &b.flow.phi, &b.flow, &b.grid};
  const size_t nt = lr.times.size();

  std::vector<double> H(nt), fish(nt);
  auto Hm = nan_series(nt), Wm = nan_series(nt), dWm_rhs = nan_series(nt);
  auto HK = nan_series(nt), WK = nan_series(nt), dWK_rhs = nan_series(nt);
  auto dHK = nan_series(nt);
  auto HmK = nan_series(nt), WmK = nan_series(nt), dWmK_rhs = nan_series(nt);
  auto Wt = nan_series(nt), dWt_rhs = nan_series(nt);

  const double m = c.functionals.m;
  for (size_t k = 0; k < nt; ++k) {
    const HeatState& s = lr.traj.states[k];
    const double t = lr.times[k];
    H[k] = boltzmann_entropy(s);
    fish[k] = fisher_information(s, ctx);
    if (c.functionals.w_m && t > 0.0) {
      const auto wm = w_m_eval(s, ctx, m, 0.0, t, 0.0);
      Hm[k] = wm.H;
      Wm[k] = c.functionals.wm_mode == DissipationMode::closed_form
                  ? w_m_closed_form(s, ctx, m, t)
                  : wm.W;
      dWm_rhs[k] = w_m_dissipation_rhs(s, ctx, m, 0.0, t);
    }
    if (c.functionals.w_mk && t > 0.0) {
      const auto wk = w_m_eval(s, ctx, m, c.functionals.K_mk, t,
                               c.functionals.gauge_offset);
      HmK[k] = wk.H;
      WmK[k] = wk.W;
      dWmK_rhs[k] = w_m_dissipation_rhs(s, ctx, m, c.functionals.K_mk, t);
    }
    if (c.functionals.w_tilde && t > 0.0) {
      const auto wt = w_tilde_eval(s, ctx, m, c.functionals.K_mk, t);
      Wt[k] = wt.W;
      dWt_rhs[k] = w_m_dissipation_rhs(s, ctx, m, c.functionals.K_mk, t,
                                       /*with_defect=*/false);
    }
    if (c.functionals.w_k && k < coev.times.size() && coev.times[k] > 0.0) {
      const auto wk = w_k_eval(coev.f[k], coev.f_log_f[k], ctx,
                               c.functionals.K_wk, coev.times[k],
                               c.functionals.dk_variant);
      HK[k] = wk.H;
      WK[k] = wk.W;
      dHK[k] = wk.dHdt;
      dWK_rhs[k] = w_k_dissipation_rhs(coev.f[k], ctx, c.functionals.K_wk,
                                       coev.times[k], c.functionals.dk_variant);
    }
  }

  if (c.functionals.w_m &&
      c.functionals.wm_mode == DissipationMode::finite_difference) {
    const auto dHm_fd = centered_derivative(lr.times, Hm);
    for (size_t k = 0; k < nt; ++k)
      if (!std::isnan(Hm[k])) Wm[k] = Hm[k] + lr.times[k] * dHm_fd[k];
  }
  const auto dWm_fd = centered_derivative(lr.times, Wm);
  const auto dWK_fd = centered_derivative(lr.times, WK);
  const auto dWmK_fd = centered_derivative(lr.times, WmK);
  const auto dWt_fd = centered_derivative(lr.times, Wt);

  lr.series = {{"H", H},           {"fisher", fish},   {"H_m", Hm},
               {"W_m", Wm},        {"dWm_fd", dWm_fd}, {"dWm_rhs", dWm_rhs},
               {"H_K", HK},        {"W_K", WK},        {"dWK_fd", dWK_fd},
               {"dWK_rhs", dWK_rhs}, {"H_mK", HmK},    {"W_mK", WmK},
               {"dWmK_fd", dWmK_fd}, {"dWmK_rhs", dWmK_rhs},
               {"W_tilde", Wt},    {"dWt_fd", dWt_fd}, {"dWt_rhs", dWt_rhs},
               {"dHK_fd", centered_derivative(lr.times, HK)},
               {"dHK_formula", dHK}};

  // Identity residuals: centered FD of each W series against its
  // dissipation RHS.  The audit window is the middle 80% of the output
  // span so the measured maximum sits at the same times across
  // refinement levels.
  const double t_span = lr.times.back() - lr.times.front();
  const double t_lo = lr.times.front() + 0.1 * t_span;
  const double t_hi = lr.times.back() - 0.1 * t_span;
  auto add_identity = [&](const std::string& name,
                          const std::vector<double>& fd,
                          const std::vector<double>& rhs) {
    IdentityResidual res;
    res.name = name;
    const double c2 = c.functionals.c2_override.count(name)
                          ? c.functionals.c2_override.at(name)
                          : c.c2;
    res.tolerance = c.c1 * lr.dr * lr.dr + c2 * lr.dt_out * lr.dt_out;
    for (size_t k = 1; k + 1 < nt; ++k) {
      if (lr.times[k] < t_lo || lr.times[k] > t_hi) continue;
      if (std::isnan(fd[k]) || std::isnan(rhs[k])) continue;
      res.max_residual = std::max(res.max_residual, std::abs(fd[k] - rhs[k]));
    }
    res.pass = res.max_residual <= res.tolerance;
    lr.identities.push_back(res);
  };
  if (c.functionals.w_m) add_identity("w_m", dWm_fd, dWm_rhs);
  if (c.functionals.w_k) add_identity("w_k", dWK_fd, dWK_rhs);
  if (c.functionals.w_mk) add_identity("w_mk", dWmK_fd, dWmK_rhs);
  if (c.functionals.w_tilde) add_identity("w_tilde", dWt_fd, dWt_rhs);

  // Monitors.
  const double tol_default = c.c1 * lr.dr * lr.dr + c.c2 * lr.dt * lr.dt;
  for (const auto& mc : c.monitors) {
    MonitorEnv env;
    env.model = &b.model;
    env.phi = &b.flow.phi;
    env.flow = &b.flow;
    env.grid = &b.grid;
    env.traj = &lr.traj;
    env.coev = needs_coev ? &coev : nullptr;
    env.t_shift = lr.t_shift;
    env.horizon = c.horizon;
    env.tol = mc.tol_override.value_or(tol_default);
    env.eps_cond = c.eps_cond;
    env.pole_band = c.pole_band;
    env.boundary_band = c.boundary_band;
    env.negative_control = mc.negative_control;
    env.label = mc.label;

    ViolationReport rep;
    if (mc.check == "li_yau") {
      LiYauParams p;
      p.alpha = mc.alpha;
      p.m = mc.m;
      p.K = mc.K;
      p.variant = mc.variant == "flow" ? LiYauVariant::flow_super_ricci
                  : mc.variant == "curvature" ? LiYauVariant::static_cdkm
                                              : LiYauVariant::static_cd0m;
      rep = li_yau_check(env, p);
    } else if (mc.check == "hamilton") {
      rep = hamilton_gradient_check(env, mc.K);
    } else if (mc.check == "lyh") {
      LyhParams p;
      p.m = mc.m;
      p.K = mc.K;
      p.variant = mc.variant == "flow" ? LyhVariant::flow_tensor
                                       : LyhVariant::static_cdkm;
      rep = lyh_check(env, p);
    } else if (mc.check == "second_order") {
      SecondOrderParams p;
      p.m = mc.m;
      p.K = mc.K;
      p.alpha = mc.alpha;
      p.variant = mc.variant == "flow" ? SecondOrderVariant::flow_super_ricci
                                       : SecondOrderVariant::static_cdkm;
      rep = second_order_check(env, p);
    } else if (mc.check == "lsi") {
      rep = lsi_check(env, mc.K);
    } else if (mc.check == "rlsi") {
      rep = rlsi_check(env, mc.K);
    } else if (mc.check == "cor1" || mc.check == "cor2") {
      IntegratedParams p;
      p.variant = mc.check == "cor1" ? IntegratedVariant::same_time
                                     : IntegratedVariant::two_time;
      p.delta = mc.delta;
      p.m = mc.m;
      p.K = mc.K;
      rep = integrated_harnack_check(env, p);
    }
    if (!mc.negative_control && !rep.premise.holds)
      throw config_error(c.label + ": monitor '" + mc.label +
                         "' premise fails but is not flagged negative_control");
    lr.monitors.push_back(std::move(rep));
  }

  // Convergence oracle for eigenmode scenarios: exact single-mode decay,
  // reparametrized through tau(t) on homothety flows.
  if (c.oracle_eigenmode) {
    if (c.initial.kind != InitialKind::eigen_perturbation)
      throw config_error(c.label + ": eigenmode oracle needs an eigenmode datum");
    const double rate = eigenmode_rate(b.model, c.initial.mode);
    double err = 0.0;
    for (size_t k = 0; k < nt; ++k) {
      const HeatState& s = lr.traj.states[k];
      const double tau = time_reparametrization(b.flow, s.t);
      for (int i = 0; i < b.grid.size(); ++i) {
        const double ref =
            1.0 + c.initial.amplitude * std::exp(-rate * tau) *
                      eigenmode_value(b.model, c.initial.mode, b.grid.r[i]);
        err = std::max(err, std::abs(s.u[i] - ref));
      }
    }
    lr.oracle_error = err;
  }
  return lr;
}

std::string write_series_csv(const LevelResult& lr) {
  std::ostringstream out;
  out << "t";
  for (const auto& [name, _] : lr.series) out << "," << name;
  for (const auto& m : lr.monitors) out << ",margin:" << m.label;
  out << "\n";
  for (size_t k = 0; k < lr.times.size(); ++k) {
    out << fmt17(lr.times[k]);
    for (const auto& [_, col] : lr.series)
      out << "," << fmt17(k < col.size() ? col[k] : kNan);
    for (const auto& m : lr.monitors)
      out << ","
          << fmt17(k < m.margin_series.size() ? m.margin_series[k] : kNan);
    out << "\n";
  }
  return out.str();
}

ordered_json monitor_json(const ViolationReport& m) {
  ordered_json j;
  j["label"] = m.label;
  j["inequality"] = m.inequality;
  j["negative_control"] = m.negative_control;
  ordered_json pj;
  pj["condition"] = m.premise.condition;
  pj["threshold_K"] = m.premise.threshold;
  pj["m"] = std::isinf(m.premise.m) ? ordered_json("inf")
                                    : ordered_json(m.premise.m);
  pj["worst_margin"] = m.premise.worst_margin;
  pj["worst_r"] = m.premise.worst_r;
  pj["worst_t"] = m.premise.worst_t;
  pj["holds"] = m.premise.holds;
  j["premise"] = pj;
  j["worst_margin"] = m.worst_margin;
  j["worst_location"] = {{"t", m.worst_t}, {"r", m.worst_r}};
  j["tolerance"] = m.tolerance;
  j["verdict"] = m.verdict;
  if (m.refinement_persistent.has_value())
    j["refinement_persistent"] = *m.refinement_persistent;
  else
    j["refinement_persistent"] = nullptr;
  if (m.negative_control)
    j["expected_violation_found"] = m.verdict == "violated";
  ordered_json ex;
  for (const auto& [k, v] : m.extras) ex[k] = v;
  j["extras"] = ex;
  return j;
}

ordered_json report_json_tree(const ScenarioConfig& c, const LevelResult& lr,
                              int exit_code, int levels,
                              const std::vector<double>& oracle_errors,
                              const std::vector<double>& oracle_orders) {
  ordered_json j;
  j["scenario"] = c.label;
  j["exit_code"] = exit_code;
  j["resolution"] = {{"N", lr.traj.states.empty()
                               ? 0
                               : (int)lr.traj.states.front().u.size()},
                     {"dr", lr.dr},
                     {"dt", lr.dt},
                     {"output_spacing", lr.dt_out},
                     {"horizon", c.horizon},
                     {"t_shift", lr.t_shift}};
  j["tolerances"] = {{"c1", c.c1}, {"c2", c.c2}, {"eps_cond", c.eps_cond}};
  j["diagnostics"] = {{"mass_drift_max", lr.traj.max_mass_drift},
                      {"self_adjointness_residual", lr.self_adjointness},
                      {"sup_u", lr.traj.sup_u},
                      {"inf_u", lr.traj.inf_u},
                      {"cn_fallbacks", lr.traj.cn_fallbacks},
                      {"cn_positivity_dt", lr.traj.cn_positivity_dt},
                      {"boundary_flux_max", lr.traj.max_boundary_flux}};
  ordered_json ids = ordered_json::array();
  for (const auto& id : lr.identities)
    ids.push_back({{"name", id.name},
                   {"max_residual", id.max_residual},
                   {"tolerance", id.tolerance},
                   {"pass", id.pass}});
  j["identities"] = ids;
  ordered_json mons = ordered_json::array();
  for (const auto& m : lr.monitors) mons.push_back(monitor_json(m));
  j["monitors"] = mons;
  ordered_json ref;
  ref["levels"] = levels;
  ref["oracle_errors"] = oracle_errors;
  ref["oracle_orders"] = oracle_orders;
  j["refinement"] = ref;
  return j;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
}

}  // namespace

ScenarioArtifacts run_scenario(const ScenarioConfig& config,
                               const std::string& out_dir, int refine_levels) {
  config.validate();
  const int levels = refine_levels >= 0 ? refine_levels : config.refine_levels;

  std::vector<LevelResult> results;
  for (int level = 0; level <= levels; ++level)
    results.push_back(run_level(config, level));
  LevelResult& base = results.front();

  // A level-0 violation that one refinement shrinks by 2x or more is a
  // discretization artifact, not a persistent violation.
  if (levels >= 1) {
    for (size_t i = 0; i < base.monitors.size(); ++i) {
      auto& m0 = base.monitors[i];
      if (!m0.violated()) continue;
      const auto& m1 = results[1].monitors[i];
      const bool still_bad = m1.worst_margin < -m1.tolerance;
      const bool persistent =
          still_bad && m1.worst_margin <= 0.5 * m0.worst_margin;
      m0.refinement_persistent = persistent;
      if (!persistent) m0.verdict = "holds-within-tolerance";
    }
  }

  int exit_code = 0;
  for (const auto& m : base.monitors)
    if (!m.negative_control && m.violated()) exit_code = 2;

  std::vector<double> oracle_errors, oracle_orders;
  if (config.oracle_eigenmode) {
    for (const auto& r : results) oracle_errors.push_back(r.oracle_error);
    for (size_t l = 0; l + 1 < results.size(); ++l)
      oracle_orders.push_back(
          std::log2(oracle_errors[l] / oracle_errors[l + 1]));
  }

  ScenarioArtifacts art;
  art.exit_code = exit_code;
  art.times = base.times;
  art.series = base.series;
  art.monitors = base.monitors;
  art.identities = base.identities;
  for (const auto& r : results) art.identities_by_level.push_back(r.identities);
  art.trajectory = std::move(base.traj);
  art.t_shift = base.t_shift;
  art.dr = base.dr;
  art.oracle_errors = oracle_errors;
  art.oracle_orders = oracle_orders;
  art.series_csv = write_series_csv(base);
  art.report_json = report_json_tree(config, base, exit_code, levels,
                                     oracle_errors, oracle_orders)
                        .dump(2);
  art.report_json.push_back('\n');

  if (!out_dir.empty()) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    write_file(out_dir + "/series.csv", art.series_csv);
    write_file(out_dir + "/report.json", art.report_json);
    for (int level = 1; level <= levels; ++level) {
      const std::string dir =
          out_dir + "/refine/level" + std::to_string(level);
      fs::create_directories(dir);
      write_file(dir + "/series.csv", write_series_csv(results[level]));
      write_file(dir + "/report.json",
                 report_json_tree(config, results[level], exit_code, levels,
                                  oracle_errors, oracle_orders)
                         .dump(2) +
                     "\n");
    }
  }
  return art;
}

namespace {

struct CatalogEntry {
  const char* name;
  const char* what;
};

const std::vector<std::pair<const char*, std::vector<CatalogEntry>>>&
catalog_tree() {
  static const std::vector<std::pair<const char*, std::vector<CatalogEntry>>>
      tree = {
          {"models",
           {{"euclidean", "flat ball, pole at 0, reflecting outer edge"},
            {"sphere", "round sphere in polar coordinates, two regular poles"},
            {"hyperbolic",
             "constant curvature -1, truncated with a reflecting outer edge"},
            {"circle", "flat 1d torus, periodic"},
            {"interval", "flat segment with reflecting ends"}}},
          {"flows",
           {{"static", "frozen metric and potential"},
            {"exponential", "homothety c(t) = e^{2 lambda t}, constant h"},
            {"shrinking_sphere",
             "Ricci flow on the round sphere, c(t) = 1 - 2(n-1)t"},
            {"custom", "caller-supplied homothety factor"}}},
          {"potentials",
           {{"zero", "unweighted volume measure"},
            {"quadratic", "phi = a r^2/2, Gaussian-type weight"},
            {"cosine", "phi = a cos r, smooth periodic weight"}}},
          {"initial",
           {{"uniform", "constant mass-1 density"},
            {"eigen_perturbation", "1 + amplitude * (radial eigenmode)"},
            {"normalized_gaussian_bump", "mass-1 bump of given width"},
            {"kernel_burnin",
             "small-time kernel (closed form where known, else bump + burn-in);"
             " entropy clocks shift by t0"}}},
          {"functionals",
           {{"H", "Boltzmann entropy -int u log u dmu"},
            {"fisher", "int |grad log u|^2 u dmu"},
            {"w_m", "W-entropy d/dt(t H_m) with the Gaussian-normalized H_m"},
            {"w_k",
             "semigroup entropy D_K int (P_t(f log f) - P_t f log P_t f) dmu "
             "and its sinh-weighted W form"},
            {"w_mk", "K-deformed W-entropy with gauge Phi' = (m/2t) e^{4Kt}"},
            {"w_tilde", "polynomial-gauge variant of the K-deformed W-entropy"}}},
          {"monitors",
           {{"li_yau", "|grad u|^2/u^2 - alpha du/dt/u against m alpha^2/2t "
                       "(curvature and flow variants)"},
            {"hamilton", "gradient bound |grad u|^2/u^2 <= fac(K,t) log(A/u)"},
            {"lyh", "du/dt/u - e^{-2Kt}|grad u|^2/u^2 + e^{2Kt} m/2t >= 0 "
                    "(flow-tensor variant available)"},
            {"second_order", "Lu/u + |grad u|^2/u^2 against fac(K,t)[m + 4 "
                             "log(A/u)] (+ flow constant)"},
            {"lsi", "log-Sobolev deficit bound for the heat semigroup"},
            {"rlsi", "reversed log-Sobolev gradient bound"},
            {"cor1", "same-time pointwise Harnack with sup weight"},
            {"cor2", "two-time Harnack with (T/tau)^{m/2} factor"}}},
          {"conditions",
           {{"cd_m", "Ric_{m,n}(L) >= K g"},
            {"super_perelman", "h + Ric(L) >= K g"},
            {"super_ricci_m", "h + Ric_{m,n}(L) >= K g"},
            {"backward_super_ricci", "(1-alpha) h + Ric_{m,n}(L) >= K g"},
            {"lyh_flow_tensor",
             "e^{-4Kt}(h + Ric_{m,n} + Kg) - e^{-2Kt} h >= alpha_K(t) g"},
            {"hhh_flow", "2h + Ric_{m,n}(L) >= K g"}}},
      };
  return tree;
}

}  // namespace

std::string list_catalog(bool as_json) {
  if (as_json) {
    ordered_json j;
    for (const auto& [group, entries] : catalog_tree()) {
      ordered_json g;
      for (const auto& e : entries) g[e.name] = e.what;
      j[group] = g;
    }
    return j.dump(2) + "\n";
  }
  std::ostringstream out;
  for (const auto& [group, entries] : catalog_tree()) {
    out << group << ":\n";
    for (const auto& e : entries)
      out << "  " << e.name << " - " << e.what << "\n";
  }
  return out.str();
}

CalibrationResult calibrate(const ScenarioConfig& config) {
  ScenarioConfig c = config;
  c.refine_levels = 0;
  const LevelResult r0 = run_level(c, 0);
  const LevelResult r1 = run_level(c, 1);
  CalibrationResult out;
  const double safety = 3.0;
  std::ostringstream text;
  text << "calibration for '" << config.label << "'\n";
  double worst_ratio = 0.0;
  for (size_t i = 0; i < r0.identities.size(); ++i) {
    const auto& a = r0.identities[i];
    const auto& b = r1.identities[i];
    // Residual should drop ~4x per level; take the safer of the two scales.
    const double budget = std::max(a.max_residual, 4.0 * b.max_residual);
    const double c2 = safety * budget / (r0.dt_out * r0.dt_out);
    out.c2_per_identity[a.name] = c2;
    worst_ratio = std::max(worst_ratio, budget / (r0.dr * r0.dr +
                                                  r0.dt_out * r0.dt_out));
    text << "  identity " << a.name << ": residual " << fmt17(a.max_residual)
         << " -> " << fmt17(b.max_residual) << ", suggest c2." << a.name
         << " = " << fmt17(c2) << "\n";
  }
  out.c1 = safety * worst_ratio;
  out.c2 = safety * worst_ratio;
  text << "  suggest c1 = c2 = " << fmt17(out.c1) << "\n";
  out.summary = text.str();
  return out;
}

}  // namespace wlab
