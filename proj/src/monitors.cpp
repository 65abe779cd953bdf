#include "wlab/monitors.hpp"

#include <algorithm>
#include <cmath>

#include "num.hpp"

namespace wlab {

CoevolvedFields coevolve(std::span<const double> f0, const RadialModel& model,
                         const PotentialSpec& phi, const FlowSpec& flow,
                         const Grid& grid, const SolveParams& solve,
                         const CoevolveParams& params) {
  const int N = grid.size();
  if (static_cast<int>(f0.size()) != N)
    throw std::invalid_argument("initial datum size mismatch");
  const double fmin = *std::min_element(f0.begin(), f0.end());
  if (!(fmin > 0.0))
    throw std::invalid_argument("co-evolution needs a positive initial f");

  CoevolvedFields out;
  out.has_grad_field = params.with_grad_field;
  const auto w0 = build_weights(model, phi, flow, grid, 0.0);

  std::vector<HeatState> fields;
  auto push_field = [&](std::vector<double> u) {
    HeatState s;
    s.u = std::move(u);
    s.t = 0.0;
    s.weights = w0;
    s.mass = quadrature(s.u, s.weights);
    fields.push_back(std::move(s));
  };
  push_field(std::vector<double>(f0.begin(), f0.end()));
  {
    std::vector<double> flogf(N);
    for (int i = 0; i < N; ++i) flogf[i] = f0[i] * std::log(f0[i]);
    push_field(std::move(flogf));
  }
  if (params.with_grad_field) {
    auto gs = grad_sq(f0, grid, flow.c(0.0));
    for (int i = 0; i < N; ++i) gs[i] /= f0[i];
    const double top = *std::max_element(gs.begin(), gs.end());
    if (top > params.dynamic_range_max)
      throw std::invalid_argument(
          "|grad f|^2/f exceeds the configured dynamic range");
    push_field(std::move(gs));
  }

  std::vector<double> outputs = solve.output_times;
  std::sort(outputs.begin(), outputs.end());
  auto emit = [&]() {
    out.times.push_back(fields[0].t);
    out.f.push_back(fields[0]);
    out.f_log_f.push_back(fields[1]);
    if (params.with_grad_field) out.grad_sq_over_f.push_back(fields[2]);
  };
  size_t next = 0;
  while (next < outputs.size() && outputs[next] <= 1e-14) {
    emit();
    ++next;
  }
  double t_prev = 0.0;
  for (; next < outputs.size(); ++next) {
    const double span = outputs[next] - t_prev;
    const int n_sub = std::max(1, (int)std::ceil(span / solve.dt - 1e-9));
    const double h = span / n_sub;
    for (int k = 0; k < n_sub; ++k)
      step_lockstep(fields, model, phi, flow, grid, h, solve.scheme);
    emit();
    t_prev = outputs[next];
  }
  return out;
}

namespace {

struct Pointwise {
  std::vector<double> gs;     // |grad log u|^2 in g(t) units
  std::vector<double> llog;   // L log u
  std::vector<double> logu;
  double c = 1.0;
};

Pointwise pointwise(const MonitorEnv& env, const HeatState& state) {
  Pointwise p;
  p.c = env.flow->c(state.t);
  p.logu.resize(state.u.size());
  for (size_t i = 0; i < state.u.size(); ++i) p.logu[i] = std::log(state.u[i]);
  p.gs = grad_sq(p.logu, *env.grid, p.c);
  const auto op = assemble(*env.model, *env.phi, *env.flow, *env.grid, state.t);
  p.llog = op.apply(p.logu);
  return p;
}

std::vector<bool> node_mask(const MonitorEnv& env) {
  const Grid& g = *env.grid;
  const RadialModel& m = *env.model;
  const double pole_band = env.pole_band >= 0.0 ? env.pole_band : 3.0 * g.dr;
  std::vector<bool> mask(g.size(), true);
  int alive = 0;
  for (int i = 0; i < g.size(); ++i) {
    const double r = g.r[i];
    if (m.left == EndpointKind::pole_regular && r - m.r_min < pole_band)
      mask[i] = false;
    if (m.right == EndpointKind::pole_regular && m.r_max - r < pole_band)
      mask[i] = false;
    if (env.boundary_band > 0.0) {
      if (m.left == EndpointKind::reflecting && r - m.r_min < env.boundary_band)
        mask[i] = false;
      if (m.right == EndpointKind::reflecting &&
          m.r_max - r < env.boundary_band)
        mask[i] = false;
    }
    alive += mask[i] ? 1 : 0;
  }
  if (alive == 0) throw std::invalid_argument("exclusion bands mask every node");
  return mask;
}

struct WorstTracker {
  double margin = std::numeric_limits<double>::infinity();
  double t = 0.0;
  double r = 0.0;
  double state_worst = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> series;

  void begin_state() { state_worst = std::numeric_limits<double>::quiet_NaN(); }
  void end_state() { series.push_back(state_worst); }
  void skip_state() { series.push_back(std::numeric_limits<double>::quiet_NaN()); }
  void update(double m, double at_t, double at_r) {
    if (!(m >= state_worst)) state_worst = m;  // also catches the first nan
    if (m < margin) {
      margin = m;
      t = at_t;
      r = at_r;
    }
  }
};

PremiseInfo verify_premise(const MonitorEnv& env, FlowCondition cond, double m,
                           double threshold_K, bool time_dependent,
                           const ConditionParams& cp = {}) {
  PremiseInfo info;
  info.condition = to_string(cond);
  info.threshold = threshold_K;
  info.m = m;
  info.checked = true;
  std::vector<double> times{0.0};
  if (time_dependent) {
    const int nt = 33;
    for (int k = 1; k <= nt; ++k) times.push_back(env.horizon * k / nt);
  }
  double worst = std::numeric_limits<double>::infinity();
  ConditionParams params = cp;
  params.eps = env.eps_cond;
  for (const double t : times) {
    const auto res = flow_condition_check(*env.model, *env.phi, *env.flow, m,
                                          threshold_K, t, cond, env.grid->r,
                                          params);
    if (res.worst_margin < worst) {
      worst = res.worst_margin;
      info.worst_r = res.worst_r;
      info.worst_t = t;
    }
  }
  info.worst_margin = worst;
  info.holds = worst >= -env.eps_cond;
  return info;
}

void finalize(ViolationReport& rep, const MonitorEnv& env,
              const WorstTracker& w) {
  rep.label = env.label;
  rep.negative_control = env.negative_control;
  rep.tolerance = env.tol;
  rep.worst_margin = w.margin;
  rep.worst_t = w.t;
  rep.worst_r = w.r;
  rep.margin_series = w.series;
  if (w.margin >= 0.0)
    rep.verdict = "holds";
  else if (w.margin >= -env.tol)
    rep.verdict = "holds-within-tolerance";
  else
    rep.verdict = "violated";
}

double shifted(const MonitorEnv& env, const HeatState& s) {
  return s.t + env.t_shift;
}

// Space-time maxima of the flow data entering the Harnack bounds:
//   A^2 = max [ |h|^2 + (Tr h)^2/(m-n) ],  B = max |S|.
struct FlowMaxima {
  double A2 = 0.0;
  double B = 0.0;
  double max_trh_h = 0.0;  // max [(Tr h)^2/(m-n) + |h|^2], the HHH constant
};

FlowMaxima flow_maxima(const MonitorEnv& env, double m,
                       STensorVariant variant = STensorVariant::lemma) {
  FlowMaxima fm;
  if (env.flow->is_static && env.phi->time_constant) return fm;
  const int n = env.model->n;
  const int nt = 129;
  for (int k = 0; k <= nt; ++k) {
    const double t = env.horizon * k / nt;
    const double he = env.flow->h_eigen(t);
    const double h2 = n * he * he;
    const double trh = env.flow->tr_h(t, n);
    double a2 = h2;
    if (m > n) a2 += trh * trh / (m - n);
    fm.A2 = std::max(fm.A2, a2);
    fm.max_trh_h = std::max(fm.max_trh_h, a2);
    if (m > n) {
      for (int i = 0; i < env.grid->size(); i += 4) {
        const double s = std::abs(s_tensor(*env.model, *env.phi, *env.flow, m,
                                           env.grid->r[i], t, variant));
        fm.B = std::max(fm.B, s);
      }
    }
  }
  return fm;
}

}  // namespace

ViolationReport li_yau_check(const MonitorEnv& env, const LiYauParams& p) {
  ViolationReport rep;
  const double n = env.model->n;
  if (p.m < n) throw std::invalid_argument("li_yau requires m >= n");
  if (p.alpha < 1.0) throw std::invalid_argument("li_yau requires alpha >= 1");

  FlowMaxima fm;
  double gamma = 0.0;
  double bound_root = 1.0;  // the sqrt factor of the flow bound
  switch (p.variant) {
    case LiYauVariant::static_cd0m:
      rep.inequality = "li_yau";
      rep.premise = verify_premise(env, FlowCondition::cd_m, p.m, 0.0, false);
      break;
    case LiYauVariant::static_cdkm:
      if (p.alpha <= 1.0)
        throw std::invalid_argument("curvature variant requires alpha > 1");
      if (p.K < 0.0) throw std::invalid_argument("requires K >= 0");
      rep.inequality = "li_yau_curvature";
      rep.premise = verify_premise(env, FlowCondition::cd_m, p.m, -p.K, false);
      break;
    case LiYauVariant::flow_super_ricci: {
      rep.inequality = "li_yau_flow";
      ConditionParams cp;
      cp.alpha = p.alpha;
      rep.premise = verify_premise(env, FlowCondition::backward_super_ricci,
                                   p.m, -p.K, true, cp);
      fm = flow_maxima(env, p.m);
      const double T = env.horizon + env.t_shift;
      if (fm.B > 1e-14) {
        if (p.alpha <= 1.0)
          throw std::invalid_argument("flow bound requires alpha > 1");
        auto q = [&](double lg) {
          const double g = std::exp(lg);
          return (2.0 * p.K + g) * (2.0 * p.K + g) /
                     ((p.alpha - 1.0) * (p.alpha - 1.0)) +
                 2.0 * fm.B * fm.B / g;
        };
        gamma = std::exp(num::golden_min(q, std::log(1e-8), std::log(1e8)));
        bound_root =
            std::sqrt(1.0 + T * T / p.m * (4.0 * fm.A2 + q(std::log(gamma))));
      } else if (p.alpha > 1.0) {
        bound_root = std::sqrt(
            1.0 + T * T / p.m *
                      (4.0 * fm.A2 + 4.0 * p.K * p.K /
                                         ((p.alpha - 1.0) * (p.alpha - 1.0))));
      } else {
        // alpha = 1 only survives the A = B = 0, K = 0 reduction
        if (fm.A2 > 1e-14 || p.K != 0.0)
          throw std::invalid_argument("alpha = 1 flow bound needs A = K = 0");
        bound_root = 1.0;
      }
      break;
    }
  }
  if (p.variant != LiYauVariant::flow_super_ricci && !env.flow->is_static)
    throw std::invalid_argument("static li_yau variant on a moving flow");

  const auto mask = node_mask(env);
  WorstTracker w;
  for (const auto& state : env.traj->states) {
    const double t = shifted(env, state);
    if (!(t > 0.0)) {
      w.skip_state();
      continue;
    }
    w.begin_state();
    const auto pw = pointwise(env, state);
    double bound = 0.0;
    switch (p.variant) {
      case LiYauVariant::static_cd0m:
        bound = p.m * p.alpha * p.alpha / (2.0 * t);
        break;
      case LiYauVariant::static_cdkm:
        bound = p.m * p.alpha * p.alpha / (2.0 * t) +
                p.m * p.alpha * p.alpha * p.K /
                    (std::sqrt(2.0) * (p.alpha - 1.0));
        break;
      case LiYauVariant::flow_super_ricci:
        bound = p.m * p.alpha * p.alpha / (4.0 * t) * (1.0 + bound_root);
        break;
    }
    for (int i = 0; i < env.grid->size(); ++i) {
      if (!mask[i]) continue;
      const double q = (1.0 - p.alpha) * pw.gs[i] - p.alpha * pw.llog[i];
      w.update(bound - q, t, env.grid->r[i]);
    }
    w.end_state();
  }
  finalize(rep, env, w);
  rep.extras["alpha"] = p.alpha;
  rep.extras["m"] = p.m;
  rep.extras["K"] = p.K;
  if (p.variant == LiYauVariant::flow_super_ricci) {
    rep.extras["flow_A2"] = fm.A2;
    rep.extras["flow_B"] = fm.B;
    if (gamma > 0.0) rep.extras["gamma"] = gamma;
  }
  return rep;
}

ViolationReport hamilton_gradient_check(const MonitorEnv& env, double K) {
  if (K < 0.0) throw std::invalid_argument("hamilton bound requires K >= 0");
  ViolationReport rep;
  rep.inequality = "hamilton_gradient";
  rep.premise = verify_premise(env, FlowCondition::super_perelman,
                               kDimInf, -K, !env.flow->is_static);
  const double A = env.traj->sup_u;
  const auto mask = node_mask(env);
  WorstTracker w;
  double worst_ham = std::numeric_limits<double>::infinity();
  for (const auto& state : env.traj->states) {
    const double t = shifted(env, state);
    if (!(t > 0.0)) {
      w.skip_state();
      continue;
    }
    w.begin_state();
    const auto pw = pointwise(env, state);
    const double fac = K == 0.0 ? 1.0 / t : 2.0 * K / (-std::expm1(-2.0 * K * t));
    const double fac_ham = 1.0 / t + 2.0 * K;
    for (int i = 0; i < env.grid->size(); ++i) {
      if (!mask[i]) continue;
      const double log_ratio = std::log(A / state.u[i]);
      w.update(fac * log_ratio - pw.gs[i], t, env.grid->r[i]);
      worst_ham = std::min(worst_ham, fac_ham * log_ratio - pw.gs[i]);
    }
    w.end_state();
  }
  finalize(rep, env, w);
  rep.extras["sup_A"] = A;
  rep.extras["K"] = K;
  rep.extras["worst_margin_linear_form"] = worst_ham;
  return rep;
}

ViolationReport lyh_check(const MonitorEnv& env, const LyhParams& p) {
  if (p.K < 0.0) throw std::invalid_argument("lyh requires K >= 0");
  if (p.m < env.model->n) throw std::invalid_argument("lyh requires m >= n");
  ViolationReport rep;
  const auto mask = node_mask(env);
  WorstTracker w;

  if (p.variant == LyhVariant::static_cdkm) {
    if (!env.flow->is_static)
      throw std::invalid_argument("static lyh variant on a moving flow");
    rep.inequality = "lyh";
    rep.premise = verify_premise(env, FlowCondition::cd_m, p.m, -p.K, false);
    for (const auto& state : env.traj->states) {
      const double t = shifted(env, state);
      if (!(t > 0.0)) {
        w.skip_state();
        continue;
      }
      w.begin_state();
      const auto pw = pointwise(env, state);
      const double e2 = std::exp(-2.0 * p.K * t);
      const double lift = std::exp(2.0 * p.K * t) * p.m / (2.0 * t);
      for (int i = 0; i < env.grid->size(); ++i) {
        if (!mask[i]) continue;
        const double dtu = pw.llog[i] + pw.gs[i];
        w.update(dtu - e2 * pw.gs[i] + lift, t, env.grid->r[i]);
      }
      w.end_state();
    }
    finalize(rep, env, w);
    rep.extras["m"] = p.m;
    rep.extras["K"] = p.K;
    return rep;
  }

  // Flow variant against the tensor condition
  //   e^{-4Kt}(h + Ric_{m,n} + Kg) - e^{-2Kt} h >= alpha_K(t) g.
  rep.inequality = "lyh_flow";
  const double T = env.horizon + env.t_shift;
  // Sharpest admissible alpha_K(t): the tensor's own worst eigenvalue.
  auto alpha_k_exact = [&](double t) {
    if (!p.alpha_k_auto) return 0.0;
    const auto res = flow_condition_check(
        *env.model, *env.phi, *env.flow, p.m, p.K,
        std::min(t, env.horizon), FlowCondition::lyh_flow_tensor, env.grid->r,
        ConditionParams{});
    return res.worst_margin;
  };
  const int nt = 129;
  std::vector<double> ts(nt), ak(nt);
  for (int k = 0; k < nt; ++k) {
    ts[k] = T * (k + 1) / nt;
    ak[k] = alpha_k_exact(ts[k]);
  }
  {
    ConditionParams cp;
    cp.alpha_k = alpha_k_exact;  // premise holds by construction in auto mode
    rep.premise = verify_premise(env, FlowCondition::lyh_flow_tensor, p.m, p.K,
                                 true, cp);
  }
  const auto fm = flow_maxima(env, p.m);
  const double max_ak =
      *std::max_element(ak.begin(), ak.end(), [](double a, double b) {
        return std::abs(a) < std::abs(b);
      });
  double root_term = 0.0;
  double gamma = 0.0;
  if (fm.B <= 1e-14 && std::abs(max_ak) <= 1e-14) {
    root_term = T * fm.A2 > 0.0 ? T * std::sqrt(fm.A2 / p.m) : 0.0;
  } else {
    if (!(p.K > 0.0))
      throw std::invalid_argument("lyh flow bound needs K > 0 here");
    auto m1 = [&](double g) {
      double top = 0.0;
      for (int k = 0; k < nt; ++k) {
        const double t = ts[k];
        const double den = -std::expm1(-2.0 * p.K * t);
        const double v = (2.0 * ak[k] - g) * (2.0 * ak[k] - g) * t * t /
                         (4.0 * std::exp(-4.0 * p.K * t) * den * den);
        top = std::max(top, v);
      }
      return top;
    };
    auto m2_base = [&]() {
      double top = 0.0;
      for (int k = 0; k < nt; ++k)
        top = std::max(top, ts[k] * ts[k] * std::exp(-4.0 * p.K * ts[k]));
      return top;
    }();
    if (fm.B <= 1e-14) {
      root_term = std::sqrt(fm.A2 * T * T / p.m + m1(0.0));
    } else {
      auto total = [&](double lg) {
        const double g = std::exp(lg);
        return std::sqrt(fm.A2 * T * T / p.m + m1(g) +
                         m2_base * fm.B * fm.B / (2.0 * p.m * g));
      };
      const double lg =
          num::golden_min(total, std::log(1e-8), std::log(1e8));
      gamma = std::exp(lg);
      root_term = total(lg);
    }
  }
  for (const auto& state : env.traj->states) {
    const double t = shifted(env, state);
    if (!(t > 0.0)) {
      w.skip_state();
      continue;
    }
    w.begin_state();
    const auto pw = pointwise(env, state);
    const double e2 = std::exp(2.0 * p.K * t);
    const double bound =
        p.m * std::exp(4.0 * p.K * t) / (2.0 * t) * (1.0 + root_term);
    for (int i = 0; i < env.grid->size(); ++i) {
      if (!mask[i]) continue;
      const double q = pw.gs[i] - e2 * (pw.llog[i] + pw.gs[i]);
      w.update(bound - q, t, env.grid->r[i]);
    }
    w.end_state();
  }
  finalize(rep, env, w);
  rep.extras["m"] = p.m;
  rep.extras["K"] = p.K;
  rep.extras["flow_A2"] = fm.A2;
  rep.extras["flow_B"] = fm.B;
  if (gamma > 0.0) rep.extras["gamma"] = gamma;
  return rep;
}

ViolationReport second_order_check(const MonitorEnv& env,
                                   const SecondOrderParams& p) {
  if (p.K < 0.0) throw std::invalid_argument("second order requires K >= 0");
  if (p.m < env.model->n)
    throw std::invalid_argument("second order requires m >= n");
  ViolationReport rep;
  const double A = env.traj->sup_u;
  const auto mask = node_mask(env);
  WorstTracker w;

  double C = 0.0;
  double alpha = 0.0;
  if (p.variant == SecondOrderVariant::static_cdkm) {
    if (!env.flow->is_static)
      throw std::invalid_argument("static variant on a moving flow");
    rep.inequality = "second_order";
    rep.premise = verify_premise(env, FlowCondition::cd_m, p.m, -p.K, false);
  } else {
    rep.inequality = "second_order_flow";
    if (!(p.m > env.model->n))
      throw std::invalid_argument("flow variant requires m > n");
    if (!(p.K > 0.0))
      throw std::invalid_argument("flow variant requires K > 0");
    rep.premise =
        verify_premise(env, FlowCondition::hhh_flow, p.m, -p.K, true);
    const auto fm = flow_maxima(env, p.m);
    if (fm.B > 1e-14) {
      alpha = p.alpha;
      if (!(alpha > 0.0 && alpha < 1.0))
        throw std::invalid_argument("alpha must lie in (0,1)");
      C = (1.0 - alpha) * (1.0 - alpha) * fm.B * fm.B /
              (8.0 * alpha * p.K * p.K) +
          (1.0 - alpha) / (2.0 * p.K) * fm.max_trh_h;
    } else {
      alpha = 0.0;
      C = fm.max_trh_h / (2.0 * p.K);
    }
    rep.extras["C"] = C;
    rep.extras["flow_B"] = fm.B;
    rep.extras["alpha"] = alpha;
  }

  for (const auto& state : env.traj->states) {
    const double t = shifted(env, state);
    if (!(t > 0.0)) {
      w.skip_state();
      continue;
    }
    w.begin_state();
    const auto pw = pointwise(env, state);
    const double fac =
        p.K == 0.0 ? 1.0 / t : p.K / (-std::expm1(-p.K * t));
    for (int i = 0; i < env.grid->size(); ++i) {
      if (!mask[i]) continue;
      const double lhs = pw.llog[i] + 2.0 * pw.gs[i];
      double rhs;
      if (p.variant == SecondOrderVariant::static_cdkm) {
        rhs = fac * (p.m + 4.0 * std::log(A / state.u[i]));
      } else {
        rhs = fac / (1.0 - alpha) *
              (p.m + 4.0 * std::log(A / state.u[i]) + C * t);
      }
      w.update(rhs - lhs, t, env.grid->r[i]);
    }
    w.end_state();
  }
  finalize(rep, env, w);
  rep.extras["sup_A"] = A;
  rep.extras["m"] = p.m;
  rep.extras["K"] = p.K;
  return rep;
}

namespace {

const CoevolvedFields& need_coev(const MonitorEnv& env) {
  if (!env.coev || env.coev->f.empty())
    throw std::invalid_argument("check needs co-evolved fields");
  return *env.coev;
}

}  // namespace

ViolationReport lsi_check(const MonitorEnv& env, double K) {
  const auto& coev = need_coev(env);
  if (!coev.has_grad_field)
    throw std::invalid_argument("lsi needs the |grad f|^2/f field");
  ViolationReport rep;
  rep.inequality = "lsi";
  rep.premise = verify_premise(env, FlowCondition::super_perelman, kDimInf, -K,
                               !env.flow->is_static);
  const auto mask = node_mask(env);
  WorstTracker w;
  for (size_t k = 0; k < coev.times.size(); ++k) {
    const double t = coev.times[k];
    if (!(t > 0.0)) {
      w.skip_state();
      continue;
    }
    w.begin_state();
    const double fac = K == 0.0 ? t : std::expm1(2.0 * K * t) / (2.0 * K);
    const auto& u1 = coev.f[k];
    const auto& u2 = coev.f_log_f[k];
    const auto& u3 = coev.grad_sq_over_f[k];
    for (int i = 0; i < env.grid->size(); ++i) {
      if (!mask[i]) continue;
      const double deficit = u2.u[i] - u1.u[i] * std::log(u1.u[i]);
      w.update(fac * u3.u[i] - deficit, t, env.grid->r[i]);
    }
    w.end_state();
  }
  finalize(rep, env, w);
  rep.extras["K"] = K;
  return rep;
}

ViolationReport rlsi_check(const MonitorEnv& env, double K) {
  const auto& coev = need_coev(env);
  ViolationReport rep;
  rep.inequality = "rlsi";
  rep.premise = verify_premise(env, FlowCondition::super_perelman, kDimInf, -K,
                               !env.flow->is_static);
  const auto mask = node_mask(env);
  WorstTracker w;
  for (size_t k = 0; k < coev.times.size(); ++k) {
    const double t = coev.times[k];
    if (!(t > 0.0)) {
      w.skip_state();
      continue;
    }
    w.begin_state();
    const double fac =
        K == 0.0 ? 1.0 / t : 2.0 * K / (-std::expm1(-2.0 * K * t));
    const auto& u1 = coev.f[k];
    const auto& u2 = coev.f_log_f[k];
    std::vector<double> logu(u1.u.size());
    for (size_t i = 0; i < u1.u.size(); ++i) logu[i] = std::log(u1.u[i]);
    const auto gs = grad_sq(logu, *env.grid, env.flow->c(u1.t));
    for (int i = 0; i < env.grid->size(); ++i) {
      if (!mask[i]) continue;
      const double deficit = u2.u[i] - u1.u[i] * logu[i];
      w.update(fac * deficit - gs[i] * u1.u[i], t, env.grid->r[i]);
    }
    w.end_state();
  }
  finalize(rep, env, w);
  rep.extras["K"] = K;
  return rep;
}

ViolationReport integrated_harnack_check(const MonitorEnv& env,
                                         const IntegratedParams& p) {
  if (p.K < 0.0) throw std::invalid_argument("requires K >= 0");
  ViolationReport rep;
  const auto mask = node_mask(env);
  std::vector<int> nodes;
  for (int i = 0; i < env.grid->size(); i += std::max(1, p.stride))
    if (mask[i]) nodes.push_back(i);
  const double A = env.traj->sup_u;
  WorstTracker w;

  if (p.variant == IntegratedVariant::same_time) {
    rep.inequality = "harnack_same_time";
    rep.premise = verify_premise(env, FlowCondition::super_perelman, kDimInf,
                                 -p.K, !env.flow->is_static);
    const double dfrac = 1.0 / (1.0 + p.delta);
    for (const auto& state : env.traj->states) {
      const double t = shifted(env, state);
      if (!(t > 0.0)) {
        w.skip_state();
        continue;
      }
      w.begin_state();
      const double fac =
          p.K == 0.0 ? 1.0 / t : 2.0 * p.K / (-std::expm1(-2.0 * p.K * t));
      const double coef = (1.0 + 1.0 / p.delta) / (4.0 * (1.0 + p.delta)) * fac;
      const double c = env.flow->c(state.t);
      for (int i : nodes) {
        for (int j : nodes) {
          const double d2 =
              c * (env.grid->r[i] - env.grid->r[j]) *
              (env.grid->r[i] - env.grid->r[j]);
          const double margin = dfrac * std::log(state.u[j]) +
                                (1.0 - dfrac) * std::log(A) + coef * d2 -
                                std::log(state.u[i]);
          w.update(margin, t, env.grid->r[i]);
        }
      }
      w.end_state();
    }
    rep.extras["delta"] = p.delta;
  } else {
    rep.inequality = "harnack_two_time";
    if (!env.flow->is_static)
      throw std::invalid_argument("two-time bound is for static flows");
    rep.premise = verify_premise(env, FlowCondition::cd_m, p.m, -p.K, false);
    const auto& states = env.traj->states;
    for (size_t a = 0; a < states.size(); ++a) {
      const double tau = shifted(env, states[a]);
      if (!(tau > 0.0) || a + 1 == states.size()) {
        w.skip_state();
        continue;
      }
      w.begin_state();
      for (size_t b = a + 1; b < states.size(); ++b) {
        const double T = shifted(env, states[b]);
        if (!(T > tau)) continue;
        const double pre = 0.5 * p.m * std::log(T / tau) +
                           0.5 * p.m * (std::exp(2.0 * p.K * T) -
                                        std::exp(2.0 * p.K * tau));
        const double dcoef = 0.25 * std::exp(2.0 * p.K * tau) *
                             (1.0 + 2.0 * p.K * (T - tau)) / (T - tau);
        for (int i : nodes) {
          for (int j : nodes) {
            const double d = env.grid->r[i] - env.grid->r[j];
            const double margin = pre + std::log(states[b].u[j]) +
                                  dcoef * d * d - std::log(states[a].u[i]);
            w.update(margin, tau, env.grid->r[i]);
          }
        }
      }
      w.end_state();
    }
    rep.extras["m"] = p.m;
  }
  finalize(rep, env, w);
  rep.extras["K"] = p.K;
  rep.extras["sup_A"] = A;
  return rep;
}

}  // namespace wlab
