#include "wlab/heatflow.hpp"

#include <algorithm>
#include <cmath>

#include "num.hpp"

namespace wlab {

Scheme scheme_from_string(const std::string& s) {
  if (s == "crank_nicolson" || s == "cn") return Scheme::crank_nicolson;
  if (s == "backward_euler" || s == "be") return Scheme::backward_euler;
  throw std::invalid_argument("unknown scheme: " + s);
}

InitialKind initial_kind_from_string(const std::string& s) {
  if (s == "uniform") return InitialKind::uniform;
  if (s == "eigen_perturbation") return InitialKind::eigen_perturbation;
  if (s == "normalized_gaussian_bump")
    return InitialKind::normalized_gaussian_bump;
  if (s == "kernel_burnin") return InitialKind::kernel_burnin;
  throw std::invalid_argument("unknown initial kind: " + s);
}

double HeatState::min_u() const {
  return *std::min_element(u.begin(), u.end());
}
double HeatState::max_u() const {
  return *std::max_element(u.begin(), u.end());
}

namespace {

struct SolveMatrices {
  std::vector<double> sub, diag, sup, rhs;
  double corner_tr = 0.0, corner_bl = 0.0;
};

std::vector<double> implicit_step(const WittenOperator& op,
                                  std::span<const double> u, double dt,
                                  double theta) {
  const int N = op.size();
  SolveMatrices m;
  m.sub.assign(N, 0.0);
  m.diag.assign(N, 0.0);
  m.sup.assign(N, 0.0);
  m.rhs.assign(N, 0.0);
  const auto lu = op.apply(u);
  for (int i = 0; i < N; ++i) {
    const double kl = op.kappa_left(i) / op.weights.w[i];
    const double kr = op.kappa_right(i) / op.weights.w[i];
    m.diag[i] = 1.0 + theta * dt * (kl + kr);
    if (i > 0) m.sub[i] = -theta * dt * kl;
    if (i < N - 1) m.sup[i] = -theta * dt * kr;
    m.rhs[i] = u[i] + (1.0 - theta) * dt * lu[i];
  }
  if (op.periodic) {
    m.corner_tr = -theta * dt * op.kappa_left(0) / op.weights.w[0];
    m.corner_bl = -theta * dt * op.kappa_right(N - 1) / op.weights.w[N - 1];
    return num::solve_cyclic_tridiag(m.sub, m.diag, m.sup, m.rhs, m.corner_tr,
                                     m.corner_bl);
  }
  return num::solve_tridiag(m.sub, m.diag, m.sup, m.rhs);
}

double boundary_flux_probe(const RadialModel& model, const WittenOperator& op,
                           std::span<const double> u) {
  if (op.periodic) return 0.0;
  const int N = op.size();
  double flux = 0.0;
  if (model.right == EndpointKind::reflecting)
    flux = std::max(flux, std::abs(op.kappa[N - 2] * (u[N - 1] - u[N - 2])));
  if (model.left == EndpointKind::reflecting)
    flux = std::max(flux, std::abs(op.kappa[0] * (u[1] - u[0])));
  return flux;
}

HeatState step_with_op(const HeatState& state, const RadialModel& model,
                       const PotentialSpec& phi, const FlowSpec& flow,
                       const Grid& grid, const WittenOperator& op_mid,
                       const MeasureWeights* w_next, double dt, Scheme scheme,
                       StepDiag* diag) {
  if (!(dt > 0.0)) throw std::invalid_argument("step needs dt > 0");
  const double theta = scheme == Scheme::crank_nicolson ? 0.5 : 1.0;
  auto u_new = implicit_step(op_mid, state.u, dt, theta);
  bool fell_back = false;
  if (scheme == Scheme::crank_nicolson &&
      *std::min_element(u_new.begin(), u_new.end()) <= 0.0) {
    u_new = implicit_step(op_mid, state.u, dt, 1.0);
    fell_back = true;
  }
  const double min_u = *std::min_element(u_new.begin(), u_new.end());
  if (!(min_u > 0.0) || !std::isfinite(min_u))
    throw std::runtime_error("heat step produced a non-positive state");
  HeatState out;
  out.t = state.t + dt;
  out.u = std::move(u_new);
  out.weights =
      w_next ? *w_next : build_weights(model, phi, flow, grid, out.t);
  out.mass = quadrature(out.u, out.weights);
  if (diag) {
    diag->min_u = min_u;
    diag->mass = out.mass;
    diag->be_fallback = fell_back;
    diag->boundary_flux = boundary_flux_probe(model, op_mid, out.u);
  }
  return out;
}

}  // namespace

HeatState step(const HeatState& state, const RadialModel& model,
               const PotentialSpec& phi, const FlowSpec& flow,
               const Grid& grid, double dt, Scheme scheme, StepDiag* diag) {
  const auto op = assemble(model, phi, flow, grid, state.t + 0.5 * dt);
  return step_with_op(state, model, phi, flow, grid, op, nullptr, dt, scheme,
                      diag);
}

Trajectory run(const RadialModel& model, const PotentialSpec& phi,
               const FlowSpec& flow, const Grid& grid, HeatState initial,
               const SolveParams& solve) {
  if (!(initial.min_u() > 0.0))
    throw std::invalid_argument("initial datum must be strictly positive");
  flow.validate(solve.horizon);
  std::vector<double> outputs = solve.output_times;
  std::sort(outputs.begin(), outputs.end());
  for (double t : outputs)
    if (t < 0.0 || t > solve.horizon + 1e-12)
      throw std::invalid_argument("output times must lie in [0, horizon]");

  Trajectory traj;
  const bool static_op = flow.is_static && flow.phi.time_constant;
  WittenOperator op0 = assemble(model, phi, flow, grid, 0.0);
  traj.cn_positivity_dt = op0.cn_positivity_dt();
  traj.sup_u = initial.max_u();
  traj.inf_u = initial.min_u();
  const double mass0 = initial.mass;
  const double c0 = flow.c(0.0);

  HeatState state = std::move(initial);
  auto emit = [&](const HeatState& s) {
    traj.states.push_back(s);
    traj.mass_series.push_back(s.mass);
  };
  size_t next_out = 0;
  while (next_out < outputs.size() && outputs[next_out] <= 1e-14) {
    emit(state);
    ++next_out;
  }

  // March interval by interval so every output time is landed on exactly.
  std::vector<double> marks(outputs.begin() + next_out, outputs.end());
  if (marks.empty() || marks.back() < solve.horizon - 1e-12)
    marks.push_back(solve.horizon);
  double t_prev = 0.0;
  for (const double t_mark : marks) {
    const double span = t_mark - t_prev;
    if (span <= 1e-14) {
      emit(state);
      t_prev = t_mark;
      continue;
    }
    const int n_sub = std::max(1, (int)std::ceil(span / solve.dt - 1e-9));
    const double h = span / n_sub;
    for (int k = 0; k < n_sub; ++k) {
      StepDiag diag;
      const double t_mid = state.t + 0.5 * h;
      const WittenOperator op =
          static_op ? op0 : assemble(model, phi, flow, grid, t_mid);
      const MeasureWeights* w_next = static_op ? &op0.weights : nullptr;
      state = step_with_op(state, model, phi, flow, grid, op, w_next, h,
                           solve.scheme, &diag);
      traj.sup_u = std::max(traj.sup_u, state.max_u());
      traj.inf_u = std::min(traj.inf_u, diag.min_u);
      traj.max_boundary_flux =
          std::max(traj.max_boundary_flux, diag.boundary_flux);
      traj.cn_fallbacks += diag.be_fallback ? 1 : 0;
      const double expected =
          flow.coupling == Coupling::measure_preserving || flow.is_static
              ? mass0
              : mass0 * std::pow(flow.c(state.t) / c0, 0.5 * model.n);
      traj.max_mass_drift = std::max(
          traj.max_mass_drift, std::abs(state.mass - expected) / mass0);
    }
    const bool is_output = next_out < outputs.size() &&
                           std::abs(outputs[next_out] - t_mark) < 1e-12;
    if (is_output) {
      emit(state);
      ++next_out;
    }
    t_prev = t_mark;
  }
  return traj;
}

void step_lockstep(std::vector<HeatState>& fields, const RadialModel& model,
                   const PotentialSpec& phi, const FlowSpec& flow,
                   const Grid& grid, double dt, Scheme scheme,
                   int* cn_fallbacks) {
  if (fields.empty()) return;
  const double t = fields[0].t;
  const auto op = assemble(model, phi, flow, grid, t + 0.5 * dt);
  double theta = scheme == Scheme::crank_nicolson ? 0.5 : 1.0;
  if (theta < 1.0) {
    auto probe = implicit_step(op, fields[0].u, dt, theta);
    if (*std::min_element(probe.begin(), probe.end()) <= 0.0) {
      theta = 1.0;
      if (cn_fallbacks) ++(*cn_fallbacks);
    }
  }
  const auto w_next = build_weights(model, phi, flow, grid, t + dt);
  for (auto& f : fields) {
    f.u = implicit_step(op, f.u, dt, theta);
    f.t = t + dt;
    f.weights = w_next;
    f.mass = quadrature(f.u, f.weights);
  }
  if (!(fields[0].min_u() > 0.0))
    throw std::runtime_error("lockstep advance lost positivity");
}

double eigenmode_rate(const RadialModel& model, int l) {
  switch (model.kind) {
    case ModelKind::circle: {
      const double k = 2.0 * kPi / model.length() * l;
      return k * k;
    }
    case ModelKind::interval: {
      const double k = kPi * l / model.length();
      return k * k;
    }
    case ModelKind::sphere:
      return static_cast<double>(l) * (l + model.n - 1);
    default:
      throw std::invalid_argument("no closed-form eigenmodes for this model");
  }
}

double eigenmode_value(const RadialModel& model, int l, double r) {
  switch (model.kind) {
    case ModelKind::circle:
      return std::cos(2.0 * kPi / model.length() * l * (r - model.r_min));
    case ModelKind::interval:
      return std::cos(kPi * l * (r - model.r_min) / model.length());
    case ModelKind::sphere:
      if (model.n != 2)
        throw std::invalid_argument("sphere eigenmodes implemented for n = 2");
      return num::legendre(l, std::cos(r));
    default:
      throw std::invalid_argument("no closed-form eigenmodes for this model");
  }
}

std::vector<double> spectral_reference(const RadialModel& model,
                                       const Grid& grid,
                                       std::span<const double> u0, double t,
                                       int max_modes, double* tail_bound) {
  const bool supported = model.kind == ModelKind::circle ||
                         model.kind == ModelKind::interval ||
                         (model.kind == ModelKind::sphere && model.n == 2);
  if (!supported)
    throw std::invalid_argument(
        "spectral reference supports circle, reflecting interval and S^2");
  const int N = grid.size();
  auto flow = catalog(FlowName::static_flow, model, PotentialSpec::zero(),
                      Coupling::independent);
  const auto mw = build_weights(model, PotentialSpec::zero(), flow, grid, 0.0);

  std::vector<double> result(N, 0.0);
  double tail = 0.0;
  auto accumulate_mode = [&](const std::vector<double>& e, double rate,
                             bool track_tail) {
    double num = 0.0, den = 0.0;
    for (int i = 0; i < N; ++i) {
      num += u0[i] * e[i] * mw.w[i];
      den += e[i] * e[i] * mw.w[i];
    }
    const double coef = num / den;
    const double decay = std::exp(-rate * t);
    for (int i = 0; i < N; ++i) result[i] += coef * decay * e[i];
    if (track_tail) tail += std::abs(coef) * decay;
  };

  std::vector<double> e(N);
  for (int l = 0; l <= max_modes; ++l) {
    const bool track = l > max_modes - 2;
    if (model.kind == ModelKind::circle && l > 0) {
      const double k = 2.0 * kPi / model.length() * l;
      for (int i = 0; i < N; ++i) e[i] = std::cos(k * (grid.r[i] - model.r_min));
      accumulate_mode(e, k * k, track);
      for (int i = 0; i < N; ++i) e[i] = std::sin(k * (grid.r[i] - model.r_min));
      accumulate_mode(e, k * k, track);
    } else {
      for (int i = 0; i < N; ++i) e[i] = eigenmode_value(model, l, grid.r[i]);
      accumulate_mode(e, eigenmode_rate(model, l), track);
    }
  }
  if (tail_bound) *tail_bound = tail;
  return result;
}

namespace {

// Closed-form small-time heat kernels (radial, mass-normalized up to
// domain truncation).
bool closed_form_kernel(const RadialModel& model, double t0, double r,
                        double* out) {
  if (model.kind == ModelKind::euclidean) {
    *out = std::pow(4.0 * kPi * t0, -0.5 * model.n) *
           std::exp(-r * r / (4.0 * t0));
    return true;
  }
  if (model.kind == ModelKind::hyperbolic && model.n == 3) {
    const double shape = r < 1e-8 ? 1.0 : r / std::sinh(r);
    *out = std::pow(4.0 * kPi * t0, -1.5) * shape *
           std::exp(-t0 - r * r / (4.0 * t0));
    return true;
  }
  return false;
}

}  // namespace

InitialData make_initial(const InitialSpec& spec, const RadialModel& model,
                         const PotentialSpec& phi, const FlowSpec& flow,
                         const Grid& grid) {
  const int N = grid.size();
  InitialData out;
  HeatState& st = out.state;
  st.t = 0.0;
  st.weights = build_weights(model, phi, flow, grid, 0.0);
  st.u.assign(N, 0.0);
  const double floor_u = 1e-300;

  switch (spec.kind) {
    case InitialKind::uniform: {
      const double vol = st.weights.total();
      std::fill(st.u.begin(), st.u.end(), 1.0 / vol);
      break;
    }
    case InitialKind::eigen_perturbation: {
      for (int i = 0; i < N; ++i)
        st.u[i] = 1.0 + spec.amplitude * eigenmode_value(model, spec.mode,
                                                         grid.r[i]);
      if (st.min_u() <= 0.0)
        throw std::invalid_argument(
            "eigen perturbation amplitude makes the datum non-positive");
      break;
    }
    case InitialKind::normalized_gaussian_bump: {
      if (spec.width < 4.0 * grid.dr)
        throw std::invalid_argument(
            "bump width under-resolved; needs >= 4 dr");
      for (int i = 0; i < N; ++i) {
        const double d = grid.r[i] - spec.center;
        st.u[i] = std::max(std::exp(-0.5 * d * d / (spec.width * spec.width)),
                           floor_u);
      }
      const double mass = quadrature(st.u, st.weights);
      for (double& v : st.u) v /= mass;
      break;
    }
    case InitialKind::kernel_burnin: {
      if (!(spec.t0 > 0.0))
        throw std::invalid_argument("kernel burn-in needs t0 > 0");
      double val = 0.0;
      if (closed_form_kernel(model, spec.t0, grid.r[0], &val)) {
        for (int i = 0; i < N; ++i) {
          closed_form_kernel(model, spec.t0, grid.r[i] - spec.center, &val);
          st.u[i] = std::max(val, floor_u);
        }
        out.closed_form_kernel = true;
      } else {
        // Gaussian bump shaped like the flat kernel at t0/2, then half the
        // burn-in window of smoothing; entropy clocks then read t + t0.
        const double sigma = std::sqrt(spec.t0);
        if (sigma < 4.0 * grid.dr)
          throw std::invalid_argument(
              "kernel burn-in under-resolved; raise t0 or N");
        for (int i = 0; i < N; ++i) {
          const double d = grid.r[i] - spec.center;
          st.u[i] = std::max(std::exp(-0.25 * d * d / (0.5 * spec.t0)),
                             floor_u);
        }
        const double span = 0.5 * spec.t0;
        const int nb = 40;
        st.mass = quadrature(st.u, st.weights);
        for (int k = 0; k < nb; ++k)
          st = step(st, model, phi, flow, grid, span / nb,
                    Scheme::backward_euler);
        st.t = 0.0;
        st.weights = build_weights(model, phi, flow, grid, 0.0);
      }
      const double mass = quadrature(st.u, st.weights);
      for (double& v : st.u) v /= mass;
      out.t_shift = spec.t0;
      break;
    }
  }
  st.mass = quadrature(st.u, st.weights);
  if (!(st.min_u() > 0.0))
    throw std::invalid_argument("initial datum must be strictly positive");
  return out;
}

}  // namespace wlab
