#include "wlab/functionals.hpp"

#include <cmath>

#include "num.hpp"

namespace wlab {

DissipationMode dissipation_mode_from_string(const std::string& s) {
  if (s == "finite_difference") return DissipationMode::finite_difference;
  if (s == "gradient_formula") return DissipationMode::gradient_formula;
  if (s == "closed_form") return DissipationMode::closed_form;
  throw std::invalid_argument("unknown dissipation mode: " + s);
}

DkVariant dk_variant_from_string(const std::string& s) {
  if (s == "derivation") return DkVariant::derivation;
  if (s == "statement") return DkVariant::statement;
  throw std::invalid_argument("unknown d_k variant: " + s);
}

namespace {

std::vector<double> log_u(const HeatState& state) {
  std::vector<double> f(state.u.size());
  for (size_t i = 0; i < f.size(); ++i) f[i] = std::log(state.u[i]);
  return f;
}

void require_positive_time(double t) {
  if (!(t > 0.0)) throw std::invalid_argument("entropy time must be positive");
}

}  // namespace

double boltzmann_entropy(const HeatState& state) {
  if (!(state.min_u() > 0.0))
    throw std::invalid_argument("entropy needs a strictly positive state");
  std::vector<double> integrand(state.u.size());
  for (size_t i = 0; i < state.u.size(); ++i)
    integrand[i] = -state.u[i] * std::log(state.u[i]);
  return quadrature(integrand, state.weights);
}

double fisher_information(const HeatState& state, const EvalContext& ctx) {
  const auto f = log_u(state);
  auto gs = grad_sq(f, *ctx.grid, ctx.flow->c(state.t));
  for (size_t i = 0; i < gs.size(); ++i) gs[i] *= state.u[i];
  return quadrature(gs, state.weights);
}

double phi_mk(double t, double m, double K) {
  require_positive_time(t);
  double v = 0.5 * m * (1.0 + std::log(4.0 * kPi * t));
  if (K != 0.0)
    v += 0.5 * m * (num::ein_series(4.0 * K * t) - num::ein_series(4.0 * K));
  return v;
}

double phi_mk_prime(double t, double m, double K) {
  require_positive_time(t);
  return 0.5 * m / t * std::exp(4.0 * K * t);
}

double w_defect(double t, double m, double K) {
  require_positive_time(t);
  const double kt = K * t;
  return 0.5 * m / t *
         (std::exp(4.0 * kt) * (1.0 + 4.0 * kt) - (1.0 + kt) * (1.0 + kt));
}

WmResult w_m_eval(const HeatState& state, const EvalContext& ctx, double m,
                  double K, double t, double gauge_offset) {
  require_positive_time(t);
  if (m < ctx.model->n) throw std::invalid_argument("w_m requires m >= n");
  WmResult r;
  r.H = boltzmann_entropy(state) - phi_mk(t, m, K) - gauge_offset;
  r.dHdt = fisher_information(state, ctx) - phi_mk_prime(t, m, K);
  r.W = r.H + t * r.dHdt;
  return r;
}

double w_m_closed_form(const HeatState& state, const EvalContext& ctx,
                       double m, double t) {
  require_positive_time(t);
  const auto f = log_u(state);
  const auto gs = grad_sq(f, *ctx.grid, ctx.flow->c(state.t));
  const double phi_gauge = 0.5 * m * std::log(4.0 * kPi * t);
  std::vector<double> integrand(f.size());
  for (size_t i = 0; i < f.size(); ++i)
    integrand[i] = (t * gs[i] + (-f[i] - phi_gauge) - m) * state.u[i];
  return quadrature(integrand, state.weights);
}

double w_m_dissipation_rhs(const HeatState& state, const EvalContext& ctx,
                           double m, double K, double t, bool with_defect) {
  require_positive_time(t);
  const RadialModel& model = *ctx.model;
  if (m < model.n) throw std::invalid_argument("requires m >= n");
  const double c = ctx.flow->c(state.t);
  const double he = ctx.flow->is_static ? 0.0 : ctx.flow->h_eigen(state.t);
  const auto f = log_u(state);
  const auto gs = grad_sq(f, *ctx.grid, c);
  const auto op = assemble(model, *ctx.phi, *ctx.flow, *ctx.grid, state.t);
  const double a = 0.5 * K + 0.5 / t;
  const auto hs = hessian_shift_sq(f, a, *ctx.grid, model, *ctx.phi, op, c);
  const auto fr = radial_derivative(f, *ctx.grid);

  std::vector<double> term1(f.size()), term2(f.size(), 0.0);
  const bool third_term = m > model.n;
  const double target = third_term ? (m - model.n) * (1.0 + K * t) / (2.0 * t)
                                   : 0.0;
  for (size_t i = 0; i < f.size(); ++i) {
    const auto cs =
        bakry_emery(model, *ctx.phi, m, ctx.grid->r[i], state.t, c);
    term1[i] = (hs[i] + (cs.ricmn_rr + K + he) * gs[i]) * state.u[i];
    if (third_term) {
      const double v =
          ctx.phi->dr(ctx.grid->r[i], state.t) * fr[i] / c - target;
      term2[i] = v * v * state.u[i];
    }
  }
  double rhs = -2.0 * t * quadrature(term1, state.weights);
  if (third_term)
    rhs -= 2.0 * t / (m - model.n) * quadrature(term2, state.weights);
  if (with_defect) rhs -= w_defect(t, m, K);
  return rhs;
}

WtilResult w_tilde_eval(const HeatState& state, const EvalContext& ctx,
                        double m, double K, double t) {
  require_positive_time(t);
  WtilResult r;
  const double kt = K * t;
  r.H = boltzmann_entropy(state) - 0.5 * m * (1.0 + std::log(4.0 * kPi * t)) -
        0.5 * m * kt * (1.0 + kt / 6.0);
  r.dHdt = fisher_information(state, ctx) - 0.5 * m / t -
           0.5 * m * K * (1.0 + kt / 3.0);
  r.W = r.H + t * r.dHdt;
  return r;
}

double w_tilde_gap_derivative(double t, double m, double K) {
  return w_defect(t, m, K);
}

double c_factor(double t, double K) {
  require_positive_time(t);
  if (K == 0.0) return 1.0 / t;
  return 2.0 * K / std::expm1(2.0 * K * t);
}

double d_factor(double t, double K, DkVariant variant) {
  require_positive_time(t);
  if (K == 0.0) return 1.0 / t;
  const double denom = std::abs(std::expm1(-2.0 * K * t));
  return variant == DkVariant::derivation ? 2.0 * std::abs(K) / denom
                                          : 1.0 / denom;
}

double beta_factor(double t, double K) {
  require_positive_time(t);
  if (K == 0.0) return t;
  return std::sinh(2.0 * K * t) / (2.0 * K);
}

WkResult w_k_eval(const HeatState& u1, const HeatState& u2,
                  const EvalContext& ctx, double K, double t,
                  DkVariant variant) {
  require_positive_time(t);
  if (!(u1.min_u() > 0.0))
    throw std::invalid_argument("P_t f must stay positive");
  const size_t N = u1.u.size();
  std::vector<double> deficit(N);
  for (size_t i = 0; i < N; ++i)
    deficit[i] = u2.u[i] - u1.u[i] * std::log(u1.u[i]);
  const double ent = quadrature(deficit, u1.weights);
  const double fisher_like = fisher_information(u1, ctx);
  const double C = c_factor(t, K);
  const double D = d_factor(t, K, variant);
  WkResult r;
  r.H = D * ent;
  r.dHdt = D * (fisher_like - C * ent);
  r.W = r.H + beta_factor(t, K) * r.dHdt;
  return r;
}

double w_k_dissipation_rhs(const HeatState& u1, const EvalContext& ctx,
                           double K, double t, DkVariant variant) {
  require_positive_time(t);
  const double c = ctx.flow->c(u1.t);
  const double he = ctx.flow->is_static ? 0.0 : ctx.flow->h_eigen(u1.t);
  const auto f = log_u(u1);
  const auto gs = grad_sq(f, *ctx.grid, c);
  const auto hess = hessian_radial_sq(f, *ctx.grid, *ctx.model, c);
  std::vector<double> integrand(f.size());
  for (size_t i = 0; i < f.size(); ++i) {
    const auto cs = bakry_emery(*ctx.model, *ctx.phi, kDimInf, ctx.grid->r[i],
                                u1.t, c);
    integrand[i] = (hess[i] + (cs.ricL_rr + he - K) * gs[i]) * u1.u[i];
  }
  const double factor =
      (K == 0.0 ? 2.0 * t : std::sinh(2.0 * K * t) / K) *
      d_factor(t, K, variant);
  return -factor * quadrature(integrand, u1.weights);
}

namespace {

double lagrange_deriv3(double t0, double t1, double t2, double v0, double v1,
                       double v2, double at) {
  const double d0 = (2.0 * at - t1 - t2) / ((t0 - t1) * (t0 - t2));
  const double d1 = (2.0 * at - t0 - t2) / ((t1 - t0) * (t1 - t2));
  const double d2 = (2.0 * at - t0 - t1) / ((t2 - t0) * (t2 - t1));
  return v0 * d0 + v1 * d1 + v2 * d2;
}

}  // namespace

std::vector<double> centered_derivative(const std::vector<double>& times,
                                        const std::vector<double>& values) {
  const int n = static_cast<int>(times.size());
  if (n != static_cast<int>(values.size()))
    throw std::invalid_argument("series length mismatch");
  std::vector<double> d(n, 0.0);
  if (n < 3) {
    if (n == 2) d[0] = d[1] = (values[1] - values[0]) / (times[1] - times[0]);
    return d;
  }
  for (int i = 1; i < n - 1; ++i)
    d[i] = lagrange_deriv3(times[i - 1], times[i], times[i + 1], values[i - 1],
                           values[i], values[i + 1], times[i]);
  d[0] = lagrange_deriv3(times[0], times[1], times[2], values[0], values[1],
                         values[2], times[0]);
  d[n - 1] = lagrange_deriv3(times[n - 3], times[n - 2], times[n - 1],
                             values[n - 3], values[n - 2], values[n - 1],
                             times[n - 1]);
  return d;
}

}  // namespace wlab
