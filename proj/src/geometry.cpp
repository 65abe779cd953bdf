#include "wlab/geometry.hpp"

#include <algorithm>

#include "wlab/flows.hpp"

namespace wlab {

const char* to_string(ModelKind k) {
  switch (k) {
    case ModelKind::euclidean: return "euclidean";
    case ModelKind::sphere: return "sphere";
    case ModelKind::hyperbolic: return "hyperbolic";
    case ModelKind::circle: return "circle";
    case ModelKind::interval: return "interval";
  }
  return "?";
}

const char* to_string(FlowCondition c) {
  switch (c) {
    case FlowCondition::cd_m: return "cd_m";
    case FlowCondition::super_perelman: return "super_perelman";
    case FlowCondition::super_ricci_m: return "super_ricci_m";
    case FlowCondition::backward_super_ricci: return "backward_super_ricci";
    case FlowCondition::lyh_flow_tensor: return "lyh_flow_tensor";
    case FlowCondition::hhh_flow: return "hhh_flow";
  }
  return "?";
}

RadialModel RadialModel::sphere(int n, double r_min, double r_max) {
  RadialModel m;
  m.kind = ModelKind::sphere;
  m.n = n;
  m.r_min = r_min;
  m.r_max = r_max;
  m.left = EndpointKind::pole_regular;
  m.right = EndpointKind::pole_regular;
  m.psi = [](double r) { return std::sin(r); };
  m.dpsi = [](double r) { return std::cos(r); };
  m.ddpsi = [](double r) { return -std::sin(r); };
  m.validate();
  return m;
}

RadialModel RadialModel::euclidean(int n, double r_max) {
  RadialModel m;
  m.kind = ModelKind::euclidean;
  m.n = n;
  m.r_min = 0.0;
  m.r_max = r_max;
  m.left = EndpointKind::pole_regular;
  m.right = EndpointKind::reflecting;
  m.psi = [](double r) { return r; };
  m.dpsi = [](double) { return 1.0; };
  m.ddpsi = [](double) { return 0.0; };
  m.validate();
  return m;
}

RadialModel RadialModel::hyperbolic(int n, double r_max) {
  RadialModel m;
  m.kind = ModelKind::hyperbolic;
  m.n = n;
  m.r_min = 0.0;
  m.r_max = r_max;
  m.left = EndpointKind::pole_regular;
  m.right = EndpointKind::reflecting;
  m.psi = [](double r) { return std::sinh(r); };
  m.dpsi = [](double r) { return std::cosh(r); };
  m.ddpsi = [](double r) { return std::sinh(r); };
  m.validate();
  return m;
}

RadialModel RadialModel::circle(double length) {
  RadialModel m;
  m.kind = ModelKind::circle;
  m.n = 1;
  m.r_min = 0.0;
  m.r_max = length;
  m.left = EndpointKind::periodic;
  m.right = EndpointKind::periodic;
  m.psi = [](double) { return 1.0; };
  m.dpsi = [](double) { return 0.0; };
  m.ddpsi = [](double) { return 0.0; };
  m.validate();
  return m;
}

RadialModel RadialModel::interval(double length) {
  RadialModel m;
  m.kind = ModelKind::interval;
  m.n = 1;
  m.r_min = 0.0;
  m.r_max = length;
  m.left = EndpointKind::reflecting;
  m.right = EndpointKind::reflecting;
  m.psi = [](double) { return 1.0; };
  m.dpsi = [](double) { return 0.0; };
  m.ddpsi = [](double) { return 0.0; };
  m.validate();
  return m;
}

double RadialModel::sphere_area() const {
  if (n == 1) return 1.0;
  return 2.0 * std::pow(kPi, 0.5 * n) / std::tgamma(0.5 * n);
}

bool RadialModel::pole_at(double r) const {
  const double eps = 1e-12 * std::max(1.0, std::abs(length()));
  if (left == EndpointKind::pole_regular && std::abs(r - r_min) < eps)
    return true;
  if (right == EndpointKind::pole_regular && std::abs(r - r_max) < eps)
    return true;
  return false;
}

void RadialModel::validate() const {
  if (n < 1) throw geometry_error("model dimension must be >= 1");
  if (!(r_max > r_min)) throw geometry_error("empty radial domain");
  if (!std::isfinite(r_max)) throw geometry_error("domain must be truncated");
  if ((left == EndpointKind::periodic) != (right == EndpointKind::periodic))
    throw geometry_error("periodic boundary must apply to both endpoints");
  switch (kind) {
    case ModelKind::sphere:
      if (n < 2) throw geometry_error("sphere model requires n >= 2");
      if (r_min < 0.0 || r_max > kPi + 1e-12)
        throw geometry_error("sphere domain must lie in [0, pi]");
      break;
    case ModelKind::euclidean:
    case ModelKind::hyperbolic:
      if (n < 2) throw geometry_error("warped model requires n >= 2");
      if (r_min != 0.0) throw geometry_error("pole model starts at r = 0");
      break;
    case ModelKind::circle:
    case ModelKind::interval:
      if (n != 1) throw geometry_error("1d model requires n = 1");
      break;
  }
  // pole-regular endpoints need psi -> 0 with unit slope
  for (const double r : {r_min, r_max}) {
    const bool is_left = (r == r_min);
    const EndpointKind e = is_left ? left : right;
    if (e != EndpointKind::pole_regular) continue;
    if (std::abs(psi(r)) > 1e-12 || std::abs(std::abs(dpsi(r)) - 1.0) > 1e-12)
      throw geometry_error("pole-regular endpoint needs psi=0, |psi'|=1");
  }
  // warp positive inside
  const int probes = 17;
  for (int i = 1; i < probes; ++i) {
    const double r = r_min + length() * i / probes;
    if (!(psi(r) > 0.0))
      throw geometry_error("warp function must be positive on the interior");
  }
}

PotentialSpec PotentialSpec::zero() {
  PotentialSpec p;
  auto z = [](double, double) { return 0.0; };
  p.phi = z;
  p.dr = z;
  p.drr = z;
  p.dt = z;
  p.drt = z;
  p.spatially_constant = true;
  p.time_constant = true;
  p.label = "zero";
  return p;
}

PotentialSpec PotentialSpec::quadratic(double a) {
  PotentialSpec p;
  p.phi = [a](double r, double) { return 0.5 * a * r * r; };
  p.dr = [a](double r, double) { return a * r; };
  p.drr = [a](double, double) { return a; };
  p.dt = [](double, double) { return 0.0; };
  p.drt = [](double, double) { return 0.0; };
  p.spatially_constant = false;
  p.time_constant = true;
  p.label = "quadratic";
  return p;
}

PotentialSpec PotentialSpec::cosine(double a) {
  PotentialSpec p;
  p.phi = [a](double r, double) { return a * std::cos(r); };
  p.dr = [a](double r, double) { return -a * std::sin(r); };
  p.drr = [a](double r, double) { return -a * std::cos(r); };
  p.dt = [](double, double) { return 0.0; };
  p.drt = [](double, double) { return 0.0; };
  p.spatially_constant = false;
  p.time_constant = true;
  p.label = "cosine";
  return p;
}

PotentialSpec PotentialSpec::with_time_offset(std::function<double(double)> g,
                                              std::function<double(double)> gdot,
                                              const std::string& suffix) const {
  PotentialSpec p = *this;
  auto base_phi = phi;
  auto base_dt = dt;
  p.phi = [base_phi, g](double r, double t) { return base_phi(r, t) + g(t); };
  p.dt = [base_dt, gdot](double r, double t) { return base_dt(r, t) + gdot(t); };
  p.time_constant = false;
  p.label = label + suffix;
  return p;
}

std::pair<double, double> ricci_radial(const RadialModel& model, double r) {
  if (model.n == 1) return {0.0, 0.0};
  if (!(r > model.r_min && r < model.r_max) && !model.periodic())
    throw std::invalid_argument("radius outside the open domain interior");
  const double psi = model.psi(r);
  if (!(psi > 0.0)) throw geometry_error("degenerate warp, psi(r) <= 0");
  const double dpsi = model.dpsi(r);
  const double ddpsi = model.ddpsi(r);
  const double rr = -(model.n - 1) * ddpsi / psi;
  const double tan =
      -ddpsi / psi + (model.n - 2) * (1.0 - dpsi * dpsi) / (psi * psi);
  return {rr, tan};
}

namespace {

// Curvature evaluation point: poles are nudged inward; the closed-form
// catalog warps have constant curvature so the nudge is exact there.
double curvature_radius(const RadialModel& model, double r) {
  if (model.periodic()) return r;
  const double delta = std::max(1e-7 * model.length(), 1e-12);
  return std::clamp(r, model.r_min + delta, model.r_max - delta);
}

}  // namespace

CurvatureSample bakry_emery(const RadialModel& model, const PotentialSpec& phi,
                            double m, double r, double t, double c) {
  if (m < model.n) throw std::invalid_argument("dimension parameter m < n");
  if (m == model.n && !phi.spatially_constant)
    throw std::invalid_argument(
        "m = n requires a spatially constant potential");
  if (!(c > 0.0)) throw geometry_error("homothety factor must be positive");

  CurvatureSample s;
  s.r = r;
  s.t = t;
  const double re = curvature_radius(model, r);
  auto [ric_rr, ric_tan] = model.n == 1 ? std::pair<double, double>{0.0, 0.0}
                                        : ricci_radial(model, re);
  const double pr = phi.dr(re, t);
  const double prr = phi.drr(re, t);
  double hess_tan = 0.0;
  if (model.n >= 2) {
    hess_tan = model.pole_at(r) ? prr : (model.dpsi(re) / model.psi(re)) * pr;
    if (model.pole_at(r)) ric_tan = ric_rr;  // isotropic limit at the pole
  }
  s.ric_rr = ric_rr / c;
  s.ric_tan = ric_tan / c;
  s.hessphi_rr = prr / c;
  s.hessphi_tan = hess_tan / c;
  s.ricL_rr = s.ric_rr + s.hessphi_rr;
  s.ricL_tan = s.ric_tan + s.hessphi_tan;
  if (std::isinf(m)) {
    s.ricmn_rr = s.ricL_rr;
    s.ricmn_tan = s.ricL_tan;
  } else if (m > model.n) {
    s.ricmn_rr = s.ricL_rr - pr * pr / ((m - model.n) * c);
    s.ricmn_tan = s.ricL_tan;  // grad phi (x) grad phi is purely radial
  } else {
    s.ricmn_rr = s.ric_rr;  // m = n, constant phi
    s.ricmn_tan = s.ric_tan;
  }
  return s;
}

double s_tensor(const RadialModel& model, const PotentialSpec& phi,
                const FlowSpec& flow, double m, double r, double t,
                STensorVariant variant) {
  if (m <= model.n)
    throw std::invalid_argument("s_tensor requires m > n (or m = infinity)");
  const double c = flow.c(t);
  if (!(c > 0.0)) throw geometry_error("homothety factor must be positive");
  const double he = flow.h_eigen(t);
  const double trh = flow.tr_h(t, model.n);
  const double re = curvature_radius(model, r);
  const double sqrt_c = std::sqrt(c);
  const double grad_phi = phi.dr(re, t) / sqrt_c;
  const double grad_phit = phi.drt(re, t) / sqrt_c;
  // Homothety: div h = 0 and grad Tr h = 0 identically; only the time
  // derivative of the potential survives from the commutator bracket.
  double s = 2.0 * he * grad_phi;
  if (std::isfinite(m)) s += (2.0 * trh / (m - model.n)) * grad_phi;
  s += (variant == STensorVariant::lemma ? -1.0 : 1.0) * grad_phit;
  return s;
}

CurvatureSample curvature_sample(const RadialModel& model,
                                 const PotentialSpec& phi, const FlowSpec& flow,
                                 double m, double r, double t,
                                 STensorVariant variant) {
  CurvatureSample s = bakry_emery(model, phi, m, r, t, flow.c(t));
  s.h_rr = flow.h_eigen(t);
  s.h_tan = s.h_rr;
  s.tr_h = flow.tr_h(t, model.n);
  s.s_r = (std::isfinite(m) && m > model.n) || std::isinf(m)
              ? ((m > model.n) ? s_tensor(model, phi, flow, m, r, t, variant)
                               : 0.0)
              : 0.0;
  return s;
}

std::vector<double> condition_sample_radii(const RadialModel& model,
                                           int count) {
  std::vector<double> rs;
  rs.reserve(count);
  const double len = model.length();
  if (model.periodic()) {
    for (int i = 0; i < count; ++i)
      rs.push_back(model.r_min + len * i / count);
  } else {
    for (int i = 0; i < count; ++i)
      rs.push_back(model.r_min + len * i / (count - 1));
  }
  return rs;
}

ConditionResult flow_condition_check(const RadialModel& model,
                                     const PotentialSpec& phi,
                                     const FlowSpec& flow, double m, double K,
                                     double t, FlowCondition condition,
                                     const std::vector<double>& sample_r,
                                     const ConditionParams& params) {
  if (sample_r.empty()) throw std::invalid_argument("empty sample grid");
  ConditionResult out;
  out.worst_margin = std::numeric_limits<double>::infinity();
  const double he = flow.h_eigen(t);
  const double e2 = std::exp(-2.0 * K * t);
  const double e4 = std::exp(-4.0 * K * t);
  const double ak = params.alpha_k ? params.alpha_k(t) : 0.0;
  for (const double r : sample_r) {
    const CurvatureSample cs = bakry_emery(model, phi, m, r, t, flow.c(t));
    const int dirs = model.n >= 2 ? 2 : 1;
    for (int d = 0; d < dirs; ++d) {
      const double ricmn = d == 0 ? cs.ricmn_rr : cs.ricmn_tan;
      const double ricL = d == 0 ? cs.ricL_rr : cs.ricL_tan;
      double margin = 0.0;
      switch (condition) {
        case FlowCondition::cd_m:
          margin = ricmn - K;
          break;
        case FlowCondition::super_perelman:
          margin = he + ricL - K;
          break;
        case FlowCondition::super_ricci_m:
          margin = he + ricmn - K;
          break;
        case FlowCondition::backward_super_ricci:
          margin = (1.0 - params.alpha) * he + ricmn - K;
          break;
        case FlowCondition::lyh_flow_tensor:
          margin = e4 * (he + ricmn + K) - e2 * he - ak;
          break;
        case FlowCondition::hhh_flow:
          margin = 2.0 * he + ricmn - K;
          break;
      }
      if (margin < out.worst_margin) {
        out.worst_margin = margin;
        out.worst_r = r;
      }
    }
  }
  out.holds = out.worst_margin >= -params.eps;
  return out;
}

}  // namespace wlab
