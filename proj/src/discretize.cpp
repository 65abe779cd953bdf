#include "wlab/discretize.hpp"

#include <algorithm>
#include <numeric>

#include "num.hpp"

namespace wlab {

Grid Grid::make(const RadialModel& model, int N) {
  if (N < 16) throw std::invalid_argument("grid needs at least 16 nodes");
  Grid g;
  g.periodic = model.periodic();
  const double len = model.length();
  g.dr = g.periodic ? len / N : len / (N - 1);
  g.r.resize(N);
  for (int i = 0; i < N; ++i) g.r[i] = model.r_min + i * g.dr;
  if (!g.periodic) g.r[N - 1] = model.r_max;  // exact endpoint
  return g;
}

double MeasureWeights::total() const {
  return std::accumulate(w.begin(), w.end(), 0.0);
}

namespace {

// Density of dmu in the radial coordinate at fixed t (volume scaling
// c^{n/2} applied by the caller).
double mu_density(const RadialModel& model, const PotentialSpec& phi, double r,
                  double t) {
  const double warp = model.n >= 2 ? std::pow(model.psi(r), model.n - 1) : 1.0;
  return model.sphere_area() * warp * std::exp(-phi.phi(r, t));
}

}  // namespace

MeasureWeights build_weights(const RadialModel& model, const PotentialSpec& phi,
                             const FlowSpec& flow, const Grid& grid, double t) {
  const double c = flow.c(t);
  if (!(c > 0.0)) throw geometry_error("homothety factor must be positive");
  const double vol_scale = std::pow(c, 0.5 * model.n);
  const int N = grid.size();
  MeasureWeights mw;
  mw.t = t;
  mw.w.resize(N);
  auto rho = [&](double r) { return mu_density(model, phi, r, t); };
  for (int i = 0; i < N; ++i) {
    double a, b;
    if (grid.periodic) {
      a = grid.r[i] - 0.5 * grid.dr;
      b = grid.r[i] + 0.5 * grid.dr;
    } else {
      a = std::max(model.r_min, grid.r[i] - 0.5 * grid.dr);
      b = std::min(model.r_max, grid.r[i] + 0.5 * grid.dr);
    }
    mw.w[i] = vol_scale * num::gauss5(rho, a, b);
    if (!(mw.w[i] > 0.0))
      throw geometry_error("non-positive measure weight at node " +
                           std::to_string(i));
  }
  return mw;
}

WittenOperator assemble(const RadialModel& model, const PotentialSpec& phi,
                        const FlowSpec& flow, const Grid& grid, double t) {
  const double c = flow.c(t);
  if (!(c > 0.0)) throw geometry_error("homothety factor must be positive");
  WittenOperator op;
  op.t = t;
  op.periodic = grid.periodic;
  op.weights = build_weights(model, phi, flow, grid, t);
  const int N = grid.size();
  const int interfaces = grid.periodic ? N : N - 1;
  // kappa = rho(midpoint) c^{(n-2)/2} / dr; with w ~ rho c^{n/2} dr this
  // reproduces c^{-1}[u'' + ((n-1) psi'/psi - phi') u'] to O(dr^2).
  const double scale = std::pow(c, 0.5 * (model.n - 2)) / grid.dr;
  op.kappa.resize(interfaces);
  for (int i = 0; i < interfaces; ++i) {
    const double rm = grid.midpoint(i);
    op.kappa[i] = scale * mu_density(model, phi, rm, t);
    if (!(op.kappa[i] > 0.0))
      throw geometry_error("non-positive interface conductance");
  }
  return op;
}

double WittenOperator::kappa_left(int i) const {
  if (i > 0) return kappa[i - 1];
  return periodic ? kappa.back() : 0.0;
}

double WittenOperator::kappa_right(int i) const {
  const int N = size();
  if (i < N - 1) return kappa[i];
  return periodic ? kappa[N - 1] : 0.0;
}

std::vector<double> WittenOperator::apply(std::span<const double> u) const {
  const int N = size();
  std::vector<double> out(N);
  for (int i = 0; i < N; ++i) {
    const double un = i + 1 < N ? u[i + 1] : (periodic ? u[0] : u[i]);
    const double up = i > 0 ? u[i - 1] : (periodic ? u[N - 1] : u[i]);
    out[i] = (kappa_right(i) * (un - u[i]) - kappa_left(i) * (u[i] - up)) /
             weights.w[i];
  }
  return out;
}

double WittenOperator::cn_positivity_dt() const {
  const int N = size();
  double bound = std::numeric_limits<double>::infinity();
  for (int i = 0; i < N; ++i)
    bound = std::min(bound, weights.w[i] / (kappa_left(i) + kappa_right(i)));
  return bound;
}

std::vector<double> radial_derivative(std::span<const double> u,
                                      const Grid& grid) {
  const int N = static_cast<int>(u.size());
  if (N < 3) throw std::invalid_argument("need at least 3 nodes");
  std::vector<double> d(N);
  const double inv2 = 1.0 / (2.0 * grid.dr);
  for (int i = 1; i < N - 1; ++i) d[i] = (u[i + 1] - u[i - 1]) * inv2;
  if (grid.periodic) {
    d[0] = (u[1] - u[N - 1]) * inv2;
    d[N - 1] = (u[0] - u[N - 2]) * inv2;
  } else {
    d[0] = (-3.0 * u[0] + 4.0 * u[1] - u[2]) * inv2;
    d[N - 1] = (3.0 * u[N - 1] - 4.0 * u[N - 2] + u[N - 3]) * inv2;
  }
  return d;
}

std::vector<double> grad_sq(std::span<const double> u, const Grid& grid,
                            double c) {
  auto d = radial_derivative(u, grid);
  for (double& v : d) v = v * v / c;
  return d;
}

namespace {

std::vector<double> second_derivative(std::span<const double> f,
                                      const Grid& grid) {
  const int N = static_cast<int>(f.size());
  std::vector<double> d(N);
  const double inv = 1.0 / (grid.dr * grid.dr);
  for (int i = 1; i < N - 1; ++i) d[i] = (f[i + 1] - 2.0 * f[i] + f[i - 1]) * inv;
  if (grid.periodic) {
    d[0] = (f[1] - 2.0 * f[0] + f[N - 1]) * inv;
    d[N - 1] = (f[0] - 2.0 * f[N - 1] + f[N - 2]) * inv;
  } else {
    d[0] = (2.0 * f[0] - 5.0 * f[1] + 4.0 * f[2] - f[3]) * inv;
    d[N - 1] = (2.0 * f[N - 1] - 5.0 * f[N - 2] + 4.0 * f[N - 3] - f[N - 4]) * inv;
  }
  return d;
}

}  // namespace

std::vector<double> hessian_radial_sq(std::span<const double> f,
                                      const Grid& grid,
                                      const RadialModel& model, double c) {
  const auto frr = second_derivative(f, grid);
  const int N = static_cast<int>(f.size());
  std::vector<double> out(N);
  const double inv_c2 = 1.0 / (c * c);
  if (model.n == 1) {
    for (int i = 0; i < N; ++i) out[i] = frr[i] * frr[i] * inv_c2;
    return out;
  }
  const auto fr = radial_derivative(f, grid);
  for (int i = 0; i < N; ++i) {
    const double r = grid.r[i];
    // (psi'/psi) f' -> f'' at a regular pole
    const double tan = model.pole_at(r)
                           ? frr[i]
                           : (model.dpsi(r) / model.psi(r)) * fr[i];
    out[i] = (frr[i] * frr[i] + (model.n - 1) * tan * tan) * inv_c2;
  }
  return out;
}

std::vector<double> hessian_shift_sq(std::span<const double> f, double a,
                                     const Grid& grid, const RadialModel& model,
                                     const PotentialSpec& phi,
                                     const WittenOperator& op, double c) {
  auto out = hessian_radial_sq(f, grid, model, c);
  const auto lf = op.apply(f);
  const auto fr = radial_derivative(f, grid);
  const int N = static_cast<int>(f.size());
  const double na2 = model.n * a * a;
  for (int i = 0; i < N; ++i) {
    const double lap = lf[i] + phi.dr(grid.r[i], op.t) * fr[i] / c;
    out[i] += 2.0 * a * lap + na2;
  }
  return out;
}

double quadrature(std::span<const double> values,
                  const MeasureWeights& weights) {
  if (values.size() != weights.w.size())
    throw std::invalid_argument("quadrature length mismatch");
  double s = 0.0;
  for (size_t i = 0; i < values.size(); ++i) s += values[i] * weights.w[i];
  return s;
}

}  // namespace wlab
