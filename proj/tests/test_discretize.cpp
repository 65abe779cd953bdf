#include <doctest.h>

#include <cmath>
#include <random>

#include "wlab/discretize.hpp"

using namespace wlab;

namespace {

FlowSpec static_flow(const RadialModel& m, const PotentialSpec& phi) {
  return catalog(FlowName::static_flow, m, phi, Coupling::independent);
}

double dirichlet_pairing(const WittenOperator& op, std::span<const double> u,
                         std::span<const double> v) {
  // -sum over interfaces kappa (du)(dv)
  const int N = op.size();
  double s = 0.0;
  const int ifaces = op.periodic ? N : N - 1;
  for (int i = 0; i < ifaces; ++i) {
    const int j = (i + 1) % N;
    s -= op.kappa[i] * (u[j] - u[i]) * (v[j] - v[i]);
  }
  return s;
}

}  // namespace

TEST_SUITE_BEGIN("discretize");

TEST_CASE("constants are annihilated exactly and divergence integrates to 0") {
  auto s2 = RadialModel::sphere(2);
  auto flow = static_flow(s2, PotentialSpec::cosine(0.4));
  auto grid = Grid::make(s2, 128);
  auto op = assemble(s2, flow.phi, flow, grid, 0.0);
  std::vector<double> c(grid.size(), 5.0);
  for (double v : op.apply(c)) CHECK(v == 0.0);

  std::vector<double> u(grid.size());
  for (int i = 0; i < grid.size(); ++i) u[i] = std::cos(3.0 * grid.r[i]) + 2.0;
  const auto lu = op.apply(u);
  double total = 0.0;
  for (int i = 0; i < grid.size(); ++i) total += lu[i] * op.weights.w[i];
  CHECK(std::abs(total) < 1e-13);
}

TEST_CASE("self-adjointness and Dirichlet form are exact on random pairs") {
  std::mt19937_64 rng(0xC0FFEE);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (bool use_circle : {true, false}) {
    auto model = use_circle ? RadialModel::circle()
                            : RadialModel::sphere(2);
    auto phi = use_circle ? PotentialSpec::cosine(0.5)
                          : PotentialSpec::quadratic(0.3);
    auto flow = static_flow(model, phi);
    auto grid = Grid::make(model, 100);
    auto op = assemble(model, flow.phi, flow, grid, 0.0);
    for (int trial = 0; trial < 100; ++trial) {
      std::vector<double> u(grid.size()), v(grid.size());
      double nu = 0.0, nv = 0.0;
      for (int i = 0; i < grid.size(); ++i) {
        u[i] = dist(rng);
        v[i] = dist(rng);
        nu += u[i] * u[i];
        nv += v[i] * v[i];
      }
      const auto lu = op.apply(u);
      const auto lv = op.apply(v);
      double a = 0.0, b = 0.0;
      for (int i = 0; i < grid.size(); ++i) {
        a += lu[i] * v[i] * op.weights.w[i];
        b += u[i] * lv[i] * op.weights.w[i];
      }
      const double pairing = dirichlet_pairing(op, u, v);
      const double scale =
          std::sqrt(nu * nv) * (1.0 / op.cn_positivity_dt());
      CHECK(std::abs(a - b) <= 1e-12 * scale);
      CHECK(std::abs(a - pairing) <= 1e-11 * scale);
      if (trial == 0) {
        // <-Lu, u> = sum kappa (du)^2 >= 0 exactly
        const double quad = -dirichlet_pairing(op, u, u);
        double lhs = 0.0;
        for (int i = 0; i < grid.size(); ++i)
          lhs -= lu[i] * u[i] * op.weights.w[i];
        CHECK(lhs == doctest::Approx(quad).epsilon(1e-12));
        CHECK(quad >= 0.0);
      }
    }
  }
}

TEST_CASE("circle consistency: cos r with the Taylor remainder bound") {
  auto circle = RadialModel::circle();
  auto flow = static_flow(circle, PotentialSpec::zero());
  double prev_err = 0.0;
  for (int N : {256, 512}) {
    auto grid = Grid::make(circle, N);
    auto op = assemble(circle, flow.phi, flow, grid, 0.0);
    std::vector<double> u(N);
    for (int i = 0; i < N; ++i) u[i] = std::cos(grid.r[i]);
    const auto lu = op.apply(u);
    double err = 0.0;
    for (int i = 0; i < N; ++i)
      err = std::max(err, std::abs(lu[i] + std::cos(grid.r[i])));
    // remainder bound (dr^2/12) sup|u''''| with sup|u''''| = 1
    CHECK(err <= grid.dr * grid.dr / 12.0 * 1.0001);
    if (prev_err > 0.0) CHECK(prev_err / err >= 3.9);
    prev_err = err;
  }
}

TEST_CASE("weighted flat ball: L r^2 = 4 - 2 r^2 interiorly") {
  auto e2 = RadialModel::euclidean(2, 3.0);
  auto flow = static_flow(e2, PotentialSpec::quadratic(1.0));
  auto grid = Grid::make(e2, 400);
  auto op = assemble(e2, flow.phi, flow, grid, 0.0);
  std::vector<double> u(grid.size());
  for (int i = 0; i < grid.size(); ++i) u[i] = grid.r[i] * grid.r[i];
  const auto lu = op.apply(u);
  for (int i = 2; i < grid.size() - 2; ++i) {
    const double r = grid.r[i];
    CHECK(lu[i] == doctest::Approx(4.0 - 2.0 * r * r).epsilon(5e-4));
  }
}

TEST_CASE("quadrature integrates the sphere area to 1e-6") {
  auto s2 = RadialModel::sphere(2);
  auto flow = static_flow(s2, PotentialSpec::zero());
  auto grid = Grid::make(s2, 400);
  auto w = build_weights(s2, flow.phi, flow, grid, 0.0);
  std::vector<double> one(grid.size(), 1.0);
  CHECK(std::abs(quadrature(one, w) - 4.0 * kPi) < 1e-6);
  std::vector<double> zero(grid.size(), 0.0);
  CHECK(quadrature(zero, w) == 0.0);
}

TEST_CASE("gradient squared") {
  auto circle = RadialModel::circle();
  auto grid = Grid::make(circle, 256);
  std::vector<double> c(grid.size(), 3.3), s(grid.size());
  for (int i = 0; i < grid.size(); ++i) s[i] = std::sin(grid.r[i]);
  for (double v : grad_sq(c, grid, 1.0)) CHECK(v == 0.0);
  const auto gs = grad_sq(s, grid, 1.0);
  for (int i = 0; i < grid.size(); ++i) {
    const double want = std::cos(grid.r[i]) * std::cos(grid.r[i]);
    CHECK(std::abs(gs[i] - want) < 2.0 * grid.dr * grid.dr);
  }
  // metric scaling: |grad r|^2 = 1/c on the flat model
  auto e2 = RadialModel::euclidean(2, 3.0);
  auto ge = Grid::make(e2, 64);
  std::vector<double> lin(ge.size());
  for (int i = 0; i < ge.size(); ++i) lin[i] = ge.r[i];
  const double c_t = std::exp(-2.0 * 0.5 * 1.0);  // e^{-2 lambda t}
  const auto g2 = grad_sq(lin, ge, 1.0 / c_t);
  for (int i = 1; i < ge.size() - 1; ++i)
    CHECK(g2[i] == doctest::Approx(c_t).epsilon(1e-12));
}

TEST_CASE("radial hessian squared") {
  // Gaussian rigidity: f = r^2/(4t) has Hess f = g/(2t) exactly on the plane
  auto e2 = RadialModel::euclidean(2, 4.0);
  auto flow = static_flow(e2, PotentialSpec::zero());
  auto grid = Grid::make(e2, 200);
  auto op = assemble(e2, flow.phi, flow, grid, 0.0);
  const double t = 0.3;
  std::vector<double> f(grid.size());
  for (int i = 0; i < grid.size(); ++i)
    f[i] = grid.r[i] * grid.r[i] / (4.0 * t);
  const auto shifted =
      hessian_shift_sq(f, -0.5 / t, grid, e2, flow.phi, op, 1.0);
  for (int i = 1; i < grid.size() - 1; ++i)
    CHECK(std::abs(shifted[i]) < 5.0 * grid.dr * grid.dr);

  std::vector<double> c(grid.size(), 7.0);
  for (double v : hessian_radial_sq(c, grid, e2, 1.0)) CHECK(v == 0.0);

  // f = cos r on S^2 at r = pi/2: f'' = 0 and (cot r) f' = 0
  auto s2 = RadialModel::sphere(2);
  auto gs = Grid::make(s2, 201);  // odd count puts a node at pi/2
  std::vector<double> fc(gs.size());
  for (int i = 0; i < gs.size(); ++i) fc[i] = std::cos(gs.r[i]);
  const auto hs = hessian_radial_sq(fc, gs, s2, 1.0);
  const int mid = gs.size() / 2;
  CHECK(gs.r[mid] == doctest::Approx(kPi / 2.0));
  CHECK(std::abs(hs[mid]) < 1e-6);
}

TEST_CASE("grid construction") {
  auto circle = RadialModel::circle();
  auto g = Grid::make(circle, 64);
  CHECK(g.periodic);
  CHECK(g.dr == doctest::Approx(2.0 * kPi / 64));
  CHECK(g.r.back() < 2.0 * kPi);
  CHECK_THROWS_AS(Grid::make(circle, 8), std::invalid_argument);

  auto s2 = RadialModel::sphere(2);
  auto gs = Grid::make(s2, 101);
  CHECK(gs.r.front() == 0.0);
  CHECK(gs.r.back() == doctest::Approx(kPi));
}

TEST_SUITE_END();
