#include <doctest.h>

#include <cmath>

#include "wlab/heatflow.hpp"

using namespace wlab;

namespace {

FlowSpec static_flow(const RadialModel& m, const PotentialSpec& phi) {
  return catalog(FlowName::static_flow, m, phi, Coupling::independent);
}

HeatState state_from(const RadialModel& m, const FlowSpec& flow,
                     const Grid& grid, std::vector<double> u) {
  HeatState s;
  s.u = std::move(u);
  s.t = 0.0;
  s.weights = build_weights(m, flow.phi, flow, grid, 0.0);
  s.mass = quadrature(s.u, s.weights);
  return s;
}

}  // namespace

TEST_SUITE_BEGIN("heatflow");

TEST_CASE("constants are stationary with exact mass") {
  auto s2 = RadialModel::sphere(2);
  auto flow = static_flow(s2, PotentialSpec::zero());
  auto grid = Grid::make(s2, 64);
  auto st = state_from(s2, flow, grid, std::vector<double>(grid.size(), 2.5));
  const double m0 = st.mass;
  for (Scheme sch : {Scheme::crank_nicolson, Scheme::backward_euler}) {
    auto next = step(st, s2, flow.phi, flow, grid, 1e-2, sch);
    for (double v : next.u) CHECK(v == doctest::Approx(2.5).epsilon(1e-14));
    CHECK(next.mass == doctest::Approx(m0).epsilon(1e-14));
  }
}

TEST_CASE("circle eigenmode decay matches the spectral rate to 5e-7") {
  auto circle = RadialModel::circle();
  auto flow = static_flow(circle, PotentialSpec::zero());
  auto grid = Grid::make(circle, 256);
  std::vector<double> u0(grid.size());
  for (int i = 0; i < grid.size(); ++i)
    u0[i] = 1.0 + 0.5 * std::cos(grid.r[i]);
  SolveParams solve{1e-3, 0.5, Scheme::crank_nicolson, {0.5}};
  auto traj = run(circle, flow.phi, flow, grid,
                  state_from(circle, flow, grid, u0), solve);
  const auto& u = traj.states.back().u;
  double err = 0.0;
  for (int i = 0; i < grid.size(); ++i) {
    const double want = 1.0 + 0.5 * std::exp(-0.5) * std::cos(grid.r[i]);
    err = std::max(err, std::abs(u[i] - want));
  }
  // dominated by the discrete symbol defect: amp * t * (dr^2/12) * e^{-t}
  const double model_err =
      0.5 * 0.5 * grid.dr * grid.dr / 12.0 * std::exp(-0.5);
  CHECK(err <= 1.2 * model_err);
  CHECK(err >= 0.8 * model_err);
  CHECK(err <= 5e-4);
}

TEST_CASE("sphere l=1 mode: value at the pole after t=0.5") {
  auto s2 = RadialModel::sphere(2);
  auto flow = static_flow(s2, PotentialSpec::zero());
  auto grid = Grid::make(s2, 400);
  std::vector<double> u0(grid.size());
  for (int i = 0; i < grid.size(); ++i)
    u0[i] = 1.0 + 0.5 * std::cos(grid.r[i]);
  SolveParams solve{1e-3, 0.5, Scheme::crank_nicolson, {0.5}};
  auto traj = run(s2, flow.phi, flow, grid, state_from(s2, flow, grid, u0),
                  solve);
  // eigenvalue l(l+1) = 2
  CHECK(traj.states.back().u.front() ==
        doctest::Approx(1.0 + 0.5 * std::exp(-1.0)).epsilon(2e-6));
  // spectral reference agrees everywhere
  const auto ref = spectral_reference(s2, grid, u0, 0.5, 16);
  double err = 0.0;
  for (int i = 0; i < grid.size(); ++i)
    err = std::max(err, std::abs(traj.states.back().u[i] - ref[i]));
  CHECK(err < 5e-5);
}

TEST_CASE("spectral reference closed forms") {
  auto circle = RadialModel::circle();
  auto gc = Grid::make(circle, 128);
  std::vector<double> one(gc.size(), 1.0);
  const auto rc = spectral_reference(circle, gc, one, 0.37, 8);
  for (double v : rc) CHECK(v == doctest::Approx(1.0).epsilon(1e-11));

  auto iv = RadialModel::interval(kPi);
  auto gi = Grid::make(iv, 200);
  std::vector<double> u0(gi.size());
  for (int i = 0; i < gi.size(); ++i)
    u0[i] = 1.0 + 0.1 * std::cos(2.0 * gi.r[i]);
  const auto ri = spectral_reference(iv, gi, u0, 0.25, 8);
  for (int i = 0; i < gi.size(); ++i) {
    const double want =
        1.0 + 0.1 * std::exp(-1.0) * std::cos(2.0 * gi.r[i]);
    CHECK(ri[i] == doctest::Approx(want).epsilon(1e-7));
  }

  auto h3 = RadialModel::hyperbolic(3);
  auto gh = Grid::make(h3, 64);
  std::vector<double> uh(gh.size(), 1.0);
  CHECK_THROWS_AS(spectral_reference(h3, gh, uh, 0.1, 8),
                  std::invalid_argument);
}

TEST_CASE("mass conservation over many CN steps") {
  auto s2 = RadialModel::sphere(2);
  auto flow = static_flow(s2, PotentialSpec::zero());
  auto grid = Grid::make(s2, 200);
  std::vector<double> u0(grid.size());
  for (int i = 0; i < grid.size(); ++i)
    u0[i] = 1.0 + 0.5 * std::cos(grid.r[i]);
  SolveParams solve{1e-3, 2.0, Scheme::crank_nicolson, {2.0}};
  auto traj = run(s2, flow.phi, flow, grid, state_from(s2, flow, grid, u0),
                  solve);
  CHECK(traj.max_mass_drift <= 1e-10);
}

TEST_CASE("backward Euler is positivity preserving and contractive") {
  auto circle = RadialModel::circle();
  auto flow = static_flow(circle, PotentialSpec::zero());
  auto grid = Grid::make(circle, 64);
  std::vector<double> u0(grid.size(), 1e-12);
  u0[10] = 1.0;  // near-delta spike
  auto st = state_from(circle, flow, grid, u0);
  double sup = st.max_u(), inf = st.min_u();
  for (int k = 0; k < 20; ++k) {
    st = step(st, circle, flow.phi, flow, grid, 0.05,
              Scheme::backward_euler);
    CHECK(st.min_u() > 0.0);
    CHECK(st.max_u() <= sup * (1.0 + 1e-12));
    CHECK(st.min_u() >= inf * (1.0 - 1e-12));
    sup = st.max_u();
    inf = st.min_u();
  }
}

TEST_CASE("CN falls back to BE when positivity would break") {
  auto circle = RadialModel::circle();
  auto flow = static_flow(circle, PotentialSpec::zero());
  auto grid = Grid::make(circle, 128);
  std::vector<double> u0(grid.size(), 1e-10);
  u0[5] = 1.0;
  auto st = state_from(circle, flow, grid, u0);
  StepDiag diag;
  auto next = step(st, circle, flow.phi, flow, grid, 0.5,
                   Scheme::crank_nicolson, &diag);
  CHECK(diag.be_fallback);
  CHECK(next.min_u() > 0.0);
}

TEST_CASE("make_initial: uniform and eigenmode") {
  auto s2 = RadialModel::sphere(2);
  auto flow = static_flow(s2, PotentialSpec::zero());
  auto grid = Grid::make(s2, 400);
  InitialSpec spec;
  spec.kind = InitialKind::uniform;
  auto init = make_initial(spec, s2, flow.phi, flow, grid);
  CHECK(init.state.mass == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(init.state.u.front() ==
        doctest::Approx(1.0 / (4.0 * kPi)).epsilon(1e-6));

  spec.kind = InitialKind::eigen_perturbation;
  spec.mode = 1;
  spec.amplitude = 0.5;
  auto mode = make_initial(spec, s2, flow.phi, flow, grid);
  CHECK(mode.state.u.front() == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(mode.state.u.back() == doctest::Approx(0.5).epsilon(1e-12));

  spec.amplitude = 1.5;  // would cross zero
  CHECK_THROWS_AS(make_initial(spec, s2, flow.phi, flow, grid),
                  std::invalid_argument);
}

TEST_CASE("kernel burn-in on the plane matches the exact kernel") {
  auto e2 = RadialModel::euclidean(2, 5.0);
  auto flow = static_flow(e2, PotentialSpec::zero());
  auto grid = Grid::make(e2, 400);
  InitialSpec spec;
  spec.kind = InitialKind::kernel_burnin;
  spec.t0 = 0.01;
  auto init = make_initial(spec, e2, flow.phi, flow, grid);
  CHECK(init.closed_form_kernel);
  CHECK(init.t_shift == doctest::Approx(0.01));
  CHECK(init.state.mass == doctest::Approx(1.0).epsilon(1e-12));
  double worst = 0.0;
  for (int i = 0; i < grid.size(); ++i) {
    const double r = grid.r[i];
    if (r > 5.0 * std::sqrt(spec.t0)) break;
    const double want =
        std::exp(-r * r / (4.0 * spec.t0)) / (4.0 * kPi * spec.t0);
    worst = std::max(worst, std::abs(init.state.u[i] - want) / want);
  }
  CHECK(worst <= 1e-3);
  // normalization is checked by an independent trapezoid rule
  double trap = 0.0;
  for (int i = 0; i + 1 < grid.size(); ++i) {
    auto rho = [&](int j) {
      return 2.0 * kPi * grid.r[j] * init.state.u[j];
    };
    trap += 0.5 * (rho(i) + rho(i + 1)) * grid.dr;
  }
  CHECK(trap == doctest::Approx(1.0).epsilon(2e-3));  // trapezoid truncation

  // under-resolved burn-in is rejected
  InitialSpec tiny = spec;
  tiny.t0 = 1e-6;
  auto s2 = RadialModel::sphere(2);
  auto fs = static_flow(s2, PotentialSpec::zero());
  auto gs = Grid::make(s2, 100);
  CHECK_THROWS_AS(make_initial(tiny, s2, fs.phi, fs, gs),
                  std::invalid_argument);
}

TEST_CASE("burn-in bump on the sphere approximates the kernel profile") {
  auto s2 = RadialModel::sphere(2);
  auto flow = static_flow(s2, PotentialSpec::zero());
  auto grid = Grid::make(s2, 400);
  InitialSpec spec;
  spec.kind = InitialKind::kernel_burnin;
  spec.t0 = 0.02;
  auto init = make_initial(spec, s2, flow.phi, flow, grid);
  CHECK_FALSE(init.closed_form_kernel);
  CHECK(init.state.mass == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(init.state.min_u() > 0.0);
  // peak height within a few percent of the flat kernel at t0
  const double flat_peak = 1.0 / (4.0 * kPi * spec.t0);
  CHECK(init.state.u.front() ==
        doctest::Approx(flat_peak).epsilon(0.08));
}

TEST_CASE("homothety consistency: flow run equals static run at tau(t)") {
  for (bool use_sphere : {false, true}) {
    auto model = use_sphere ? RadialModel::sphere(2) : RadialModel::circle();
    FlowParams fp;
    fp.lambda = 0.5;
    auto flow = catalog(FlowName::exponential, model, PotentialSpec::zero(),
                        Coupling::independent, fp);
    auto flow0 = static_flow(model, PotentialSpec::zero());
    auto grid = Grid::make(model, 256);
    std::vector<double> u0(grid.size());
    for (int i = 0; i < grid.size(); ++i)
      u0[i] = 1.0 + 0.5 * std::cos(grid.r[i]);

    SolveParams sflow{1e-3, 1.0, Scheme::crank_nicolson, {1.0}};
    auto traj = run(model, flow.phi, flow, grid,
                    state_from(model, flow, grid, u0), sflow);

    const double tau = time_reparametrization(flow, 1.0);
    SolveParams sstat{1e-3, tau, Scheme::crank_nicolson, {tau}};
    auto traj0 = run(model, flow0.phi, flow0, grid,
                     state_from(model, flow0, grid, u0), sstat);

    double err = 0.0;
    for (int i = 0; i < grid.size(); ++i)
      err = std::max(err, std::abs(traj.states.back().u[i] -
                                   traj0.states.back().u[i]));
    CHECK(err <= 1e-4);
  }
}

TEST_CASE("trajectory bookkeeping") {
  auto s2 = RadialModel::sphere(2);
  auto flow = static_flow(s2, PotentialSpec::zero());
  auto grid = Grid::make(s2, 64);
  std::vector<double> u0(grid.size());
  for (int i = 0; i < grid.size(); ++i)
    u0[i] = 1.0 + 0.5 * std::cos(grid.r[i]);
  SolveParams solve{1e-2, 0.4, Scheme::crank_nicolson, {0.1, 0.2, 0.4}};
  auto traj = run(s2, flow.phi, flow, grid, state_from(s2, flow, grid, u0),
                  solve);
  REQUIRE(traj.states.size() == 3);
  CHECK(traj.states[0].t == doctest::Approx(0.1));
  CHECK(traj.states[2].t == doctest::Approx(0.4));
  CHECK(traj.sup_u == doctest::Approx(1.5));  // attained at t = 0
  CHECK(traj.cn_fallbacks == 0);
}

TEST_SUITE_END();
