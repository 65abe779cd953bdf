#include <doctest.h>

#include <cmath>

#include "wlab/discretize.hpp"
#include "wlab/flows.hpp"

using namespace wlab;

TEST_SUITE_BEGIN("flows");

TEST_CASE("catalog basics") {
  auto s2 = RadialModel::sphere(2);
  auto st = catalog(FlowName::static_flow, s2, PotentialSpec::zero(),
                    Coupling::independent);
  CHECK(st.c(0.7) == 1.0);
  CHECK(st.h_eigen(0.7) == 0.0);

  auto sh = catalog(FlowName::shrinking_sphere, s2, PotentialSpec::zero(),
                    Coupling::measure_preserving);
  CHECK(sh.c(0.2) == doctest::Approx(0.6).epsilon(1e-15));
  // measure-preserving coupling adds (n/2) log c to phi
  CHECK(sh.phi.phi(1.0, 0.2) == doctest::Approx(std::log(0.6)).epsilon(1e-14));
  CHECK(sh.extinction == doctest::Approx(0.5));

  FlowParams fp;
  fp.lambda = 0.5;
  auto ex = catalog(FlowName::exponential, s2, PotentialSpec::zero(),
                    Coupling::independent, fp);
  CHECK(ex.c(1.0) == doctest::Approx(std::exp(1.0)).epsilon(1e-15));
  CHECK(ex.h_eigen(1.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(ex.tr_h(1.0, 2) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("horizon past extinction is rejected with the bound in the message") {
  auto s2 = RadialModel::sphere(2);
  auto sh = catalog(FlowName::shrinking_sphere, s2, PotentialSpec::zero(),
                    Coupling::measure_preserving);
  try {
    sh.validate(0.6);
    FAIL("expected rejection");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("0.5") != std::string::npos);
  }
}

TEST_CASE("time reparametrization closed forms") {
  auto s2 = RadialModel::sphere(2);
  auto st = catalog(FlowName::static_flow, s2, PotentialSpec::zero(),
                    Coupling::independent);
  CHECK(time_reparametrization(st, 0.7) == doctest::Approx(0.7));

  FlowParams fp;
  fp.lambda = 0.5;
  auto ex = catalog(FlowName::exponential, s2, PotentialSpec::zero(),
                    Coupling::independent, fp);
  CHECK(time_reparametrization(ex, 1.0) ==
        doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-14));

  auto sh = catalog(FlowName::shrinking_sphere, s2, PotentialSpec::zero(),
                    Coupling::measure_preserving);
  CHECK(time_reparametrization(sh, 0.2) ==
        doctest::Approx(-0.5 * std::log(0.6)).epsilon(1e-14));

  // custom flows integrate c^{-1} numerically
  FlowParams fc;
  fc.c = [](double t) { return 1.0 + t; };
  fc.cdot = [](double) { return 1.0; };
  auto cu = catalog(FlowName::custom, s2, PotentialSpec::zero(),
                    Coupling::independent, fc);
  CHECK(time_reparametrization(cu, 1.0) ==
        doctest::Approx(std::log(2.0)).epsilon(1e-10));
}

TEST_CASE("measure-preserving coupling freezes the discrete measure") {
  auto s2 = RadialModel::sphere(2);
  auto flow = catalog(FlowName::shrinking_sphere, s2, PotentialSpec::cosine(0.3),
                      Coupling::measure_preserving);
  auto grid = Grid::make(s2, 200);
  const double w0 = build_weights(s2, flow.phi, flow, grid, 0.0).total();
  const double w1 = build_weights(s2, flow.phi, flow, grid, 0.2).total();
  CHECK(std::abs(w1 - w0) / w0 < 1e-12);
}

TEST_CASE("ricci flow exactness eigenvalue-wise") {
  auto s3 = RadialModel::sphere(3);
  auto flow = catalog(FlowName::shrinking_sphere, s3, PotentialSpec::zero(),
                      Coupling::measure_preserving);
  for (double t : {0.0, 0.05, 0.1}) {
    for (double r : {0.4, 1.2, 2.6}) {
      const auto cs = bakry_emery(s3, flow.phi, kDimInf, r, t, flow.c(t));
      CHECK(std::abs(flow.h_eigen(t) + cs.ricL_rr) < 1e-12);
      CHECK(std::abs(flow.h_eigen(t) + cs.ricL_tan) < 1e-12);
    }
  }
}

TEST_SUITE_END();
