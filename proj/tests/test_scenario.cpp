#include <doctest.h>

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "wlab/scenario.hpp"

using namespace wlab;
using nlohmann::json;

namespace {

const char* kSmallScenario = R"(
[scenario]
label = tiny

[model]
kind = circle
N = 64

[potential]
preset = zero

[flow]
name = static

[initial]
kind = eigen_perturbation
mode = 1
amplitude = 0.5

[solve]
dt = 1e-2
horizon = 0.3
output_start = 0.1
output_end = 0.3
output_count = 3

[functionals]
list =

[tolerances]
c1 = 40
c2 = 40

[monitor:ham]
check = hamilton
K = 0
)";

std::string source_path(const std::string& rel) {
  return std::string(WLAB_SOURCE_DIR) + "/" + rel;
}

// Structural check of a json value against the shipped schema notation:
// objects list required keys ("?" prefix marks optional ones), arrays are
// ["array", element-spec], leaves are "type" or "type|type".
bool matches_schema(const json& value, const json& spec, std::string* err) {
  if (spec.is_string()) {
    const std::string types = spec.get<std::string>();
    std::istringstream in(types);
    std::string t;
    while (std::getline(in, t, '|')) {
      if (t == "number" && value.is_number()) return true;
      if (t == "integer" && value.is_number_integer()) return true;
      if (t == "string" && value.is_string()) return true;
      if (t == "boolean" && value.is_boolean()) return true;
      if (t == "null" && value.is_null()) return true;
      if (t == "object" && value.is_object()) return true;
    }
    *err = "value " + value.dump() + " does not match " + types;
    return false;
  }
  if (spec.is_array()) {
    if (!value.is_array()) {
      *err = "expected array";
      return false;
    }
    for (const auto& item : value)
      if (!matches_schema(item, spec[1], err)) return false;
    return true;
  }
  if (!value.is_object()) {
    *err = "expected object";
    return false;
  }
  for (auto it = spec.begin(); it != spec.end(); ++it) {
    std::string key = it.key();
    const bool optional = !key.empty() && key[0] == '?';
    if (optional) key = key.substr(1);
    if (!value.contains(key)) {
      if (optional) continue;
      *err = "missing key " + key;
      return false;
    }
    if (!matches_schema(value.at(key), it.value(), err)) {
      *err = key + ": " + *err;
      return false;
    }
  }
  return true;
}

}  // namespace

TEST_SUITE_BEGIN("scenario");

TEST_CASE("config parsing and defaults") {
  auto c = ScenarioConfig::parse(kSmallScenario);
  CHECK(c.label == "tiny");
  CHECK(c.kind == ModelKind::circle);
  CHECK(c.n == 1);
  CHECK(c.N == 64);
  CHECK(c.monitors.size() == 1);
  CHECK(c.monitors[0].check == "hamilton");
  CHECK(c.monitors[0].label == "ham");
}

TEST_CASE("config rejections carry the offending path") {
  // m below the topological dimension
  std::string bad = kSmallScenario;
  bad += "\n[functionals]\nlist = w_m\nm = 0.5\n";
  try {
    ScenarioConfig::parse(bad);
    FAIL("expected rejection");
  } catch (const config_error& e) {
    CHECK(std::string(e.what()).find("m >= n") != std::string::npos);
  }

  CHECK_THROWS_AS(ScenarioConfig::parse("[model]\nkind = dodecahedron\n"),
                  config_error);
  CHECK_THROWS_AS(ScenarioConfig::parse("key_outside_section = 1\n"),
                  config_error);
  CHECK_THROWS_AS(
      ScenarioConfig::parse("[model]\nkind = euclidean\nn = 2\n"),
      config_error);  // r_max required

  std::string badmon = kSmallScenario;
  badmon += "\n[monitor:x]\ncheck = frobnicate\n";
  CHECK_THROWS_AS(ScenarioConfig::parse(badmon), config_error);

  // semigroup entropies on a moving flow need the frozen measure
  std::string flowbad = kSmallScenario;
  flowbad += "\n[flow]\nname = exponential\nlambda = 0.5\n";
  flowbad += "[monitor:l]\ncheck = lsi\nK = 0\n";
  CHECK_THROWS_AS(ScenarioConfig::parse(flowbad), config_error);
}

TEST_CASE("shipped configs parse") {
  for (const char* name :
       {"scenarios/euclid_gaussian.cfg", "scenarios/s2_kernel.cfg",
        "scenarios/hyperbolic_kernel.cfg", "scenarios/shrinking_sphere.cfg",
        "scenarios/neg_sphere_rlsi.cfg"}) {
    auto c = ScenarioConfig::parse_file(source_path(name));
    CHECK(!c.label.empty());
  }
}

TEST_CASE("artifacts are deterministic and carry the fixed header") {
  auto c = ScenarioConfig::parse(kSmallScenario);
  auto a1 = run_scenario(c);
  auto a2 = run_scenario(c);
  CHECK(a1.series_csv == a2.series_csv);
  CHECK(a1.report_json == a2.report_json);
  const std::string header = a1.series_csv.substr(0, a1.series_csv.find('\n'));
  CHECK(header ==
        "t,H,fisher,H_m,W_m,dWm_fd,dWm_rhs,H_K,W_K,dWK_fd,dWK_rhs,H_mK,W_mK,"
        "dWmK_fd,dWmK_rhs,W_tilde,dWt_fd,dWt_rhs,dHK_fd,dHK_formula,"
        "margin:ham");
  // LF line endings only
  CHECK(a1.series_csv.find('\r') == std::string::npos);
}

TEST_CASE("report validates against the shipped schema") {
  auto c = ScenarioConfig::parse(kSmallScenario);
  auto art = run_scenario(c);
  std::ifstream in(source_path("docs/report_schema.json"));
  REQUIRE(in.good());
  json schema = json::parse(in);
  json report = json::parse(art.report_json);
  std::string err;
  const bool ok = matches_schema(report, schema, &err);
  INFO(err);
  CHECK(ok);
}

TEST_CASE("eigenmode oracle reports second-order convergence") {
  auto c = ScenarioConfig::parse(kSmallScenario);
  c.oracle_eigenmode = true;
  c.dt = 4e-3;
  auto art = run_scenario(c, "", 2);
  REQUIRE(art.oracle_errors.size() == 3);
  REQUIRE(art.oracle_orders.size() == 2);
  for (double order : art.oracle_orders) CHECK(order >= 1.8);
}

TEST_CASE("a verified-premise violation forced by a zero tolerance exits 2") {
  auto c = ScenarioConfig::parse_file(
      source_path("scenarios/euclid_gaussian.cfg"));
  c.N = 200;
  c.output_count = 3;
  c.monitors.resize(1);  // keep the sharp li_yau monitor only
  c.monitors[0].tol_override = 1e-12;
  auto art = run_scenario(c);
  CHECK(art.exit_code == 2);
  CHECK(art.monitors[0].verdict == "violated");
}

TEST_CASE("catalog listing names the functionals and flows") {
  const std::string text = list_catalog(false);
  CHECK(text.find("w_m") != std::string::npos);
  CHECK(text.find("lsi") != std::string::npos);
  CHECK(text.find("shrinking_sphere") != std::string::npos);
  CHECK(text.find("Ricci flow on the round sphere") != std::string::npos);
  const std::string js = list_catalog(true);
  auto parsed = json::parse(js);
  CHECK(parsed.contains("monitors"));
  CHECK(parsed["flows"].contains("shrinking_sphere"));
}

TEST_CASE("calibrate suggests tolerance constants") {
  auto c = ScenarioConfig::parse(kSmallScenario);
  c.N = 128;
  c.functionals.w_m = true;
  c.functionals.m = 1.0;
  c.initial.kind = InitialKind::kernel_burnin;
  c.initial.t0 = 0.1;
  c.initial.center = kPi;
  c.monitors.clear();
  auto res = calibrate(c);
  CHECK(res.c2_per_identity.count("w_m") == 1);
  CHECK(res.c2_per_identity.at("w_m") > 0.0);
  CHECK(res.summary.find("suggest") != std::string::npos);
}

TEST_SUITE_END();
