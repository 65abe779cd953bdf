#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "wlab/monitors.hpp"

namespace wlab {

struct config_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct MonitorConfig {
  std::string label;
  std::string check;    // li_yau | hamilton | lyh | second_order | lsi | rlsi |
                        // cor1 | cor2
  std::string variant;  // check-specific
  double alpha = 1.0;
  double m = 2.0;
  double K = 0.0;
  double delta = 1.0;
  bool negative_control = false;
  std::optional<double> tol_override;
};

struct FunctionalConfig {
  bool w_m = false;
  bool w_k = false;
  bool w_mk = false;
  bool w_tilde = false;
  double m = 2.0;
  double K_mk = 0.0;   // W_{m,K} and W_tilde deformation
  double K_wk = 0.0;   // semigroup entropy deformation
  double gauge_offset = 0.0;
  DkVariant dk_variant = DkVariant::derivation;
  DissipationMode wm_mode = DissipationMode::gradient_formula;
  // Per-identity C2 overrides for the identity-residual tolerances.
  std::map<std::string, double> c2_override;
};

struct ScenarioConfig {
  std::string label = "scenario";

  // model
  ModelKind kind = ModelKind::sphere;
  int n = 2;
  double r_max = kPi;
  int N = 400;

  // potential
  std::string potential = "zero";
  double potential_a = 1.0;

  // flow
  FlowName flow = FlowName::static_flow;
  double lambda = 0.0;
  Coupling coupling = Coupling::independent;

  InitialSpec initial;

  // solve
  double dt = 1e-3;
  double horizon = 1.0;
  Scheme scheme = Scheme::crank_nicolson;
  double output_start = 0.1;
  double output_end = -1.0;  // < 0: horizon
  int output_count = 19;

  FunctionalConfig functionals;
  std::vector<MonitorConfig> monitors;
  STensorVariant s_sign_variant = STensorVariant::lemma;

  // tolerances: tau(dr, dt) = C1 dr^2 + C2 dt^2 (identity checks use the
  // output spacing for the time term)
  double c1 = 2.0;
  double c2 = 2.0;
  double eps_cond = 1e-9;
  double pole_band = -1.0;
  double boundary_band = 0.0;

  int refine_levels = 0;
  bool oracle_eigenmode = false;  // closed-form reference for convergence study
  unsigned long long seed = 0x5EED;  // randomized structure self-check

  static ScenarioConfig parse(const std::string& text,
                              const std::string& origin = "<string>");
  static ScenarioConfig parse_file(const std::string& path);
  void validate() const;
};

struct IdentityResidual {
  std::string name;
  double max_residual = 0.0;
  double tolerance = 0.0;
  bool pass = true;
};

struct ScenarioArtifacts {
  int exit_code = 0;
  std::vector<double> times;  // shifted output times
  std::vector<std::pair<std::string, std::vector<double>>> series;
  std::vector<ViolationReport> monitors;
  std::vector<IdentityResidual> identities;
  Trajectory trajectory;
  double t_shift = 0.0;
  double dr = 0.0;
  // refinement study
  std::vector<double> oracle_errors;   // per level
  std::vector<double> oracle_orders;   // log2 ratios
  std::vector<std::vector<IdentityResidual>> identities_by_level;
  std::string report_json;
  std::string series_csv;
};

// Runs the configured pipeline; when out_dir is non-empty writes series.csv,
// report.json and refine/level<k>/ artifacts there.  Exit codes: 0 all
// verified-premise monitors hold (possibly within tolerance), 2 persistent
// violation on a verified premise, 3 config or geometry error (thrown as
// config_error / geometry_error by this call).
ScenarioArtifacts run_scenario(const ScenarioConfig& config,
                               const std::string& out_dir = "",
                               int refine_levels = -1);

std::string list_catalog(bool as_json);

struct CalibrationResult {
  double c1 = 0.0;
  double c2 = 0.0;
  std::map<std::string, double> c2_per_identity;
  std::string summary;
};

// Richardson-style calibration of the tolerance constants against one
// refinement level.
CalibrationResult calibrate(const ScenarioConfig& config);

// 17-significant-digit float formatting shared by every artifact writer.
std::string fmt17(double v);

}  // namespace wlab
