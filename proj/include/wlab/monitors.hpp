#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "wlab/functionals.hpp"

namespace wlab {

// Heat states advanced in lockstep from {f, f log f, |grad f|^2 / f} under
// the same operator sequence; the semigroup-form inequalities compare them.
struct CoevolvedFields {
  std::vector<double> times;
  std::vector<HeatState> f;
  std::vector<HeatState> f_log_f;
  std::vector<HeatState> grad_sq_over_f;
  bool has_grad_field = false;
};

struct CoevolveParams {
  bool with_grad_field = true;
  double dynamic_range_max = 1e8;  // reject once max(|grad f|^2/f)/min f blows up
};

CoevolvedFields coevolve(std::span<const double> f0, const RadialModel& model,
                         const PotentialSpec& phi, const FlowSpec& flow,
                         const Grid& grid, const SolveParams& solve,
                         const CoevolveParams& params = {});

struct PremiseInfo {
  std::string condition;
  double threshold = 0.0;  // the K the condition is checked against
  double m = 0.0;
  double worst_margin = 0.0;
  double worst_r = 0.0;
  double worst_t = 0.0;
  bool holds = false;
  bool checked = false;
};

struct ViolationReport {
  std::string label;
  std::string inequality;
  PremiseInfo premise;
  bool negative_control = false;
  double worst_margin = 0.0;
  double worst_t = 0.0;
  double worst_r = 0.0;
  double tolerance = 0.0;
  std::string verdict;  // holds | holds-within-tolerance | violated
  std::optional<bool> refinement_persistent;
  std::map<std::string, double> extras;
  // Worst margin over nodes at each output time (nan where undefined).
  std::vector<double> margin_series;

  bool violated() const { return verdict == "violated"; }
};

// Shared inputs for the pointwise checks.  d/dt u / u is always evaluated
// spatially as L u / u = L log u + |grad log u|^2; times are burn-in
// shifted.  pole_band and boundary_band trim nodes near regularized poles
// and truncation boundaries.
struct MonitorEnv {
  const RadialModel* model = nullptr;
  const PotentialSpec* phi = nullptr;
  const FlowSpec* flow = nullptr;
  const Grid* grid = nullptr;
  const Trajectory* traj = nullptr;
  const CoevolvedFields* coev = nullptr;
  double t_shift = 0.0;
  double horizon = 1.0;
  double tol = 1e-6;
  double eps_cond = 1e-9;
  double pole_band = -1.0;      // < 0: default 3 dr
  double boundary_band = 0.0;
  bool negative_control = false;
  std::string label;
};

enum class LiYauVariant { static_cd0m, static_cdkm, flow_super_ricci };
enum class LyhVariant { static_cdkm, flow_tensor };
enum class SecondOrderVariant { static_cdkm, flow_super_ricci };
enum class IntegratedVariant { same_time, two_time };

struct LiYauParams {
  LiYauVariant variant = LiYauVariant::static_cd0m;
  double alpha = 1.0;
  double m = 2.0;
  double K = 0.0;
};

struct LyhParams {
  LyhVariant variant = LyhVariant::static_cdkm;
  double m = 2.0;
  double K = 0.0;
  bool alpha_k_auto = true;  // flow variant: derive alpha_K(t) from the tensor
};

struct SecondOrderParams {
  SecondOrderVariant variant = SecondOrderVariant::static_cdkm;
  double m = 2.0;
  double K = 0.0;
  double alpha = 0.5;  // flow variant, in (0,1); forced to 0 when B = 0
};

struct IntegratedParams {
  IntegratedVariant variant = IntegratedVariant::same_time;
  double delta = 1.0;  // same_time
  double m = 2.0;
  double K = 0.0;
  int stride = 8;  // node subsampling for pair enumeration
};

// |grad u|^2/u^2 - alpha du/dt / u against the variant's bound; gamma in the
// flow bound is minimized by golden-section search and reported.
ViolationReport li_yau_check(const MonitorEnv& env, const LiYauParams& p);

// |grad u|^2/u^2 <= 2K/(1-e^{-2Kt}) log(A/u) with A the space-time sup;
// the (1/t + 2K) form is tracked alongside in the extras.
ViolationReport hamilton_gradient_check(const MonitorEnv& env, double K);

// Static: du/dt/u - e^{-2Kt}|grad u|^2/u^2 + e^{2Kt} m/2t >= 0.
// Flow: |grad u|^2/u^2 - e^{2Kt} du/dt/u against the tensor-condition bound.
ViolationReport lyh_check(const MonitorEnv& env, const LyhParams& p);

// Static: Lu/u + |grad u|^2/u^2 <= K/(1-e^{-Kt}) [m + 4 log(A/u)].
// Flow:   ... <= K/((1-alpha)(1-e^{-Kt})) [m + 4 log(A/u) + C t].
ViolationReport second_order_check(const MonitorEnv& env,
                                   const SecondOrderParams& p);

// Log-Sobolev deficit bound and its reversal for co-evolved fields; K is
// signed with the flow convention h + Ric(L) >= -K g.
ViolationReport lsi_check(const MonitorEnv& env, double K);
ViolationReport rlsi_check(const MonitorEnv& env, double K);

ViolationReport integrated_harnack_check(const MonitorEnv& env,
                                         const IntegratedParams& p);

}  // namespace wlab
