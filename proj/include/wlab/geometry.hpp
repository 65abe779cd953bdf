#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace wlab {

inline constexpr double kPi = 3.14159265358979323846;

// m = infinity selects the dimension-free Bakry-Emery tensor Ric(L).
inline constexpr double kDimInf = std::numeric_limits<double>::infinity();

struct geometry_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class ModelKind { euclidean, sphere, hyperbolic, circle, interval };
enum class EndpointKind { pole_regular, reflecting, periodic };

const char* to_string(ModelKind k);

// Rotationally symmetric model manifold with metric dr^2 + psi(r)^2 g_{S^{n-1}}
// on [r_min, r_max].  For n = 1 (circle, interval) the warp plays no role.
struct RadialModel {
  ModelKind kind = ModelKind::euclidean;
  int n = 2;
  double r_min = 0.0;
  double r_max = 1.0;
  EndpointKind left = EndpointKind::pole_regular;
  EndpointKind right = EndpointKind::reflecting;

  std::function<double(double)> psi;    // warp, > 0 on the open interior
  std::function<double(double)> dpsi;   // psi'
  std::function<double(double)> ddpsi;  // psi''

  static RadialModel sphere(int n, double r_min = 0.0, double r_max = kPi);
  static RadialModel euclidean(int n, double r_max);
  static RadialModel hyperbolic(int n, double r_max = 6.0);
  static RadialModel circle(double length = 2.0 * kPi);
  static RadialModel interval(double length = kPi);

  bool periodic() const { return left == EndpointKind::periodic; }
  double length() const { return r_max - r_min; }
  // Volume of the unit (n-1)-sphere; 1 by convention for n = 1.
  double sphere_area() const;
  bool pole_at(double r) const;
  void validate() const;
};

// Potential phi(r, t) with the derivatives the curvature tensors need.
// Presets carry closed-form derivatives; spatially_constant marks phi' == 0,
// which is what licenses m = n.
struct PotentialSpec {
  std::function<double(double, double)> phi;
  std::function<double(double, double)> dr;
  std::function<double(double, double)> drr;
  std::function<double(double, double)> dt;
  std::function<double(double, double)> drt;
  bool spatially_constant = false;
  bool time_constant = true;
  std::string label = "zero";

  static PotentialSpec zero();
  static PotentialSpec quadratic(double a);  // a r^2 / 2
  static PotentialSpec cosine(double a);     // a cos r
  // phi + g(t) with g'(t) supplied; used for measure-preserving coupling.
  PotentialSpec with_time_offset(std::function<double(double)> g,
                                 std::function<double(double)> gdot,
                                 const std::string& suffix) const;
};

// Pointwise curvature/flow data at (r, t), all eigenvalues relative to the
// current metric g(t) = c(t) g0.  Tangential entries are meaningless for
// n = 1.  ricmn_* is defined when m > n or phi is spatially constant.
struct CurvatureSample {
  double r = 0.0;
  double t = 0.0;
  double ric_rr = 0.0, ric_tan = 0.0;
  double hessphi_rr = 0.0, hessphi_tan = 0.0;
  double ricL_rr = 0.0, ricL_tan = 0.0;
  double ricmn_rr = 0.0, ricmn_tan = 0.0;
  double h_rr = 0.0, h_tan = 0.0, tr_h = 0.0;
  double s_r = 0.0;
};

struct FlowSpec;  // flows.hpp

// Ricci eigenvalues of dr^2 + psi^2 g_{S^{n-1}} in base-metric units:
//   ric_rr  = -(n-1) psi''/psi
//   ric_tan = -psi''/psi + (n-2)(1 - psi'^2)/psi^2
// Zero for n = 1.  r must lie in the open domain interior.
std::pair<double, double> ricci_radial(const RadialModel& model, double r);

// Bakry-Emery curvature fields at (r, t); homothety factor c rescales all
// eigenvalues to g(t) units.  m in [n, inf]; m = n requires constant phi.
CurvatureSample bakry_emery(const RadialModel& model, const PotentialSpec& phi,
                            double m, double r, double t, double c = 1.0);

enum class STensorVariant { lemma, statement };

// Radial component of the first-order flow tensor
//   S = 2 h(grad phi, .) - <2 div h - grad Tr h + grad dphi/dt, .>
//       + (2 Tr h/(m-n)) <grad phi, .>,
// in current-metric units.  The statement variant flips the sign of the
// grad Tr h and grad dphi/dt terms; for homothety flows only the dphi/dt
// term can differ (div h and grad Tr h vanish identically).
double s_tensor(const RadialModel& model, const PotentialSpec& phi,
                const FlowSpec& flow, double m, double r, double t,
                STensorVariant variant = STensorVariant::lemma);

// Full sample including h and S data for a flow.
CurvatureSample curvature_sample(const RadialModel& model,
                                 const PotentialSpec& phi,
                                 const FlowSpec& flow, double m, double r,
                                 double t,
                                 STensorVariant variant = STensorVariant::lemma);

// Tensor inequalities checked eigenvalue-wise on a sample grid.  K enters
// each condition exactly where shown; callers choose its sign.
enum class FlowCondition {
  cd_m,                  // Ric_{m,n}(L)            >= K g
  super_perelman,        // h + Ric(L)              >= K g   (h = d/dt g / 2)
  super_ricci_m,         // h + Ric_{m,n}(L)        >= K g
  backward_super_ricci,  // (1-alpha) h + Ric_{m,n} >= K g
  lyh_flow_tensor,       // e^{-4Kt}(h+Ric_{m,n}+Kg) - e^{-2Kt} h >= alpha_K(t) g
  hhh_flow,              // 2h + Ric_{m,n}(L)       >= K g
};

const char* to_string(FlowCondition c);

struct ConditionResult {
  bool holds = false;
  double worst_margin = 0.0;
  double worst_r = 0.0;
};

struct ConditionParams {
  double alpha = 1.0;                          // backward_super_ricci
  std::function<double(double)> alpha_k;       // lyh_flow_tensor; default 0
  double eps = 1e-9;                           // tolerance for "holds"
};

// Worst eigenvalue margin of (LHS - RHS) over the sample radii at time t.
ConditionResult flow_condition_check(const RadialModel& model,
                                     const PotentialSpec& phi,
                                     const FlowSpec& flow, double m, double K,
                                     double t, FlowCondition condition,
                                     const std::vector<double>& sample_r,
                                     const ConditionParams& params = {});

// Uniform sample radii (endpoints nudged off poles).
std::vector<double> condition_sample_radii(const RadialModel& model,
                                           int count = 257);

}  // namespace wlab
