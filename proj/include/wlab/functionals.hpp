#pragma once

#include <string>
#include <vector>

#include "wlab/heatflow.hpp"

namespace wlab {

// Everything a pointwise evaluation needs besides the state itself.
struct EvalContext {
  const RadialModel* model = nullptr;
  const PotentialSpec* phi = nullptr;
  const FlowSpec* flow = nullptr;
  const Grid* grid = nullptr;
};

// H(u) = -int u log u dmu.
double boltzmann_entropy(const HeatState& state);

// int |grad log u|^2 u dmu.
double fisher_information(const HeatState& state, const EvalContext& ctx);

// Gauge for the K-deformed entropy: Phi' = (m/2t) e^{4Kt}, normalized so
// K = 0 reduces to (m/2)(1 + log 4 pi t).
double phi_mk(double t, double m, double K);
double phi_mk_prime(double t, double m, double K);

// (m/2t)[e^{4Kt}(1+4Kt) - (1+Kt)^2]; the dissipation defect.
double w_defect(double t, double m, double K);

enum class DissipationMode { finite_difference, gradient_formula, closed_form };
DissipationMode dissipation_mode_from_string(const std::string& s);

struct WmResult {
  double H = 0.0;     // H_{m,K}
  double dHdt = 0.0;  // gradient-formula route: fisher - Phi'
  double W = 0.0;     // d/dt (t H) = H + t dHdt
};

// K = 0 gives the classical entropy pair (H_m, W_m).  t is the entropy time
// (burn-in shifted).  States are assumed mass-1 for the W functionals.
WmResult w_m_eval(const HeatState& state, const EvalContext& ctx, double m,
                  double K, double t, double gauge_offset = 0.0);

// Direct integral form of W_m at K = 0:
//   int [ t |grad log u|^2 + f - m ] u dmu,  f = -log u - (m/2) log(4 pi t).
double w_m_closed_form(const HeatState& state, const EvalContext& ctx,
                       double m, double t);

// Dissipation identity right-hand side
//   -2t int [ |Hess log u + (K/2 + 1/2t) g|^2
//             + (Ric_{m,n}(L) + K g [+ h]) (grad log u, grad log u) ] u dmu
//   - (2t/(m-n)) int | grad phi . grad log u - (m-n)(1+Kt)/(2t) |^2 u dmu
//   - (m/2t)[ e^{4Kt}(1+4Kt) - (1+Kt)^2 ],
// the h term entering only for time-dependent flows.  The middle term is
// omitted for m = n (constant potential).  with_defect = false drops the
// last line (the tilde-entropy identity).
double w_m_dissipation_rhs(const HeatState& state, const EvalContext& ctx,
                           double m, double K, double t,
                           bool with_defect = true);

struct WtilResult {
  double H = 0.0;
  double dHdt = 0.0;
  double W = 0.0;
};

// Tilde variant: H = -int u log u - (m/2)(1+log 4pi t) - (mKt/2)(1 + Kt/6);
// its dissipation identity carries no explicit defect term.
WtilResult w_tilde_eval(const HeatState& state, const EvalContext& ctx,
                        double m, double K, double t);

// d/dt (W_tilde - W_{m,K}) in closed form (a pure function of t).
double w_tilde_gap_derivative(double t, double m, double K);

enum class DkVariant { derivation, statement };
DkVariant dk_variant_from_string(const std::string& s);

// C_K(t) = 2K/(e^{2Kt}-1), D_K(t) = 2|K|/|1-e^{-2Kt}| (derivation variant;
// both limit to 1/t as K -> 0).  The statement variant D_K = 1/|1-e^{-2Kt}|
// breaks D' = -C D and is exposed for audit only.
double c_factor(double t, double K);
double d_factor(double t, double K, DkVariant variant = DkVariant::derivation);
double beta_factor(double t, double K);  // sinh(2Kt)/(2K), t at K = 0

struct WkResult {
  double H = 0.0;     // H_K = D_K int (P_t(f log f) - P_t f log P_t f) dmu
  double dHdt = 0.0;  // D_K int [ |grad P_t f|^2/P_t f + C_K (...) ] dmu
  double W = 0.0;     // H_K + beta_K dH_K/dt
};

// u1 = P_t f, u2 = P_t(f log f), advanced in lockstep; t is time since the
// co-evolution start.
WkResult w_k_eval(const HeatState& u1, const HeatState& u2,
                  const EvalContext& ctx, double K, double t,
                  DkVariant variant = DkVariant::derivation);

// -(sinh(2Kt)/K) D_K [ int |Hess log u1|^2 u1 dmu
//                      + int (Ric(L) [+ h] - K)(grad log u1, grad log u1) u1 dmu ].
double w_k_dissipation_rhs(const HeatState& u1, const EvalContext& ctx,
                           double K, double t,
                           DkVariant variant = DkVariant::derivation);

// Centered differences on the output-time grid, one-sided at the ends.
std::vector<double> centered_derivative(const std::vector<double>& times,
                                        const std::vector<double>& values);

}  // namespace wlab
