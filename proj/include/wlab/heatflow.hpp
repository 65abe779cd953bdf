#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wlab/discretize.hpp"

namespace wlab {

enum class Scheme { crank_nicolson, backward_euler };

Scheme scheme_from_string(const std::string& s);

// Strictly positive grid function with its timestamp and the measure
// weights in force at that time.
struct HeatState {
  std::vector<double> u;
  double t = 0.0;
  MeasureWeights weights;
  double mass = 0.0;

  double min_u() const;
  double max_u() const;
};

struct StepDiag {
  double min_u = 0.0;
  double mass = 0.0;
  double boundary_flux = 0.0;  // flux into reflecting boundary cells
  bool be_fallback = false;
};

struct Trajectory {
  std::vector<HeatState> states;  // at the requested output times
  std::vector<double> mass_series;
  double sup_u = 0.0;  // running max over every step and the initial datum
  double inf_u = 0.0;
  double max_mass_drift = 0.0;  // relative, against the flow's mass scaling
  double max_boundary_flux = 0.0;
  int cn_fallbacks = 0;
  double cn_positivity_dt = 0.0;
};

struct SolveParams {
  double dt = 1e-3;
  double horizon = 1.0;
  Scheme scheme = Scheme::crank_nicolson;
  std::vector<double> output_times;
};

// One implicit step with the midpoint-time operator:
//   (I - theta dt L) u_new = (I + (1-theta) dt L) u_old,
// theta = 1/2 (CN) or 1 (BE).  A CN step whose result is not strictly
// positive is redone with BE and flagged in the diagnostics.
HeatState step(const HeatState& state, const RadialModel& model,
               const PotentialSpec& phi, const FlowSpec& flow,
               const Grid& grid, double dt, Scheme scheme,
               StepDiag* diag = nullptr);

Trajectory run(const RadialModel& model, const PotentialSpec& phi,
               const FlowSpec& flow, const Grid& grid, HeatState initial,
               const SolveParams& solve);

// Advances several fields through one implicit step under the same
// midpoint-time operator.  Positivity (and the CN fallback) is driven by
// fields[0] only; auxiliary fields may change sign.
void step_lockstep(std::vector<HeatState>& fields, const RadialModel& model,
                   const PotentialSpec& phi, const FlowSpec& flow,
                   const Grid& grid, double dt, Scheme scheme,
                   int* cn_fallbacks = nullptr);

// Closed-form eigenfunction of the static phi = 0 Laplacian: cos(l r) on the
// circle, cos(l pi (r - r_min)/L) on the interval, P_l(cos r) on S^2.
double eigenmode_value(const RadialModel& model, int l, double r);
double eigenmode_rate(const RadialModel& model, int l);

// Independent reference solution by discrete eigen-expansion; supported for
// circle, reflecting interval and S^2 with phi = 0 and a static flow.
std::vector<double> spectral_reference(const RadialModel& model,
                                       const Grid& grid,
                                       std::span<const double> u0, double t,
                                       int max_modes = 64,
                                       double* tail_bound = nullptr);

enum class InitialKind {
  uniform,
  eigen_perturbation,
  normalized_gaussian_bump,
  kernel_burnin,
};

InitialKind initial_kind_from_string(const std::string& s);

struct InitialSpec {
  InitialKind kind = InitialKind::uniform;
  double center = 0.0;
  double width = 0.1;
  double t0 = 0.01;  // kernel_burnin
  int mode = 1;      // eigen_perturbation
  double amplitude = 0.5;
};

struct InitialData {
  HeatState state;
  double t_shift = 0.0;  // entropy clocks read state.t + t_shift
  bool closed_form_kernel = false;
};

// kernel_burnin uses the closed-form small-time kernel where one exists
// (Euclidean any n, hyperbolic n = 3); elsewhere a Gaussian bump of width
// sqrt(t0) is evolved for t0/2 with backward Euler, and all entropy times
// are shifted by t0.
InitialData make_initial(const InitialSpec& spec, const RadialModel& model,
                         const PotentialSpec& phi, const FlowSpec& flow,
                         const Grid& grid);

}  // namespace wlab
