#pragma once

#include <span>
#include <vector>

#include "wlab/flows.hpp"
#include "wlab/geometry.hpp"

namespace wlab {

// Uniform radial grid over the model domain.  Periodic models drop the
// duplicate endpoint, so dr = L/N there and L/(N-1) otherwise.
struct Grid {
  std::vector<double> r;
  double dr = 0.0;
  bool periodic = false;

  static Grid make(const RadialModel& model, int N);
  int size() const { return static_cast<int>(r.size()); }
  // Midpoint of the interface between node i and its successor.
  double midpoint(int i) const { return r[i] + 0.5 * dr; }
};

// Quadrature weights w_i = integral of area(n) psi^{n-1} e^{-phi} c^{n/2}
// over the node's cell (half cells at non-periodic endpoints).  Integrating
// the cell exactly instead of sampling the node keeps sum(w) equal to the
// weighted volume to quadrature precision even where the density vanishes
// at a pole.
struct MeasureWeights {
  std::vector<double> w;
  double t = 0.0;
  double total() const;
};

MeasureWeights build_weights(const RadialModel& model, const PotentialSpec& phi,
                             const FlowSpec& flow, const Grid& grid, double t);

// Discrete Witten Laplacian in divergence form,
//   (L u)_i = [kappa_{i+1/2}(u_{i+1}-u_i) - kappa_{i-1/2}(u_i-u_{i-1})] / w_i,
// mu-self-adjoint and conservative by construction.  kappa[i] couples node i
// to node i+1; periodic grids carry one extra wrapping interface.
class WittenOperator {
 public:
  std::vector<double> kappa;
  MeasureWeights weights;
  double t = 0.0;
  bool periodic = false;

  int size() const { return static_cast<int>(weights.w.size()); }
  std::vector<double> apply(std::span<const double> u) const;
  // Sufficient dt for positivity of a Crank-Nicolson step (Jacobi bound).
  double cn_positivity_dt() const;
  // kappa at the left/right interface of node i (0 outside the domain).
  double kappa_left(int i) const;
  double kappa_right(int i) const;
};

WittenOperator assemble(const RadialModel& model, const PotentialSpec& phi,
                        const FlowSpec& flow, const Grid& grid, double t);

// Centered first derivative (one-sided O(dr^2) stencils at non-periodic
// endpoints), in coordinate units.
std::vector<double> radial_derivative(std::span<const double> u,
                                      const Grid& grid);

// |grad u|^2 relative to g(t):  (du/dr)^2 / c.
std::vector<double> grad_sq(std::span<const double> u, const Grid& grid,
                            double c);

// |Hess f|^2 for radial f:  (f'')^2 + (n-1)((psi'/psi) f')^2, in g(t) units
// (divide each eigenvalue by c).  At pole nodes the tangential eigenvalue
// uses the regular limit f''.
std::vector<double> hessian_radial_sq(std::span<const double> f,
                                      const Grid& grid,
                                      const RadialModel& model, double c);

// |Hess f + a g|^2 = |Hess f|^2 + 2 a Lap f + n a^2 with the trace taken as
// Lap f = L f + grad phi . grad f so the operator's own pole handling is
// reused.
std::vector<double> hessian_shift_sq(std::span<const double> f, double a,
                                     const Grid& grid, const RadialModel& model,
                                     const PotentialSpec& phi,
                                     const WittenOperator& op, double c);

double quadrature(std::span<const double> values, const MeasureWeights& weights);

}  // namespace wlab
