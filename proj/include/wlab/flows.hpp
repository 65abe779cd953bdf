#pragma once

#include <functional>
#include <string>

#include "wlab/geometry.hpp"

namespace wlab {

enum class Coupling { independent, measure_preserving };

const char* to_string(Coupling c);

// Homothety flow g(t) = c(t) g0 with c(0) = 1, paired with a potential.
// Measure-preserving coupling adds (n/2) log c(t) to phi so that
// dmu = e^{-phi} dv_{g(t)} is frozen in time.  h = (c'/2c) g(t).
struct FlowSpec {
  std::string label = "static";
  std::function<double(double)> c;
  std::function<double(double)> cdot;
  PotentialSpec phi;  // effective potential, coupling applied
  Coupling coupling = Coupling::independent;
  double extinction = std::numeric_limits<double>::infinity();
  bool is_static = true;

  double h_eigen(double t) const { return 0.5 * cdot(t) / c(t); }
  double tr_h(double t, int n) const { return n * h_eigen(t); }
  void validate(double horizon) const;
};

enum class FlowName { static_flow, exponential, shrinking_sphere, custom };

FlowName flow_name_from_string(const std::string& s);
const char* to_string(FlowName f);

struct FlowParams {
  double lambda = 0.0;                     // exponential: c = e^{2 lambda t}
  std::function<double(double)> c;         // custom
  std::function<double(double)> cdot;      // custom
  std::string custom_label = "custom";
};

// Catalog flows.  shrinking_sphere solves Ricci flow on the round sphere
// exactly: c(t) = 1 - 2(n-1) t, extinction at 1/(2(n-1)).
FlowSpec catalog(FlowName name, const RadialModel& base,
                 const PotentialSpec& phi0, Coupling coupling,
                 const FlowParams& params = {});

// tau(t) = int_0^t c(s)^{-1} ds.  With a spatially static potential the
// time-dependent semigroup equals the static one at tau(t).
double time_reparametrization(const FlowSpec& flow, double t);

}  // namespace wlab
