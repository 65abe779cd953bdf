#include "wlab/flows.hpp"

#include <sstream>

#include "num.hpp"

namespace wlab {

const char* to_string(Coupling c) {
  return c == Coupling::independent ? "independent" : "measure_preserving";
}

const char* to_string(FlowName f) {
  switch (f) {
    case FlowName::static_flow: return "static";
    case FlowName::exponential: return "exponential";
    case FlowName::shrinking_sphere: return "shrinking_sphere";
    case FlowName::custom: return "custom";
  }
  return "?";
}

FlowName flow_name_from_string(const std::string& s) {
  if (s == "static") return FlowName::static_flow;
  if (s == "exponential") return FlowName::exponential;
  if (s == "shrinking_sphere") return FlowName::shrinking_sphere;
  if (s == "custom") return FlowName::custom;
  throw std::invalid_argument("unknown flow name: " + s);
}

void FlowSpec::validate(double horizon) const {
  if (horizon >= extinction) {
    std::ostringstream msg;
    msg << "flow '" << label << "' extinguishes at t = " << extinction
        << "; horizon " << horizon << " is out of range";
    throw std::invalid_argument(msg.str());
  }
  if (std::abs(c(0.0) - 1.0) > 1e-12)
    throw std::invalid_argument("flow must be normalized to c(0) = 1");
}

namespace {

PotentialSpec couple(const PotentialSpec& phi0, Coupling coupling, int n,
                     const std::function<double(double)>& c,
                     const std::function<double(double)>& cdot) {
  if (coupling == Coupling::independent) return phi0;
  // dphi/dt = (n/2) c'/c = Tr h keeps dmu frozen.
  const double half_n = 0.5 * n;
  return phi0.with_time_offset(
      [c, half_n](double t) { return half_n * std::log(c(t)); },
      [c, cdot, half_n](double t) { return half_n * cdot(t) / c(t); },
      "+coupling");
}

}  // namespace

FlowSpec catalog(FlowName name, const RadialModel& base,
                 const PotentialSpec& phi0, Coupling coupling,
                 const FlowParams& params) {
  FlowSpec f;
  f.coupling = coupling;
  switch (name) {
    case FlowName::static_flow: {
      f.label = "static";
      f.c = [](double) { return 1.0; };
      f.cdot = [](double) { return 0.0; };
      f.is_static = true;
      // measure-preserving coupling is a no-op for c == 1
      f.phi = phi0;
      return f;
    }
    case FlowName::exponential: {
      const double lam = params.lambda;
      f.label = "exponential";
      f.c = [lam](double t) { return std::exp(2.0 * lam * t); };
      f.cdot = [lam](double t) { return 2.0 * lam * std::exp(2.0 * lam * t); };
      f.is_static = (lam == 0.0);
      break;
    }
    case FlowName::shrinking_sphere: {
      if (base.kind != ModelKind::sphere)
        throw std::invalid_argument(
            "shrinking_sphere flow requires a sphere base model");
      const double rate = 2.0 * (base.n - 1);
      f.label = "shrinking_sphere";
      f.c = [rate](double t) { return 1.0 - rate * t; };
      f.cdot = [rate](double) { return -rate; };
      f.extinction = 1.0 / rate;
      f.is_static = false;
      break;
    }
    case FlowName::custom: {
      if (!params.c || !params.cdot)
        throw std::invalid_argument("custom flow needs c and c'");
      f.label = params.custom_label;
      f.c = params.c;
      f.cdot = params.cdot;
      f.is_static = false;
      break;
    }
  }
  f.phi = couple(phi0, coupling, base.n, f.c, f.cdot);
  if (std::abs(f.c(0.0) - 1.0) > 1e-12)
    throw std::invalid_argument("flow must be normalized to c(0) = 1");
  return f;
}

double time_reparametrization(const FlowSpec& flow, double t) {
  if (!flow.phi.time_constant && flow.coupling == Coupling::independent)
    throw std::invalid_argument(
        "time reparametrization needs a spatially static potential");
  if (t == 0.0) return 0.0;
  if (flow.label == "static") return t;
  if (flow.label == "exponential") {
    // c = e^{2 lambda t}
    const double lam = 0.5 * flow.cdot(0.0);
    if (lam == 0.0) return t;
    return -std::expm1(-2.0 * lam * t) / (2.0 * lam);
  }
  if (flow.label == "shrinking_sphere") {
    const double rate = -flow.cdot(0.0);  // 2(n-1)
    return -std::log1p(-rate * t) / rate;
  }
  auto f = [&flow](double s) { return 1.0 / flow.c(s); };
  return num::adaptive_simpson(f, 0.0, t, 1e-13);
}

}  // namespace wlab
