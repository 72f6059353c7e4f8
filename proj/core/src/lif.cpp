#include "scnn/lif.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "scnn/error.hpp"

namespace scnn {

void LifParams::validate() const {
  const auto finite = [](double x) { return std::isfinite(x); };
  if (!finite(v_th) || !finite(v_reset) || !finite(tau_m_ms) || !finite(r_m) || !finite(refractory_ms) ||
      !finite(dt_ms) || !finite(noise_std)) {
    throw ConfigError("lif: parameters must be finite");
  }
  if (!(v_th > v_reset)) {
    throw ConfigError("lif: threshold " + std::to_string(v_th) + " must exceed reset " + std::to_string(v_reset));
  }
  if (!(tau_m_ms > 0.0)) {
    throw ConfigError("lif: tau_m must be positive");
  }
  if (!(r_m > 0.0)) {
    throw ConfigError("lif: membrane resistance must be positive");
  }
  if (!(dt_ms > 0.0)) {
    throw ConfigError("lif: dt must be positive");
  }
  if (dt_ms > tau_m_ms) {
    throw ConfigError("lif: dt " + std::to_string(dt_ms) + " ms exceeds tau_m " + std::to_string(tau_m_ms) +
                      " ms; forward Euler would be unstable");
  }
  if (refractory_ms < 0.0) {
    throw ConfigError("lif: refractory period must be non-negative");
  }
  if (noise_std < 0.0) {
    throw ConfigError("lif: noise std must be non-negative");
  }
}

LifStepResult lif_step(const LifState& state, double current, const LifParams& params) {
  if (!std::isfinite(current)) {
    throw NumericError("lif_step: non-finite input current");
  }
  if (state.refractory_left_ms > 0.0) {
    return {{params.v_reset, std::max(0.0, state.refractory_left_ms - params.dt_ms)}, false};
  }
  const double v = state.v + (params.dt_ms / params.tau_m_ms) * (-state.v + params.r_m * current);
  if (!std::isfinite(v)) {
    throw NumericError("lif_step: membrane potential diverged");
  }
  if (v >= params.v_th) {
    return {{params.v_reset, params.refractory_ms}, true};
  }
  return {{v, 0.0}, false};
}

double lif_decay(double v0, double t_ms, const LifParams& params) {
  return v0 * std::exp(-t_ms / params.tau_m_ms);
}

NeuronTrace simulate_neuron(std::span<const double> currents, const LifParams& params, LifState initial) {
  params.validate();
  if (currents.empty()) {
    throw ConfigError("simulate_neuron: empty input trace");
  }
  NeuronTrace trace;
  trace.v.reserve(currents.size());
  trace.spiked.reserve(currents.size());
  LifState state = initial;
  for (std::size_t step = 0; step < currents.size(); ++step) {
    const LifStepResult result = lif_step(state, currents[step], params);
    state = result.state;
    trace.v.push_back(state.v);
    trace.spiked.push_back(result.spiked);
    if (result.spiked) {
      trace.spike_steps.push_back(step);
    }
  }
  return trace;
}

}  // namespace scnn
