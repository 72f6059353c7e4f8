#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace scnn {

/// Leaky integrate-and-fire constants. Potentials are dimensionless, times
/// in milliseconds. Membrane capacitance is implied by tau_m = r_m * c_m.
struct LifParams {
  double v_th = 1.0;
  double v_reset = 0.0;
  double tau_m_ms = 40.0;
  double r_m = 1.0;
  double refractory_ms = 1.0;
  double dt_ms = 1.0;
  double noise_std = 0.1;
  // Stored for completeness; no computation reads them.
  double rate_min_hz = 100.0;
  double rate_max_hz = 200.0;

  [[nodiscard]] double c_m() const { return tau_m_ms / r_m; }

  /// Throws ConfigError unless v_th > v_reset, 0 < dt <= tau_m,
  /// refractory >= 0, noise_std >= 0 and r_m > 0.
  void validate() const;

  friend bool operator==(const LifParams&, const LifParams&) = default;
};

struct LifState {
  double v = 0.0;
  double refractory_left_ms = 0.0;

  friend bool operator==(const LifState&, const LifState&) = default;
};

struct LifStepResult {
  LifState state;
  bool spiked = false;
};

/// Advances one neuron by dt_ms with forward Euler on
/// tau dV/dt = -V + R*I, then applies threshold-and-reset.
///
/// While refractory the input is ignored, V is held at v_reset and the
/// countdown drops by dt (floored at 0). A spike sets V to v_reset and
/// arms the refractory countdown in the same step, so the returned V never
/// exceeds v_th. Throws NumericError on non-finite current.
[[nodiscard]] LifStepResult lif_step(const LifState& state, double current, const LifParams& params);

/// Closed-form passive decay v0 * exp(-t / tau_m).
[[nodiscard]] double lif_decay(double v0, double t_ms, const LifParams& params);

struct NeuronTrace {
  std::vector<double> v;                // post-step potential, one per input
  std::vector<bool> spiked;             // one per input
  std::vector<std::size_t> spike_steps; // strictly increasing
};

/// Folds lif_step over `currents` starting from `initial`.
[[nodiscard]] NeuronTrace simulate_neuron(std::span<const double> currents, const LifParams& params,
                                          LifState initial = {});

}  // namespace scnn
