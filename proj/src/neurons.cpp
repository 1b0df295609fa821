#include "snnsc/neurons.hpp"

#include <cmath>

namespace snnsc {

NeuronState NeuronState::make(NeuronKind kind, NeuronConfig cfg, const Shape& shape) {
  if (cfg.v_th <= 0.0) throw ConfigError("neuron: v_th must be positive");
  NeuronState s;
  s.kind = kind;
  s.cfg = cfg;
  s.membrane = Tensor::zeros(shape);
  return s;
}

namespace {

// Shared charge/fire/reset core; spikes written into `spikes`.
void step_dynamics(NeuronState& state, const Tensor& input, SpikeTensor& spikes) {
  require_same_shape("neuron step", state.membrane, input);
  const double v_th = state.cfg.v_th;
  const double v_reset = state.cfg.v_reset;
  const bool hard = state.cfg.reset == ResetMode::kHard;
  double* m = state.membrane.data();
  const double* in = input.data();
  for (int64_t i = 0; i < input.size(); ++i) {
    m[i] += in[i];
    const bool fired = m[i] > v_th;
    spikes.bits[static_cast<size_t>(i)] = fired ? 1 : 0;
    if (fired) m[i] = hard ? v_reset : m[i] - v_th;
  }
}

}  // namespace

SpikeTensor if_step(NeuronState& state, const Tensor& input) {
  if (state.kind != NeuronKind::kIF) throw ConfigError("if_step: state is not an IF layer");
  SpikeTensor spikes = SpikeTensor::zeros(input.shape);
  step_dynamics(state, input, spikes);
  return spikes;
}

IhfStepOut ihf_step(NeuronState& state, const Tensor& input) {
  if (state.kind != NeuronKind::kIHF) throw ConfigError("ihf_step: state is not an IHF layer");
  IhfStepOut out;
  out.spikes = SpikeTensor::zeros(input.shape);
  step_dynamics(state, input, out.spikes);
  out.membrane_out = state.membrane;
  return out;
}

void reset_session(NeuronState& state) {
  for (double& m : state.membrane.v) m = 0.0;
}

double fire_surrogate_grad(double membrane, double v_th, double k) {
  const double s = 1.0 / (1.0 + std::exp(-k * (membrane - v_th)));
  return k * s * (1.0 - s);
}

int GraphNeuron::step(Graph& g, int input) {
  const int charged = membrane < 0 ? input : g.add(membrane, input);
  const int spikes = g.fire(charged, cfg.v_th, cfg.surrogate_k);
  if (cfg.reset == ResetMode::kSoft) {
    membrane = g.sub(charged, g.scale(spikes, cfg.v_th));
  } else {
    // (1 - s) * m + s * v_reset
    const int keep = g.mul(charged, g.add_scalar(g.scale(spikes, -1.0), 1.0));
    membrane = g.add(keep, g.scale(spikes, cfg.v_reset));
  }
  return spikes;
}

std::pair<int, int> GraphNeuron::step_with_membrane(Graph& g, int input) {
  const int spikes = step(g, input);
  return {spikes, membrane};
}

}  // namespace snnsc
