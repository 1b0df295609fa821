#pragma once

#include "snnsc/graph.hpp"
#include "snnsc/tensor.hpp"

namespace snnsc {

enum class ResetMode { kHard, kSoft };
enum class NeuronKind { kIF, kIHF };

struct NeuronConfig {
  double v_th = 1.0;     // firing threshold, must be > 0
  double v_reset = 0.0;  // hard-reset target
  ResetMode reset = ResetMode::kSoft;
  double surrogate_k = 4.0;  // sigmoid steepness of the training surrogate
};

// Recurrent state of one spiking layer. Membrane shape is fixed for the
// lifetime of a session.
struct NeuronState {
  NeuronKind kind = NeuronKind::kIF;
  NeuronConfig cfg;
  Tensor membrane;

  static NeuronState make(NeuronKind kind, NeuronConfig cfg, const Shape& shape);
};

// One time step: charge (m += I), fire (s = 1 iff m > v_th, strict), reset.
SpikeTensor if_step(NeuronState& state, const Tensor& input);

struct IhfStepOut {
  SpikeTensor spikes;
  Tensor membrane_out;  // post-reset membrane, the extra real-valued output
};
IhfStepOut ihf_step(NeuronState& state, const Tensor& input);

void reset_session(NeuronState& state);

// d(spike)/d(membrane) used in the backward pass: k * s * (1 - s) with
// s = sigmoid(k * (m - v_th)).
double fire_surrogate_grad(double membrane, double v_th, double k);

// Tape-side neuron: same dynamics unrolled as graph nodes so gradients
// propagate through time via the fire surrogate.
struct GraphNeuron {
  NeuronConfig cfg;
  int membrane = -1;  // node id; -1 means zero state (lazily created)

  // Returns the spike node; advances the membrane node.
  int step(Graph& g, int input);
  // IF + membrane output; returns (spike node, post-reset membrane node).
  std::pair<int, int> step_with_membrane(Graph& g, int input);
  void reset() { membrane = -1; }
};

}  // namespace snnsc
