#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "snnsc/neurons.hpp"
#include "test_util.hpp"

using namespace snnsc;
using test::random_tensor;

namespace {

// Independent scalar reference: one neuron stepped literally through
// charge, fire, reset.
struct ScalarNeuron {
  double m = 0.0;
  double v_th, v_reset;
  bool hard;

  int step(double input) {
    m += input;
    const bool fired = m > v_th;
    if (fired) m = hard ? v_reset : m - v_th;
    return fired ? 1 : 0;
  }
};

}  // namespace

TEST_CASE("soft-reset spike train from literal step-by-step iteration") {
  // v_th = 1, constant input 0.6: membranes 0.6, 1.2->0.2, 0.8, 1.4->0.4, 1.0.
  // The last step does NOT fire (1.0 is not > 1.0), leaving m = 1.0.
  NeuronState st = NeuronState::make(NeuronKind::kIF, {1.0, 0.0, ResetMode::kSoft, 4.0}, {1});
  const Tensor in = Tensor::full({1}, 0.6);
  std::vector<int> spikes;
  for (int t = 0; t < 5; ++t) spikes.push_back(if_step(st, in).bits[0]);
  CHECK(spikes == std::vector<int>{0, 1, 0, 1, 0});
  CHECK(st.membrane.v[0] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("hard reset forces the reset potential") {
  NeuronState st = NeuronState::make(NeuronKind::kIF, {1.0, 0.0, ResetMode::kHard, 4.0}, {1});
  const SpikeTensor s = if_step(st, Tensor::full({1}, 5.0));
  CHECK(s.bits[0] == 1);
  CHECK(st.membrane.v[0] == 0.0);
}

TEST_CASE("zero input forever never fires") {
  NeuronState st = NeuronState::make(NeuronKind::kIF, {}, {4});
  for (int t = 0; t < 10; ++t) {
    const SpikeTensor s = if_step(st, Tensor::zeros({4}));
    for (uint8_t b : s.bits) CHECK(b == 0);
  }
  for (double m : st.membrane.v) CHECK(m == 0.0);
}

TEST_CASE("IHF mirrors IF and additionally returns the post-reset membrane") {
  NeuronConfig cfg{1.0, 0.0, ResetMode::kSoft, 4.0};
  NeuronState a = NeuronState::make(NeuronKind::kIF, cfg, {1});
  NeuronState b = NeuronState::make(NeuronKind::kIHF, cfg, {1});
  const Tensor in = Tensor::full({1}, 0.6);
  for (int t = 0; t < 5; ++t) {
    const SpikeTensor sa = if_step(a, in);
    const IhfStepOut out = ihf_step(b, in);
    CHECK(sa.bits == out.spikes.bits);
    CHECK(out.membrane_out.v == b.membrane.v);
    CHECK(out.membrane_out.v == a.membrane.v);
  }

  NeuronState c = NeuronState::make(NeuronKind::kIHF, {1.0, 0.0, ResetMode::kHard, 4.0}, {1});
  const IhfStepOut out = ihf_step(c, Tensor::full({1}, 5.0));
  CHECK(out.spikes.bits[0] == 1);
  CHECK(out.membrane_out.v[0] == 0.0);
}

TEST_CASE("surrogate derivative: slope k/4 at threshold, saturating tails") {
  CHECK(fire_surrogate_grad(1.0, 1.0, 4.0) == doctest::Approx(1.0));   // 4 * 0.25
  CHECK(fire_surrogate_grad(1.0, 1.0, 10.0) == doctest::Approx(2.5));  // k * 0.25
  CHECK(fire_surrogate_grad(60.0, 1.0, 4.0) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(fire_surrogate_grad(-60.0, 1.0, 4.0) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("kind mismatch and shape mismatch are rejected") {
  NeuronState st = NeuronState::make(NeuronKind::kIF, {}, {4});
  CHECK_THROWS_AS(ihf_step(st, Tensor::zeros({4})), ConfigError);
  CHECK_THROWS_AS(if_step(st, Tensor::zeros({5})), ShapeError);
  CHECK_THROWS_AS(NeuronState::make(NeuronKind::kIF, {-1.0, 0.0, ResetMode::kSoft, 4.0}, {1}),
                  ConfigError);
}

TEST_CASE("reset_session zeroes the membrane and is idempotent") {
  NeuronState st = NeuronState::make(NeuronKind::kIF, {}, {8});
  Rng rng(3);
  for (int t = 0; t < 4; ++t) if_step(st, random_tensor({8}, rng));
  reset_session(st);
  for (double m : st.membrane.v) CHECK(m == 0.0);
  reset_session(st);
  for (double m : st.membrane.v) CHECK(m == 0.0);

  // After a reset the next step matches a freshly constructed state's.
  NeuronState fresh = NeuronState::make(NeuronKind::kIF, {}, {8});
  const Tensor in = random_tensor({8}, rng);
  CHECK(if_step(st, in).bits == if_step(fresh, in).bits);
  CHECK(st.membrane.v == fresh.membrane.v);
}

TEST_CASE("spike outputs are binary for random inputs (property)") {
  Rng rng(11);
  NeuronState st = NeuronState::make(NeuronKind::kIF, {}, {16});
  for (int t = 0; t < 200; ++t) {
    const SpikeTensor s = if_step(st, random_tensor({16}, rng, -3, 3));
    for (uint8_t b : s.bits) CHECK((b == 0 || b == 1));
  }
}

TEST_CASE("soft reset conserves charge: sum(in) == membrane + v_th * spikes") {
  // On a 1/64 grid every intermediate value is an exact dyadic rational, so
  // the identity holds bit-exactly.
  Rng rng(12);
  for (int trial = 0; trial < 100; ++trial) {
    NeuronState st = NeuronState::make(NeuronKind::kIF, {1.0, 0.0, ResetMode::kSoft, 4.0}, {4});
    std::vector<double> input_sum(4, 0.0);
    std::vector<double> spike_count(4, 0.0);
    for (int t = 0; t < 16; ++t) {
      Tensor in = Tensor::zeros({4});
      for (double& x : in.v) x = static_cast<double>(rng.uniform_int(257) - 128) / 64.0;
      const SpikeTensor s = if_step(st, in);
      for (int i = 0; i < 4; ++i) {
        input_sum[static_cast<size_t>(i)] += in.v[static_cast<size_t>(i)];
        spike_count[static_cast<size_t>(i)] += s.bits[static_cast<size_t>(i)];
      }
    }
    for (int i = 0; i < 4; ++i)
      CHECK(input_sum[static_cast<size_t>(i)] ==
            st.membrane.v[static_cast<size_t>(i)] + spike_count[static_cast<size_t>(i)]);
  }
}

TEST_CASE("state carried across calls equals one continuous run") {
  Rng rng(13);
  std::vector<Tensor> trace;
  for (int t = 0; t < 16; ++t) trace.push_back(random_tensor({8}, rng, -2, 2));

  NeuronState continuous = NeuronState::make(NeuronKind::kIF, {}, {8});
  std::vector<SpikeTensor> out1;
  for (const Tensor& in : trace) out1.push_back(if_step(continuous, in));

  NeuronState chunked = NeuronState::make(NeuronKind::kIF, {}, {8});
  std::vector<SpikeTensor> out2;
  for (int t = 0; t < 8; ++t) out2.push_back(if_step(chunked, trace[static_cast<size_t>(t)]));
  NeuronState resumed = chunked;  // copy state, continue on the copy
  for (int t = 8; t < 16; ++t) out2.push_back(if_step(resumed, trace[static_cast<size_t>(t)]));

  for (int t = 0; t < 16; ++t) CHECK(out1[static_cast<size_t>(t)].bits == out2[static_cast<size_t>(t)].bits);
  CHECK(continuous.membrane.v == resumed.membrane.v);
}

TEST_CASE("vectorized layer matches the scalar reference exactly") {
  Rng rng(14);
  for (ResetMode mode : {ResetMode::kSoft, ResetMode::kHard}) {
    for (int trial = 0; trial < 50; ++trial) {
      const NeuronConfig cfg{1.0, 0.25, mode, 4.0};
      NeuronState layer = NeuronState::make(NeuronKind::kIHF, cfg, {8});
      std::vector<ScalarNeuron> ref(8);
      for (auto& n : ref) n = {0.0, cfg.v_th, cfg.v_reset, mode == ResetMode::kHard};
      for (int t = 0; t < 16; ++t) {
        const Tensor in = random_tensor({8}, rng, -2, 2);
        const IhfStepOut out = ihf_step(layer, in);
        for (int i = 0; i < 8; ++i) {
          const int want = ref[static_cast<size_t>(i)].step(in.v[static_cast<size_t>(i)]);
          CHECK(out.spikes.bits[static_cast<size_t>(i)] == want);
          CHECK(out.membrane_out.v[static_cast<size_t>(i)] == ref[static_cast<size_t>(i)].m);
        }
      }
    }
  }
}

TEST_CASE("graph neuron reproduces the eval-path dynamics in hard-forward mode") {
  Rng rng(15);
  const NeuronConfig cfg{1.0, 0.0, ResetMode::kSoft, 4.0};
  std::vector<Tensor> trace;
  for (int t = 0; t < 8; ++t) trace.push_back(random_tensor({1, 6}, rng, -2, 2));

  NeuronState eval_state = NeuronState::make(NeuronKind::kIF, cfg, {1, 6});
  Graph g;
  GraphNeuron gn{cfg};
  for (const Tensor& in : trace) {
    const SpikeTensor want = if_step(eval_state, in);
    const int got = gn.step(g, g.input(in));
    CHECK(g.val(got).v == want.to_tensor().v);
    CHECK(g.val(gn.membrane).v == eval_state.membrane.v);
  }
}

TEST_CASE("end-to-end surrogate gradient through a spiking layer is non-zero") {
  Rng rng(16);
  Parameter w;
  w.value = random_tensor({6, 4}, rng);
  const Tensor x = random_tensor({1, 4}, rng, 0.2, 1.0);
  Graph g;
  GraphNeuron gn{{1.0, 0.0, ResetMode::kSoft, 4.0}};
  const int current = g.linear(g.input(x), g.param(w), g.input(Tensor::zeros({6})));
  int spikes = -1;
  for (int t = 0; t < 4; ++t) spikes = gn.step(g, current);
  g.backward(g.mean_all(spikes));
  double norm = 0;
  for (double gv : w.grad.v) norm += gv * gv;
  CHECK(norm > 0.0);
}
