#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "snnsc/harq.hpp"
#include "test_util.hpp"

using namespace snnsc;

namespace {

// Codec stub obeying the wire contract: every payload has the configured
// shape, and the reconstruction encodes how many steps have run so the
// scripted estimator can be driven per round.
class StubSession final : public FeatureCodecSession {
 public:
  explicit StubSession(Shape payload_shape) : shape_(std::move(payload_shape)) {}
  SpikeTensor encode_step() override {
    ++encoded_;
    Rng rng(counter_hash(77, 0, static_cast<uint64_t>(encoded_), 0));
    return test::random_spikes(shape_, rng);
  }
  void receive_step(const SpikeTensor&) override { ++received_; }
  Tensor reconstruct_current() override { return Tensor::scalar(static_cast<double>(received_)); }

 private:
  Shape shape_;
  int encoded_ = 0;
  int received_ = 0;
};

struct StubRig {
  HarqConfig cfg;
  HarqModels models;

  // score_of maps the number of received steps to an estimator score.
  explicit StubRig(Shape payload, Shape prior, std::function<double(int)> score_of,
                   int min_steps = 4, int max_steps = 8) {
    cfg.min_steps = min_steps;
    cfg.max_steps = max_steps;
    cfg.ack_threshold = 0.0;
    cfg.payload_shape = std::move(payload);
    cfg.prior_shape = prior;
    models.open_session = [this](const Tensor&) {
      return std::make_unique<StubSession>(cfg.payload_shape);
    };
    models.extract_prior = [prior](const Tensor&) {
      Rng rng(counter_hash(78, 0, 0, 0));
      return test::random_spikes(prior, rng);
    };
    models.estimate_similarity = [score_of](const Tensor& f_prime, const SpikeTensor&, double) {
      return score_of(static_cast<int>(f_prime.v[0]));
    };
    models.task_head = [](const Tensor&) { return Tensor({1, 2}, {0.3, 0.7}); };
  }
};

}  // namespace

TEST_CASE("decide uses a strict threshold") {
  CHECK(decide(0.70, 0.645) == Decision::kAck);
  CHECK(decide(0.645, 0.645) == Decision::kNack);  // ties do not acknowledge
  CHECK(decide(0.60, 0.635) == Decision::kNack);
}

TEST_CASE("bandwidth arithmetic at reference constants: 2080..4128 bits") {
  // prior 32 bits, 512 bits per step, steps 4..8
  StubRig rig({32, 4, 4}, {32, 1, 1}, [](int) { return 0.0; });
  const Tensor f = Tensor::scalar(0.0);
  const ChannelModel ch = make_channel(0.1);

  std::vector<int64_t> bandwidths;
  for (int k = 1; k <= 5; ++k) {
    const HarqSession s = run_session(f, rig.models, ch, rig.cfg, {1, 2, 3}, ack_at_round(k));
    CHECK(s.final_t == 3 + k);
    CHECK(s.total_bits == 32 + static_cast<int64_t>(3 + k) * 512);
    CHECK(bandwidth_of(s) == s.total_bits);
    bandwidths.push_back(s.total_bits);
  }
  CHECK(bandwidths == std::vector<int64_t>{2080, 2592, 3104, 3616, 4128});

  const HarqSession never = run_session(f, rig.models, ch, rig.cfg, {1, 2, 3}, never_ack());
  CHECK(never.total_bits == 4128);
  CHECK(never.final_t == 8);
  CHECK(never.max_steps_reached);
}

TEST_CASE("always-ack and never-ack threshold endpoints") {
  StubRig rig({2, 4, 4}, {8, 1, 1}, [](int steps) { return steps / 10.0; });
  const Tensor f = Tensor::scalar(0.0);
  const ChannelModel ch = make_channel(0.0);
  // Score after the initial stage is 0.4; a threshold below that acks at once.
  const HarqSession eager = run_session(f, rig.models, ch, rig.cfg, {5, 6, 0},
                                        threshold_policy(0.39));
  CHECK(eager.final_t == rig.cfg.min_steps);
  CHECK(eager.total_bits == 8 + 4 * 32);  // 136 at the toy constants
  // An unreachable threshold runs to the cap.
  const HarqSession stubborn = run_session(f, rig.models, ch, rig.cfg, {5, 6, 0},
                                           threshold_policy(0.99));
  CHECK(stubborn.final_t == rig.cfg.max_steps);
  CHECK(stubborn.max_steps_reached);
}

TEST_CASE("transcript invariants: NACK until the last round, bits add up") {
  StubRig rig({2, 4, 4}, {8, 1, 1}, [](int steps) { return steps >= 6 ? 0.8 : -0.5; });
  const HarqSession s = run_session(Tensor::scalar(0.0), rig.models, make_channel(0.2), rig.cfg,
                                    {9, 1, 0}, threshold_policy(0.0));
  REQUIRE(s.rounds.size() == 3);  // t = 4, 5, 6
  CHECK(s.rounds[0].decision == Decision::kNack);
  CHECK(s.rounds[1].decision == Decision::kNack);
  CHECK(s.rounds[2].decision == Decision::kAck);
  CHECK(s.final_t == 6);
  CHECK(!s.max_steps_reached);
  int64_t payload = 0;
  for (const auto& r : s.rounds) payload += r.bits_sent;
  CHECK(s.total_bits == 8 + payload);
  CHECK(s.rounds[0].bits_sent == 4 * 32);
  CHECK(s.rounds[1].bits_sent == 32);
  // Termination bound: at most max - min + 1 decision rounds.
  CHECK(static_cast<int>(s.rounds.size()) <= rig.cfg.max_steps - rig.cfg.min_steps + 1);
}

TEST_CASE("raising the threshold never lowers the final step count") {
  StubRig rig({2, 4, 4}, {8, 1, 1}, [](int steps) { return steps / 10.0; });
  const Tensor f = Tensor::scalar(0.0);
  const ChannelModel ch = make_channel(0.3);
  int prev_t = 0;
  for (double theta : {-0.9, 0.41, 0.51, 0.61, 0.71, 0.9}) {
    const HarqSession s =
        run_session(f, rig.models, ch, rig.cfg, {4, 4, 0}, threshold_policy(theta));
    CHECK(s.final_t >= prev_t);
    prev_t = s.final_t;
  }
}

TEST_CASE("identical keys replay identical transcripts") {
  StubRig rig({2, 4, 4}, {8, 1, 1}, [](int steps) { return steps >= 7 ? 0.9 : -0.9; });
  const Tensor f = Tensor::scalar(0.0);
  const ChannelModel ch = make_channel(0.25);
  const HarqSession a = run_session(f, rig.models, ch, rig.cfg, {11, 22, 0});
  const HarqSession b = run_session(f, rig.models, ch, rig.cfg, {11, 22, 0});
  REQUIRE(a.rounds.size() == b.rounds.size());
  for (size_t i = 0; i < a.rounds.size(); ++i) {
    CHECK(a.rounds[i].sent_digest == b.rounds[i].sent_digest);
    CHECK(a.rounds[i].recv_digest == b.rounds[i].recv_digest);
    CHECK(a.rounds[i].f_prime_digest == b.rounds[i].f_prime_digest);
    CHECK(a.rounds[i].score == b.rounds[i].score);
  }
  // Different session id changes the channel realization.
  const HarqSession c = run_session(f, rig.models, ch, rig.cfg, {11, 23, 0});
  CHECK(a.rounds[0].recv_digest != c.rounds[0].recv_digest);
}

TEST_CASE("serialized transcript carries one record per round") {
  StubRig rig({2, 4, 4}, {8, 1, 1}, [](int steps) { return steps >= 5 ? 0.9 : -0.9; });
  const HarqSession s = run_session(Tensor::scalar(0.0), rig.models, make_channel(0.1), rig.cfg,
                                    {3, 14, 0});
  const std::string log = serialize_session(14, s);
  CHECK(log == "session=14 step=4 bits=136 score=-0.900000 decision=NACK\n"
               "session=14 step=5 bits=168 score=0.900000 decision=ACK\n");
}

TEST_CASE("config validation") {
  HarqConfig bad;
  bad.min_steps = 5;
  bad.max_steps = 5;
  bad.payload_shape = {2, 4, 4};
  bad.prior_shape = {8, 1, 1};
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad.min_steps = 4;
  bad.ack_threshold = 1.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad.ack_threshold = 0.5;
  bad.validate();
  CHECK(bad.step_bits() == 32);
  CHECK(bad.prior_bits() == 8);
}
