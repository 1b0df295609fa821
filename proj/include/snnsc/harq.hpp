#pragma once

#include <functional>
#include <memory>
#include <string>

#include "snnsc/channel.hpp"
#include "snnsc/tensor.hpp"

namespace snnsc {

struct HarqConfig {
  int min_steps = 4;
  int max_steps = 8;
  double ack_threshold = 0.0;  // used by the default threshold policy
  Shape payload_shape;         // (c, h, w) per step
  Shape prior_shape;           // (c, 1, 1)

  int step_bits() const { return static_cast<int>(numel(payload_shape)); }
  int prior_bits() const { return static_cast<int>(numel(prior_shape)); }
  void validate() const;
};

enum class Decision { kAck, kNack };

// ACK iff the score strictly exceeds the threshold; ties retransmit.
Decision decide(double score, double theta);

struct HarqRound {
  int step = 0;            // time steps run when the decision was taken
  int64_t bits_sent = 0;   // payload bits sent in this round
  uint64_t sent_digest = 0;
  uint64_t recv_digest = 0;
  uint64_t f_prime_digest = 0;
  double score = 0.0;
  Decision decision = Decision::kNack;
};

struct HarqSession {
  std::vector<HarqRound> rounds;
  int64_t total_bits = 0;  // prior + final_t * step_bits
  int final_t = 0;
  bool max_steps_reached = false;  // ended by the step cap, not by ACK
  double final_score = 0.0;
  Tensor final_feature;
  Tensor final_logits;
  int predicted_class = -1;
};

// Transmit side of a codec bound to one feature; the engine drives it.
class FeatureCodecSession {
 public:
  virtual ~FeatureCodecSession() = default;
  virtual SpikeTensor encode_step() = 0;
  virtual void receive_step(const SpikeTensor& s_hat) = 0;
  virtual Tensor reconstruct_current() = 0;
};

struct HarqModels {
  std::function<std::unique_ptr<FeatureCodecSession>(const Tensor& feature)> open_session;
  std::function<SpikeTensor(const Tensor& feature)> extract_prior;
  std::function<double(const Tensor& f_prime, const SpikeTensor& prior, double ber)>
      estimate_similarity;
  std::function<Tensor(const Tensor& f_prime)> task_head;
};

// Decision policy per round (1-based round index). The default wraps
// decide() with cfg.ack_threshold; the others exist for protocol tests and
// bandwidth accounting.
using DecisionFn = std::function<Decision(double score, int round)>;
DecisionFn threshold_policy(double theta);
DecisionFn ack_at_round(int round);
DecisionFn never_ack();

// Full protocol: prior transmission (stream round 0), initial stage of
// min_steps time steps (payload step i uses stream round i), then one-step
// retransmissions until ACK or max_steps. Feedback is error-free and costs
// no bandwidth.
HarqSession run_session(const Tensor& feature, const HarqModels& models, const ChannelModel& ch,
                        const HarqConfig& cfg, const StreamKey& key,
                        const DecisionFn& policy = nullptr);

int64_t bandwidth_of(const HarqSession& s);

// One line per round: step, cumulative bits, score, decision.
std::string serialize_session(uint64_t session_id, const HarqSession& s);

}  // namespace snnsc
