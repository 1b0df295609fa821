#include "snnsc/harq.hpp"

#include <cstdio>

namespace snnsc {

void HarqConfig::validate() const {
  if (!(min_steps >= 1 && min_steps < max_steps))
    throw ConfigError("harq: need 1 <= min_steps < max_steps");
  if (payload_shape.empty() || prior_shape.empty())
    throw ConfigError("harq: payload and prior shapes must be set");
  if (!(ack_threshold > -1.0 && ack_threshold < 1.0))
    throw ConfigError("harq: ack_threshold must lie in (-1, 1)");
}

Decision decide(double score, double theta) {
  return score > theta ? Decision::kAck : Decision::kNack;
}

DecisionFn threshold_policy(double theta) {
  return [theta](double score, int) { return decide(score, theta); };
}

DecisionFn ack_at_round(int round) {
  return [round](double, int r) { return r >= round ? Decision::kAck : Decision::kNack; };
}

DecisionFn never_ack() {
  return [](double, int) { return Decision::kNack; };
}

HarqSession run_session(const Tensor& feature, const HarqModels& models, const ChannelModel& ch,
                        const HarqConfig& cfg, const StreamKey& key, const DecisionFn& policy) {
  const DecisionFn decide_fn = policy ? policy : threshold_policy(cfg.ack_threshold);
  HarqSession out;

  // Prior bits go first, on stream round 0.
  const SpikeTensor prior = models.extract_prior(feature);
  const BitStream prior_tx = pack(prior);
  if (prior_tx.nbits != cfg.prior_bits())
    throw ConfigError("harq: prior has " + std::to_string(prior_tx.nbits) + " bits, config says " +
                      std::to_string(cfg.prior_bits()));
  const BitStream prior_rx = bsc_transmit(prior_tx, ch, key.with_round(0));
  const SpikeTensor prior_hat = unpack(prior_rx, prior.shape);

  auto session = models.open_session(feature);
  Shape rx_shape;  // learned from the first payload

  int t = 0;
  Tensor f_prime;
  for (int round = 1;; ++round) {
    const int target_t = round == 1 ? cfg.min_steps : t + 1;
    int64_t round_bits = 0;
    uint64_t sent_digest = 0, recv_digest = 0;
    while (t < target_t) {
      const SpikeTensor s = session->encode_step();
      if (rx_shape.empty()) rx_shape = s.shape;
      const BitStream tx = pack(s);
      if (tx.nbits != cfg.step_bits())
        throw ConfigError("harq: payload has " + std::to_string(tx.nbits) +
                          " bits, config says " + std::to_string(cfg.step_bits()));
      ++t;
      const BitStream rx = bsc_transmit(tx, ch, key.with_round(static_cast<uint64_t>(t)));
      session->receive_step(unpack(rx, rx_shape));
      round_bits += tx.nbits;
      sent_digest = split_mix64(sent_digest ^ bitstream_digest(tx));
      recv_digest = split_mix64(recv_digest ^ bitstream_digest(rx));
    }
    f_prime = session->reconstruct_current();
    const double score = models.estimate_similarity(f_prime, prior_hat, ch.ber);
    const Decision d = decide_fn(score, round);

    HarqRound rec;
    rec.step = t;
    rec.bits_sent = round_bits;
    rec.sent_digest = sent_digest;
    rec.recv_digest = recv_digest;
    rec.f_prime_digest = tensor_digest(f_prime);
    rec.score = score;
    rec.decision = d;
    out.rounds.push_back(rec);
    out.final_score = score;

    if (d == Decision::kAck) break;
    if (t >= cfg.max_steps) {
      out.max_steps_reached = true;
      break;
    }
  }

  out.final_t = t;
  out.total_bits = cfg.prior_bits() + static_cast<int64_t>(t) * cfg.step_bits();
  out.final_feature = f_prime;
  out.final_logits = models.task_head(f_prime);
  const int k = static_cast<int>(out.final_logits.size());
  int best = 0;
  for (int j = 1; j < k; ++j)
    if (out.final_logits.v[static_cast<size_t>(j)] > out.final_logits.v[static_cast<size_t>(best)])
      best = j;
  out.predicted_class = best;
  return out;
}

int64_t bandwidth_of(const HarqSession& s) { return s.total_bits; }

std::string serialize_session(uint64_t session_id, const HarqSession& s) {
  std::string out;
  int64_t payload_total = 0;
  for (const HarqRound& r : s.rounds) payload_total += r.bits_sent;
  int64_t cumulative = s.total_bits - payload_total;  // prior bits, sent up front
  char buf[160];
  for (const HarqRound& r : s.rounds) {
    cumulative += r.bits_sent;
    std::snprintf(buf, sizeof(buf), "session=%llu step=%d bits=%lld score=%.6f decision=%s\n",
                  static_cast<unsigned long long>(session_id), r.step,
                  static_cast<long long>(cumulative), r.score,
                  r.decision == Decision::kAck ? "ACK" : "NACK");
    out += buf;
  }
  return out;
}

}  // namespace snnsc
