#include "snnsc/baseline.hpp"

namespace snnsc {

FecKind fec_from_string(const std::string& s) {
  if (s == "repetition3") return FecKind::kRepetition3;
  if (s == "hamming74") return FecKind::kHamming74;
  throw ConfigError("unknown FEC scheme: " + s);
}

double fec_rate(FecKind kind) {
  return kind == FecKind::kRepetition3 ? 1.0 / 3.0 : 4.0 / 7.0;
}

BitStream fec_encode(const BitStream& in, FecKind kind) {
  if (kind == FecKind::kRepetition3) {
    BitStream out = BitStream::zeros(in.nbits * 3);
    for (int64_t i = 0; i < in.nbits; ++i) {
      const int b = in.get(i);
      out.set(3 * i, b);
      out.set(3 * i + 1, b);
      out.set(3 * i + 2, b);
    }
    return out;
  }
  if (in.nbits % 4 != 0)
    throw ConfigError("hamming74: payload length must be a multiple of 4");
  const int64_t blocks = in.nbits / 4;
  BitStream out = BitStream::zeros(blocks * 7);
  for (int64_t bl = 0; bl < blocks; ++bl) {
    const int d1 = in.get(4 * bl), d2 = in.get(4 * bl + 1), d3 = in.get(4 * bl + 2),
              d4 = in.get(4 * bl + 3);
    const int p1 = d1 ^ d2 ^ d4;
    const int p2 = d1 ^ d3 ^ d4;
    const int p3 = d2 ^ d3 ^ d4;
    const int word[7] = {p1, p2, d1, p3, d2, d3, d4};  // parity at positions 1,2,4
    for (int k = 0; k < 7; ++k) out.set(7 * bl + k, word[k]);
  }
  return out;
}

BitStream fec_decode(const BitStream& in, FecKind kind) {
  if (kind == FecKind::kRepetition3) {
    if (in.nbits % 3 != 0) throw ConfigError("repetition3: length must be a multiple of 3");
    BitStream out = BitStream::zeros(in.nbits / 3);
    for (int64_t i = 0; i < out.nbits; ++i) {
      const int sum = in.get(3 * i) + in.get(3 * i + 1) + in.get(3 * i + 2);
      out.set(i, sum >= 2 ? 1 : 0);
    }
    return out;
  }
  if (in.nbits % 7 != 0) throw ConfigError("hamming74: length must be a multiple of 7");
  const int64_t blocks = in.nbits / 7;
  BitStream out = BitStream::zeros(blocks * 4);
  for (int64_t bl = 0; bl < blocks; ++bl) {
    int w[8] = {0};  // 1-based positions
    for (int k = 0; k < 7; ++k) w[k + 1] = in.get(7 * bl + k);
    const int s1 = w[1] ^ w[3] ^ w[5] ^ w[7];
    const int s2 = w[2] ^ w[3] ^ w[6] ^ w[7];
    const int s3 = w[4] ^ w[5] ^ w[6] ^ w[7];
    const int errpos = s1 + 2 * s2 + 4 * s3;
    if (errpos != 0) w[errpos] ^= 1;
    out.set(4 * bl, w[3]);
    out.set(4 * bl + 1, w[5]);
    out.set(4 * bl + 2, w[6]);
    out.set(4 * bl + 3, w[7]);
  }
  return out;
}

uint16_t crc16_ccitt(const BitStream& payload) {
  uint16_t crc = 0xFFFF;
  for (int64_t i = 0; i < payload.nbits; ++i) {
    const int top = (crc >> 15) & 1;
    crc = static_cast<uint16_t>(crc << 1);
    if (top ^ payload.get(i)) crc ^= 0x1021;
  }
  return crc;
}

BitStream crc_attach(const BitStream& payload) {
  BitStream out = BitStream::zeros(payload.nbits + 16);
  for (int64_t i = 0; i < payload.nbits; ++i) out.set(i, payload.get(i));
  const uint16_t crc = crc16_ccitt(payload);
  for (int i = 0; i < 16; ++i) out.set(payload.nbits + i, (crc >> (15 - i)) & 1);
  return out;
}

bool crc_check(const BitStream& framed) {
  if (framed.nbits < 16) throw ConfigError("crc_check: frame shorter than the CRC itself");
  return crc16_ccitt(framed) == 0;
}

void BaselineConfig::validate(int chunk_tx_bits) const {
  if (fixed_steps < 1) throw ConfigError("baseline: fixed_steps must be positive");
  if (bit_budget < static_cast<int64_t>(fixed_steps) * chunk_tx_bits) {
    throw ConfigError("baseline: bit budget " + std::to_string(bit_budget) +
                      " cannot cover one attempt per chunk (" +
                      std::to_string(static_cast<int64_t>(fixed_steps) * chunk_tx_bits) + ")");
  }
}

BaselineSession run_baseline_session(const Tensor& feature, const Codec& fixed_codec,
                                     const std::function<Tensor(const Tensor&)>& task_head,
                                     const ChannelModel& ch, const BaselineConfig& cfg,
                                     const StreamKey& key) {
  if (fixed_codec.cfg.min_steps != cfg.fixed_steps || fixed_codec.cfg.max_steps != cfg.fixed_steps)
    throw ConfigError("baseline: codec is not fixed-rate at fixed_steps");

  // Source-encode every chunk up front; the encoder state evolves per step.
  CodecEvalSession tx_session(fixed_codec, feature);
  std::vector<BitStream> coded;
  Shape payload_shape;
  for (int step = 0; step < cfg.fixed_steps; ++step) {
    const SpikeTensor s = tx_session.encode_step();
    payload_shape = s.shape;
    coded.push_back(fec_encode(crc_attach(pack(s)), cfg.scheme));
  }
  const int chunk_tx = static_cast<int>(coded[0].nbits);
  cfg.validate(chunk_tx);

  BaselineSession out;
  uint64_t stream_round = 1;
  bool all_ok = true;
  for (int chunk = 0; chunk < cfg.fixed_steps; ++chunk) {
    const int chunks_after = cfg.fixed_steps - chunk - 1;
    BitStream last_decoded;
    bool ok = false;
    int attempt = 0;
    // Stop-and-wait per chunk; later chunks always keep one attempt's worth
    // of budget.
    while (out.bits_used + chunk_tx + static_cast<int64_t>(chunks_after) * chunk_tx <=
           cfg.bit_budget) {
      ++attempt;
      const BitStream rx = bsc_transmit(coded[static_cast<size_t>(chunk)], ch,
                                        key.with_round(stream_round++));
      out.bits_used += chunk_tx;
      last_decoded = fec_decode(rx, cfg.scheme);
      ok = crc_check(last_decoded);
      out.rounds.push_back({chunk, attempt, chunk_tx, ok});
      if (ok) break;
    }
    all_ok = all_ok && ok;
    // Strip the CRC and feed the (possibly best-effort) payload onward. The
    // session's receive-side neuron states are independent of its encode side.
    BitStream payload = BitStream::zeros(last_decoded.nbits - 16);
    for (int64_t i = 0; i < payload.nbits; ++i) payload.set(i, last_decoded.get(i));
    tx_session.receive_step(unpack(payload, payload_shape));
  }

  out.success = all_ok;
  out.final_feature = tx_session.convert_current();
  out.final_logits = task_head(out.final_feature);
  const int k = static_cast<int>(out.final_logits.size());
  int best = 0;
  for (int j = 1; j < k; ++j)
    if (out.final_logits.v[static_cast<size_t>(j)] > out.final_logits.v[static_cast<size_t>(best)])
      best = j;
  out.predicted_class = best;
  return out;
}

}  // namespace snnsc
