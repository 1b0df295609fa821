#pragma once

#include <functional>

#include "snnsc/channel.hpp"
#include "snnsc/codec.hpp"

namespace snnsc {

// Simple FEC stand-ins for the separate-coding baseline. Both satisfy
// decode(encode(x)) == x on a noiseless channel.
enum class FecKind { kRepetition3, kHamming74 };

FecKind fec_from_string(const std::string& s);
double fec_rate(FecKind kind);
BitStream fec_encode(const BitStream& in, FecKind kind);
// Repetition: per-bit majority. Hamming(7,4): per-block single-error
// correction via syndrome. Encoded length must be a multiple of the block.
BitStream fec_decode(const BitStream& in, FecKind kind);

// CRC-16/CCITT-FALSE over the bit stream, MSB-first: polynomial 0x1021,
// initial value 0xFFFF, no reflection, no final XOR.
uint16_t crc16_ccitt(const BitStream& payload);
BitStream crc_attach(const BitStream& payload);  // payload ++ 16 CRC bits, MSB first
bool crc_check(const BitStream& framed);         // true iff the residue is zero

struct BaselineConfig {
  FecKind scheme = FecKind::kRepetition3;
  int fixed_steps = 3;       // source codec runs exactly this many steps
  int64_t bit_budget = 864;  // total transmitted (FEC-encoded) bits allowed

  void validate(int chunk_tx_bits) const;
};

struct BaselineRound {
  int chunk = 0;
  int attempt = 0;
  int64_t bits = 0;
  bool crc_ok = false;
};

struct BaselineSession {
  std::vector<BaselineRound> rounds;
  int64_t bits_used = 0;
  bool success = false;  // every chunk passed its CRC
  Tensor final_feature;
  Tensor final_logits;
  int predicted_class = -1;
};

// Separate source/channel coding: each per-step payload becomes one chunk
// (payload ++ CRC-16, FEC-encoded). A failed CRC retransmits that chunk until
// it passes or the bit budget is exhausted; exhausted chunks keep their last
// best-effort decode. The decoded payloads drive the fixed-rate
// reconstructor, and the result feeds the task head.
BaselineSession run_baseline_session(const Tensor& feature, const Codec& fixed_codec,
                                     const std::function<Tensor(const Tensor&)>& task_head,
                                     const ChannelModel& ch, const BaselineConfig& cfg,
                                     const StreamKey& key);

}  // namespace snnsc
