#pragma once

#include <cstdint>
#include <vector>

#include "snnsc/rng.hpp"
#include "snnsc/tensor.hpp"

namespace snnsc {

// Binary symmetric channel with bit error rate p in [0, 0.5].
struct ChannelModel {
  double ber = 0.0;
};

ChannelModel make_channel(double ber);

// Identifies one RNG substream. Flip decisions are a pure function of
// (seed, session, round, bit index), so transcripts replay exactly and
// concurrent sessions never share randomness.
struct StreamKey {
  uint64_t seed = 0;
  uint64_t session = 0;
  uint64_t round = 0;

  StreamKey with_round(uint64_t r) const { return {seed, session, r}; }
};

// Packed bit carrier. Words are LSB-first; trailing pad bits are zero.
struct BitStream {
  int64_t nbits = 0;
  std::vector<uint64_t> words;

  static BitStream zeros(int64_t n);
  int get(int64_t i) const { return static_cast<int>((words[static_cast<size_t>(i >> 6)] >> (i & 63)) & 1u); }
  void set(int64_t i, int bit);
  bool operator==(const BitStream& o) const { return nbits == o.nbits && words == o.words; }
};

BitStream bsc_transmit(const BitStream& in, const ChannelModel& ch, const StreamKey& key);
SpikeTensor bsc_transmit(const SpikeTensor& in, const ChannelModel& ch, const StreamKey& key);

// Hamming distance / length. Lengths must match.
double empirical_ber(const BitStream& a, const BitStream& b);
int64_t hamming_distance(const BitStream& a, const BitStream& b);

BitStream pack(const SpikeTensor& s);
SpikeTensor unpack(const BitStream& bs, const Shape& shape);

uint64_t bitstream_digest(const BitStream& bs);

}  // namespace snnsc
