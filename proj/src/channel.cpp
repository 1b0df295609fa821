#include "snnsc/channel.hpp"

#include <bit>

namespace snnsc {

ChannelModel make_channel(double ber) {
  if (!(ber >= 0.0 && ber <= 0.5)) throw ConfigError("channel: ber must be in [0, 0.5]");
  return ChannelModel{ber};
}

BitStream BitStream::zeros(int64_t n) {
  if (n < 0) throw ConfigError("bitstream: negative length");
  BitStream b;
  b.nbits = n;
  b.words.assign(static_cast<size_t>((n + 63) / 64), 0);
  return b;
}

void BitStream::set(int64_t i, int bit) {
  const uint64_t mask = 1ULL << (i & 63);
  if (bit)
    words[static_cast<size_t>(i >> 6)] |= mask;
  else
    words[static_cast<size_t>(i >> 6)] &= ~mask;
}

BitStream bsc_transmit(const BitStream& in, const ChannelModel& ch, const StreamKey& key) {
  BitStream out = in;
  if (ch.ber <= 0.0) return out;
  for (int64_t i = 0; i < in.nbits; ++i) {
    const double u = u64_to_unit(counter_hash(key.seed, key.session, key.round,
                                              static_cast<uint64_t>(i)));
    if (u < ch.ber) out.set(i, 1 - out.get(i));
  }
  return out;
}

SpikeTensor bsc_transmit(const SpikeTensor& in, const ChannelModel& ch, const StreamKey& key) {
  SpikeTensor out = in;
  if (ch.ber <= 0.0) return out;
  for (size_t i = 0; i < out.bits.size(); ++i) {
    const double u = u64_to_unit(counter_hash(key.seed, key.session, key.round,
                                              static_cast<uint64_t>(i)));
    if (u < ch.ber) out.bits[i] ^= 1u;
  }
  return out;
}

int64_t hamming_distance(const BitStream& a, const BitStream& b) {
  if (a.nbits != b.nbits) {
    throw ShapeError("hamming: length mismatch " + std::to_string(a.nbits) + " vs " +
                     std::to_string(b.nbits));
  }
  int64_t d = 0;
  for (size_t w = 0; w < a.words.size(); ++w) d += std::popcount(a.words[w] ^ b.words[w]);
  return d;
}

double empirical_ber(const BitStream& a, const BitStream& b) {
  if (a.nbits == 0) throw ConfigError("empirical_ber: empty streams");
  return static_cast<double>(hamming_distance(a, b)) / static_cast<double>(a.nbits);
}

BitStream pack(const SpikeTensor& s) {
  BitStream b = BitStream::zeros(s.size());
  for (int64_t i = 0; i < s.size(); ++i)
    if (s.bits[static_cast<size_t>(i)]) b.set(i, 1);
  return b;
}

SpikeTensor unpack(const BitStream& bs, const Shape& shape) {
  if (numel(shape) != bs.nbits) {
    throw ShapeError("unpack: stream of " + std::to_string(bs.nbits) + " bits vs shape " +
                     shape_str(shape));
  }
  SpikeTensor s = SpikeTensor::zeros(shape);
  for (int64_t i = 0; i < bs.nbits; ++i) s.bits[static_cast<size_t>(i)] = static_cast<uint8_t>(bs.get(i));
  return s;
}

uint64_t bitstream_digest(const BitStream& bs) {
  uint64_t h = fnv1a64(bs.words.data(), bs.words.size() * sizeof(uint64_t));
  return split_mix64(h ^ static_cast<uint64_t>(bs.nbits));
}

}  // namespace snnsc
