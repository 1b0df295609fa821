#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "snnsc/channel.hpp"
#include "test_util.hpp"

using namespace snnsc;
using test::random_spikes;

namespace {

BitStream random_stream(int64_t n, Rng& rng) {
  BitStream b = BitStream::zeros(n);
  for (int64_t i = 0; i < n; ++i) b.set(i, rng.uniform() < 0.5 ? 1 : 0);
  return b;
}

}  // namespace

TEST_CASE("p = 0 is the identity channel") {
  Rng rng(1);
  const BitStream a = random_stream(4096, rng);
  CHECK(bsc_transmit(a, make_channel(0.0), {1, 2, 3}) == a);
}

TEST_CASE("ber outside [0, 0.5] is rejected") {
  CHECK_THROWS_AS(make_channel(-0.1), ConfigError);
  CHECK_THROWS_AS(make_channel(0.6), ConfigError);
}

TEST_CASE("empirical flip rate sits in the 3-sigma binomial interval") {
  const int64_t n = 1000000;
  const BitStream zeros = BitStream::zeros(n);
  for (double p : {0.05, 0.1, 0.3, 0.5}) {
    const BitStream rx = bsc_transmit(zeros, make_channel(p), {42, 7, 0});
    const double rate = empirical_ber(zeros, rx);
    const double sigma = std::sqrt(p * (1 - p) / static_cast<double>(n));
    CHECK(std::fabs(rate - p) <= 3.0 * sigma);
  }
}

TEST_CASE("empirical_ber basics") {
  Rng rng(2);
  const BitStream a = random_stream(512, rng);
  CHECK(empirical_ber(a, a) == 0.0);
  BitStream b = a;
  for (int64_t i = 0; i < b.nbits; ++i) b.set(i, 1 - b.get(i));
  CHECK(empirical_ber(a, b) == 1.0);

  const BitStream x = random_stream(1000000, rng);
  const BitStream y = random_stream(1000000, rng);
  CHECK(std::fabs(empirical_ber(x, y) - 0.5) < 0.0015);

  CHECK_THROWS_AS(empirical_ber(a, random_stream(100, rng)), ShapeError);
}

TEST_CASE("pack/unpack round-trips bit-exactly (property)") {
  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const Shape shape = {1 + rng.uniform_int(3), 1 + rng.uniform_int(5), 1 + rng.uniform_int(5)};
    const SpikeTensor s = random_spikes(shape, rng);
    const BitStream b = pack(s);
    CHECK(b.nbits == s.size());
    const SpikeTensor back = unpack(b, shape);
    CHECK(back.bits == s.bits);
    CHECK(back.shape == s.shape);
  }
  const SpikeTensor payload = random_spikes({2, 4, 4}, rng);
  CHECK(pack(payload).nbits == 32);
  CHECK_THROWS_AS(unpack(BitStream::zeros(31), {2, 4, 4}), ShapeError);
}

TEST_CASE("trailing pad bits in packed words stay zero") {
  Rng rng(4);
  const SpikeTensor s = random_spikes({3, 5, 5}, rng);  // 75 bits -> 2 words
  const BitStream b = pack(s);
  const uint64_t pad_mask = ~((1ULL << (75 - 64)) - 1);
  CHECK((b.words[1] & pad_mask) == 0);
}

TEST_CASE("identical stream keys replay the identical flip pattern") {
  Rng rng(5);
  const BitStream a = random_stream(2048, rng);
  const ChannelModel ch = make_channel(0.2);
  const StreamKey key{99, 1234, 5};
  CHECK(bsc_transmit(a, ch, key) == bsc_transmit(a, ch, key));
  // A different round gives a different pattern.
  CHECK(!(bsc_transmit(a, ch, key) == bsc_transmit(a, ch, key.with_round(6))));

  const SpikeTensor s = random_spikes({4, 4, 4}, rng);
  CHECK(bsc_transmit(s, ch, key).bits == bsc_transmit(s, ch, key).bits);
}

TEST_CASE("flip events look independent across neighbouring bits (chi-square)") {
  const int64_t n = 400000;  // 200k consecutive pairs
  const BitStream zeros = BitStream::zeros(n);
  const BitStream rx = bsc_transmit(zeros, make_channel(0.5), {7, 3, 1});
  int64_t counts[4] = {0, 0, 0, 0};
  for (int64_t i = 0; i + 1 < n; i += 2) counts[rx.get(i) * 2 + rx.get(i + 1)] += 1;
  const double expected = static_cast<double>(n / 2) / 4.0;
  double chi2 = 0;
  for (int64_t c : counts) {
    const double d = static_cast<double>(c) - expected;
    chi2 += d * d / expected;
  }
  CHECK(chi2 < 16.27);  // chi-square(3), p = 0.001
}

TEST_CASE("distinct sessions are decorrelated") {
  const int64_t n = 100000;
  const BitStream zeros = BitStream::zeros(n);
  const ChannelModel ch = make_channel(0.5);
  const BitStream r1 = bsc_transmit(zeros, ch, {11, 1, 0});
  const BitStream r2 = bsc_transmit(zeros, ch, {11, 2, 0});
  // Agreement fraction of two independent fair streams is 0.5 +- 3 sigma.
  const double agree = 1.0 - empirical_ber(r1, r2);
  CHECK(std::fabs(agree - 0.5) < 3.0 * std::sqrt(0.25 / static_cast<double>(n)));
}
