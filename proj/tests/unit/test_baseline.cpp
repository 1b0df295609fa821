#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "snnsc/baseline.hpp"
#include "test_util.hpp"

using namespace snnsc;
using test::random_tensor;

namespace {

BitStream from_bytes_msb(const std::string& bytes) {
  BitStream b = BitStream::zeros(static_cast<int64_t>(bytes.size()) * 8);
  for (size_t i = 0; i < bytes.size(); ++i)
    for (int k = 0; k < 8; ++k)
      b.set(static_cast<int64_t>(i) * 8 + k, (static_cast<unsigned char>(bytes[i]) >> (7 - k)) & 1);
  return b;
}

// Independent table-driven implementation used as the oracle.
uint16_t crc16_table_oracle(const std::string& bytes) {
  static uint16_t table[256];
  static bool built = false;
  if (!built) {
    for (int n = 0; n < 256; ++n) {
      uint16_t c = static_cast<uint16_t>(n << 8);
      for (int k = 0; k < 8; ++k) c = static_cast<uint16_t>((c & 0x8000) ? (c << 1) ^ 0x1021 : c << 1);
      table[n] = c;
    }
    built = true;
  }
  uint16_t crc = 0xFFFF;
  for (unsigned char ch : bytes)
    crc = static_cast<uint16_t>((crc << 8) ^ table[((crc >> 8) ^ ch) & 0xFF]);
  return crc;
}

BitStream random_stream(int64_t n, Rng& rng) {
  BitStream b = BitStream::zeros(n);
  for (int64_t i = 0; i < n; ++i) b.set(i, rng.uniform() < 0.5 ? 1 : 0);
  return b;
}

}  // namespace

TEST_CASE("crc16 check value and empty-message convention") {
  CHECK(crc16_ccitt(from_bytes_msb("123456789")) == 0x29B1);
  CHECK(crc16_table_oracle("123456789") == 0x29B1);
  // Empty payload: the register never moves, so the CRC is the 0xFFFF init.
  CHECK(crc16_ccitt(BitStream::zeros(0)) == 0xFFFF);
  CHECK(crc16_table_oracle("") == 0xFFFF);
}

TEST_CASE("bitwise crc matches the independent table oracle on random bytes") {
  Rng rng(1);
  for (int trial = 0; trial < 50; ++trial) {
    std::string bytes(static_cast<size_t>(1 + rng.uniform_int(64)), '\0');
    for (char& c : bytes) c = static_cast<char>(rng.uniform_int(256));
    CHECK(crc16_ccitt(from_bytes_msb(bytes)) == crc16_table_oracle(bytes));
  }
}

TEST_CASE("crc round trip passes and every single-bit flip is detected") {
  Rng rng(2);
  const BitStream payload = random_stream(512, rng);
  const BitStream framed = crc_attach(payload);
  CHECK(framed.nbits == 528);
  CHECK(crc_check(framed));
  for (int64_t i = 0; i < framed.nbits; ++i) {
    BitStream corrupted = framed;
    corrupted.set(i, 1 - corrupted.get(i));
    CHECK(!crc_check(corrupted));
  }
}

TEST_CASE("fec round-trips on a noiseless channel") {
  Rng rng(3);
  for (FecKind kind : {FecKind::kRepetition3, FecKind::kHamming74}) {
    const BitStream payload = random_stream(48, rng);
    CHECK(fec_decode(fec_encode(payload, kind), kind) == payload);
  }
  CHECK(fec_rate(FecKind::kRepetition3) == doctest::Approx(1.0 / 3.0));
  CHECK(fec_rate(FecKind::kHamming74) == doctest::Approx(4.0 / 7.0));
  CHECK_THROWS_AS(fec_encode(random_stream(5, rng), FecKind::kHamming74), ConfigError);
  CHECK_THROWS_AS(fec_decode(random_stream(5, rng), FecKind::kRepetition3), ConfigError);
}

TEST_CASE("hamming(7,4) corrects any single flipped bit per block (exhaustive)") {
  for (int nibble = 0; nibble < 16; ++nibble) {
    BitStream data = BitStream::zeros(4);
    for (int k = 0; k < 4; ++k) data.set(k, (nibble >> k) & 1);
    const BitStream code = fec_encode(data, FecKind::kHamming74);
    CHECK(fec_decode(code, FecKind::kHamming74) == data);
    for (int pos = 0; pos < 7; ++pos) {
      BitStream corrupted = code;
      corrupted.set(pos, 1 - corrupted.get(pos));
      CHECK(fec_decode(corrupted, FecKind::kHamming74) == data);
    }
  }
}

TEST_CASE("repetition-3 residual error at p = 0.3 matches 3p^2(1-p) + p^3") {
  const int64_t n = 1000000;
  const BitStream payload = BitStream::zeros(n);
  const BitStream coded = fec_encode(payload, FecKind::kRepetition3);
  const BitStream rx = bsc_transmit(coded, make_channel(0.3), {5, 0, 0});
  const BitStream decoded = fec_decode(rx, FecKind::kRepetition3);
  const double residual = empirical_ber(payload, decoded);
  const double expected = 3 * 0.3 * 0.3 * 0.7 + 0.3 * 0.3 * 0.3;  // 0.216
  CHECK(expected == doctest::Approx(0.216).epsilon(1e-12));
  const double sigma = std::sqrt(expected * (1 - expected) / static_cast<double>(n));
  CHECK(std::fabs(residual - expected) <= 4.0 * sigma);
}

namespace {

struct BaselineFixture {
  Config cfg;
  ModelParams mp;
  Backbone backbone;
  Codec codec;

  BaselineFixture() {
    cfg = Config::defaults();
    Rng init(7);
    backbone = Backbone::attach(mp, cfg, &init);
    codec = Codec::attach(mp, CodecConfig::baseline_from(cfg), &init);
  }

  BaselineSession run(double ber, uint64_t session, BaselineConfig bc = {}) {
    Rng rng(session + 100);
    const Tensor f =
        random_tensor({1, cfg.split_channels, cfg.feature_size(), cfg.feature_size()}, rng);
    const auto task = [&](const Tensor& fp) { return backbone.execute_task(fp); };
    return run_baseline_session(f, codec, task, make_channel(ber), bc, {17, session, 0});
  }
};

}  // namespace

TEST_CASE("noiseless baseline session: first-round CRC passes, minimum bandwidth") {
  BaselineFixture fx;
  const BaselineSession s = fx.run(0.0, 1);
  CHECK(s.success);
  // chunk = (32 payload + 16 crc) * 3 code rate = 144 bits, 3 chunks
  CHECK(s.bits_used == 3 * 144);
  CHECK(s.rounds.size() == 3);
  for (const auto& r : s.rounds) {
    CHECK(r.crc_ok);
    CHECK(r.attempt == 1);
  }
  CHECK(s.predicted_class >= 0);
}

TEST_CASE("all-correctable sessions reproduce the noiseless feature bit-exactly") {
  BaselineFixture fx;
  // p = 0.02 with repetition-3: most sessions decode every chunk exactly.
  int compared = 0;
  for (uint64_t session = 3; session < 13; ++session) {
    const BaselineSession clean = fx.run(0.0, session);
    const BaselineSession noisy = fx.run(0.02, session);  // same feature, noisy channel
    if (noisy.success) {
      CHECK(noisy.final_feature.v == clean.final_feature.v);
      CHECK(noisy.predicted_class == clean.predicted_class);
      ++compared;
    }
  }
  CHECK(compared > 0);
}

TEST_CASE("heavy noise exhausts the budget and keeps best-effort decodes") {
  BaselineFixture fx;
  BaselineConfig bc;
  bc.bit_budget = 864;  // 6 chunk transmissions of 144 bits
  const BaselineSession s = fx.run(0.5, 4, bc);
  CHECK(!s.success);
  CHECK(s.bits_used <= bc.bit_budget);
  // Every chunk still got at least one attempt.
  int max_chunk = -1;
  for (const auto& r : s.rounds) max_chunk = std::max(max_chunk, r.chunk);
  CHECK(max_chunk == 2);
  CHECK(all_finite(s.final_logits));
}

TEST_CASE("budget too small for one attempt per chunk is a config error") {
  BaselineFixture fx;
  BaselineConfig bc;
  bc.bit_budget = 400;  // < 3 * 144
  CHECK_THROWS_AS(fx.run(0.1, 5, bc), ConfigError);
}
