#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "misim/mac.hpp"

using namespace misim;

namespace {

int64_t rand_operand(std::mt19937_64& rng, const PrecisionMode& mode) {
  if (mode.sign == Signedness::bipolar) return (rng() & 1) ? 1 : -1;
  swide lo = mode.min_value(), hi = mode.max_value();
  // uniform over the n-bit pattern space, reinterpreted per mode
  uint64_t mask = mode.bits == 64 ? ~uint64_t(0) : ((uint64_t(1) << mode.bits) - 1);
  uint64_t raw = rng() & mask;
  int64_t v;
  if (mode.sign == Signedness::twos_complement && mode.bits < 64 &&
      (raw >> (mode.bits - 1) & 1))
    v = static_cast<int64_t>(raw | (~uint64_t(0) << mode.bits));
  else
    v = static_cast<int64_t>(raw);
  if (!(v >= lo && v <= hi)) v = static_cast<int64_t>(hi);  // uint64 clamp
  return v;
}

swide dot_oracle(const std::vector<int64_t>& a, const std::vector<int64_t>& b) {
  swide s = 0;
  for (size_t i = 0; i < a.size(); ++i) s += swide(a[i]) * swide(b[i]);
  return s;
}

}  // namespace

TEST_CASE("precision modes obey the lane law") {
  const unsigned widths[] = {1, 2, 4, 8, 16, 32, 64};
  const size_t lanes[] = {4096, 1024, 256, 64, 16, 4, 1};
  for (size_t i = 0; i < 7; ++i) {
    PrecisionMode m(widths[i], Signedness::twos_complement);
    CHECK(m.lanes() == lanes[i]);
    CHECK(m.lanes() * widths[i] * widths[i] == 4096);
  }
  CHECK_THROWS_AS(PrecisionMode(3, Signedness::unsigned_int), Error);
  CHECK_THROWS_AS(PrecisionMode(2, Signedness::bipolar), Error);
}

TEST_CASE("mode parsing") {
  CHECK(PrecisionMode::parse("int8").bits == 8);
  CHECK(PrecisionMode::parse("int8").sign == Signedness::twos_complement);
  CHECK(PrecisionMode::parse("uint4").sign == Signedness::unsigned_int);
  CHECK(PrecisionMode::parse("bipolar").sign == Signedness::bipolar);
  CHECK_THROWS_AS(PrecisionMode::parse("float16"), IoError);
}

TEST_CASE("pass cycle formula") {
  CHECK(pass_cycles(1) == 2);    // 1 + 0 + 1
  CHECK(pass_cycles(2) == 6);    // 4 + 1 + 1
  CHECK(pass_cycles(8) == 68);   // 64 + 3 + 1
  CHECK(pass_cycles(64) == 4103);
}

TEST_CASE("xac identities") {
  std::mt19937_64 rng(301);
  CompressorSpec exact = CompressorSpec::exact();
  for (size_t n : {8u, 64u, 256u}) {
    Bits v = random_bits(rng, n);
    Bits nv(n);
    for (size_t i = 0; i < n; ++i) nv[i] = v[i] ^ 1;
    CHECK(xac(v, v, exact) == static_cast<int64_t>(n));
    CHECK(xac(v, nv, exact) == -static_cast<int64_t>(n));
  }
}

TEST_CASE("xac equals the +/-1 dot product oracle") {
  std::mt19937_64 rng(302);
  CompressorSpec exact = CompressorSpec::exact();
  for (int t = 0; t < 200; ++t) {
    Bits a = random_bits(rng, 64), b = random_bits(rng, 64);
    int64_t want = 0;
    for (size_t i = 0; i < 64; ++i) want += (a[i] ? 1 : -1) * (b[i] ? 1 : -1);
    CHECK(xac(a, b, exact) == want);
  }
}

TEST_CASE("xac rejects mismatched lengths") {
  CHECK_THROWS_AS(xac(Bits(4, 1), Bits(5, 1), CompressorSpec::exact()), LengthMismatch);
}

TEST_CASE("mac single products") {
  CompressorSpec exact = CompressorSpec::exact();
  CHECK(mac({5}, {3}, PrecisionMode(4, Signedness::unsigned_int), exact).total == 15);
  CHECK(mac({-8}, {7}, PrecisionMode(8, Signedness::twos_complement), exact).total == -56);
  CHECK(mac({-8}, {-8}, PrecisionMode(4, Signedness::twos_complement), exact).total == 64);
  CHECK(mac({0}, {7}, PrecisionMode(8, Signedness::twos_complement), exact).total == 0);
}

TEST_CASE("mac matches the integer dot-product oracle in every mode") {
  std::mt19937_64 rng(303);
  CompressorSpec exact = CompressorSpec::exact();
  for (unsigned bits : {1u, 2u, 4u, 8u, 16u, 32u, 64u}) {
    for (Signedness sign : {Signedness::twos_complement, Signedness::unsigned_int}) {
      PrecisionMode mode(bits, sign);
      size_t len = std::min<size_t>(mode.lanes(), 64);
      for (int t = 0; t < 40; ++t) {
        std::vector<int64_t> a(len), b(len);
        for (size_t i = 0; i < len; ++i) {
          a[i] = rand_operand(rng, mode);
          b[i] = rand_operand(rng, mode);
        }
        MacResult r = mac(a, b, mode, exact);
        CHECK(r.total == dot_oracle(a, b));
        for (size_t i = 0; i < len; ++i) CHECK(r.lane_values[i] == swide(a[i]) * swide(b[i]));
      }
    }
  }
  // bipolar
  PrecisionMode bip(1, Signedness::bipolar);
  for (int t = 0; t < 40; ++t) {
    std::vector<int64_t> a(64), b(64);
    for (size_t i = 0; i < 64; ++i) {
      a[i] = rand_operand(rng, bip);
      b[i] = rand_operand(rng, bip);
    }
    CHECK(mac(a, b, bip, exact).total == dot_oracle(a, b));
  }
}

TEST_CASE("mac accounting fields") {
  CompressorSpec exact = CompressorSpec::exact();
  PrecisionMode mode(8, Signedness::twos_complement);
  std::vector<int64_t> a(64, 3), b(64, -5);
  MacResult r = mac(a, b, mode, exact);
  CHECK(r.passes == 1);
  CHECK(r.cycle_count == pass_cycles(8));
  CHECK(r.bit_op_count == 2ull * 64 * 64);
}

TEST_CASE("mac error paths") {
  CompressorSpec exact = CompressorSpec::exact();
  PrecisionMode i8(8, Signedness::twos_complement);
  CHECK_THROWS_AS(mac({1, 2}, {1}, i8, exact), LengthMismatch);
  CHECK_THROWS_AS(mac({200}, {1}, i8, exact), OperandOutOfRange);
  std::vector<int64_t> big(65, 1);
  CHECK_THROWS_AS(mac(big, big, i8, exact), CapacityExceeded);
}

TEST_CASE("lane isolation: perturbing one lane moves only that lane") {
  std::mt19937_64 rng(304);
  CompressorSpec exact = CompressorSpec::exact();
  PrecisionMode mode(8, Signedness::twos_complement);
  std::vector<int64_t> a(64), b(64);
  for (size_t i = 0; i < 64; ++i) {
    a[i] = rand_operand(rng, mode);
    b[i] = rand_operand(rng, mode);
  }
  MacResult base = mac(a, b, mode, exact);
  std::vector<int64_t> a2 = a;
  a2[17] = a[17] == 5 ? 6 : 5;
  MacResult moved = mac(a2, b, mode, exact);
  for (size_t i = 0; i < 64; ++i) {
    if (i == 17)
      CHECK(moved.lane_values[i] == swide(a2[17]) * b[17]);
    else
      CHECK(moved.lane_values[i] == base.lane_values[i]);
  }
}

TEST_CASE("lane pack and unpack round trip") {
  std::mt19937_64 rng(305);
  SECTION("256 random int4 weights") {
    PrecisionMode mode(4, Signedness::twos_complement);
    std::vector<int64_t> w(256);
    for (auto& v : w) v = rand_operand(rng, mode);
    CellArray arr = lane_pack(w, mode);
    CHECK(lane_unpack(arr, mode, w.size()) == w);
  }
  SECTION("single zero weight leaves its tile clear") {
    PrecisionMode mode(8, Signedness::twos_complement);
    CellArray arr = lane_pack({0}, mode);
    for (size_t r = 0; r < 8; ++r)
      for (size_t c = 0; c < 8; ++c) CHECK(arr.bit(r, c) == 0);
  }
  SECTION("int32 mode fills the whole array with 4 lanes") {
    PrecisionMode mode(32, Signedness::twos_complement);
    std::vector<int64_t> w = {-2000000000, 0x12345678, -1, 7};
    CellArray arr = lane_pack(w, mode);
    CHECK(lane_unpack(arr, mode, 4) == w);
    CHECK(mode.lanes() == 4);
    std::vector<int64_t> five(5, 1);
    CHECK_THROWS_AS(lane_pack(five, mode), CapacityExceeded);
  }
  SECTION("bipolar weights") {
    PrecisionMode mode(1, Signedness::bipolar);
    std::vector<int64_t> w(100);
    for (auto& v : w) v = (rng() & 1) ? 1 : -1;
    CellArray arr = lane_pack(w, mode);
    CHECK(lane_unpack(arr, mode, w.size()) == w);
  }
}

TEST_CASE("simd_pass: all-ones 1-bit pass yields 4096 unit products") {
  PrecisionMode mode(1, Signedness::unsigned_int);
  std::vector<int64_t> w(4096, 1), x(4096, 1);
  CellArray arr = lane_pack(w, mode);
  MacResult r = simd_pass(x, arr, mode, CompressorSpec::exact());
  REQUIRE(r.lane_values.size() == 4096);
  for (swide v : r.lane_values) CHECK(v == 1);
  CHECK(r.bit_op_count == 2 * 4096);
  CHECK(r.total == 4096);
}

TEST_CASE("simd_pass matches per-lane product oracles at int8") {
  std::mt19937_64 rng(306);
  PrecisionMode mode(8, Signedness::twos_complement);
  std::vector<int64_t> w(64), x(64);
  for (size_t i = 0; i < 64; ++i) {
    w[i] = rand_operand(rng, mode);
    x[i] = rand_operand(rng, mode);
  }
  CellArray arr = lane_pack(w, mode);
  MacResult r = simd_pass(x, arr, mode, CompressorSpec::exact());
  for (size_t i = 0; i < 64; ++i) CHECK(r.lane_values[i] == swide(x[i]) * w[i]);
}

TEST_CASE("simd_pass bipolar equals xac per lane") {
  std::mt19937_64 rng(307);
  PrecisionMode mode(1, Signedness::bipolar);
  std::vector<int64_t> w(4096), x(4096);
  for (size_t i = 0; i < 4096; ++i) {
    w[i] = (rng() & 1) ? 1 : -1;
    x[i] = (rng() & 1) ? 1 : -1;
  }
  CellArray arr = lane_pack(w, mode);
  MacResult r = simd_pass(x, arr, mode, CompressorSpec::exact());
  swide want_total = 0;
  for (size_t i = 0; i < 4096; ++i) {
    CHECK(r.lane_values[i] == x[i] * w[i]);
    want_total += x[i] * w[i];
  }
  CHECK(r.total == want_total);
}

TEST_CASE("simd_pass covers the wider and unsigned modes") {
  std::mt19937_64 rng(309);
  for (const char* name : {"int16", "int32", "uint4"}) {
    PrecisionMode mode = PrecisionMode::parse(name);
    size_t lanes = mode.lanes();
    std::vector<int64_t> w(lanes), x(lanes);
    for (size_t i = 0; i < lanes; ++i) {
      w[i] = rand_operand(rng, mode);
      x[i] = rand_operand(rng, mode);
    }
    CellArray arr = lane_pack(w, mode);
    MacResult r = simd_pass(x, arr, mode, CompressorSpec::exact());
    for (size_t i = 0; i < lanes; ++i) CHECK(r.lane_values[i] == swide(x[i]) * w[i]);
  }
}

TEST_CASE("lane packing honors non-default geometry") {
  std::mt19937_64 rng(310);
  PrecisionMode mode(4, Signedness::twos_complement);
  // a 32x32 array holds 1024 cells: 64 int4 lanes
  std::vector<int64_t> w(64), x(64);
  for (size_t i = 0; i < 64; ++i) {
    w[i] = rand_operand(rng, mode);
    x[i] = rand_operand(rng, mode);
  }
  CellArray arr = lane_pack(w, mode, 32, 32);
  CHECK(lane_unpack(arr, mode, 64) == w);
  MacResult r = simd_pass(x, arr, mode, CompressorSpec::exact());
  REQUIRE(r.lane_values.size() == 64);
  for (size_t i = 0; i < 64; ++i) CHECK(r.lane_values[i] == swide(x[i]) * w[i]);
  std::vector<int64_t> over(65, 1);
  CHECK_THROWS_AS(lane_pack(over, mode, 32, 32), CapacityExceeded);
}

TEST_CASE("simd_pass rejects oversubscribed inputs") {
  PrecisionMode mode(8, Signedness::twos_complement);
  CellArray arr = lane_pack(std::vector<int64_t>(64, 1), mode);
  CHECK_THROWS_AS(simd_pass(std::vector<int64_t>(65, 1), arr, mode, CompressorSpec::exact()),
                  ModeMismatch);
}

TEST_CASE("approximate spec stays within the scaled error bound at int8") {
  std::mt19937_64 rng(308);
  CompressorSpec approx = CompressorSpec::approx();
  CompressorSpec exact = CompressorSpec::exact();
  PrecisionMode mode(8, Signedness::twos_complement);
  // bound: per deviated compressor the value drops by 2 at its column weight;
  // only columns below the placement limit deviate
  for (int t = 0; t < 200; ++t) {
    std::vector<int64_t> a(64), b(64);
    for (size_t i = 0; i < 64; ++i) {
      a[i] = rand_operand(rng, mode);
      b[i] = rand_operand(rng, mode);
    }
    MacResult got = mac(a, b, mode, approx);
    swide ref = dot_oracle(a, b);
    // window span 2n + log2(64) + 2 = 24 columns, low quarter approximable
    ReductionTree probe = ReductionTree::from_columns(std::vector<size_t>(24, 4));
    swide slack = 0;
    for (int col = 0; col < probe.approx_column_limit(); ++col)
      slack += swide(4) * 64 * (swide(1) << (col + 1));
    CHECK(got.total >= ref - slack);
    CHECK(got.total <= ref + slack);
  }
}
