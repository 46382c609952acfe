#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "misim/codec.hpp"

using namespace misim;

TEST_CASE("fp4 decode covers all 16 codes") {
  // E2M1, bias 1: subnormal 0.5 at exponent 0, maximum 1.5 * 2^2 = 6
  const double expect[16] = {0.0, 0.5, 1.0, 1.5, 2.0, 3.0, 4.0,  6.0,
                             -0.0, -0.5, -1.0, -1.5, -2.0, -3.0, -4.0, -6.0};
  for (unsigned c = 0; c < 16; ++c) CHECK(fp4::decode(static_cast<uint8_t>(c)) == expect[c]);
}

TEST_CASE("fp4 decode is monotone over non-negative codes") {
  for (unsigned c = 0; c + 1 < 8; ++c)
    CHECK(fp4::decode(static_cast<uint8_t>(c)) < fp4::decode(static_cast<uint8_t>(c + 1)));
}

TEST_CASE("fp4 encode round trips every code") {
  for (unsigned c = 0; c < 16; ++c) {
    uint8_t back = fp4::encode(fp4::decode(static_cast<uint8_t>(c)));
    if (c == 8)
      CHECK(back == 0);  // -0 folds onto +0
    else
      CHECK(back == c);
  }
}

TEST_CASE("fp4 encode rounds to nearest with ties to even") {
  CHECK(fp4::encode(0.7) == 1);    // nearer 0.5
  CHECK(fp4::encode(0.75) == 2);   // tie 0.5/1.0 -> even mantissa
  CHECK(fp4::encode(1.25) == 2);   // tie 1.0/1.5 -> even
  CHECK(fp4::encode(2.5) == 4);    // tie 2/3 -> even
  CHECK(fp4::encode(5.0) == 6);    // tie 4/6 -> even
  CHECK(fp4::encode(-2.6) == 13);  // nearest -3
  CHECK(fp4::encode(100.0) == 7);  // saturates at 6
  CHECK(fp4::encode(-100.0) == 15);
  CHECK(fp4::encode(0.0) == 0);
  CHECK(fp4::encode(-0.0) == 0);
}

TEST_CASE("posit4 es=1 decode table") {
  const double expect[8] = {0.0, 0.0625, 0.25, 0.5, 1.0, 2.0, 4.0, 16.0};
  for (unsigned c = 0; c < 8; ++c) CHECK(posit4::decode(static_cast<uint8_t>(c), 1) == expect[c]);
  CHECK(std::isnan(posit4::decode(posit4::kNaR, 1)));
  for (unsigned c = 9; c < 16; ++c)
    CHECK(posit4::decode(static_cast<uint8_t>(c), 1) ==
          -posit4::decode(static_cast<uint8_t>(16 - c), 1));
}

TEST_CASE("posit4 es=0 and es=2 decode tables") {
  const double es0[8] = {0.0, 0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 4.0};
  const double es2[8] = {0.0, 1.0 / 256, 1.0 / 16, 0.25, 1.0, 4.0, 16.0, 256.0};
  for (unsigned c = 0; c < 8; ++c) {
    CHECK(posit4::decode(static_cast<uint8_t>(c), 0) == es0[c]);
    CHECK(posit4::decode(static_cast<uint8_t>(c), 2) == es2[c]);
  }
}

TEST_CASE("posit4 known anchor codes") {
  CHECK(posit4::decode(0b0100, 1) == 1.0);   // sign 0, regime 10, exp 0
  CHECK(posit4::decode(0b0111, 1) == 16.0);  // regime k=2 with useed 4
  CHECK(posit4::is_nar(0b1000));
}

TEST_CASE("posit4 decode is strictly monotone over the signed ring") {
  for (unsigned es : {0u, 1u, 2u}) {
    // codes ordered as signed two's complement, NaR (-8) excluded
    double prev = -std::numeric_limits<double>::infinity();
    for (int sc = -7; sc <= 7; ++sc) {
      uint8_t code = static_cast<uint8_t>(sc & 0xF);
      double v = posit4::decode(code, es);
      CHECK(v > prev);
      prev = v;
    }
  }
}

TEST_CASE("posit4 encode round trips every code") {
  for (unsigned es : {0u, 1u, 2u}) {
    for (unsigned c = 0; c < 16; ++c) {
      if (c == posit4::kNaR) continue;
      CHECK(posit4::encode(posit4::decode(static_cast<uint8_t>(c), es), es) == c);
    }
  }
}

TEST_CASE("posit4 encode: nearest, saturating, never to zero") {
  CHECK(posit4::encode(1.4, 1) == 0b0100);   // nearer 1 than 2
  CHECK(posit4::encode(1.5, 1) == 0b0100);   // tie 1/2 -> even code
  CHECK(posit4::encode(3.0, 1) == 0b0110);   // tie 2/4 -> even code
  CHECK(posit4::encode(1000.0, 1) == 0b0111);
  CHECK(posit4::encode(1e-9, 1) == 0b0001);  // below minpos rounds to minpos
  CHECK(posit4::encode(-1e-9, 1) == 0b1111);
  CHECK(posit4::encode(0.0, 1) == 0);
  CHECK_THROWS_AS(posit4::encode(std::nan(""), 1), NaRInput);
  CHECK_THROWS_AS(posit4::encode(std::numeric_limits<double>::infinity(), 1), NaRInput);
}

TEST_CASE("fp4 encode rejects NaN") {
  CHECK_THROWS_AS(fp4::encode(std::nan("")), NaRInput);
}

TEST_CASE("codec selector parses CLI names") {
  CodecSpec f = CodecSpec::parse("fp4");
  CHECK(f.kind == CodecSpec::Kind::fp4);
  CHECK(f.name() == "fp4");
  CodecSpec p = CodecSpec::parse("posit4");
  CHECK(p.kind == CodecSpec::Kind::posit4);
  CHECK(p.es == 1);
  CodecSpec p2 = CodecSpec::parse("posit4:2");
  CHECK(p2.es == 2);
  CHECK(p2.name() == "posit4:2");
  CHECK_THROWS_AS(CodecSpec::parse("fp8"), IoError);
  CHECK_THROWS_AS(CodecSpec::parse("posit4:3"), Error);
}
