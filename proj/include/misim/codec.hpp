#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>

#include "misim/errors.hpp"

namespace misim {

// E2M1 minifloat: 1 sign, 2 exponent, 1 mantissa, bias 1, subnormals at
// exponent 0, no infinities or NaN. Decode is total over the 16 codes.
namespace fp4 {

inline constexpr double kMax = 6.0;

inline double decode(uint8_t code) {
  static constexpr std::array<double, 8> mag = {0.0, 0.5, 1.0, 1.5, 2.0, 3.0, 4.0, 6.0};
  double v = mag[code & 7u];
  return (code & 8u) ? -v : v;
}

// Nearest code, ties to even (mantissa LSB zero), saturating at +/-6.
// encode(0) is +0; -0 exists as a code but is never produced.
inline uint8_t encode(double x) {
  if (std::isnan(x)) throw NaRInput("fp4 cannot encode NaN");
  uint8_t sign = std::signbit(x) ? 8u : 0u;
  double a = std::fabs(x);
  if (a == 0.0) return 0;
  if (a >= kMax) return sign | 7u;
  static constexpr std::array<double, 8> mag = {0.0, 0.5, 1.0, 1.5, 2.0, 3.0, 4.0, 6.0};
  uint8_t best = 0;
  double best_d = a;
  for (uint8_t c = 1; c < 8; ++c) {
    double d = std::fabs(a - mag[c]);
    if (d < best_d || (d == best_d && (c & 1u) == 0)) {
      best_d = d;
      best = c;
    }
  }
  if (best == 0) return 0;  // +0 regardless of sign
  return sign | best;
}

}  // namespace fp4

// 4-bit posit with configurable exponent size (es in {0,1,2}, default 1).
// Code 0000 is zero, 1000 is NaR; negative codes are the two's complement of
// their magnitude, so decode(-c mod 16) = -decode(c).
namespace posit4 {

inline constexpr uint8_t kNaR = 0x8;

inline bool is_nar(uint8_t code) { return (code & 0xF) == kNaR; }

inline void check_es(unsigned es) {
  if (es > 2) throw Error("posit4 es must be 0, 1 or 2");
}

// NaR decodes to quiet NaN.
inline double decode(uint8_t code, unsigned es = 1) {
  check_es(es);
  code &= 0xF;
  if (code == 0) return 0.0;
  if (code == kNaR) return std::numeric_limits<double>::quiet_NaN();
  bool neg = code & 8u;
  uint8_t body = neg ? static_cast<uint8_t>((16 - code) & 7u) : static_cast<uint8_t>(code & 7u);
  // regime: run of identical bits, then terminator, then exponent bits
  // (missing low exponent bits read as zero), then fraction
  int pos = 2;
  bool r = (body >> 2) & 1u;
  int run = 0;
  while (pos >= 0 && (((body >> pos) & 1u) != 0) == r) {
    ++run;
    --pos;
  }
  if (pos >= 0) --pos;  // terminator
  int k = r ? run - 1 : -run;
  int e = 0;
  for (unsigned i = 0; i < es; ++i) {
    int bit = pos >= 0 ? ((body >> pos) & 1) : 0;
    if (pos >= 0) --pos;
    e = (e << 1) | bit;
  }
  double frac = 1.0, w = 0.5;
  while (pos >= 0) {
    frac += ((body >> pos) & 1) * w;
    w *= 0.5;
    --pos;
  }
  double v = std::ldexp(frac, k * (1 << es) + e);
  return neg ? -v : v;
}

inline double max_value(unsigned es) {
  return decode(0x7, es);
}
inline double min_positive(unsigned es) {
  return decode(0x1, es);
}

// Nearest-value rounding with ties to the even code. Nonzero magnitudes
// never round to zero or past the extremes: below minpos encodes minpos,
// above maxpos encodes maxpos.
inline uint8_t encode(double x, unsigned es = 1) {
  check_es(es);
  if (std::isnan(x) || std::isinf(x)) throw NaRInput("posit4 cannot encode NaN/inf");
  if (x == 0.0) return 0;
  bool neg = x < 0;
  double a = std::fabs(x);
  uint8_t best = 1;
  double best_d = std::numeric_limits<double>::infinity();
  for (uint8_t c = 1; c < 8; ++c) {
    double d = std::fabs(a - decode(c, es));
    if (d < best_d || (d == best_d && (c & 1u) == 0)) {
      best_d = d;
      best = c;
    }
  }
  return neg ? static_cast<uint8_t>((16 - best) & 0xF) : best;
}

}  // namespace posit4

// Codec selector shared by the LUT machinery and the CLI (--codec fp4 or
// --codec posit4[:es]).
struct CodecSpec {
  enum class Kind { fp4, posit4 };
  Kind kind = Kind::fp4;
  unsigned es = 1;

  static CodecSpec parse(const std::string& s) {
    if (s == "fp4") return {Kind::fp4, 0};
    if (s == "posit4") return {Kind::posit4, 1};
    if (s.rfind("posit4:", 0) == 0) {
      unsigned es = static_cast<unsigned>(std::stoul(s.substr(7)));
      posit4::check_es(es);
      return {Kind::posit4, es};
    }
    throw IoError("unknown codec: " + s + " (expected fp4 or posit4[:es])");
  }

  std::string name() const {
    if (kind == Kind::fp4) return "fp4";
    return "posit4:" + std::to_string(es);
  }

  double decode(uint8_t code) const {
    return kind == Kind::fp4 ? fp4::decode(code) : posit4::decode(code, es);
  }
  uint8_t encode(double x) const {
    return kind == Kind::fp4 ? fp4::encode(x) : posit4::encode(x, es);
  }
  bool is_nar(uint8_t code) const {
    return kind == Kind::posit4 && posit4::is_nar(code);
  }
};

}  // namespace misim
