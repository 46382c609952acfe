#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "misim/errors.hpp"

namespace misim {

// A plain bit vector. uint8_t instead of vector<bool> keeps element access
// cheap in the hot simulation loops.
using Bits = std::vector<uint8_t>;

inline Bits bits_from_string(const std::string& s) {
  Bits out;
  out.reserve(s.size());
  for (char c : s) {
    if (c == '0')
      out.push_back(0);
    else if (c == '1')
      out.push_back(1);
    else
      throw IoError("bit string may contain only '0'/'1', got '" + std::string(1, c) + "'");
  }
  return out;
}

inline std::string bits_to_string(const Bits& b) {
  std::string s;
  s.reserve(b.size());
  for (uint8_t v : b) s.push_back(v ? '1' : '0');
  return s;
}

inline Bits random_bits(std::mt19937_64& rng, size_t n) {
  Bits out(n);
  for (auto& b : out) b = static_cast<uint8_t>(rng() & 1u);
  return out;
}

inline Bits bits_from_word(uint64_t w, size_t n) {
  Bits out(n);
  for (size_t i = 0; i < n; ++i) out[i] = static_cast<uint8_t>((w >> i) & 1u);
  return out;
}

inline uint64_t word_from_bits(const Bits& b) {
  uint64_t w = 0;
  for (size_t i = 0; i < b.size() && i < 64; ++i) w |= static_cast<uint64_t>(b[i]) << i;
  return w;
}

// 128-bit helpers; lane accumulators and wide reduction results do not fit
// in 64 bits at the largest precision mode.
using swide = __int128;
using uwide = unsigned __int128;

inline std::string wide_to_string(swide v) {
  if (v == 0) return "0";
  bool neg = v < 0;
  uwide u = neg ? static_cast<uwide>(-(v + 1)) + 1 : static_cast<uwide>(v);
  std::string digits;
  while (u > 0) {
    digits.push_back(static_cast<char>('0' + static_cast<int>(u % 10)));
    u /= 10;
  }
  if (neg) digits.push_back('-');
  return std::string(digits.rbegin(), digits.rend());
}

}  // namespace misim
