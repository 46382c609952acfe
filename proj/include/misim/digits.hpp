#pragma once

#include <array>
#include <random>
#include <string>
#include <vector>

#include "misim/nn.hpp"

namespace misim {
namespace nn {

// Synthetic 8x8 digit benchmark. Samples are noisy renderings of fixed
// glyphs; the classifier is a two-layer MLP built analytically from class
// centroids (no training loop), which is enough signal for desk-scale
// quality-of-result comparisons.
namespace digits {

inline const std::array<std::string, 10>& glyphs() {
  static const std::array<std::string, 10> g = {
      "..####.."
      ".#....#."
      ".#...##."
      ".#..#.#."
      ".#.#..#."
      ".##...#."
      ".#....#."
      "..####..",  // 0
      "...##..."
      "..###..."
      "...##..."
      "...##..."
      "...##..."
      "...##..."
      "...##..."
      ".######.",  // 1
      "..####.."
      ".#....#."
      "......#."
      ".....#.."
      "....#..."
      "...#...."
      "..#....."
      ".######.",  // 2
      "..####.."
      ".#....#."
      "......#."
      "...###.."
      "......#."
      "......#."
      ".#....#."
      "..####..",  // 3
      ".....##."
      "....#.#."
      "...#..#."
      "..#...#."
      ".#....#."
      ".######."
      "......#."
      "......#.",  // 4
      ".######."
      ".#......"
      ".#......"
      ".#####.."
      "......#."
      "......#."
      ".#....#."
      "..####..",  // 5
      "..####.."
      ".#......"
      ".#......"
      ".#####.."
      ".#....#."
      ".#....#."
      ".#....#."
      "..####..",  // 6
      ".######."
      "......#."
      ".....#.."
      "....#..."
      "...#...."
      "...#...."
      "...#...."
      "...#....",  // 7
      "..####.."
      ".#....#."
      ".#....#."
      "..####.."
      ".#....#."
      ".#....#."
      ".#....#."
      "..####..",  // 8
      "..####.."
      ".#....#."
      ".#....#."
      "..#####."
      "......#."
      "......#."
      "......#."
      "..####..",  // 9
  };
  return g;
}

// One noisy rendering: lit pixels around 12/16, dark around 1/16, plus a
// couple of random flips.
inline std::vector<double> render(int digit, std::mt19937_64& rng) {
  const std::string& glyph = glyphs()[static_cast<size_t>(digit)];
  std::uniform_int_distribution<int> lit(10, 15);
  std::uniform_int_distribution<int> dark(0, 2);
  std::uniform_int_distribution<size_t> pos(0, 63);
  std::vector<double> px(64);
  for (size_t i = 0; i < 64; ++i)
    px[i] = static_cast<double>(glyph[i] == '#' ? lit(rng) : dark(rng)) / 16.0;
  for (int f = 0; f < 2; ++f) {
    size_t i = pos(rng);
    px[i] = 1.0 - px[i];
  }
  return px;
}

inline EvalSet make_dataset(uint64_t seed, size_t count) {
  std::mt19937_64 rng(seed);
  EvalSet set;
  for (size_t s = 0; s < count; ++s) {
    int d = static_cast<int>(s % 10);
    set.features.push_back(render(d, rng));
    set.labels.push_back(d);
  }
  return set;
}

// Two-layer MLP: hidden row k < 10 is the centered centroid of class k,
// rows 10..15 are contrasts between commonly confused pairs; the output
// layer routes each hidden feature to its class.
inline Model make_mlp(uint64_t seed, unsigned bits = 4, double prune_fraction = 0.40) {
  std::mt19937_64 rng(seed);
  const size_t per_class = 24;
  std::array<std::vector<double>, 10> centroid;
  for (int d = 0; d < 10; ++d) {
    centroid[static_cast<size_t>(d)].assign(64, 0.0);
    for (size_t s = 0; s < per_class; ++s) {
      auto px = render(d, rng);
      for (size_t i = 0; i < 64; ++i) centroid[static_cast<size_t>(d)][i] += px[i];
    }
    for (auto& v : centroid[static_cast<size_t>(d)]) v /= static_cast<double>(per_class);
  }
  std::vector<double> mean(64, 0.0);
  for (const auto& c : centroid)
    for (size_t i = 0; i < 64; ++i) mean[i] += c[i] / 10.0;

  static const std::array<std::pair<int, int>, 6> contrasts = {
      {{3, 8}, {1, 7}, {0, 6}, {5, 6}, {4, 9}, {2, 3}}};

  Model m;
  LayerSpec l1;
  l1.kind = LayerKind::dense;
  l1.name = "fc1";
  l1.in_features = 64;
  l1.out_features = 16;
  l1.activation = Activation::relu;
  l1.precision = PrecisionMode(bits, Signedness::twos_complement);
  Tensor w1;
  w1.shape = {16, 64};
  w1.data.assign(16 * 64, 0.0);
  for (size_t k = 0; k < 10; ++k)
    for (size_t i = 0; i < 64; ++i) w1.data[k * 64 + i] = centroid[k][i] - mean[i];
  for (size_t p = 0; p < contrasts.size(); ++p) {
    auto [a, b] = contrasts[p];
    for (size_t i = 0; i < 64; ++i)
      w1.data[(10 + p) * 64 + i] =
          0.5 * (centroid[static_cast<size_t>(a)][i] - centroid[static_cast<size_t>(b)][i]);
  }

  LayerSpec l2;
  l2.kind = LayerKind::dense;
  l2.name = "fc2";
  l2.in_features = 16;
  l2.out_features = 10;
  l2.activation = Activation::none;
  l2.precision = PrecisionMode(bits, Signedness::twos_complement);
  Tensor w2;
  w2.shape = {10, 16};
  w2.data.assign(10 * 16, 0.0);
  for (size_t c = 0; c < 10; ++c) w2.data[c * 16 + c] = 1.0;
  for (size_t p = 0; p < contrasts.size(); ++p) {
    auto [a, b] = contrasts[p];
    w2.data[static_cast<size_t>(a) * 16 + 10 + p] = 0.25;
    w2.data[static_cast<size_t>(b) * 16 + 10 + p] = -0.25;
  }

  if (prune_fraction > 0) {
    w1 = prune(w1, prune_fraction);
    w2 = prune(w2, prune_fraction);
  }
  m.layers = {l1, l2};
  m.weights = {w1, w2};
  return m;
}

}  // namespace digits
}  // namespace nn
}  // namespace misim
