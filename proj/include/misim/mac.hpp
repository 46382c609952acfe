#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "misim/bits.hpp"
#include "misim/cell_array.hpp"
#include "misim/compressor.hpp"
#include "misim/errors.hpp"

namespace misim {

enum class Signedness { unsigned_int, twos_complement, bipolar };

// Operand width and lane layout of one macro pass. The lane law
// lanes * n^2 = cells holds because each lane occupies an n x n cell tile
// (the n-bit weight replicated across the tile's n rows, one row per
// streamed input bit).
struct PrecisionMode {
  unsigned bits = 8;
  Signedness sign = Signedness::twos_complement;

  PrecisionMode() = default;
  PrecisionMode(unsigned n, Signedness s) : bits(n), sign(s) { validate(); }

  void validate() const {
    if (bits == 0 || bits > 64 || !std::has_single_bit(bits))
      throw Error("precision width must be a power of two in [1, 64]");
    if (sign == Signedness::bipolar && bits != 1)
      throw Error("bipolar encoding is only defined at 1-bit precision");
  }

  size_t lanes(size_t cells = 4096) const { return cells / (size_t(bits) * bits); }

  swide min_value() const {
    switch (sign) {
      case Signedness::unsigned_int: return 0;
      case Signedness::twos_complement: return -(swide(1) << (bits - 1));
      case Signedness::bipolar: return -1;
    }
    return 0;
  }
  swide max_value() const {
    switch (sign) {
      case Signedness::unsigned_int:
        return bits == 64 ? swide(std::numeric_limits<int64_t>::max())
                          : (swide(1) << bits) - 1;
      case Signedness::twos_complement: return (swide(1) << (bits - 1)) - 1;
      case Signedness::bipolar: return 1;
    }
    return 0;
  }
  bool contains(int64_t v) const {
    if (sign == Signedness::bipolar) return v == 1 || v == -1;
    return v >= min_value() && v <= max_value();
  }

  // "int8", "uint4", "bipolar"
  static PrecisionMode parse(const std::string& s) {
    if (s == "bipolar") return PrecisionMode(1, Signedness::bipolar);
    if (s.rfind("int", 0) == 0)
      return PrecisionMode(static_cast<unsigned>(std::stoul(s.substr(3))),
                           Signedness::twos_complement);
    if (s.rfind("uint", 0) == 0)
      return PrecisionMode(static_cast<unsigned>(std::stoul(s.substr(4))),
                           Signedness::unsigned_int);
    throw IoError("unknown precision mode: " + s + " (intN, uintN or bipolar)");
  }
  std::string name() const {
    switch (sign) {
      case Signedness::bipolar: return "bipolar";
      case Signedness::unsigned_int: return "uint" + std::to_string(bits);
      case Signedness::twos_complement: return "int" + std::to_string(bits);
    }
    return "?";
  }
};

// Cycles of one macro pass: n^2 partial-product cycles plus the logarithmic
// reduction depth plus the carry-propagate cycle.
inline uint64_t pass_cycles(unsigned bits) {
  unsigned lg = 0;
  while ((1u << lg) < bits) ++lg;
  return uint64_t(bits) * bits + lg + 1;
}

struct MacResult {
  std::vector<swide> lane_values;
  swide total = 0;
  uint64_t cycle_count = 0;
  uint64_t bit_op_count = 0;
  uint64_t passes = 0;
};

namespace detail {

// Appends the partial-product bits of one a*w term to a column-indexed bit
// pool. Unsigned products are plain AND partials; two's complement uses the
// sign-weighted MSB rows in complemented form plus a per-term correction
// constant folded into `constant`.
inline void product_partials(int64_t a, int64_t w, unsigned n, Signedness sign,
                             std::vector<std::vector<uint8_t>>& columns, uwide& constant) {
  uint64_t ua = static_cast<uint64_t>(a);
  uint64_t uw = static_cast<uint64_t>(w);
  auto abit = [&](unsigned i) { return static_cast<uint8_t>((ua >> i) & 1u); };
  auto wbit = [&](unsigned j) { return static_cast<uint8_t>((uw >> j) & 1u); };

  if (sign == Signedness::unsigned_int || n == 1) {
    for (unsigned i = 0; i < n; ++i)
      for (unsigned j = 0; j < n; ++j) columns[i + j].push_back(abit(i) & wbit(j));
    return;
  }
  // Baugh-Wooley: complement the cross terms against each MSB and correct
  // with 2^n - 2^(2n-1) per product.
  for (unsigned i = 0; i + 1 < n; ++i)
    for (unsigned j = 0; j + 1 < n; ++j) columns[i + j].push_back(abit(i) & wbit(j));
  columns[2 * n - 2].push_back(abit(n - 1) & wbit(n - 1));
  for (unsigned j = 0; j + 1 < n; ++j)
    columns[n - 1 + j].push_back((abit(n - 1) & wbit(j)) ^ 1u);
  for (unsigned i = 0; i + 1 < n; ++i)
    columns[n - 1 + i].push_back((abit(i) & wbit(n - 1)) ^ 1u);
  constant += (uwide(1) << n) - (uwide(1) << (2 * n - 1));
}

inline swide sign_window(uwide raw, unsigned window) {
  if (window >= 128) return static_cast<swide>(raw);
  uwide mask = (uwide(1) << window) - 1;
  uwide v = raw & mask;
  if (v >> (window - 1)) v |= ~mask;  // sign extend
  return static_cast<swide>(v);
}

// Reduction plans depend only on the column shape, so hot loops reuse them.
inline const ReductionTree& cached_tree(const std::vector<size_t>& shape,
                                        const TreeOptions& opts) {
  thread_local std::map<std::pair<std::vector<size_t>, long>, ReductionTree> cache;
  auto key = std::make_pair(shape, std::lround(opts.approx_fraction * 1e6));
  auto it = cache.find(key);
  if (it == cache.end())
    it = cache.emplace(key, ReductionTree::from_columns(shape, opts)).first;
  return it->second;
}

// Reduces a prepared column pool (plus correction constant) through the
// compressor network and reinterprets the window as two's complement.
inline swide reduce_columns(std::vector<std::vector<uint8_t>>& columns, uwide constant,
                            unsigned window, const CompressorSpec& spec,
                            const TreeOptions& opts) {
  if (window < 128) constant &= (uwide(1) << window) - 1;
  size_t need = std::max<size_t>(columns.size(), window);
  columns.resize(need);
  for (unsigned c = 0; c < window && c < 128; ++c)
    if ((constant >> c) & 1u) columns[c].push_back(1);

  std::vector<size_t> shape(columns.size());
  std::vector<uint8_t> inputs;
  for (size_t c = 0; c < columns.size(); ++c) {
    shape[c] = columns[c].size();
    inputs.insert(inputs.end(), columns[c].begin(), columns[c].end());
  }
  const ReductionTree& tree = cached_tree(shape, opts);
  static const CompressorSpec exact_ref = CompressorSpec::exact();
  uwide raw = tree.eval(inputs, spec, exact_ref);
  return sign_window(raw, window);
}

inline unsigned result_window(unsigned n, size_t elements) {
  unsigned lg = 0;
  while ((size_t(1) << lg) < std::max<size_t>(elements, 1)) ++lg;
  unsigned w = 2 * n + lg + 2;
  return w > 128 ? 128 : w;
}

}  // namespace detail

// Bipolar dot product: 2 * popcount(XNOR(inputs, weights)) - N, the XNOR
// partials following the multiply mode of the cell array and the popcount
// running through the compressor network.
inline int64_t xac(const Bits& inputs, const Bits& weights, const CompressorSpec& spec,
                   const TreeOptions& opts = {}) {
  if (inputs.size() != weights.size())
    throw LengthMismatch("xac operand lengths differ");
  if (inputs.size() > 4096) throw LengthMismatch("xac operands limited to 4096 bits");
  if (inputs.empty()) return 0;
  Bits xnor(inputs.size());
  for (size_t i = 0; i < inputs.size(); ++i)
    xnor[i] = static_cast<uint8_t>(inputs[i] == weights[i]);
  ReductionTree tree = ReductionTree::for_popcount(xnor.size(), opts);
  uint64_t ones = static_cast<uint64_t>(tree.eval(xnor, spec, CompressorSpec::exact()));
  return 2 * static_cast<int64_t>(ones) - static_cast<int64_t>(inputs.size());
}

// One-pass dot product. Each n x n product decomposes into single-bit
// partials, every partial bit of every element goes through one compressor
// network with barrel shifts 0..2n-2, and the result window grows with the
// element count so nothing overflows silently. Per-lane values are reduced
// through per-lane networks of the same spec.
inline MacResult mac(const std::vector<int64_t>& inputs, const std::vector<int64_t>& weights,
                     const PrecisionMode& mode, const CompressorSpec& spec,
                     const TreeOptions& opts = {}) {
  mode.validate();
  if (inputs.size() != weights.size()) throw LengthMismatch("mac operand lengths differ");
  if (inputs.size() > mode.lanes())
    throw CapacityExceeded("dot product length " + std::to_string(inputs.size()) +
                           " exceeds " + std::to_string(mode.lanes()) + " lanes at " +
                           mode.name());
  for (size_t i = 0; i < inputs.size(); ++i) {
    if (!mode.contains(inputs[i]) || !mode.contains(weights[i]))
      throw OperandOutOfRange("operand " + std::to_string(i) + " does not fit " + mode.name());
  }

  MacResult res;
  res.passes = 1;
  res.cycle_count = pass_cycles(mode.bits);
  res.bit_op_count = 2 * uint64_t(inputs.size()) * mode.bits * mode.bits;
  res.lane_values.resize(inputs.size());
  if (inputs.empty()) return res;

  const unsigned n = mode.bits;
  if (mode.sign == Signedness::bipolar) {
    Bits in_bits(inputs.size()), w_bits(inputs.size());
    for (size_t i = 0; i < inputs.size(); ++i) {
      in_bits[i] = inputs[i] > 0;
      w_bits[i] = weights[i] > 0;
      res.lane_values[i] = in_bits[i] == w_bits[i] ? 1 : -1;
    }
    res.total = xac(in_bits, w_bits, spec, opts);
    return res;
  }

  unsigned window = detail::result_window(n, inputs.size());
  std::vector<std::vector<uint8_t>> columns(2 * n);
  uwide constant = 0;
  for (size_t e = 0; e < inputs.size(); ++e)
    detail::product_partials(inputs[e], weights[e], n, mode.sign, columns, constant);
  res.total = detail::reduce_columns(columns, constant, window, spec, opts);

  unsigned lane_window = detail::result_window(n, 1);
  for (size_t e = 0; e < inputs.size(); ++e) {
    std::vector<std::vector<uint8_t>> lane_cols(2 * n);
    uwide lane_const = 0;
    detail::product_partials(inputs[e], weights[e], n, mode.sign, lane_cols, lane_const);
    res.lane_values[e] = detail::reduce_columns(lane_cols, lane_const, lane_window, spec, opts);
  }
  return res;
}

// Deterministic lane layout: lane L owns the n x n tile at row band L/(cols/n)
// and column block L%(cols/n), with the weight's two's-complement pattern
// written to every row of the tile.
inline CellArray lane_pack(const std::vector<int64_t>& weights, const PrecisionMode& mode,
                           size_t rows = 64, size_t cols = 64) {
  mode.validate();
  CellArray array(rows, cols);
  const unsigned n = mode.bits;
  const size_t lanes = mode.lanes(rows * cols);
  const size_t lanes_per_band = cols / n;
  if (weights.size() > lanes)
    throw CapacityExceeded(std::to_string(weights.size()) + " weights exceed " +
                           std::to_string(lanes) + " lanes at " + mode.name());
  for (int64_t w : weights)
    if (!mode.contains(w)) throw OperandOutOfRange("weight does not fit " + mode.name());

  std::vector<Bits> rows_img(rows, Bits(cols, 0));
  for (size_t L = 0; L < weights.size(); ++L) {
    size_t band = L / lanes_per_band;
    size_t offset = L % lanes_per_band;
    uint64_t pattern;
    if (mode.sign == Signedness::bipolar)
      pattern = weights[L] > 0 ? 1u : 0u;
    else
      pattern = static_cast<uint64_t>(weights[L]) &
                (n == 64 ? ~uint64_t(0) : ((uint64_t(1) << n) - 1));
    for (unsigned i = 0; i < n; ++i)
      for (unsigned j = 0; j < n; ++j)
        rows_img[band * n + i][offset * n + j] = static_cast<uint8_t>((pattern >> j) & 1u);
  }
  for (size_t r = 0; r < rows; ++r) array.write_row(r, rows_img[r]);
  return array;
}

inline std::vector<int64_t> lane_unpack(const CellArray& array, const PrecisionMode& mode,
                                        size_t count) {
  mode.validate();
  const unsigned n = mode.bits;
  const size_t lanes = mode.lanes(array.rows() * array.cols());
  const size_t lanes_per_band = array.cols() / n;
  if (count > lanes) throw CapacityExceeded("unpack count exceeds lane capacity");
  std::vector<int64_t> out(count);
  for (size_t L = 0; L < count; ++L) {
    size_t band = L / lanes_per_band;
    size_t offset = L % lanes_per_band;
    Bits row = array.read_row(band * n);
    uint64_t pattern = 0;
    for (unsigned j = 0; j < n; ++j)
      pattern |= static_cast<uint64_t>(row[offset * n + j]) << j;
    if (mode.sign == Signedness::bipolar) {
      out[L] = pattern ? 1 : -1;
    } else if (mode.sign == Signedness::twos_complement && n < 64 &&
               (pattern >> (n - 1) & 1u)) {
      out[L] = static_cast<int64_t>(pattern | (~uint64_t(0) << n));
    } else {
      out[L] = static_cast<int64_t>(pattern);
    }
  }
  return out;
}

// One SIMD pass over a lane-packed array: every lane multiplies its input
// against its stored weight. Partial products are sensed row by row through
// the multiply mode (the engine masks rows whose streamed input bit is zero),
// then reduced per lane. Books 4096 * 2 bit operations per pass.
inline MacResult simd_pass(const std::vector<int64_t>& inputs, const CellArray& weight_array,
                           const PrecisionMode& mode, const CompressorSpec& spec,
                           const TreeOptions& opts = {}) {
  mode.validate();
  const unsigned n = mode.bits;
  const size_t cells = weight_array.rows() * weight_array.cols();
  const size_t lanes = mode.lanes(cells);
  const size_t lanes_per_band = weight_array.cols() / n;
  if (inputs.size() > lanes)
    throw ModeMismatch("input count " + std::to_string(inputs.size()) + " exceeds " +
                       std::to_string(lanes) + " lanes at " + mode.name());
  for (int64_t v : inputs)
    if (!mode.contains(v)) throw OperandOutOfRange("input does not fit " + mode.name());

  MacResult res;
  res.passes = 1;
  res.cycle_count = pass_cycles(n);
  res.bit_op_count = 2 * cells;
  res.lane_values.assign(lanes, 0);

  const size_t bands = weight_array.rows() / n;
  unsigned lane_window = detail::result_window(n, 1);

  // per-lane partial matrices partial[i][j] = a_i * w_j, sensed row by row
  std::vector<std::vector<uint8_t>> partials(lanes, std::vector<uint8_t>(size_t(n) * n, 0));

  for (size_t band = 0; band < bands; ++band) {
    for (unsigned i = 0; i < n; ++i) {
      Bits operand(weight_array.cols(), 0);
      for (size_t off = 0; off < lanes_per_band; ++off) {
        size_t L = band * lanes_per_band + off;
        uint8_t in_bit = 0;
        if (L < inputs.size()) {
          if (mode.sign == Signedness::bipolar)
            in_bit = inputs[L] > 0;
          else
            in_bit = static_cast<uint8_t>((static_cast<uint64_t>(inputs[L]) >> i) & 1u);
        }
        for (unsigned j = 0; j < n; ++j) operand[off * n + j] = in_bit;
      }
      // multiply mode: ML segment high on bit match
      Bits sensed = weight_array.pim_multiply_row(band * n + i, operand);
      for (size_t off = 0; off < lanes_per_band; ++off) {
        size_t L = band * lanes_per_band + off;
        if (L >= inputs.size()) continue;
        if (mode.sign == Signedness::bipolar) {
          // sensed bit is already the XNOR product
          res.lane_values[L] = sensed[off * n] ? 1 : -1;
          continue;
        }
        for (unsigned j = 0; j < n; ++j) {
          // AND masking: rows streamed with a zero input bit contribute nothing
          partials[L][i * n + j] =
              operand[off * n + j] ? sensed[off * n + j] : static_cast<uint8_t>(0);
        }
      }
    }
  }

  if (mode.sign != Signedness::bipolar) {
    for (size_t L = 0; L < lanes && L < inputs.size(); ++L) {
      auto p = [&](unsigned i, unsigned j) { return partials[L][i * n + j]; };
      std::vector<std::vector<uint8_t>> cols(2 * n);
      uwide constant = 0;
      if (mode.sign == Signedness::unsigned_int || n == 1) {
        for (unsigned i = 0; i < n; ++i)
          for (unsigned j = 0; j < n; ++j) cols[i + j].push_back(p(i, j));
      } else {
        for (unsigned i = 0; i + 1 < n; ++i)
          for (unsigned j = 0; j + 1 < n; ++j) cols[i + j].push_back(p(i, j));
        cols[2 * n - 2].push_back(p(n - 1, n - 1));
        for (unsigned j = 0; j + 1 < n; ++j) cols[n - 1 + j].push_back(p(n - 1, j) ^ 1u);
        for (unsigned i = 0; i + 1 < n; ++i) cols[n - 1 + i].push_back(p(i, n - 1) ^ 1u);
        constant += (uwide(1) << n) - (uwide(1) << (2 * n - 1));
      }
      res.lane_values[L] = detail::reduce_columns(cols, constant, lane_window, spec, opts);
    }
  }
  for (swide v : res.lane_values) res.total += v;
  return res;
}

}  // namespace misim
