#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include "misim/cell_array.hpp"
#include "misim/codec.hpp"
#include "misim/errors.hpp"
#include "misim/mac.hpp"

namespace misim {

enum class LutFunction { sigmoid, tanh, softmax_exp, custom };

inline const char* lut_function_name(LutFunction f) {
  switch (f) {
    case LutFunction::sigmoid: return "sigmoid";
    case LutFunction::tanh: return "tanh";
    case LutFunction::softmax_exp: return "softmax_exp";
    case LutFunction::custom: return "custom";
  }
  return "?";
}

inline std::function<double(double)> lut_reference(LutFunction f) {
  switch (f) {
    case LutFunction::sigmoid: return [](double x) { return 1.0 / (1.0 + std::exp(-x)); };
    case LutFunction::tanh: return [](double x) { return std::tanh(x); };
    case LutFunction::softmax_exp: return [](double x) { return std::exp(x); };
    case LutFunction::custom: return nullptr;
  }
  return nullptr;
}

// A 16-entry direct-mapped activation table living inside a cell array:
// 16 key rows holding every 4-bit code, and 16 value rows at a fixed +16 row
// offset holding the codec-encoded function values. Lookups run a CAM search
// over the key rows; search effort is booked as 4 key bits per searched row.
class LutTable {
 public:
  static constexpr size_t kEntries = 16;
  static constexpr size_t kKeyBits = 4;
  static constexpr size_t kValueRowOffset = 16;

  static LutTable build(LutFunction fn, const CodecSpec& codec, CellArray& array,
                        size_t row_base = 0, std::function<double(double)> custom = nullptr) {
    if (row_base + 2 * kEntries > array.rows() || array.cols() < kKeyBits)
      throw CapacityExceeded("array region too small for a 16-entry table");
    std::function<double(double)> f = fn == LutFunction::custom ? std::move(custom)
                                                                : lut_reference(fn);
    if (!f) throw Error("custom tables need a reference function");
    LutTable t;
    t.array_ = &array;
    t.base_ = row_base;
    t.codec_ = codec;
    t.fn_ = fn;
    for (unsigned code = 0; code < kEntries; ++code) {
      uint8_t value;
      if (codec.is_nar(static_cast<uint8_t>(code))) {
        value = posit4::kNaR;  // NaR maps to NaR
      } else {
        value = codec.encode(f(codec.decode(static_cast<uint8_t>(code))));
      }
      array.write_row(row_base + code, pad(static_cast<uint8_t>(code), array.cols()));
      array.write_row(row_base + kValueRowOffset + code, pad(value, array.cols()));
    }
    return t;
  }

  // CAM search over the key rows; exactly one row may stay high.
  uint8_t lookup(uint8_t code) const {
    Bits key = pad(code & 0xF, array_->cols());
    Bits match = array_->bcam_search(key);
    searches_.fetch_add(kEntries, std::memory_order_relaxed);
    search_bits_.fetch_add(kEntries * kKeyBits, std::memory_order_relaxed);
    size_t hit = kEntries;
    for (size_t r = 0; r < kEntries; ++r) {
      if (!match[base_ + r]) continue;
      if (hit != kEntries)
        throw MultipleMatch("duplicate key rows in table at rows " + std::to_string(hit) +
                            " and " + std::to_string(r));
      hit = r;
    }
    if (hit == kEntries) throw NoMatch("no key row matched code " + std::to_string(code & 0xF));
    Bits row = array_->read_row(base_ + kValueRowOffset + hit);
    uint8_t value = 0;
    for (size_t j = 0; j < kKeyBits; ++j) value |= static_cast<uint8_t>(row[j]) << j;
    return value;
  }

  double lookup_value(uint8_t code) const { return codec_.decode(lookup(code)); }

  LutTable(const LutTable& o)
      : array_(o.array_), base_(o.base_), codec_(o.codec_), fn_(o.fn_),
        searches_(o.searches()), search_bits_(o.search_bits()) {}
  LutTable& operator=(const LutTable& o) {
    array_ = o.array_;
    base_ = o.base_;
    codec_ = o.codec_;
    fn_ = o.fn_;
    searches_.store(o.searches(), std::memory_order_relaxed);
    search_bits_.store(o.search_bits(), std::memory_order_relaxed);
    return *this;
  }

  const CodecSpec& codec() const { return codec_; }
  LutFunction function() const { return fn_; }
  uint64_t searches() const { return searches_.load(std::memory_order_relaxed); }
  uint64_t search_bits() const { return search_bits_.load(std::memory_order_relaxed); }
  void reset_stats() const {
    searches_.store(0, std::memory_order_relaxed);
    search_bits_.store(0, std::memory_order_relaxed);
  }

  // CSV dump: key_code, key_value_real, value_code, value_real
  void dump_csv(std::ostream& os) const {
    os << "key_code,key_value,value_code,value_value\n";
    for (unsigned code = 0; code < kEntries; ++code) {
      Bits row = array_->read_row(base_ + kValueRowOffset + code);
      uint8_t value = 0;
      for (size_t j = 0; j < kKeyBits; ++j) value |= static_cast<uint8_t>(row[j]) << j;
      os << code << ',' << codec_.decode(static_cast<uint8_t>(code)) << ',' << unsigned(value)
         << ',' << codec_.decode(value) << '\n';
    }
  }

 private:
  static Bits pad(uint8_t code, size_t cols) {
    Bits b(cols, 0);
    for (size_t j = 0; j < kKeyBits; ++j) b[j] = static_cast<uint8_t>((code >> j) & 1u);
    return b;
  }

  LutTable() = default;

  CellArray* array_ = nullptr;
  size_t base_ = 0;
  CodecSpec codec_;
  LutFunction fn_ = LutFunction::sigmoid;
  // relaxed atomics keep concurrent lookups on a quiescent array race-free
  mutable std::atomic<uint64_t> searches_ = 0;
  mutable std::atomic<uint64_t> search_bits_ = 0;
};

// Vector-parallel ReLU on integer lane values.
inline std::vector<int64_t> relu_vector(const std::vector<int64_t>& values,
                                        const PrecisionMode& mode) {
  mode.validate();
  std::vector<int64_t> out(values.size());
  for (size_t i = 0; i < values.size(); ++i) {
    if (!mode.contains(values[i]))
      throw OperandOutOfRange("value " + std::to_string(values[i]) + " does not fit " +
                              mode.name());
    out[i] = values[i] > 0 ? values[i] : 0;
  }
  return out;
}

// Softmax over coded inputs: the exponentials come out of a softmax_exp
// table, the normalization is host arithmetic. When every exponential
// quantizes to zero the result degenerates to the uniform distribution.
inline std::vector<double> softmax(const std::vector<uint8_t>& codes, const LutTable& exp_table) {
  if (codes.empty()) throw EmptyInput("softmax of an empty sequence");
  std::vector<double> e(codes.size());
  double sum = 0;
  for (size_t i = 0; i < codes.size(); ++i) {
    if (exp_table.codec().is_nar(codes[i])) throw NaRInput("softmax input is NaR");
    e[i] = exp_table.lookup_value(codes[i]);
    sum += e[i];
  }
  std::vector<double> out(codes.size());
  if (sum == 0) {
    for (auto& v : out) v = 1.0 / static_cast<double>(codes.size());
    return out;
  }
  for (size_t i = 0; i < codes.size(); ++i) out[i] = e[i] / sum;
  return out;
}

inline std::vector<double> softmax(const std::vector<uint8_t>& codes, const CodecSpec& codec) {
  CellArray scratch(64, 64);
  LutTable table = LutTable::build(LutFunction::softmax_exp, codec, scratch);
  return softmax(codes, table);
}

}  // namespace misim
