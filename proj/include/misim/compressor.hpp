#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "misim/bits.hpp"
#include "misim/errors.hpp"

namespace misim {

// Cost of a 3:2 full-adder placement in the reduction tree, in transistors
// (static CMOS mirror adder).
inline constexpr int kFullAdderTransistors = 28;

// A 4:2 compressor described by its full 32-entry truth table plus a
// transistor-count attribute. The arithmetic contract of an exact table is
//   x1 + x2 + x3 + x4 + cin = sum + 2*(carry + cout)
// and cout must be a function of x1..x4 only, so that chained compressors
// do not ripple.
class CompressorSpec {
 public:
  struct Out {
    uint8_t sum;
    uint8_t carry;
    uint8_t cout;
  };

  CompressorSpec(std::array<Out, 32> table, int transistors, std::string label)
      : table_(table), transistor_count_(transistors), label_(std::move(label)) {}

  static constexpr unsigned index(unsigned x1, unsigned x2, unsigned x3, unsigned x4,
                                  unsigned cin) {
    return (x1 & 1u) | (x2 & 1u) << 1 | (x3 & 1u) << 2 | (x4 & 1u) << 3 | (cin & 1u) << 4;
  }

  const Out& at(unsigned x1, unsigned x2, unsigned x3, unsigned x4, unsigned cin) const {
    return table_[index(x1, x2, x3, x4, cin)];
  }
  const Out& at_index(unsigned idx) const { return table_[idx & 31u]; }

  // Arithmetic value encoded by the outputs of one table row.
  unsigned value_at(unsigned idx) const {
    const Out& o = table_[idx & 31u];
    return o.sum + 2u * (o.carry + o.cout);
  }

  bool arithmetic_exact() const {
    for (unsigned idx = 0; idx < 32; ++idx) {
      unsigned t = (idx & 1u) + (idx >> 1 & 1u) + (idx >> 2 & 1u) + (idx >> 3 & 1u) +
                   (idx >> 4 & 1u);
      if (value_at(idx) != t) return false;
    }
    return true;
  }

  bool cout_cin_independent() const {
    for (unsigned x = 0; x < 16; ++x)
      if (table_[x].cout != table_[x | 16u].cout) return false;
    return true;
  }

  int transistor_count() const { return transistor_count_; }
  const std::string& label() const { return label_; }

  // Canonical exact decomposition: sum through the XOR chain,
  // cout = x1*x2 + x3*(x1^x2), carry = cin when the XOR chain is odd else x4.
  // Costed as the conventional dual full-adder implementation.
  static CompressorSpec exact() { return build_exact(56, "exact56"); }

  // Same exact table at the compact transmission-gate cost point.
  static CompressorSpec compact() { return build_exact(40, "exact40"); }

  // Shipped approximate table. The sum bit is kept exact; carry and cout are
  // simplified jointly so their pair still encodes the input total wherever
  // one bit of carry can absorb it: cout collapses to AND(x1..x4) and carry
  // saturates at one. The table is value-faithful on 28 of 32 rows; the four
  // rows with three inputs set and cin high come out two low. Deployed on
  // low-significance columns (see TreeOptions), which keeps accumulation
  // errors both rare and small.
  static CompressorSpec approx() {
    std::array<Out, 32> t{};
    for (unsigned idx = 0; idx < 32; ++idx) {
      unsigned x1 = idx & 1u, x2 = idx >> 1 & 1u, x3 = idx >> 2 & 1u, x4 = idx >> 3 & 1u,
               cin = idx >> 4 & 1u;
      unsigned total = x1 + x2 + x3 + x4;
      Out o;
      o.sum = static_cast<uint8_t>((x1 ^ x2 ^ x3 ^ x4 ^ cin) & 1u);
      o.cout = static_cast<uint8_t>(x1 & x2 & x3 & x4);
      o.carry = static_cast<uint8_t>(total >= 2 ? 1u : (total == 1 ? cin : 0u));
      t[idx] = o;
    }
    return CompressorSpec(t, 22, "approx22");
  }

  // 32-line text format, one table row per line:
  //   x1 x2 x3 x4 cin : sum carry cout
  // Optional leading comment lines "# label: ..." / "# transistors: N".
  static CompressorSpec from_stream(std::istream& is, const std::string& origin = "<stream>");
  static CompressorSpec from_file(const std::string& path);
  void to_stream(std::ostream& os) const;
  void to_file(const std::string& path) const;

 private:
  static CompressorSpec build_exact(int transistors, std::string label) {
    std::array<Out, 32> t{};
    for (unsigned idx = 0; idx < 32; ++idx) {
      unsigned x1 = idx & 1u, x2 = idx >> 1 & 1u, x3 = idx >> 2 & 1u, x4 = idx >> 3 & 1u,
               cin = idx >> 4 & 1u;
      unsigned s1 = x1 ^ x2 ^ x3 ^ x4;
      Out o;
      o.sum = static_cast<uint8_t>(s1 ^ cin);
      o.cout = static_cast<uint8_t>((x1 & x2) | (x3 & (x1 ^ x2)));
      o.carry = static_cast<uint8_t>(s1 ? cin : x4);
      t[idx] = o;
    }
    return CompressorSpec(t, transistors, std::move(label));
  }

  std::array<Out, 32> table_;
  int transistor_count_;
  std::string label_;
};

// Table lookup for a single compressor step.
inline CompressorSpec::Out compress42(const CompressorSpec& spec, unsigned x1, unsigned x2,
                                      unsigned x3, unsigned x4, unsigned cin) {
  return spec.at(x1, x2, x3, x4, cin);
}

inline CompressorSpec CompressorSpec::from_stream(std::istream& is, const std::string& origin) {
  std::array<Out, 32> table{};
  std::array<bool, 32> seen{};
  int transistors = 0;
  std::string label = origin;
  std::string line;
  size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    std::string_view sv(line);
    auto trim = sv.find_first_not_of(" \t\r");
    if (trim == std::string_view::npos) continue;
    if (sv[trim] == '#') {
      std::string rest(sv.substr(trim + 1));
      auto colon = rest.find(':');
      if (colon != std::string::npos) {
        std::string key = rest.substr(0, colon);
        std::string val = rest.substr(colon + 1);
        auto strip = [](std::string s) {
          size_t a = s.find_first_not_of(" \t");
          size_t b = s.find_last_not_of(" \t\r");
          return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
        };
        key = strip(key);
        val = strip(val);
        if (key == "label") label = val;
        if (key == "transistors") transistors = std::stoi(val);
      }
      continue;
    }
    std::istringstream ls(line);
    unsigned x1, x2, x3, x4, cin;
    char sep;
    unsigned sum, carry, cout;
    if (!(ls >> x1 >> x2 >> x3 >> x4 >> cin >> sep >> sum >> carry >> cout) || sep != ':')
      throw IncompleteSpec(origin + ":" + std::to_string(lineno) + ": malformed table row");
    if ((x1 | x2 | x3 | x4 | cin | sum | carry | cout) > 1u)
      throw IncompleteSpec(origin + ":" + std::to_string(lineno) + ": table entries must be bits");
    unsigned idx = index(x1, x2, x3, x4, cin);
    if (seen[idx])
      throw IncompleteSpec(origin + ":" + std::to_string(lineno) + ": duplicate input row");
    seen[idx] = true;
    table[idx] = {static_cast<uint8_t>(sum), static_cast<uint8_t>(carry),
                  static_cast<uint8_t>(cout)};
  }
  for (unsigned idx = 0; idx < 32; ++idx)
    if (!seen[idx])
      throw IncompleteSpec(origin + ": truth table incomplete, " +
                           std::to_string(32 - std::count(seen.begin(), seen.end(), true)) +
                           " rows missing");
  return CompressorSpec(table, transistors, label);
}

inline CompressorSpec CompressorSpec::from_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open compressor spec file: " + path);
  return from_stream(f, path);
}

inline void CompressorSpec::to_stream(std::ostream& os) const {
  os << "# label: " << label_ << "\n# transistors: " << transistor_count_ << "\n";
  for (unsigned idx = 0; idx < 32; ++idx) {
    const Out& o = table_[idx];
    os << (idx & 1u) << ' ' << (idx >> 1 & 1u) << ' ' << (idx >> 2 & 1u) << ' ' << (idx >> 3 & 1u)
       << ' ' << (idx >> 4 & 1u) << " : " << unsigned(o.sum) << ' ' << unsigned(o.carry) << ' '
       << unsigned(o.cout) << '\n';
  }
}

inline void CompressorSpec::to_file(const std::string& path) const {
  std::ofstream f(path);
  if (!f) throw IoError("cannot open file for writing: " + path);
  to_stream(f);
}

// Placement policy for approximate compressors in a reduction tree.
// Hybrid trees are built by default: the spec under test drives the
// compressors whose sum column lies in the low approx_fraction share of the
// input column span, and the exact table drives the rest. approx_fraction = 1
// applies the spec everywhere.
struct TreeOptions {
  double approx_fraction = 0.25;
};

// Carry-save reduction network of 4:2 compressors (plus full adders for
// leftover triples) with a final carry-propagate stage. Construction is
// deterministic from the input shape: per layer, each column's bits are
// grouped by four and group k chains its cout into group k of the next
// column up. Reduction stops when every column holds at most two bits.
class ReductionTree {
 public:
  struct Node {
    uint32_t in[4];  // slot ids; slot 0 is the constant-zero slot
    uint32_t cin;
    uint32_t out_sum;
    uint32_t out_carry;
    uint32_t out_cout;  // 0 when the cout is emitted as a result bit instead
    int column;
    bool is_fa;
    bool approx;
  };

  static ReductionTree from_columns(const std::vector<size_t>& bits_per_column,
                                    const TreeOptions& opts = {}) {
    ReductionTree t;
    t.input_count_ = 0;
    size_t span = 0;
    for (size_t c = 0; c < bits_per_column.size(); ++c)
      if (bits_per_column[c] > 0) span = c + 1;
    t.approx_limit_ = opts.approx_fraction >= 1.0
                          ? std::numeric_limits<int>::max()
                          : static_cast<int>(static_cast<double>(span) * opts.approx_fraction);

    // slot 0 = constant zero; input bits take slots 1..n in column-major order
    uint32_t next_slot = 1;
    std::vector<std::vector<uint32_t>> bins(bits_per_column.size() + 2);
    for (size_t c = 0; c < bits_per_column.size(); ++c)
      for (size_t i = 0; i < bits_per_column[c]; ++i) bins[c].push_back(next_slot++);
    t.input_count_ = next_slot - 1;

    auto too_tall = [&] {
      for (const auto& b : bins) if (b.size() > 2) return true;
      return false;
    };

    while (too_tall()) {
      ++t.layer_count_;
      std::vector<std::vector<uint32_t>> next(bins.size() + 1);
      std::vector<size_t> groups(bins.size(), 0);
      for (size_t c = 0; c < bins.size(); ++c) groups[c] = bins[c].size() / 4;
      // cout slot of group k in the previous column, consumed as cin here
      std::vector<uint32_t> chain;
      for (size_t c = 0; c < bins.size(); ++c) {
        std::vector<uint32_t> next_chain(groups[c], 0);
        const auto& b = bins[c];
        size_t k = 0;
        for (; k < groups[c]; ++k) {
          Node n{};
          n.in[0] = b[4 * k + 0];
          n.in[1] = b[4 * k + 1];
          n.in[2] = b[4 * k + 2];
          n.in[3] = b[4 * k + 3];
          n.cin = (k < chain.size()) ? chain[k] : 0;
          n.column = static_cast<int>(c);
          n.is_fa = false;
          n.approx = static_cast<int>(c) < t.approx_limit_;
          n.out_sum = next_slot++;
          n.out_carry = next_slot++;
          next[c].push_back(n.out_sum);
          next[c + 1].push_back(n.out_carry);
          bool consumed = (c + 1 < bins.size()) && k < groups[c + 1];
          if (consumed) {
            n.out_cout = next_slot++;
            next_chain[k] = n.out_cout;
          } else {
            n.out_cout = next_slot++;
            next[c + 1].push_back(n.out_cout);
          }
          t.nodes_.push_back(n);
        }
        size_t rem = b.size() - 4 * groups[c];
        size_t base = 4 * groups[c];
        if (rem == 3) {
          Node n{};
          n.in[0] = b[base + 0];
          n.in[1] = b[base + 1];
          n.in[2] = b[base + 2];
          n.in[3] = 0;
          n.cin = 0;
          n.column = static_cast<int>(c);
          n.is_fa = true;
          n.approx = false;  // full adders are exact placements
          n.out_sum = next_slot++;
          n.out_carry = next_slot++;
          n.out_cout = 0;
          next[c].push_back(n.out_sum);
          next[c + 1].push_back(n.out_carry);
          t.nodes_.push_back(n);
        } else {
          for (size_t i = 0; i < rem; ++i) next[c].push_back(b[base + i]);
        }
        chain = std::move(next_chain);
      }
      bins = std::move(next);
    }

    for (size_t c = 0; c < bins.size(); ++c)
      for (uint32_t s : bins[c]) t.result_.push_back({static_cast<int>(c), s});
    t.slot_count_ = next_slot;
    size_t cpa_span = 0;
    for (const auto& [col, slot] : t.result_) cpa_span = std::max(cpa_span, size_t(col) + 1);
    t.cpa_width_ = cpa_span;
    return t;
  }

  static ReductionTree for_accumulate(unsigned width, size_t addend_count,
                                      const TreeOptions& opts = {}) {
    std::vector<size_t> cols(width, addend_count);
    return from_columns(cols, opts);
  }

  static ReductionTree for_popcount(size_t nbits, const TreeOptions& opts = {}) {
    return from_columns({nbits}, opts);
  }

  // Evaluates the network on concrete input bits (column-major order, i.e.
  // all column-0 bits first). `spec` drives the approximate placements and
  // `exact_ref` the rest; pass the same spec twice for a uniform tree.
  uwide eval(const std::vector<uint8_t>& inputs, const CompressorSpec& spec,
             const CompressorSpec& exact_ref) const {
    if (inputs.size() != input_count_)
      throw LengthMismatch("reduction tree expects " + std::to_string(input_count_) +
                           " input bits, got " + std::to_string(inputs.size()));
    scratch_.assign(slot_count_, 0);
    for (size_t i = 0; i < inputs.size(); ++i) scratch_[i + 1] = inputs[i] ? 1 : 0;
    for (const Node& n : nodes_) {
      uint8_t a = scratch_[n.in[0]], b = scratch_[n.in[1]], c = scratch_[n.in[2]],
              d = scratch_[n.in[3]], ci = scratch_[n.cin];
      if (n.is_fa) {
        unsigned s = a + b + c;
        scratch_[n.out_sum] = s & 1u;
        scratch_[n.out_carry] = static_cast<uint8_t>(s >> 1);
      } else {
        const CompressorSpec& sp = n.approx ? spec : exact_ref;
        const CompressorSpec::Out& o = sp.at(a, b, c, d, ci);
        scratch_[n.out_sum] = o.sum;
        scratch_[n.out_carry] = o.carry;
        scratch_[n.out_cout] = o.cout;
      }
    }
    uwide total = 0;
    for (const auto& [col, slot] : result_)
      if (scratch_[slot]) total += uwide(1) << col;
    return total;
  }

  size_t input_count() const { return input_count_; }
  size_t layer_count() const { return layer_count_; }
  size_t compressor_count() const {
    size_t n = 0;
    for (const auto& nd : nodes_) n += nd.is_fa ? 0 : 1;
    return n;
  }
  size_t fa_count() const { return nodes_.size() - compressor_count(); }
  size_t cpa_width() const { return cpa_width_; }
  int approx_column_limit() const { return approx_limit_; }
  const std::vector<Node>& nodes() const { return nodes_; }

 private:
  std::vector<Node> nodes_;
  std::vector<std::pair<int, uint32_t>> result_;
  size_t input_count_ = 0;
  size_t slot_count_ = 1;
  size_t layer_count_ = 0;
  size_t cpa_width_ = 0;
  int approx_limit_ = 0;
  mutable std::vector<uint8_t> scratch_;
};

// Structural cost: every 4:2 placement costed at the given spec, full adders
// at the fixed 28T constant. The final carry-propagate stage is not included.
inline int transistor_count(const ReductionTree& tree, const CompressorSpec& spec) {
  return static_cast<int>(tree.compressor_count()) * spec.transistor_count() +
         static_cast<int>(tree.fa_count()) * kFullAdderTransistors;
}

// Population count of up to 64 bits through the reduction network.
inline uint64_t popcount(const CompressorSpec& spec, const Bits& bits,
                         const TreeOptions& opts = {}) {
  if (bits.size() > 64)
    throw WidthExceeded("popcount input limited to 64 bits, got " + std::to_string(bits.size()));
  if (bits.empty()) return 0;
  ReductionTree tree = ReductionTree::for_popcount(bits.size(), opts);
  return static_cast<uint64_t>(tree.eval(bits, spec, CompressorSpec::exact()));
}

// Multi-operand addition. Output width is width + ceil(log2(count)) bits;
// nothing is dropped.
inline uwide accumulate(const CompressorSpec& spec, const std::vector<uint64_t>& addends,
                        unsigned width, const TreeOptions& opts = {}) {
  if (width == 0 || width > 64) throw WidthExceeded("addend width must be in [1, 64]");
  for (uint64_t a : addends)
    if (width < 64 && (a >> width) != 0)
      throw WidthExceeded("addend does not fit in " + std::to_string(width) + " bits");
  if (addends.empty()) return 0;
  ReductionTree tree = ReductionTree::for_accumulate(width, addends.size(), opts);
  std::vector<uint8_t> in;
  in.reserve(addends.size() * width);
  for (unsigned c = 0; c < width; ++c)
    for (uint64_t a : addends) in.push_back(static_cast<uint8_t>((a >> c) & 1u));
  return tree.eval(in, spec, CompressorSpec::exact());
}

// Enumeration policy for error characterization.
struct MetricsPolicy {
  enum class Kind { exhaustive, sampled };
  Kind kind = Kind::exhaustive;
  uint64_t samples = 0;
  uint64_t seed = 0;

  static MetricsPolicy exhaustive() { return {}; }
  static MetricsPolicy sampled(uint64_t n, uint64_t seed) {
    return {Kind::sampled, n, seed};
  }
  static MetricsPolicy parse(const std::string& s) {
    if (s == "exhaustive") return exhaustive();
    if (s.rfind("sampled:", 0) == 0) {
      auto rest = s.substr(8);
      auto colon = rest.find(':');
      if (colon == std::string::npos) throw IoError("policy format: sampled:<n>:<seed>");
      return sampled(std::stoull(rest.substr(0, colon)), std::stoull(rest.substr(colon + 1)));
    }
    throw IoError("unknown policy: " + s + " (expected 'exhaustive' or 'sampled:<n>:<seed>')");
  }
  std::string to_string() const {
    if (kind == Kind::exhaustive) return "exhaustive";
    return "sampled:" + std::to_string(samples) + ":" + std::to_string(seed);
  }
};

struct ErrorMetrics {
  std::string spec_label;
  unsigned width = 0;
  size_t addend_count = 0;
  std::string policy;
  uint64_t seed = 0;
  double error_rate = 0;
  double nmed = 0;
  double mred = 0;
  uint64_t max_error = 0;
};

// Error characterization of a spec against exact accumulation.
//
// The single-compressor configuration (width 1, four addends) enumerates the
// full 32-row truth table including carry-in and compares encoded values, so
// a one-row fault measures exactly 1/32. Wider configurations run the
// reduction tree over `addend_count` width-bit operands; exhaustive
// enumeration is allowed up to a 2^24 input space, anything larger must be
// sampled. NMED normalizes mean error distance by the maximum exact output.
inline ErrorMetrics error_metrics(const CompressorSpec& spec, unsigned width, size_t addend_count,
                                  const MetricsPolicy& policy, const TreeOptions& opts = {}) {
  ErrorMetrics m;
  m.spec_label = spec.label();
  m.width = width;
  m.addend_count = addend_count;
  m.policy = policy.to_string();
  m.seed = policy.seed;

  if (width == 1 && addend_count == 4) {
    // direct truth-table characterization, always exhaustive
    CompressorSpec exact = CompressorSpec::exact();
    double ed_sum = 0, red_sum = 0;
    uint64_t errors = 0, max_err = 0;
    for (unsigned idx = 0; idx < 32; ++idx) {
      unsigned got = spec.value_at(idx);
      unsigned want = exact.value_at(idx);
      uint64_t ed = got > want ? got - want : want - got;
      if (ed) ++errors;
      ed_sum += static_cast<double>(ed);
      red_sum += static_cast<double>(ed) / std::max(want, 1u);
      max_err = std::max(max_err, ed);
    }
    m.error_rate = static_cast<double>(errors) / 32.0;
    m.nmed = ed_sum / 32.0 / 5.0;  // max exact output of one compressor is 5
    m.mred = red_sum / 32.0;
    m.max_error = max_err;
    return m;
  }

  if (width == 0 || width > 64) throw WidthExceeded("addend width must be in [1, 64]");
  if (addend_count < 2) throw Error("error_metrics requires at least two addends");
  double space_bits = static_cast<double>(width) * static_cast<double>(addend_count);
  if (policy.kind == MetricsPolicy::Kind::exhaustive && space_bits > 24)
    throw SpaceTooLarge("exhaustive enumeration limited to 2^24 combinations; use sampled");

  ReductionTree tree = ReductionTree::for_accumulate(width, addend_count, opts);
  CompressorSpec exact = CompressorSpec::exact();
  const uwide max_exact =
      static_cast<uwide>(addend_count) * ((width == 64) ? ~uint64_t(0) : ((uint64_t(1) << width) - 1));

  std::vector<uint64_t> addends(addend_count);
  std::vector<uint8_t> in(addend_count * width);
  auto run_case = [&](auto&& fill) {
    fill();
    size_t k = 0;
    for (unsigned c = 0; c < width; ++c)
      for (size_t a = 0; a < addend_count; ++a)
        in[k++] = static_cast<uint8_t>((addends[a] >> c) & 1u);
    uwide got = tree.eval(in, spec, exact);
    uwide want = 0;
    for (uint64_t a : addends) want += a;
    return got > want ? got - want : want - got;
  };

  double ed_sum = 0, red_sum = 0;
  uint64_t errors = 0, max_err = 0, cases = 0;
  auto tally = [&](uwide ed, uwide want) {
    ++cases;
    if (ed) ++errors;
    ed_sum += static_cast<double>(ed);
    red_sum += static_cast<double>(ed) / std::max<double>(static_cast<double>(want), 1.0);
    max_err = std::max(max_err, static_cast<uint64_t>(ed));
  };

  if (policy.kind == MetricsPolicy::Kind::exhaustive) {
    uint64_t total = uint64_t(1) << static_cast<unsigned>(space_bits);
    for (uint64_t v = 0; v < total; ++v) {
      uint64_t rem = v;
      uwide want = 0;
      uwide ed = run_case([&] {
        for (size_t a = 0; a < addend_count; ++a) {
          addends[a] = rem & ((uint64_t(1) << width) - 1);
          rem >>= width;
        }
      });
      for (uint64_t a : addends) want += a;
      tally(ed, want);
    }
  } else {
    std::mt19937_64 rng(policy.seed);
    uint64_t mask = (width == 64) ? ~uint64_t(0) : ((uint64_t(1) << width) - 1);
    for (uint64_t s = 0; s < policy.samples; ++s) {
      uwide want = 0;
      uwide ed = run_case([&] {
        for (size_t a = 0; a < addend_count; ++a) addends[a] = rng() & mask;
      });
      for (uint64_t a : addends) want += a;
      tally(ed, want);
    }
  }

  m.error_rate = cases ? static_cast<double>(errors) / static_cast<double>(cases) : 0.0;
  m.nmed = cases ? ed_sum / static_cast<double>(cases) / static_cast<double>(max_exact) : 0.0;
  m.mred = cases ? red_sum / static_cast<double>(cases) : 0.0;
  m.max_error = max_err;
  return m;
}

}  // namespace misim
