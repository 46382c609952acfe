#pragma once

#include <atomic>
#include <bit>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "misim/bits.hpp"
#include "misim/errors.hpp"

namespace misim {

// Operation modes of the cell array. Exactly one mode is active per
// simulation step; idle holds the stored bits.
enum class Mode {
  idle,
  write,
  read_row,
  read_column,
  bcam,
  tcam,
  pim_multiply,
  pim_boolean,
};

inline const char* mode_name(Mode m) {
  switch (m) {
    case Mode::idle: return "idle";
    case Mode::write: return "write";
    case Mode::read_row: return "read_row";
    case Mode::read_column: return "read_column";
    case Mode::bcam: return "bcam";
    case Mode::tcam: return "tcam";
    case Mode::pim_multiply: return "pim_multiply";
    case Mode::pim_boolean: return "pim_boolean";
  }
  return "?";
}

// A precharged sense line (match line or read bitline). Once it discharges
// it stays low for the rest of the step; there is deliberately no way to
// drive it back high.
class Line {
 public:
  enum class Level : uint8_t { low, high, discharged };

  static Line precharged() { return Line(Level::high); }
  static Line grounded() { return Line(Level::low); }

  void discharge() {
    if (level_ == Level::high) level_ = Level::discharged;
  }
  bool high() const { return level_ == Level::high; }
  Level level() const { return level_; }

 private:
  explicit Line(Level l) : level_(l) {}
  Level level_;
};

// Logic levels on the seven per-cell control lines, one operation-table
// column at a time. Write drives WBL/WBLB differentially; the search-style
// modes (CAM and multiply) drive SL/SLB differentially per search bit.
//
// The raw levels are not injective across modes: a search for '1' drives the
// same levels as a column read, and a Boolean PIM step is a row read with two
// rows selected. classify() resolves those overlaps with a documented
// precedence (write, read_row, read_column, search, hold) and rejects
// anything else.
struct ControlVector {
  bool wwl = false;
  bool wbl = false;
  bool wblb = false;
  bool sl_rbl = false;
  bool rblb_slb = false;
  bool rwl = false;
  bool ml_hbl = false;

  static ControlVector for_write(bool bit) {
    ControlVector cv;
    cv.wwl = true;
    cv.wbl = bit;
    cv.wblb = !bit;
    return cv;
  }
  static ControlVector for_read_row() {
    ControlVector cv;
    cv.sl_rbl = true;
    cv.rblb_slb = true;
    cv.rwl = true;
    return cv;
  }
  static ControlVector for_read_column() {
    ControlVector cv;
    cv.sl_rbl = true;  // RBL pulsed high, RBLB low
    cv.ml_hbl = true;  // MLs precharged, sensed against the reference
    return cv;
  }
  static ControlVector for_hold() {
    ControlVector cv;
    cv.ml_hbl = true;
    return cv;
  }
  // CAM search / multiply: SL and SLB carry the search bit differentially,
  // read wordlines stay low, MLs precharged.
  static ControlVector for_search(bool bit) {
    ControlVector cv;
    cv.sl_rbl = bit;
    cv.rblb_slb = !bit;
    cv.ml_hbl = true;
    return cv;
  }
  // Boolean PIM: a row read with multiple rows selected and the MLs held low
  // so the cell's search transistor stays out of the discharge paths.
  static ControlVector for_pim_boolean() { return for_read_row(); }

  Mode classify() const {
    if (wwl) {
      if (rwl || wbl == wblb)
        throw InvalidControlPattern("write requires RWL low and WBL = not WBLB");
      return Mode::write;
    }
    if (rwl && sl_rbl && rblb_slb && !ml_hbl) return Mode::read_row;
    if (!rwl && ml_hbl && sl_rbl && !rblb_slb) return Mode::read_column;
    if (!rwl && ml_hbl && sl_rbl != rblb_slb) return Mode::bcam;  // search levels
    if (!rwl && ml_hbl && !sl_rbl && !rblb_slb) return Mode::idle;  // hold
    throw InvalidControlPattern("control levels match no operation-table column");
  }
};

// Per-column result of a two-row Boolean PIM step. RBL staying high senses
// NOR of the activated cells, RBLB staying high senses AND, and their OR is
// XNOR.
struct PimBooleanResult {
  Bits and_bits;
  Bits nor_bits;
  Bits xnor_bits;
};

// Ternary symbol for TCAM keys and stored codes.
enum class Ternary : uint8_t { zero, one, any };

inline std::vector<Ternary> ternary_from_string(const std::string& s) {
  std::vector<Ternary> out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '0': out.push_back(Ternary::zero); break;
      case '1': out.push_back(Ternary::one); break;
      case 'X':
      case 'x': out.push_back(Ternary::any); break;
      default:
        throw IoError("ternary string may contain only '0'/'1'/'X'");
    }
  }
  return out;
}

inline std::string ternary_to_string(const std::vector<Ternary>& t) {
  std::string s;
  s.reserve(t.size());
  for (Ternary v : t)
    s.push_back(v == Ternary::zero ? '0' : v == Ternary::one ? '1' : 'X');
  return s;
}

// TCAM search outcome. A row storing the invalid (1,0) cell pair always
// reports a mismatch and is listed as a diagnostic.
struct TcamResult {
  Bits match;
  std::vector<size_t> invalid_rows;
};

// One line per executed operation: mode, inputs, outputs. Written as CSV
// for debugging.
class TraceLog {
 public:
  struct Entry {
    Mode mode;
    std::string inputs;
    std::string outputs;
  };

  void log(Mode m, std::string inputs, std::string outputs) {
    entries_.push_back({m, std::move(inputs), std::move(outputs)});
  }
  const std::vector<Entry>& entries() const { return entries_; }
  void clear() { entries_.clear(); }

  void write_csv(std::ostream& os) const {
    os << "mode,inputs,outputs\n";
    for (const auto& e : entries_)
      os << mode_name(e.mode) << ',' << e.inputs << ',' << e.outputs << '\n';
  }

 private:
  std::vector<Entry> entries_;
};

// Functional model of the storage/compute array. Geometry is fixed at
// construction (powers of two, 64x64 by default); operations are sequential
// state transitions and only write_row mutates the stored bits.
class CellArray {
 public:
  explicit CellArray(size_t rows = 64, size_t cols = 64)
      : rows_(rows), cols_(cols), storage_(rows * cols, 0) {
    if (rows == 0 || cols == 0 || !std::has_single_bit(rows) || !std::has_single_bit(cols))
      throw Error("array geometry must be positive powers of two");
  }
  CellArray(const CellArray& o)
      : rows_(o.rows_), cols_(o.cols_), storage_(o.storage_), mode_(o.mode()) {}
  CellArray(CellArray&& o) noexcept
      : rows_(o.rows_), cols_(o.cols_), storage_(std::move(o.storage_)), mode_(o.mode()),
        trace_(o.trace_) {}
  CellArray& operator=(const CellArray& o) {
    rows_ = o.rows_;
    cols_ = o.cols_;
    storage_ = o.storage_;
    mode_.store(o.mode(), std::memory_order_relaxed);
    return *this;
  }
  CellArray& operator=(CellArray&& o) noexcept {
    rows_ = o.rows_;
    cols_ = o.cols_;
    storage_ = std::move(o.storage_);
    mode_.store(o.mode(), std::memory_order_relaxed);
    trace_ = o.trace_;
    return *this;
  }

  size_t rows() const { return rows_; }
  size_t cols() const { return cols_; }
  Mode mode() const { return mode_.load(std::memory_order_relaxed); }

  void attach_trace(TraceLog* t) { trace_ = t; }

  uint8_t bit(size_t r, size_t c) const {
    check_row(r);
    check_col(c);
    return storage_[r * cols_ + c];
  }

  void load(const std::vector<Bits>& image) {
    if (image.size() != rows_) throw LengthMismatch("image row count != array rows");
    for (size_t r = 0; r < rows_; ++r) {
      if (image[r].size() != cols_) throw LengthMismatch("image column count != array cols");
      for (size_t c = 0; c < cols_; ++c) storage_[r * cols_ + c] = image[r][c] ? 1 : 0;
    }
  }

  std::vector<Bits> image() const {
    std::vector<Bits> out(rows_);
    for (size_t r = 0; r < rows_; ++r)
      out[r] = Bits(storage_.begin() + r * cols_, storage_.begin() + (r + 1) * cols_);
    return out;
  }

  // Differential write of one row through WBL/WBLB.
  void write_row(size_t row, const Bits& bits) {
    check_row(row);
    if (bits.size() != cols_)
      throw LengthMismatch("write_row: got " + std::to_string(bits.size()) + " bits, array has " +
                           std::to_string(cols_) + " columns");
    step(Mode::write);
    for (size_t c = 0; c < cols_; ++c) {
      ControlVector cv = ControlVector::for_write(bits[c]);
      storage_[row * cols_ + c] = cv.wbl ? 1 : 0;
    }
    trace(Mode::write, "row=" + std::to_string(row) + " bits=" + bits_to_string(bits), "ok");
    idle();
  }

  // Row-wise differential read; RBL vs RBLB through the read port.
  Bits read_row(size_t row) const {
    check_row(row);
    step(Mode::read_row);
    Bits out(cols_);
    for (size_t c = 0; c < cols_; ++c) {
      // one of the pair discharges depending on the stored value
      uint8_t stored = storage_[row * cols_ + c];
      Line rbl = Line::precharged();
      Line rblb = Line::precharged();
      if (stored)
        rblb.discharge();
      else
        rbl.discharge();
      out[c] = rbl.high() ? 1 : 0;
    }
    trace(Mode::read_row, "row=" + std::to_string(row), bits_to_string(out));
    idle();
    return out;
  }

  // Column-wise read: with all RWLs low, the selected column's RBL is pulsed
  // and each row's ML stays high only where the cell stores 1.
  Bits read_column(size_t col) const {
    check_col(col);
    step(Mode::read_column);
    Bits out(rows_);
    for (size_t r = 0; r < rows_; ++r) {
      Line ml = Line::precharged();
      if (storage_[r * cols_ + col] == 0) ml.discharge();
      out[r] = ml.high() ? 1 : 0;
    }
    trace(Mode::read_column, "col=" + std::to_string(col), bits_to_string(out));
    idle();
    return out;
  }

  // Repeated column reads; returns the cols x rows transpose of storage.
  std::vector<Bits> transpose_read() const {
    std::vector<Bits> out(cols_);
    for (size_t c = 0; c < cols_; ++c) out[c] = read_column(c);
    return out;
  }

  // Row-parallel binary CAM search. A single mismatching cell is enough to
  // discharge its row's match line.
  Bits bcam_search(const Bits& key) const {
    if (key.size() != cols_)
      throw LengthMismatch("bcam_search: key length " + std::to_string(key.size()) +
                           " != array cols " + std::to_string(cols_));
    step(Mode::bcam);
    Bits match(rows_);
    for (size_t r = 0; r < rows_; ++r) {
      Line ml = Line::precharged();
      for (size_t c = 0; c < cols_; ++c) {
        ControlVector cv = ControlVector::for_search(key[c]);
        uint8_t stored = storage_[r * cols_ + c];
        // stored 1 opens the path to SL, stored 0 the path to SLB; the line
        // discharges when the open path ends in a low-driven line.
        bool path_low = stored ? !cv.sl_rbl : !cv.rblb_slb;
        if (path_low) ml.discharge();
      }
      match[r] = ml.high() ? 1 : 0;
    }
    trace(Mode::bcam, bits_to_string(key), bits_to_string(match));
    idle();
    return match;
  }

  // Ternary CAM search over cell pairs: (0,0)=0, (1,1)=1, (0,1)=X. The key
  // may also hold X, which matches any valid stored code. Rows containing
  // the invalid (1,0) pair always mismatch and are reported.
  TcamResult tcam_search(const std::vector<Ternary>& key) const {
    if (cols_ % 2 != 0) throw Error("tcam_search requires an even column count");
    if (key.size() != cols_ / 2)
      throw LengthMismatch("tcam_search: key length " + std::to_string(key.size()) +
                           " != cols/2 = " + std::to_string(cols_ / 2));
    step(Mode::tcam);
    TcamResult res;
    res.match.resize(rows_);
    for (size_t r = 0; r < rows_; ++r) {
      Line ml = Line::precharged();
      bool invalid = false;
      for (size_t p = 0; p < key.size(); ++p) {
        uint8_t first = storage_[r * cols_ + 2 * p];
        uint8_t second = storage_[r * cols_ + 2 * p + 1];
        if (first == 1 && second == 0) {
          // discharge happens irrespective of the search condition
          invalid = true;
          ml.discharge();
          continue;
        }
        if (key[p] == Ternary::any) continue;  // SL0/SLB1 both masked high
        bool search_bit = key[p] == Ternary::one;
        // search 0 pulls SL0 low: discharges iff the first cell stores 1;
        // search 1 pulls SLB1 low: discharges iff the second cell stores 0.
        bool discharge = search_bit ? (second == 0) : (first == 1);
        if (discharge) ml.discharge();
      }
      if (invalid) res.invalid_rows.push_back(r);
      res.match[r] = ml.high() ? 1 : 0;
    }
    trace(Mode::tcam, ternary_to_string(key), bits_to_string(res.match));
    idle();
    return res;
  }

  // Two-row Boolean PIM. Per column: RBL discharges when any activated cell
  // stores 1, RBLB when any stores 0.
  PimBooleanResult pim_boolean(size_t row_a, size_t row_b) const {
    check_row(row_a);
    check_row(row_b);
    if (row_a == row_b) throw SameRow("pim_boolean requires two distinct rows");
    step(Mode::pim_boolean);
    PimBooleanResult res;
    res.and_bits.resize(cols_);
    res.nor_bits.resize(cols_);
    res.xnor_bits.resize(cols_);
    for (size_t c = 0; c < cols_; ++c) {
      Line rbl = Line::precharged();
      Line rblb = Line::precharged();
      for (size_t r : {row_a, row_b}) {
        if (storage_[r * cols_ + c])
          rbl.discharge();
        else
          rblb.discharge();
      }
      res.nor_bits[c] = rbl.high() ? 1 : 0;
      res.and_bits[c] = rblb.high() ? 1 : 0;
      res.xnor_bits[c] = (res.nor_bits[c] | res.and_bits[c]);
    }
    trace(Mode::pim_boolean, "rows=" + std::to_string(row_a) + "+" + std::to_string(row_b),
          "and=" + bits_to_string(res.and_bits) + " nor=" + bits_to_string(res.nor_bits));
    idle();
    return res;
  }

  // Bitwise multiply of one stored row against a streamed operand. Each
  // cell's ML segment stays high on a bit match: result = XNOR(stored, op).
  Bits pim_multiply_row(size_t row, const Bits& operand) const {
    check_row(row);
    if (operand.size() != cols_)
      throw LengthMismatch("pim_multiply_row: operand length " + std::to_string(operand.size()) +
                           " != array cols " + std::to_string(cols_));
    step(Mode::pim_multiply);
    Bits out(cols_);
    for (size_t c = 0; c < cols_; ++c) {
      ControlVector cv = ControlVector::for_search(operand[c]);
      uint8_t stored = storage_[row * cols_ + c];
      Line ml = Line::precharged();
      bool path_low = stored ? !cv.sl_rbl : !cv.rblb_slb;
      if (path_low) ml.discharge();
      out[c] = ml.high() ? 1 : 0;
    }
    trace(Mode::pim_multiply, "row=" + std::to_string(row) + " op=" + bits_to_string(operand),
          bits_to_string(out));
    idle();
    return out;
  }

 private:
  void check_row(size_t r) const {
    if (r >= rows_)
      throw IndexOutOfRange("row " + std::to_string(r) + " out of range [0, " +
                            std::to_string(rows_) + ")");
  }
  void check_col(size_t c) const {
    if (c >= cols_)
      throw IndexOutOfRange("column " + std::to_string(c) + " out of range [0, " +
                            std::to_string(cols_) + ")");
  }
  void step(Mode m) const { mode_.store(m, std::memory_order_relaxed); }
  void idle() const { mode_.store(Mode::idle, std::memory_order_relaxed); }
  void trace(Mode m, std::string in, std::string out) const {
    if (trace_) trace_->log(m, std::move(in), std::move(out));
  }

  size_t rows_;
  size_t cols_;
  std::vector<uint8_t> storage_;
  // relaxed atomic so concurrent read-only operations stay race-free;
  // an attached trace log serializes use to one thread
  mutable std::atomic<Mode> mode_ = Mode::idle;
  TraceLog* trace_ = nullptr;
};

}  // namespace misim
