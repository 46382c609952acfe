#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "misim/errors.hpp"
#include "misim/io.hpp"
#include "misim/lut.hpp"
#include "misim/mac.hpp"
#include "misim/perf.hpp"

namespace misim {
namespace nn {

// --- tensors ----------------------------------------------------------

struct Tensor {
  std::vector<size_t> shape;
  std::vector<double> data;

  size_t size() const { return data.size(); }
  double& at(size_t i) { return data[i]; }
  double at(size_t i) const { return data[i]; }
};

struct QuantTensor {
  std::vector<size_t> shape;
  std::vector<int64_t> data;
  double scale = 1.0;
  bool all_zero = false;  // scale was undefined, tensor quantized to zeros
};

// Symmetric uniform quantization: scale = max|w| / (2^(bits-1) - 1), values
// rounded and clamped to the signed range. bits = 1 maps to the bipolar sign
// encoding with scale max|w|.
inline QuantTensor quantize(const Tensor& t, unsigned bits) {
  if (bits == 0 || bits > 32 || !std::has_single_bit(bits))
    throw Error("quantize supports bit widths {1,2,4,8,16,32}");
  if (t.data.empty()) throw Error("quantize of an empty tensor");
  QuantTensor q;
  q.shape = t.shape;
  q.data.resize(t.data.size());
  double maxabs = 0;
  for (double w : t.data) maxabs = std::max(maxabs, std::fabs(w));
  if (maxabs == 0) {
    q.scale = 1.0;
    q.all_zero = true;
    if (bits == 1)
      for (auto& v : q.data) v = 1;  // sign of +0
    return q;
  }
  if (bits == 1) {
    q.scale = maxabs;
    for (size_t i = 0; i < t.data.size(); ++i) q.data[i] = t.data[i] >= 0 ? 1 : -1;
    return q;
  }
  int64_t qmax = (int64_t(1) << (bits - 1)) - 1;
  q.scale = maxabs / static_cast<double>(qmax);
  for (size_t i = 0; i < t.data.size(); ++i) {
    int64_t v = std::llround(t.data[i] / q.scale);
    q.data[i] = std::clamp(v, -qmax, qmax);
  }
  return q;
}

// Global magnitude pruning: zeroes the floor(fraction * count) smallest
// weights, ties broken by index order.
inline Tensor prune(const Tensor& t, double fraction = 0.40) {
  if (fraction < 0 || fraction >= 1) throw Error("prune fraction must be in [0, 1)");
  Tensor out = t;
  size_t k = static_cast<size_t>(fraction * static_cast<double>(t.size()));
  if (k == 0) return out;
  std::vector<size_t> idx(t.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](size_t a, size_t b) {
    return std::fabs(t.data[a]) < std::fabs(t.data[b]);
  });
  for (size_t i = 0; i < k; ++i) out.data[idx[i]] = 0.0;
  return out;
}

// --- weight CSV -----------------------------------------------------------

// Format: header "layer,i0,i1,i2,i3,value", one weight per row, unused index
// columns empty. Tensor shapes are inferred from the largest index used per
// dimension.
inline std::map<std::string, Tensor> load_weights(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open weights file " + path);
  std::string line;
  size_t lineno = 0;
  if (!std::getline(f, line)) throw MalformedCsv(path + ": empty file");
  ++lineno;
  if (line.rfind("layer,", 0) != 0)
    throw MalformedCsv(path + ":1: expected header 'layer,i0,i1,i2,i3,value'");

  struct Entry {
    std::vector<size_t> idx;
    double value;
  };
  std::map<std::string, std::vector<Entry>> raw;
  std::map<std::string, size_t> rank;
  while (std::getline(f, line)) {
    ++lineno;
    while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
    if (line.empty()) continue;
    auto cells = io::split_csv_line(line);
    if (cells.size() != 6)
      throw MalformedCsv(path + ":" + std::to_string(lineno) + ": expected 6 columns, got " +
                         std::to_string(cells.size()));
    Entry e;
    std::string where = path + ":" + std::to_string(lineno);
    for (size_t c = 1; c <= 4; ++c) {
      if (cells[c].empty()) break;
      int64_t v = io::parse_int(cells[c], where + ":col" + std::to_string(c + 1));
      if (v < 0) throw MalformedCsv(where + ": negative index");
      e.idx.push_back(static_cast<size_t>(v));
    }
    if (e.idx.empty()) throw MalformedCsv(where + ": weight row without indices");
    e.value = io::parse_double(cells[5], where + ":col6");
    auto [it, fresh] = rank.try_emplace(cells[0], e.idx.size());
    if (!fresh && it->second != e.idx.size())
      throw ShapeMismatch(where + ": inconsistent index arity for layer " + cells[0]);
    raw[cells[0]].push_back(std::move(e));
  }

  std::map<std::string, Tensor> out;
  for (auto& [name, entries] : raw) {
    Tensor t;
    t.shape.assign(rank[name], 0);
    for (const Entry& e : entries)
      for (size_t d = 0; d < e.idx.size(); ++d) t.shape[d] = std::max(t.shape[d], e.idx[d] + 1);
    size_t total = 1;
    for (size_t s : t.shape) total *= s;
    t.data.assign(total, 0.0);
    for (const Entry& e : entries) {
      size_t flat = 0;
      for (size_t d = 0; d < e.idx.size(); ++d) flat = flat * t.shape[d] + e.idx[d];
      t.data[flat] = e.value;
    }
    out[name] = std::move(t);
  }
  return out;
}

inline void save_weights(const std::string& path, const std::map<std::string, Tensor>& tensors) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot open " + path + " for writing");
  f << "layer,i0,i1,i2,i3,value\n";
  f.precision(17);
  for (const auto& [name, t] : tensors) {
    std::vector<size_t> idx(t.shape.size(), 0);
    for (size_t flat = 0; flat < t.size(); ++flat) {
      f << name;
      for (size_t d = 0; d < 4; ++d) {
        f << ',';
        if (d < idx.size()) f << idx[d];
      }
      f << ',' << t.data[flat] << '\n';
      for (size_t d = idx.size(); d-- > 0;) {
        if (++idx[d] < t.shape[d]) break;
        idx[d] = 0;
      }
    }
  }
}

// --- model description -----------------------------------------------------

enum class Activation { none, relu, sigmoid, tanh, softmax };
enum class LayerKind { dense, conv2d };

inline Activation activation_from_name(const std::string& s) {
  if (s == "none" || s.empty()) return Activation::none;
  if (s == "relu") return Activation::relu;
  if (s == "sigmoid") return Activation::sigmoid;
  if (s == "tanh") return Activation::tanh;
  if (s == "softmax") return Activation::softmax;
  throw IoError("unknown activation: " + s);
}

inline const char* activation_name(Activation a) {
  switch (a) {
    case Activation::none: return "none";
    case Activation::relu: return "relu";
    case Activation::sigmoid: return "sigmoid";
    case Activation::tanh: return "tanh";
    case Activation::softmax: return "softmax";
  }
  return "?";
}

struct LayerSpec {
  LayerKind kind = LayerKind::dense;
  std::string name;
  size_t in_features = 0;   // dense
  size_t out_features = 0;  // dense outputs / conv filter count
  size_t in_h = 0, in_w = 0;  // conv input plane
  size_t kh = 0, kw = 0;      // conv kernel
  size_t stride = 1;
  Activation activation = Activation::none;
  PrecisionMode precision{4, Signedness::twos_complement};

  void validate() const {
    if (kind == LayerKind::dense) {
      if (in_features == 0 || out_features == 0)
        throw Error("dense layer " + name + " needs positive in/out features");
    } else {
      if (kh == 0 || kw == 0 || stride == 0 || in_h < kh || in_w < kw || out_features == 0)
        throw Error("conv layer " + name + " has inconsistent shape parameters");
    }
    precision.validate();
  }
  size_t out_h() const { return (in_h - kh) / stride + 1; }
  size_t out_w() const { return (in_w - kw) / stride + 1; }
  size_t weight_count() const {
    return kind == LayerKind::dense ? in_features * out_features : out_features * kh * kw;
  }
  size_t mac_count() const {
    return kind == LayerKind::dense ? in_features * out_features
                                    : out_features * out_h() * out_w() * kh * kw;
  }
  size_t output_size() const {
    return kind == LayerKind::dense ? out_features : out_features * out_h() * out_w();
  }
};

struct Model {
  std::vector<LayerSpec> layers;
  std::vector<Tensor> weights;  // one per layer
};

// --- tiling ---------------------------------------------------------------

struct MacroGeometry {
  size_t rows = 64;
  size_t cols = 64;
  size_t banks = 64;
  size_t cells() const { return rows * cols; }
};

struct Tile {
  size_t bank = 0;
  size_t weight_begin = 0;  // flat weight index range held by this load
  size_t weight_end = 0;
  size_t row_begin = 0, row_end = 0;
  size_t col_begin = 0, col_end = 0;
};

struct TileSchedule {
  std::vector<Tile> tiles;
  size_t passes = 0;
  size_t banks_required = 0;
  size_t lanes_per_pass = 0;
};

// Greedy row-major tiling: weights packed densely at n bits per cell, one
// bank load per 4096/n weights, passes counted against the lane capacity of
// the precision mode.
inline TileSchedule map_layer(const LayerSpec& layer, const MacroGeometry& geo = {}) {
  layer.validate();
  const unsigned n = layer.precision.bits;
  const size_t weights = layer.weight_count();
  const size_t per_load = geo.cells() / n;
  const size_t loads = (weights + per_load - 1) / per_load;
  if (loads > geo.banks)
    throw InsufficientBanks("layer " + layer.name + " needs " + std::to_string(loads) +
                            " bank loads, only " + std::to_string(geo.banks) + " banks");
  TileSchedule s;
  s.lanes_per_pass = layer.precision.lanes(geo.cells());
  s.passes = (layer.mac_count() + s.lanes_per_pass - 1) / s.lanes_per_pass;
  s.banks_required = loads;
  for (size_t l = 0; l < loads; ++l) {
    Tile t;
    t.bank = l;
    t.weight_begin = l * per_load;
    t.weight_end = std::min(weights, (l + 1) * per_load);
    t.row_begin = 0;
    t.row_end = geo.rows;
    t.col_begin = 0;
    t.col_end = geo.cols;
    s.tiles.push_back(t);
  }
  return s;
}

// --- inference --------------------------------------------------------

struct QorReport {
  double quantized_accuracy = 0;
  double float_accuracy = 0;
  double qor = 0;
  double sparsity = 0;
};

struct EvalSet {
  std::vector<std::vector<double>> features;
  std::vector<int> labels;
};

// CSV rows: feature values followed by an integer label.
inline EvalSet load_eval_csv(const std::string& path) {
  EvalSet set;
  std::ifstream f(path);
  if (!f) throw IoError("cannot open eval set " + path);
  std::string line;
  size_t lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
    if (line.empty()) continue;
    auto cells = io::split_csv_line(line);
    if (cells.size() < 2) throw MalformedCsv(path + ":" + std::to_string(lineno) + ": too few columns");
    std::vector<double> feat;
    std::string where = path + ":" + std::to_string(lineno);
    for (size_t c = 0; c + 1 < cells.size(); ++c) feat.push_back(io::parse_double(cells[c], where));
    set.features.push_back(std::move(feat));
    set.labels.push_back(static_cast<int>(io::parse_int(cells.back(), where)));
  }
  return set;
}

inline void save_eval_csv(const std::string& path, const EvalSet& set) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot open " + path + " for writing");
  f.precision(17);
  for (size_t i = 0; i < set.features.size(); ++i) {
    for (double v : set.features[i]) f << v << ',';
    f << set.labels[i] << '\n';
  }
}

struct InferResult {
  std::vector<std::vector<double>> outputs;       // final real outputs per sample
  std::vector<std::vector<int64_t>> final_accs;   // final-layer integer accumulators
  std::vector<int> predictions;
  QorReport qor;
  OpTally tally;
};

namespace detail {

// Per-sample symmetric input quantization at the layer's precision.
inline QuantTensor quantize_vector(const std::vector<double>& v, unsigned bits) {
  Tensor t;
  t.shape = {v.size()};
  t.data = v;
  return quantize(t, bits);
}

inline std::vector<double> host_dense(const std::vector<double>& x, const Tensor& w,
                                      size_t out_f, size_t in_f) {
  std::vector<double> y(out_f, 0.0);
  for (size_t o = 0; o < out_f; ++o)
    for (size_t j = 0; j < in_f; ++j) y[o] += w.data[o * in_f + j] * x[j];
  return y;
}

inline std::vector<double> host_activation(const std::vector<double>& y, Activation act) {
  std::vector<double> out(y.size());
  switch (act) {
    case Activation::none:
      return y;
    case Activation::relu:
      for (size_t i = 0; i < y.size(); ++i) out[i] = std::max(0.0, y[i]);
      return out;
    case Activation::sigmoid:
      for (size_t i = 0; i < y.size(); ++i) out[i] = 1.0 / (1.0 + std::exp(-y[i]));
      return out;
    case Activation::tanh:
      for (size_t i = 0; i < y.size(); ++i) out[i] = std::tanh(y[i]);
      return out;
    case Activation::softmax: {
      double mx = *std::max_element(y.begin(), y.end());
      double sum = 0;
      for (size_t i = 0; i < y.size(); ++i) {
        out[i] = std::exp(y[i] - mx);
        sum += out[i];
      }
      for (auto& v : out) v /= sum;
      return out;
    }
  }
  return out;
}

}  // namespace detail

// Runs the eval set through the simulated macro. Every dot product goes
// through the compressor-tree MAC in lane-sized chunks; sigmoid/tanh
// activations run through codec-encoded CAM tables, ReLU through the vector
// unit. Pruned (zero) weights still occupy cells; they are only dropped from
// the operation tallies. The float reference for QoR runs the same topology
// in host arithmetic.
inline InferResult infer(const Model& model, const EvalSet& eval, const CompressorSpec& spec,
                         const CodecSpec& codec = {}, const MacroGeometry& geo = {},
                         const TreeOptions& opts = {}) {
  if (model.layers.size() != model.weights.size())
    throw Error("model has " + std::to_string(model.layers.size()) + " layers but " +
                std::to_string(model.weights.size()) + " weight tensors");
  for (size_t l = 0; l < model.layers.size(); ++l) {
    const LayerSpec& spec_l = model.layers[l];
    spec_l.validate();
    if (model.weights[l].size() != spec_l.weight_count())
      throw ShapeMismatch("layer " + spec_l.name + " expects " +
                          std::to_string(spec_l.weight_count()) + " weights, csv has " +
                          std::to_string(model.weights[l].size()));
  }

  InferResult res;
  size_t zeros = 0, total_w = 0;

  // layer-constant data: quantized weights and tile schedules
  std::vector<QuantTensor> qweights;
  std::vector<TileSchedule> schedules;
  for (size_t l = 0; l < model.layers.size(); ++l) {
    qweights.push_back(quantize(model.weights[l], model.layers[l].precision.bits));
    schedules.push_back(map_layer(model.layers[l], geo));
    for (double w : model.weights[l].data) zeros += w == 0.0;
    total_w += model.weights[l].size();
  }
  res.qor.sparsity = total_w ? static_cast<double>(zeros) / static_cast<double>(total_w) : 0;

  CellArray lut_array(64, 64);
  LutTable sigmoid_lut = LutTable::build(LutFunction::sigmoid, codec, lut_array, 0);
  CellArray tanh_array(64, 64);
  LutTable tanh_lut = LutTable::build(LutFunction::tanh, codec, tanh_array, 0);
  CellArray exp_array(64, 64);
  LutTable exp_lut = LutTable::build(LutFunction::softmax_exp, codec, exp_array, 0);

  size_t correct_q = 0, correct_f = 0;
  for (size_t s = 0; s < eval.features.size(); ++s) {
    std::vector<double> x = eval.features[s];
    std::vector<double> xf = eval.features[s];
    std::vector<int64_t> accs;

    for (size_t l = 0; l < model.layers.size(); ++l) {
      const LayerSpec& layer = model.layers[l];
      const QuantTensor& qw = qweights[l];
      const unsigned n = layer.precision.bits;
      const size_t lanes = layer.precision.lanes(geo.cells());

      // gather the (input index, weight) element lists per output
      std::vector<std::vector<std::pair<size_t, int64_t>>> elems;
      if (layer.kind == LayerKind::dense) {
        if (x.size() != layer.in_features)
          throw ShapeMismatch("layer " + layer.name + " expects " +
                              std::to_string(layer.in_features) + " inputs");
        elems.resize(layer.out_features);
        for (size_t o = 0; o < layer.out_features; ++o) {
          elems[o].reserve(layer.in_features);
          for (size_t j = 0; j < layer.in_features; ++j)
            elems[o].push_back({j, qw.data[o * layer.in_features + j]});
        }
      } else {
        if (x.size() != layer.in_h * layer.in_w)
          throw ShapeMismatch("layer " + layer.name + " expects a " +
                              std::to_string(layer.in_h) + "x" + std::to_string(layer.in_w) +
                              " plane");
        elems.resize(layer.output_size());
        size_t oh = layer.out_h(), ow = layer.out_w();
        for (size_t fchan = 0; fchan < layer.out_features; ++fchan)
          for (size_t r = 0; r < oh; ++r)
            for (size_t c = 0; c < ow; ++c) {
              auto& e = elems[(fchan * oh + r) * ow + c];
              for (size_t i = 0; i < layer.kh; ++i)
                for (size_t j = 0; j < layer.kw; ++j)
                  e.push_back({(r * layer.stride + i) * layer.in_w + (c * layer.stride + j),
                               qw.data[(fchan * layer.kh + i) * layer.kw + j]});
            }
      }

      QuantTensor qx = detail::quantize_vector(x, n);
      accs.assign(elems.size(), 0);
      for (size_t o = 0; o < elems.size(); ++o) {
        for (size_t base = 0; base < elems[o].size(); base += lanes) {
          size_t chunk = std::min(lanes, elems[o].size() - base);
          std::vector<int64_t> in(chunk), wt(chunk);
          size_t nnz = 0;
          for (size_t k = 0; k < chunk; ++k) {
            in[k] = qx.data[elems[o][base + k].first];
            wt[k] = elems[o][base + k].second;
            nnz += wt[k] != 0;
          }
          MacResult mr = mac(in, wt, layer.precision, spec, opts);
          accs[o] += static_cast<int64_t>(mr.total);
          res.tally.pim_bit_ops += 2 * uint64_t(nnz) * n * n;
          res.tally.mac_ops += 2 * nnz;
        }
      }
      res.tally.cycles += static_cast<double>(pass_cycles(n)) * schedules[l].passes;

      double out_scale = qw.scale * qx.scale;
      std::vector<double> y(accs.size());
      switch (layer.activation) {
        case Activation::none:
          for (size_t o = 0; o < accs.size(); ++o) y[o] = static_cast<double>(accs[o]) * out_scale;
          break;
        case Activation::relu: {
          std::vector<int64_t> r = relu_vector(accs, PrecisionMode(64, Signedness::twos_complement));
          for (size_t o = 0; o < accs.size(); ++o) {
            accs[o] = r[o];
            y[o] = static_cast<double>(r[o]) * out_scale;
          }
          break;
        }
        case Activation::sigmoid:
        case Activation::tanh: {
          LutTable& lut = layer.activation == Activation::sigmoid ? sigmoid_lut : tanh_lut;
          for (size_t o = 0; o < accs.size(); ++o) {
            uint8_t code = codec.encode(static_cast<double>(accs[o]) * out_scale);
            y[o] = lut.lookup_value(code);
          }
          res.tally.cam_searches += lut.searches();
          res.tally.cam_search_bits += lut.search_bits();
          lut.reset_stats();
          break;
        }
        case Activation::softmax: {
          std::vector<uint8_t> codes(accs.size());
          for (size_t o = 0; o < accs.size(); ++o)
            codes[o] = codec.encode(static_cast<double>(accs[o]) * out_scale);
          y = softmax(codes, exp_lut);
          res.tally.cam_searches += exp_lut.searches();
          res.tally.cam_search_bits += exp_lut.search_bits();
          exp_lut.reset_stats();
          break;
        }
      }
      x = y;

      // float reference on the same topology
      std::vector<double> yf;
      if (layer.kind == LayerKind::dense) {
        yf = detail::host_dense(xf, model.weights[l], layer.out_features, layer.in_features);
      } else {
        yf.assign(elems.size(), 0.0);
        size_t oh = layer.out_h(), ow = layer.out_w();
        for (size_t fchan = 0; fchan < layer.out_features; ++fchan)
          for (size_t r = 0; r < oh; ++r)
            for (size_t c = 0; c < ow; ++c) {
              double acc = 0;
              for (size_t i = 0; i < layer.kh; ++i)
                for (size_t j = 0; j < layer.kw; ++j)
                  acc += xf[(r * layer.stride + i) * layer.in_w + (c * layer.stride + j)] *
                         model.weights[l].data[(fchan * layer.kh + i) * layer.kw + j];
              yf[(fchan * oh + r) * ow + c] = acc;
            }
      }
      xf = detail::host_activation(yf, layer.activation);
    }

    res.outputs.push_back(x);
    res.final_accs.push_back(accs);
    int pred = static_cast<int>(std::max_element(x.begin(), x.end()) - x.begin());
    int pred_f = static_cast<int>(std::max_element(xf.begin(), xf.end()) - xf.begin());
    res.predictions.push_back(pred);
    if (!eval.labels.empty()) {
      correct_q += pred == eval.labels[s];
      correct_f += pred_f == eval.labels[s];
    }
  }

  if (!eval.features.empty()) {
    res.qor.quantized_accuracy =
        static_cast<double>(correct_q) / static_cast<double>(eval.features.size());
    res.qor.float_accuracy =
        static_cast<double>(correct_f) / static_cast<double>(eval.features.size());
    res.qor.qor = res.qor.float_accuracy > 0
                      ? res.qor.quantized_accuracy / res.qor.float_accuracy
                      : 0.0;
  }
  return res;
}

// --- convolution demo -------------------------------------------------

enum class DemoKernel { smoothing, edge };

struct ConvDemoResult {
  io::Image output;
  io::Image reference;  // exact-spec output
  double psnr_db = 0;   // +inf when identical
  bool reference_identical = false;
  OpTally tally;
};

// 3x3 convolution of an 8-bit grayscale image through the MAC path, compared
// against the exact-spec result. Smoothing uses the 1/16-normalized binomial
// kernel, edge the Laplacian.
inline ConvDemoResult conv_demo(const io::Image& img, DemoKernel kernel,
                                const CompressorSpec& spec, const TreeOptions& opts = {}) {
  if (img.width < 3 || img.height < 3) throw Error("demo image must be at least 3x3");
  static const int64_t smooth[9] = {1, 2, 1, 2, 4, 2, 1, 2, 1};
  static const int64_t edge[9] = {0, 1, 0, 1, -4, 1, 0, 1, 0};
  const int64_t* k = kernel == DemoKernel::smoothing ? smooth : edge;
  const int64_t divisor = kernel == DemoKernel::smoothing ? 16 : 1;
  PrecisionMode mode(16, Signedness::twos_complement);
  CompressorSpec exact = CompressorSpec::exact();

  ConvDemoResult res;
  res.output.width = res.reference.width = img.width - 2;
  res.output.height = res.reference.height = img.height - 2;
  res.output.pixels.resize(res.output.width * res.output.height);
  res.reference.pixels.resize(res.output.pixels.size());

  std::vector<int64_t> win(9), kv(k, k + 9);
  for (size_t r = 0; r + 2 < img.height; ++r) {
    for (size_t c = 0; c + 2 < img.width; ++c) {
      for (size_t i = 0; i < 3; ++i)
        for (size_t j = 0; j < 3; ++j) win[i * 3 + j] = img.at(r + i, c + j);
      int64_t got = static_cast<int64_t>(mac(win, kv, mode, spec, opts).total);
      int64_t ref = static_cast<int64_t>(mac(win, kv, mode, exact, opts).total);
      auto to_px = [&](int64_t v) {
        v /= divisor;
        return static_cast<uint8_t>(std::clamp<int64_t>(v, 0, 255));
      };
      res.output.pixels[r * res.output.width + c] = to_px(got);
      res.reference.pixels[r * res.output.width + c] = to_px(ref);
      res.tally.pim_bit_ops += 2 * 9 * uint64_t(mode.bits) * mode.bits;
      res.tally.mac_ops += 2 * 9;
      res.tally.cycles += static_cast<double>(pass_cycles(mode.bits));
    }
  }

  double mse = 0;
  for (size_t i = 0; i < res.output.pixels.size(); ++i) {
    double d = static_cast<double>(res.output.pixels[i]) - res.reference.pixels[i];
    mse += d * d;
  }
  mse /= static_cast<double>(res.output.pixels.size());
  if (mse == 0) {
    res.reference_identical = true;
    res.psnr_db = std::numeric_limits<double>::infinity();
  } else {
    res.psnr_db = 10.0 * std::log10(255.0 * 255.0 / mse);
  }
  return res;
}

}  // namespace nn
}  // namespace misim
