#pragma once

#include <filesystem>
#include <fstream>
#include <string>

#include "json.hpp"
#include "misim/nn.hpp"

namespace misim {
namespace nn {

// Model description file: JSON listing layers (kind, shape, precision,
// activation) and the weight CSV path, resolved relative to the JSON file.
//
// {
//   "weights": "weights.csv",
//   "layers": [
//     {"name": "fc1", "kind": "dense", "in": 64, "out": 16,
//      "activation": "relu", "precision": "int4"},
//     {"name": "conv1", "kind": "conv2d", "in_h": 8, "in_w": 8,
//      "filters": 4, "kh": 3, "kw": 3, "stride": 1,
//      "activation": "relu", "precision": "int8"}
//   ]
// }
inline Model load_model(const std::string& json_path) {
  std::ifstream f(json_path);
  if (!f) throw IoError("cannot open model file " + json_path);
  nlohmann::json j;
  try {
    f >> j;
  } catch (const nlohmann::json::exception& e) {
    throw IoError(json_path + ": " + e.what());
  }

  Model m;
  if (!j.contains("layers") || !j["layers"].is_array())
    throw IoError(json_path + ": missing layers array");
  std::filesystem::path base = std::filesystem::path(json_path).parent_path();
  std::string wpath = j.value("weights", std::string("weights.csv"));
  auto tensors = load_weights((base / wpath).string());

  for (const auto& jl : j["layers"]) {
    LayerSpec l;
    l.name = jl.value("name", std::string());
    std::string kind = jl.value("kind", std::string("dense"));
    if (kind == "dense") {
      l.kind = LayerKind::dense;
      l.in_features = jl.value("in", 0);
      l.out_features = jl.value("out", 0);
    } else if (kind == "conv2d") {
      l.kind = LayerKind::conv2d;
      l.in_h = jl.value("in_h", 0);
      l.in_w = jl.value("in_w", 0);
      l.out_features = jl.value("filters", 0);
      l.kh = jl.value("kh", 0);
      l.kw = jl.value("kw", 0);
      l.stride = jl.value("stride", 1);
    } else {
      throw IoError(json_path + ": unknown layer kind " + kind);
    }
    l.activation = activation_from_name(jl.value("activation", std::string("none")));
    l.precision = PrecisionMode::parse(jl.value("precision", std::string("int8")));
    l.validate();
    auto it = tensors.find(l.name);
    if (it == tensors.end())
      throw ShapeMismatch(json_path + ": no weights for layer " + l.name);
    if (it->second.size() != l.weight_count())
      throw ShapeMismatch(json_path + ": layer " + l.name + " expects " +
                          std::to_string(l.weight_count()) + " weights, csv has " +
                          std::to_string(it->second.size()));
    m.layers.push_back(l);
    m.weights.push_back(it->second);
  }
  return m;
}

inline void save_model(const std::string& dir, const Model& m,
                       const std::string& json_name = "model.json") {
  std::filesystem::create_directories(dir);
  std::filesystem::path base(dir);
  nlohmann::json j;
  j["weights"] = "weights.csv";
  j["layers"] = nlohmann::json::array();
  std::map<std::string, Tensor> tensors;
  for (size_t i = 0; i < m.layers.size(); ++i) {
    const LayerSpec& l = m.layers[i];
    nlohmann::json jl;
    jl["name"] = l.name;
    jl["activation"] = activation_name(l.activation);
    jl["precision"] = l.precision.name();
    if (l.kind == LayerKind::dense) {
      jl["kind"] = "dense";
      jl["in"] = l.in_features;
      jl["out"] = l.out_features;
    } else {
      jl["kind"] = "conv2d";
      jl["in_h"] = l.in_h;
      jl["in_w"] = l.in_w;
      jl["filters"] = l.out_features;
      jl["kh"] = l.kh;
      jl["kw"] = l.kw;
      jl["stride"] = l.stride;
    }
    j["layers"].push_back(jl);
    tensors[l.name] = m.weights[i];
  }
  std::ofstream jf(base / json_name);
  if (!jf) throw IoError("cannot write " + (base / json_name).string());
  jf << j.dump(2) << '\n';
  save_weights((base / "weights.csv").string(), tensors);
}

}  // namespace nn
}  // namespace misim
