// Command-line front end for the memory-in-situ macro simulator. Every
// subcommand is a thin wrapper over the library; all numeric work happens
// behind the library interfaces.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>

#include "CLI11.hpp"
#include "json.hpp"

#include "misim/cell_array.hpp"
#include "misim/codec.hpp"
#include "misim/compressor.hpp"
#include "misim/digits.hpp"
#include "misim/io.hpp"
#include "misim/lut.hpp"
#include "misim/mac.hpp"
#include "misim/model_file.hpp"
#include "misim/nn.hpp"
#include "misim/perf.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct GlobalOpts {
  std::string config;
  uint64_t seed = 42;
  std::string out_dir = ".";
  double voltage = 0.0;  // 0 = nominal
  std::string spec_name = "exact";
  std::string codec_name = "fp4";
  misim::EnergyParams params;

  void finalize() {
    if (!config.empty()) params.apply(misim::io::load_config(config));
    params.validate();
    if (voltage == 0.0) voltage = params.v_nominal;
  }
  fs::path out(const std::string& name) const {
    fs::create_directories(out_dir);
    return fs::path(out_dir) / name;
  }
};

misim::CompressorSpec resolve_spec(const std::string& name) {
  if (name == "exact" || name == "exact56") return misim::CompressorSpec::exact();
  if (name == "compact" || name == "exact40") return misim::CompressorSpec::compact();
  if (name == "approx" || name == "approx22") return misim::CompressorSpec::approx();
  return misim::CompressorSpec::from_file(name);
}

// usage problems exit 2, runtime failures exit 1
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

misim::CellArray load_array(const std::string& image_path) {
  auto img = misim::io::load_bit_matrix_file(image_path);
  if (img.empty()) throw UsageError("array image " + image_path + " is empty");
  misim::CellArray a(img.size(), img[0].size());
  a.load(img);
  return a;
}

void write_csv(const fs::path& path, const std::string& content) {
  std::ofstream f(path);
  if (!f) throw misim::IoError("cannot write " + path.string());
  f << content;
}

json tally_json(const misim::OpTally& t) {
  return json{{"pim_bit_ops", t.pim_bit_ops},
              {"cam_searches", t.cam_searches},
              {"cam_search_bits", t.cam_search_bits},
              {"mac_ops", t.mac_ops},
              {"cycles", t.cycles}};
}

json report_json(const misim::PerfReport& r) {
  return json{{"tops", r.tops},
              {"tops_per_watt", r.tops_per_watt},
              {"tops_per_mm2", r.tops_per_mm2},
              {"energy_pj", r.energy_pj},
              {"latency_us", r.latency_us},
              {"voltage", r.voltage},
              {"f_mhz", r.f_mhz},
              {"op_counts", tally_json(r.op_counts)}};
}

void emit_report(const GlobalOpts& g, const std::string& stem, const json& j) {
  std::ofstream f(g.out(stem + ".json"));
  f << j.dump(2) << '\n';
  std::cout << j.dump(2) << std::endl;
}

int run_array(const GlobalOpts& g, const std::string& sub, const std::string& image,
              const std::string& save, int64_t row, int64_t col, const std::string& bits,
              const std::string& key, const std::string& op, const std::string& rows_arg,
              const std::string& operand, const std::string& trace_path) {
  misim::CellArray a = load_array(image);
  misim::TraceLog trace;
  a.attach_trace(&trace);
  std::ostringstream csv;

  if (sub == "write") {
    if (row < 0 || bits.empty()) throw UsageError("array write needs --row and --bits");
    misim::Bits b = misim::bits_from_string(bits);
    if (b.size() != a.cols())
      throw UsageError("LengthMismatch: --bits has " + std::to_string(b.size()) +
                       " bits, array has " + std::to_string(a.cols()) + " columns");
    a.write_row(static_cast<size_t>(row), b);
  } else if (sub == "read") {
    if (row >= 0) {
      misim::Bits b = a.read_row(static_cast<size_t>(row));
      csv << "row,bits\n" << row << ',' << misim::bits_to_string(b) << '\n';
      std::cout << misim::bits_to_string(b) << '\n';
    } else if (col >= 0) {
      misim::Bits b = a.read_column(static_cast<size_t>(col));
      csv << "col,bits\n" << col << ',' << misim::bits_to_string(b) << '\n';
      std::cout << misim::bits_to_string(b) << '\n';
    } else {
      throw UsageError("array read needs --row or --col");
    }
  } else if (sub == "transpose") {
    auto t = a.transpose_read();
    misim::CellArray out(t.size(), t[0].size());
    out.load(t);
    a = std::move(out);
  } else if (sub == "bcam") {
    if (key.empty()) throw UsageError("array bcam needs --key");
    misim::Bits k = misim::bits_from_string(key);
    if (k.size() != a.cols())
      throw UsageError("LengthMismatch: key has " + std::to_string(k.size()) +
                       " bits, array has " + std::to_string(a.cols()) + " columns");
    misim::Bits m = a.bcam_search(k);
    csv << "row,match\n";
    for (size_t r = 0; r < m.size(); ++r) csv << r << ',' << unsigned(m[r]) << '\n';
    std::cout << misim::bits_to_string(m) << '\n';
  } else if (sub == "tcam") {
    if (key.empty()) throw UsageError("array tcam needs --key");
    auto k = misim::ternary_from_string(key);
    if (k.size() != a.cols() / 2)
      throw UsageError("LengthMismatch: ternary key has " + std::to_string(k.size()) +
                       " symbols, array holds " + std::to_string(a.cols() / 2));
    misim::TcamResult res = a.tcam_search(k);
    csv << "row,match,invalid\n";
    for (size_t r = 0; r < res.match.size(); ++r) {
      bool inv = std::find(res.invalid_rows.begin(), res.invalid_rows.end(), r) !=
                 res.invalid_rows.end();
      csv << r << ',' << unsigned(res.match[r]) << ',' << inv << '\n';
    }
    std::cout << misim::bits_to_string(res.match) << '\n';
    for (size_t r : res.invalid_rows)
      std::cerr << "note: row " << r << " holds an invalid ternary pair\n";
  } else if (sub == "pim") {
    if (op == "bool") {
      auto comma = rows_arg.find(',');
      if (comma == std::string::npos) throw UsageError("--rows expects r1,r2");
      size_t ra = std::stoul(rows_arg.substr(0, comma));
      size_t rb = std::stoul(rows_arg.substr(comma + 1));
      misim::PimBooleanResult res = a.pim_boolean(ra, rb);
      csv << "col,and,nor,xnor\n";
      for (size_t c = 0; c < res.and_bits.size(); ++c)
        csv << c << ',' << unsigned(res.and_bits[c]) << ',' << unsigned(res.nor_bits[c]) << ','
            << unsigned(res.xnor_bits[c]) << '\n';
      std::cout << "and=" << misim::bits_to_string(res.and_bits)
                << " nor=" << misim::bits_to_string(res.nor_bits)
                << " xnor=" << misim::bits_to_string(res.xnor_bits) << '\n';
    } else if (op == "mul") {
      if (row < 0 || operand.empty())
        throw UsageError("array pim --op mul needs --row and --operand");
      misim::Bits o = misim::bits_from_string(operand);
      if (o.size() != a.cols()) throw UsageError("LengthMismatch: operand width");
      misim::Bits res = a.pim_multiply_row(static_cast<size_t>(row), o);
      csv << "col,bit\n";
      for (size_t c = 0; c < res.size(); ++c) csv << c << ',' << unsigned(res[c]) << '\n';
      std::cout << misim::bits_to_string(res) << '\n';
    } else {
      throw UsageError("array pim needs --op bool or --op mul");
    }
  } else {
    throw UsageError("unknown array verb: " + sub);
  }

  if (!save.empty()) misim::io::save_bit_matrix_file(save, a.image());
  if (!csv.str().empty()) write_csv(g.out("array_" + sub + ".csv"), csv.str());
  std::ofstream tf(trace_path.empty() ? g.out("trace.csv") : fs::path(trace_path));
  trace.write_csv(tf);
  return 0;
}

int run_mac(const GlobalOpts& g, const std::string& mode_name, const std::string& inputs_path,
            const std::string& weights_path) {
  misim::PrecisionMode mode = misim::PrecisionMode::parse(mode_name);
  auto inputs = misim::io::load_int_vector(inputs_path);
  auto weights = misim::io::load_int_vector(weights_path);
  misim::CompressorSpec spec = resolve_spec(g.spec_name);
  misim::MacResult r = misim::mac(inputs, weights, mode, spec);
  std::ostringstream csv;
  csv << "lane,value,cycle_count,bit_op_count\n";
  for (size_t i = 0; i < r.lane_values.size(); ++i)
    csv << i << ',' << misim::wide_to_string(r.lane_values[i]) << ',' << r.cycle_count << ','
        << r.bit_op_count << '\n';
  write_csv(g.out("mac_lanes.csv"), csv.str());
  json j{{"mode", mode.name()},
         {"spec", spec.label()},
         {"total", misim::wide_to_string(r.total)},
         {"cycle_count", r.cycle_count},
         {"bit_op_count", r.bit_op_count}};
  emit_report(g, "mac", j);
  return 0;
}

int run_lut(const GlobalOpts& g, const std::string& fn_name, const std::string& eval_code) {
  misim::CodecSpec codec = misim::CodecSpec::parse(g.codec_name);
  misim::LutFunction fn;
  if (fn_name == "sigmoid")
    fn = misim::LutFunction::sigmoid;
  else if (fn_name == "tanh")
    fn = misim::LutFunction::tanh;
  else if (fn_name == "softmax_exp")
    fn = misim::LutFunction::softmax_exp;
  else
    throw UsageError("unknown LUT function: " + fn_name);

  misim::CellArray arr(64, 64);
  misim::LutTable t = misim::LutTable::build(fn, codec, arr);
  std::ostringstream dump;
  t.dump_csv(dump);
  write_csv(g.out("lut_" + fn_name + "_" + codec.name() + ".csv"), dump.str());
  std::cout << dump.str();
  if (!eval_code.empty()) {
    unsigned code = static_cast<unsigned>(std::stoul(eval_code, nullptr, 0));
    uint8_t out = t.lookup(static_cast<uint8_t>(code & 0xF));
    std::cout << "lookup(" << code << ") = " << unsigned(out) << " (" << codec.decode(out)
              << ")\n";
  }
  return 0;
}

int run_perf(const GlobalOpts& g, const std::string& mode_name) {
  misim::PrecisionMode mode = mode_name == "bipolar" || mode_name == "int1"
                                  ? misim::PrecisionMode(1, misim::Signedness::bipolar)
                                  : misim::PrecisionMode::parse(mode_name);
  misim::PerfReport r = misim::sustained_report(mode, g.params, g.voltage);
  std::ostringstream csv;
  csv << "mode,voltage,f_mhz,tops,tops_per_watt,tops_per_mm2,energy_pj,latency_us\n";
  csv << mode.name() << ',' << r.voltage << ',' << r.f_mhz << ',' << r.tops << ','
      << r.tops_per_watt << ',' << r.tops_per_mm2 << ',' << r.energy_pj << ',' << r.latency_us
      << '\n';
  write_csv(g.out("perf.csv"), csv.str());
  emit_report(g, "perf", report_json(r));
  return 0;
}

int run_map(const GlobalOpts& g, const std::string& model_path) {
  misim::nn::Model model = misim::nn::load_model(model_path);
  json j = json::array();
  std::ostringstream csv;
  csv << "layer,kind,weights,passes,banks_required,lanes_per_pass\n";
  for (size_t l = 0; l < model.layers.size(); ++l) {
    misim::nn::TileSchedule s = misim::nn::map_layer(model.layers[l]);
    const auto& spec = model.layers[l];
    csv << spec.name << ',' << (spec.kind == misim::nn::LayerKind::dense ? "dense" : "conv2d")
        << ',' << spec.weight_count() << ',' << s.passes << ',' << s.banks_required << ','
        << s.lanes_per_pass << '\n';
    j.push_back({{"layer", spec.name},
                 {"weights", spec.weight_count()},
                 {"passes", s.passes},
                 {"banks_required", s.banks_required},
                 {"lanes_per_pass", s.lanes_per_pass}});
  }
  write_csv(g.out("map.csv"), csv.str());
  emit_report(g, "map", j);
  return 0;
}

int run_infer(const GlobalOpts& g, const std::string& model_path, const std::string& eval_path,
              const std::string& gen_demo) {
  if (!gen_demo.empty()) {
    misim::nn::Model m = misim::nn::digits::make_mlp(g.seed, 4, 0.40);
    misim::nn::save_model(gen_demo, m);
    misim::nn::save_eval_csv((fs::path(gen_demo) / "eval.csv").string(),
                             misim::nn::digits::make_dataset(g.seed + 1, 200));
    std::cout << "demo model written to " << gen_demo << '\n';
    if (model_path.empty()) return 0;
  }
  if (model_path.empty() || eval_path.empty())
    throw UsageError("infer needs --model and --eval (or --gen-demo)");
  misim::nn::Model model = misim::nn::load_model(model_path);
  misim::nn::EvalSet eval = misim::nn::load_eval_csv(eval_path);
  misim::CompressorSpec spec = resolve_spec(g.spec_name);
  misim::CodecSpec codec = misim::CodecSpec::parse(g.codec_name);
  misim::nn::InferResult r = misim::nn::infer(model, eval, spec, codec);
  misim::PerfReport perf = misim::report(r.tally, g.params, g.voltage);
  json j{{"spec", spec.label()},
         {"codec", codec.name()},
         {"samples", eval.features.size()},
         {"quantized_accuracy", r.qor.quantized_accuracy},
         {"float_accuracy", r.qor.float_accuracy},
         {"qor", r.qor.qor},
         {"sparsity", r.qor.sparsity},
         {"perf", report_json(perf)}};
  emit_report(g, "qor", j);
  return 0;
}

int run_metrics(const GlobalOpts& g, const std::string& spec_path, unsigned width, size_t count,
                const std::string& policy_str) {
  misim::CompressorSpec spec = resolve_spec(spec_path.empty() ? g.spec_name : spec_path);
  misim::MetricsPolicy policy = misim::MetricsPolicy::parse(policy_str);
  misim::ErrorMetrics m = misim::error_metrics(spec, width, count, policy);
  json j{{"spec", m.spec_label},   {"width", m.width}, {"count", m.addend_count},
         {"policy", m.policy},     {"seed", m.seed},   {"error_rate", m.error_rate},
         {"nmed", m.nmed},         {"mred", m.mred},   {"max_error", m.max_error}};
  std::ostringstream csv;
  csv << "spec,width,count,policy,seed,error_rate,nmed,mred,max_error\n";
  csv << m.spec_label << ',' << m.width << ',' << m.addend_count << ',' << m.policy << ','
      << m.seed << ',' << m.error_rate << ',' << m.nmed << ',' << m.mred << ',' << m.max_error
      << '\n';
  write_csv(g.out("metrics.csv"), csv.str());
  emit_report(g, "metrics", j);
  return 0;
}

int run_demo_conv(const GlobalOpts& g, const std::string& image_path, const std::string& kernel,
                  const std::string& gen_image) {
  if (!gen_image.empty()) {
    misim::io::Image img;
    img.width = img.height = 64;
    std::mt19937_64 rng(g.seed);
    img.pixels.resize(64 * 64);
    for (size_t r = 0; r < 64; ++r)
      for (size_t c = 0; c < 64; ++c) {
        double v = 96 + 64 * static_cast<double>((r / 8 + c / 8) % 2) +
                   static_cast<double>(rng() % 32);
        img.pixels[r * 64 + c] = static_cast<uint8_t>(std::min(255.0, v));
      }
    misim::io::save_image(gen_image, img);
    std::cout << "test image written to " << gen_image << '\n';
    if (image_path.empty()) return 0;
  }
  if (image_path.empty()) throw UsageError("demo-conv needs --image (or --gen-image)");
  misim::io::Image img = misim::io::load_image(image_path);
  misim::nn::DemoKernel k;
  if (kernel == "smoothing")
    k = misim::nn::DemoKernel::smoothing;
  else if (kernel == "edge")
    k = misim::nn::DemoKernel::edge;
  else
    throw UsageError("kernel must be smoothing or edge");
  misim::CompressorSpec spec = resolve_spec(g.spec_name);
  misim::nn::ConvDemoResult r = misim::nn::conv_demo(img, k, spec);
  misim::io::save_image(g.out("conv_" + kernel + ".pgm").string(), r.output);
  misim::io::save_image(g.out("conv_" + kernel + "_exact.pgm").string(), r.reference);
  json j{{"kernel", kernel},
         {"spec", spec.label()},
         {"width", r.output.width},
         {"height", r.output.height},
         {"psnr_db", r.reference_identical ? json("inf") : json(r.psnr_db)},
         {"identical_to_exact", r.reference_identical}};
  if (r.reference_identical) j["note"] = "output matches the exact-spec reference exactly";
  emit_report(g, "conv", j);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"memory-in-situ SRAM macro simulator"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand

  GlobalOpts g;
  app.add_option("--config", g.config, "key=value parameter file");
  app.add_option("--seed", g.seed, "RNG seed for reproducible runs");
  app.add_option("--out", g.out_dir, "report output directory");
  app.add_option("--voltage", g.voltage, "supply voltage (V), default nominal");
  app.add_option("--spec", g.spec_name, "compressor spec: exact|compact|approx|<file>");
  app.add_option("--codec", g.codec_name, "LUT codec: fp4 | posit4[:es]");

  auto* array = app.add_subcommand("array", "storage / CAM / PIM operations");
  std::string arr_sub, arr_image, arr_save, arr_bits, arr_key, arr_op, arr_rows, arr_operand,
      arr_trace;
  int64_t arr_row = -1, arr_col = -1;
  array->add_option("verb", arr_sub, "write|read|transpose|bcam|tcam|pim")->required();
  array->add_option("--image", arr_image, "bit-matrix file (.txt or .csv)")->required();
  array->add_option("--save", arr_save, "write the resulting image here");
  array->add_option("--row", arr_row, "row index");
  array->add_option("--col", arr_col, "column index");
  array->add_option("--bits", arr_bits, "bit string for write");
  array->add_option("--key", arr_key, "search key (binary or ternary)");
  array->add_option("--op", arr_op, "pim operation: bool|mul");
  array->add_option("--rows", arr_rows, "two rows r1,r2 for pim bool");
  array->add_option("--operand", arr_operand, "operand bits for pim mul");
  array->add_option("--trace", arr_trace, "trace CSV path");

  auto* mac_cmd = app.add_subcommand("mac", "variable-precision dot product");
  std::string mac_mode = "int8", mac_inputs, mac_weights;
  mac_cmd->add_option("--mode", mac_mode, "intN | uintN | bipolar");
  mac_cmd->add_option("--inputs", mac_inputs, "CSV of integers")->required();
  mac_cmd->add_option("--weights", mac_weights, "CSV of integers")->required();

  auto* lut_cmd = app.add_subcommand("lut", "activation lookup tables");
  std::string lut_fn = "sigmoid", lut_eval;
  lut_cmd->add_option("--fn", lut_fn, "sigmoid|tanh|softmax_exp");
  lut_cmd->add_option("--eval", lut_eval, "look up one 4-bit code");

  auto* perf_cmd = app.add_subcommand("perf", "throughput / energy model");
  std::string perf_mode = "int1";
  perf_cmd->add_option("--mode", perf_mode, "precision mode");

  auto* map_cmd = app.add_subcommand("map", "tile a model onto macro banks");
  std::string map_model;
  map_cmd->add_option("--model", map_model, "model JSON")->required();

  auto* infer_cmd = app.add_subcommand("infer", "run a model through the macro");
  std::string infer_model, infer_eval, infer_gen;
  infer_cmd->add_option("--model", infer_model, "model JSON");
  infer_cmd->add_option("--eval", infer_eval, "eval CSV (features..., label)");
  infer_cmd->add_option("--gen-demo", infer_gen, "write the demo model/eval set to this dir");

  auto* met_cmd = app.add_subcommand("metrics", "compressor error characterization");
  std::string met_spec, met_policy = "sampled:1000000:42";
  unsigned met_width = 8;
  size_t met_count = 4;
  met_cmd->add_option("--spec", met_spec, "spec to characterize (default: global --spec)");
  met_cmd->add_option("--width", met_width, "addend width in bits");
  met_cmd->add_option("--count", met_count, "addend count");
  met_cmd->add_option("--policy", met_policy, "exhaustive | sampled:<n>:<seed>");

  auto* conv_cmd = app.add_subcommand("demo-conv", "image convolution demo");
  std::string conv_image, conv_kernel = "smoothing", conv_gen;
  conv_cmd->add_option("--image", conv_image, "PGM or CSV grayscale image");
  conv_cmd->add_option("--kernel", conv_kernel, "smoothing|edge");
  conv_cmd->add_option("--gen-image", conv_gen, "write a checkerboard test image here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    g.finalize();
    if (array->parsed())
      return run_array(g, arr_sub, arr_image, arr_save, arr_row, arr_col, arr_bits, arr_key,
                       arr_op, arr_rows, arr_operand, arr_trace);
    if (mac_cmd->parsed()) return run_mac(g, mac_mode, mac_inputs, mac_weights);
    if (lut_cmd->parsed()) return run_lut(g, lut_fn, lut_eval);
    if (perf_cmd->parsed()) return run_perf(g, perf_mode);
    if (map_cmd->parsed()) return run_map(g, map_model);
    if (infer_cmd->parsed()) return run_infer(g, infer_model, infer_eval, infer_gen);
    if (met_cmd->parsed()) return run_metrics(g, met_spec, met_width, met_count, met_policy);
    if (conv_cmd->parsed()) return run_demo_conv(g, conv_image, conv_kernel, conv_gen);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const misim::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
