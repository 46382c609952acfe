#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "misim/errors.hpp"
#include "misim/mac.hpp"

namespace misim {

// Measured and calibrated constants of the macro. The fJ/bit figures drive
// the energy accounting; cycles_per_mac_pass, macro_area_mm2 and
// e_mac_fj_per_bit_op are calibration constants that close the headline
// throughput, density and sustained-efficiency figures (raw cell area and
// the raw per-bit energy alone do not determine them).
struct EnergyParams {
  double e_pim_fj_per_bit = 17.65;
  double e_cam_fj_per_search_bit = 0.55;
  double f_nominal_mhz = 350.0;
  double v_nominal = 0.9;
  double v_min = 0.8;
  double v_max = 1.2;
  double cycles_per_mac_pass = 1.486;     // calibrated, 1-bit pass
  double macro_area_mm2 = 0.4214;         // calibrated effective area
  double cell_area_um2 = 2.63;
  double e_mac_fj_per_bit_op = 2.747253;  // calibrated sustained MAC-path energy

  void validate() const {
    const double fields[] = {e_pim_fj_per_bit, e_cam_fj_per_search_bit, f_nominal_mhz,
                             v_nominal,        v_min,                   v_max,
                             cycles_per_mac_pass, macro_area_mm2,       cell_area_um2,
                             e_mac_fj_per_bit_op};
    for (double f : fields)
      if (!(f > 0)) throw Error("energy parameters must be strictly positive");
    if (v_min > v_max) throw Error("voltage range is inverted");
  }

  void apply(const std::map<std::string, std::string>& kv) {
    auto get = [&](const char* key, double& out) {
      auto it = kv.find(key);
      if (it != kv.end()) out = std::stod(it->second);
    };
    get("e_pim_fj_per_bit", e_pim_fj_per_bit);
    get("e_cam_fj_per_search_bit", e_cam_fj_per_search_bit);
    get("f_nominal_mhz", f_nominal_mhz);
    get("v_nominal", v_nominal);
    get("v_min", v_min);
    get("v_max", v_max);
    get("cycles_per_mac_pass", cycles_per_mac_pass);
    get("macro_area_mm2", macro_area_mm2);
    get("cell_area_um2", cell_area_um2);
    get("e_mac_fj_per_bit_op", e_mac_fj_per_bit_op);
    validate();
  }
};

struct DvfsPoint {
  double f_mhz = 0;
  double energy_scale = 1;
};

// Linear frequency and quadratic energy in supply voltage.
inline DvfsPoint dvfs(double v, const EnergyParams& p) {
  if (v < p.v_min || v > p.v_max)
    throw VoltageOutOfRange("voltage " + std::to_string(v) + " outside [" +
                            std::to_string(p.v_min) + ", " + std::to_string(p.v_max) + "]");
  double r = v / p.v_nominal;
  return {p.f_nominal_mhz * r, r * r};
}

inline double energy_pim_fj(uint64_t bit_ops, const EnergyParams& p, double v) {
  return static_cast<double>(bit_ops) * p.e_pim_fj_per_bit * dvfs(v, p).energy_scale;
}
inline double energy_pim_fj(uint64_t bit_ops, const EnergyParams& p) {
  return energy_pim_fj(bit_ops, p, p.v_nominal);
}

inline double energy_cam_fj(uint64_t searches, uint64_t bits_per_search, const EnergyParams& p,
                            double v) {
  return static_cast<double>(searches) * static_cast<double>(bits_per_search) *
         p.e_cam_fj_per_search_bit * dvfs(v, p).energy_scale;
}
inline double energy_cam_fj(uint64_t searches, uint64_t bits_per_search, const EnergyParams& p) {
  return energy_cam_fj(searches, bits_per_search, p, p.v_nominal);
}

// Calibrated pass time for a precision mode, in cycles: the 1-bit calibration
// constant scaled by the documented pass-cycle formula.
inline double calibrated_pass_cycles(const PrecisionMode& mode, const EnergyParams& p) {
  return p.cycles_per_mac_pass * static_cast<double>(pass_cycles(mode.bits)) /
         static_cast<double>(pass_cycles(1));
}

// Sustained throughput: lanes * 2 ops per pass over the calibrated pass time.
inline double throughput_tops(const PrecisionMode& mode, const EnergyParams& p, double v) {
  double f = dvfs(v, p).f_mhz;
  return static_cast<double>(mode.lanes()) * 2.0 * f / calibrated_pass_cycles(mode, p) * 1e-6;
}
inline double throughput_tops(const PrecisionMode& mode, const EnergyParams& p) {
  return throughput_tops(mode, p, p.v_nominal);
}

// Bit-level operation tallies fed by the MAC engine and the LUT machinery.
struct OpTally {
  uint64_t pim_bit_ops = 0;
  uint64_t cam_searches = 0;
  uint64_t cam_search_bits = 0;
  uint64_t mac_ops = 0;  // multiply + add counted separately
  double cycles = 0;

  OpTally& operator+=(const OpTally& o) {
    pim_bit_ops += o.pim_bit_ops;
    cam_searches += o.cam_searches;
    cam_search_bits += o.cam_search_bits;
    mac_ops += o.mac_ops;
    cycles += o.cycles;
    return *this;
  }
};

struct PerfReport {
  double tops = 0;
  double tops_per_watt = 0;
  double tops_per_mm2 = 0;
  double energy_pj = 0;
  double latency_us = 0;
  double voltage = 0;
  double f_mhz = 0;
  OpTally op_counts;

  double power_w() const { return tops_per_watt > 0 ? tops / tops_per_watt : 0.0; }
};

// Aggregates a workload tally into the headline metrics. energy_pj follows
// the per-bit accounting constants; tops_per_watt follows the calibrated
// sustained MAC-path energy. Both scale quadratically with voltage.
inline PerfReport report(const OpTally& tally, const EnergyParams& p, double v) {
  p.validate();
  DvfsPoint d = dvfs(v, p);
  PerfReport r;
  r.voltage = v;
  r.f_mhz = d.f_mhz;
  r.op_counts = tally;
  r.energy_pj = (energy_pim_fj(tally.pim_bit_ops, p, v) +
                 static_cast<double>(tally.cam_search_bits) * p.e_cam_fj_per_search_bit *
                     d.energy_scale) /
                1000.0;
  if (tally.cycles > 0) {
    r.latency_us = tally.cycles / d.f_mhz;
    r.tops = static_cast<double>(tally.mac_ops) / (r.latency_us * 1e6);
  }
  if (tally.pim_bit_ops > 0)
    r.tops_per_watt = static_cast<double>(tally.mac_ops) * 1e3 /
                      (static_cast<double>(tally.pim_bit_ops) * p.e_mac_fj_per_bit_op *
                       d.energy_scale);
  r.tops_per_mm2 = r.tops / p.macro_area_mm2;
  return r;
}
inline PerfReport report(const OpTally& tally, const EnergyParams& p) {
  return report(tally, p, p.v_nominal);
}

// Report for one sustained full-array pass at the given precision.
inline PerfReport sustained_report(const PrecisionMode& mode, const EnergyParams& p, double v) {
  OpTally t;
  t.pim_bit_ops = 2 * 4096;
  t.mac_ops = 2 * mode.lanes();
  t.cycles = calibrated_pass_cycles(mode, p);
  return report(t, p, v);
}
inline PerfReport sustained_report(const PrecisionMode& mode, const EnergyParams& p) {
  return sustained_report(mode, p, p.v_nominal);
}

}  // namespace misim
