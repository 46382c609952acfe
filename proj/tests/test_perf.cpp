#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "misim/perf.hpp"

using namespace misim;

namespace {

double round_3sf(double v) {
  if (v == 0) return 0;
  double mag = std::pow(10.0, std::floor(std::log10(std::fabs(v))) - 2);
  return std::round(v / mag) * mag;
}

}  // namespace

TEST_CASE("pim energy is linear in bit operations") {
  EnergyParams p;
  CHECK(energy_pim_fj(0, p) == 0.0);
  CHECK(energy_pim_fj(1, p) == Catch::Approx(17.65));
  CHECK(energy_pim_fj(4096, p) == Catch::Approx(72294.4));  // 72.29 pJ per full pass
  CHECK(energy_pim_fj(2 * 4096, p) == Catch::Approx(2 * 72294.4));
}

TEST_CASE("cam energy per search bit") {
  EnergyParams p;
  CHECK(energy_cam_fj(1, 64, p) == Catch::Approx(35.2));
  CHECK(energy_cam_fj(0, 64, p) == 0.0);
  CHECK(energy_cam_fj(16, 4, p) == Catch::Approx(35.2));  // 16-row lookup, 4-bit key
}

TEST_CASE("dvfs points") {
  EnergyParams p;
  DvfsPoint nominal = dvfs(0.9, p);
  CHECK(nominal.f_mhz == Catch::Approx(350.0));
  CHECK(nominal.energy_scale == Catch::Approx(1.0));

  DvfsPoint high = dvfs(1.2, p);
  CHECK(high.f_mhz == Catch::Approx(466.6667).epsilon(1e-4));
  CHECK(high.energy_scale == Catch::Approx(1.7778).epsilon(1e-3));

  // quadratic law: the energy-halving point 0.9/sqrt(2) sits below the
  // supported range, so probe the law at in-range voltages instead
  CHECK(dvfs(0.8, p).energy_scale == Catch::Approx((0.8 / 0.9) * (0.8 / 0.9)));
  CHECK_THROWS_AS(dvfs(0.9 / std::sqrt(2.0), p), VoltageOutOfRange);
  CHECK_THROWS_AS(dvfs(1.3, p), VoltageOutOfRange);
  CHECK(dvfs(0.8, p).energy_scale < 1.0);
  CHECK(dvfs(1.0, p).energy_scale > 1.0);
}

TEST_CASE("dvfs monotonicity") {
  EnergyParams p;
  double prev_f = 0, prev_e = 0;
  for (int k = 16; k <= 24; ++k) {
    double v = k / 20.0;
    DvfsPoint d = dvfs(v, p);
    CHECK(d.f_mhz > prev_f);
    CHECK(d.energy_scale > prev_e);
    prev_f = d.f_mhz;
    prev_e = d.energy_scale;
  }
}

TEST_CASE("throughput closes the headline at defaults") {
  EnergyParams p;
  PrecisionMode xac_mode(1, Signedness::bipolar);
  double tops = throughput_tops(xac_mode, p);
  CHECK(round_3sf(tops) == Catch::Approx(1.93));
}

TEST_CASE("throughput is linear in frequency") {
  EnergyParams p;
  EnergyParams half = p;
  half.f_nominal_mhz = p.f_nominal_mhz / 2;
  PrecisionMode m(8, Signedness::twos_complement);
  CHECK(throughput_tops(m, half) == Catch::Approx(throughput_tops(m, p) / 2));
}

TEST_CASE("throughput ratio between modes follows lanes and pass cycles") {
  EnergyParams p;
  PrecisionMode m8(8, Signedness::twos_complement), m4(4, Signedness::twos_complement);
  double ratio = throughput_tops(m8, p) / throughput_tops(m4, p);
  double lanes_ratio = 64.0 / 256.0;
  double cycle_ratio = static_cast<double>(pass_cycles(4)) / pass_cycles(8);
  CHECK(ratio == Catch::Approx(lanes_ratio * cycle_ratio));
}

TEST_CASE("sustained report reproduces all three headlines to 3 significant figures") {
  EnergyParams p;
  PerfReport r = sustained_report(PrecisionMode(1, Signedness::bipolar), p);
  CHECK(round_3sf(r.tops) == Catch::Approx(1.93));
  CHECK(round_3sf(r.tops_per_watt) == Catch::Approx(364.0));
  CHECK(round_3sf(r.tops_per_mm2) == Catch::Approx(4.58));
}

TEST_CASE("report consistency: tops = tops_per_watt * power") {
  EnergyParams p;
  for (unsigned bits : {1u, 4u, 8u, 32u}) {
    PerfReport r = sustained_report(PrecisionMode(bits, Signedness::twos_complement), p);
    CHECK(r.tops == Catch::Approx(r.tops_per_watt * r.power_w()));
    CHECK(r.tops_per_mm2 == Catch::Approx(r.tops / p.macro_area_mm2));
  }
}

TEST_CASE("zero workload reports zero") {
  EnergyParams p;
  PerfReport r = report(OpTally{}, p);
  CHECK(r.tops == 0.0);
  CHECK(r.energy_pj == 0.0);
  CHECK(r.latency_us == 0.0);
  CHECK(r.tops_per_watt == 0.0);
}

TEST_CASE("workload report aggregates both energy paths") {
  EnergyParams p;
  OpTally t;
  t.pim_bit_ops = 4096;
  t.cam_searches = 16;
  t.cam_search_bits = 64;
  t.mac_ops = 8192;
  t.cycles = 2.0;
  PerfReport r = report(t, p);
  CHECK(r.energy_pj == Catch::Approx((4096 * 17.65 + 64 * 0.55) / 1000.0));
  CHECK(r.latency_us == Catch::Approx(2.0 / 350.0));
  CHECK(r.f_mhz == Catch::Approx(350.0));
}

TEST_CASE("voltage scaling applies to reports") {
  EnergyParams p;
  OpTally t;
  t.pim_bit_ops = 4096;
  t.mac_ops = 8192;
  t.cycles = 1.486;
  PerfReport lo = report(t, p, 0.8);
  PerfReport hi = report(t, p, 1.2);
  CHECK(lo.f_mhz < hi.f_mhz);
  CHECK(lo.energy_pj < hi.energy_pj);
  CHECK(lo.tops_per_watt > hi.tops_per_watt);  // quadratic energy beats linear speed
}

TEST_CASE("parameters load from key-value overrides") {
  EnergyParams p;
  p.apply({{"e_pim_fj_per_bit", "20.0"}, {"f_nominal_mhz", "400"}});
  CHECK(p.e_pim_fj_per_bit == 20.0);
  CHECK(p.f_nominal_mhz == 400.0);
  EnergyParams bad;
  CHECK_THROWS_AS(bad.apply({{"v_nominal", "-1"}}), Error);
}

TEST_CASE("parameters must stay positive") {
  EnergyParams p;
  p.macro_area_mm2 = 0;
  CHECK_THROWS_AS(p.validate(), Error);
}
