#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <sstream>

#include "misim/compressor.hpp"

using namespace misim;

namespace {

// exact table with the sum bit inverted on a single row
CompressorSpec one_row_fault() {
  CompressorSpec exact = CompressorSpec::exact();
  std::array<CompressorSpec::Out, 32> t{};
  for (unsigned idx = 0; idx < 32; ++idx) t[idx] = exact.at_index(idx);
  t[CompressorSpec::index(1, 1, 0, 0, 0)].sum ^= 1;
  return CompressorSpec(t, 0, "fault1");
}

}  // namespace

TEST_CASE("exact spec satisfies the arithmetic identity on all 32 rows") {
  CompressorSpec exact = CompressorSpec::exact();
  CHECK(exact.arithmetic_exact());
  CHECK(exact.cout_cin_independent());
  for (unsigned idx = 0; idx < 32; ++idx) {
    unsigned total = (idx & 1) + (idx >> 1 & 1) + (idx >> 2 & 1) + (idx >> 3 & 1) + (idx >> 4 & 1);
    CHECK(exact.value_at(idx) == total);
  }
}

TEST_CASE("exact spec matches the canonical decomposition on pinned rows") {
  CompressorSpec exact = CompressorSpec::exact();
  auto zero = compress42(exact, 0, 0, 0, 0, 0);
  CHECK(zero.sum == 0);
  CHECK(zero.carry == 0);
  CHECK(zero.cout == 0);

  auto four = compress42(exact, 1, 1, 1, 1, 0);
  CHECK(four.sum == 0);
  CHECK(four.carry == 1);
  CHECK(four.cout == 1);

  // cout = x3 when x1 xor x2; carry from the XOR chain
  auto three = compress42(exact, 1, 0, 1, 0, 1);
  CHECK(three.sum == 1);
  CHECK(three.carry == 0);
  CHECK(three.cout == 1);
}

TEST_CASE("shipped specs keep cout independent of cin") {
  CHECK(CompressorSpec::exact().cout_cin_independent());
  CHECK(CompressorSpec::compact().cout_cin_independent());
  CHECK(CompressorSpec::approx().cout_cin_independent());
}

TEST_CASE("approximate table properties") {
  CompressorSpec ap = CompressorSpec::approx();
  CHECK(!ap.arithmetic_exact());
  CompressorSpec exact = CompressorSpec::exact();
  int deviant = 0;
  for (unsigned idx = 0; idx < 32; ++idx) {
    // the sum bit stays exact everywhere
    CHECK(ap.at_index(idx).sum == exact.at_index(idx).sum);
    if (ap.value_at(idx) != exact.value_at(idx)) {
      ++deviant;
      // deviations only on the three-inputs-set rows with cin high, two low
      unsigned total = (idx & 1) + (idx >> 1 & 1) + (idx >> 2 & 1) + (idx >> 3 & 1);
      CHECK(total == 3);
      CHECK((idx >> 4 & 1) == 1);
      CHECK(exact.value_at(idx) - ap.value_at(idx) == 2);
    }
  }
  CHECK(deviant == 4);
}

TEST_CASE("popcount with the exact spec equals builtin popcount") {
  CompressorSpec exact = CompressorSpec::exact();
  CHECK(popcount(exact, Bits(64, 1)) == 64);
  CHECK(popcount(exact, Bits(64, 0)) == 0);
  CHECK(popcount(CompressorSpec::approx(), Bits(33, 0)) == 0);
  std::mt19937_64 rng(201);
  for (int t = 0; t < 20000; ++t) {
    uint64_t w = rng();
    CHECK(popcount(exact, bits_from_word(w, 64)) ==
          static_cast<uint64_t>(__builtin_popcountll(w)));
  }
}

TEST_CASE("popcount rejects over-wide input") {
  CHECK_THROWS_AS(popcount(CompressorSpec::exact(), Bits(65, 1)), WidthExceeded);
}

TEST_CASE("accumulate with the exact spec is integer addition") {
  CompressorSpec exact = CompressorSpec::exact();
  CHECK(accumulate(exact, {5, 3, 2, 7}, 8) == 17);
  CHECK(accumulate(exact, {0, 0, 0, 0}, 8) == 0);
  std::mt19937_64 rng(202);
  for (int t = 0; t < 5000; ++t) {
    std::vector<uint64_t> addends(16);
    uint64_t want = 0;
    for (auto& a : addends) {
      a = rng() & 0xFF;
      want += a;
    }
    CHECK(accumulate(exact, addends, 8) == want);
  }
}

TEST_CASE("accumulate rejects out-of-width addends") {
  CHECK_THROWS_AS(accumulate(CompressorSpec::exact(), {256}, 8), WidthExceeded);
}

TEST_CASE("reduction depth stays logarithmic") {
  for (size_t count : {4u, 8u, 16u, 64u, 256u, 1024u, 4096u}) {
    ReductionTree tree = ReductionTree::for_popcount(count);
    size_t lg = 0;
    while ((size_t(1) << lg) < count) ++lg;
    // log4 reduction plus the carry wave climbing the output columns
    CHECK(tree.layer_count() <= 2 * lg + 2);
  }
}

TEST_CASE("transistor counts add up per placement") {
  ReductionTree one = ReductionTree::for_popcount(4);
  REQUIRE(one.compressor_count() == 1);
  CHECK(transistor_count(one, CompressorSpec::approx()) == 22);
  CHECK(transistor_count(one, CompressorSpec::exact()) == 56);
  CHECK(transistor_count(one, CompressorSpec::compact()) == 40);

  ReductionTree three = ReductionTree::for_accumulate(3, 4);
  REQUIRE(three.compressor_count() == 3);
  REQUIRE(three.fa_count() == 0);
  CHECK(transistor_count(three, CompressorSpec::approx()) == 66);
}

TEST_CASE("spec file format round trips") {
  CompressorSpec ap = CompressorSpec::approx();
  std::stringstream ss;
  ap.to_stream(ss);
  CompressorSpec back = CompressorSpec::from_stream(ss, "roundtrip");
  CHECK(back.label() == "approx22");
  CHECK(back.transistor_count() == 22);
  for (unsigned idx = 0; idx < 32; ++idx) {
    CHECK(back.at_index(idx).sum == ap.at_index(idx).sum);
    CHECK(back.at_index(idx).carry == ap.at_index(idx).carry);
    CHECK(back.at_index(idx).cout == ap.at_index(idx).cout);
  }
}

TEST_CASE("incomplete or malformed spec files are rejected") {
  std::stringstream missing("0 0 0 0 0 : 0 0 0\n");
  CHECK_THROWS_AS(CompressorSpec::from_stream(missing, "missing"), IncompleteSpec);

  std::stringstream dup;
  CompressorSpec::exact().to_stream(dup);
  dup.seekp(0, std::ios::end);
  dup << "0 0 0 0 0 : 0 0 0\n";
  CHECK_THROWS_AS(CompressorSpec::from_stream(dup, "dup"), IncompleteSpec);

  std::stringstream junk("0 0 junk\n");
  CHECK_THROWS_AS(CompressorSpec::from_stream(junk, "junk"), IncompleteSpec);
}

TEST_CASE("error metrics: exact spec measures clean") {
  for (auto policy : {MetricsPolicy::exhaustive(), MetricsPolicy::sampled(2000, 7)}) {
    ErrorMetrics m = error_metrics(CompressorSpec::exact(), 4, 4, policy);
    CHECK(m.error_rate == 0.0);
    CHECK(m.nmed == 0.0);
    CHECK(m.mred == 0.0);
    CHECK(m.max_error == 0);
  }
}

TEST_CASE("error metrics: single-compressor fault measures exactly 1/32") {
  ErrorMetrics m = error_metrics(one_row_fault(), 1, 4, MetricsPolicy::exhaustive());
  CHECK(m.error_rate == Catch::Approx(1.0 / 32.0));
  // one row off by one: mean distance 1/32, normalized by the max output 5
  CHECK(m.nmed == Catch::Approx(1.0 / 32.0 / 5.0));
  // the faulted row holds value 2: relative distance 1/2
  CHECK(m.mred == Catch::Approx(0.5 / 32.0));
  CHECK(m.max_error == 1);
}

TEST_CASE("error metrics: deterministic under a fixed seed") {
  auto run = [] {
    return error_metrics(CompressorSpec::approx(), 8, 4, MetricsPolicy::sampled(100000, 42));
  };
  ErrorMetrics a = run();
  ErrorMetrics b = run();
  CHECK(a.error_rate == b.error_rate);
  CHECK(a.nmed == b.nmed);
  CHECK(a.mred == b.mred);
  CHECK(a.max_error == b.max_error);
}

TEST_CASE("error metrics: shipped approximate spec degrades gently at width 8") {
  ErrorMetrics m =
      error_metrics(CompressorSpec::approx(), 8, 4, MetricsPolicy::sampled(200000, 42));
  CHECK(m.error_rate > 0.0);
  CHECK(m.error_rate < 0.10);
  CHECK(m.nmed > 0.0);
  CHECK(m.max_error > 0);
}

TEST_CASE("error metrics: exhaustive beyond the bound is rejected") {
  CHECK_THROWS_AS(error_metrics(CompressorSpec::approx(), 8, 4, MetricsPolicy::exhaustive()),
                  SpaceTooLarge);
}

TEST_CASE("uniform placement applies the spec to every column") {
  TreeOptions uniform{1.0};
  std::mt19937_64 rng(203);
  // with the approximate table everywhere, errors appear at higher columns too
  ErrorMetrics hybrid =
      error_metrics(CompressorSpec::approx(), 8, 4, MetricsPolicy::sampled(50000, 9));
  ErrorMetrics all =
      error_metrics(CompressorSpec::approx(), 8, 4, MetricsPolicy::sampled(50000, 9), uniform);
  CHECK(all.error_rate > hybrid.error_rate);
}

TEST_CASE("metrics policy parsing") {
  MetricsPolicy p = MetricsPolicy::parse("sampled:1000000:42");
  CHECK(p.kind == MetricsPolicy::Kind::sampled);
  CHECK(p.samples == 1000000);
  CHECK(p.seed == 42);
  CHECK(p.to_string() == "sampled:1000000:42");
  CHECK(MetricsPolicy::parse("exhaustive").kind == MetricsPolicy::Kind::exhaustive);
  CHECK_THROWS_AS(MetricsPolicy::parse("sometimes"), IoError);
}
