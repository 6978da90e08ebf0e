#include "doctest.h"
#include "qnnflow/costmodel.hpp"
#include "qnnflow/errors.hpp"

using namespace qnnflow;

namespace {

LayerSpec conv(int n, int c, int k, int s, int pad, int c_out, int a, int w) {
  LayerSpec l;
  l.n = n;
  l.c = c;
  l.k = k;
  l.s = s;
  l.pad = pad;
  l.c_out = c_out;
  l.a_bits = a;
  l.w_bits = w;
  return l;
}

DeviceModel bram_device() {
  DeviceModel d;
  d.lut_budget = 1000000;
  d.bram_budget = 1000;
  return d;
}

}  // namespace

TEST_CASE("bram_swu") {
  const auto dev = bram_device();
  const auto layer = conv(32, 64, 3, 1, 0, 64, 2, 1);
  CHECK(bram_swu(layer, 1, dev) == 16);
  CHECK(bram_swu(conv(1, 1, 1, 1, 0, 1, 1, 1), 1, dev) == 2);
  CHECK(bram_swu(layer, 4, dev) == 64);
  // Padding widens the buffered rows.
  CHECK(bram_swu(conv(511, 1, 3, 1, 1, 1, 1, 1), 1, dev) == 4 * 2);
}

TEST_CASE("bram_weights") {
  const auto dev = bram_device();
  const auto wm = bram_weights(conv(8, 64, 3, 1, 1, 128, 2, 2), {16, 32}, dev);
  CHECK(wm.wm_depth == 144);
  CHECK(wm.blocks == 352);
  const auto one = bram_weights(conv(1, 1, 1, 1, 0, 1, 1, 1), {1, 1}, dev);
  CHECK(one.wm_depth == 1);
  CHECK(one.blocks == 1);
  const auto small = bram_weights(conv(8, 8, 3, 1, 1, 16, 2, 2), {2, 8}, dev);
  CHECK(small.wm_depth == 72);
  CHECK(small.blocks == 12);
  // Corrected depth term: ceil(144 / 512) = 1 per PE, times ceil(64 / 36) = 2.
  CHECK(bram_weights(conv(8, 64, 3, 1, 1, 128, 2, 2), {16, 32}, dev, Eq2Mode::corrected).blocks == 32);
}

TEST_CASE("bram_weights monotone in K, C, C' and W at fixed folding") {
  const auto dev = bram_device();
  const LayerFolding f{4, 4};
  for (int k : {1, 3, 5}) {
    for (int c : {4, 8, 16, 64}) {
      for (int co : {4, 8, 32, 128}) {
        for (int w : {1, 2, 4, 8}) {
          const auto base = bram_weights(conv(16, c, k, 1, k / 2, co, 2, w), f, dev).blocks;
          CHECK(bram_weights(conv(16, c, k + 2, 1, k / 2 + 1, co, 2, w), f, dev).blocks >= base);
          CHECK(bram_weights(conv(16, 2 * c, k, 1, k / 2, co, 2, w), f, dev).blocks >= base);
          CHECK(bram_weights(conv(16, c, k, 1, k / 2, 2 * co, 2, w), f, dev).blocks >= base);
          if (w < 8) CHECK(bram_weights(conv(16, c, k, 1, k / 2, co, 2, 2 * w), f, dev).blocks >= base);
        }
      }
    }
  }
}

TEST_CASE("bram_weights monotone in PE with WM held fixed") {
  const auto dev = bram_device();
  // Doubling C' alongside PE keeps WM constant.
  for (int pe = 1; pe <= 32; pe *= 2) {
    const auto a = bram_weights(conv(16, 16, 3, 1, 1, 8 * pe, 2, 1), {pe, 4}, dev);
    const auto b = bram_weights(conv(16, 16, 3, 1, 1, 16 * pe, 2, 1), {2 * pe, 4}, dev);
    CHECK(a.wm_depth == b.wm_depth);
    CHECK(b.blocks >= a.blocks);
  }
}

TEST_CASE("lut_cost") {
  const CostTable table;
  const auto layer = conv(8, 8, 3, 1, 1, 8, 2, 1);
  CHECK(lut_cost(layer, {4, 8}, 1, table) == 128);
  CHECK(lut_cost(conv(1, 1, 1, 1, 0, 1, 1, 1), {1, 1}, 1, table) == 2);
  for (int m = 1; m <= 4; ++m) CHECK(lut_cost(layer, {2, 4}, 2 * m, table) == 2 * lut_cost(layer, {2, 4}, m, table));

  CostTable custom;
  custom.entries[{2, 1}] = 1.5;
  CHECK(lut_cost(layer, {4, 8}, 1, custom) == 48);
  custom.use_default_rule = false;
  CHECK_THROWS_AS(custom.luts_per_mac(4, 4), ValidationError);
}

TEST_CASE("folding divisibility") {
  NetworkTopology t;
  t.name = "t";
  t.input = {8, 8, 8, 2};
  t.layers = {conv(8, 8, 3, 1, 1, 16, 2, 1)};
  CHECK_NOTHROW(validate_folding(t, FoldingConfig{1, {{4, 2}}}));
  CHECK_THROWS_AS(validate_folding(t, FoldingConfig{1, {{3, 2}}}), FoldingError);
  CHECK_THROWS_AS(validate_folding(t, FoldingConfig{1, {{4, 3}}}), FoldingError);
  CHECK_THROWS_AS(validate_folding(t, FoldingConfig{0, {{4, 2}}}), FoldingError);
  CHECK_THROWS_AS(validate_folding(t, FoldingConfig{1, {}}), FoldingError);
}

TEST_CASE("estimate_network totals") {
  const auto dev = bram_device();
  const CostTable table;
  NetworkTopology one;
  one.name = "one";
  one.input = {32, 32, 64, 2};
  one.layers = {conv(32, 64, 3, 1, 0, 64, 2, 1)};
  const auto r1 = estimate_network(one, FoldingConfig{1, {{1, 1}}}, dev, table);
  REQUIRE(r1.per_layer.size() == 1);
  CHECK(r1.per_layer[0].bram_swu == 16);
  CHECK(r1.bram_total == r1.per_layer[0].bram());
  CHECK(r1.lut_total == r1.per_layer[0].luts);

  NetworkTopology twin = one;
  twin.input = {32, 32, 64, 2};
  twin.layers = {conv(32, 64, 3, 1, 1, 64, 2, 1), conv(32, 64, 3, 1, 1, 64, 2, 1)};
  NetworkTopology half = twin;
  half.layers.pop_back();
  const auto rt = estimate_network(twin, FoldingConfig{1, {{2, 2}, {2, 2}}}, dev, table);
  const auto rh = estimate_network(half, FoldingConfig{1, {{2, 2}}}, dev, table);
  CHECK(rt.bram_total == 2 * rh.bram_total);
  CHECK(rt.lut_total == 2 * rh.lut_total);
  CHECK(rt.bram_fraction == doctest::Approx(2 * rh.bram_fraction));
}

TEST_CASE("sample topology at minimal folding on the VU9P sample") {
  const auto topo = load_topology(QNNFLOW_SAMPLES "/dorefa-alexnet.topo.json");
  const auto dev = load_device(QNNFLOW_SAMPLES "/vu9p.device.json");
  const auto table = load_cost_table(QNNFLOW_SAMPLES "/default.cost.json");
  FoldingConfig fold{1, std::vector<LayerFolding>(8, LayerFolding{1, 1})};
  const auto r = estimate_network(topo, fold, dev, table, Eq2Mode::corrected);
  CHECK(r.bram_fraction > 0.0);
  CHECK(r.bram_fraction < 1.0);
  CHECK(r.lut_fraction > 0.0);
  CHECK(r.lut_fraction < 1.0);
  // The printed depth term over-provisions by 36x at narrow words.
  const auto f = estimate_network(topo, fold, dev, table, Eq2Mode::faithful);
  CHECK(f.bram_fraction > 1.0);
  CHECK(f.violations(0.8) == std::vector<std::string>{"BRAM"});
}

TEST_CASE("file formats round trip") {
  DeviceModel d;
  d.name = "dev";
  d.lut_budget = 123;
  d.bram_budget = 45;
  d.dsp_budget = 6;
  d.mem_bandwidth = 12.5e9;
  CHECK(parse_device(serialize_device(d)) == d);
  CostTable t;
  t.entries[{1, 1}] = 2.5;
  t.entries[{8, 8}] = 70;
  t.use_default_rule = false;
  CHECK(parse_cost_table(serialize_cost_table(t)) == t);
  const FoldingConfig f{3, {{1, 2}, {4, 8}}};
  CHECK(parse_folding(serialize_folding(f)) == f);
  CHECK_THROWS_AS(parse_device(R"({"lut_budget": 1, "bram_budget": 1, "dsp_budget": 1, "mem_bandwidth_gbps": 1, "x": 1})"),
                  ParseError);
  CHECK_THROWS_AS(parse_device(R"({"lut_budget": 0, "bram_budget": 1, "dsp_budget": 1, "mem_bandwidth_gbps": 1})"),
                  ValidationError);
}
