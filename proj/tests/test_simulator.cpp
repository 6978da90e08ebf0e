#include <random>

#include "doctest.h"
#include "qnnflow/errors.hpp"
#include "qnnflow/perfmodel.hpp"
#include "qnnflow/simulator.hpp"
#include "support.hpp"

using namespace qnnflow;
using namespace qnnflow::testing;

namespace {

LayerSpec make_conv(int n, int c, int k, int s, int pad, int c_out, int a, int w) {
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

LayerSpec tmpl(LayerKind kind, int k, int s, int pad, int c_out, int a, int w) {
  LayerSpec l;
  l.kind = kind;
  l.k = k;
  l.s = s;
  l.pad = pad;
  l.c_out = c_out;
  l.a_bits = a;
  l.w_bits = w;
  return l;
}

QTensor zeros(std::uint32_t images, std::uint32_t n, std::uint32_t c, int bits) {
  std::vector<std::uint32_t> codes(std::size_t{images} * n * n * c, 0);
  return QTensor::pack({images, n, n, c}, bits, TensorEncoding::unsigned_level_code, codes);
}

NetworkTopology deep_toy() {
  return chain_layers("deep", {12, 12, 4, 2},
                      {tmpl(LayerKind::conv, 3, 1, 1, 8, 2, 2), tmpl(LayerKind::conv, 3, 1, 1, 8, 2, 1),
                       tmpl(LayerKind::max_pool, 2, 2, 0, 8, 2, 1), tmpl(LayerKind::conv, 3, 1, 0, 16, 2, 2),
                       tmpl(LayerKind::fully_connected, 0, 1, 0, 4, 2, 2)});
}

std::vector<LayerParams> params_for(std::mt19937_64& rng, const NetworkTopology& topo) {
  std::vector<LayerParams> out;
  const auto compute = compute_layer_indices(topo);
  for (std::size_t i = 0; i < compute.size(); ++i) {
    const auto& layer = topo.layers[compute[i]];
    if (i + 1 == compute.size()) {
      out.push_back({random_weights(rng, layer), {}});
    } else {
      out.push_back(random_params(rng, layer, output_bits(topo, compute[i])));
    }
  }
  return out;
}

}  // namespace

TEST_CASE("1x1 layer with +1 weights is an indicator") {
  const auto layer = make_conv(4, 1, 1, 1, 0, 1, 1, 1);
  std::mt19937_64 rng(3);
  const auto input = random_activations(rng, 1, 4, 1, 1);
  const auto plus_one = encode_weight(1.0, WeightEncoding(1)).code;
  const std::vector<std::uint32_t> w{plus_one};
  LayerParams params{QTensor::pack({1, 1, 1, 1}, 1, TensorEncoding::bipolar, w), {ThresholdSet{{1}}}};
  const auto r = simulate_layer(input, layer, {1, 1}, 1, params);
  CHECK(r.output.unpack() == input.unpack());
  CHECK(r.output == reference_conv_oracle(input, layer, params));
}

TEST_CASE("an all-zero image yields the count of non-positive thresholds") {
  const auto layer = make_conv(6, 4, 3, 1, 1, 4, 2, 2);
  std::mt19937_64 rng(5);
  auto params = random_params(rng, layer, 2);
  params.activation[0] = ThresholdSet{{-3, 0, 9}};
  params.activation[1] = ThresholdSet{{1, 2, 3}};
  params.activation[2] = ThresholdSet{{-9, -8, -7}};
  params.activation[3] = ThresholdSet{{0, 0, 0}};
  const auto r = simulate_layer(zeros(1, 6, 4, 2), layer, {2, 2}, 1, params);
  const std::vector<std::uint32_t> expect{2, 0, 3, 3};
  for (std::size_t i = 0; i < r.output.size(); ++i) CHECK(r.output.code(i) == expect[i % 4]);
}

TEST_CASE("two lanes share weights and match the oracle") {
  const auto layer = make_conv(8, 4, 3, 1, 1, 8, 2, 2);
  std::mt19937_64 rng(11);
  const auto params = random_params(rng, layer, 2);
  const auto one = random_activations(rng, 1, 8, 4, 2);
  auto codes = one.unpack();
  const auto doubled_codes = [&] {
    auto c = codes;
    c.insert(c.end(), codes.begin(), codes.end());
    return c;
  }();
  const auto twin = QTensor::pack({2, 8, 8, 4}, 2, TensorEncoding::unsigned_level_code, doubled_codes);
  const auto r = simulate_layer(twin, layer, {2, 2}, 2, params);
  CHECK(r.output == reference_conv_oracle(twin, layer, params));
  const auto out = r.output.unpack();
  const std::size_t half = out.size() / 2;
  CHECK(std::equal(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(half),
                   out.begin() + static_cast<std::ptrdiff_t>(half)));

  const auto mixed = random_activations(rng, 2, 8, 4, 2);
  CHECK(simulate_layer(mixed, layer, {2, 2}, 2, params).output == reference_conv_oracle(mixed, layer, params));
}

TEST_CASE("single-layer busy cycles equal the analytic II") {
  const auto layer = make_conv(8, 4, 3, 1, 1, 8, 2, 2);
  std::mt19937_64 rng(2);
  const auto params = random_params(rng, layer, 2);
  for (const LayerFolding f : {LayerFolding{1, 1}, LayerFolding{2, 4}, LayerFolding{8, 2}}) {
    const auto r = simulate_layer(random_activations(rng, 2, 8, 4, 2), layer, f, 1, params);
    REQUIRE(r.report.layers.size() == 1);
    CHECK(r.report.layers[0].busy_per_batch == doctest::Approx(double(layer_ii(layer, f))));
    CHECK(r.report.cycles_per_batch == std::uint64_t(layer_ii(layer, f)));
  }
}

TEST_CASE("weight fetches do not scale with M") {
  const auto layer = make_conv(7, 4, 3, 2, 1, 4, 2, 2);
  std::mt19937_64 rng(9);
  const auto params = random_params(rng, layer, 2);
  const auto input = random_activations(rng, 4, 7, 4, 2);
  const LayerFolding f{2, 2};
  const auto n_out = std::uint64_t(output_dim(layer).n_out);
  const std::uint64_t per_batch = n_out * n_out * 9 * 4 * 4 / 2;
  for (int m : {1, 2, 4}) {
    const auto r = simulate_layer(input, layer, f, m, params);
    const auto batches = std::uint64_t(4 / m);
    CHECK(r.report.layers[0].weight_row_fetches == per_batch * batches);
    CHECK(r.report.layers[0].weight_block_fetches * 2 == per_batch * batches);
  }
}

TEST_CASE("network output, steady state and latency") {
  const auto topo = deep_toy();
  std::mt19937_64 rng(21);
  const auto params = params_for(rng, topo);
  const auto input = random_activations(rng, 4, 12, 4, 2);
  const auto oracle = reference_network_oracle(topo, params, input);
  const FoldingConfig fold{1, {{2, 2}, {4, 4}, {4, 8}, {2, 16}}};
  const auto perf = estimate_perf(topo, fold, 1.0);

  SimOptions generous;
  generous.queue_capacity = 1 << 16;
  const auto g = simulate_network(topo, fold, params, input, generous);
  CHECK(g.output == oracle);
  CHECK(g.report.cycles_per_batch == std::uint64_t(perf.max_ii()));
  std::int64_t serial = 0;
  for (auto ii : perf.per_layer_ii) serial += ii;
  CHECK(g.report.first_output_cycle < std::uint64_t(serial));

  SimOptions tight;
  tight.queue_capacity = 1;
  const auto t = simulate_network(topo, fold, params, input, tight);
  CHECK(t.output == oracle);
  for (const auto& lr : t.report.layers) {
    for (const auto* st : {&lr.swu, &lr.mvtu}) CHECK(st->busy + st->stall() <= t.report.total_cycles);
    CHECK(lr.peak_swu_bits <= lr.swu_bits_bound);
  }
  CHECK(simulate_network(topo, fold, params, input, tight).report == t.report);

  const FoldingConfig wide{2, fold.per_layer};
  CHECK(simulate_network(topo, wide, params, input).output == oracle);
}

TEST_CASE("simulator rejects inconsistent inputs") {
  const auto topo = deep_toy();
  std::mt19937_64 rng(1);
  const auto params = params_for(rng, topo);
  const FoldingConfig fold{2, {{1, 1}, {1, 1}, {1, 1}, {1, 1}}};
  CHECK_THROWS_AS(simulate_network(topo, fold, params, random_activations(rng, 3, 12, 4, 2)), ValidationError);
  CHECK_THROWS(simulate_network(topo, fold, params, random_activations(rng, 2, 10, 4, 2)));
  auto short_params = params;
  short_params.pop_back();
  CHECK_THROWS(simulate_network(topo, fold, short_params, random_activations(rng, 2, 12, 4, 2)));
  auto missing = params;
  missing[0].activation.pop_back();
  CHECK_THROWS(simulate_network(topo, fold, missing, random_activations(rng, 2, 12, 4, 2)));
}

TEST_CASE("oracle with all-zero weights") {
  const auto layer = make_conv(5, 3, 3, 1, 1, 2, 4, 4);
  std::mt19937_64 rng(4);
  std::vector<std::uint32_t> w(std::size_t(weight_count(layer)), 0);
  LayerParams params{QTensor::pack({2, 3, 3, 3}, 4, TensorEncoding::twos_complement, w),
                     {ThresholdSet{{-1, 0, 4}}, ThresholdSet{{1, 2, 3}}}};
  const auto out = reference_conv_oracle(random_activations(rng, 1, 5, 3, 4), layer, params);
  for (std::size_t i = 0; i < out.size(); ++i) CHECK(out.code(i) == (i % 2 == 0 ? 2u : 0u));
}

TEST_CASE("synthetic workloads run end to end") {
  const auto topo = deep_toy();
  const auto a = synthetic_workload(topo, 2, 5);
  const auto b = synthetic_workload(topo, 2, 5);
  CHECK(a.input == b.input);
  const FoldingConfig fold{1, {{1, 1}, {1, 1}, {1, 1}, {1, 1}}};
  CHECK(simulate_network(topo, fold, a.params, a.input).output ==
        reference_network_oracle(topo, a.params, a.input));
}

TEST_CASE("activation files") {
  const auto topo = deep_toy();
  std::mt19937_64 rng(8);
  const auto params = params_for(rng, topo);
  std::vector<std::vector<ChannelActivation>> acts;
  for (const auto& p : params) acts.push_back(p.activation);
  CHECK(parse_activations(serialize_activations(acts, topo), topo) == acts);

  const auto affine = parse_activations(R"([{"layer": 0, "channel": 0, "scale": 0.01, "bias": 0.1, "out_bits": 2},
    {"layer": 0, "channel": 1, "scale": 0.01, "bias": 0.1, "out_bits": 2},
    {"layer": 0, "channel": 2, "scale": 0.01, "bias": 0.1, "out_bits": 2},
    {"layer": 0, "channel": 3, "scale": 0.01, "bias": 0.1, "out_bits": 2},
    {"layer": 0, "channel": 4, "scale": 0.01, "bias": 0.1, "out_bits": 2},
    {"layer": 0, "channel": 5, "scale": 0.01, "bias": 0.1, "out_bits": 2},
    {"layer": 0, "channel": 6, "scale": 0.01, "bias": 0.1, "out_bits": 2},
    {"layer": 0, "channel": 7, "scale": 0.01, "bias": 0.1, "out_bits": 2}])",
                                        topo);
  REQUIRE(affine[0].size() == 8);
  CHECK(std::holds_alternative<ThresholdSet>(affine[0][0]));
  CHECK(affine[1].empty());
  const auto literal = parse_activations(R"([{"layer": 3, "channel": 0, "scale": 1, "bias": 0, "out_bits": 2}])",
                                         chain_layers("one", {4, 4, 1, 2}, {tmpl(LayerKind::max_pool, 2, 2, 0, 1, 2, 1),
                                                                           tmpl(LayerKind::conv, 1, 1, 0, 1, 2, 1),
                                                                           tmpl(LayerKind::conv, 1, 1, 0, 1, 2, 1),
                                                                           tmpl(LayerKind::conv, 1, 1, 0, 1, 2, 1)}),
                                         ReluMode::paper_literal);
  CHECK(std::holds_alternative<AffineActivation>(literal[2][0]));

  CHECK_THROWS_AS(parse_activations(R"([{"layer": 2, "channel": 0, "thresholds": [1, 2, 3]}])", topo),
                  ValidationError);  // pool layer
  CHECK_THROWS_AS(parse_activations(R"([{"layer": 0, "channel": 0, "thresholds": [1, 2]}])", topo),
                  ValidationError);
  CHECK_THROWS_AS(parse_activations(R"([{"layer": 0, "channel": 0, "thresholds": [1, 2, 3]}])", topo),
                  ValidationError);  // partial layer
  CHECK_THROWS_AS(parse_activations(R"({"layer": 0})", topo), ParseError);
}
