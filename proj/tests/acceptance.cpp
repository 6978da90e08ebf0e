// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <memory>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

#include "json.hpp"
#include "qnnflow/cli.hpp"
#include "qnnflow/costmodel.hpp"
#include "qnnflow/errors.hpp"
#include "qnnflow/explorer.hpp"
#include "qnnflow/perfmodel.hpp"
#include "qnnflow/report.hpp"
#include "qnnflow/simulator.hpp"
#include "support.hpp"

using namespace qnnflow;
using namespace qnnflow::testing;

namespace {

const std::string kSamples = QNNFLOW_SAMPLES;

struct Outcome {
  bool pass = true;
  std::string detail;
};

// Records the first failure; later checks still run so the detail names it.
struct Checker {
  Outcome o;
  void expect(bool cond, const std::string& what) {
    if (!cond && o.pass) {
      o.pass = false;
      o.detail = what;
    }
  }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

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

std::string fmt(double v) {
  std::ostringstream s;
  s << v;
  return s.str();
}

// 1 ---------------------------------------------------------------------------
Outcome goldens() {
  const auto t0 = Clock::now();
  Checker c;
  DeviceModel dev;
  dev.lut_budget = 1;
  dev.bram_budget = 1;
  const auto swu = bram_swu(conv(32, 64, 3, 1, 0, 64, 2, 1), 1, dev);
  const auto wm = bram_weights(conv(8, 64, 3, 1, 1, 128, 2, 2), {16, 32}, dev, Eq2Mode::faithful);
  const auto luts = lut_cost(conv(8, 8, 3, 1, 1, 8, 2, 1), {4, 8}, 1, CostTable{});
  const double secs = seconds_since(t0);
  c.expect(swu == 16, "bram_swu " + std::to_string(swu) + " != 16");
  c.expect(wm.blocks == 352, "bram_weights " + std::to_string(wm.blocks) + " != 352");
  c.expect(wm.wm_depth == 144, "WM " + std::to_string(wm.wm_depth) + " != 144");
  c.expect(luts == 128, "lut_cost " + std::to_string(luts) + " != 128");
  c.expect(secs < 1.0, "took " + fmt(secs) + " s");
  if (c.o.pass) c.o.detail = "swu=16 weights=352 WM=144 luts=128";
  return c.o;
}

// 2 ---------------------------------------------------------------------------
Outcome simulator_vs_oracle() {
  const auto t0 = Clock::now();
  Checker c;
  std::mt19937_64 rng(20240601);
  const std::vector<int> widths{1, 2, 4, 8};
  int cases = 0;
  while (cases < 256) {
    std::uniform_int_distribution<int> small(1, 8);
    const int k = pick(rng, {1, 3});
    const int s = pick(rng, {1, 2});
    const int pad = k == 3 ? pick(rng, {0, 1}) : 0;
    const int n = std::uniform_int_distribution<int>(std::max(1, k - 2 * pad), 16)(rng);
    if ((n + 2 * pad - k) % s != 0) continue;
    const int a = widths[static_cast<std::size_t>(cases) % 4];
    const int w = widths[static_cast<std::size_t>(cases / 4) % 4];
    const auto layer = conv(n, small(rng), k, s, pad, small(rng), a, w);
    const LayerFolding fold{pick(rng, divisors(layer.c_out)), pick(rng, divisors(layer.c))};
    const int m = std::uniform_int_distribution<int>(1, 3)(rng);
    const auto images = static_cast<std::uint32_t>(m * std::uniform_int_distribution<int>(1, 2)(rng));

    LayerParams params;
    if (std::uniform_int_distribution<int>(0, 4)(rng) == 0) {
      params = {random_weights(rng, layer), {}};  // raw accumulators
    } else {
      params = random_params(rng, layer, pick(rng, {1, 2, 3, 4}));
    }
    const auto input = random_activations(rng, images, static_cast<std::uint32_t>(n),
                                          static_cast<std::uint32_t>(layer.c), a);
    const auto sim = simulate_layer(input, layer, fold, m, params);
    const auto ref = reference_conv_oracle(input, layer, params);
    c.expect(sim.output == ref, "mismatch at case " + std::to_string(cases) + " (n=" + std::to_string(n) +
                                    " c=" + std::to_string(layer.c) + " c'=" + std::to_string(layer.c_out) +
                                    " k=" + std::to_string(k) + " s=" + std::to_string(s) + ")");
    ++cases;
  }
  const double secs = seconds_since(t0);
  c.expect(secs < 60.0, "took " + fmt(secs) + " s");
  if (c.o.pass) c.o.detail = std::to_string(cases) + " random layers bit-exact in " + fmt(secs) + " s";
  return c.o;
}

// 3 ---------------------------------------------------------------------------
Outcome analytic_vs_simulated() {
  Checker c;
  std::mt19937_64 rng(3);
  int singles = 0;
  for (int i = 0; i < 20; ++i) {
    const int k = pick(rng, {1, 3});
    const auto layer = conv(8, pick(rng, {2, 4, 8}), k, 1, k / 2, pick(rng, {2, 4, 8}), 2, 2);
    const LayerFolding fold{pick(rng, divisors(layer.c_out)), pick(rng, divisors(layer.c))};
    const auto params = random_params(rng, layer, 2);
    const auto input = random_activations(rng, 3, 8, static_cast<std::uint32_t>(layer.c), 2);
    const auto r = simulate_layer(input, layer, fold, 1, params);
    const auto ii = layer_ii(layer, fold);
    c.expect(r.report.layers[0].busy_per_batch == static_cast<double>(ii),
             "single-layer busy " + fmt(r.report.layers[0].busy_per_batch) + " != II " + std::to_string(ii));
    c.expect(r.report.cycles_per_batch == static_cast<std::uint64_t>(ii),
             "single-layer cycles/batch " + std::to_string(r.report.cycles_per_batch) + " != II " +
                 std::to_string(ii));
    ++singles;
  }

  const std::string topo = kSamples + "/toy/pipeline.topo.json";
  const std::string folding = kSamples + "/toy/pipeline.folding.json";
  std::vector<const char*> argv{"qnnflow", "validate", "--topology", topo.c_str(), "--folding", folding.c_str(),
                                "--format", "machine"};
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  c.expect(code == kExitOk, "validate exited " + std::to_string(code) + ": " + err.str());
  double gap = -1.0;
  if (code == kExitOk) {
    const auto rep = nlohmann::json::parse(out.str()).get<ValidateReport>();
    gap = rep.gap_percent;
    c.expect(rep.layers.size() == 4, "pipeline is not 4 compute layers");
    c.expect(gap >= 0.0 && gap <= 15.0, "pipeline gap " + fmt(gap) + "%");
  }
  if (c.o.pass) {
    c.o.detail = std::to_string(singles) + " single layers exact; 4-layer pipeline gap " + fmt(gap) + "%";
  }
  return c.o;
}

// 4 ---------------------------------------------------------------------------
Outcome thresholds() {
  Checker c;
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> log_scale(-5.0, 1.0);
  std::uniform_real_distribution<double> bias_dist(-3.0, 3.0);
  std::uniform_int_distribution<int> bits(1, 8);
  for (int i = 0; i < 1000; ++i) {
    const double scale = std::pow(10.0, log_scale(rng));
    const double bias = bias_dist(rng);
    const QuantSpec spec(bits(rng));
    const auto set = build_thresholds(spec, scale, bias);
    for (std::int64_t v = -500; v <= 500; ++v) {
      const auto q = quantize_activation(scale * static_cast<double>(v) + bias, spec);
      if (set.apply(v) != q) {
        c.expect(false, "scale=" + fmt(scale) + " bias=" + fmt(bias) + " a=" + std::to_string(spec.a_bits) +
                            " v=" + std::to_string(v));
        break;
      }
    }
  }
  if (c.o.pass) c.o.detail = "1000 affine maps x 1001 accumulators";
  return c.o;
}

// 5-7 -------------------------------------------------------------------------
struct ComputeBound {
  NetworkTopology topo = load_topology(kSamples + "/cnv.topo.json");
  DeviceModel dev = load_device(kSamples + "/compute-bound.device.json");
  CostTable table;
  ExploreGoal goal;

  double fps(const NetworkTopology& t) const { return explore(t, dev, table, goal).perf.fps; }
  double fps(int a, int w) const { return fps(with_precision(topo, a, w)); }
};

Outcome activation_scaling(const ComputeBound& cb) {
  Checker c;
  const std::vector<int> bits{1, 2, 4, 8};
  for (int w : bits) {
    double prev = cb.fps(1, w);
    for (int a : {2, 4, 8}) {
      const double f = cb.fps(a, w);
      c.expect(f <= prev, "fps rises from A=" + std::to_string(a / 2) + " to A=" + std::to_string(a) +
                              " at W=" + std::to_string(w));
      prev = f;
    }
  }
  const double ratio = cb.fps(8, 8) / cb.fps(1, 1);
  c.expect(ratio <= 0.15, "fps(8,8)/fps(1,1) = " + fmt(ratio));
  if (c.o.pass) c.o.detail = "fps(A8W8)/fps(A1W1) = " + fmt(ratio) + ", non-increasing in A";
  return c.o;
}

Outcome weight_step(const ComputeBound& cb) {
  Checker c;
  std::string ratios;
  for (int a : {1, 2, 4, 8}) {
    const double r = cb.fps(a, 2) / cb.fps(a, 1);
    c.expect(r >= 0.9 && r <= 1.0, "fps(W2)/fps(W1) = " + fmt(r) + " at A=" + std::to_string(a));
    ratios += (ratios.empty() ? "" : " ") + fmt(r);
  }
  if (c.o.pass) c.o.detail = "fps(W2)/fps(W1) at A=1,2,4,8: " + ratios;
  return c.o;
}

Outcome halved_workload(const ComputeBound& cb) {
  Checker c;
  const auto half = halve_workload(cb.topo);
  c.expect(total_macs(half) * 2 == total_macs(cb.topo), "halving did not halve MACs");
  const double ratio = cb.fps(half) / cb.fps(cb.topo);
  c.expect(ratio >= 1.6 && ratio <= 2.2, "halved/base fps = " + fmt(ratio));
  if (c.o.pass) c.o.detail = "halved/base fps = " + fmt(ratio);
  return c.o;
}

// 8 ---------------------------------------------------------------------------
NetworkTopology random_network(std::mt19937_64& rng) {
  for (;;) {
    const int n = pick(rng, {4, 6, 8, 12, 16});
    const InputSpec in{n, n, pick(rng, {1, 2, 3, 4, 6, 8}), pick(rng, {1, 2, 8})};
    std::vector<LayerSpec> layers;
    const int depth = std::uniform_int_distribution<int>(1, 4)(rng);
    const int a = pick(rng, {1, 2, 4});
    for (int i = 0; i < depth; ++i) {
      LayerSpec l;
      const int k = pick(rng, {1, 3});
      l.k = k;
      l.pad = k / 2;
      l.c_out = pick(rng, {2, 4, 6, 8, 12, 16});
      l.a_bits = i == 0 ? in.bits : a;
      l.w_bits = pick(rng, {1, 2, 4, 8});
      layers.push_back(l);
    }
    try {
      return chain_layers("random", in, layers);
    } catch (const Error&) {
    }
  }
}

Outcome explorer_soundness() {
  Checker c;
  std::mt19937_64 rng(8);
  const CostTable table;
  int runs = 0;
  std::size_t steps = 0;
  while (runs < 50) {
    const auto topo = random_network(rng);
    ExploreGoal goal;
    goal.utilization_cap = pick(rng, {5, 8, 10}) / 10.0;
    goal.max_m = std::uniform_int_distribution<int>(1, 4)(rng);
    goal.eq2_mode = runs % 2 ? Eq2Mode::corrected : Eq2Mode::faithful;
    goal.clock_hz = 200e6;

    DeviceModel dev;
    dev.name = "random";
    const auto minimal = estimate_network(topo, minimal_folding(topo), DeviceModel{}, table, goal.eq2_mode);
    std::uniform_real_distribution<double> headroom(1.0, 60.0);
    dev.lut_budget = static_cast<std::int64_t>(std::ceil(minimal.lut_total * headroom(rng) / goal.utilization_cap));
    dev.bram_budget = static_cast<std::int64_t>(std::ceil(minimal.bram_total * headroom(rng) / goal.utilization_cap));
    dev.lut_budget = std::max<std::int64_t>(dev.lut_budget, 1);
    dev.bram_budget = std::max<std::int64_t>(dev.bram_budget, 1);

    ExploreResult r;
    try {
      r = explore(topo, dev, table, goal);
    } catch (const DeviceUnsuitable&) {
      continue;  // rounding left the minimal design just over the cap
    }
    ++runs;
    steps += r.trace.size();
    const std::string tag = "run " + std::to_string(runs) + ": ";
    try {
      validate_folding(topo, r.folding);
    } catch (const FoldingError& e) {
      c.expect(false, tag + e.what());
    }
    const auto fresh = estimate_network(topo, r.folding, dev, table, goal.eq2_mode);
    c.expect(fresh == r.resources, tag + "reported resources differ from a fresh estimate");
    c.expect(fresh.bram_fraction <= goal.utilization_cap && fresh.lut_fraction <= goal.utilization_cap,
             tag + "utilization above cap");

    // Fixed point: none of the greedy's candidates (bottleneck steps, M + 1)
    // fits, and no feasible single move anywhere raises throughput.
    const auto b = r.perf.bottleneck_index;
    for (const auto& mv : enumerate_moves(topo, r.folding, goal.max_m)) {
      const auto est = estimate_network(topo, mv.folding, dev, table, goal.eq2_mode);
      if (!est.fits(goal.utilization_cap)) continue;
      const bool candidate = mv.kind == MoveKind::multi_vector || mv.compute_layer == b;
      c.expect(!candidate, tag + "feasible " + std::string(to_string(mv.kind)) + " move on compute layer " +
                               std::to_string(mv.compute_layer) + " remains");
      const double f = estimate_perf(topo, mv.folding, goal.clock_hz).fps;
      c.expect(f <= r.perf.fps, tag + "a feasible move raises fps");
    }
  }
  if (c.o.pass) c.o.detail = "50 random runs, " + std::to_string(steps) + " greedy steps, all fixed points";
  return c.o;
}

// 9 ---------------------------------------------------------------------------
Outcome pareto() {
  Checker c;
  std::mt19937_64 rng(9);
  for (int set = 0; set < 100; ++set) {
    const int n = std::uniform_int_distribution<int>(0, 1000)(rng);
    // Alternate between continuous values and a coarse grid with many ties.
    const bool coarse = set % 2 == 1;
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<int> grid(0, 25);
    std::vector<ParetoRecord> recs;
    for (int i = 0; i < n; ++i) {
      const double err = coarse ? grid(rng) / 25.0 : unit(rng);
      const double cost = coarse ? grid(rng) : 1000.0 * unit(rng);
      recs.push_back({"r" + std::to_string(i), err, cost});
    }
    const auto axis = set % 4 < 2 ? CostAxis::lower_is_better : CostAxis::higher_is_better;
    std::vector<std::string> expect;
    for (const auto& x : recs) {
      bool dominated = false;
      for (const auto& y : recs) {
        const bool cost_ok = axis == CostAxis::lower_is_better ? y.hw_cost <= x.hw_cost : y.hw_cost >= x.hw_cost;
        const bool strict = y.error_rate < x.error_rate || y.hw_cost != x.hw_cost;
        if (y.error_rate <= x.error_rate && cost_ok && strict) dominated = true;
      }
      if (!dominated) expect.push_back(x.label);
    }
    std::vector<std::string> got;
    for (const auto& x : pareto_front(recs, axis)) got.push_back(x.label);
    std::sort(expect.begin(), expect.end());
    std::sort(got.begin(), got.end());
    c.expect(got == expect, "set " + std::to_string(set) + " (n=" + std::to_string(n) + ") differs");
  }

  std::vector<ParetoRecord> table;
  for (const auto& a : load_accuracy(kSamples + "/dorefa-accuracy.json")) {
    if (a.group != "full" || !a.top5_err || !a.kfps_est) continue;
    table.push_back({a.label, *a.top5_err / 100.0, *a.kfps_est});
  }
  std::vector<std::string> front;
  for (const auto& x : pareto_front(table, CostAxis::higher_is_better)) front.push_back(x.label);
  std::sort(front.begin(), front.end());
  c.expect(table.size() == 5, "bundled table has " + std::to_string(table.size()) + " full-network rows");
  c.expect(front == std::vector<std::string>{"w1a1", "w1a2", "w4a4", "w8a8"}, "bundled front is wrong");
  if (c.o.pass) c.o.detail = "100 random sets match brute force; bundled front {w1a1,w1a2,w4a4,w8a8}, w2a2 excluded";
  return c.o;
}

// 10 --------------------------------------------------------------------------
Outcome clock_linearity() {
  Checker c;
  const CostTable table;
  int checked = 0;
  for (const auto& [topo_path, dev_path] :
       std::vector<std::pair<std::string, std::string>>{{"/cnv.topo.json", "/compute-bound.device.json"},
                                                        {"/toy/golden.topo.json", "/toy/large.device.json"},
                                                        {"/toy/pipeline.topo.json", "/toy/large.device.json"},
                                                        {"/dorefa-alexnet.topo.json", "/vu9p.device.json"}}) {
    const auto topo = load_topology(kSamples + topo_path);
    const auto dev = load_device(kSamples + dev_path);
    ExploreGoal goal;
    goal.eq2_mode = Eq2Mode::corrected;
    for (const auto& fold : {minimal_folding(topo), explore(topo, dev, table, goal).folding}) {
      const double f250 = estimate_perf(topo, fold, 250e6).fps;
      const double f109 = estimate_perf(topo, fold, 109e6).fps;
      const double expect = f250 * (109.0 / 250.0);
      c.expect(std::abs(f109 - expect) <= 4 * std::numeric_limits<double>::epsilon() * expect,
               topo_path + ": " + fmt(f109) + " vs " + fmt(expect));
      ++checked;
    }
  }
  if (c.o.pass) c.o.detail = std::to_string(checked) + " configurations scale by 109/250";
  return c.o;
}

}  // namespace

int main() {
  int failed = 0;
  auto report = [&](int id, const std::string& name, const std::function<Outcome()>& fn) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " " << id << " " << name << ": " << o.detail << std::endl;
  };

  report(1, "cost model goldens", goldens);
  report(2, "simulator matches oracle", simulator_vs_oracle);
  report(3, "simulated cycles match analytic II", analytic_vs_simulated);
  report(4, "threshold equivalence", thresholds);
  std::unique_ptr<ComputeBound> cb;
  try {
    cb = std::make_unique<ComputeBound>();
  } catch (const std::exception& e) {
    std::cerr << "compute-bound fixture: " << e.what() << "\n";
  }
  auto with_cb = [&](Outcome (*fn)(const ComputeBound&)) {
    return [&, fn] { return cb ? fn(*cb) : Outcome{false, "fixture failed to load"}; };
  };
  report(5, "activation bits scale throughput hyperbolically", with_cb(activation_scaling));
  report(6, "1 to 2 bit weights cost little throughput", with_cb(weight_step));
  report(7, "halved workload doubles throughput", with_cb(halved_workload));
  report(8, "explorer results are feasible fixed points", explorer_soundness);
  report(9, "pareto front", pareto);
  report(10, "throughput is linear in clock", clock_linearity);
  return failed == 0 ? 0 : 1;
}
