#include "qnnflow/perfmodel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "qnnflow/errors.hpp"

namespace qnnflow {

std::int64_t layer_ii(const LayerSpec& layer, const LayerFolding& fold) {
  if (!layer.has_weights()) return 0;
  const std::int64_t n_out = output_dim(layer).n_out;
  const std::int64_t synapse_fold = std::int64_t{layer.k} * layer.k * layer.c / fold.simd;
  const std::int64_t neuron_fold = layer.c_out / fold.pe;
  return n_out * n_out * synapse_fold * neuron_fold;
}

PerfEstimate estimate_perf(const NetworkTopology& topo, const FoldingConfig& fold, double clock_hz) {
  if (!(clock_hz > 0.0)) throw ValidationError("clock frequency must be positive");
  validate_folding(topo, fold);
  const auto compute = compute_layer_indices(topo);
  if (compute.empty()) throw ValidationError("topology has no compute layers");

  PerfEstimate perf;
  perf.m = fold.m;
  perf.clock_hz = clock_hz;
  for (std::size_t i = 0; i < compute.size(); ++i) {
    perf.per_layer_ii.push_back(layer_ii(topo.layers[compute[i]], fold.per_layer[i]));
  }
  // max_element returns the first maximum, i.e. the lowest index on ties.
  perf.bottleneck_index = static_cast<std::size_t>(
      std::max_element(perf.per_layer_ii.begin(), perf.per_layer_ii.end()) -
      perf.per_layer_ii.begin());
  perf.fps = static_cast<double>(fold.m) * clock_hz / static_cast<double>(perf.max_ii());
  const auto serial = std::accumulate(perf.per_layer_ii.begin(), perf.per_layer_ii.end(), std::int64_t{0});
  perf.latency_s = static_cast<double>(serial) / clock_hz;
  return perf;
}

double compute_peak(const DeviceModel& dev, const CostTable& table, int a_bits, int w_bits,
                    double clock_hz, double utilization_cap) {
  const double macs_per_cycle =
      static_cast<double>(dev.lut_budget) * utilization_cap / table.luts_per_mac(a_bits, w_bits);
  return 2.0 * macs_per_cycle * clock_hz;
}

double attainable(double compute_peak, double mem_bandwidth, double ai) {
  return std::min(compute_peak, ai * mem_bandwidth);
}

std::vector<RooflineCurve> roofline(const DeviceModel& dev, const CostTable& table,
                                    const std::vector<std::pair<int, int>>& precisions,
                                    double clock_hz, const RooflineOptions& options) {
  validate(dev);
  if (!(clock_hz > 0.0)) throw ValidationError("clock frequency must be positive");
  if (options.samples < 2 || !(options.ai_min > 0.0) || !(options.ai_max > options.ai_min)) {
    throw ValidationError("roofline needs >= 2 samples over a positive, increasing AI range");
  }
  std::vector<RooflineCurve> curves;
  for (const auto& [a, w] : precisions) {
    RooflineCurve curve;
    curve.a_bits = a;
    curve.w_bits = w;
    curve.label = "a" + std::to_string(a) + "w" + std::to_string(w);
    curve.compute_peak = compute_peak(dev, table, a, w, clock_hz, options.utilization_cap);
    curve.ridge_intensity = curve.compute_peak / dev.mem_bandwidth;

    std::vector<double> ais;
    const double lo = std::log10(options.ai_min);
    const double hi = std::log10(options.ai_max);
    for (int i = 0; i < options.samples; ++i) {
      ais.push_back(std::pow(10.0, lo + (hi - lo) * i / (options.samples - 1)));
    }
    if (curve.ridge_intensity > options.ai_min && curve.ridge_intensity < options.ai_max) {
      ais.insert(std::lower_bound(ais.begin(), ais.end(), curve.ridge_intensity),
                 curve.ridge_intensity);
    }
    for (double ai : ais) {
      curve.points.push_back({ai, attainable(curve.compute_peak, dev.mem_bandwidth, ai)});
    }
    curves.push_back(std::move(curve));
  }
  return curves;
}

std::string roofline_table(const std::vector<RooflineCurve>& curves) {
  std::string out = "precision,ai_ops_per_byte,ops_per_s\n";
  char buf[128];
  for (const auto& curve : curves) {
    for (const auto& p : curve.points) {
      std::snprintf(buf, sizeof buf, "%s,%.6g,%.6g\n", curve.label.c_str(), p.arithmetic_intensity,
                    p.attainable_performance);
      out += buf;
    }
  }
  return out;
}

}  // namespace qnnflow
