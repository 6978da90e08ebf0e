#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "qnnflow/costmodel.hpp"
#include "qnnflow/topology.hpp"

namespace qnnflow {

/// Cycles for one batch of M images through a compute layer:
/// n_out^2 * (K^2 C / SIMD) * (C' / PE). Zero for pools.
std::int64_t layer_ii(const LayerSpec& layer, const LayerFolding& fold);

struct PerfEstimate {
  std::vector<std::int64_t> per_layer_ii;  // one per compute layer
  std::size_t bottleneck_index = 0;        // position in per_layer_ii, lowest on ties
  int m = 1;
  double clock_hz = 0.0;
  double fps = 0.0;        // m * clock_hz / max II
  double latency_s = 0.0;  // serial bound: sum of II / clock_hz

  std::int64_t max_ii() const { return per_layer_ii.at(bottleneck_index); }
  friend bool operator==(const PerfEstimate&, const PerfEstimate&) = default;
};

/// Throws ValidationError when the topology has no compute layers or the
/// clock is not positive.
PerfEstimate estimate_perf(const NetworkTopology& topo, const FoldingConfig& fold, double clock_hz);

struct RooflinePoint {
  double arithmetic_intensity = 0.0;    // ops / byte
  double attainable_performance = 0.0;  // ops / second

  friend bool operator==(const RooflinePoint&, const RooflinePoint&) = default;
};

struct RooflineCurve {
  std::string label;  // e.g. "a2w1"
  int a_bits = 1;
  int w_bits = 1;
  double compute_peak = 0.0;  // ops / second
  double ridge_intensity = 0.0;
  std::vector<RooflinePoint> points;

  friend bool operator==(const RooflineCurve&, const RooflineCurve&) = default;
};

struct RooflineOptions {
  double utilization_cap = 0.8;
  double ai_min = 1e-2;
  double ai_max = 1e6;
  int samples = 64;  // log-spaced, plus the ridge point
};

/// 2 * (lut_budget * cap / f(A, W)) * clock_hz: every LUT the cap allows
/// spent on MACs, two operations each.
double compute_peak(const DeviceModel& dev, const CostTable& table, int a_bits, int w_bits,
                    double clock_hz, double utilization_cap = 0.8);

/// min(compute_peak, ai * bandwidth).
double attainable(double compute_peak, double mem_bandwidth, double ai);

/// One curve per (a_bits, w_bits) pair, each sampled at log-spaced
/// intensities with the ridge point inserted.
std::vector<RooflineCurve> roofline(const DeviceModel& dev, const CostTable& table,
                                    const std::vector<std::pair<int, int>>& precisions,
                                    double clock_hz, const RooflineOptions& options = {});

/// Plot-ready table: "precision,ai_ops_per_byte,ops_per_s" rows.
std::string roofline_table(const std::vector<RooflineCurve>& curves);

}  // namespace qnnflow
