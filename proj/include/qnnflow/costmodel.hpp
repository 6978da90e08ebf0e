#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "qnnflow/topology.hpp"

namespace qnnflow {

/// Parallelism of one compute layer.
struct LayerFolding {
  int pe = 1;    // output channels computed concurrently
  int simd = 1;  // input-channel lanes per cycle

  friend bool operator==(const LayerFolding&, const LayerFolding&) = default;
};

/// `per_layer` is indexed by position in compute_layer_indices(topo).
struct FoldingConfig {
  int m = 1;  // images processed in parallel by every MMVTU
  std::vector<LayerFolding> per_layer;

  friend bool operator==(const FoldingConfig&, const FoldingConfig&) = default;
};

struct DeviceModel {
  std::string name = "device";
  std::int64_t lut_budget = 1;
  std::int64_t bram_budget = 1;  // blocks of bram_depth x bram_width
  int bram_depth = 512;
  int bram_width = 36;
  std::int64_t dsp_budget = 1;
  double mem_bandwidth = 1.0;  // bytes / second

  friend bool operator==(const DeviceModel&, const DeviceModel&) = default;
};

void validate(const DeviceModel& dev);

/// LUTs per multiply-accumulate, keyed by (a_bits, w_bits). Pairs without an
/// entry fall back to A * max(W, 2) when the default rule is enabled. The
/// default rule is a placeholder, not measured synthesis data.
struct CostTable {
  std::map<std::pair<int, int>, double> entries;
  bool use_default_rule = true;

  static double default_rule(int a_bits, int w_bits);
  /// Throws ValidationError when no entry exists and the rule is disabled.
  double luts_per_mac(int a_bits, int w_bits) const;

  friend bool operator==(const CostTable&, const CostTable&) = default;
};

/// Weight-memory depth term.
///   faithful   ceil(WM * width / depth), as printed
///   corrected  ceil(WM / depth)
enum class Eq2Mode { faithful, corrected };

std::string_view to_string(Eq2Mode mode);

struct WeightMemory {
  std::int64_t blocks = 0;
  std::int64_t wm_depth = 0;  // words per PE memory, K^2 C C' / (SIMD PE)

  friend bool operator==(const WeightMemory&, const WeightMemory&) = default;
};

/// Line-buffer BRAM of the sliding window unit:
/// M (ceil(K/S) + 1) ceil(S N_pad / depth) ceil(C A / width). Zero for pools.
std::int64_t bram_swu(const LayerSpec& layer, int m, const DeviceModel& dev);

/// Weight BRAM: PE * depth_term * ceil(SIMD W / width). Zero for pools.
/// Throws FoldingError when SIMD * PE does not tile K^2 C C'.
WeightMemory bram_weights(const LayerSpec& layer, const LayerFolding& fold, const DeviceModel& dev,
                          Eq2Mode mode = Eq2Mode::faithful);

/// ceil(M * PE * SIMD * f(A, W)). Zero for pools.
std::int64_t lut_cost(const LayerSpec& layer, const LayerFolding& fold, int m,
                      const CostTable& table);

/// Throws FoldingError unless SIMD | C, PE | C', M >= 1 and the folding has
/// one entry per compute layer.
void validate_folding(const NetworkTopology& topo, const FoldingConfig& fold);

struct LayerResources {
  std::size_t layer_index = 0;  // index into topo.layers
  std::int64_t bram_swu = 0;
  std::int64_t bram_weights = 0;
  std::int64_t wm_depth = 0;
  std::int64_t luts = 0;
  int accumulator_bits = 0;

  std::int64_t bram() const noexcept { return bram_swu + bram_weights; }
  friend bool operator==(const LayerResources&, const LayerResources&) = default;
};

struct ResourceEstimate {
  std::vector<LayerResources> per_layer;  // one per compute layer
  std::int64_t bram_total = 0;
  std::int64_t lut_total = 0;
  double bram_fraction = 0.0;
  double lut_fraction = 0.0;

  bool fits(double cap) const noexcept { return bram_fraction <= cap && lut_fraction <= cap; }
  /// Names of the resources whose utilization exceeds `cap` ("BRAM", "LUT").
  std::vector<std::string> violations(double cap) const;

  friend bool operator==(const ResourceEstimate&, const ResourceEstimate&) = default;
};

ResourceEstimate estimate_network(const NetworkTopology& topo, const FoldingConfig& fold,
                                  const DeviceModel& dev, const CostTable& table,
                                  Eq2Mode mode = Eq2Mode::faithful);

// File formats.
DeviceModel parse_device(std::string_view text);
DeviceModel load_device(const std::string& path);
std::string serialize_device(const DeviceModel& dev);

CostTable parse_cost_table(std::string_view text);
CostTable load_cost_table(const std::string& path);
std::string serialize_cost_table(const CostTable& table);

FoldingConfig parse_folding(std::string_view text);
FoldingConfig load_folding(const std::string& path);
std::string serialize_folding(const FoldingConfig& fold);

}  // namespace qnnflow
