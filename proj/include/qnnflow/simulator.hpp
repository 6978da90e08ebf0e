#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "qnnflow/costmodel.hpp"
#include "qnnflow/qtensor.hpp"
#include "qnnflow/quant.hpp"
#include "qnnflow/topology.hpp"

namespace qnnflow {

/// Quantizes scale * acc + bias directly instead of through thresholds; the
/// only way to run ReluMode::paper_literal, which is not monotone.
struct AffineActivation {
  double scale = 1.0;
  double bias = 0.0;
  int out_bits = 1;
  ReluMode mode = ReluMode::standard;

  friend bool operator==(const AffineActivation&, const AffineActivation&) = default;
};

using ChannelActivation = std::variant<ThresholdSet, AffineActivation>;

int activation_bits(const ChannelActivation& act);
std::int64_t apply_activation(const ChannelActivation& act, std::int64_t acc);

/// Weights plus per-output-channel activation of one compute layer. An empty
/// `activation` emits raw accumulators (allowed on the last layer only).
struct LayerParams {
  QTensor weights;  // (c_out, c_in, k, k), bipolar for W = 1 else two's complement
  std::vector<ChannelActivation> activation;
};

struct SimOptions {
  /// Capacity of every inter-stage queue; 0 keeps the default of one output
  /// row of the producing stage.
  std::size_t queue_capacity = 0;
  /// Per topology layer override of that layer's output queue (0 = default).
  std::vector<std::size_t> layer_queue_capacity;
  /// Abort threshold guarding against deadlock.
  std::uint64_t max_cycles = std::uint64_t{1} << 36;
};

struct StageReport {
  std::string name;
  std::uint64_t busy = 0;
  std::uint64_t starved = 0;  // waiting for input
  std::uint64_t blocked = 0;  // output queue full
  std::optional<std::uint64_t> first_output_cycle;
  std::uint64_t stall() const noexcept { return starved + blocked; }

  friend bool operator==(const StageReport&, const StageReport&) = default;
};

struct LayerCycleReport {
  std::size_t layer_index = 0;
  LayerKind kind = LayerKind::conv;
  StageReport swu;   // sliding window unit (empty for pools)
  StageReport mvtu;  // matrix-vector-threshold unit, or the pool stage
  std::int64_t analytic_ii = 0;
  double busy_per_batch = 0.0;
  std::uint64_t weight_block_fetches = 0;  // SIMD x PE blocks
  std::uint64_t weight_row_fetches = 0;    // SIMD-wide rows
  std::uint64_t peak_swu_bits = 0;         // resident line-buffer payload
  std::uint64_t swu_bits_bound = 0;        // M (ceil(K/S)+1) S N_pad C A

  friend bool operator==(const LayerCycleReport&, const LayerCycleReport&) = default;
};

struct CycleReport {
  std::vector<LayerCycleReport> layers;
  std::uint64_t total_cycles = 0;
  std::uint64_t first_output_cycle = 0;  // first element of the last layer
  std::vector<std::uint64_t> batch_completion_cycles;
  /// Interval between the last two batch completions, or total_cycles for a
  /// single batch.
  std::uint64_t cycles_per_batch = 0;
  int m = 1;

  friend bool operator==(const CycleReport&, const CycleReport&) = default;
};

struct SimResult {
  QTensor output;
  CycleReport report;
};

/// Cycle-level run of the streaming pipeline: per compute layer a sliding
/// window unit feeding a multi-vector MVTU, pools as zero-cost stages.
/// `input` has dims (images, n, n, c) with images a multiple of fold.m; the
/// images stream as images / m batches of m lanes.
///
/// `params` has one entry per compute layer.
SimResult simulate_network(const NetworkTopology& topo, const FoldingConfig& fold,
                           const std::vector<LayerParams>& params, const QTensor& input,
                           const SimOptions& options = {});

/// Single compute layer.
SimResult simulate_layer(const QTensor& input, const LayerSpec& layer, const LayerFolding& fold,
                         int m, const LayerParams& params, const SimOptions& options = {});

/// Dense reference: direct convolution over decoded integer codes followed
/// by the activation. Shares no kernels with the streaming path.
QTensor reference_conv_oracle(const QTensor& input, const LayerSpec& layer, const LayerParams& params);
QTensor reference_pool_oracle(const QTensor& input, const LayerSpec& layer);
QTensor reference_network_oracle(const NetworkTopology& topo, const std::vector<LayerParams>& params,
                                 const QTensor& input);

/// Random input and parameters for `topo`: uniform activation and weight
/// codes, sorted thresholds spread around the accumulator's typical range,
/// and raw accumulators on the last compute layer when they fit 32 bits.
struct SyntheticWorkload {
  QTensor input;
  std::vector<LayerParams> params;
};

SyntheticWorkload synthetic_workload(const NetworkTopology& topo, std::uint32_t images,
                                     std::uint64_t seed);

/// Thresholds file: [{"layer", "channel", "thresholds": [...]}] or
/// {"layer", "channel", "scale", "bias", "out_bits"} entries. `layer` is the
/// topology layer index. Returns one activation vector per compute layer.
std::vector<std::vector<ChannelActivation>> parse_activations(std::string_view text,
                                                              const NetworkTopology& topo,
                                                              ReluMode mode = ReluMode::standard);
std::string serialize_activations(const std::vector<std::vector<ChannelActivation>>& acts,
                                  const NetworkTopology& topo);

}  // namespace qnnflow
