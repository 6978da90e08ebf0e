#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace qnnflow {

enum class LayerKind { conv, fully_connected, max_pool };

std::string_view to_string(LayerKind kind);

/// One layer of a streaming QNN. Feature maps are square: `n` is both the
/// height and width of the (unpadded) input map. Fully-connected layers are
/// stored as a k = n convolution with unit stride and no padding.
struct LayerSpec {
  LayerKind kind = LayerKind::conv;
  int n = 1;       // input width, pixels
  int c = 1;       // input channels
  int k = 1;       // kernel is k x k
  int s = 1;       // stride
  int pad = 0;     // symmetric zero padding
  int c_out = 1;   // output channels
  int a_bits = 1;  // input activation precision
  int w_bits = 1;  // weight precision (ignored for max_pool)

  bool has_weights() const noexcept { return kind != LayerKind::max_pool; }
  int padded_n() const noexcept { return n + 2 * pad; }

  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

struct InputSpec {
  int height = 1;
  int width = 1;
  int channels = 1;
  int bits = 8;

  friend bool operator==(const InputSpec&, const InputSpec&) = default;
};

struct NetworkTopology {
  std::string name;
  InputSpec input;
  std::vector<LayerSpec> layers;

  friend bool operator==(const NetworkTopology&, const NetworkTopology&) = default;
};

struct OutputDim {
  int n_out = 0;
  int c_out = 0;

  friend bool operator==(const OutputDim&, const OutputDim&) = default;
};

/// Checks the per-layer invariants; throws ValidationError naming the rule.
void validate_layer(const LayerSpec& layer);

/// Checks every layer plus the chained-shape and precision rules.
void validate(const NetworkTopology& topo);

OutputDim output_dim(const LayerSpec& layer);

/// Multiply-accumulates per image: n_out^2 * k^2 * c * c_out.
std::int64_t mac_count(const LayerSpec& layer);

/// Number of weights k^2 * c * c_out.
std::int64_t weight_count(const LayerSpec& layer);

/// Indices of the layers that carry weights (conv and fully connected), in
/// order. Foldings are indexed by position in this list.
std::vector<std::size_t> compute_layer_indices(const NetworkTopology& topo);

/// Precision of the activations leaving layer `index`: the next layer's input
/// precision, or the layer's own input precision for the last layer.
int output_bits(const NetworkTopology& topo, std::size_t index);

/// Total MACs of all compute layers.
std::int64_t total_macs(const NetworkTopology& topo);

/// Parses the JSON topology document. Throws ParseError on malformed input and
/// ValidationError (with the layer index) when an invariant does not hold.
NetworkTopology parse_topology(std::string_view text);
NetworkTopology load_topology(const std::string& path);

/// Emits a document that `parse_topology` maps back to the same value.
std::string serialize_topology(const NetworkTopology& topo);

/// Copy of `topo` with every hidden compute layer at `a_bits`/`w_bits`.
/// The first layer keeps the input precision for its activations; when
/// `edge_weights_8bit` is set, the first and last compute layers use 8-bit
/// weights.
NetworkTopology with_precision(const NetworkTopology& topo, int a_bits, int w_bits,
                               bool edge_weights_8bit = true);

/// Copy of `topo` with the output channels of every other compute layer
/// (0, 2, 4, ...) halved. Each compute layer's MAC count is halved exactly
/// because each layer sees exactly one halved channel dimension.
NetworkTopology halve_workload(const NetworkTopology& topo);

/// Builds a chained topology from layer templates whose `n`/`c` are derived
/// from `input` and the preceding layers. Fully connected templates get
/// k = n. Validates the result.
NetworkTopology chain_layers(std::string name, InputSpec input, std::vector<LayerSpec> layers);

}  // namespace qnnflow
