#include "qnnflow/topology.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "json_util.hpp"
#include "qnnflow/errors.hpp"

namespace qnnflow {

using nlohmann::json;

std::string_view to_string(LayerKind kind) {
  switch (kind) {
    case LayerKind::conv: return "conv";
    case LayerKind::fully_connected: return "fc";
    case LayerKind::max_pool: return "maxpool";
  }
  return "?";
}

namespace {

std::string layer_prefix(std::size_t index) { return "layer " + std::to_string(index) + ": "; }

void check_bits(int bits, const char* what) {
  if (bits < 1 || bits > 8) {
    throw ValidationError(std::string(what) + " must be in 1..8, got " + std::to_string(bits));
  }
}

}  // namespace

void validate_layer(const LayerSpec& layer) {
  if (layer.n < 1) throw ValidationError("input width must be >= 1");
  if (layer.c < 1) throw ValidationError("input channels must be >= 1");
  if (layer.c_out < 1) throw ValidationError("output channels must be >= 1");
  if (layer.k < 1) throw ValidationError("kernel size must be >= 1");
  if (layer.s < 1) throw ValidationError("stride must be >= 1");
  if (layer.pad < 0) throw ValidationError("padding must be >= 0");
  if (layer.padded_n() < layer.k) {
    throw ValidationError("kernel larger than padded input (n + 2*pad < k)");
  }
  if ((layer.padded_n() - layer.k) % layer.s != 0) {
    throw ValidationError("non-integral output dimension: (n + 2*pad - k) mod s != 0");
  }
  check_bits(layer.a_bits, "a_bits");
  switch (layer.kind) {
    case LayerKind::conv:
      check_bits(layer.w_bits, "w_bits");
      break;
    case LayerKind::fully_connected:
      check_bits(layer.w_bits, "w_bits");
      if (layer.k != layer.n || layer.s != 1 || layer.pad != 0) {
        throw ValidationError("fully connected layer must be a k = n, stride 1, unpadded conv");
      }
      break;
    case LayerKind::max_pool:
      if (layer.c_out != layer.c) throw ValidationError("max pool must keep the channel count");
      break;
  }
}

void validate(const NetworkTopology& topo) {
  if (topo.layers.empty()) throw ValidationError("topology has no layers");
  if (topo.input.height != topo.input.width) {
    throw ValidationError("input feature map must be square (height == width)");
  }
  if (topo.input.channels < 1 || topo.input.height < 1) {
    throw ValidationError("input dimensions must be positive");
  }
  check_bits(topo.input.bits, "input bits");

  int n = topo.input.width;
  int c = topo.input.channels;
  int bits = topo.input.bits;
  for (std::size_t i = 0; i < topo.layers.size(); ++i) {
    const LayerSpec& layer = topo.layers[i];
    try {
      validate_layer(layer);
    } catch (const ValidationError& e) {
      throw ValidationError(layer_prefix(i) + e.what());
    }
    if (layer.n != n || layer.c != c) {
      throw ValidationError(layer_prefix(i) + "chained shape mismatch: expected input " +
                            std::to_string(n) + "x" + std::to_string(n) + "x" + std::to_string(c) +
                            ", got " + std::to_string(layer.n) + "x" + std::to_string(layer.n) +
                            "x" + std::to_string(layer.c));
    }
    if (layer.a_bits != bits && (i == 0 || topo.layers[i - 1].kind == LayerKind::max_pool)) {
      // The first layer sees the raw input; a pool passes codes through unchanged.
      throw ValidationError(layer_prefix(i) + "activation precision " +
                            std::to_string(layer.a_bits) + " does not match incoming " +
                            std::to_string(bits) + "-bit activations");
    }
    const OutputDim out = output_dim(layer);
    n = out.n_out;
    c = out.c_out;
    bits = layer.a_bits;
  }
}

OutputDim output_dim(const LayerSpec& layer) {
  return {(layer.padded_n() - layer.k) / layer.s + 1, layer.c_out};
}

std::int64_t mac_count(const LayerSpec& layer) {
  if (!layer.has_weights()) throw ValidationError("layer has no MACs");
  const std::int64_t n_out = output_dim(layer).n_out;
  return n_out * n_out * weight_count(layer);
}

std::int64_t weight_count(const LayerSpec& layer) {
  if (!layer.has_weights()) return 0;
  return std::int64_t{layer.k} * layer.k * layer.c * layer.c_out;
}

std::vector<std::size_t> compute_layer_indices(const NetworkTopology& topo) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < topo.layers.size(); ++i) {
    if (topo.layers[i].has_weights()) out.push_back(i);
  }
  return out;
}

int output_bits(const NetworkTopology& topo, std::size_t index) {
  if (index + 1 < topo.layers.size()) return topo.layers[index + 1].a_bits;
  return topo.layers.at(index).a_bits;
}

std::int64_t total_macs(const NetworkTopology& topo) {
  std::int64_t total = 0;
  for (const auto& layer : topo.layers) {
    if (layer.has_weights()) total += mac_count(layer);
  }
  return total;
}

namespace {

struct Defaults {
  std::optional<int> a_bits;
  std::optional<int> w_bits;
};

struct LayerDraft {
  LayerSpec spec;
  bool a_explicit = false;
};

LayerDraft parse_layer(const json& j, std::size_t index, const Defaults& defaults) {
  const std::string where = "layers[" + std::to_string(index) + "]";
  if (!j.is_object()) throw ParseError(where + ": expected an object");
  const std::string type = detail::require<std::string>(j, "type", where);

  LayerDraft draft;
  LayerSpec& spec = draft.spec;
  if (type == "conv") {
    detail::reject_unknown(j, {"type", "k", "stride", "pad", "out_channels", "a_bits", "w_bits"},
                           where);
    spec.kind = LayerKind::conv;
    spec.k = detail::require<int>(j, "k", where);
    spec.s = detail::optional<int>(j, "stride", where).value_or(1);
    spec.pad = detail::optional<int>(j, "pad", where).value_or(0);
    spec.c_out = detail::require<int>(j, "out_channels", where);
  } else if (type == "fc") {
    detail::reject_unknown(j, {"type", "out_channels", "a_bits", "w_bits"}, where);
    spec.kind = LayerKind::fully_connected;
    spec.c_out = detail::require<int>(j, "out_channels", where);
  } else if (type == "maxpool") {
    detail::reject_unknown(j, {"type", "k", "stride", "pad", "a_bits"}, where);
    spec.kind = LayerKind::max_pool;
    spec.k = detail::require<int>(j, "k", where);
    spec.s = detail::optional<int>(j, "stride", where).value_or(spec.k);
    spec.pad = detail::optional<int>(j, "pad", where).value_or(0);
  } else {
    throw ParseError(where + ".type: unknown layer type '" + type + "'");
  }

  if (auto a = detail::optional<int>(j, "a_bits", where)) {
    spec.a_bits = *a;
    draft.a_explicit = true;
  } else if (defaults.a_bits) {
    spec.a_bits = *defaults.a_bits;
  } else {
    spec.a_bits = 0;  // resolved from context or rejected later
  }
  if (spec.kind != LayerKind::max_pool) {
    if (auto w = detail::optional<int>(j, "w_bits", where)) {
      spec.w_bits = *w;
    } else if (defaults.w_bits) {
      spec.w_bits = *defaults.w_bits;
    } else {
      throw ParseError(where + ": missing w_bits and no default precision");
    }
  } else {
    spec.w_bits = 0;
  }
  return draft;
}

}  // namespace

NetworkTopology chain_layers(std::string name, InputSpec input, std::vector<LayerSpec> layers) {
  NetworkTopology topo;
  topo.name = std::move(name);
  topo.input = input;
  int n = input.width;
  int c = input.channels;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    LayerSpec layer = layers[i];
    layer.n = n;
    layer.c = c;
    if (layer.kind == LayerKind::fully_connected) {
      layer.k = n;
      layer.s = 1;
      layer.pad = 0;
    }
    if (layer.kind == LayerKind::max_pool) layer.c_out = c;
    try {
      validate_layer(layer);
    } catch (const ValidationError& e) {
      throw ValidationError(layer_prefix(i) + e.what());
    }
    const OutputDim out = output_dim(layer);
    n = out.n_out;
    c = out.c_out;
    topo.layers.push_back(layer);
  }
  validate(topo);
  return topo;
}

NetworkTopology parse_topology(std::string_view text) {
  const json doc = detail::parse_json(text);
  if (!doc.is_object()) throw ParseError("topology: expected a JSON object");
  detail::reject_unknown(doc, {"name", "input", "precision", "layers"}, "topology");

  InputSpec input;
  {
    const json& in = detail::require_object(doc, "input", "topology");
    detail::reject_unknown(in, {"height", "width", "channels", "bits"}, "input");
    input.height = detail::require<int>(in, "height", "input");
    input.width = detail::require<int>(in, "width", "input");
    input.channels = detail::require<int>(in, "channels", "input");
    input.bits = detail::optional<int>(in, "bits", "input").value_or(8);
  }

  Defaults defaults;
  if (doc.contains("precision")) {
    const json& p = detail::require_object(doc, "precision", "topology");
    detail::reject_unknown(p, {"a_bits", "w_bits"}, "precision");
    defaults.a_bits = detail::optional<int>(p, "a_bits", "precision");
    defaults.w_bits = detail::optional<int>(p, "w_bits", "precision");
  }

  if (!doc.contains("layers") || !doc.at("layers").is_array()) {
    throw ParseError("topology.layers: expected an array");
  }
  const json& layers_json = doc.at("layers");
  if (layers_json.empty()) throw ValidationError("topology has no layers");

  std::vector<LayerDraft> drafts;
  for (std::size_t i = 0; i < layers_json.size(); ++i) {
    drafts.push_back(parse_layer(layers_json[i], i, defaults));
  }

  // Precision resolution. The first layer consumes the raw input unless it
  // says otherwise; pools carry the precision of the activations they pass.
  if (!drafts[0].a_explicit) drafts[0].spec.a_bits = input.bits;
  for (std::size_t i = 0; i < drafts.size(); ++i) {
    LayerDraft& d = drafts[i];
    if (d.spec.kind != LayerKind::max_pool || d.a_explicit || i == 0) continue;
    if (i + 1 < drafts.size() && drafts[i + 1].spec.kind != LayerKind::max_pool) {
      d.spec.a_bits = drafts[i + 1].spec.a_bits;
    } else {
      d.spec.a_bits = drafts[i - 1].spec.a_bits;
    }
  }
  for (std::size_t i = 0; i < drafts.size(); ++i) {
    if (drafts[i].spec.a_bits == 0) {
      throw ParseError("layers[" + std::to_string(i) + "]: missing a_bits and no default precision");
    }
  }
  // The layer after a pool must read the pool's precision.
  for (std::size_t i = 0; i + 1 < drafts.size(); ++i) {
    if (drafts[i].spec.kind == LayerKind::max_pool &&
        drafts[i + 1].spec.a_bits != drafts[i].spec.a_bits) {
      throw ValidationError(layer_prefix(i + 1) + "activation precision " +
                            std::to_string(drafts[i + 1].spec.a_bits) +
                            " differs from the preceding max pool's " +
                            std::to_string(drafts[i].spec.a_bits));
    }
  }

  std::vector<LayerSpec> specs;
  specs.reserve(drafts.size());
  for (auto& d : drafts) specs.push_back(d.spec);
  std::string name = detail::optional<std::string>(doc, "name", "topology").value_or("");
  return chain_layers(std::move(name), input, std::move(specs));
}

NetworkTopology load_topology(const std::string& path) {
  return parse_topology(detail::read_file(path));
}

std::string serialize_topology(const NetworkTopology& topo) {
  json doc;
  doc["name"] = topo.name;
  doc["input"] = {{"height", topo.input.height},
                  {"width", topo.input.width},
                  {"channels", topo.input.channels},
                  {"bits", topo.input.bits}};
  json layers = json::array();
  for (const auto& l : topo.layers) {
    json j;
    j["type"] = std::string(to_string(l.kind));
    switch (l.kind) {
      case LayerKind::conv:
        j["k"] = l.k;
        j["stride"] = l.s;
        j["pad"] = l.pad;
        j["out_channels"] = l.c_out;
        j["w_bits"] = l.w_bits;
        break;
      case LayerKind::fully_connected:
        j["out_channels"] = l.c_out;
        j["w_bits"] = l.w_bits;
        break;
      case LayerKind::max_pool:
        j["k"] = l.k;
        j["stride"] = l.s;
        j["pad"] = l.pad;
        break;
    }
    j["a_bits"] = l.a_bits;
    layers.push_back(std::move(j));
  }
  doc["layers"] = std::move(layers);
  return doc.dump(2) + "\n";
}

NetworkTopology with_precision(const NetworkTopology& topo, int a_bits, int w_bits,
                               bool edge_weights_8bit) {
  const auto compute = compute_layer_indices(topo);
  std::vector<LayerSpec> layers = topo.layers;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    LayerSpec& l = layers[i];
    l.a_bits = i == 0 ? topo.input.bits : a_bits;
    if (l.has_weights()) l.w_bits = w_bits;
  }
  if (edge_weights_8bit && !compute.empty()) {
    layers[compute.front()].w_bits = 8;
    layers[compute.back()].w_bits = 8;
  }
  std::string name = topo.name + "-a" + std::to_string(a_bits) + "w" + std::to_string(w_bits);
  return chain_layers(std::move(name), topo.input, std::move(layers));
}

NetworkTopology halve_workload(const NetworkTopology& topo) {
  std::vector<LayerSpec> layers = topo.layers;
  std::size_t compute_pos = 0;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    LayerSpec& l = layers[i];
    if (!l.has_weights()) continue;
    if (compute_pos % 2 == 0) {
      if (l.c_out % 2 != 0) {
        throw ValidationError(layer_prefix(i) + "cannot halve an odd channel count " +
                              std::to_string(l.c_out));
      }
      l.c_out /= 2;
    }
    ++compute_pos;
  }
  return chain_layers(topo.name + "-half", topo.input, std::move(layers));
}

}  // namespace qnnflow
