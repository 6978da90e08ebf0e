#include <bit>

#include "json_util.hpp"
#include "qnnflow/errors.hpp"
#include "qnnflow/simulator.hpp"

namespace qnnflow {

using nlohmann::json;

namespace {

std::int64_t accumulator_bound(const LayerSpec& layer) {
  const std::int64_t terms = std::int64_t{layer.k} * layer.k * layer.c;
  return terms * QuantSpec(layer.a_bits).max_code() * WeightEncoding(layer.w_bits).max_abs_int();
}

}  // namespace

std::vector<std::vector<ChannelActivation>> parse_activations(std::string_view text,
                                                              const NetworkTopology& topo,
                                                              ReluMode mode) {
  const json doc = detail::parse_json(text);
  if (!doc.is_array()) throw ParseError("thresholds: expected a JSON array");
  const auto compute = compute_layer_indices(topo);
  std::vector<std::vector<std::optional<ChannelActivation>>> slots(compute.size());
  for (std::size_t i = 0; i < compute.size(); ++i) {
    slots[i].resize(static_cast<std::size_t>(topo.layers[compute[i]].c_out));
  }

  for (std::size_t e = 0; e < doc.size(); ++e) {
    const std::string where = "thresholds[" + std::to_string(e) + "]";
    const json& entry = doc[e];
    if (!entry.is_object()) throw ParseError(where + ": expected an object");
    detail::reject_unknown(entry, {"layer", "channel", "thresholds", "scale", "bias", "out_bits"}, where);
    const int li = detail::require<int>(entry, "layer", where);
    const int ch = detail::require<int>(entry, "channel", where);
    if (li < 0 || static_cast<std::size_t>(li) >= topo.layers.size()) {
      throw ValidationError(where + ": layer " + std::to_string(li) + " out of range");
    }
    const auto pos = std::find(compute.begin(), compute.end(), static_cast<std::size_t>(li));
    if (pos == compute.end()) {
      throw ValidationError(where + ": layer " + std::to_string(li) + " has no weights");
    }
    auto& layer_slots = slots[static_cast<std::size_t>(pos - compute.begin())];
    if (ch < 0 || static_cast<std::size_t>(ch) >= layer_slots.size()) {
      throw ValidationError(where + ": channel " + std::to_string(ch) + " out of range");
    }
    if (layer_slots[static_cast<std::size_t>(ch)]) {
      throw ValidationError(where + ": duplicate entry for layer " + std::to_string(li) + " channel " +
                            std::to_string(ch));
    }

    ChannelActivation act;
    if (entry.contains("thresholds")) {
      if (entry.contains("scale") || entry.contains("bias") || entry.contains("out_bits")) {
        throw ParseError(where + ": give either thresholds or scale/bias/out_bits");
      }
      const json& arr = detail::require_array(entry, "thresholds", where);
      ThresholdSet set;
      for (const auto& t : arr) set.thresholds.push_back(detail::convert<std::int64_t>(t, where + ".thresholds"));
      const auto count = set.thresholds.size() + 1;
      if (!std::has_single_bit(count) || count < 2) {
        throw ValidationError(where + ": threshold count must be 2^bits - 1");
      }
      try {
        validate_thresholds(set, std::countr_zero(count));
      } catch (const ValidationError& err) {
        throw ValidationError(where + ": " + err.what());
      }
      act = std::move(set);
    } else {
      AffineActivation a;
      a.scale = detail::require<double>(entry, "scale", where);
      a.bias = detail::require<double>(entry, "bias", where);
      a.out_bits = detail::require<int>(entry, "out_bits", where);
      a.mode = mode;
      if (a.out_bits < 1 || a.out_bits > 16) throw ValidationError(where + ": out_bits must be in 1..16");
      if (mode == ReluMode::standard) {
        try {
          act = build_thresholds(QuantSpec(a.out_bits), a.scale, a.bias,
                                 accumulator_bound(topo.layers[static_cast<std::size_t>(li)]));
        } catch (const ValidationError& err) {
          throw ValidationError(where + ": " + err.what());
        }
      } else {
        act = a;
      }
    }
    layer_slots[static_cast<std::size_t>(ch)] = std::move(act);
  }

  // A compute layer is either fully covered or absent (raw accumulators).
  std::vector<std::vector<ChannelActivation>> out(compute.size());
  for (std::size_t i = 0; i < compute.size(); ++i) {
    std::size_t present = 0;
    for (const auto& s : slots[i]) present += s.has_value();
    if (present == 0) continue;
    if (present != slots[i].size()) {
      throw ValidationError("thresholds: layer " + std::to_string(compute[i]) + " covers " +
                            std::to_string(present) + " of " + std::to_string(slots[i].size()) +
                            " channels");
    }
    for (auto& s : slots[i]) out[i].push_back(std::move(*s));
  }
  return out;
}

std::string serialize_activations(const std::vector<std::vector<ChannelActivation>>& acts,
                                  const NetworkTopology& topo) {
  const auto compute = compute_layer_indices(topo);
  if (acts.size() != compute.size()) {
    throw ValidationError("activations: expected one entry per compute layer");
  }
  json doc = json::array();
  for (std::size_t i = 0; i < acts.size(); ++i) {
    for (std::size_t ch = 0; ch < acts[i].size(); ++ch) {
      json e{{"layer", compute[i]}, {"channel", ch}};
      if (const auto* t = std::get_if<ThresholdSet>(&acts[i][ch])) {
        e["thresholds"] = t->thresholds;
      } else {
        const auto& a = std::get<AffineActivation>(acts[i][ch]);
        e["scale"] = a.scale;
        e["bias"] = a.bias;
        e["out_bits"] = a.out_bits;
      }
      doc.push_back(std::move(e));
    }
  }
  return doc.dump(1) + "\n";
}

}  // namespace qnnflow
