#include "qnnflow/costmodel.hpp"

#include <cmath>

#include "json_util.hpp"
#include "qnnflow/errors.hpp"
#include "qnnflow/quant.hpp"

namespace qnnflow {

using nlohmann::json;

namespace {

std::int64_t ceil_div(std::int64_t a, std::int64_t b) { return (a + b - 1) / b; }

}  // namespace

void validate(const DeviceModel& dev) {
  if (dev.lut_budget <= 0) throw ValidationError("device lut_budget must be positive");
  if (dev.bram_budget <= 0) throw ValidationError("device bram_budget must be positive");
  if (dev.bram_depth <= 0) throw ValidationError("device bram_depth must be positive");
  if (dev.bram_width <= 0) throw ValidationError("device bram_width must be positive");
  if (dev.dsp_budget < 0) throw ValidationError("device dsp_budget must be >= 0");
  if (!(dev.mem_bandwidth > 0.0)) throw ValidationError("device memory bandwidth must be positive");
}

double CostTable::default_rule(int a_bits, int w_bits) {
  return static_cast<double>(a_bits) * static_cast<double>(std::max(w_bits, 2));
}

double CostTable::luts_per_mac(int a_bits, int w_bits) const {
  if (a_bits < 1 || w_bits < 1) {
    throw ValidationError("precision must be >= 1 bit (a=" + std::to_string(a_bits) +
                          " w=" + std::to_string(w_bits) + ")");
  }
  if (auto it = entries.find({a_bits, w_bits}); it != entries.end()) return it->second;
  if (use_default_rule) return default_rule(a_bits, w_bits);
  throw ValidationError("cost table has no entry for a=" + std::to_string(a_bits) +
                        " w=" + std::to_string(w_bits) + " and the default rule is disabled");
}

std::string_view to_string(Eq2Mode mode) {
  return mode == Eq2Mode::faithful ? "faithful" : "corrected";
}

std::int64_t bram_swu(const LayerSpec& layer, int m, const DeviceModel& dev) {
  if (!layer.has_weights()) return 0;
  const std::int64_t stripes = ceil_div(layer.k, layer.s) + 1;
  const std::int64_t depth = ceil_div(std::int64_t{layer.s} * layer.padded_n(), dev.bram_depth);
  const std::int64_t width = ceil_div(std::int64_t{layer.c} * layer.a_bits, dev.bram_width);
  return std::int64_t{m} * stripes * depth * width;
}

WeightMemory bram_weights(const LayerSpec& layer, const LayerFolding& fold, const DeviceModel& dev,
                          Eq2Mode mode) {
  if (!layer.has_weights()) return {};
  const std::int64_t weights = weight_count(layer);
  const std::int64_t lanes = std::int64_t{fold.simd} * fold.pe;
  if (fold.simd < 1 || fold.pe < 1 || weights % lanes != 0) {
    throw FoldingError("folding does not tile weight matrix: K^2*C*C' = " + std::to_string(weights) +
                       " is not a multiple of SIMD*PE = " + std::to_string(lanes));
  }
  WeightMemory out;
  out.wm_depth = weights / lanes;
  const std::int64_t depth_term = mode == Eq2Mode::faithful
                                      ? ceil_div(out.wm_depth * dev.bram_width, dev.bram_depth)
                                      : ceil_div(out.wm_depth, dev.bram_depth);
  const std::int64_t width_term = ceil_div(std::int64_t{fold.simd} * layer.w_bits, dev.bram_width);
  out.blocks = std::int64_t{fold.pe} * depth_term * width_term;
  return out;
}

std::int64_t lut_cost(const LayerSpec& layer, const LayerFolding& fold, int m,
                      const CostTable& table) {
  if (!layer.has_weights()) return 0;
  const double per_mac = table.luts_per_mac(layer.a_bits, layer.w_bits);
  const long double raw = static_cast<long double>(m) * fold.pe * fold.simd * per_mac;
  // Absorb representation error of fractional table entries before rounding up.
  return static_cast<std::int64_t>(std::ceil(raw - 1e-9L));
}

void validate_folding(const NetworkTopology& topo, const FoldingConfig& fold) {
  if (fold.m < 1) throw FoldingError("multi-vector count m must be >= 1");
  const auto compute = compute_layer_indices(topo);
  if (fold.per_layer.size() != compute.size()) {
    throw FoldingError("folding has " + std::to_string(fold.per_layer.size()) +
                       " entries but the topology has " + std::to_string(compute.size()) +
                       " compute layers");
  }
  for (std::size_t i = 0; i < compute.size(); ++i) {
    const LayerSpec& layer = topo.layers[compute[i]];
    const LayerFolding& f = fold.per_layer[i];
    const std::string where = "layer " + std::to_string(compute[i]) + ": ";
    if (f.pe < 1 || f.simd < 1) throw FoldingError(where + "PE and SIMD must be >= 1");
    if (layer.c % f.simd != 0) {
      throw FoldingError(where + "SIMD " + std::to_string(f.simd) + " does not divide C = " +
                         std::to_string(layer.c));
    }
    if (layer.c_out % f.pe != 0) {
      throw FoldingError(where + "PE " + std::to_string(f.pe) + " does not divide C' = " +
                         std::to_string(layer.c_out));
    }
  }
}

std::vector<std::string> ResourceEstimate::violations(double cap) const {
  std::vector<std::string> out;
  if (bram_fraction > cap) out.emplace_back("BRAM");
  if (lut_fraction > cap) out.emplace_back("LUT");
  return out;
}

ResourceEstimate estimate_network(const NetworkTopology& topo, const FoldingConfig& fold,
                                  const DeviceModel& dev, const CostTable& table, Eq2Mode mode) {
  validate(dev);
  validate_folding(topo, fold);
  const auto compute = compute_layer_indices(topo);
  ResourceEstimate est;
  est.per_layer.reserve(compute.size());
  for (std::size_t i = 0; i < compute.size(); ++i) {
    const LayerSpec& layer = topo.layers[compute[i]];
    const LayerFolding& f = fold.per_layer[i];
    LayerResources r;
    r.layer_index = compute[i];
    r.bram_swu = bram_swu(layer, fold.m, dev);
    const WeightMemory wm = bram_weights(layer, f, dev, mode);
    r.bram_weights = wm.blocks;
    r.wm_depth = wm.wm_depth;
    r.luts = lut_cost(layer, f, fold.m, table);
    r.accumulator_bits = accumulator_bits(std::int64_t{layer.k} * layer.k * layer.c, layer.a_bits,
                                          WeightEncoding(layer.w_bits));
    est.bram_total += r.bram();
    est.lut_total += r.luts;
    est.per_layer.push_back(r);
  }
  est.bram_fraction = static_cast<double>(est.bram_total) / static_cast<double>(dev.bram_budget);
  est.lut_fraction = static_cast<double>(est.lut_total) / static_cast<double>(dev.lut_budget);
  return est;
}

DeviceModel parse_device(std::string_view text) {
  const json doc = detail::parse_json(text);
  if (!doc.is_object()) throw ParseError("device: expected a JSON object");
  detail::reject_unknown(doc,
                         {"name", "lut_budget", "bram_budget", "bram_depth", "bram_width",
                          "dsp_budget", "mem_bandwidth_gbps"},
                         "device");
  DeviceModel dev;
  dev.name = detail::optional<std::string>(doc, "name", "device").value_or("device");
  dev.lut_budget = detail::require<std::int64_t>(doc, "lut_budget", "device");
  dev.bram_budget = detail::require<std::int64_t>(doc, "bram_budget", "device");
  dev.bram_depth = detail::optional<int>(doc, "bram_depth", "device").value_or(512);
  dev.bram_width = detail::optional<int>(doc, "bram_width", "device").value_or(36);
  dev.dsp_budget = detail::require<std::int64_t>(doc, "dsp_budget", "device");
  dev.mem_bandwidth = detail::require<double>(doc, "mem_bandwidth_gbps", "device") * 1e9;
  validate(dev);
  return dev;
}

DeviceModel load_device(const std::string& path) { return parse_device(detail::read_file(path)); }

std::string serialize_device(const DeviceModel& dev) {
  json doc = {{"name", dev.name},
              {"lut_budget", dev.lut_budget},
              {"bram_budget", dev.bram_budget},
              {"bram_depth", dev.bram_depth},
              {"bram_width", dev.bram_width},
              {"dsp_budget", dev.dsp_budget},
              {"mem_bandwidth_gbps", dev.mem_bandwidth / 1e9}};
  return doc.dump(2) + "\n";
}

CostTable parse_cost_table(std::string_view text) {
  const json doc = detail::parse_json(text);
  if (!doc.is_object()) throw ParseError("cost table: expected a JSON object");
  detail::reject_unknown(doc, {"entries", "use_default_rule"}, "cost table");
  CostTable table;
  table.use_default_rule =
      detail::optional<bool>(doc, "use_default_rule", "cost table").value_or(true);
  if (doc.contains("entries")) {
    const json& entries = detail::require_array(doc, "entries", "cost table");
    for (std::size_t i = 0; i < entries.size(); ++i) {
      const std::string where = "entries[" + std::to_string(i) + "]";
      const json& e = entries[i];
      if (!e.is_object()) throw ParseError(where + ": expected an object");
      detail::reject_unknown(e, {"a", "w", "luts_per_mac"}, where);
      const int a = detail::require<int>(e, "a", where);
      const int w = detail::require<int>(e, "w", where);
      const double luts = detail::require<double>(e, "luts_per_mac", where);
      if (a < 1 || a > 8 || w < 1 || w > 8) throw ValidationError(where + ": a and w must be in 1..8");
      if (!(luts > 0.0)) throw ValidationError(where + ": luts_per_mac must be positive");
      if (!table.entries.emplace(std::pair{a, w}, luts).second) {
        throw ValidationError(where + ": duplicate entry");
      }
    }
  }
  return table;
}

CostTable load_cost_table(const std::string& path) {
  return parse_cost_table(detail::read_file(path));
}

std::string serialize_cost_table(const CostTable& table) {
  json entries = json::array();
  for (const auto& [key, luts] : table.entries) {
    entries.push_back({{"a", key.first}, {"w", key.second}, {"luts_per_mac", luts}});
  }
  json doc = {{"entries", entries}, {"use_default_rule", table.use_default_rule}};
  return doc.dump(2) + "\n";
}

FoldingConfig parse_folding(std::string_view text) {
  const json doc = detail::parse_json(text);
  if (!doc.is_object()) throw ParseError("folding: expected a JSON object");
  detail::reject_unknown(doc, {"m", "layers"}, "folding");
  FoldingConfig fold;
  fold.m = detail::optional<int>(doc, "m", "folding").value_or(1);
  const json& layers = detail::require_array(doc, "layers", "folding");
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const std::string where = "folding.layers[" + std::to_string(i) + "]";
    const json& l = layers[i];
    if (!l.is_object()) throw ParseError(where + ": expected an object");
    detail::reject_unknown(l, {"pe", "simd"}, where);
    fold.per_layer.push_back(
        {detail::require<int>(l, "pe", where), detail::require<int>(l, "simd", where)});
  }
  return fold;
}

FoldingConfig load_folding(const std::string& path) {
  return parse_folding(detail::read_file(path));
}

std::string serialize_folding(const FoldingConfig& fold) {
  json layers = json::array();
  for (const auto& f : fold.per_layer) layers.push_back({{"pe", f.pe}, {"simd", f.simd}});
  json doc = {{"m", fold.m}, {"layers", layers}};
  return doc.dump(2) + "\n";
}

}  // namespace qnnflow
