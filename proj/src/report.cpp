#include "qnnflow/report.hpp"

#include <cstdio>
#include <sstream>

#include "qnnflow/errors.hpp"

namespace qnnflow {

using nlohmann::json;

namespace {

Eq2Mode eq2_from(const std::string& s) {
  if (s == "faithful") return Eq2Mode::faithful;
  if (s == "corrected") return Eq2Mode::corrected;
  throw ParseError("unknown eq2 mode '" + s + "'");
}

LayerKind kind_from(const std::string& s) {
  for (auto k : {LayerKind::conv, LayerKind::fully_connected, LayerKind::max_pool}) {
    if (to_string(k) == s) return k;
  }
  throw ParseError("unknown layer kind '" + s + "'");
}

MoveKind move_from(const std::string& s) {
  for (auto k : {MoveKind::simd, MoveKind::pe, MoveKind::multi_vector}) {
    if (to_string(k) == s) return k;
  }
  throw ParseError("unknown move kind '" + s + "'");
}

std::string axis_name(CostAxis a) {
  return a == CostAxis::lower_is_better ? "lower_is_better" : "higher_is_better";
}

CostAxis axis_from(const std::string& s) {
  if (s == "lower_is_better") return CostAxis::lower_is_better;
  if (s == "higher_is_better") return CostAxis::higher_is_better;
  throw ParseError("unknown cost axis '" + s + "'");
}

template <class T>
json opt(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

template <class T>
std::optional<T> opt_from(const json& j, const char* key) {
  const json& v = j.at(key);
  if (v.is_null()) return std::nullopt;
  return v.get<T>();
}

void to_json_stage(json& j, const StageReport& s) {
  j = json{{"name", s.name},
           {"busy_cycles", s.busy},
           {"starved_cycles", s.starved},
           {"blocked_cycles", s.blocked},
           {"first_output_cycle", opt(s.first_output_cycle)}};
}

StageReport stage_from(const json& j) {
  StageReport s;
  s.name = j.at("name").get<std::string>();
  s.busy = j.at("busy_cycles").get<std::uint64_t>();
  s.starved = j.at("starved_cycles").get<std::uint64_t>();
  s.blocked = j.at("blocked_cycles").get<std::uint64_t>();
  s.first_output_cycle = opt_from<std::uint64_t>(j, "first_output_cycle");
  return s;
}

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

std::string folding_text(const FoldingConfig& f) {
  std::ostringstream os;
  os << "M=" << f.m << " [";
  for (std::size_t i = 0; i < f.per_layer.size(); ++i) {
    os << (i ? " " : "") << "PE" << f.per_layer[i].pe << "/SIMD" << f.per_layer[i].simd;
  }
  os << "]";
  return os.str();
}

void resource_table(std::ostream& os, const ResourceEstimate& res, const PerfEstimate& perf) {
  os << "layer  II(cycles)  BRAM_swu(blocks)  BRAM_weights(blocks)  WM(words)  LUTs  acc_bits\n";
  for (std::size_t i = 0; i < res.per_layer.size(); ++i) {
    const auto& l = res.per_layer[i];
    os << l.layer_index << "  " << perf.per_layer_ii.at(i) << "  " << l.bram_swu << "  " << l.bram_weights
       << "  " << l.wm_depth << "  " << l.luts << "  " << l.accumulator_bits
       << (i == perf.bottleneck_index ? "  <- bottleneck" : "") << "\n";
  }
  os << "total BRAM: " << res.bram_total << " blocks (" << fmt("%.2f", res.bram_fraction * 100.0)
     << "% of budget)\n";
  os << "total LUTs: " << res.lut_total << " (" << fmt("%.2f", res.lut_fraction * 100.0)
     << "% of budget)\n";
}

void perf_text(std::ostream& os, const PerfEstimate& perf) {
  os << "clock: " << fmt("%.3f", perf.clock_hz / 1e6) << " MHz\n";
  os << "max II: " << perf.max_ii() << " cycles\n";
  os << "throughput: " << fmt("%.1f", perf.fps) << " fps\n";
  os << "latency (serial bound): " << fmt("%.4f", perf.latency_s * 1e3) << " ms\n";
}

}  // namespace

void to_json(json& j, const FoldingConfig& v) {
  json layers = json::array();
  for (const auto& l : v.per_layer) layers.push_back({{"pe", l.pe}, {"simd", l.simd}});
  j = json{{"m", v.m}, {"layers", layers}};
}

void from_json(const json& j, FoldingConfig& v) {
  v.m = j.at("m").get<int>();
  v.per_layer.clear();
  for (const auto& l : j.at("layers")) v.per_layer.push_back({l.at("pe").get<int>(), l.at("simd").get<int>()});
}

void to_json(json& j, const ResourceEstimate& v) {
  json layers = json::array();
  for (const auto& l : v.per_layer) {
    layers.push_back({{"layer", l.layer_index},
                      {"bram_swu_blocks", l.bram_swu},
                      {"bram_weight_blocks", l.bram_weights},
                      {"wm_depth_words", l.wm_depth},
                      {"luts", l.luts},
                      {"accumulator_bits", l.accumulator_bits}});
  }
  j = json{{"layers", layers},
           {"bram_total_blocks", v.bram_total},
           {"lut_total", v.lut_total},
           {"bram_fraction", v.bram_fraction},
           {"lut_fraction", v.lut_fraction}};
}

void from_json(const json& j, ResourceEstimate& v) {
  v.per_layer.clear();
  for (const auto& l : j.at("layers")) {
    LayerResources r;
    r.layer_index = l.at("layer").get<std::size_t>();
    r.bram_swu = l.at("bram_swu_blocks").get<std::int64_t>();
    r.bram_weights = l.at("bram_weight_blocks").get<std::int64_t>();
    r.wm_depth = l.at("wm_depth_words").get<std::int64_t>();
    r.luts = l.at("luts").get<std::int64_t>();
    r.accumulator_bits = l.at("accumulator_bits").get<int>();
    v.per_layer.push_back(r);
  }
  v.bram_total = j.at("bram_total_blocks").get<std::int64_t>();
  v.lut_total = j.at("lut_total").get<std::int64_t>();
  v.bram_fraction = j.at("bram_fraction").get<double>();
  v.lut_fraction = j.at("lut_fraction").get<double>();
}

void to_json(json& j, const PerfEstimate& v) {
  j = json{{"layer_ii_cycles", v.per_layer_ii}, {"bottleneck", v.bottleneck_index},
           {"m", v.m},                          {"clock_hz", v.clock_hz},
           {"fps", v.fps},                      {"latency_s", v.latency_s}};
}

void from_json(const json& j, PerfEstimate& v) {
  v.per_layer_ii = j.at("layer_ii_cycles").get<std::vector<std::int64_t>>();
  v.bottleneck_index = j.at("bottleneck").get<std::size_t>();
  v.m = j.at("m").get<int>();
  v.clock_hz = j.at("clock_hz").get<double>();
  v.fps = j.at("fps").get<double>();
  v.latency_s = j.at("latency_s").get<double>();
}

void to_json(json& j, const ExploreResult& v) {
  json trace = json::array();
  for (const auto& s : v.trace) {
    trace.push_back({{"iteration", s.iteration},
                     {"move", std::string(to_string(s.kind))},
                     {"compute_layer", s.compute_layer},
                     {"from", s.from},
                     {"to", s.to},
                     {"ii_before_cycles", s.ii_before},
                     {"ii_after_cycles", s.ii_after},
                     {"delta_luts", s.delta_luts},
                     {"fps_after", s.fps_after}});
  }
  j = json{{"folding", v.folding}, {"resources", v.resources}, {"perf", v.perf}, {"trace", trace}};
}

void from_json(const json& j, ExploreResult& v) {
  v.folding = j.at("folding").get<FoldingConfig>();
  v.resources = j.at("resources").get<ResourceEstimate>();
  v.perf = j.at("perf").get<PerfEstimate>();
  v.trace.clear();
  for (const auto& t : j.at("trace")) {
    ExploreStep s;
    s.iteration = t.at("iteration").get<int>();
    s.kind = move_from(t.at("move").get<std::string>());
    s.compute_layer = t.at("compute_layer").get<std::size_t>();
    s.from = t.at("from").get<int>();
    s.to = t.at("to").get<int>();
    s.ii_before = t.at("ii_before_cycles").get<std::int64_t>();
    s.ii_after = t.at("ii_after_cycles").get<std::int64_t>();
    s.delta_luts = t.at("delta_luts").get<std::int64_t>();
    s.fps_after = t.at("fps_after").get<double>();
    v.trace.push_back(s);
  }
}

void to_json(json& j, const CycleReport& v) {
  json layers = json::array();
  for (const auto& l : v.layers) {
    json swu, mvtu;
    to_json_stage(swu, l.swu);
    to_json_stage(mvtu, l.mvtu);
    layers.push_back({{"layer", l.layer_index},
                      {"kind", std::string(to_string(l.kind))},
                      {"swu", swu},
                      {"compute", mvtu},
                      {"analytic_ii_cycles", l.analytic_ii},
                      {"busy_cycles_per_batch", l.busy_per_batch},
                      {"weight_block_fetches", l.weight_block_fetches},
                      {"weight_row_fetches", l.weight_row_fetches},
                      {"peak_swu_bits", l.peak_swu_bits},
                      {"swu_bits_bound", l.swu_bits_bound}});
  }
  j = json{{"layers", layers},
           {"total_cycles", v.total_cycles},
           {"first_output_cycle", v.first_output_cycle},
           {"batch_completion_cycles", v.batch_completion_cycles},
           {"cycles_per_batch", v.cycles_per_batch},
           {"m", v.m}};
}

void from_json(const json& j, CycleReport& v) {
  v.layers.clear();
  for (const auto& l : j.at("layers")) {
    LayerCycleReport r;
    r.layer_index = l.at("layer").get<std::size_t>();
    r.kind = kind_from(l.at("kind").get<std::string>());
    r.swu = stage_from(l.at("swu"));
    r.mvtu = stage_from(l.at("compute"));
    r.analytic_ii = l.at("analytic_ii_cycles").get<std::int64_t>();
    r.busy_per_batch = l.at("busy_cycles_per_batch").get<double>();
    r.weight_block_fetches = l.at("weight_block_fetches").get<std::uint64_t>();
    r.weight_row_fetches = l.at("weight_row_fetches").get<std::uint64_t>();
    r.peak_swu_bits = l.at("peak_swu_bits").get<std::uint64_t>();
    r.swu_bits_bound = l.at("swu_bits_bound").get<std::uint64_t>();
    v.layers.push_back(r);
  }
  v.total_cycles = j.at("total_cycles").get<std::uint64_t>();
  v.first_output_cycle = j.at("first_output_cycle").get<std::uint64_t>();
  v.batch_completion_cycles = j.at("batch_completion_cycles").get<std::vector<std::uint64_t>>();
  v.cycles_per_batch = j.at("cycles_per_batch").get<std::uint64_t>();
  v.m = j.at("m").get<int>();
}

void to_json(json& j, const RooflineCurve& v) {
  json pts = json::array();
  for (const auto& p : v.points) pts.push_back({p.arithmetic_intensity, p.attainable_performance});
  j = json{{"label", v.label},
           {"a_bits", v.a_bits},
           {"w_bits", v.w_bits},
           {"compute_peak_ops_per_s", v.compute_peak},
           {"ridge_ops_per_byte", v.ridge_intensity},
           {"points", pts}};
}

void from_json(const json& j, RooflineCurve& v) {
  v.label = j.at("label").get<std::string>();
  v.a_bits = j.at("a_bits").get<int>();
  v.w_bits = j.at("w_bits").get<int>();
  v.compute_peak = j.at("compute_peak_ops_per_s").get<double>();
  v.ridge_intensity = j.at("ridge_ops_per_byte").get<double>();
  v.points.clear();
  for (const auto& p : j.at("points")) v.points.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
}

void to_json(json& j, const ParetoRecord& v) {
  j = json{{"label", v.label}, {"error_rate", v.error_rate}, {"cost", v.hw_cost}};
}

void from_json(const json& j, ParetoRecord& v) {
  v.label = j.at("label").get<std::string>();
  v.error_rate = j.at("error_rate").get<double>();
  v.hw_cost = j.at("cost").get<double>();
}

void to_json(json& j, const EstimateReport& v) {
  j = json{{"topology", v.topology},
           {"device", v.device},
           {"eq2_mode", std::string(to_string(v.eq2_mode))},
           {"utilization_cap", v.utilization_cap},
           {"folding", v.folding},
           {"resources", v.resources},
           {"perf", v.perf},
           {"violations", v.violations},
           {"feasible", v.feasible()}};
}

void from_json(const json& j, EstimateReport& v) {
  v.topology = j.at("topology").get<std::string>();
  v.device = j.at("device").get<std::string>();
  v.eq2_mode = eq2_from(j.at("eq2_mode").get<std::string>());
  v.utilization_cap = j.at("utilization_cap").get<double>();
  v.folding = j.at("folding").get<FoldingConfig>();
  v.resources = j.at("resources").get<ResourceEstimate>();
  v.perf = j.at("perf").get<PerfEstimate>();
  v.violations = j.at("violations").get<std::vector<std::string>>();
}

void to_json(json& j, const ExploreReport& v) {
  j = json{{"topology", v.topology},
           {"device", v.device},
           {"eq2_mode", std::string(to_string(v.eq2_mode))},
           {"utilization_cap", v.utilization_cap},
           {"result", v.result}};
}

void from_json(const json& j, ExploreReport& v) {
  v.topology = j.at("topology").get<std::string>();
  v.device = j.at("device").get<std::string>();
  v.eq2_mode = eq2_from(j.at("eq2_mode").get<std::string>());
  v.utilization_cap = j.at("utilization_cap").get<double>();
  v.result = j.at("result").get<ExploreResult>();
}

void to_json(json& j, const SimulateReport& v) {
  j = json{{"topology", v.topology}, {"folding", v.folding}, {"images", v.images}, {"cycles", v.cycles}};
}

void from_json(const json& j, SimulateReport& v) {
  v.topology = j.at("topology").get<std::string>();
  v.folding = j.at("folding").get<FoldingConfig>();
  v.images = j.at("images").get<std::uint32_t>();
  v.cycles = j.at("cycles").get<CycleReport>();
}

void to_json(json& j, const ValidateReport& v) {
  json rows = json::array();
  for (const auto& r : v.layers) {
    rows.push_back({{"layer", r.layer_index},
                    {"analytic_ii_cycles", r.analytic_ii},
                    {"busy_cycles_per_batch", r.busy_per_batch},
                    {"stall_cycles_per_batch", r.stall_per_batch}});
  }
  j = json{{"topology", v.topology},
           {"folding", v.folding},
           {"layers", rows},
           {"analytic_cycles_per_batch", v.analytic_cycles_per_batch},
           {"simulated_cycles_per_batch", v.simulated_cycles_per_batch},
           {"gap_percent", v.gap_percent},
           {"tolerance_percent", v.tolerance_percent},
           {"clock_hz", opt(v.clock_hz)},
           {"analytic_fps", opt(v.analytic_fps)},
           {"simulated_fps", opt(v.simulated_fps)},
           {"within_tolerance", v.within_tolerance()}};
}

void from_json(const json& j, ValidateReport& v) {
  v.topology = j.at("topology").get<std::string>();
  v.folding = j.at("folding").get<FoldingConfig>();
  v.layers.clear();
  for (const auto& r : j.at("layers")) {
    v.layers.push_back({r.at("layer").get<std::size_t>(), r.at("analytic_ii_cycles").get<std::int64_t>(),
                        r.at("busy_cycles_per_batch").get<double>(),
                        r.at("stall_cycles_per_batch").get<double>()});
  }
  v.analytic_cycles_per_batch = j.at("analytic_cycles_per_batch").get<std::int64_t>();
  v.simulated_cycles_per_batch = j.at("simulated_cycles_per_batch").get<std::uint64_t>();
  v.gap_percent = j.at("gap_percent").get<double>();
  v.tolerance_percent = j.at("tolerance_percent").get<double>();
  v.clock_hz = opt_from<double>(j, "clock_hz");
  v.analytic_fps = opt_from<double>(j, "analytic_fps");
  v.simulated_fps = opt_from<double>(j, "simulated_fps");
}

void to_json(json& j, const RooflineReport& v) {
  j = json{{"device", v.device},
           {"clock_hz", v.clock_hz},
           {"utilization_cap", v.utilization_cap},
           {"mem_bandwidth_bytes_per_s", v.mem_bandwidth},
           {"curves", v.curves}};
}

void from_json(const json& j, RooflineReport& v) {
  v.device = j.at("device").get<std::string>();
  v.clock_hz = j.at("clock_hz").get<double>();
  v.utilization_cap = j.at("utilization_cap").get<double>();
  v.mem_bandwidth = j.at("mem_bandwidth_bytes_per_s").get<double>();
  v.curves = j.at("curves").get<std::vector<RooflineCurve>>();
}

void to_json(json& j, const ParetoReport& v) {
  json entries = json::array();
  for (const auto& e : v.entries) {
    json r = e.record;
    r["a_bits"] = e.a_bits;
    r["w_bits"] = e.w_bits;
    r["on_front"] = e.on_front;
    entries.push_back(std::move(r));
  }
  j = json{{"error_metric", v.error_metric},
           {"cost_metric", v.cost_metric},
           {"axis", axis_name(v.axis)},
           {"entries", entries},
           {"front", v.front}};
}

void from_json(const json& j, ParetoReport& v) {
  v.error_metric = j.at("error_metric").get<std::string>();
  v.cost_metric = j.at("cost_metric").get<std::string>();
  v.axis = axis_from(j.at("axis").get<std::string>());
  v.entries.clear();
  for (const auto& e : j.at("entries")) {
    v.entries.push_back({e.get<ParetoRecord>(), e.at("a_bits").get<int>(), e.at("w_bits").get<int>(),
                         e.at("on_front").get<bool>()});
  }
  v.front = j.at("front").get<std::vector<ParetoRecord>>();
}

std::string format_text(const EstimateReport& r) {
  std::ostringstream os;
  os << "topology: " << r.topology << "\n";
  os << "device: " << r.device << " (weight memory: " << to_string(r.eq2_mode) << ")\n";
  os << "folding: " << folding_text(r.folding) << "\n";
  resource_table(os, r.resources, r.perf);
  perf_text(os, r.perf);
  os << "utilization cap: " << fmt("%.1f", r.utilization_cap * 100.0) << "%\n";
  if (r.feasible()) {
    os << "feasible: yes\n";
  } else {
    os << "feasible: no (over cap: ";
    for (std::size_t i = 0; i < r.violations.size(); ++i) os << (i ? ", " : "") << r.violations[i];
    os << ")\n";
  }
  return os.str();
}

std::string format_text(const ExploreReport& r) {
  std::ostringstream os;
  const auto& res = r.result;
  os << "topology: " << r.topology << "\n";
  os << "device: " << r.device << " (weight memory: " << to_string(r.eq2_mode)
     << ", cap " << fmt("%.1f", r.utilization_cap * 100.0) << "%)\n";
  os << "folding: " << folding_text(res.folding) << "\n";
  resource_table(os, res.resources, res.perf);
  perf_text(os, res.perf);
  os << "trace (" << res.trace.size() << " moves):\n";
  for (const auto& s : res.trace) {
    os << "  " << s.iteration << ": " << to_string(s.kind);
    // Name the topology layer so the trace lines up with the table above.
    if (s.kind != MoveKind::multi_vector && s.compute_layer < res.resources.per_layer.size()) {
      os << " layer " << res.resources.per_layer[s.compute_layer].layer_index;
    }
    os << " " << s.from << " -> " << s.to << ", II " << s.ii_before << " -> " << s.ii_after
       << " cycles, +" << s.delta_luts << " LUTs, " << fmt("%.1f", s.fps_after) << " fps\n";
  }
  return os.str();
}

std::string format_text(const SimulateReport& r) {
  std::ostringstream os;
  const auto& c = r.cycles;
  os << "topology: " << r.topology << "\n";
  os << "folding: " << folding_text(r.folding) << "\n";
  os << "images: " << r.images << " (" << c.batch_completion_cycles.size() << " batches of " << c.m << ")\n";
  os << "layer  kind  II(cycles)  busy/batch(cycles)  swu_stall(cycles)  compute_stall(cycles)  "
        "weight_blocks  peak_swu(bits)/bound(bits)\n";
  for (const auto& l : c.layers) {
    os << l.layer_index << "  " << to_string(l.kind) << "  " << l.analytic_ii << "  "
       << fmt("%.1f", l.busy_per_batch) << "  " << l.swu.stall() << "  " << l.mvtu.stall() << "  "
       << l.weight_block_fetches << "  " << l.peak_swu_bits << "/" << l.swu_bits_bound << "\n";
  }
  os << "total: " << c.total_cycles << " cycles\n";
  os << "first output: cycle " << c.first_output_cycle << "\n";
  os << "steady state: " << c.cycles_per_batch << " cycles/batch\n";
  return os.str();
}

std::string format_text(const ValidateReport& r) {
  std::ostringstream os;
  os << "topology: " << r.topology << "\n";
  os << "folding: " << folding_text(r.folding) << "\n";
  os << "layer  analytic_II(cycles)  simulated_busy/batch(cycles)  stall/batch(cycles)\n";
  for (const auto& l : r.layers) {
    os << l.layer_index << "  " << l.analytic_ii << "  " << fmt("%.1f", l.busy_per_batch) << "  "
       << fmt("%.1f", l.stall_per_batch) << "\n";
  }
  os << "analytic: " << r.analytic_cycles_per_batch << " cycles/batch";
  if (r.analytic_fps) os << ", " << fmt("%.1f", *r.analytic_fps) << " fps";
  os << "\nsimulated: " << r.simulated_cycles_per_batch << " cycles/batch";
  if (r.simulated_fps) os << ", " << fmt("%.1f", *r.simulated_fps) << " fps";
  os << "\ngap: " << fmt("%+.2f", r.gap_percent) << "% (tolerance " << fmt("%.2f", r.tolerance_percent)
     << "%): " << (r.within_tolerance() ? "ok" : "exceeded") << "\n";
  return os.str();
}

std::string format_pareto_csv(const ParetoReport& r) {
  std::ostringstream os;
  os << "label,a_bits,w_bits,error_rate,cost,on_front\n";
  for (const auto& e : r.entries) {
    os << e.record.label << "," << e.a_bits << "," << e.w_bits << "," << fmt("%.6g", e.record.error_rate)
       << "," << fmt("%.6g", e.record.hw_cost) << "," << (e.on_front ? 1 : 0) << "\n";
  }
  return os.str();
}

}  // namespace qnnflow
