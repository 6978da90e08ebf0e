#pragma once

// Report records produced by the command-line front end. The machine format
// is JSON; every record converts to and from nlohmann::json without loss.

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "qnnflow/costmodel.hpp"
#include "qnnflow/explorer.hpp"
#include "qnnflow/perfmodel.hpp"
#include "qnnflow/simulator.hpp"

namespace qnnflow {

struct EstimateReport {
  std::string topology;
  std::string device;
  Eq2Mode eq2_mode = Eq2Mode::faithful;
  double utilization_cap = 0.8;
  FoldingConfig folding;
  ResourceEstimate resources;
  PerfEstimate perf;
  std::vector<std::string> violations;

  bool feasible() const noexcept { return violations.empty(); }
  friend bool operator==(const EstimateReport&, const EstimateReport&) = default;
};

struct ExploreReport {
  std::string topology;
  std::string device;
  Eq2Mode eq2_mode = Eq2Mode::faithful;
  double utilization_cap = 0.8;
  ExploreResult result;

  friend bool operator==(const ExploreReport&, const ExploreReport&) = default;
};

struct SimulateReport {
  std::string topology;
  FoldingConfig folding;
  std::uint32_t images = 0;
  CycleReport cycles;

  friend bool operator==(const SimulateReport&, const SimulateReport&) = default;
};

struct ValidateRow {
  std::size_t layer_index = 0;  // topology layer
  std::int64_t analytic_ii = 0;
  double busy_per_batch = 0.0;
  double stall_per_batch = 0.0;

  friend bool operator==(const ValidateRow&, const ValidateRow&) = default;
};

struct ValidateReport {
  std::string topology;
  FoldingConfig folding;
  std::vector<ValidateRow> layers;
  std::int64_t analytic_cycles_per_batch = 0;  // max II
  std::uint64_t simulated_cycles_per_batch = 0;
  double gap_percent = 0.0;  // (simulated - analytic) / analytic
  double tolerance_percent = 15.0;
  std::optional<double> clock_hz;
  std::optional<double> analytic_fps;
  std::optional<double> simulated_fps;

  bool within_tolerance() const noexcept { return gap_percent <= tolerance_percent; }
  friend bool operator==(const ValidateReport&, const ValidateReport&) = default;
};

struct RooflineReport {
  std::string device;
  double clock_hz = 0.0;
  double utilization_cap = 0.8;
  double mem_bandwidth = 0.0;  // bytes / second
  std::vector<RooflineCurve> curves;

  friend bool operator==(const RooflineReport&, const RooflineReport&) = default;
};

struct ParetoEntry {
  ParetoRecord record;
  int a_bits = 1;
  int w_bits = 1;
  bool on_front = false;

  friend bool operator==(const ParetoEntry&, const ParetoEntry&) = default;
};

struct ParetoReport {
  std::string error_metric;  // "top1" or "top5"
  std::string cost_metric;   // "file-fps", "explore-fps" or "explore-luts"
  CostAxis axis = CostAxis::higher_is_better;
  std::vector<ParetoEntry> entries;  // input order
  std::vector<ParetoRecord> front;   // sorted by ascending cost

  friend bool operator==(const ParetoReport&, const ParetoReport&) = default;
};

void to_json(nlohmann::json& j, const FoldingConfig& v);
void from_json(const nlohmann::json& j, FoldingConfig& v);
void to_json(nlohmann::json& j, const ResourceEstimate& v);
void from_json(const nlohmann::json& j, ResourceEstimate& v);
void to_json(nlohmann::json& j, const PerfEstimate& v);
void from_json(const nlohmann::json& j, PerfEstimate& v);
void to_json(nlohmann::json& j, const ExploreResult& v);
void from_json(const nlohmann::json& j, ExploreResult& v);
void to_json(nlohmann::json& j, const CycleReport& v);
void from_json(const nlohmann::json& j, CycleReport& v);
void to_json(nlohmann::json& j, const RooflineCurve& v);
void from_json(const nlohmann::json& j, RooflineCurve& v);
void to_json(nlohmann::json& j, const ParetoRecord& v);
void from_json(const nlohmann::json& j, ParetoRecord& v);

void to_json(nlohmann::json& j, const EstimateReport& v);
void from_json(const nlohmann::json& j, EstimateReport& v);
void to_json(nlohmann::json& j, const ExploreReport& v);
void from_json(const nlohmann::json& j, ExploreReport& v);
void to_json(nlohmann::json& j, const SimulateReport& v);
void from_json(const nlohmann::json& j, SimulateReport& v);
void to_json(nlohmann::json& j, const ValidateReport& v);
void from_json(const nlohmann::json& j, ValidateReport& v);
void to_json(nlohmann::json& j, const RooflineReport& v);
void from_json(const nlohmann::json& j, RooflineReport& v);
void to_json(nlohmann::json& j, const ParetoReport& v);
void from_json(const nlohmann::json& j, ParetoReport& v);

// Human-readable renderings with units.
std::string format_text(const EstimateReport& r);
std::string format_text(const ExploreReport& r);
std::string format_text(const SimulateReport& r);
std::string format_text(const ValidateReport& r);
std::string format_pareto_csv(const ParetoReport& r);

}  // namespace qnnflow
