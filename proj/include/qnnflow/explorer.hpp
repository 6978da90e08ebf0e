#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qnnflow/costmodel.hpp"
#include "qnnflow/perfmodel.hpp"
#include "qnnflow/topology.hpp"

namespace qnnflow {

struct ExploreGoal {
  double utilization_cap = 0.8;  // applied to every resource
  double clock_hz = 250e6;
  std::optional<double> target_fps;
  int max_m = 8;
  Eq2Mode eq2_mode = Eq2Mode::faithful;
};

enum class MoveKind { simd, pe, multi_vector };

std::string_view to_string(MoveKind kind);

/// One accepted step of the greedy search.
struct ExploreStep {
  int iteration = 0;
  MoveKind kind = MoveKind::simd;
  std::size_t compute_layer = 0;  // position in the folding; unused for multi_vector
  int from = 0;
  int to = 0;
  std::int64_t ii_before = 0;  // bottleneck II before the move
  std::int64_t ii_after = 0;   // moved layer's II after the move
  std::int64_t delta_luts = 0;
  double fps_after = 0.0;

  friend bool operator==(const ExploreStep&, const ExploreStep&) = default;
};

struct ExploreResult {
  FoldingConfig folding;
  ResourceEstimate resources;
  PerfEstimate perf;
  std::vector<ExploreStep> trace;

  friend bool operator==(const ExploreResult&, const ExploreResult&) = default;
};

/// PE = SIMD = M = 1 everywhere.
FoldingConfig minimal_folding(const NetworkTopology& topo);

/// Smallest divisor of `n` greater than `current`, or nullopt at n.
std::optional<int> next_divisor(int n, int current);

/// A single-step candidate: one divisor step of SIMD or PE on one layer, or
/// M + 1.
struct CandidateMove {
  MoveKind kind = MoveKind::simd;
  std::size_t compute_layer = 0;
  FoldingConfig folding;
};

/// Every single-step move from `fold` across all layers plus M + 1 (when
/// m < max_m).
std::vector<CandidateMove> enumerate_moves(const NetworkTopology& topo, const FoldingConfig& fold,
                                           int max_m);

/// Greedy balanced scaling. Starting from the minimal folding, repeatedly
/// relieves the bottleneck layer (max II, lowest index on ties) with the
/// feasible SIMD or PE step of best II reduction per added LUT (ties: fewer
/// LUTs, then SIMD before PE). When the bottleneck cannot move, tries M + 1.
/// Stops when nothing fits or target_fps is reached.
///
/// Throws DeviceUnsuitable when the minimal folding exceeds the cap.
ExploreResult explore(const NetworkTopology& topo, const DeviceModel& dev, const CostTable& table,
                      const ExploreGoal& goal);

enum class CostAxis { lower_is_better, higher_is_better };

struct ParetoRecord {
  std::string label;
  double error_rate = 0.0;  // fraction in [0, 1]
  double hw_cost = 0.0;

  friend bool operator==(const ParetoRecord&, const ParetoRecord&) = default;
};

/// True when `a` dominates `b`: error no worse, cost no worse, one strictly better.
bool dominates(const ParetoRecord& a, const ParetoRecord& b, CostAxis axis);

/// Non-dominated subset sorted by ascending hw_cost (ties by error, label).
/// Throws ValidationError if an error rate is outside [0, 1] or NaN.
std::vector<ParetoRecord> pareto_front(std::vector<ParetoRecord> records, CostAxis axis);

/// Accuracy data entry. Error rates are stored in percent as published.
struct AccuracyRecord {
  std::string label;
  double top1_err = 0.0;
  std::optional<double> top5_err;  // not every dataset reports top-5
  int a_bits = 1;
  int w_bits = 1;
  std::optional<double> kfps_est;       // published estimate, when available
  std::optional<double> kfps_achieved;  // published measurement, when available
  std::string group;               // e.g. a network variant; empty when unset
};

std::vector<AccuracyRecord> parse_accuracy(std::string_view text);
std::vector<AccuracyRecord> load_accuracy(const std::string& path);

}  // namespace qnnflow
