#include "qnnflow/explorer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "json_util.hpp"
#include "qnnflow/errors.hpp"

namespace qnnflow {

using nlohmann::json;

std::string_view to_string(MoveKind kind) {
  switch (kind) {
    case MoveKind::simd: return "simd";
    case MoveKind::pe: return "pe";
    case MoveKind::multi_vector: return "m";
  }
  return "?";
}

FoldingConfig minimal_folding(const NetworkTopology& topo) {
  FoldingConfig fold;
  fold.m = 1;
  fold.per_layer.assign(compute_layer_indices(topo).size(), LayerFolding{1, 1});
  return fold;
}

std::optional<int> next_divisor(int n, int current) {
  for (int d = current + 1; d <= n; ++d) {
    if (n % d == 0) return d;
  }
  return std::nullopt;
}

std::vector<CandidateMove> enumerate_moves(const NetworkTopology& topo, const FoldingConfig& fold,
                                           int max_m) {
  const auto compute = compute_layer_indices(topo);
  std::vector<CandidateMove> moves;
  for (std::size_t i = 0; i < compute.size(); ++i) {
    const LayerSpec& layer = topo.layers[compute[i]];
    if (auto simd = next_divisor(layer.c, fold.per_layer[i].simd)) {
      CandidateMove mv{MoveKind::simd, i, fold};
      mv.folding.per_layer[i].simd = *simd;
      moves.push_back(std::move(mv));
    }
    if (auto pe = next_divisor(layer.c_out, fold.per_layer[i].pe)) {
      CandidateMove mv{MoveKind::pe, i, fold};
      mv.folding.per_layer[i].pe = *pe;
      moves.push_back(std::move(mv));
    }
  }
  if (fold.m < max_m) {
    CandidateMove mv{MoveKind::multi_vector, 0, fold};
    mv.folding.m += 1;
    moves.push_back(std::move(mv));
  }
  return moves;
}

namespace {

struct Evaluated {
  CandidateMove move;
  ResourceEstimate resources;
  std::int64_t delta_ii = 0;
  std::int64_t delta_luts = 0;
};

// Higher II reduction per LUT wins, then fewer LUTs; earlier candidates
// (SIMD before PE) win remaining ties.
bool better(const Evaluated& a, const Evaluated& b) {
  __extension__ const __int128 lhs = static_cast<__int128>(a.delta_ii) * b.delta_luts;
  __extension__ const __int128 rhs = static_cast<__int128>(b.delta_ii) * a.delta_luts;
  if (lhs != rhs) return lhs > rhs;
  return a.delta_luts < b.delta_luts;
}

}  // namespace

ExploreResult explore(const NetworkTopology& topo, const DeviceModel& dev, const CostTable& table,
                      const ExploreGoal& goal) {
  if (!(goal.utilization_cap > 0.0) || goal.utilization_cap > 1.0) {
    throw ValidationError("utilization cap must be in (0, 1]");
  }
  if (goal.max_m < 1) throw ValidationError("max_m must be >= 1");
  validate(topo);
  const auto compute = compute_layer_indices(topo);

  ExploreResult result;
  result.folding = minimal_folding(topo);
  result.resources = estimate_network(topo, result.folding, dev, table, goal.eq2_mode);
  if (const auto over = result.resources.violations(goal.utilization_cap); !over.empty()) {
    const double used = over.front() == "BRAM" ? result.resources.bram_fraction
                                                : result.resources.lut_fraction;
    throw DeviceUnsuitable(over.front(), "device unsuitable for topology: minimal design needs " +
                                             std::to_string(used * 100.0) + "% of " + dev.name +
                                             " " + over.front() + " (cap " +
                                             std::to_string(goal.utilization_cap * 100.0) + "%)");
  }
  result.perf = estimate_perf(topo, result.folding, goal.clock_hz);

  auto fits = [&](const FoldingConfig& f, ResourceEstimate& out) {
    out = estimate_network(topo, f, dev, table, goal.eq2_mode);
    return out.fits(goal.utilization_cap);
  };

  for (int iteration = 0;; ++iteration) {
    if (goal.target_fps && result.perf.fps >= *goal.target_fps) break;
    const std::size_t b = result.perf.bottleneck_index;
    const std::int64_t ii_before = result.perf.max_ii();
    const LayerSpec& layer = topo.layers[compute[b]];

    std::optional<Evaluated> best;
    for (const auto& mv : enumerate_moves(topo, result.folding, goal.max_m)) {
      if (mv.kind == MoveKind::multi_vector || mv.compute_layer != b) continue;
      Evaluated ev{mv, {}, 0, 0};
      if (!fits(mv.folding, ev.resources)) continue;
      ev.delta_ii = ii_before - layer_ii(layer, mv.folding.per_layer[b]);
      ev.delta_luts = ev.resources.lut_total - result.resources.lut_total;
      if (!best || better(ev, *best)) best = std::move(ev);
    }

    ExploreStep step;
    step.iteration = iteration;
    step.ii_before = ii_before;
    if (best) {
      const LayerFolding& before = result.folding.per_layer[b];
      const LayerFolding& after = best->move.folding.per_layer[b];
      step.kind = best->move.kind;
      step.compute_layer = b;
      step.from = step.kind == MoveKind::simd ? before.simd : before.pe;
      step.to = step.kind == MoveKind::simd ? after.simd : after.pe;
      step.ii_after = layer_ii(layer, after);
      step.delta_luts = best->delta_luts;
      result.folding = std::move(best->move.folding);
      result.resources = std::move(best->resources);
    } else {
      if (result.folding.m >= goal.max_m) break;
      FoldingConfig wider = result.folding;
      wider.m += 1;
      ResourceEstimate res;
      if (!fits(wider, res)) break;
      step.kind = MoveKind::multi_vector;
      step.compute_layer = b;
      step.from = result.folding.m;
      step.to = wider.m;
      step.ii_after = ii_before;
      step.delta_luts = res.lut_total - result.resources.lut_total;
      result.folding = std::move(wider);
      result.resources = std::move(res);
    }
    result.perf = estimate_perf(topo, result.folding, goal.clock_hz);
    step.fps_after = result.perf.fps;
    result.trace.push_back(step);
  }
  return result;
}

bool dominates(const ParetoRecord& a, const ParetoRecord& b, CostAxis axis) {
  const bool cost_ok = axis == CostAxis::lower_is_better ? a.hw_cost <= b.hw_cost : a.hw_cost >= b.hw_cost;
  const bool cost_strict = axis == CostAxis::lower_is_better ? a.hw_cost < b.hw_cost : a.hw_cost > b.hw_cost;
  return a.error_rate <= b.error_rate && cost_ok && (a.error_rate < b.error_rate || cost_strict);
}

std::vector<ParetoRecord> pareto_front(std::vector<ParetoRecord> records, CostAxis axis) {
  for (const auto& r : records) {
    if (!(r.error_rate >= 0.0 && r.error_rate <= 1.0)) {
      throw ValidationError("record '" + r.label + "': error rate must be in [0, 1]");
    }
    if (std::isnan(r.hw_cost)) throw ValidationError("record '" + r.label + "': cost is NaN");
  }
  auto better_cost = [axis](double a, double b) {
    return axis == CostAxis::lower_is_better ? a < b : a > b;
  };
  std::sort(records.begin(), records.end(), [&](const ParetoRecord& a, const ParetoRecord& b) {
    if (a.hw_cost != b.hw_cost) return better_cost(a.hw_cost, b.hw_cost);
    return a.error_rate < b.error_rate;
  });

  // Sweep groups of equal cost from best to worst. A record survives if its
  // error beats every record of strictly better cost and is the minimum of
  // its own group.
  std::vector<ParetoRecord> front;
  double best_error = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < records.size();) {
    std::size_t j = i;
    while (j < records.size() && records[j].hw_cost == records[i].hw_cost) ++j;
    const double group_min = records[i].error_rate;
    if (group_min < best_error) {
      for (std::size_t k = i; k < j && records[k].error_rate == group_min; ++k) {
        front.push_back(records[k]);
      }
    }
    best_error = std::min(best_error, group_min);
    i = j;
  }
  std::sort(front.begin(), front.end(), [](const ParetoRecord& a, const ParetoRecord& b) {
    if (a.hw_cost != b.hw_cost) return a.hw_cost < b.hw_cost;
    if (a.error_rate != b.error_rate) return a.error_rate < b.error_rate;
    return a.label < b.label;
  });
  return front;
}

std::vector<AccuracyRecord> parse_accuracy(std::string_view text) {
  const json doc = detail::parse_json(text);
  if (!doc.is_array()) throw ParseError("accuracy data: expected a JSON array");
  std::vector<AccuracyRecord> out;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const std::string where = "accuracy[" + std::to_string(i) + "]";
    const json& e = doc[i];
    if (!e.is_object()) throw ParseError(where + ": expected an object");
    detail::reject_unknown(
        e, {"label", "top1_err", "top5_err", "precision", "kfps_est", "kfps_achieved", "group"}, where);
    AccuracyRecord r;
    r.label = detail::require<std::string>(e, "label", where);
    r.top1_err = detail::require<double>(e, "top1_err", where);
    r.top5_err = detail::optional<double>(e, "top5_err", where);
    const json& p = detail::require_object(e, "precision", where);
    detail::reject_unknown(p, {"a", "w"}, where + ".precision");
    r.a_bits = detail::require<int>(p, "a", where + ".precision");
    r.w_bits = detail::require<int>(p, "w", where + ".precision");
    r.kfps_est = detail::optional<double>(e, "kfps_est", where);
    r.kfps_achieved = detail::optional<double>(e, "kfps_achieved", where);
    r.group = detail::optional<std::string>(e, "group", where).value_or("");
    for (double err : {r.top1_err, r.top5_err.value_or(0.0)}) {
      if (!(err >= 0.0 && err <= 100.0)) throw ValidationError(where + ": error rates are percentages in [0, 100]");
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<AccuracyRecord> load_accuracy(const std::string& path) {
  return parse_accuracy(detail::read_file(path));
}

}  // namespace qnnflow
