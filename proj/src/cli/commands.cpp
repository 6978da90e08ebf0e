#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "qnnflow/cli.hpp"
#include "qnnflow/errors.hpp"
#include "qnnflow/explorer.hpp"
#include "qnnflow/perfmodel.hpp"
#include "qnnflow/report.hpp"
#include "qnnflow/simulator.hpp"

namespace qnnflow {

namespace {

using nlohmann::json;

struct Config {
  std::string topology;
  std::string device;
  std::string cost_table;
  std::string folding;
  std::optional<int> m;
  std::optional<double> clock_mhz;
  double cap = 0.8;
  std::string eq2_mode = "faithful";
  std::string relu_mode = "standard";
  std::string format = "text";
  std::string out;

  // explore
  std::optional<double> target_fps;
  int max_m = 8;
  std::string folding_out;

  // simulate / validate
  std::string input;
  std::vector<std::string> weights;
  std::string thresholds;
  std::uint64_t seed = 1;
  std::optional<std::uint32_t> images;
  std::uint32_t batches = 3;
  std::size_t queue_capacity = 0;
  std::string output_tensor;
  std::string save_generated;
  double tolerance = 15.0;

  // roofline
  std::string precisions = "a1w1,a1w2,a2w2,a4w4,a8w8";
  int samples = 64;
  double ai_min = 1e-2;
  double ai_max = 1e6;

  // pareto
  std::string accuracy;
  std::string group;
  std::string error_metric = "top5";
  std::string cost_metric = "file-fps";
};

Eq2Mode eq2_mode(const Config& c) { return c.eq2_mode == "corrected" ? Eq2Mode::corrected : Eq2Mode::faithful; }
ReluMode relu_mode(const Config& c) {
  return c.relu_mode == "paper-literal" ? ReluMode::paper_literal : ReluMode::standard;
}

double clock_hz(const Config& c, const char* command) {
  if (!c.clock_mhz) throw ValidationError(std::string(command) + ": --clock-mhz is required");
  if (!(*c.clock_mhz > 0.0)) throw ValidationError("--clock-mhz must be positive");
  return *c.clock_mhz * 1e6;
}

CostTable cost_table(const Config& c) { return c.cost_table.empty() ? CostTable{} : load_cost_table(c.cost_table); }

FoldingConfig folding(const Config& c, const NetworkTopology& topo) {
  FoldingConfig f = c.folding.empty() ? minimal_folding(topo) : load_folding(c.folding);
  if (c.m) f.m = *c.m;
  validate_folding(topo, f);
  return f;
}

void emit(const Config& c, std::ostream& out, const std::string& text, const json& machine) {
  const std::string body = c.format == "machine" ? machine.dump(2) + "\n" : text;
  if (c.out.empty()) {
    out << body;
    return;
  }
  std::ofstream f(c.out, std::ios::binary);
  if (!f) throw Error("cannot write '" + c.out + "'");
  f << body;
}

std::string percent(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f%%", v * 100.0);
  return buf;
}

int cmd_estimate(const Config& c, std::ostream& out, std::ostream& err) {
  const auto topo = load_topology(c.topology);
  const auto dev = load_device(c.device);
  const auto table = cost_table(c);
  const double clk = clock_hz(c, "estimate");
  EstimateReport r;
  r.topology = topo.name;
  r.device = dev.name;
  r.eq2_mode = eq2_mode(c);
  r.utilization_cap = c.cap;
  r.folding = folding(c, topo);
  r.resources = estimate_network(topo, r.folding, dev, table, r.eq2_mode);
  r.perf = estimate_perf(topo, r.folding, clk);
  r.violations = r.resources.violations(c.cap);
  emit(c, out, format_text(r), r);
  if (!r.feasible()) {
    for (const auto& v : r.violations) {
      const double used = v == "BRAM" ? r.resources.bram_fraction : r.resources.lut_fraction;
      err << "infeasible: " << v << " utilization " << percent(used) << " exceeds cap " << percent(c.cap)
          << " on " << dev.name << "\n";
    }
    return kExitInfeasible;
  }
  return kExitOk;
}

int cmd_explore(const Config& c, std::ostream& out, std::ostream&) {
  const auto topo = load_topology(c.topology);
  const auto dev = load_device(c.device);
  ExploreGoal goal;
  goal.utilization_cap = c.cap;
  goal.clock_hz = clock_hz(c, "explore");
  goal.target_fps = c.target_fps;
  goal.max_m = c.max_m;
  goal.eq2_mode = eq2_mode(c);
  ExploreReport r{topo.name, dev.name, goal.eq2_mode, c.cap, explore(topo, dev, cost_table(c), goal)};
  if (!c.folding_out.empty()) {
    std::ofstream f(c.folding_out, std::ios::binary);
    if (!f) throw Error("cannot write '" + c.folding_out + "'");
    f << serialize_folding(r.result.folding);
  }
  emit(c, out, format_text(r), r);
  return kExitOk;
}

struct Workload {
  NetworkTopology topo;
  FoldingConfig fold;
  QTensor input;
  std::vector<LayerParams> params;
};

Workload load_workload(const Config& c) {
  Workload w;
  w.topo = load_topology(c.topology);
  w.fold = folding(c, w.topo);
  const auto compute = compute_layer_indices(w.topo);
  const std::uint32_t images =
      c.images.value_or(static_cast<std::uint32_t>(c.batches) * static_cast<std::uint32_t>(w.fold.m));
  std::optional<SyntheticWorkload> gen;
  if (c.input.empty() || c.weights.empty()) gen = synthetic_workload(w.topo, images, c.seed);

  w.input = c.input.empty() ? gen->input : QTensor::load(c.input);
  if (c.weights.empty()) {
    w.params = gen->params;
  } else {
    if (c.weights.size() != compute.size()) {
      throw ValidationError("expected " + std::to_string(compute.size()) + " --weights files, got " +
                            std::to_string(c.weights.size()));
    }
    for (const auto& path : c.weights) w.params.push_back({QTensor::load(path), {}});
  }
  if (!c.thresholds.empty()) {
    std::ifstream f(c.thresholds, std::ios::binary);
    if (!f) throw ParseError("cannot open '" + c.thresholds + "'");
    std::stringstream ss;
    ss << f.rdbuf();
    auto acts = parse_activations(ss.str(), w.topo, relu_mode(c));
    for (std::size_t i = 0; i < compute.size(); ++i) w.params[i].activation = std::move(acts[i]);
  }

  if (!c.save_generated.empty()) {
    std::filesystem::create_directories(c.save_generated);
    const std::filesystem::path dir(c.save_generated);
    w.input.save((dir / "input.qtns").string());
    std::vector<std::vector<ChannelActivation>> acts;
    for (std::size_t i = 0; i < w.params.size(); ++i) {
      w.params[i].weights.save((dir / ("weights_" + std::to_string(i) + ".qtns")).string());
      acts.push_back(w.params[i].activation);
    }
    std::ofstream f(dir / "thresholds.json", std::ios::binary);
    f << serialize_activations(acts, w.topo);
  }
  return w;
}

SimOptions sim_options(const Config& c) {
  SimOptions o;
  o.queue_capacity = c.queue_capacity;
  return o;
}

int cmd_simulate(const Config& c, std::ostream& out, std::ostream&) {
  const auto w = load_workload(c);
  const auto result = simulate_network(w.topo, w.fold, w.params, w.input, sim_options(c));
  if (!c.output_tensor.empty()) result.output.save(c.output_tensor);
  SimulateReport r{w.topo.name, w.fold, w.input.dims().at(0), result.report};
  emit(c, out, format_text(r), r);
  return kExitOk;
}

int cmd_validate(const Config& c, std::ostream& out, std::ostream& err) {
  if (!(c.tolerance >= 0.0)) throw ValidationError("--tolerance must be >= 0");
  const auto w = load_workload(c);
  const auto result = simulate_network(w.topo, w.fold, w.params, w.input, sim_options(c));
  const auto& rep = result.report;
  const auto perf = estimate_perf(w.topo, w.fold, c.clock_mhz ? clock_hz(c, "validate") : 1.0);
  const double batches = static_cast<double>(rep.batch_completion_cycles.size());

  ValidateReport r;
  r.topology = w.topo.name;
  r.folding = w.fold;
  for (const auto& l : rep.layers) {
    if (l.kind == LayerKind::max_pool) continue;
    r.layers.push_back({l.layer_index, l.analytic_ii, l.busy_per_batch,
                        static_cast<double>(l.mvtu.stall()) / batches});
  }
  r.analytic_cycles_per_batch = perf.max_ii();
  r.simulated_cycles_per_batch = rep.cycles_per_batch;
  r.gap_percent = 100.0 * (static_cast<double>(rep.cycles_per_batch) - static_cast<double>(perf.max_ii())) /
                  static_cast<double>(perf.max_ii());
  r.tolerance_percent = c.tolerance;
  if (c.clock_mhz) {
    r.clock_hz = perf.clock_hz;
    r.analytic_fps = perf.fps;
    r.simulated_fps = perf.m * perf.clock_hz / static_cast<double>(rep.cycles_per_batch);
  }
  emit(c, out, format_text(r), r);
  if (!r.within_tolerance()) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "%.2f%% exceeds tolerance %.2f%%", r.gap_percent, r.tolerance_percent);
    err << "validation failed: cycles/batch gap " << buf << "\n";
    return kExitInfeasible;
  }
  return kExitOk;
}

std::vector<std::pair<int, int>> parse_precisions(const std::string& text) {
  static const std::regex item(R"(\s*a(\d+)w(\d+)\s*)");
  std::vector<std::pair<int, int>> out;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    std::smatch m;
    if (!std::regex_match(tok, m, item)) throw ValidationError("bad precision '" + tok + "', expected aXwY");
    out.emplace_back(std::stoi(m[1]), std::stoi(m[2]));
  }
  if (out.empty()) throw ValidationError("--precisions is empty");
  return out;
}

int cmd_roofline(const Config& c, std::ostream& out, std::ostream&) {
  const auto dev = load_device(c.device);
  RooflineOptions opt;
  opt.utilization_cap = c.cap;
  opt.samples = c.samples;
  opt.ai_min = c.ai_min;
  opt.ai_max = c.ai_max;
  RooflineReport r;
  r.device = dev.name;
  r.clock_hz = clock_hz(c, "roofline");
  r.utilization_cap = c.cap;
  r.mem_bandwidth = dev.mem_bandwidth;
  r.curves = roofline(dev, cost_table(c), parse_precisions(c.precisions), r.clock_hz, opt);
  emit(c, out, roofline_table(r.curves), r);
  return kExitOk;
}

int cmd_pareto(const Config& c, std::ostream& out, std::ostream& err) {
  auto records = load_accuracy(c.accuracy);
  if (!c.group.empty()) {
    std::erase_if(records, [&](const AccuracyRecord& r) { return r.group != c.group; });
    if (records.empty()) throw ValidationError("no accuracy records in group '" + c.group + "'");
  }

  std::optional<NetworkTopology> topo;
  std::optional<DeviceModel> dev;
  ExploreGoal goal;
  if (c.cost_metric != "file-fps") {
    if (c.topology.empty() || c.device.empty()) {
      throw ValidationError("--cost " + c.cost_metric + " needs --topology and --device");
    }
    topo = load_topology(c.topology);
    dev = load_device(c.device);
    goal.utilization_cap = c.cap;
    goal.clock_hz = clock_hz(c, "pareto");
    goal.max_m = c.max_m;
    goal.eq2_mode = eq2_mode(c);
  }
  const auto table = cost_table(c);

  ParetoReport r;
  r.error_metric = c.error_metric;
  r.cost_metric = c.cost_metric;
  r.axis = c.cost_metric == "explore-luts" ? CostAxis::lower_is_better : CostAxis::higher_is_better;
  std::vector<ParetoRecord> usable;
  for (const auto& a : records) {
    ParetoEntry e;
    e.record.label = a.label;
    const auto err_pct = c.error_metric == "top1" ? std::optional<double>(a.top1_err) : a.top5_err;
    if (!err_pct) {
      err << "skipping '" << a.label << "': no " << c.error_metric << " error\n";
      continue;
    }
    e.record.error_rate = *err_pct / 100.0;
    e.a_bits = a.a_bits;
    e.w_bits = a.w_bits;
    if (c.cost_metric == "file-fps") {
      if (!a.kfps_est) {
        err << "skipping '" << a.label << "': no published throughput\n";
        continue;
      }
      e.record.hw_cost = *a.kfps_est * 1e3;
    } else {
      try {
        const auto res = explore(with_precision(*topo, a.a_bits, a.w_bits), *dev, table, goal);
        e.record.hw_cost = c.cost_metric == "explore-fps" ? res.perf.fps : static_cast<double>(res.resources.lut_total);
      } catch (const Error& ex) {
        err << "skipping '" << a.label << "': " << ex.what() << "\n";
        continue;
      }
    }
    usable.push_back(e.record);
    r.entries.push_back(std::move(e));
  }
  r.front = pareto_front(usable, r.axis);
  for (auto& e : r.entries) {
    e.on_front = std::find(r.front.begin(), r.front.end(), e.record) != r.front.end();
  }
  emit(c, out, format_pareto_csv(r), r);
  return kExitOk;
}

void add_output(CLI::App* sub, Config& c) {
  sub->add_option("--format", c.format, "report format")->check(CLI::IsMember({"text", "machine"}));
  sub->add_option("--out", c.out, "write the report to this file");
}

void add_model(CLI::App* sub, Config& c, bool required_topology = true) {
  auto* t = sub->add_option("--topology", c.topology, "topology file")->check(CLI::ExistingFile);
  if (required_topology) t->required();
  sub->add_option("--cost-table", c.cost_table, "LUT cost table file")->check(CLI::ExistingFile);
  sub->add_option("--utilization-cap", c.cap, "per-resource utilization cap")->check(CLI::Range(1e-9, 1.0));
  sub->add_option("--eq2-mode", c.eq2_mode, "weight memory depth term")
      ->check(CLI::IsMember({"faithful", "corrected"}));
}

void add_workload(CLI::App* sub, Config& c) {
  sub->add_option("--topology", c.topology, "topology file")->required()->check(CLI::ExistingFile);
  sub->add_option("--folding", c.folding, "folding file (default: minimal)")->check(CLI::ExistingFile);
  sub->add_option("--m", c.m, "override the multi-vector count")->check(CLI::PositiveNumber);
  sub->add_option("--input", c.input, "input tensor (QTNS); random when absent")->check(CLI::ExistingFile);
  sub->add_option("--weights", c.weights, "weight tensor per compute layer (QTNS), in order")
      ->check(CLI::ExistingFile);
  sub->add_option("--thresholds", c.thresholds, "per-channel activation file")->check(CLI::ExistingFile);
  sub->add_option("--relu-mode", c.relu_mode, "activation clipping")
      ->check(CLI::IsMember({"standard", "paper-literal"}));
  sub->add_option("--seed", c.seed, "seed for generated data");
  sub->add_option("--images", c.images, "number of generated images")->check(CLI::PositiveNumber);
  sub->add_option("--batches", c.batches, "generated batches when --images is absent")->check(CLI::PositiveNumber);
  sub->add_option("--queue-capacity", c.queue_capacity, "capacity of every queue (0 = one row)");
  sub->add_option("--save-generated", c.save_generated, "write the input, weights and thresholds here");
  add_output(sub, c);
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Config c;
  CLI::App app{"Resource, performance and cycle-level models for streaming quantized network accelerators",
               "qnnflow"};
  app.require_subcommand(1);

  auto* estimate = app.add_subcommand("estimate", "resource and throughput estimate for one folding");
  add_model(estimate, c);
  estimate->add_option("--device", c.device, "device file")->required()->check(CLI::ExistingFile);
  estimate->add_option("--folding", c.folding, "folding file (default: minimal)")->check(CLI::ExistingFile);
  estimate->add_option("--m", c.m, "override the multi-vector count")->check(CLI::PositiveNumber);
  estimate->add_option("--clock-mhz", c.clock_mhz, "clock frequency in MHz")->required();
  add_output(estimate, c);

  auto* exp = app.add_subcommand("explore", "greedy folding search under the utilization cap");
  add_model(exp, c);
  exp->add_option("--device", c.device, "device file")->required()->check(CLI::ExistingFile);
  exp->add_option("--clock-mhz", c.clock_mhz, "clock frequency in MHz")->required();
  exp->add_option("--target-fps", c.target_fps, "stop once this throughput is reached");
  exp->add_option("--max-m", c.max_m, "upper bound on the multi-vector count")->check(CLI::PositiveNumber);
  exp->add_option("--folding-out", c.folding_out, "write the chosen folding here");
  add_output(exp, c);

  auto* sim = app.add_subcommand("simulate", "cycle-level simulation of the streaming pipeline");
  add_workload(sim, c);
  sim->add_option("--output-tensor", c.output_tensor, "write the result tensor (QTNS) here");

  auto* val = app.add_subcommand("validate", "compare simulated and analytic cycles per batch");
  add_workload(val, c);
  val->add_option("--clock-mhz", c.clock_mhz, "clock frequency in MHz (adds fps columns)");
  val->add_option("--tolerance", c.tolerance, "allowed cycles/batch gap in percent");

  auto* roof = app.add_subcommand("roofline", "roofline curves per precision");
  roof->add_option("--device", c.device, "device file")->required()->check(CLI::ExistingFile);
  roof->add_option("--cost-table", c.cost_table, "LUT cost table file")->check(CLI::ExistingFile);
  roof->add_option("--clock-mhz", c.clock_mhz, "clock frequency in MHz")->required();
  roof->add_option("--utilization-cap", c.cap, "LUT utilization cap")->check(CLI::Range(1e-9, 1.0));
  roof->add_option("--precisions", c.precisions, "comma separated aXwY list");
  roof->add_option("--samples", c.samples, "log-spaced samples per curve")->check(CLI::Range(2, 100000));
  roof->add_option("--ai-min", c.ai_min, "lowest arithmetic intensity (ops/byte)")->check(CLI::PositiveNumber);
  roof->add_option("--ai-max", c.ai_max, "highest arithmetic intensity (ops/byte)")->check(CLI::PositiveNumber);
  add_output(roof, c);

  auto* par = app.add_subcommand("pareto", "error vs hardware cost front");
  par->add_option("--accuracy", c.accuracy, "accuracy data file")->required()->check(CLI::ExistingFile);
  par->add_option("--group", c.group, "only records of this group");
  par->add_option("--error", c.error_metric, "error column")->check(CLI::IsMember({"top1", "top5"}));
  par->add_option("--cost", c.cost_metric, "cost axis")
      ->check(CLI::IsMember({"file-fps", "explore-fps", "explore-luts"}));
  add_model(par, c, false);
  par->add_option("--device", c.device, "device file (explore costs)")->check(CLI::ExistingFile);
  par->add_option("--clock-mhz", c.clock_mhz, "clock frequency in MHz (explore costs)");
  par->add_option("--max-m", c.max_m, "upper bound on the multi-vector count")->check(CLI::PositiveNumber);
  add_output(par, c);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInputError;
  }

  try {
    if (*estimate) return cmd_estimate(c, out, err);
    if (*exp) return cmd_explore(c, out, err);
    if (*sim) return cmd_simulate(c, out, err);
    if (*val) return cmd_validate(c, out, err);
    if (*roof) return cmd_roofline(c, out, err);
    if (*par) return cmd_pareto(c, out, err);
  } catch (const DeviceUnsuitable& e) {
    err << "error: " << e.what() << "\n";
    return kExitInfeasible;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitInputError;
  }
  return kExitInputError;
}

}  // namespace qnnflow
