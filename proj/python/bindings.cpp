// Python extension: thin wrappers over the library. Structured results cross
// the boundary as JSON text and are decoded on the Python side.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "json.hpp"
#include "qnnflow/cli.hpp"
#include "qnnflow/costmodel.hpp"
#include "qnnflow/errors.hpp"
#include "qnnflow/explorer.hpp"
#include "qnnflow/perfmodel.hpp"
#include "qnnflow/report.hpp"

namespace py = pybind11;
using namespace qnnflow;

namespace {

LayerSpec layer_from(int n, int c, int k, int s, int pad, int c_out, int a_bits, int w_bits) {
  LayerSpec l;
  l.n = n;
  l.c = c;
  l.k = k;
  l.s = s;
  l.pad = pad;
  l.c_out = c_out;
  l.a_bits = a_bits;
  l.w_bits = w_bits;
  validate_layer(l);
  return l;
}

Eq2Mode eq2_from(const std::string& mode) {
  if (mode == "faithful") return Eq2Mode::faithful;
  if (mode == "corrected") return Eq2Mode::corrected;
  throw ValidationError("eq2 mode must be 'faithful' or 'corrected'");
}

std::tuple<int, std::string, std::string> cli(const std::vector<std::string>& args) {
  std::vector<const char*> argv{"qnnflow"};
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string explore_json(const std::string& topology, const std::string& device, double clock_mhz,
                         std::optional<std::string> cost_table, double cap, int max_m, const std::string& eq2_mode,
                         std::optional<double> target_fps) {
  const auto topo = parse_topology(topology);
  const auto dev = parse_device(device);
  const CostTable table = cost_table ? parse_cost_table(*cost_table) : CostTable{};
  ExploreGoal goal;
  goal.clock_hz = clock_mhz * 1e6;
  goal.utilization_cap = cap;
  goal.max_m = max_m;
  goal.eq2_mode = eq2_from(eq2_mode);
  goal.target_fps = target_fps;
  ExploreReport r{topo.name, dev.name, goal.eq2_mode, cap, explore(topo, dev, table, goal)};
  return nlohmann::json(r).dump();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Cost, throughput and folding search for streaming QNN accelerators";

  // Translators run most-recent first, so base classes are registered first.
  py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  const auto& validation = py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<FoldingError>(m, "FoldingError", validation.ptr());
  py::register_exception<DeviceUnsuitable>(m, "DeviceUnsuitable", PyExc_RuntimeError);

  m.def(
      "bram_swu",
      [](int n, int c, int k, int s, int pad, int a_bits, int m_lanes) {
        return bram_swu(layer_from(n, c, k, s, pad, 1, a_bits, 1), m_lanes, DeviceModel{});
      },
      py::arg("n"), py::arg("c"), py::arg("k"), py::arg("s") = 1, py::arg("pad") = 0, py::arg("a_bits") = 1,
      py::arg("m") = 1, "Sliding-window line buffer blocks (512 x 36 blocks).");
  m.def(
      "bram_weights",
      [](int c, int k, int c_out, int w_bits, int pe, int simd, const std::string& mode) {
        const auto wm = bram_weights(layer_from(k, c, k, 1, 0, c_out, 1, w_bits), {pe, simd}, DeviceModel{},
                                     eq2_from(mode));
        return std::make_pair(wm.blocks, wm.wm_depth);
      },
      py::arg("c"), py::arg("k"), py::arg("c_out"), py::arg("w_bits"), py::arg("pe"), py::arg("simd"),
      py::arg("mode") = "faithful", "Weight memory (blocks, words per PE).");
  m.def(
      "lut_cost",
      [](int pe, int simd, int a_bits, int w_bits, int m_lanes) {
        return lut_cost(layer_from(1, simd, 1, 1, 0, pe, a_bits, w_bits), {pe, simd}, m_lanes, CostTable{});
      },
      py::arg("pe"), py::arg("simd"), py::arg("a_bits"), py::arg("w_bits"), py::arg("m") = 1,
      "Compute LUTs with the default cost rule.");
  m.def(
      "layer_ii",
      [](int n, int c, int k, int s, int pad, int c_out, int pe, int simd) {
        return layer_ii(layer_from(n, c, k, s, pad, c_out, 1, 1), {pe, simd});
      },
      py::arg("n"), py::arg("c"), py::arg("k"), py::arg("s"), py::arg("pad"), py::arg("c_out"), py::arg("pe"),
      py::arg("simd"), "Cycles per batch of one compute layer.");
  m.def(
      "pareto_front",
      [](const std::vector<std::tuple<std::string, double, double>>& records, bool higher_is_better) {
        std::vector<ParetoRecord> in;
        for (const auto& [label, err, cost] : records) in.push_back({label, err, cost});
        std::vector<std::tuple<std::string, double, double>> out;
        for (const auto& r : pareto_front(std::move(in), higher_is_better ? CostAxis::higher_is_better
                                                                            : CostAxis::lower_is_better)) {
          out.emplace_back(r.label, r.error_rate, r.hw_cost);
        }
        return out;
      },
      py::arg("records"), py::arg("higher_is_better") = true,
      "Non-dominated (label, error, cost) tuples sorted by cost.");
  m.def("explore_json", &explore_json, py::arg("topology"), py::arg("device"), py::arg("clock_mhz"),
        py::arg("cost_table") = py::none(), py::arg("utilization_cap") = 0.8, py::arg("max_m") = 8,
        py::arg("eq2_mode") = "faithful", py::arg("target_fps") = py::none());
  m.def("cli", &cli, py::arg("args"), "Run the command-line front end; returns (exit code, stdout, stderr).");
}
