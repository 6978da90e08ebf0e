#include <algorithm>
#include <cmath>
#include <random>

#include "qnnflow/errors.hpp"
#include "qnnflow/simulator.hpp"

namespace qnnflow {

SyntheticWorkload synthetic_workload(const NetworkTopology& topo, std::uint32_t images,
                                     std::uint64_t seed) {
  validate(topo);
  if (images == 0) throw ValidationError("need at least one image");
  std::mt19937_64 rng(seed);
  SyntheticWorkload w;

  const auto& in = topo.input;
  std::uniform_int_distribution<std::uint32_t> act(0, (std::uint32_t{1} << in.bits) - 1);
  std::vector<std::uint32_t> codes(std::size_t{images} * in.height * in.width * in.channels);
  for (auto& c : codes) c = act(rng);
  w.input = QTensor::pack({images, static_cast<std::uint32_t>(in.height), static_cast<std::uint32_t>(in.width),
                           static_cast<std::uint32_t>(in.channels)},
                          in.bits, TensorEncoding::unsigned_level_code, codes);

  const auto compute = compute_layer_indices(topo);
  for (std::size_t i = 0; i < compute.size(); ++i) {
    const LayerSpec& layer = topo.layers[compute[i]];
    std::uniform_int_distribution<std::uint32_t> wd(0, (std::uint32_t{1} << layer.w_bits) - 1);
    std::vector<std::uint32_t> wc(static_cast<std::size_t>(weight_count(layer)));
    for (auto& c : wc) c = wd(rng);
    LayerParams p;
    p.weights = QTensor::pack({static_cast<std::uint32_t>(layer.c_out), static_cast<std::uint32_t>(layer.c),
                               static_cast<std::uint32_t>(layer.k), static_cast<std::uint32_t>(layer.k)},
                              layer.w_bits,
                              layer.w_bits == 1 ? TensorEncoding::bipolar : TensorEncoding::twos_complement,
                              wc);

    const std::int64_t terms = std::int64_t{layer.k} * layer.k * layer.c;
    const WeightEncoding enc(layer.w_bits);
    const bool last = i + 1 == compute.size();
    if (!(last && accumulator_bits(terms, layer.a_bits, enc) <= 32)) {
      const int out_bits = output_bits(topo, compute[i]);
      // Typical spread of a sum of independent uniform products.
      const double spread =
          std::sqrt(static_cast<double>(terms)) * QuantSpec(layer.a_bits).max_code() * enc.max_abs_int() / 3.0;
      std::normal_distribution<double> td(0.0, std::max(spread, 1.0));
      for (int ch = 0; ch < layer.c_out; ++ch) {
        ThresholdSet set;
        set.thresholds.resize((std::size_t{1} << out_bits) - 1);
        for (auto& t : set.thresholds) t = std::llround(td(rng));
        std::sort(set.thresholds.begin(), set.thresholds.end());
        p.activation.emplace_back(std::move(set));
      }
    }
    w.params.push_back(std::move(p));
  }
  return w;
}

}  // namespace qnnflow
