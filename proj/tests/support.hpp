#pragma once

// Random fixtures shared by the unit and acceptance tests.

#include <algorithm>
#include <cstdint>
#include <random>
#include <vector>

#include "qnnflow/qtensor.hpp"
#include "qnnflow/quant.hpp"
#include "qnnflow/simulator.hpp"
#include "qnnflow/topology.hpp"

namespace qnnflow::testing {

inline std::vector<int> divisors(int n) {
  std::vector<int> out;
  for (int d = 1; d <= n; ++d) {
    if (n % d == 0) out.push_back(d);
  }
  return out;
}

template <class Rng>
int pick(Rng& rng, const std::vector<int>& values) {
  std::uniform_int_distribution<std::size_t> d(0, values.size() - 1);
  return values[d(rng)];
}

template <class Rng>
QTensor random_activations(Rng& rng, std::uint32_t images, std::uint32_t n, std::uint32_t c, int bits) {
  std::uniform_int_distribution<std::uint32_t> d(0, (std::uint32_t{1} << bits) - 1);
  std::vector<std::uint32_t> codes(std::size_t{images} * n * n * c);
  for (auto& v : codes) v = d(rng);
  return QTensor::pack({images, n, n, c}, bits, TensorEncoding::unsigned_level_code, codes);
}

template <class Rng>
QTensor random_weights(Rng& rng, const LayerSpec& layer) {
  std::uniform_int_distribution<std::uint32_t> d(0, (std::uint32_t{1} << layer.w_bits) - 1);
  std::vector<std::uint32_t> codes(static_cast<std::size_t>(weight_count(layer)));
  for (auto& v : codes) v = d(rng);
  const auto enc = layer.w_bits == 1 ? TensorEncoding::bipolar : TensorEncoding::twos_complement;
  return QTensor::pack({static_cast<std::uint32_t>(layer.c_out), static_cast<std::uint32_t>(layer.c),
                        static_cast<std::uint32_t>(layer.k), static_cast<std::uint32_t>(layer.k)},
                       layer.w_bits, enc, codes);
}

/// Sorted random thresholds spread over the reachable accumulator range.
template <class Rng>
ThresholdSet random_thresholds(Rng& rng, const LayerSpec& layer, int out_bits) {
  const std::int64_t bound = std::int64_t{layer.k} * layer.k * layer.c *
                             QuantSpec(layer.a_bits).max_code() *
                             WeightEncoding(layer.w_bits).max_abs_int();
  std::uniform_int_distribution<std::int64_t> d(-bound / 2 - 1, bound / 2 + 1);
  ThresholdSet set;
  set.thresholds.resize((std::size_t{1} << out_bits) - 1);
  for (auto& t : set.thresholds) t = d(rng);
  std::sort(set.thresholds.begin(), set.thresholds.end());
  return set;
}

template <class Rng>
LayerParams random_params(Rng& rng, const LayerSpec& layer, int out_bits) {
  LayerParams p{random_weights(rng, layer), {}};
  for (int ch = 0; ch < layer.c_out; ++ch) p.activation.emplace_back(random_thresholds(rng, layer, out_bits));
  return p;
}

}  // namespace qnnflow::testing
