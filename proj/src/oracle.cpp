// Dense reference implementations used to check the streaming simulator.
// Nothing here calls into the simulator's dot-product or threshold code.

#include <algorithm>
#include <limits>

#include "qnnflow/errors.hpp"
#include "qnnflow/simulator.hpp"

namespace qnnflow {

namespace {

std::int64_t decode_weight_int(std::uint32_t code, int w_bits) {
  if (w_bits == 1) return code ? 1 : -1;
  const std::int64_t v = code;
  return v >= (std::int64_t{1} << (w_bits - 1)) ? v - (std::int64_t{1} << w_bits) : v;
}

std::int64_t activate(const ChannelActivation& act, std::int64_t acc) {
  if (const auto* t = std::get_if<ThresholdSet>(&act)) {
    std::int64_t level = 0;
    for (std::int64_t th : t->thresholds) {
      if (acc >= th) ++level;
    }
    return level;
  }
  const auto& a = std::get<AffineActivation>(act);
  return quantize_activation(a.scale * static_cast<double>(acc) + a.bias, QuantSpec(a.out_bits),
                             a.mode);
}

}  // namespace

QTensor reference_conv_oracle(const QTensor& input, const LayerSpec& layer, const LayerParams& params) {
  const auto& d = input.dims();
  if (d.size() != 4 || d[1] != static_cast<std::uint32_t>(layer.n) ||
      d[2] != static_cast<std::uint32_t>(layer.n) || d[3] != static_cast<std::uint32_t>(layer.c)) {
    throw ValidationError("oracle: input shape does not match the layer");
  }
  const std::int64_t images = d[0];
  const std::int64_t n = layer.n, c = layer.c, k = layer.k, s = layer.s, pad = layer.pad;
  const std::int64_t c_out = layer.c_out;
  const std::int64_t n_out = (n + 2 * pad - k) / s + 1;
  const auto in = input.unpack();
  const auto w = params.weights.unpack();

  std::vector<std::int64_t> out(static_cast<std::size_t>(images * n_out * n_out * c_out));
  for (std::int64_t img = 0; img < images; ++img) {
    for (std::int64_t oy = 0; oy < n_out; ++oy) {
      for (std::int64_t ox = 0; ox < n_out; ++ox) {
        for (std::int64_t co = 0; co < c_out; ++co) {
          std::int64_t acc = 0;
          for (std::int64_t ci = 0; ci < c; ++ci) {
            for (std::int64_t ky = 0; ky < k; ++ky) {
              for (std::int64_t kx = 0; kx < k; ++kx) {
                const std::int64_t y = oy * s + ky - pad;
                const std::int64_t x = ox * s + kx - pad;
                if (y < 0 || y >= n || x < 0 || x >= n) continue;
                const std::int64_t a = in[static_cast<std::size_t>(((img * n + y) * n + x) * c + ci)];
                const std::uint32_t wc = w[static_cast<std::size_t>(((co * c + ci) * k + ky) * k + kx)];
                acc += a * decode_weight_int(wc, layer.w_bits);
              }
            }
          }
          const auto idx = static_cast<std::size_t>(((img * n_out + oy) * n_out + ox) * c_out + co);
          out[idx] = params.activation.empty()
                         ? acc
                         : activate(params.activation[static_cast<std::size_t>(co)], acc);
        }
      }
    }
  }
  const std::vector<std::uint32_t> dims = {d[0], static_cast<std::uint32_t>(n_out),
                                           static_cast<std::uint32_t>(n_out),
                                           static_cast<std::uint32_t>(c_out)};
  if (params.activation.empty()) {
    return QTensor::pack_signed(dims, 32, TensorEncoding::signed_accumulator, out);
  }
  const int bits = activation_bits(params.activation.front());
  std::vector<std::uint32_t> codes(out.begin(), out.end());
  return QTensor::pack(dims, bits, TensorEncoding::unsigned_level_code, codes);
}

QTensor reference_pool_oracle(const QTensor& input, const LayerSpec& layer) {
  const auto& d = input.dims();
  const std::int64_t images = d.at(0), n = layer.n, c = layer.c;
  const std::int64_t n_out = (n + 2 * layer.pad - layer.k) / layer.s + 1;
  std::vector<std::int64_t> out(static_cast<std::size_t>(images * n_out * n_out * c),
                                std::numeric_limits<std::int64_t>::min());
  for (std::int64_t img = 0; img < images; ++img) {
    for (std::int64_t oy = 0; oy < n_out; ++oy) {
      for (std::int64_t ox = 0; ox < n_out; ++ox) {
        for (std::int64_t ky = 0; ky < layer.k; ++ky) {
          for (std::int64_t kx = 0; kx < layer.k; ++kx) {
            const std::int64_t y = oy * layer.s + ky - layer.pad;
            const std::int64_t x = ox * layer.s + kx - layer.pad;
            if (y < 0 || y >= n || x < 0 || x >= n) continue;
            for (std::int64_t ch = 0; ch < c; ++ch) {
              auto& o = out[static_cast<std::size_t>(((img * n_out + oy) * n_out + ox) * c + ch)];
              const std::size_t at = static_cast<std::size_t>(((img * n + y) * n + x) * c + ch);
              const std::int64_t v = input.encoding() == TensorEncoding::signed_accumulator
                                         ? input.signed_value(at)
                                         : static_cast<std::int64_t>(input.code(at));
              o = std::max(o, v);
            }
          }
        }
      }
    }
  }
  const std::vector<std::uint32_t> dims = {d[0], static_cast<std::uint32_t>(n_out),
                                           static_cast<std::uint32_t>(n_out), static_cast<std::uint32_t>(c)};
  if (input.encoding() == TensorEncoding::signed_accumulator) {
    return QTensor::pack_signed(dims, input.bits(), input.encoding(), out);
  }
  std::vector<std::uint32_t> codes(out.begin(), out.end());
  return QTensor::pack(dims, input.bits(), input.encoding(), codes);
}

QTensor reference_network_oracle(const NetworkTopology& topo, const std::vector<LayerParams>& params,
                                 const QTensor& input) {
  QTensor x = input;
  std::size_t next = 0;
  for (const auto& layer : topo.layers) {
    if (layer.has_weights()) {
      x = reference_conv_oracle(x, layer, params.at(next++));
    } else {
      x = reference_pool_oracle(x, layer);
    }
  }
  return x;
}

}  // namespace qnnflow
