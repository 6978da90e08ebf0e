#include "qnnflow/quant.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>

#include "qnnflow/errors.hpp"

namespace qnnflow {

QuantSpec::QuantSpec(int bits) : a_bits(bits) {
  if (bits < 1 || bits > 8) {
    throw ValidationError("activation precision must be in 1..8, got " + std::to_string(bits));
  }
}

double QuantSpec::level_value(std::int64_t code) const {
  return static_cast<double>(code) / static_cast<double>(max_code());
}

double quant_midpoint(const QuantSpec& spec, std::int64_t j) {
  return static_cast<double>(2 * j - 1) / static_cast<double>(2 * spec.max_code());
}

std::int64_t quantize_activation(double x, const QuantSpec& spec, ReluMode mode) {
  if (std::isnan(x)) throw ValidationError("cannot quantize NaN");
  if (mode == ReluMode::paper_literal && (x < 0.0 || x > 1.0)) {
    x = 0.0;
  } else {
    x = std::clamp(x, 0.0, 1.0);
  }
  const std::int64_t top = spec.max_code();
  std::int64_t code = std::clamp<std::int64_t>(
      static_cast<std::int64_t>(std::floor(x * static_cast<double>(top) + 0.5)), 0, top);
  // Settle against the exact midpoints so thresholds reproduce this result.
  while (code < top && x >= quant_midpoint(spec, code + 1)) ++code;
  while (code > 0 && x < quant_midpoint(spec, code)) --code;
  return code;
}

WeightEncoding::WeightEncoding(int bits) : w_bits(bits) {
  if (bits < 1 || bits > 8) {
    throw ValidationError("weight precision must be in 1..8, got " + std::to_string(bits));
  }
}

double WeightEncoding::step() const noexcept {
  return mode() == WeightMode::bipolar ? 1.0 : std::ldexp(1.0, 2 - w_bits);
}

std::int64_t WeightEncoding::min_int() const noexcept {
  return mode() == WeightMode::bipolar ? -1 : -(std::int64_t{1} << (w_bits - 1));
}

std::int64_t WeightEncoding::max_int() const noexcept {
  return mode() == WeightMode::bipolar ? 1 : (std::int64_t{1} << (w_bits - 1)) - 1;
}

std::int64_t WeightEncoding::max_abs_int() const noexcept { return std::max(-min_int(), max_int()); }

EncodedWeight encode_weight(double v, const WeightEncoding& enc) {
  if (std::isnan(v)) throw ValidationError("cannot encode NaN weight");
  if (enc.mode() == WeightMode::bipolar) return {v >= 0.0 ? 1u : 0u, false};

  // nearbyint honours the default round-to-nearest-even mode.
  const double scaled = std::nearbyint(v / enc.step());
  EncodedWeight out;
  std::int64_t q;
  if (scaled < static_cast<double>(enc.min_int())) {
    q = enc.min_int();
    out.saturated = true;
  } else if (scaled > static_cast<double>(enc.max_int())) {
    q = enc.max_int();
    out.saturated = true;
  } else {
    q = static_cast<std::int64_t>(scaled);
  }
  const std::uint32_t mask = (1u << enc.w_bits) - 1u;
  out.code = static_cast<std::uint32_t>(q) & mask;
  return out;
}

std::int64_t weight_int(std::uint32_t code, const WeightEncoding& enc) {
  if (enc.mode() == WeightMode::bipolar) return (code & 1u) ? 1 : -1;
  const std::uint32_t mask = (1u << enc.w_bits) - 1u;
  const std::uint32_t sign = 1u << (enc.w_bits - 1);
  const std::uint32_t c = code & mask;
  return (c & sign) ? static_cast<std::int64_t>(c) - (std::int64_t{1} << enc.w_bits)
                    : static_cast<std::int64_t>(c);
}

double decode_weight(std::uint32_t code, const WeightEncoding& enc) {
  return static_cast<double>(weight_int(code, enc)) * enc.step();
}

EncodedWeights encode_weights(std::span<const double> values, const WeightEncoding& enc) {
  EncodedWeights out;
  out.codes.reserve(values.size());
  for (double v : values) {
    const EncodedWeight e = encode_weight(v, enc);
    out.codes.push_back(e.code);
    if (e.saturated) ++out.saturated;
  }
  return out;
}

std::int64_t mac_dot(std::span<const std::uint32_t> act_codes,
                     std::span<const std::uint32_t> weight_codes, const WeightEncoding& enc) {
  if (act_codes.size() != weight_codes.size()) {
    throw ValidationError("mac_dot: length mismatch (" + std::to_string(act_codes.size()) +
                          " activations, " + std::to_string(weight_codes.size()) + " weights)");
  }
  std::int64_t acc = 0;
  for (std::size_t i = 0; i < act_codes.size(); ++i) {
    acc += static_cast<std::int64_t>(act_codes[i]) * weight_int(weight_codes[i], enc);
  }
  return acc;
}

std::int64_t mac_dot_binary(std::span<const std::uint64_t> act_bits,
                            std::span<const std::uint64_t> weight_bits, std::size_t length) {
  const std::size_t words = (length + 63) / 64;
  if (act_bits.size() < words || weight_bits.size() < words) {
    throw ValidationError("mac_dot_binary: operand shorter than " + std::to_string(length) + " bits");
  }
  std::int64_t ones = 0;
  std::int64_t agree = 0;
  for (std::size_t w = 0; w < words; ++w) {
    std::uint64_t mask = ~std::uint64_t{0};
    if (w + 1 == words && length % 64 != 0) mask = (std::uint64_t{1} << (length % 64)) - 1;
    const std::uint64_t a = act_bits[w] & mask;
    ones += std::popcount(a);
    agree += std::popcount(a & weight_bits[w]);
  }
  return 2 * agree - ones;
}

int accumulator_bits(std::int64_t length, int a_bits, const WeightEncoding& enc) {
  const std::uint64_t worst = static_cast<std::uint64_t>(length) *
                              ((std::uint64_t{1} << a_bits) - 1) *
                              static_cast<std::uint64_t>(enc.max_abs_int());
  return 1 + static_cast<int>(std::bit_width(worst));
}

std::int64_t ThresholdSet::apply(std::int64_t v) const noexcept {
  return std::upper_bound(thresholds.begin(), thresholds.end(), v) - thresholds.begin();
}

ThresholdSet build_thresholds(const QuantSpec& spec, double scale, double bias,
                              std::int64_t accumulator_bound) {
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw ValidationError("threshold scale must be positive and finite");
  }
  if (!std::isfinite(bias)) throw ValidationError("threshold bias must be finite");

  // Beyond 2^52 consecutive integers are no longer exact doubles.
  constexpr double kLimit = 4503599627370496.0;
  ThresholdSet set;
  set.thresholds.reserve(static_cast<std::size_t>(spec.max_code()));
  for (std::int64_t j = 1; j <= spec.max_code(); ++j) {
    const double target = quant_midpoint(spec, j);
    auto reaches = [&](std::int64_t v) { return scale * static_cast<double>(v) + bias >= target; };
    const double guess = std::ceil((target - bias) / scale);
    std::int64_t t;
    if (guess >= kLimit) {
      t = static_cast<std::int64_t>(kLimit);
    } else if (guess <= -kLimit) {
      t = -static_cast<std::int64_t>(kLimit);
    } else {
      t = static_cast<std::int64_t>(guess);
      while (reaches(t - 1)) --t;
      while (!reaches(t)) ++t;
    }
    if (accumulator_bound > 0) t = std::clamp(t, -accumulator_bound - 1, accumulator_bound + 1);
    set.thresholds.push_back(t);
  }
  return set;
}

void validate_thresholds(const ThresholdSet& set, int out_bits) {
  const auto expected = (std::size_t{1} << out_bits) - 1;
  if (set.thresholds.size() != expected) {
    throw ValidationError("expected " + std::to_string(expected) + " thresholds for " +
                          std::to_string(out_bits) + "-bit outputs, got " +
                          std::to_string(set.thresholds.size()));
  }
  if (!std::is_sorted(set.thresholds.begin(), set.thresholds.end())) {
    throw ValidationError("thresholds must be non-decreasing");
  }
}

}  // namespace qnnflow
