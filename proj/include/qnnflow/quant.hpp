#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace qnnflow {

/// How values outside [0, 1] are treated before quantization.
///   standard       clamp to [0, 1] (clipped ReLU)
///   paper_literal  identity on [0, 1], zero everywhere else
enum class ReluMode { standard, paper_literal };

/// Activation quantizer with 2^a equally spaced levels i / (2^a - 1) on [0, 1].
struct QuantSpec {
  int a_bits = 1;

  explicit QuantSpec(int bits);
  std::int64_t levels() const noexcept { return std::int64_t{1} << a_bits; }
  std::int64_t max_code() const noexcept { return levels() - 1; }
  double level_value(std::int64_t code) const;
};

/// Quantization decision boundary between codes j - 1 and j (j >= 1):
/// (2j - 1) / (2 * (2^a - 1)). Shared by the quantizer and the threshold
/// builder so both compare against the same double.
double quant_midpoint(const QuantSpec& spec, std::int64_t j);

/// Maps x to the nearest level code; exact midpoints round up.
/// Throws ValidationError on NaN.
std::int64_t quantize_activation(double x, const QuantSpec& spec,
                                 ReluMode mode = ReluMode::standard);

enum class WeightMode { bipolar, twos_complement };

/// W = 1 is bipolar (bit 1 -> +1, bit 0 -> -1). W > 1 is two's complement with
/// w - 2 fractional bits, i.e. values in [-2, 2 - 2^(2-w)] with step 2^(2-w).
struct WeightEncoding {
  int w_bits = 1;

  explicit WeightEncoding(int bits);
  WeightMode mode() const noexcept {
    return w_bits == 1 ? WeightMode::bipolar : WeightMode::twos_complement;
  }
  int frac_bits() const noexcept { return w_bits - 2; }
  double step() const noexcept;
  std::int64_t min_int() const noexcept;
  std::int64_t max_int() const noexcept;
  /// Largest |integer weight| the encoding can produce.
  std::int64_t max_abs_int() const noexcept;
};

struct EncodedWeight {
  std::uint32_t code = 0;
  bool saturated = false;
};

/// Encodes a real weight. Bipolar: 1 iff v >= 0. Two's complement: round to
/// nearest (ties to even) on the 2^(2-w) grid, saturating out-of-range values.
EncodedWeight encode_weight(double v, const WeightEncoding& enc);
double decode_weight(std::uint32_t code, const WeightEncoding& enc);

/// Integer value of a weight code: +/-1 for bipolar, the sign-extended
/// two's complement integer otherwise. decode = int * step for W > 1.
std::int64_t weight_int(std::uint32_t code, const WeightEncoding& enc);

struct EncodedWeights {
  std::vector<std::uint32_t> codes;
  std::size_t saturated = 0;  // values clipped to the representable range
};

EncodedWeights encode_weights(std::span<const double> values, const WeightEncoding& enc);

/// Exact integer dot product sum(code_a[i] * weight_int(code_w[i])).
/// Activation codes are level codes with implicit scale 1 / (2^a - 1).
std::int64_t mac_dot(std::span<const std::uint32_t> act_codes,
                     std::span<const std::uint32_t> weight_codes, const WeightEncoding& enc);

/// Same dot product for a = 1, w = 1 on bit-packed operands: bit i of word
/// i / 64 holds element i. Computes 2 * popcount(a & w) - popcount(a).
std::int64_t mac_dot_binary(std::span<const std::uint64_t> act_bits,
                            std::span<const std::uint64_t> weight_bits, std::size_t length);

/// Signed accumulator width that holds any dot product of `length` terms
/// with a-bit activations and the given weight encoding.
int accumulator_bits(std::int64_t length, int a_bits, const WeightEncoding& enc);

/// Per-channel thresholds t_1 <= ... <= t_{2^a - 1}. Applying them to an
/// accumulator v yields |{t : v >= t}|.
struct ThresholdSet {
  std::vector<std::int64_t> thresholds;

  std::int64_t apply(std::int64_t v) const noexcept;
  friend bool operator==(const ThresholdSet&, const ThresholdSet&) = default;
};

/// Folds the affine map scale * v + bias followed by the standard quantizer
/// into integer thresholds. When `accumulator_bound` > 0, thresholds are
/// clamped to +/-(bound + 1), which is lossless for |v| <= bound.
/// Throws ValidationError when scale <= 0 or not finite.
ThresholdSet build_thresholds(const QuantSpec& spec, double scale, double bias,
                              std::int64_t accumulator_bound = 0);

/// Throws ValidationError unless thresholds are non-decreasing and count
/// 2^out_bits - 1.
void validate_thresholds(const ThresholdSet& set, int out_bits);

}  // namespace qnnflow
