#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace qnnflow {

enum class TensorEncoding : std::uint8_t {
  unsigned_level_code = 0,
  bipolar = 1,
  twos_complement = 2,
  signed_accumulator = 3,
};

std::string_view to_string(TensorEncoding enc);

/// Immutable dense bit-packed tensor. Element i occupies bits
/// [i * bits, (i + 1) * bits) of a little-endian stream of 64-bit words, so
/// the lowest-index element sits in the least-significant bits. Elements may
/// straddle word boundaries.
///
/// Activations use dims (images, height, width, channels); weights use
/// (c_out, c_in, k, k).
class QTensor {
 public:
  QTensor() = default;

  /// Packs `codes` (one per element, row-major over `dims`). Throws
  /// ValidationError if a code does not fit in `bits` or the count is wrong.
  static QTensor pack(std::vector<std::uint32_t> dims, int bits, TensorEncoding encoding,
                      std::span<const std::uint32_t> codes);

  /// Packs signed values in two's complement of width `bits`.
  static QTensor pack_signed(std::vector<std::uint32_t> dims, int bits, TensorEncoding encoding,
                             std::span<const std::int64_t> values);

  const std::vector<std::uint32_t>& dims() const noexcept { return dims_; }
  int bits() const noexcept { return bits_; }
  TensorEncoding encoding() const noexcept { return encoding_; }
  std::size_t size() const noexcept { return size_; }

  std::uint32_t code(std::size_t index) const;
  /// Sign-extended value of element `index` (for signed encodings).
  std::int64_t signed_value(std::size_t index) const;
  std::vector<std::uint32_t> unpack() const;

  /// Payload bytes: ceil(size * bits / 8), trailing bits zero.
  std::vector<std::uint8_t> payload_bytes() const;
  std::span<const std::uint64_t> words() const noexcept { return words_; }

  /// QTNS container: "QTNS", version, encoding, bits, rank (u8 each),
  /// dims as u32 LE, then the payload bytes.
  std::vector<std::uint8_t> serialize() const;
  static QTensor deserialize(std::span<const std::uint8_t> bytes);

  void save(const std::string& path) const;
  static QTensor load(const std::string& path);

  friend bool operator==(const QTensor&, const QTensor&) = default;

 private:
  std::vector<std::uint32_t> dims_;
  int bits_ = 1;
  TensorEncoding encoding_ = TensorEncoding::unsigned_level_code;
  std::size_t size_ = 0;
  std::vector<std::uint64_t> words_;
};

inline constexpr std::uint8_t kQtnsVersion = 1;

}  // namespace qnnflow
