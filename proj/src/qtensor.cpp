#include "qnnflow/qtensor.hpp"

#include <cstring>
#include <fstream>
#include <iterator>
#include <numeric>

#include "qnnflow/errors.hpp"

namespace qnnflow {

std::string_view to_string(TensorEncoding enc) {
  switch (enc) {
    case TensorEncoding::unsigned_level_code: return "unsigned_level_code";
    case TensorEncoding::bipolar: return "bipolar";
    case TensorEncoding::twos_complement: return "twos_complement";
    case TensorEncoding::signed_accumulator: return "signed_accumulator";
  }
  return "?";
}

namespace {

constexpr char kMagic[4] = {'Q', 'T', 'N', 'S'};

std::size_t element_count(const std::vector<std::uint32_t>& dims) {
  return std::accumulate(dims.begin(), dims.end(), std::size_t{1},
                         [](std::size_t a, std::uint32_t b) { return a * b; });
}

void check_header(int bits, TensorEncoding encoding) {
  if (bits < 1 || bits > 32) throw ValidationError("tensor bit width must be in 1..32");
  if (encoding == TensorEncoding::bipolar && bits != 1) {
    throw ValidationError("bipolar tensors must be 1 bit wide");
  }
  if (static_cast<std::uint8_t>(encoding) > 3) throw ValidationError("unknown tensor encoding");
}

std::uint64_t mask_for(int bits) {
  return bits == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << bits) - 1;
}

}  // namespace

QTensor QTensor::pack(std::vector<std::uint32_t> dims, int bits, TensorEncoding encoding,
                      std::span<const std::uint32_t> codes) {
  check_header(bits, encoding);
  QTensor t;
  t.size_ = element_count(dims);
  if (codes.size() != t.size_) {
    throw ValidationError("tensor expects " + std::to_string(t.size_) + " elements, got " +
                          std::to_string(codes.size()));
  }
  t.dims_ = std::move(dims);
  t.bits_ = bits;
  t.encoding_ = encoding;
  const std::uint64_t mask = mask_for(bits);
  t.words_.assign((t.size_ * static_cast<std::size_t>(bits) + 63) / 64, 0);
  for (std::size_t i = 0; i < codes.size(); ++i) {
    const std::uint64_t c = codes[i];
    if (c > mask) {
      throw ValidationError("element " + std::to_string(i) + " code " + std::to_string(c) +
                            " does not fit in " + std::to_string(bits) + " bits");
    }
    const std::size_t bit = i * static_cast<std::size_t>(bits);
    const std::size_t word = bit / 64;
    const unsigned shift = bit % 64;
    t.words_[word] |= c << shift;
    if (shift + static_cast<unsigned>(bits) > 64) t.words_[word + 1] |= c >> (64 - shift);
  }
  return t;
}

QTensor QTensor::pack_signed(std::vector<std::uint32_t> dims, int bits, TensorEncoding encoding,
                             std::span<const std::int64_t> values) {
  const std::int64_t lo = -(std::int64_t{1} << (bits - 1));
  const std::int64_t hi = (std::int64_t{1} << (bits - 1)) - 1;
  std::vector<std::uint32_t> codes;
  codes.reserve(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] < lo || values[i] > hi) {
      throw ValidationError("element " + std::to_string(i) + " value " + std::to_string(values[i]) +
                            " does not fit in " + std::to_string(bits) + " signed bits");
    }
    codes.push_back(static_cast<std::uint32_t>(static_cast<std::uint64_t>(values[i]) & mask_for(bits)));
  }
  return pack(std::move(dims), bits, encoding, codes);
}

std::uint32_t QTensor::code(std::size_t index) const {
  if (index >= size_) throw ValidationError("tensor index out of range");
  const std::size_t bit = index * static_cast<std::size_t>(bits_);
  const std::size_t word = bit / 64;
  const unsigned shift = bit % 64;
  std::uint64_t v = words_[word] >> shift;
  if (shift + static_cast<unsigned>(bits_) > 64) v |= words_[word + 1] << (64 - shift);
  return static_cast<std::uint32_t>(v & mask_for(bits_));
}

std::int64_t QTensor::signed_value(std::size_t index) const {
  const std::int64_t c = code(index);
  const std::int64_t sign = std::int64_t{1} << (bits_ - 1);
  return (c & sign) ? c - (std::int64_t{1} << bits_) : c;
}

std::vector<std::uint32_t> QTensor::unpack() const {
  std::vector<std::uint32_t> out(size_);
  for (std::size_t i = 0; i < size_; ++i) out[i] = code(i);
  return out;
}

std::vector<std::uint8_t> QTensor::payload_bytes() const {
  const std::size_t nbytes = (size_ * static_cast<std::size_t>(bits_) + 7) / 8;
  std::vector<std::uint8_t> out(nbytes);
  for (std::size_t i = 0; i < nbytes; ++i) {
    out[i] = static_cast<std::uint8_t>(words_[i / 8] >> (8 * (i % 8)));
  }
  return out;
}

std::vector<std::uint8_t> QTensor::serialize() const {
  std::vector<std::uint8_t> out(std::begin(kMagic), std::end(kMagic));
  out.push_back(kQtnsVersion);
  out.push_back(static_cast<std::uint8_t>(encoding_));
  out.push_back(static_cast<std::uint8_t>(bits_));
  out.push_back(static_cast<std::uint8_t>(dims_.size()));
  for (std::uint32_t d : dims_) {
    for (int b = 0; b < 4; ++b) out.push_back(static_cast<std::uint8_t>(d >> (8 * b)));
  }
  const auto payload = payload_bytes();
  out.insert(out.end(), payload.begin(), payload.end());
  return out;
}

QTensor QTensor::deserialize(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 8 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw ParseError("not a QTNS tensor (bad magic)");
  }
  if (bytes[4] != kQtnsVersion) {
    throw ParseError("unsupported QTNS version " + std::to_string(bytes[4]));
  }
  if (bytes[5] > 3) throw ParseError("unknown QTNS encoding " + std::to_string(bytes[5]));
  const auto encoding = static_cast<TensorEncoding>(bytes[5]);
  const int bits = bytes[6];
  const std::size_t rank = bytes[7];
  if (bytes.size() < 8 + 4 * rank) throw ParseError("truncated QTNS header");
  std::vector<std::uint32_t> dims(rank);
  for (std::size_t r = 0; r < rank; ++r) {
    std::uint32_t d = 0;
    for (int b = 0; b < 4; ++b) d |= std::uint32_t{bytes[8 + 4 * r + b]} << (8 * b);
    dims[r] = d;
  }
  try {
    check_header(bits, encoding);
  } catch (const ValidationError& e) {
    throw ParseError(std::string("QTNS header: ") + e.what());
  }
  QTensor t;
  t.size_ = element_count(dims);
  const std::size_t nbytes = (t.size_ * static_cast<std::size_t>(bits) + 7) / 8;
  const auto payload = bytes.subspan(8 + 4 * rank);
  if (payload.size() != nbytes) {
    throw ParseError("QTNS payload is " + std::to_string(payload.size()) + " bytes, expected " +
                     std::to_string(nbytes));
  }
  t.dims_ = std::move(dims);
  t.bits_ = bits;
  t.encoding_ = encoding;
  t.words_.assign((t.size_ * static_cast<std::size_t>(bits) + 63) / 64, 0);
  for (std::size_t i = 0; i < nbytes; ++i) {
    t.words_[i / 8] |= std::uint64_t{payload[i]} << (8 * (i % 8));
  }
  const std::size_t used = t.size_ * static_cast<std::size_t>(bits);
  if (used % 8 != 0 && (payload[nbytes - 1] >> (used % 8)) != 0) {
    throw ParseError("QTNS padding bits must be zero");
  }
  return t;
}

void QTensor::save(const std::string& path) const {
  const auto bytes = serialize();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

QTensor QTensor::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path + "'");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize(bytes);
}

}  // namespace qnnflow
