#include "loco/idx.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <sstream>

#include "loco/error.hpp"

namespace loco::idx {
namespace {

std::uint64_t read_be(std::string_view bytes, std::size_t pos, std::size_t n) {
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < n; ++i) v = (v << 8) | static_cast<unsigned char>(bytes[pos + i]);
  return v;
}

void write_be(std::string& out, std::uint64_t v, std::size_t n) {
  for (std::size_t i = n; i-- > 0;) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

bool known_type(std::uint8_t code) {
  switch (static_cast<ElementType>(code)) {
    case ElementType::kUint8:
    case ElementType::kInt8:
    case ElementType::kInt16:
    case ElementType::kInt32:
    case ElementType::kFloat32:
    case ElementType::kFloat64:
      return true;
  }
  return false;
}

}  // namespace

std::size_t element_size(ElementType type) {
  switch (type) {
    case ElementType::kUint8:
    case ElementType::kInt8:
      return 1;
    case ElementType::kInt16:
      return 2;
    case ElementType::kInt32:
    case ElementType::kFloat32:
      return 4;
    case ElementType::kFloat64:
      return 8;
  }
  return 0;
}

std::size_t IdxTensor::count() const {
  std::size_t n = 1;
  for (std::uint32_t d : dims) n *= d;
  return n;
}

IdxTensor decode(std::string_view bytes) {
  if (bytes.size() < 4) {
    throw FormatError("idx: header truncated at byte " + std::to_string(bytes.size()) +
                      ", need 4 magic bytes");
  }
  if (bytes[0] != 0 || bytes[1] != 0) throw FormatError("idx: bad magic at byte 0");
  const auto code = static_cast<std::uint8_t>(bytes[2]);
  if (!known_type(code)) throw FormatError("idx: unknown type code at byte 2");
  const auto ndim = static_cast<std::size_t>(static_cast<unsigned char>(bytes[3]));
  if (ndim == 0) throw FormatError("idx: zero dimensions at byte 3");

  IdxTensor t;
  t.type = static_cast<ElementType>(code);
  const std::size_t header = 4 + 4 * ndim;
  if (bytes.size() < header) {
    throw FormatError("idx: dimension table truncated at byte " + std::to_string(bytes.size()) +
                      ", expected " + std::to_string(header));
  }
  for (std::size_t i = 0; i < ndim; ++i) {
    t.dims.push_back(static_cast<std::uint32_t>(read_be(bytes, 4 + 4 * i, 4)));
  }
  const std::size_t width = element_size(t.type);
  const std::size_t expected = header + t.count() * width;
  if (bytes.size() != expected) {
    throw FormatError("idx: payload size mismatch at byte " + std::to_string(bytes.size()) +
                      ", expected " + std::to_string(expected) + " bytes in total");
  }

  t.values.resize(t.count());
  for (std::size_t i = 0; i < t.values.size(); ++i) {
    const std::uint64_t raw = read_be(bytes, header + i * width, width);
    switch (t.type) {
      case ElementType::kUint8:
        t.values[i] = static_cast<double>(raw) / 255.0;
        break;
      case ElementType::kInt8:
        t.values[i] = static_cast<std::int8_t>(raw);
        break;
      case ElementType::kInt16:
        t.values[i] = static_cast<std::int16_t>(raw);
        break;
      case ElementType::kInt32:
        t.values[i] = static_cast<std::int32_t>(raw);
        break;
      case ElementType::kFloat32:
        t.values[i] = std::bit_cast<float>(static_cast<std::uint32_t>(raw));
        break;
      case ElementType::kFloat64:
        t.values[i] = std::bit_cast<double>(raw);
        break;
    }
  }
  return t;
}

std::string encode(const IdxTensor& t) {
  if (t.dims.empty() || t.dims.size() > 255) throw InvalidInput("idx: rank must be in [1,255]");
  if (t.values.size() != t.count()) throw InvalidInput("idx: value count does not match dims");
  std::string out;
  const std::size_t width = element_size(t.type);
  out.reserve(4 + 4 * t.dims.size() + t.values.size() * width);
  out.push_back(0);
  out.push_back(0);
  out.push_back(static_cast<char>(t.type));
  out.push_back(static_cast<char>(t.dims.size()));
  for (std::uint32_t d : t.dims) write_be(out, d, 4);
  for (double v : t.values) {
    std::uint64_t raw = 0;
    switch (t.type) {
      case ElementType::kUint8:
        raw = static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
        break;
      case ElementType::kInt8:
        raw = static_cast<std::uint8_t>(static_cast<std::int8_t>(v));
        break;
      case ElementType::kInt16:
        raw = static_cast<std::uint16_t>(static_cast<std::int16_t>(v));
        break;
      case ElementType::kInt32:
        raw = static_cast<std::uint32_t>(static_cast<std::int32_t>(v));
        break;
      case ElementType::kFloat32:
        raw = std::bit_cast<std::uint32_t>(static_cast<float>(v));
        break;
      case ElementType::kFloat64:
        raw = std::bit_cast<std::uint64_t>(v);
        break;
    }
    write_be(out, raw, width);
  }
  return out;
}

IdxTensor load_idx(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("idx: cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return decode(ss.str());
}

void write_idx(const std::filesystem::path& path, const IdxTensor& tensor) {
  const std::string bytes = encode(tensor);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("idx: cannot open " + path.string() + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("idx: failed writing " + path.string());
}

}  // namespace loco::idx
