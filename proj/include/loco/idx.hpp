#pragma once

// IDX tensor files (the MNIST container): two zero bytes, a type code, the
// number of dimensions, big-endian u32 dimension sizes, then big-endian
// element data in row-major order.

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace loco::idx {

enum class ElementType : std::uint8_t {
  kUint8 = 0x08,
  kInt8 = 0x09,
  kInt16 = 0x0B,
  kInt32 = 0x0C,
  kFloat32 = 0x0D,
  kFloat64 = 0x0E,
};

std::size_t element_size(ElementType type);

/// Decoded tensor. Unsigned-byte payloads are mapped to [0,1] by /255;
/// every other type keeps its numeric value.
struct IdxTensor {
  ElementType type = ElementType::kUint8;
  std::vector<std::uint32_t> dims;
  std::vector<double> values;

  std::size_t count() const;
};

IdxTensor decode(std::string_view bytes);
std::string encode(const IdxTensor& tensor);

IdxTensor load_idx(const std::filesystem::path& path);
void write_idx(const std::filesystem::path& path, const IdxTensor& tensor);

}  // namespace loco::idx
