#pragma once

// Hilbert space-filling curve over a 2^n x 2^n grid of cells and the image
// scan that turns a picture into a causal sequence of flattened windows.

#include <cstddef>
#include <cstdint>
#include <utility>

#include "loco/matrix.hpp"

namespace loco::hilbert {

struct Cell {
  std::uint32_t x = 0;
  std::uint32_t y = 0;
  friend bool operator==(const Cell&, const Cell&) = default;
};

/// Order-n curve (2^n x 2^n cells), each cell `cell_width` x `cell_height` pixels.
struct HilbertCurve {
  unsigned order = 0;
  std::size_t cell_width = 1;
  std::size_t cell_height = 1;

  std::uint32_t side() const { return std::uint32_t{1} << order; }
  std::size_t length() const { return std::size_t{side()} * side(); }
};

inline constexpr unsigned kMaxOrder = 15;

Cell d2xy(unsigned order, std::uint64_t d);
std::uint64_t xy2d(unsigned order, Cell cell);

/// Image stored row-major as [y][x][channel].
struct Image {
  std::size_t width = 0;
  std::size_t height = 0;
  std::size_t depth = 1;
  std::vector<double> pixels;

  Image() = default;
  Image(std::size_t w, std::size_t h, std::size_t d = 1)
      : width(w), height(h), depth(d), pixels(w * h * d, 0.0) {}

  double& at(std::size_t x, std::size_t y, std::size_t c = 0) {
    return pixels[(y * width + x) * depth + c];
  }
  double at(std::size_t x, std::size_t y, std::size_t c = 0) const {
    return pixels[(y * width + x) * depth + c];
  }
  friend bool operator==(const Image&, const Image&) = default;
};

struct ScanResult {
  Matrix sequence;  // 4^n x (cell_width * cell_height * depth)
  std::size_t padded_width = 0;
  std::size_t padded_height = 0;
  bool padded = false;
};

/// Windows in curve order; each window is flattened row by row, channel
/// innermost. Images smaller than the curve's extent are zero-padded on the
/// right and bottom; larger images are rejected.
ScanResult scan_image(const Image& image, const HilbertCurve& curve);

/// Smallest curve with the given cell size that covers the image.
HilbertCurve curve_for(const Image& image, std::size_t cell_width, std::size_t cell_height);

/// Curve index of the cell containing pixel coordinate (px, py).
std::uint64_t index_of_pixel(const HilbertCurve& curve, double px, double py);

/// Pixel coordinates of the center of the cell at curve index d.
std::pair<double, double> cell_center(const HilbertCurve& curve, std::uint64_t d);

}  // namespace loco::hilbert
