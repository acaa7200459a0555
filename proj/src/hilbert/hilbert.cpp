#include "loco/hilbert.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "loco/error.hpp"

namespace loco::hilbert {
namespace {

void check_order(unsigned order) {
  if (order > kMaxOrder) throw InvalidInput("curve order " + std::to_string(order) + " too large");
}

// Reflect/rotate a quadrant so the sub-curve has the canonical orientation.
void rotate(std::uint32_t side, std::uint32_t& x, std::uint32_t& y, std::uint32_t rx,
            std::uint32_t ry) {
  if (ry == 0) {
    if (rx == 1) {
      x = side - 1 - x;
      y = side - 1 - y;
    }
    std::swap(x, y);
  }
}

}  // namespace

Cell d2xy(unsigned order, std::uint64_t d) {
  check_order(order);
  const std::uint32_t n = std::uint32_t{1} << order;
  if (d >= std::uint64_t{n} * n) {
    throw InvalidInput("curve index " + std::to_string(d) + " outside [0, " +
                       std::to_string(std::uint64_t{n} * n) + ")");
  }
  std::uint32_t x = 0, y = 0;
  std::uint64_t t = d;
  for (std::uint32_t s = 1; s < n; s *= 2) {
    const auto rx = static_cast<std::uint32_t>(1 & (t / 2));
    const auto ry = static_cast<std::uint32_t>(1 & (t ^ rx));
    rotate(s, x, y, rx, ry);
    x += s * rx;
    y += s * ry;
    t /= 4;
  }
  return {x, y};
}

std::uint64_t xy2d(unsigned order, Cell cell) {
  check_order(order);
  const std::uint32_t n = std::uint32_t{1} << order;
  if (cell.x >= n || cell.y >= n) {
    throw InvalidInput("cell (" + std::to_string(cell.x) + "," + std::to_string(cell.y) +
                       ") outside a " + std::to_string(n) + "x" + std::to_string(n) + " grid");
  }
  std::uint32_t x = cell.x, y = cell.y;
  std::uint64_t d = 0;
  for (std::uint32_t s = n / 2; s > 0; s /= 2) {
    const std::uint32_t rx = (x & s) > 0 ? 1 : 0;
    const std::uint32_t ry = (y & s) > 0 ? 1 : 0;
    d += std::uint64_t{s} * s * ((3 * rx) ^ ry);
    rotate(n, x, y, rx, ry);
  }
  return d;
}

HilbertCurve curve_for(const Image& image, std::size_t cell_width, std::size_t cell_height) {
  if (cell_width == 0 || cell_height == 0) throw InvalidInput("cell size must be positive");
  HilbertCurve curve{0, cell_width, cell_height};
  while (curve.side() * cell_width < image.width || curve.side() * cell_height < image.height) {
    ++curve.order;
    check_order(curve.order);
  }
  return curve;
}

ScanResult scan_image(const Image& image, const HilbertCurve& curve) {
  check_order(curve.order);
  if (curve.cell_width == 0 || curve.cell_height == 0) {
    throw InvalidInput("cell size must be positive");
  }
  const std::size_t side = curve.side();
  ScanResult out;
  out.padded_width = side * curve.cell_width;
  out.padded_height = side * curve.cell_height;
  if (image.width > out.padded_width || image.height > out.padded_height) {
    throw InvalidInput("image larger than the curve's extent");
  }
  out.padded = image.width != out.padded_width || image.height != out.padded_height;

  const std::size_t depth = image.depth;
  const std::size_t window = curve.cell_width * curve.cell_height * depth;
  out.sequence = Matrix(curve.length(), window);
  for (std::size_t d = 0; d < curve.length(); ++d) {
    const Cell cell = d2xy(curve.order, d);
    auto row = out.sequence.row(d);
    std::size_t k = 0;
    for (std::size_t wy = 0; wy < curve.cell_height; ++wy) {
      const std::size_t y = cell.y * curve.cell_height + wy;
      for (std::size_t wx = 0; wx < curve.cell_width; ++wx) {
        const std::size_t x = cell.x * curve.cell_width + wx;
        for (std::size_t c = 0; c < depth; ++c, ++k) {
          row[k] = (x < image.width && y < image.height) ? image.at(x, y, c) : 0.0;
        }
      }
    }
  }
  return out;
}

std::uint64_t index_of_pixel(const HilbertCurve& curve, double px, double py) {
  const double side = static_cast<double>(curve.side());
  const double cx = std::clamp(std::floor(px / static_cast<double>(curve.cell_width)), 0.0, side - 1);
  const double cy = std::clamp(std::floor(py / static_cast<double>(curve.cell_height)), 0.0, side - 1);
  return xy2d(curve.order, Cell{static_cast<std::uint32_t>(cx), static_cast<std::uint32_t>(cy)});
}

std::pair<double, double> cell_center(const HilbertCurve& curve, std::uint64_t d) {
  const Cell c = d2xy(curve.order, d);
  return {(c.x + 0.5) * static_cast<double>(curve.cell_width),
          (c.y + 0.5) * static_cast<double>(curve.cell_height)};
}

}  // namespace loco::hilbert
