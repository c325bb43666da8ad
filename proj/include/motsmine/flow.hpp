#pragma once

#include <cstdint>
#include <vector>

#include "motsmine/mask.hpp"

namespace motsmine {

struct FlowVector {
  float du = 0.0f;
  float dv = 0.0f;
  friend bool operator==(const FlowVector&, const FlowVector&) = default;
};

// Dense backward flow: pixel (u, v) of frame t sits at (u + du, v + dv) in
// frame t-1. Vectors are stored row-major. A non-finite component marks a
// pixel with no source in frame t-1.
struct FlowField {
  std::int64_t height = 0;
  std::int64_t width = 0;
  std::vector<FlowVector> vectors;

  FlowField() = default;
  FlowField(std::int64_t h, std::int64_t w, FlowVector fill = {})
      : height(h), width(w), vectors(static_cast<std::size_t>(h * w), fill) {}

  const FlowVector& at(std::int64_t row, std::int64_t col) const {
    return vectors[static_cast<std::size_t>(row * width + col)];
  }
  FlowVector& at(std::int64_t row, std::int64_t col) {
    return vectors[static_cast<std::size_t>(row * width + col)];
  }

  friend bool operator==(const FlowField&, const FlowField&) = default;
};

// Pulls a frame t-1 mask forward to frame t: output (u, v) is set iff the
// source mask is set at the nearest pixel to (u + du, v + dv). Lookups outside
// the grid, or through non-finite vectors, read as background.
Mask warp_mask(const Mask& m, const FlowField& flow);

}  // namespace motsmine
