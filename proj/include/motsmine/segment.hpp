#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "motsmine/mask.hpp"

namespace motsmine {

using SegmentId = std::int64_t;
using TrackId = std::int64_t;

// One detected instance in one frame.
struct Segment {
  SegmentId id = 0;        // unique within a sequence
  std::int64_t frame = 0;
  std::int64_t det_index = 0;  // position among the frame's records on disk
  std::string label;
  Mask mask;
  BBox box;
  double score = 1.0;
  std::optional<std::vector<double>> embedding;  // unit L2 norm
  std::optional<TrackId> gt_track;
};

inline constexpr double kUnitNormTolerance = 1e-6;

}  // namespace motsmine
