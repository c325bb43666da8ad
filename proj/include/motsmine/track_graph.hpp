#pragma once

#include <cstdint>
#include <optional>
#include <unordered_map>
#include <utility>
#include <vector>

#include "motsmine/segment.hpp"

namespace motsmine {

using Edge = std::pair<SegmentId, SegmentId>;  // (predecessor, successor)

// Segments as vertices, matches as directed edges forward in time. Every
// vertex has at most one successor and one predecessor, so the connected
// components are simple paths.
class TrackGraph {
 public:
  // Throws ValidationError on a duplicate id.
  void add_vertex(Segment s);
  // Throws ValidationError if either end is unknown, already linked in that
  // direction, of a different class, or not strictly later in time.
  void add_edge(SegmentId predecessor, SegmentId successor);

  bool contains(SegmentId id) const { return index_.count(id) != 0; }
  const Segment& vertex(SegmentId id) const;
  // Vertices in insertion order.
  const std::vector<Segment>& vertices() const { return vertices_; }
  const std::vector<Edge>& edges() const { return edges_; }
  std::optional<SegmentId> successor(SegmentId id) const;
  std::optional<SegmentId> predecessor(SegmentId id) const;
  // Largest frame index among the vertices, if any.
  std::optional<std::int64_t> last_frame() const { return last_frame_; }

 private:
  std::vector<Segment> vertices_;
  std::vector<Edge> edges_;
  std::unordered_map<SegmentId, std::size_t> index_;
  std::unordered_map<SegmentId, SegmentId> next_;
  std::unordered_map<SegmentId, SegmentId> prev_;
  std::optional<std::int64_t> last_frame_;
};

// Connected components as frame-ordered id lists, sorted by (first frame,
// first detection index). Isolated vertices form length-1 tracklets.
std::vector<std::vector<SegmentId>> tracklets(const TrackGraph& g);

}  // namespace motsmine
