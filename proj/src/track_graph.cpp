#include "motsmine/track_graph.hpp"

#include <algorithm>
#include <sstream>

#include "motsmine/errors.hpp"

namespace motsmine {

void TrackGraph::add_vertex(Segment s) {
  if (contains(s.id)) {
    std::ostringstream msg;
    msg << "duplicate segment id " << s.id;
    throw ValidationError(msg.str());
  }
  last_frame_ = last_frame_ ? std::max(*last_frame_, s.frame) : s.frame;
  index_.emplace(s.id, vertices_.size());
  vertices_.push_back(std::move(s));
}

void TrackGraph::add_edge(SegmentId predecessor, SegmentId successor) {
  std::ostringstream msg;
  if (!contains(predecessor) || !contains(successor)) {
    msg << "edge (" << predecessor << ", " << successor << ") references an unknown segment";
    throw ValidationError(msg.str());
  }
  const Segment& a = vertex(predecessor);
  const Segment& b = vertex(successor);
  if (next_.count(predecessor) || prev_.count(successor)) {
    msg << "edge (" << predecessor << ", " << successor << ") would exceed degree 1";
    throw ValidationError(msg.str());
  }
  if (a.label != b.label) {
    msg << "edge (" << predecessor << ", " << successor << ") joins classes '"
        << a.label << "' and '" << b.label << "'";
    throw ValidationError(msg.str());
  }
  if (b.frame <= a.frame) {
    msg << "edge (" << predecessor << ", " << successor << ") goes backwards in time";
    throw ValidationError(msg.str());
  }
  next_.emplace(predecessor, successor);
  prev_.emplace(successor, predecessor);
  edges_.emplace_back(predecessor, successor);
}

const Segment& TrackGraph::vertex(SegmentId id) const {
  auto it = index_.find(id);
  if (it == index_.end()) {
    std::ostringstream msg;
    msg << "unknown segment id " << id;
    throw ValidationError(msg.str());
  }
  return vertices_[it->second];
}

std::optional<SegmentId> TrackGraph::successor(SegmentId id) const {
  auto it = next_.find(id);
  if (it == next_.end()) return std::nullopt;
  return it->second;
}

std::optional<SegmentId> TrackGraph::predecessor(SegmentId id) const {
  auto it = prev_.find(id);
  if (it == prev_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::vector<SegmentId>> tracklets(const TrackGraph& g) {
  std::vector<const Segment*> heads;
  for (const Segment& s : g.vertices()) {
    if (!g.predecessor(s.id)) heads.push_back(&s);
  }
  std::stable_sort(heads.begin(), heads.end(), [](const Segment* a, const Segment* b) {
    if (a->frame != b->frame) return a->frame < b->frame;
    return a->det_index < b->det_index;
  });
  std::vector<std::vector<SegmentId>> out;
  out.reserve(heads.size());
  for (const Segment* head : heads) {
    std::vector<SegmentId> path{head->id};
    for (auto next = g.successor(head->id); next; next = g.successor(*next)) {
      path.push_back(*next);
    }
    out.push_back(std::move(path));
  }
  return out;
}

}  // namespace motsmine
