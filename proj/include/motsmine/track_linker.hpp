#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "motsmine/mask.hpp"
#include "motsmine/segment.hpp"
#include "motsmine/track_graph.hpp"

namespace motsmine {

// Association parameters. The payoff terms can be toggled independently.
struct LinkerConfig {
  double tau = 1.0;            // maximum dissimilarity for a valid link
  std::int64_t window = 12;    // frames a track end stays linkable
  std::int64_t min_track = 5;  // shorter tracks are discarded
  bool use_embedding = true;
  bool use_time = true;
  bool use_siou = false;

  void validate() const;
};

struct Track {
  TrackId id = 0;
  std::vector<SegmentId> segments;  // frames strictly increasing

  friend bool operator==(const Track&, const Track&) = default;
};

// Signed IoU: positive and equal to the IoU for overlapping boxes, negative
// and decreasing with distance for disjoint ones. Built on the extended
// intersection (max u1, max v1, min u2, min v2), whose area is counted
// negative when it is not a proper box. 0 when both boxes have zero area.
double siou(const BBox& a, const BBox& b);

// Dissimilarity of linking `prev` to the later `cur`:
//   [siou] sIoU(cur.box, prev.box) + [embedding] |a_cur - a_prev|
//     + [time] |t_cur - t_prev| / window
double dissimilarity(const Segment& prev, const Segment& cur, const LinkerConfig& cfg);

// -dissimilarity for same-class pairs within tau, kInfeasible otherwise.
// Throws ValidationError if an enabled embedding term lacks embeddings.
double inference_payoff(const Segment& prev, const Segment& cur, const LinkerConfig& cfg);

// Track ends still open for frame t: vertices from frames [t - window, t)
// without a successor, in insertion order.
std::vector<SegmentId> candidate_set(const TrackGraph& g, std::int64_t t,
                                     std::int64_t window);

// Builds the association graph frame by frame; frames[t] holds frame t.
TrackGraph build_link_graph(std::span<const std::vector<Segment>> frames,
                            const LinkerConfig& cfg);

// Associates detections into tracks and drops those shorter than min_track.
std::vector<Track> link_sequence(std::span<const std::vector<Segment>> frames,
                                 const LinkerConfig& cfg);

// Keeps tracks with at least `min_length` segments and renumbers them 0..k-1
// in their existing order.
std::vector<Track> filter_short_tracks(std::vector<Track> tracks, std::int64_t min_length);

}  // namespace motsmine
