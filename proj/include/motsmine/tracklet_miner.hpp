#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "motsmine/flow.hpp"
#include "motsmine/mask.hpp"
#include "motsmine/segment.hpp"
#include "motsmine/track_graph.hpp"

namespace motsmine {

// Gates on the intersection statistics of a frame-t segment.
struct MinerConfig {
  double tau0 = 10.0;  // pixels: minimum margin b1 - b2
  double tau1 = 10.0;  // pixels: minimum b1
  double tau2 = 2.0;   // minimum ratio b1 / r

  // Throws ValidationError if any threshold is negative or non-finite.
  void validate() const;
};

// 0 if the pair is a valid mapping, kInfeasible otherwise. A segment is
// rejected when b1 - b2 < tau0, b1 < tau1 or b1 / r < tau2, with b1 / r
// taken as +inf when r == 0.
double eta_mining(const IntersectionStats& stats, bool same_class,
                  const MinerConfig& cfg);

// Frame t-1 segments together with their masks warped into frame t.
class WarpCache {
 public:
  WarpCache(std::span<const Segment> previous, const FlowField& flow);

  std::size_t size() const { return previous_.size(); }
  const Segment& previous(std::size_t i) const { return previous_[i]; }
  const Mask& warped(std::size_t i) const { return warped_[i]; }
  // Statistics of `s` against the warped masks sharing its class.
  IntersectionStats stats_for(const Segment& s) const;

 private:
  std::vector<Segment> previous_;
  std::vector<Mask> warped_;
};

// IoU(cur, warped prev) + eta; kInfeasible absorbs the sum.
double mining_payoff(const WarpCache& cache, std::size_t prev_index,
                     const Segment& cur, const MinerConfig& cfg);

// Adds frame `frame`'s segments to the graph and links them to the frame-1
// segments through a relaxed assignment on mining_payoff. Throws
// ValidationError if a segment is not in `frame` or the graph already holds
// frames >= `frame`.
void mine_step(TrackGraph& g, std::int64_t frame, std::span<const Segment> segments,
               const FlowField& flow, const MinerConfig& cfg);

struct MiningFrame {
  std::vector<Segment> segments;
  std::optional<FlowField> flow;  // backward flow into the previous frame
};

// Folds mine_step over frames 0..n-1; every frame after the first needs flow.
TrackGraph mine_sequence(std::span<const MiningFrame> frames, const MinerConfig& cfg);

}  // namespace motsmine
