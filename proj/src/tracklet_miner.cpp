#include "motsmine/tracklet_miner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "motsmine/errors.hpp"
#include "motsmine/lap.hpp"

namespace motsmine {

void MinerConfig::validate() const {
  for (double t : {tau0, tau1, tau2}) {
    if (!std::isfinite(t) || t < 0.0) {
      throw ValidationError("miner thresholds must be finite and non-negative");
    }
  }
}

double eta_mining(const IntersectionStats& stats, bool same_class,
                  const MinerConfig& cfg) {
  if (!same_class) return kInfeasible;
  const auto b1 = static_cast<double>(stats.b1);
  const auto b2 = static_cast<double>(stats.b2);
  const double ratio = stats.r == 0 ? std::numeric_limits<double>::infinity()
                                    : b1 / static_cast<double>(stats.r);
  if (b1 - b2 < cfg.tau0 || b1 < cfg.tau1 || ratio < cfg.tau2) return kInfeasible;
  return 0.0;
}

WarpCache::WarpCache(std::span<const Segment> previous, const FlowField& flow)
    : previous_(previous.begin(), previous.end()) {
  warped_.reserve(previous_.size());
  for (const Segment& s : previous_) warped_.push_back(warp_mask(s.mask, flow));
}

IntersectionStats WarpCache::stats_for(const Segment& s) const {
  std::vector<Mask> same_class;
  for (std::size_t i = 0; i < previous_.size(); ++i) {
    if (previous_[i].label == s.label) same_class.push_back(warped_[i]);
  }
  return intersection_stats(s.mask, same_class);
}

namespace {

double payoff_with_stats(const WarpCache& cache, std::size_t prev_index,
                         const Segment& cur, const IntersectionStats& stats,
                         const MinerConfig& cfg) {
  const double eta = eta_mining(stats, cache.previous(prev_index).label == cur.label, cfg);
  if (eta == kInfeasible) return kInfeasible;
  return mask_iou(cur.mask, cache.warped(prev_index)) + eta;
}

}  // namespace

double mining_payoff(const WarpCache& cache, std::size_t prev_index,
                     const Segment& cur, const MinerConfig& cfg) {
  return payoff_with_stats(cache, prev_index, cur, cache.stats_for(cur), cfg);
}

void mine_step(TrackGraph& g, std::int64_t frame, std::span<const Segment> segments,
               const FlowField& flow, const MinerConfig& cfg) {
  for (const Segment& s : segments) {
    if (s.frame != frame) {
      std::ostringstream msg;
      msg << "segment " << s.id << " is in frame " << s.frame << ", expected " << frame;
      throw ValidationError(msg.str());
    }
  }
  if (auto last = g.last_frame(); last && *last >= frame) {
    std::ostringstream msg;
    msg << "graph already holds frame " << *last << ", cannot add frame " << frame;
    throw ValidationError(msg.str());
  }

  std::vector<Segment> previous;
  const auto& vertices = g.vertices();
  for (auto it = vertices.rbegin(); it != vertices.rend() && it->frame >= frame - 1; ++it) {
    previous.push_back(*it);
  }
  std::reverse(previous.begin(), previous.end());

  for (const Segment& s : segments) g.add_vertex(s);
  if (previous.empty() || segments.empty()) return;

  WarpCache cache(previous, flow);
  PayoffMatrix payoff(previous.size(), segments.size());
  for (std::size_t c = 0; c < segments.size(); ++c) {
    const IntersectionStats stats = cache.stats_for(segments[c]);
    for (std::size_t r = 0; r < previous.size(); ++r) {
      payoff.set(r, c, payoff_with_stats(cache, r, segments[c], stats, cfg));
    }
  }
  for (const auto& [r, c] : solve_relaxed_lap(payoff).pairs) {
    g.add_edge(previous[r].id, segments[c].id);
  }
}

TrackGraph mine_sequence(std::span<const MiningFrame> frames, const MinerConfig& cfg) {
  cfg.validate();
  TrackGraph g;
  for (std::size_t t = 0; t < frames.size(); ++t) {
    const auto frame = static_cast<std::int64_t>(t);
    if (t == 0) {
      for (const Segment& s : frames[t].segments) {
        if (s.frame != 0) {
          std::ostringstream msg;
          msg << "segment " << s.id << " is in frame " << s.frame << ", expected 0";
          throw ValidationError(msg.str());
        }
        g.add_vertex(s);
      }
      continue;
    }
    if (!frames[t].flow) {
      std::ostringstream msg;
      msg << "missing flow for frame " << t;
      throw ValidationError(msg.str());
    }
    mine_step(g, frame, frames[t].segments, *frames[t].flow, cfg);
  }
  return g;
}

}  // namespace motsmine
