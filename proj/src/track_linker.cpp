#include "motsmine/track_linker.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "motsmine/errors.hpp"
#include "motsmine/lap.hpp"

namespace motsmine {

void LinkerConfig::validate() const {
  if (!std::isfinite(tau)) throw ValidationError("tau must be finite");
  if (window < 1) throw ValidationError("window must be >= 1");
  if (min_track < 1) throw ValidationError("min_track must be >= 1");
  if (!use_embedding && !use_time && !use_siou) {
    throw ValidationError("at least one payoff term must be enabled");
  }
}

double siou(const BBox& a, const BBox& b) {
  auto area = [](const BBox& x) { return std::abs(x.u2 - x.u1) * std::abs(x.v2 - x.v1); };
  const BBox inter{std::max(a.u1, b.u1), std::max(a.v1, b.v1), std::min(a.u2, b.u2),
                   std::min(a.v2, b.v2)};
  const double area_a = area(a);
  const double area_b = area(b);
  if (area_a == 0.0 && area_b == 0.0) return 0.0;
  const double signed_inter = inter.is_empty() ? -area(inter) : area(inter);
  const double denom = area_a + area_b - signed_inter;
  if (denom == 0.0) return 0.0;
  return signed_inter / denom;
}

double dissimilarity(const Segment& prev, const Segment& cur, const LinkerConfig& cfg) {
  double total = 0.0;
  if (cfg.use_siou) total += siou(cur.box, prev.box);
  if (cfg.use_embedding) {
    if (!prev.embedding || !cur.embedding) {
      std::ostringstream msg;
      msg << "embedding term enabled but segment "
          << (prev.embedding ? cur.id : prev.id) << " has no embedding";
      throw ValidationError(msg.str());
    }
    const auto& x = *cur.embedding;
    const auto& y = *prev.embedding;
    if (x.size() != y.size()) {
      std::ostringstream msg;
      msg << "embedding dimensions differ between segments " << prev.id << " and " << cur.id;
      throw ValidationError(msg.str());
    }
    double sq = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) sq += (x[k] - y[k]) * (x[k] - y[k]);
    total += std::sqrt(sq);
  }
  if (cfg.use_time) {
    total += static_cast<double>(std::abs(cur.frame - prev.frame)) /
             static_cast<double>(cfg.window);
  }
  return total;
}

double inference_payoff(const Segment& prev, const Segment& cur, const LinkerConfig& cfg) {
  if (prev.label != cur.label) return kInfeasible;
  const double d = dissimilarity(prev, cur, cfg);
  if (!(d <= cfg.tau)) return kInfeasible;
  return -d;
}

std::vector<SegmentId> candidate_set(const TrackGraph& g, std::int64_t t,
                                     std::int64_t window) {
  std::vector<SegmentId> out;
  for (const Segment& s : g.vertices()) {
    if (s.frame >= t - window && s.frame < t && !g.successor(s.id)) out.push_back(s.id);
  }
  return out;
}

TrackGraph build_link_graph(std::span<const std::vector<Segment>> frames,
                            const LinkerConfig& cfg) {
  cfg.validate();
  TrackGraph g;
  for (std::size_t t = 0; t < frames.size(); ++t) {
    const auto frame = static_cast<std::int64_t>(t);
    const auto& current = frames[t];
    for (const Segment& s : current) {
      if (s.frame != frame) {
        std::ostringstream msg;
        msg << "segment " << s.id << " is in frame " << s.frame << ", expected " << frame;
        throw ValidationError(msg.str());
      }
    }
    const std::vector<SegmentId> open = candidate_set(g, frame, cfg.window);
    for (const Segment& s : current) g.add_vertex(s);
    if (open.empty() || current.empty()) continue;

    PayoffMatrix payoff(open.size(), current.size());
    for (std::size_t r = 0; r < open.size(); ++r) {
      const Segment& prev = g.vertex(open[r]);
      for (std::size_t c = 0; c < current.size(); ++c) {
        payoff.set(r, c, inference_payoff(prev, current[c], cfg));
      }
    }
    for (const auto& [r, c] : solve_relaxed_lap(payoff).pairs) {
      g.add_edge(open[r], current[c].id);
    }
  }
  return g;
}

std::vector<Track> link_sequence(std::span<const std::vector<Segment>> frames,
                                 const LinkerConfig& cfg) {
  const TrackGraph g = build_link_graph(frames, cfg);
  std::vector<Track> tracks;
  for (auto& path : tracklets(g)) {
    tracks.push_back(Track{static_cast<TrackId>(tracks.size()), std::move(path)});
  }
  return filter_short_tracks(std::move(tracks), cfg.min_track);
}

std::vector<Track> filter_short_tracks(std::vector<Track> tracks, std::int64_t min_length) {
  std::vector<Track> kept;
  for (Track& t : tracks) {
    if (static_cast<std::int64_t>(t.segments.size()) >= min_length) {
      t.id = static_cast<TrackId>(kept.size());
      kept.push_back(std::move(t));
    }
  }
  return kept;
}

}  // namespace motsmine
