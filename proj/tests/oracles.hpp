#pragma once

// Reference computations used only by tests. They work on dense pixel grids
// and plain loops, independently of the run-length code paths they check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "motsmine/embedding.hpp"
#include "motsmine/mask.hpp"
#include "motsmine/segment.hpp"

namespace motsmine::testing {

// Row-major dense binary grid.
struct Grid {
  std::int64_t h = 0;
  std::int64_t w = 0;
  std::vector<std::uint8_t> px;

  Grid(std::int64_t height, std::int64_t width)
      : h(height), w(width), px(static_cast<std::size_t>(height * width), 0) {}

  std::uint8_t& at(std::int64_t r, std::int64_t c) { return px[static_cast<std::size_t>(r * w + c)]; }
  std::uint8_t at(std::int64_t r, std::int64_t c) const {
    return px[static_cast<std::size_t>(r * w + c)];
  }

  Mask to_mask() const {
    return Mask::from_predicate(h, w, [&](std::int64_t r, std::int64_t c) { return at(r, c) != 0; });
  }

  static Grid from_mask(const Mask& m) {
    Grid g(m.height(), m.width());
    // Independent decode: walk the runs pixel by pixel.
    std::int64_t pos = 0;
    for (std::size_t i = 0; i < m.runs().size(); ++i) {
      for (std::uint32_t k = 0; k < m.runs()[i]; ++k, ++pos) {
        g.at(pos % m.height(), pos / m.height()) = static_cast<std::uint8_t>(i % 2);
      }
    }
    return g;
  }

  friend bool operator==(const Grid&, const Grid&) = default;
};

inline Grid block(std::int64_t h, std::int64_t w, std::int64_t r0, std::int64_t c0,
                  std::int64_t r1, std::int64_t c1) {
  Grid g(h, w);
  for (std::int64_t r = r0; r < r1; ++r) {
    for (std::int64_t c = c0; c < c1; ++c) g.at(r, c) = 1;
  }
  return g;
}

inline Segment make_segment(SegmentId id, std::int64_t frame, std::int64_t det_index,
                            std::string label, Mask mask) {
  Segment s;
  s.id = id;
  s.frame = frame;
  s.det_index = det_index;
  s.label = std::move(label);
  s.box = mask_bbox(mask);
  s.mask = std::move(mask);
  return s;
}

inline std::uint64_t count(const Grid& g) {
  return static_cast<std::uint64_t>(std::count(g.px.begin(), g.px.end(), 1));
}

inline std::uint64_t count_and(const Grid& a, const Grid& b) {
  std::uint64_t n = 0;
  for (std::size_t i = 0; i < a.px.size(); ++i) n += a.px[i] && b.px[i];
  return n;
}

inline double iou(const Grid& a, const Grid& b) {
  std::uint64_t inter = count_and(a, b);
  std::uint64_t uni = count(a) + count(b) - inter;
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

inline Grid random_grid(std::mt19937_64& rng, std::int64_t h, std::int64_t w, double density) {
  Grid g(h, w);
  std::bernoulli_distribution on(density);
  for (auto& p : g.px) p = on(rng) ? 1 : 0;
  return g;
}

// Naive mask pooling: column by column, row by row, over a dense grid.
inline std::vector<double> naive_mask_pool(const FeatureMap& x, const Grid& g) {
  std::vector<double> out(static_cast<std::size_t>(x.channels), 0.0);
  double n = 0.0;
  for (std::int64_t c = 0; c < g.w; ++c) {
    for (std::int64_t r = 0; r < g.h; ++r) n += g.at(r, c);
  }
  for (std::int64_t ch = 0; ch < x.channels; ++ch) {
    double sum = 0.0;
    for (std::int64_t c = 0; c < g.w; ++c) {
      for (std::int64_t r = 0; r < g.h; ++r) {
        if (g.at(r, c)) sum += x.at(ch, r, c);
      }
    }
    out[static_cast<std::size_t>(ch)] = sum / n;
  }
  return out;
}

inline double euclid(const std::vector<double>& a, const std::vector<double>& b) {
  double sq = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) sq += (a[k] - b[k]) * (a[k] - b[k]);
  return std::sqrt(sq);
}

// Batch-hard triplet loss by enumerating every (anchor, positive, negative)
// triple: the per-anchor term is max over triples of the margin violation,
// clamped at zero.
inline double enumerated_triplet_loss(const std::vector<LossItem>& batch, double beta,
                                      bool divide_by_batch = false) {
  double total = 0.0;
  std::size_t anchors = 0;
  for (std::size_t a = 0; a < batch.size(); ++a) {
    bool any = false;
    double worst = -1e300;
    for (std::size_t p = 0; p < batch.size(); ++p) {
      if (p == a || batch[p].label != batch[a].label || batch[p].tracklet != batch[a].tracklet) continue;
      for (std::size_t n = 0; n < batch.size(); ++n) {
        if (batch[n].label != batch[a].label || batch[n].tracklet == batch[a].tracklet) continue;
        any = true;
        worst = std::max(worst, euclid(batch[a].embedding, batch[p].embedding) -
                                    euclid(batch[a].embedding, batch[n].embedding) + beta);
      }
    }
    if (!any) continue;
    ++anchors;
    total += std::max(worst, 0.0);
  }
  const std::size_t denom = divide_by_batch ? batch.size() : anchors;
  return denom == 0 ? 0.0 : total / static_cast<double>(denom);
}

inline std::vector<double> random_unit(std::mt19937_64& rng, std::size_t dim) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> v(dim);
  double n = 0.0;
  for (double& x : v) {
    x = g(rng);
    n += x * x;
  }
  n = std::sqrt(n);
  for (double& x : v) x /= n;
  return v;
}

}  // namespace motsmine::testing
