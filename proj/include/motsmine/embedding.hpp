#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "motsmine/mask.hpp"
#include "motsmine/segment.hpp"

namespace motsmine {

// N-channel feature map laid out channel-major, then row, then column.
struct FeatureMap {
  std::int64_t channels = 0;
  std::int64_t height = 0;
  std::int64_t width = 0;
  std::vector<double> values;

  FeatureMap() = default;
  FeatureMap(std::int64_t n, std::int64_t h, std::int64_t w, double fill = 0.0)
      : channels(n), height(h), width(w), values(static_cast<std::size_t>(n * h * w), fill) {}

  double& at(std::int64_t c, std::int64_t row, std::int64_t col) {
    return values[static_cast<std::size_t>((c * height + row) * width + col)];
  }
  double at(std::int64_t c, std::int64_t row, std::int64_t col) const {
    return values[static_cast<std::size_t>((c * height + row) * width + col)];
  }
};

// Per-channel mean of the feature map over the mask's foreground pixels.
// Throws ValidationError on a shape mismatch, non-finite features or an
// empty mask.
std::vector<double> mask_pool(const FeatureMap& x, const Mask& m);

struct LossItem {
  std::vector<double> embedding;
  std::string label;
  TrackId tracklet = 0;
};

// Batch of unit-norm embeddings of a common dimension.
class LossBatch {
 public:
  explicit LossBatch(std::vector<LossItem> items);
  std::span<const LossItem> items() const { return items_; }

 private:
  std::vector<LossItem> items_;
};

// Same-class items of the anchor's tracklet (anchor excluded), and same-class
// items of other tracklets.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> matching_sets(
    std::size_t anchor, std::span<const LossItem> batch);

enum class LossNormalization {
  kValidAnchors,  // divide by anchors that have both positives and negatives
  kBatchSize,     // divide by the batch size
};

// Mean over anchors of max(hardest positive distance - hardest negative
// distance + beta, 0). Anchors without positives or negatives add nothing.
// Does not check embedding norms, so it can be evaluated off the sphere.
double batch_hard_triplet_loss(std::span<const LossItem> batch, double beta,
                               LossNormalization norm = LossNormalization::kValidAnchors);
double batch_hard_triplet_loss(const LossBatch& batch, double beta,
                               LossNormalization norm = LossNormalization::kValidAnchors);

// Subgradient of batch_hard_triplet_loss with respect to every embedding
// coordinate, taking the first hardest positive/negative on ties.
std::vector<std::vector<double>> batch_hard_triplet_gradient(
    std::span<const LossItem> batch, double beta,
    LossNormalization norm = LossNormalization::kValidAnchors);

struct WindowEntry {
  std::int64_t frame = 0;
  SegmentId segment = 0;
  TrackId tracklet = 0;

  friend bool operator==(const WindowEntry&, const WindowEntry&) = default;
};

// Keeps entries whose tracklet appears in more than window_len / 2 distinct
// frames of the window. Order is preserved.
std::vector<WindowEntry> majority_tracklet_filter(std::span<const WindowEntry> window,
                                                  std::int64_t window_len);

}  // namespace motsmine
