#include "motsmine/embedding.hpp"

#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "motsmine/errors.hpp"

namespace motsmine {
namespace {

double distance(const std::vector<double>& a, const std::vector<double>& b) {
  double sq = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) sq += (a[k] - b[k]) * (a[k] - b[k]);
  return std::sqrt(sq);
}

// Hardest positive and negative of one anchor; npos when absent.
struct HardPair {
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);
  std::size_t positive = npos;
  std::size_t negative = npos;
  double positive_distance = 0.0;
  double negative_distance = 0.0;

  bool valid() const { return positive != npos && negative != npos; }
};

HardPair hardest(std::size_t anchor, std::span<const LossItem> batch) {
  HardPair h;
  const LossItem& a = batch[anchor];
  for (std::size_t j = 0; j < batch.size(); ++j) {
    if (j == anchor || batch[j].label != a.label) continue;
    const double d = distance(a.embedding, batch[j].embedding);
    if (batch[j].tracklet == a.tracklet) {
      if (h.positive == HardPair::npos || d > h.positive_distance) {
        h.positive = j;
        h.positive_distance = d;
      }
    } else if (h.negative == HardPair::npos || d < h.negative_distance) {
      h.negative = j;
      h.negative_distance = d;
    }
  }
  return h;
}

void check_beta(double beta) {
  if (!(beta >= 0.0) || !std::isfinite(beta)) {
    throw ValidationError("triplet margin must be finite and non-negative");
  }
}

}  // namespace

std::vector<double> mask_pool(const FeatureMap& x, const Mask& m) {
  if (m.height() != x.height || m.width() != x.width) {
    std::ostringstream msg;
    msg << "mask_pool: mask is " << m.height() << "x" << m.width() << " but features are "
        << x.height << "x" << x.width;
    throw ValidationError(msg.str());
  }
  for (double v : x.values) {
    if (!std::isfinite(v)) throw ValidationError("mask_pool: non-finite feature value");
  }
  const PixelCount area = mask_area(m);
  if (area == 0) throw ValidationError("mask_pool: empty mask");

  std::vector<double> sum(static_cast<std::size_t>(x.channels), 0.0);
  const auto& runs = m.runs();
  std::int64_t pos = 0;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    if (i % 2 == 1) {
      for (std::int64_t p = pos; p < pos + runs[i]; ++p) {
        const std::int64_t col = p / m.height();
        const std::int64_t row = p % m.height();
        for (std::int64_t c = 0; c < x.channels; ++c) {
          sum[static_cast<std::size_t>(c)] += x.at(c, row, col);
        }
      }
    }
    pos += runs[i];
  }
  for (double& s : sum) s /= static_cast<double>(area);
  return sum;
}

LossBatch::LossBatch(std::vector<LossItem> items) : items_(std::move(items)) {
  for (std::size_t i = 0; i < items_.size(); ++i) {
    const auto& e = items_[i].embedding;
    if (e.size() != items_.front().embedding.size()) {
      std::ostringstream msg;
      msg << "loss item " << i << " has dimension " << e.size() << ", expected "
          << items_.front().embedding.size();
      throw ValidationError(msg.str());
    }
    double sq = 0.0;
    for (double v : e) sq += v * v;
    if (std::abs(std::sqrt(sq) - 1.0) > kUnitNormTolerance) {
      std::ostringstream msg;
      msg << "loss item " << i << " embedding norm " << std::sqrt(sq) << " is not 1";
      throw ValidationError(msg.str());
    }
  }
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> matching_sets(
    std::size_t anchor, std::span<const LossItem> batch) {
  std::vector<std::size_t> matching, non_matching;
  const LossItem& a = batch[anchor];
  for (std::size_t j = 0; j < batch.size(); ++j) {
    if (j == anchor || batch[j].label != a.label) continue;
    (batch[j].tracklet == a.tracklet ? matching : non_matching).push_back(j);
  }
  return {std::move(matching), std::move(non_matching)};
}

double batch_hard_triplet_loss(std::span<const LossItem> batch, double beta,
                               LossNormalization norm) {
  check_beta(beta);
  double total = 0.0;
  std::size_t valid = 0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const HardPair h = hardest(i, batch);
    if (!h.valid()) continue;
    ++valid;
    total += std::max(h.positive_distance - h.negative_distance + beta, 0.0);
  }
  const std::size_t denom = norm == LossNormalization::kValidAnchors ? valid : batch.size();
  return denom == 0 ? 0.0 : total / static_cast<double>(denom);
}

double batch_hard_triplet_loss(const LossBatch& batch, double beta, LossNormalization norm) {
  return batch_hard_triplet_loss(batch.items(), beta, norm);
}

std::vector<std::vector<double>> batch_hard_triplet_gradient(std::span<const LossItem> batch,
                                                             double beta,
                                                             LossNormalization norm) {
  check_beta(beta);
  std::vector<std::vector<double>> grad(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    grad[i].assign(batch[i].embedding.size(), 0.0);
  }
  std::vector<HardPair> hard(batch.size());
  std::size_t valid = 0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    hard[i] = hardest(i, batch);
    if (hard[i].valid()) ++valid;
  }
  const std::size_t denom = norm == LossNormalization::kValidAnchors ? valid : batch.size();
  if (denom == 0) return grad;
  const double scale = 1.0 / static_cast<double>(denom);

  // d|a - b| / da = (a - b) / |a - b|, taken as 0 at a == b.
  auto accumulate = [&](std::size_t a, std::size_t b, double d, double sign) {
    if (d == 0.0) return;
    const auto& ea = batch[a].embedding;
    const auto& eb = batch[b].embedding;
    for (std::size_t k = 0; k < ea.size(); ++k) {
      const double g = sign * scale * (ea[k] - eb[k]) / d;
      grad[a][k] += g;
      grad[b][k] -= g;
    }
  };
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const HardPair& h = hard[i];
    if (!h.valid() || h.positive_distance - h.negative_distance + beta <= 0.0) continue;
    accumulate(i, h.positive, h.positive_distance, +1.0);
    accumulate(i, h.negative, h.negative_distance, -1.0);
  }
  return grad;
}

std::vector<WindowEntry> majority_tracklet_filter(std::span<const WindowEntry> window,
                                                  std::int64_t window_len) {
  std::map<TrackId, std::set<std::int64_t>> frames_of;
  for (const WindowEntry& e : window) frames_of[e.tracklet].insert(e.frame);
  std::vector<WindowEntry> kept;
  for (const WindowEntry& e : window) {
    if (2 * static_cast<std::int64_t>(frames_of[e.tracklet].size()) > window_len) {
      kept.push_back(e);
    }
  }
  return kept;
}

}  // namespace motsmine
