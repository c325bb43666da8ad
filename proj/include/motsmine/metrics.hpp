#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "motsmine/mask.hpp"
#include "motsmine/segment.hpp"

namespace motsmine {

// One annotated or predicted object in one frame.
struct TrackedObject {
  TrackId track = 0;
  std::string label;
  Mask mask;
  BBox box;
};

using EvalFrame = std::vector<TrackedObject>;

struct FrameTally {
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t ids = 0;
  std::int64_t gt = 0;
  double iou_sum = 0.0;

  FrameTally& operator+=(const FrameTally& o) {
    tp += o.tp;
    fp += o.fp;
    ids += o.ids;
    gt += o.gt;
    iou_sum += o.iou_sum;
    return *this;
  }
  friend bool operator==(const FrameTally&, const FrameTally&) = default;
};

enum class EvalMode { kMots, kMot };

// Which earlier match an identity switch is judged against.
enum class IdSwitchMemory {
  kLastKnown,      // the ground-truth track's most recent match, across gaps
  kPreviousFrame,  // only a match in the immediately preceding frame
};

// Cross-frame matching memory, keyed by (class, ground-truth track).
struct MatchState {
  IdSwitchMemory memory = IdSwitchMemory::kLastKnown;
  std::map<std::pair<std::string, TrackId>, TrackId> last_match;
  std::map<std::pair<std::string, TrackId>, TrackId> previous_frame;
};

struct Correspondence {
  std::size_t gt_index = 0;
  std::size_t pred_index = 0;
  double iou = 0.0;
  bool id_switch = false;
};

struct FrameResult {
  std::vector<Correspondence> matches;
  std::map<std::string, FrameTally> per_class;

  FrameTally total() const;
};

// Mask matching: a pair matches iff its mask IoU exceeds 0.5. Masks on each
// side must be pairwise disjoint (ValidationError otherwise), which makes the
// matching unique.
FrameResult mots_match_frame(std::span<const TrackedObject> gt,
                             std::span<const TrackedObject> pred, MatchState& state);

// Box matching: pairs from the memory that still exceed box IoU 0.5 are kept,
// the rest are assigned by a maximum-IoU relaxed assignment over pairs with
// IoU > 0.5.
FrameResult clear_mot_match_frame(std::span<const TrackedObject> gt,
                                  std::span<const TrackedObject> pred, MatchState& state);

struct Scores {
  double accuracy = 0.0;       // MOTSA / MOTA
  double soft_accuracy = 0.0;  // sMOTSA
  double precision = 0.0;      // MOTSP / MOTP

  friend bool operator==(const Scores&, const Scores&) = default;
};

struct ClassReport {
  FrameTally totals;
  std::optional<Scores> scores;  // absent when totals.gt == 0

  friend bool operator==(const ClassReport&, const ClassReport&) = default;
};

struct MetricsReport {
  EvalMode mode = EvalMode::kMots;
  std::map<std::string, ClassReport> classes;
  ClassReport aggregate;

  friend bool operator==(const MetricsReport&, const MetricsReport&) = default;
};

// Ratios of the totals; nullopt if totals.gt == 0. Precision is 0 when
// there are no true positives.
std::optional<Scores> scores_from(const FrameTally& totals);

// Runs matching frame by frame and accumulates per-class tallies.
class SequenceEvaluator {
 public:
  explicit SequenceEvaluator(EvalMode mode,
                             IdSwitchMemory memory = IdSwitchMemory::kLastKnown);

  FrameResult add_frame(std::span<const TrackedObject> gt, std::span<const TrackedObject> pred);
  // Throws ValidationError if no ground truth was seen at all.
  MetricsReport report() const;

 private:
  EvalMode mode_;
  MatchState state_;
  std::map<std::string, FrameTally> totals_;
};

MetricsReport compute_mots(std::span<const EvalFrame> gt, std::span<const EvalFrame> pred,
                           IdSwitchMemory memory = IdSwitchMemory::kLastKnown);
MetricsReport compute_mot(std::span<const EvalFrame> gt, std::span<const EvalFrame> pred,
                          IdSwitchMemory memory = IdSwitchMemory::kLastKnown);

}  // namespace motsmine
