#include "motsmine/metrics.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "motsmine/errors.hpp"
#include "motsmine/lap.hpp"

namespace motsmine {
namespace {

constexpr double kMatchThreshold = 0.5;

void check_unique_tracks(std::span<const TrackedObject> objects, const char* side) {
  std::set<std::pair<std::string, TrackId>> seen;
  for (const TrackedObject& o : objects) {
    if (!seen.emplace(o.label, o.track).second) {
      std::ostringstream msg;
      msg << side << " frame repeats track " << o.track << " of class '" << o.label << "'";
      throw ValidationError(msg.str());
    }
  }
}

void check_disjoint(std::span<const TrackedObject> objects, const char* side) {
  for (std::size_t i = 0; i < objects.size(); ++i) {
    for (std::size_t j = i + 1; j < objects.size(); ++j) {
      if (intersection_area(objects[i].mask, objects[j].mask) != 0) {
        std::ostringstream msg;
        msg << side << " masks of tracks " << objects[i].track << " and " << objects[j].track
            << " overlap";
        throw ValidationError(msg.str());
      }
    }
  }
}

// Records a match in the tally, deciding whether it is an identity switch.
void record_match(const TrackedObject& g, const TrackedObject& p, Correspondence& c,
                  MatchState& state, std::map<std::pair<std::string, TrackId>, TrackId>& now,
                  FrameTally& tally) {
  const auto key = std::make_pair(g.label, g.track);
  const auto& memory =
      state.memory == IdSwitchMemory::kLastKnown ? state.last_match : state.previous_frame;
  if (auto it = memory.find(key); it != memory.end() && it->second != p.track) {
    c.id_switch = true;
    ++tally.ids;
  }
  ++tally.tp;
  tally.iou_sum += c.iou;
  now[key] = p.track;
}

void finish_frame(std::span<const TrackedObject> gt, std::span<const TrackedObject> pred,
                  FrameResult& result, MatchState& state,
                  std::map<std::pair<std::string, TrackId>, TrackId>& now) {
  std::vector<char> pred_matched(pred.size(), 0);
  for (const Correspondence& c : result.matches) pred_matched[c.pred_index] = 1;
  for (const TrackedObject& g : gt) ++result.per_class[g.label].gt;
  for (std::size_t j = 0; j < pred.size(); ++j) {
    auto& tally = result.per_class[pred[j].label];
    if (!pred_matched[j]) ++tally.fp;
  }
  for (const auto& [key, track] : now) state.last_match[key] = track;
  state.previous_frame = std::move(now);
}

}  // namespace

FrameTally FrameResult::total() const {
  FrameTally t;
  for (const auto& [label, tally] : per_class) t += tally;
  return t;
}

FrameResult mots_match_frame(std::span<const TrackedObject> gt,
                             std::span<const TrackedObject> pred, MatchState& state) {
  check_unique_tracks(gt, "ground-truth");
  check_unique_tracks(pred, "predicted");
  check_disjoint(gt, "ground-truth");
  check_disjoint(pred, "predicted");

  FrameResult result;
  std::map<std::pair<std::string, TrackId>, TrackId> now;
  std::vector<char> pred_taken(pred.size(), 0);
  for (std::size_t i = 0; i < gt.size(); ++i) {
    for (std::size_t j = 0; j < pred.size(); ++j) {
      if (pred_taken[j] || pred[j].label != gt[i].label) continue;
      const double iou = mask_iou(gt[i].mask, pred[j].mask);
      if (iou > kMatchThreshold) {
        pred_taken[j] = 1;
        Correspondence c{i, j, iou, false};
        record_match(gt[i], pred[j], c, state, now, result.per_class[gt[i].label]);
        result.matches.push_back(c);
        break;
      }
    }
  }
  finish_frame(gt, pred, result, state, now);
  return result;
}

FrameResult clear_mot_match_frame(std::span<const TrackedObject> gt,
                                  std::span<const TrackedObject> pred, MatchState& state) {
  check_unique_tracks(gt, "ground-truth");
  check_unique_tracks(pred, "predicted");

  FrameResult result;
  std::map<std::pair<std::string, TrackId>, TrackId> now;
  std::vector<char> gt_taken(gt.size(), 0), pred_taken(pred.size(), 0);
  const auto& memory =
      state.memory == IdSwitchMemory::kLastKnown ? state.last_match : state.previous_frame;

  std::vector<Correspondence> pending;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    auto it = memory.find({gt[i].label, gt[i].track});
    if (it == memory.end()) continue;
    for (std::size_t j = 0; j < pred.size(); ++j) {
      if (pred_taken[j] || pred[j].label != gt[i].label || pred[j].track != it->second) continue;
      const double iou = box_iou(gt[i].box, pred[j].box);
      if (iou > kMatchThreshold) {
        gt_taken[i] = pred_taken[j] = 1;
        pending.push_back({i, j, iou, false});
      }
      break;
    }
  }

  std::vector<std::size_t> free_gt, free_pred;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    if (!gt_taken[i]) free_gt.push_back(i);
  }
  for (std::size_t j = 0; j < pred.size(); ++j) {
    if (!pred_taken[j]) free_pred.push_back(j);
  }
  PayoffMatrix payoff(free_gt.size(), free_pred.size());
  for (std::size_t r = 0; r < free_gt.size(); ++r) {
    const TrackedObject& g = gt[free_gt[r]];
    for (std::size_t c = 0; c < free_pred.size(); ++c) {
      const TrackedObject& p = pred[free_pred[c]];
      if (p.label != g.label) continue;
      const double iou = box_iou(g.box, p.box);
      if (iou > kMatchThreshold) payoff.set(r, c, iou);
    }
  }
  for (const auto& [r, c] : solve_relaxed_lap(payoff).pairs) {
    pending.push_back({free_gt[r], free_pred[c], payoff.at(r, c), false});
  }
  std::sort(pending.begin(), pending.end(),
            [](const Correspondence& a, const Correspondence& b) { return a.gt_index < b.gt_index; });
  for (Correspondence& c : pending) {
    record_match(gt[c.gt_index], pred[c.pred_index], c, state, now,
                 result.per_class[gt[c.gt_index].label]);
    result.matches.push_back(c);
  }
  finish_frame(gt, pred, result, state, now);
  return result;
}

std::optional<Scores> scores_from(const FrameTally& t) {
  if (t.gt == 0) return std::nullopt;
  const auto gt = static_cast<double>(t.gt);
  const auto penalty = static_cast<double>(t.fp + t.ids);
  Scores s;
  s.accuracy = (static_cast<double>(t.tp) - penalty) / gt;
  s.soft_accuracy = (t.iou_sum - penalty) / gt;
  s.precision = t.tp == 0 ? 0.0 : t.iou_sum / static_cast<double>(t.tp);
  return s;
}

SequenceEvaluator::SequenceEvaluator(EvalMode mode, IdSwitchMemory memory) : mode_(mode) {
  state_.memory = memory;
}

FrameResult SequenceEvaluator::add_frame(std::span<const TrackedObject> gt,
                                         std::span<const TrackedObject> pred) {
  FrameResult r = mode_ == EvalMode::kMots ? mots_match_frame(gt, pred, state_)
                                           : clear_mot_match_frame(gt, pred, state_);
  for (const auto& [label, tally] : r.per_class) totals_[label] += tally;
  return r;
}

MetricsReport SequenceEvaluator::report() const {
  MetricsReport rep;
  rep.mode = mode_;
  for (const auto& [label, tally] : totals_) {
    rep.classes[label] = ClassReport{tally, scores_from(tally)};
    rep.aggregate.totals += tally;
  }
  rep.aggregate.scores = scores_from(rep.aggregate.totals);
  if (!rep.aggregate.scores) {
    throw ValidationError("ground truth is empty over the whole sequence; scores are undefined");
  }
  return rep;
}

namespace {

MetricsReport evaluate(EvalMode mode, std::span<const EvalFrame> gt,
                       std::span<const EvalFrame> pred, IdSwitchMemory memory) {
  SequenceEvaluator ev(mode, memory);
  const std::size_t n = std::max(gt.size(), pred.size());
  const EvalFrame empty;
  for (std::size_t t = 0; t < n; ++t) {
    ev.add_frame(t < gt.size() ? gt[t] : empty, t < pred.size() ? pred[t] : empty);
  }
  return ev.report();
}

}  // namespace

MetricsReport compute_mots(std::span<const EvalFrame> gt, std::span<const EvalFrame> pred,
                           IdSwitchMemory memory) {
  return evaluate(EvalMode::kMots, gt, pred, memory);
}

MetricsReport compute_mot(std::span<const EvalFrame> gt, std::span<const EvalFrame> pred,
                          IdSwitchMemory memory) {
  return evaluate(EvalMode::kMot, gt, pred, memory);
}

}  // namespace motsmine
