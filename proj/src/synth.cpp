#include "motsmine/synth.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include <json.hpp>

#include "motsmine/errors.hpp"

namespace motsmine {
namespace {

struct ObjectState {
  std::int64_t lane_top = 0;
  std::int64_t lane_bottom = 0;
  std::int64_t h = 0;
  std::int64_t w = 0;
  std::int64_t row = 0;
  std::int64_t col = 0;
  std::int64_t v_row = 0;
  std::int64_t v_col = 0;
  std::int64_t occluded_until = -1;  // exclusive frame bound
};

// Advances x by v inside [lo, hi], reflecting off the bounds.
void bounce(std::int64_t& x, std::int64_t& v, std::int64_t lo, std::int64_t hi) {
  if (hi <= lo) {
    x = lo;
    v = 0;
    return;
  }
  x += v;
  while (x < lo || x > hi) {
    if (x < lo) x = 2 * lo - x;
    if (x > hi) x = 2 * hi - x;
    v = -v;
  }
}

}  // namespace

void SynthConfig::validate() const {
  std::ostringstream msg;
  if (num_objects < 1 || num_frames < 1) msg << "need at least one object and one frame";
  else if (height / num_objects < 4) msg << "frame height " << height << " too small for " << num_objects << " lanes";
  else if (width < 8) msg << "frame width must be at least 8";
  else if (min_speed < 0 || max_speed < min_speed) msg << "speed range must satisfy 0 <= min <= max";
  else if (!(occlusion_probability >= 0.0 && occlusion_probability <= 1.0)) msg << "occlusion probability must lie in [0, 1]";
  else if (occlusion_min < 1 || occlusion_max < occlusion_min) msg << "occlusion durations must satisfy 1 <= min <= max";
  else if (!(embedding_noise >= 0.0) || !std::isfinite(embedding_noise)) msg << "embedding noise must be non-negative";
  else if (embedding_dim != 0 && embedding_dim < num_objects) msg << "embedding_dim must be 0 or >= num_objects";
  else return;
  throw ValidationError("synth config: " + msg.str());
}

SynthConfig parse_synth_config(const std::string& text) {
  using nlohmann::json;
  SynthConfig cfg;
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("synth config: ") + e.what());
  }
  if (!j.is_object()) throw ValidationError("synth config must be a JSON object");
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "num_objects") cfg.num_objects = value.get<std::int64_t>();
      else if (key == "num_frames") cfg.num_frames = value.get<std::int64_t>();
      else if (key == "height") cfg.height = value.get<std::int64_t>();
      else if (key == "width") cfg.width = value.get<std::int64_t>();
      else if (key == "min_speed") cfg.min_speed = value.get<std::int64_t>();
      else if (key == "max_speed") cfg.max_speed = value.get<std::int64_t>();
      else if (key == "occlusion_probability") cfg.occlusion_probability = value.get<double>();
      else if (key == "occlusion_min") cfg.occlusion_min = value.get<std::int64_t>();
      else if (key == "occlusion_max") cfg.occlusion_max = value.get<std::int64_t>();
      else if (key == "embedding_noise") cfg.embedding_noise = value.get<double>();
      else if (key == "embedding_dim") cfg.embedding_dim = value.get<std::int64_t>();
      else if (key == "seed") cfg.seed = value.get<std::uint64_t>();
      else throw ValidationError("synth config: unknown key '" + key + "'");
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("synth config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

SequenceBundle synth_generate(const SynthConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng(cfg.seed);
  auto uniform_int = [&](std::int64_t lo, std::int64_t hi) {
    return std::uniform_int_distribution<std::int64_t>(lo, hi)(rng);
  };
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> noise(0.0, cfg.embedding_noise > 0.0 ? cfg.embedding_noise : 1.0);

  const std::int64_t lane_h = cfg.height / cfg.num_objects;
  const std::int64_t dim = cfg.embedding_dim == 0 ? cfg.num_objects : cfg.embedding_dim;
  const std::int64_t min_w = std::max<std::int64_t>(4, cfg.width / 20);
  const std::int64_t max_w = std::max(min_w, cfg.width / 8);

  std::vector<ObjectState> objects(static_cast<std::size_t>(cfg.num_objects));
  for (std::int64_t k = 0; k < cfg.num_objects; ++k) {
    ObjectState& o = objects[static_cast<std::size_t>(k)];
    o.lane_top = k * lane_h;
    o.lane_bottom = o.lane_top + lane_h;
    o.h = uniform_int(std::max<std::int64_t>(3, lane_h / 2), lane_h - 1);
    o.w = uniform_int(min_w, max_w);
    o.row = uniform_int(o.lane_top, o.lane_bottom - o.h);
    o.col = uniform_int(0, cfg.width - o.w);
    o.v_col = uniform_int(cfg.min_speed, cfg.max_speed) * (uniform_int(0, 1) == 0 ? -1 : 1);
    o.v_row = o.lane_bottom - o.h > o.lane_top ? uniform_int(-1, 1) : 0;
  }

  SequenceBundle bundle;
  bundle.name = "synth-" + std::to_string(cfg.seed);
  bundle.height = cfg.height;
  bundle.width = cfg.width;
  bundle.frames.resize(static_cast<std::size_t>(cfg.num_frames));
  bundle.flows.assign(static_cast<std::size_t>(cfg.num_frames), std::nullopt);

  const float nan = std::numeric_limits<float>::quiet_NaN();
  std::vector<ObjectState> prev_states;
  std::vector<char> prev_visible;
  SegmentId next_id = 0;

  for (std::int64_t t = 0; t < cfg.num_frames; ++t) {
    if (t > 0) {
      for (ObjectState& o : objects) {
        bounce(o.col, o.v_col, 0, cfg.width - o.w);
        bounce(o.row, o.v_row, o.lane_top, o.lane_bottom - o.h);
      }
    }
    std::vector<char> visible(objects.size(), 1);
    for (std::size_t k = 0; k < objects.size(); ++k) {
      ObjectState& o = objects[k];
      if (t < o.occluded_until) {
        visible[k] = 0;
        continue;
      }
      if (t > 0 && cfg.occlusion_probability > 0.0 && unit(rng) < cfg.occlusion_probability) {
        o.occluded_until = t + uniform_int(cfg.occlusion_min, cfg.occlusion_max);
        visible[k] = 0;
      }
    }

    auto& frame = bundle.frames[static_cast<std::size_t>(t)];
    for (std::size_t k = 0; k < objects.size(); ++k) {
      if (!visible[k]) continue;
      const ObjectState& o = objects[k];
      Segment s;
      s.id = next_id++;
      s.frame = t;
      s.det_index = static_cast<std::int64_t>(frame.size());
      s.label = k % 2 == 0 ? "car" : "pedestrian";
      s.mask = Mask::rectangle(cfg.height, cfg.width, o.row, o.col, o.row + o.h, o.col + o.w);
      s.box = mask_bbox(s.mask);
      s.score = 1.0;
      std::vector<double> e(static_cast<std::size_t>(dim), 0.0);
      e[k] = 1.0;
      if (cfg.embedding_noise > 0.0) {
        for (double& x : e) x += noise(rng);
      }
      double norm = 0.0;
      for (double x : e) norm += x * x;
      norm = std::sqrt(norm);
      for (double& x : e) x /= norm;
      s.embedding = std::move(e);
      s.gt_track = static_cast<TrackId>(k);
      frame.push_back(std::move(s));
    }

    if (t > 0) {
      FlowField flow(cfg.height, cfg.width);
      for (std::size_t k = 0; k < objects.size(); ++k) {
        if (!prev_visible[k]) continue;
        const ObjectState& p = prev_states[k];
        for (std::int64_t r = p.row; r < p.row + p.h; ++r) {
          for (std::int64_t c = p.col; c < p.col + p.w; ++c) flow.at(r, c) = {nan, nan};
        }
      }
      for (std::size_t k = 0; k < objects.size(); ++k) {
        if (!visible[k]) continue;
        const ObjectState& o = objects[k];
        const ObjectState& p = prev_states[k];
        const FlowVector back{static_cast<float>(p.col - o.col), static_cast<float>(p.row - o.row)};
        for (std::int64_t r = o.row; r < o.row + o.h; ++r) {
          for (std::int64_t c = o.col; c < o.col + o.w; ++c) flow.at(r, c) = back;
        }
      }
      bundle.flows[static_cast<std::size_t>(t)] = std::move(flow);
    }
    prev_states = objects;
    prev_visible = visible;
  }
  return bundle;
}

}  // namespace motsmine
