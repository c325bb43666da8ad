#pragma once

#include <cstdint>
#include <string>

#include "motsmine/io.hpp"

namespace motsmine {

// Rectangles moving with constant velocity, each confined to its own
// horizontal lane and bouncing off the lane and frame borders, so masks never
// overlap. Objects alternate between classes "car" and "pedestrian".
struct SynthConfig {
  std::int64_t num_objects = 10;
  std::int64_t num_frames = 50;
  std::int64_t height = 240;
  std::int64_t width = 320;
  std::int64_t min_speed = 1;  // horizontal pixels per frame
  std::int64_t max_speed = 4;
  // Chance per visible object and frame that an occlusion starts; during an
  // occlusion the object is not rendered and has no detection.
  double occlusion_probability = 0.0;
  std::int64_t occlusion_min = 3;
  std::int64_t occlusion_max = 3;
  // Embeddings are one-hot(object) plus N(0, noise^2) per coordinate, then
  // normalized. Dimension 0 means num_objects.
  double embedding_noise = 0.0;
  std::int64_t embedding_dim = 0;
  std::uint64_t seed = 0;

  void validate() const;
};

SynthConfig parse_synth_config(const std::string& text);

// Deterministic for a given config. Segments carry gt_track = object index and
// embeddings; flows are the exact backward motion, with disoccluded pixels
// marked non-finite.
SequenceBundle synth_generate(const SynthConfig& cfg);

}  // namespace motsmine
