#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "motsmine/flow.hpp"
#include "motsmine/metrics.hpp"
#include "motsmine/segment.hpp"
#include "motsmine/track_linker.hpp"
#include "motsmine/tracklet_miner.hpp"

namespace motsmine {

// One sequence of detections, optionally with flow between frames.
struct SequenceBundle {
  std::string name;
  std::int64_t height = 0;
  std::int64_t width = 0;
  std::vector<std::vector<Segment>> frames;
  // flows[t] maps frame t back to frame t-1; flows[0] is always empty.
  std::vector<std::optional<FlowField>> flows;
  // Non-fatal findings from loading, e.g. dropped empty masks.
  std::vector<std::string> warnings;

  std::size_t segment_count() const;
};

// Detections are JSON Lines, one segment per line:
//   {"frame": 0, "class": "car", "score": 0.9, "bbox": [u1, v1, u2, v2],
//    "mask": {"size": [H, W], "counts": [...]}, "embedding": [...],
//    "gt_track": 3}
// "score", "bbox", "embedding" and "gt_track" are optional; a missing bbox is
// derived from the mask. Blank lines are ignored. Segment ids are the 0-based
// record index; det_index is the record's position within its frame. Records
// with empty masks are dropped with a warning. Errors name the offending line.
SequenceBundle parse_detections(std::istream& in, std::string name);
SequenceBundle load_detections(const std::filesystem::path& path);
std::string format_detections(const SequenceBundle& bundle);
void write_detections(const SequenceBundle& bundle, const std::filesystem::path& path);

// Flow files: "MFL1", width and height as little-endian uint32, then H*W
// row-major (du, dv) pairs as little-endian float32.
FlowField parse_flow(std::span<const std::uint8_t> bytes);
FlowField load_flow(const std::filesystem::path& path);
std::vector<std::uint8_t> encode_flow(const FlowField& flow);
void write_flow(const FlowField& flow, const std::filesystem::path& path);

// Per-frame flow file name inside a flow directory: "000007.mfl" for frame 7.
std::string flow_file_name(std::int64_t frame);
// Loads flows for frames 1..n-1 of the bundle from `dir`.
void load_flows(SequenceBundle& bundle, const std::filesystem::path& dir);

struct TrackRecord {
  std::int64_t frame = 0;
  std::int64_t det_index = 0;
  TrackId track_id = 0;

  friend bool operator==(const TrackRecord&, const TrackRecord&) = default;
};

struct TrackFile {
  std::string sequence;
  std::vector<TrackRecord> records;
};

// Track files are JSON Lines: a header
//   {"format": "motsmine-tracks", "sequence": name, "num_tracks": n}
// then {"frame", "det_index", "track_id"} records ordered by track id, then
// frame.
std::string format_tracks(const SequenceBundle& bundle, std::span<const Track> tracks);
void write_tracks(const SequenceBundle& bundle, std::span<const Track> tracks,
                  const std::filesystem::path& path);
TrackFile parse_tracks(std::istream& in);
TrackFile load_tracks(const std::filesystem::path& path);

// Tracks of graph paths, numbered by (first frame, first detection index).
std::vector<Track> tracks_from_paths(std::vector<std::vector<SegmentId>> paths);

std::string format_report(const MetricsReport& report);
void write_report(const MetricsReport& report, const std::filesystem::path& path);
MetricsReport parse_report(const std::string& text);
MetricsReport load_report(const std::filesystem::path& path);

// Optional JSON configuration, flat keys:
//   tau0, tau1, tau2        (mining)
//   tau, window, min_track  (linking)
//   terms                   comma-separated subset of "siou,embedding,time"
struct RunConfig {
  MinerConfig miner;
  LinkerConfig linker;
};
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);
// Sets the linker's term flags from "siou,embedding,time"-style text.
void apply_terms(LinkerConfig& cfg, const std::string& terms);

// Writes to a sibling temporary file, then renames over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);
std::string read_file(const std::filesystem::path& path);

}  // namespace motsmine
