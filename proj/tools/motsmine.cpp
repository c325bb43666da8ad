// Command-line front end: mine, link, eval, synth and siou.
//
// Exit status: 0 on success, 1 on invalid input or arguments, 2 on I/O
// failure.

#include <atomic>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "motsmine/errors.hpp"
#include "motsmine/io.hpp"
#include "motsmine/metrics.hpp"
#include "motsmine/synth.hpp"
#include "motsmine/track_graph.hpp"
#include "motsmine/track_linker.hpp"
#include "motsmine/tracklet_miner.hpp"

namespace fs = std::filesystem;
using namespace motsmine;

namespace {

void print_warnings(const SequenceBundle& bundle) {
  for (const auto& w : bundle.warnings) std::cerr << bundle.name << ": warning: " << w << "\n";
}

// Runs tasks on up to `jobs` threads; rethrows the first failure by index.
void run_parallel(std::vector<std::function<void()>> tasks, int jobs) {
  std::vector<std::exception_ptr> errors(tasks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < tasks.size(); i = next++) {
      try {
        tasks[i]();
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const auto n = static_cast<std::size_t>(std::max(1, jobs));
  std::vector<std::thread> pool;
  for (std::size_t k = 1; k < std::min(n, tasks.size()); ++k) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

void require_same_count(std::size_t a, std::size_t b, const char* what) {
  if (a != b) throw ValidationError(std::string("expected one ") + what + " per --detections file");
}

struct CommonOptions {
  std::string config_path;
  int jobs = 1;
};

RunConfig base_config(const CommonOptions& common) {
  return common.config_path.empty() ? RunConfig{} : load_config(common.config_path);
}

// Builds evaluation frames, taking track ids either from a track file or
// from each record's gt_track field.
std::vector<EvalFrame> to_eval_frames(const SequenceBundle& bundle,
                                      const std::optional<TrackFile>& tracks,
                                      const char* side) {
  std::map<std::pair<std::int64_t, std::int64_t>, TrackId> assigned;
  if (tracks) {
    for (const TrackRecord& r : tracks->records) assigned[{r.frame, r.det_index}] = r.track_id;
  }
  std::vector<EvalFrame> frames(bundle.frames.size());
  for (std::size_t t = 0; t < bundle.frames.size(); ++t) {
    for (const Segment& s : bundle.frames[t]) {
      std::optional<TrackId> id;
      if (tracks) {
        auto it = assigned.find({s.frame, s.det_index});
        if (it != assigned.end()) id = it->second;
      } else {
        id = s.gt_track;
        if (!id) {
          throw ValidationError(std::string(side) + " segment in frame " + std::to_string(s.frame) +
                                " has no gt_track");
        }
      }
      if (id) frames[t].push_back(TrackedObject{*id, s.label, s.mask, s.box});
    }
  }
  return frames;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tracklet mining, track linking and MOTS evaluation"};
  app.require_subcommand(1);

  CommonOptions common;
  std::vector<std::string> detections, flow_dirs, outputs;
  std::optional<double> tau0, tau1, tau2, tau;
  std::optional<std::int64_t> window, min_track;
  std::string terms;

  auto* mine = app.add_subcommand("mine", "Mine tracklets from detections and backward flow");
  mine->add_option("--detections", detections, "Detection files (JSON Lines)")->required();
  mine->add_option("--flow-dir", flow_dirs, "Flow directory per detection file")->required();
  mine->add_option("--output", outputs, "Track file per detection file")->required();
  mine->add_option("--config", common.config_path, "JSON config with defaults");
  mine->add_option("--tau0", tau0, "Minimum b1 - b2 margin in pixels");
  mine->add_option("--tau1", tau1, "Minimum b1 in pixels");
  mine->add_option("--tau2", tau2, "Minimum b1 / r ratio");
  mine->add_option("--jobs", common.jobs, "Sequences processed concurrently")->check(CLI::PositiveNumber);

  auto* link = app.add_subcommand("link", "Link detections with embeddings into tracks");
  link->add_option("--detections", detections, "Detection files (JSON Lines)")->required();
  link->add_option("--output", outputs, "Track file per detection file")->required();
  link->add_option("--config", common.config_path, "JSON config with defaults");
  link->add_option("--tau", tau, "Maximum dissimilarity of a link");
  link->add_option("--window", window, "Frames a track end stays linkable");
  link->add_option("--min-track", min_track, "Minimum track length");
  link->add_option("--terms", terms, "Payoff terms: any of siou,embedding,time");
  link->add_option("--jobs", common.jobs, "Sequences processed concurrently")->check(CLI::PositiveNumber);

  std::string gt_path, pred_path, tracks_path, report_path, mode = "mots", ids_memory = "last-known";
  bool to_stdout = false;
  auto* eval = app.add_subcommand("eval", "Compute MOTS or CLEAR MOT metrics");
  eval->add_option("--gt", gt_path, "Ground-truth detections with gt_track")->required();
  eval->add_option("--pred", pred_path, "Predicted detections")->required();
  eval->add_option("--tracks", tracks_path, "Track file for the predictions; without it gt_track is used");
  eval->add_option("--output", report_path, "Report JSON path");
  eval->add_option("--mode", mode, "mots or mot")->check(CLI::IsMember({"mots", "mot"}));
  eval->add_option("--ids-memory", ids_memory, "last-known or previous-frame")
      ->check(CLI::IsMember({"last-known", "previous-frame"}));
  eval->add_flag("--stdout", to_stdout, "Also print the report");

  std::string synth_config_path, out_dir;
  std::optional<std::uint64_t> seed;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic sequence with ground truth");
  synth->add_option("--config", synth_config_path, "JSON generator config");
  synth->add_option("--seed", seed, "Random seed (overrides the config)");
  synth->add_option("--out-dir", out_dir, "Output directory")->required();

  std::vector<double> boxes;
  auto* siou_cmd = app.add_subcommand("siou", "Signed IoU of two boxes u1 v1 u2 v2");
  siou_cmd->add_option("boxes", boxes, "Eight numbers: first box then second box")
      ->required()
      ->expected(8);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*mine) {
      require_same_count(flow_dirs.size(), detections.size(), "--flow-dir");
      require_same_count(outputs.size(), detections.size(), "--output");
      RunConfig cfg = base_config(common);
      if (tau0) cfg.miner.tau0 = *tau0;
      if (tau1) cfg.miner.tau1 = *tau1;
      if (tau2) cfg.miner.tau2 = *tau2;
      cfg.miner.validate();
      std::vector<std::function<void()>> tasks;
      for (std::size_t i = 0; i < detections.size(); ++i) {
        tasks.push_back([&, i] {
          SequenceBundle bundle = load_detections(detections[i]);
          print_warnings(bundle);
          load_flows(bundle, flow_dirs[i]);
          std::vector<MiningFrame> frames(bundle.frames.size());
          for (std::size_t t = 0; t < frames.size(); ++t) {
            frames[t].segments = bundle.frames[t];
            frames[t].flow = bundle.flows[t];
          }
          const TrackGraph g = mine_sequence(frames, cfg.miner);
          write_tracks(bundle, tracks_from_paths(tracklets(g)), outputs[i]);
        });
      }
      run_parallel(std::move(tasks), common.jobs);
    } else if (*link) {
      require_same_count(outputs.size(), detections.size(), "--output");
      RunConfig cfg = base_config(common);
      if (tau) cfg.linker.tau = *tau;
      if (window) cfg.linker.window = *window;
      if (min_track) cfg.linker.min_track = *min_track;
      if (!terms.empty()) apply_terms(cfg.linker, terms);
      cfg.linker.validate();
      std::vector<std::function<void()>> tasks;
      for (std::size_t i = 0; i < detections.size(); ++i) {
        tasks.push_back([&, i] {
          const SequenceBundle bundle = load_detections(detections[i]);
          print_warnings(bundle);
          const auto tracks = link_sequence(bundle.frames, cfg.linker);
          write_tracks(bundle, tracks, outputs[i]);
        });
      }
      run_parallel(std::move(tasks), common.jobs);
    } else if (*eval) {
      const SequenceBundle gt = load_detections(gt_path);
      const SequenceBundle pred = load_detections(pred_path);
      print_warnings(gt);
      print_warnings(pred);
      std::optional<TrackFile> tracks;
      if (!tracks_path.empty()) tracks = load_tracks(tracks_path);
      const auto gt_frames = to_eval_frames(gt, std::nullopt, "ground-truth");
      const auto pred_frames = to_eval_frames(pred, tracks, "predicted");
      const IdSwitchMemory memory =
          ids_memory == "last-known" ? IdSwitchMemory::kLastKnown : IdSwitchMemory::kPreviousFrame;
      const MetricsReport report = mode == "mots" ? compute_mots(gt_frames, pred_frames, memory)
                                                  : compute_mot(gt_frames, pred_frames, memory);
      if (!report_path.empty()) write_report(report, report_path);
      if (to_stdout || report_path.empty()) std::cout << format_report(report);
    } else if (*synth) {
      SynthConfig cfg;
      if (!synth_config_path.empty()) cfg = parse_synth_config(read_file(synth_config_path));
      if (seed) cfg.seed = *seed;
      const SequenceBundle bundle = synth_generate(cfg);
      const fs::path dir(out_dir);
      std::error_code ec;
      fs::create_directories(dir / "flows", ec);
      if (ec) throw IoError("cannot create " + (dir / "flows").string());
      write_detections(bundle, dir / "detections.jsonl");
      for (std::size_t t = 1; t < bundle.flows.size(); ++t) {
        write_flow(*bundle.flows[t], dir / "flows" / flow_file_name(static_cast<std::int64_t>(t)));
      }
    } else if (*siou_cmd) {
      const BBox a{boxes[0], boxes[1], boxes[2], boxes[3]};
      const BBox b{boxes[4], boxes[5], boxes[6], boxes[7]};
      std::printf("%.17g\n", siou(a, b));
    }
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
