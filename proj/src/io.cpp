#include "motsmine/io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "motsmine/errors.hpp"

namespace motsmine {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace {

constexpr char kFlowMagic[4] = {'M', 'F', 'L', '1'};
constexpr const char* kTrackFormat = "motsmine-tracks";

[[noreturn]] void fail_line(std::size_t line, const std::string& what) {
  std::ostringstream msg;
  msg << "line " << line << ": " << what;
  throw ValidationError(msg.str());
}

std::int64_t require_int(const json& j, const char* key, std::size_t line) {
  auto it = j.find(key);
  if (it == j.end()) fail_line(line, std::string("missing \"") + key + "\"");
  if (!it->is_number_integer()) fail_line(line, std::string("\"") + key + "\" must be an integer");
  return it->get<std::int64_t>();
}

double as_number(const json& j, std::size_t line, const char* what) {
  if (!j.is_number()) fail_line(line, std::string(what) + " must be a number");
  return j.get<double>();
}

Mask parse_mask(const json& j, std::size_t line) {
  if (!j.is_object()) fail_line(line, "\"mask\" must be an object");
  auto size = j.find("size");
  auto counts = j.find("counts");
  if (size == j.end() || !size->is_array() || size->size() != 2 ||
      !(*size)[0].is_number_integer() || !(*size)[1].is_number_integer()) {
    fail_line(line, "mask \"size\" must be [H, W]");
  }
  if (counts == j.end() || !counts->is_array()) fail_line(line, "mask \"counts\" must be an array");
  const auto height = (*size)[0].get<std::int64_t>();
  const auto width = (*size)[1].get<std::int64_t>();
  std::vector<std::uint32_t> runs;
  runs.reserve(counts->size());
  for (const json& c : *counts) {
    if (!c.is_number_integer() || c.get<std::int64_t>() < 0 ||
        c.get<std::int64_t>() > std::numeric_limits<std::uint32_t>::max()) {
      fail_line(line, "mask counts must be non-negative integers");
    }
    runs.push_back(static_cast<std::uint32_t>(c.get<std::int64_t>()));
  }
  try {
    return Mask::from_runs(height, width, std::move(runs));
  } catch (const ValidationError& e) {
    fail_line(line, e.what());
  }
}

ordered_json mask_to_json(const Mask& m) {
  ordered_json j;
  j["size"] = {m.height(), m.width()};
  j["counts"] = m.runs();
  return j;
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int k = 0; k < 4; ++k) out.push_back(static_cast<std::uint8_t>(v >> (8 * k)));
}

std::uint32_t get_u32(std::span<const std::uint8_t> bytes, std::size_t at) {
  std::uint32_t v = 0;
  for (int k = 0; k < 4; ++k) v |= static_cast<std::uint32_t>(bytes[at + k]) << (8 * k);
  return v;
}

json parse_json_text(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(what + ": " + e.what());
  }
}

ordered_json tally_to_json(const ClassReport& r, EvalMode mode) {
  ordered_json j;
  j["tp"] = r.totals.tp;
  j["fp"] = r.totals.fp;
  j["ids"] = r.totals.ids;
  j["gt"] = r.totals.gt;
  j["iou_sum"] = r.totals.iou_sum;
  auto put = [&](const char* key, std::optional<double> v) {
    j[key] = v ? ordered_json(*v) : ordered_json(nullptr);
  };
  const auto& s = r.scores;
  if (mode == EvalMode::kMots) {
    put("motsa", s ? std::optional(s->accuracy) : std::nullopt);
    put("smotsa", s ? std::optional(s->soft_accuracy) : std::nullopt);
    put("motsp", s ? std::optional(s->precision) : std::nullopt);
  } else {
    put("mota", s ? std::optional(s->accuracy) : std::nullopt);
    put("motp", s ? std::optional(s->precision) : std::nullopt);
  }
  return j;
}

ClassReport tally_from_json(const json& j, EvalMode mode) {
  ClassReport r;
  r.totals.tp = j.at("tp").get<std::int64_t>();
  r.totals.fp = j.at("fp").get<std::int64_t>();
  r.totals.ids = j.at("ids").get<std::int64_t>();
  r.totals.gt = j.at("gt").get<std::int64_t>();
  r.totals.iou_sum = j.at("iou_sum").get<double>();
  const char* acc = mode == EvalMode::kMots ? "motsa" : "mota";
  const char* prec = mode == EvalMode::kMots ? "motsp" : "motp";
  if (!j.at(acc).is_null()) {
    Scores s;
    s.accuracy = j.at(acc).get<double>();
    s.precision = j.at(prec).get<double>();
    // Box mode does not serialize the soft score; it is a function of the
    // totals.
    s.soft_accuracy = mode == EvalMode::kMots ? j.at("smotsa").get<double>()
                                              : scores_from(r.totals)->soft_accuracy;
    r.scores = s;
  }
  return r;
}

}  // namespace

std::size_t SequenceBundle::segment_count() const {
  std::size_t n = 0;
  for (const auto& f : frames) n += f.size();
  return n;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("failed reading " + path.string());
  return ss.str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw IoError("failed writing " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError("cannot rename " + tmp.string() + " to " + path.string());
  }
}

SequenceBundle parse_detections(std::istream& in, std::string name) {
  SequenceBundle bundle;
  bundle.name = std::move(name);
  std::string text;
  std::size_t line = 0;
  SegmentId next_id = 0;
  std::map<std::int64_t, std::int64_t> per_frame_count;
  bool have_size = false;

  while (std::getline(in, text)) {
    ++line;
    if (std::all_of(text.begin(), text.end(), [](unsigned char c) { return std::isspace(c); })) {
      continue;
    }
    json rec;
    try {
      rec = json::parse(text);
    } catch (const json::parse_error& e) {
      fail_line(line, std::string("invalid JSON: ") + e.what());
    }
    if (!rec.is_object()) fail_line(line, "record must be a JSON object");

    Segment s;
    s.id = next_id++;
    s.frame = require_int(rec, "frame", line);
    if (s.frame < 0) fail_line(line, "\"frame\" must be non-negative");
    auto cls = rec.find("class");
    if (cls == rec.end() || !cls->is_string()) fail_line(line, "missing string \"class\"");
    s.label = cls->get<std::string>();
    if (auto it = rec.find("score"); it != rec.end()) {
      s.score = as_number(*it, line, "\"score\"");
      if (s.score < 0.0 || s.score > 1.0) fail_line(line, "\"score\" must lie in [0, 1]");
    }
    auto mask = rec.find("mask");
    if (mask == rec.end()) fail_line(line, "missing \"mask\"");
    s.mask = parse_mask(*mask, line);
    if (!have_size) {
      bundle.height = s.mask.height();
      bundle.width = s.mask.width();
      have_size = true;
    } else if (s.mask.height() != bundle.height || s.mask.width() != bundle.width) {
      std::ostringstream msg;
      msg << "mask size " << s.mask.height() << "x" << s.mask.width()
          << " differs from the sequence frame size " << bundle.height << "x" << bundle.width;
      fail_line(line, msg.str());
    }
    if (auto it = rec.find("bbox"); it != rec.end()) {
      if (!it->is_array() || it->size() != 4) fail_line(line, "\"bbox\" must be [u1, v1, u2, v2]");
      s.box = BBox{as_number((*it)[0], line, "bbox"), as_number((*it)[1], line, "bbox"),
                   as_number((*it)[2], line, "bbox"), as_number((*it)[3], line, "bbox")};
    } else {
      s.box = mask_bbox(s.mask);
    }
    if (auto it = rec.find("embedding"); it != rec.end()) {
      if (!it->is_array() || it->empty()) fail_line(line, "\"embedding\" must be a non-empty array");
      std::vector<double> e;
      double sq = 0.0;
      for (const json& v : *it) {
        e.push_back(as_number(v, line, "embedding entries"));
        sq += e.back() * e.back();
      }
      if (std::abs(std::sqrt(sq) - 1.0) > kUnitNormTolerance) {
        std::ostringstream msg;
        msg << "embedding norm " << std::sqrt(sq) << " is not 1";
        fail_line(line, msg.str());
      }
      s.embedding = std::move(e);
    }
    if (rec.contains("gt_track")) s.gt_track = require_int(rec, "gt_track", line);

    s.det_index = per_frame_count[s.frame]++;
    if (mask_area(s.mask) == 0) {
      std::ostringstream msg;
      msg << "line " << line << ": empty mask, segment dropped";
      bundle.warnings.push_back(msg.str());
      continue;
    }
    if (bundle.frames.size() <= static_cast<std::size_t>(s.frame)) {
      bundle.frames.resize(static_cast<std::size_t>(s.frame) + 1);
    }
    bundle.frames[static_cast<std::size_t>(s.frame)].push_back(std::move(s));
  }
  if (!per_frame_count.empty()) {
    const auto n = static_cast<std::size_t>(per_frame_count.rbegin()->first) + 1;
    if (bundle.frames.size() < n) bundle.frames.resize(n);
  }
  bundle.flows.assign(bundle.frames.size(), std::nullopt);
  return bundle;
}

SequenceBundle load_detections(const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  return parse_detections(in, path.stem().string());
}

std::string format_detections(const SequenceBundle& bundle) {
  std::string out;
  for (const auto& frame : bundle.frames) {
    for (const Segment& s : frame) {
      ordered_json j;
      j["frame"] = s.frame;
      j["class"] = s.label;
      j["score"] = s.score;
      j["bbox"] = {s.box.u1, s.box.v1, s.box.u2, s.box.v2};
      j["mask"] = mask_to_json(s.mask);
      if (s.embedding) j["embedding"] = *s.embedding;
      if (s.gt_track) j["gt_track"] = *s.gt_track;
      out += j.dump();
      out += '\n';
    }
  }
  return out;
}

void write_detections(const SequenceBundle& bundle, const std::filesystem::path& path) {
  write_file_atomic(path, format_detections(bundle));
}

FlowField parse_flow(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 12 || std::memcmp(bytes.data(), kFlowMagic, 4) != 0) {
    throw ValidationError("flow: bad magic (expected MFL1 header)");
  }
  const std::uint32_t width = get_u32(bytes, 4);
  const std::uint32_t height = get_u32(bytes, 8);
  const std::uint64_t expected = 12 + std::uint64_t{width} * height * 8;
  if (bytes.size() != expected) {
    std::ostringstream msg;
    msg << "flow: " << (bytes.size() < expected ? "truncated" : "oversized") << " payload, "
        << bytes.size() << " bytes for " << height << "x" << width << " (expected " << expected
        << ")";
    throw ValidationError(msg.str());
  }
  FlowField f(height, width);
  std::size_t at = 12;
  for (FlowVector& v : f.vectors) {
    v.du = std::bit_cast<float>(get_u32(bytes, at));
    v.dv = std::bit_cast<float>(get_u32(bytes, at + 4));
    at += 8;
  }
  return f;
}

FlowField load_flow(const std::filesystem::path& path) {
  const std::string raw = read_file(path);
  try {
    return parse_flow({reinterpret_cast<const std::uint8_t*>(raw.data()), raw.size()});
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

std::vector<std::uint8_t> encode_flow(const FlowField& flow) {
  std::vector<std::uint8_t> out(kFlowMagic, kFlowMagic + 4);
  out.reserve(12 + flow.vectors.size() * 8);
  put_u32(out, static_cast<std::uint32_t>(flow.width));
  put_u32(out, static_cast<std::uint32_t>(flow.height));
  for (const FlowVector& v : flow.vectors) {
    put_u32(out, std::bit_cast<std::uint32_t>(v.du));
    put_u32(out, std::bit_cast<std::uint32_t>(v.dv));
  }
  return out;
}

void write_flow(const FlowField& flow, const std::filesystem::path& path) {
  const auto bytes = encode_flow(flow);
  write_file_atomic(path, {reinterpret_cast<const char*>(bytes.data()), bytes.size()});
}

std::string flow_file_name(std::int64_t frame) {
  std::ostringstream name;
  name.width(6);
  name.fill('0');
  name << frame;
  return name.str() + ".mfl";
}

void load_flows(SequenceBundle& bundle, const std::filesystem::path& dir) {
  bundle.flows.assign(bundle.frames.size(), std::nullopt);
  for (std::size_t t = 1; t < bundle.frames.size(); ++t) {
    FlowField f = load_flow(dir / flow_file_name(static_cast<std::int64_t>(t)));
    if (f.height != bundle.height || f.width != bundle.width) {
      std::ostringstream msg;
      msg << flow_file_name(static_cast<std::int64_t>(t)) << ": flow is " << f.height << "x"
          << f.width << " but frames are " << bundle.height << "x" << bundle.width;
      throw ValidationError(msg.str());
    }
    bundle.flows[t] = std::move(f);
  }
}

std::vector<Track> tracks_from_paths(std::vector<std::vector<SegmentId>> paths) {
  std::vector<Track> tracks;
  tracks.reserve(paths.size());
  for (auto& p : paths) {
    tracks.push_back(Track{static_cast<TrackId>(tracks.size()), std::move(p)});
  }
  return tracks;
}

std::string format_tracks(const SequenceBundle& bundle, std::span<const Track> tracks) {
  std::map<SegmentId, const Segment*> by_id;
  for (const auto& frame : bundle.frames) {
    for (const Segment& s : frame) by_id.emplace(s.id, &s);
  }
  ordered_json header;
  header["format"] = kTrackFormat;
  header["sequence"] = bundle.name;
  header["num_tracks"] = tracks.size();
  std::string out = header.dump() + "\n";

  std::vector<const Track*> ordered;
  for (const Track& t : tracks) ordered.push_back(&t);
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const Track* a, const Track* b) { return a->id < b->id; });
  for (const Track* t : ordered) {
    for (SegmentId id : t->segments) {
      auto it = by_id.find(id);
      if (it == by_id.end()) {
        std::ostringstream msg;
        msg << "track " << t->id << " references unknown segment " << id;
        throw ValidationError(msg.str());
      }
      ordered_json j;
      j["frame"] = it->second->frame;
      j["det_index"] = it->second->det_index;
      j["track_id"] = t->id;
      out += j.dump();
      out += '\n';
    }
  }
  return out;
}

void write_tracks(const SequenceBundle& bundle, std::span<const Track> tracks,
                  const std::filesystem::path& path) {
  write_file_atomic(path, format_tracks(bundle, tracks));
}

TrackFile parse_tracks(std::istream& in) {
  TrackFile file;
  std::string text;
  std::size_t line = 0;
  bool have_header = false;
  while (std::getline(in, text)) {
    ++line;
    if (std::all_of(text.begin(), text.end(), [](unsigned char c) { return std::isspace(c); })) {
      continue;
    }
    json rec;
    try {
      rec = json::parse(text);
    } catch (const json::parse_error& e) {
      fail_line(line, std::string("invalid JSON: ") + e.what());
    }
    if (!rec.is_object()) fail_line(line, "record must be a JSON object");
    if (!have_header) {
      if (rec.value("format", std::string()) != kTrackFormat) {
        fail_line(line, std::string("expected a \"") + kTrackFormat + "\" header record");
      }
      file.sequence = rec.value("sequence", std::string());
      have_header = true;
      continue;
    }
    TrackRecord r;
    r.frame = require_int(rec, "frame", line);
    r.det_index = require_int(rec, "det_index", line);
    r.track_id = require_int(rec, "track_id", line);
    file.records.push_back(r);
  }
  if (!have_header) throw ValidationError("track file has no header record");
  return file;
}

TrackFile load_tracks(const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  return parse_tracks(in);
}

std::string format_report(const MetricsReport& report) {
  ordered_json j;
  j["mode"] = report.mode == EvalMode::kMots ? "mots" : "mot";
  j["aggregate"] = tally_to_json(report.aggregate, report.mode);
  ordered_json classes = ordered_json::object();
  for (const auto& [label, r] : report.classes) classes[label] = tally_to_json(r, report.mode);
  j["classes"] = classes;
  return j.dump(2) + "\n";
}

void write_report(const MetricsReport& report, const std::filesystem::path& path) {
  write_file_atomic(path, format_report(report));
}

MetricsReport parse_report(const std::string& text) {
  const json j = parse_json_text(text, "report");
  try {
    MetricsReport r;
    const std::string mode = j.at("mode").get<std::string>();
    if (mode != "mots" && mode != "mot") throw ValidationError("report: unknown mode " + mode);
    r.mode = mode == "mots" ? EvalMode::kMots : EvalMode::kMot;
    r.aggregate = tally_from_json(j.at("aggregate"), r.mode);
    for (const auto& [label, c] : j.at("classes").items()) {
      r.classes[label] = tally_from_json(c, r.mode);
    }
    return r;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("report: ") + e.what());
  }
}

MetricsReport load_report(const std::filesystem::path& path) {
  return parse_report(read_file(path));
}

void apply_terms(LinkerConfig& cfg, const std::string& terms) {
  cfg.use_siou = cfg.use_embedding = cfg.use_time = false;
  std::istringstream in(terms);
  std::string term;
  while (std::getline(in, term, ',')) {
    if (term == "siou") {
      cfg.use_siou = true;
    } else if (term == "embedding") {
      cfg.use_embedding = true;
    } else if (term == "time") {
      cfg.use_time = true;
    } else {
      throw ValidationError("unknown payoff term '" + term + "' (expected siou, embedding, time)");
    }
  }
}

RunConfig parse_config(const std::string& text) {
  const json j = parse_json_text(text, "config");
  if (!j.is_object()) throw ValidationError("config must be a JSON object");
  RunConfig cfg;
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "tau0") {
        cfg.miner.tau0 = value.get<double>();
      } else if (key == "tau1") {
        cfg.miner.tau1 = value.get<double>();
      } else if (key == "tau2") {
        cfg.miner.tau2 = value.get<double>();
      } else if (key == "tau") {
        cfg.linker.tau = value.get<double>();
      } else if (key == "window") {
        cfg.linker.window = value.get<std::int64_t>();
      } else if (key == "min_track") {
        cfg.linker.min_track = value.get<std::int64_t>();
      } else if (key == "terms") {
        apply_terms(cfg.linker, value.get<std::string>());
      } else {
        throw ValidationError("config: unknown key '" + key + "'");
      }
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("config: ") + e.what());
  }
  cfg.miner.validate();
  cfg.linker.validate();
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  return parse_config(read_file(path));
}

}  // namespace motsmine
