#pragma once

// End-to-end pipeline: background model -> shadow pass -> flow between
// consecutive processed frames -> summed-flow direction -> vote -> gestures.

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <deque>
#include <filesystem>
#include <functional>
#include <initializer_list>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "hgr/classify.hpp"
#include "hgr/flow.hpp"
#include "hgr/frame.hpp"
#include "hgr/gmm.hpp"
#include "hgr/shadow.hpp"
#include "hgr/synth.hpp"

namespace hgr {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input failure with the index of the frame being read or processed.
class InputError : public std::runtime_error {
 public:
  InputError(std::int64_t frame, const std::string& what)
      : std::runtime_error("frame " + std::to_string(frame) + ": " + what), frame_(frame) {}
  std::int64_t frame() const noexcept { return frame_; }

 private:
  std::int64_t frame_;
};

struct PipelineConfig {
  GmmConfig gmm;
  ShadowConfig shadow;
  FlowConfig flow;
  ClassifierConfig classifier;
  GestureConfig gesture;
  int burn_in_frames = 50;

  void validate() const {
    try {
      gmm.validate();
      shadow.validate();
      flow.validate();
      classifier.validate();
      gesture.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
    if (burn_in_frames < 0) throw ConfigError("burn_in_frames must be >= 0");
  }
};

namespace detail {

template <typename T>
void read_field(const nlohmann::json& obj, const char* key, T& out) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(std::string("config: bad value for '") + key + "'");
  }
}

inline void check_keys(const nlohmann::json& obj, const char* section,
                       std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw ConfigError(std::string("config: '") + section + "' must be an object");
  for (const auto& item : obj.items()) {
    bool known = false;
    for (const char* k : allowed) known = known || item.key() == k;
    if (!known)
      throw ConfigError(std::string("config: unknown key '") + item.key() + "' in " + section);
  }
}

}  // namespace detail

// Overlays a JSON document onto `base`; absent fields keep their value.
inline PipelineConfig config_from_json(const nlohmann::json& j, PipelineConfig base = {}) {
  using detail::check_keys;
  using detail::read_field;
  check_keys(j, "config", {"gmm", "shadow", "flow", "classifier", "gesture", "burn_in_frames"});
  if (j.contains("gmm")) {
    const auto& g = j.at("gmm");
    check_keys(g, "gmm", {"components", "learning_rate", "background_threshold", "match_sigmas",
                          "initial_variance", "min_variance", "initial_weight"});
    read_field(g, "components", base.gmm.components);
    read_field(g, "learning_rate", base.gmm.learning_rate);
    read_field(g, "background_threshold", base.gmm.background_threshold);
    read_field(g, "match_sigmas", base.gmm.match_sigmas);
    read_field(g, "initial_variance", base.gmm.initial_variance);
    read_field(g, "min_variance", base.gmm.min_variance);
    read_field(g, "initial_weight", base.gmm.initial_weight);
  }
  if (j.contains("shadow")) {
    const auto& s = j.at("shadow");
    check_keys(s, "shadow", {"min_brightness", "max_brightness", "max_chromaticity"});
    read_field(s, "min_brightness", base.shadow.min_brightness);
    read_field(s, "max_brightness", base.shadow.max_brightness);
    read_field(s, "max_chromaticity", base.shadow.max_chromaticity);
  }
  if (j.contains("flow")) {
    const auto& f = j.at("flow");
    check_keys(f, "flow", {"alpha_sq", "max_iters", "eps", "input"});
    read_field(f, "alpha_sq", base.flow.alpha_sq);
    read_field(f, "max_iters", base.flow.max_iters);
    read_field(f, "eps", base.flow.eps);
    if (f.contains("input")) {
      std::string mode;
      read_field(f, "input", mode);
      if (mode == "binary") base.flow.input = FlowInput::binary_mask;
      else if (mode == "grayscale") base.flow.input = FlowInput::grayscale;
      else throw ConfigError("config: flow.input must be 'binary' or 'grayscale'");
    }
  }
  if (j.contains("classifier")) {
    const auto& c = j.at("classifier");
    check_keys(c, "classifier", {"idle_eps", "vote_window"});
    read_field(c, "idle_eps", base.classifier.idle_eps);
    read_field(c, "vote_window", base.classifier.vote_window);
  }
  if (j.contains("gesture")) {
    const auto& g = j.at("gesture");
    check_keys(g, "gesture", {"min_alternations", "max_gap"});
    read_field(g, "min_alternations", base.gesture.min_alternations);
    read_field(g, "max_gap", base.gesture.max_gap);
  }
  read_field(j, "burn_in_frames", base.burn_in_frames);
  base.validate();
  return base;
}

inline PipelineConfig load_config(const std::filesystem::path& path, PipelineConfig base = {}) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config " + path.string() + ": " + e.what());
  }
  return config_from_json(j, base);
}

// ---------------------------------------------------------------------------

struct FrameEvent {
  std::int64_t frame = 0;
  FlowSummary summary;
  Direction direction = Direction::idle;  // per-frame classification
  Direction voted = Direction::idle;      // majority over the vote window
  std::optional<GestureEvent> gesture;    // completed on this frame
};

namespace detail {

inline std::string fixed4(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  std::string s(buf);
  if (s == "-0.0000") s = "0.0000";
  return s;
}

}  // namespace detail

// {"frame": int, "s_x": float, "s_y": float, "direction": "...", "gesture": "YES"|"NO"|null}
inline std::string event_json(const FrameEvent& ev) {
  std::string line = "{\"frame\": " + std::to_string(ev.frame) +
                     ", \"s_x\": " + detail::fixed4(ev.summary.s_x) +
                     ", \"s_y\": " + detail::fixed4(ev.summary.s_y) + ", \"direction\": \"" +
                     std::string(to_string(ev.direction)) + "\", \"gesture\": ";
  line += ev.gesture ? "\"" + std::string(to_string(ev.gesture->kind)) + "\"" : "null";
  line += "}";
  return line;
}

struct RunReport {
  std::size_t frames_processed = 0;
  std::size_t classified_frames = 0;
  double seconds = 0.0;  // wall clock over the classified frames
  double fps = 0.0;
  std::array<std::size_t, 5> direction_counts{};  // indexed by Direction
  std::vector<GestureEvent> gestures;
  Direction recognized = Direction::idle;  // vote over every classified frame
};

class Pipeline {
 public:
  explicit Pipeline(PipelineConfig config)
      : config_(validated(std::move(config))), detector_(config_.gesture) {}

  const PipelineConfig& config() const noexcept { return config_; }

  // Processes one frame; returns an event once the burn-in is over.
  std::optional<FrameEvent> push(const Frame& frame) {
    if (!model_)
      model_.emplace(frame.width(), frame.height(), frame.channels(), config_.gmm);
    const std::int64_t index = frame.index();
    SegmentationMask mask;
    try {
      mask = model_->process_frame(frame);
    } catch (const std::invalid_argument& e) {
      throw InputError(index, e.what());
    }
    mask = apply_shadow_pass(mask, frame, *model_, config_.shadow);

    const bool classify = processed_ >= static_cast<std::size_t>(config_.burn_in_frames);
    const bool can_flow = frame.width() >= 2 && frame.height() >= 2;
    // The flow input is only needed from the frame preceding the first classified one.
    const bool need_input =
        can_flow && processed_ + 1 >= static_cast<std::size_t>(config_.burn_in_frames);

    std::optional<GrayFrame> input;
    if (need_input) input = flow_input(frame, mask);
    last_flow_.reset();
    std::optional<FrameEvent> event;
    if (classify) {
      FrameEvent ev;
      ev.frame = index;
      if (input && previous_input_) {
        last_flow_ = solve_flow(*previous_input_, *input, config_.flow);
        ev.summary = sum_flow(*last_flow_, mask);
      }
      ev.summary.frame_index = index;
      ev.direction = classify_direction(ev.summary, config_.classifier);
      window_.push_back(ev.direction);
      if (window_.size() > static_cast<std::size_t>(config_.classifier.vote_window))
        window_.pop_front();
      ev.voted = vote(std::vector<Direction>(window_.begin(), window_.end()));
      ev.gesture = detector_.push(ev.voted, index);

      all_directions_.push_back(ev.direction);
      ++report_.classified_frames;
      ++report_.direction_counts[static_cast<std::size_t>(ev.direction)];
      if (ev.gesture) report_.gestures.push_back(*ev.gesture);
      event = ev;
    }
    previous_input_ = std::move(input);
    last_mask_ = std::move(mask);
    ++processed_;
    ++report_.frames_processed;
    return event;
  }

  const SegmentationMask& last_mask() const noexcept { return last_mask_; }
  const std::optional<FlowField>& last_flow() const noexcept { return last_flow_; }

  RunReport report() const {
    RunReport r = report_;
    if (!all_directions_.empty()) r.recognized = vote(all_directions_);
    return r;
  }

 private:
  static PipelineConfig validated(PipelineConfig config) {
    config.validate();
    return config;
  }

  GrayFrame flow_input(const Frame& frame, const SegmentationMask& mask) const {
    GrayFrame out(frame.width(), frame.height());
    auto dst = out.data();
    auto labels = mask.labels();
    if (config_.flow.input == FlowInput::binary_mask) {
      for (std::size_t i = 0; i < dst.size(); ++i)
        dst[i] = labels[i] == Label::foreground ? 255.0 : 0.0;
    } else {
      const GrayFrame gray = to_gray(frame);
      for (std::size_t i = 0; i < dst.size(); ++i)
        dst[i] = labels[i] == Label::foreground ? gray.data()[i] : 0.0;
    }
    return out;
  }

  PipelineConfig config_;
  std::optional<BackgroundModel> model_;
  std::optional<GrayFrame> previous_input_;
  std::deque<Direction> window_;
  std::vector<Direction> all_directions_;
  GestureDetector detector_;
  SegmentationMask last_mask_;
  std::optional<FlowField> last_flow_;
  std::size_t processed_ = 0;
  RunReport report_;
};

struct DumpOptions {
  std::optional<std::filesystem::path> masks_dir;
  std::optional<std::filesystem::path> flow_dir;
};

// Pulls frames from `source` until end-of-source, writing one JSONL line per
// classified frame to `events`. I/O failures stop the run with InputError.
inline RunReport run_pipeline(const PipelineConfig& config, FrameSource& source,
                              std::ostream& events, const DumpOptions& dumps = {}) {
  Pipeline pipeline(config);
  if (dumps.masks_dir) std::filesystem::create_directories(*dumps.masks_dir);
  if (dumps.flow_dir) std::filesystem::create_directories(*dumps.flow_dir);
  using clock = std::chrono::steady_clock;
  double seconds = 0.0;
  for (;;) {
    const auto expected = static_cast<std::int64_t>(source.cursor());
    std::optional<Frame> frame;
    try {
      frame = source.next_frame();
    } catch (const InputError&) {
      throw;
    } catch (const std::exception& e) {
      throw InputError(expected, e.what());
    }
    if (!frame) break;
    const auto t0 = clock::now();
    auto ev = pipeline.push(*frame);
    if (ev) seconds += std::chrono::duration<double>(clock::now() - t0).count();

    char name[32];
    if (dumps.masks_dir) {
      std::snprintf(name, sizeof name, "mask_%06lld.pgm", static_cast<long long>(frame->index()));
      write_pnm(*dumps.masks_dir / name, mask_to_frame(pipeline.last_mask()));
    }
    if (dumps.flow_dir && pipeline.last_flow()) {
      std::snprintf(name, sizeof name, "flow_%06lld.flo", static_cast<long long>(frame->index()));
      write_file_bytes(*dumps.flow_dir / name, encode_flo(*pipeline.last_flow()));
    }
    if (ev) events << event_json(*ev) << '\n';
  }
  events.flush();
  RunReport report = pipeline.report();
  report.seconds = seconds;
  report.fps = seconds > 0.0 ? static_cast<double>(report.classified_frames) / seconds : 0.0;
  return report;
}

// Runs an in-memory clip; throughput covers the post-burn-in frames only.
inline RunReport bench(const PipelineConfig& config, const std::vector<Frame>& clip,
                       std::vector<FrameEvent>* events = nullptr) {
  Pipeline pipeline(config);
  using clock = std::chrono::steady_clock;
  double seconds = 0.0;
  for (const Frame& frame : clip) {
    const auto t0 = clock::now();
    auto ev = pipeline.push(frame);
    const auto t1 = clock::now();
    if (ev) {
      seconds += std::chrono::duration<double>(t1 - t0).count();
      if (events) events->push_back(*ev);
    }
  }
  RunReport report = pipeline.report();
  report.seconds = seconds;
  report.fps = seconds > 0.0 ? static_cast<double>(report.classified_frames) / seconds : 0.0;
  return report;
}

// The default benchmark clip: 320x240, a 48x48 blob drifting right at
// 2 px/frame after the burn-in, noise sigma 2.
inline SceneSpec bench_scene(int burn_in, int timed_frames = 100) {
  SceneSpec s;
  s.width = 320;
  s.height = 240;
  s.noise_sigma = 2.0;
  s.seed = 8;
  s.n_frames = burn_in + timed_frames;
  s.background = {true, {190, 170, 140}, {150, 140, 120}};
  s.blob = {48, 48, 40, 96, 2, 0, {50, 60, 90}, std::max(0, burn_in - 2)};
  return s;
}

// ---------------------------------------------------------------------------
// Evaluation

struct EvaluationRow {
  Direction direction = Direction::idle;
  std::size_t clips = 0;
  std::size_t correct = 0;
  double rate() const noexcept {
    return clips ? 100.0 * static_cast<double>(correct) / static_cast<double>(clips) : 0.0;
  }
};

struct EvaluationTable {
  std::vector<EvaluationRow> rows;  // LEFT, RIGHT, UP, DOWN (non-empty rows only)
  std::size_t clips = 0;
  std::size_t correct = 0;

  std::optional<double> overall_rate() const noexcept {
    if (clips == 0) return std::nullopt;
    return 100.0 * static_cast<double>(correct) / static_cast<double>(clips);
  }
  const EvaluationRow* row(Direction d) const noexcept {
    for (const auto& r : rows)
      if (r.direction == d) return &r;
    return nullptr;
  }
};

inline void add_result(EvaluationTable& table, Direction expected, Direction recognized) {
  std::array<EvaluationRow, 4> rows{};
  const std::array<Direction, 4> order{Direction::left, Direction::right, Direction::up,
                                       Direction::down};
  for (std::size_t i = 0; i < 4; ++i) {
    rows[i].direction = order[i];
    if (const auto* r = table.row(order[i])) rows[i] = *r;
  }
  for (auto& r : rows) {
    if (r.direction != expected) continue;
    ++r.clips;
    if (recognized == expected) ++r.correct;
  }
  table.rows.clear();
  for (const auto& r : rows)
    if (r.clips) table.rows.push_back(r);
  ++table.clips;
  if (recognized == expected) ++table.correct;
}

inline std::string format_table(const EvaluationTable& table) {
  std::ostringstream os;
  char line[128];
  std::snprintf(line, sizeof line, "%-10s %8s %8s %10s\n", "direction", "clips", "correct",
                "success");
  os << line;
  for (const auto& r : table.rows) {
    std::snprintf(line, sizeof line, "%-10s %8zu %8zu %9.1f%%\n",
                  std::string(to_string(r.direction)).c_str(), r.clips, r.correct, r.rate());
    os << line;
  }
  if (const auto overall = table.overall_rate())
    std::snprintf(line, sizeof line, "%-10s %8zu %8zu %9.1f%%\n", "overall", table.clips,
                  table.correct, *overall);
  else
    std::snprintf(line, sizeof line, "%-10s %8zu %8zu %10s\n", "overall", table.clips,
                  table.correct, "n/a");
  os << line;
  return os.str();
}

inline EvaluationTable evaluate_corpus(const PipelineConfig& config,
                                       const std::vector<LabeledClip>& corpus) {
  EvaluationTable table;
  for (const auto& item : corpus) {
    const Clip clip = gen_clip(item.spec);
    add_result(table, item.expected, bench(config, clip.frames).recognized);
  }
  return table;
}

class ManifestError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Manifest: {"clips": [{"name": str, "dir": str, "expected": "LEFT|RIGHT|UP|DOWN"}, ...]}
// with clip directories relative to the manifest file.
inline EvaluationTable evaluate_manifest(const PipelineConfig& config,
                                         const std::filesystem::path& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) throw ManifestError("cannot open manifest " + manifest_path.string());
  nlohmann::json manifest;
  try {
    in >> manifest;
  } catch (const nlohmann::json::exception& e) {
    throw ManifestError("manifest: " + std::string(e.what()));
  }
  if (!manifest.is_object() || !manifest.contains("clips") || !manifest.at("clips").is_array())
    throw ManifestError("manifest: missing 'clips' array");
  const auto root = manifest_path.parent_path();

  EvaluationTable table;
  for (const auto& entry : manifest.at("clips")) {
    std::string dir, expected_name;
    try {
      dir = entry.at("dir").get<std::string>();
      expected_name = entry.at("expected").get<std::string>();
    } catch (const nlohmann::json::exception&) {
      throw ManifestError("manifest: clip entries need 'dir' and 'expected'");
    }
    const auto expected = direction_from_string(expected_name);
    if (!expected || *expected == Direction::idle)
      throw ManifestError("manifest: bad expected direction '" + expected_name + "'");
    auto source = FrameSource::from_directory(root / dir);
    std::vector<Frame> frames;
    while (auto f = source.next_frame()) frames.push_back(std::move(*f));
    if (frames.empty()) throw ManifestError("manifest: clip '" + dir + "' has no frames");
    add_result(table, *expected, bench(config, frames).recognized);
  }
  return table;
}

inline void write_corpus(const std::filesystem::path& out_dir,
                         const std::vector<LabeledClip>& corpus) {
  nlohmann::json clips = nlohmann::json::array();
  for (const auto& item : corpus) {
    write_clip(out_dir / item.name, gen_clip(item.spec));
    clips.push_back({{"name", item.name},
                     {"dir", item.name},
                     {"expected", std::string(to_string(item.expected))},
                     {"spec", to_json(item.spec)}});
  }
  const std::string text = nlohmann::json{{"clips", clips}}.dump(2) + "\n";
  write_file_bytes(out_dir / "manifest.json",
                   std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

}  // namespace hgr
