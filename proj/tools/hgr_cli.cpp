// hgr: head-gesture pipeline runner.
//
//   hgr run      --input DIR | --raw --width W --height H [--channels C]
//                [--config FILE] [--dump-masks DIR] [--dump-flow DIR] [--events FILE]
//   hgr bench    [--config FILE] [--input DIR] [--frames N]
//   hgr evaluate --corpus MANIFEST [--config FILE]
//   hgr synth    --spec FILE --out DIR
//
// Exit codes: 0 success, 1 input error, 2 config error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "hgr/hgr.hpp"

namespace {

constexpr int kInputError = 1;
constexpr int kConfigError = 2;

struct Overrides {
  std::string config_path;
  std::optional<int> burn_in;
  std::optional<std::string> flow_input;
  std::optional<double> alpha_sq;
  std::optional<int> max_iters;
};

void add_config_options(CLI::App& cmd, Overrides& o) {
  cmd.add_option("--config", o.config_path, "JSON configuration file");
  cmd.add_option("--burn-in", o.burn_in, "frames absorbed before classification");
  cmd.add_option("--flow-input", o.flow_input, "flow input: binary or grayscale");
  cmd.add_option("--alpha-sq", o.alpha_sq, "smoothness weight");
  cmd.add_option("--max-iters", o.max_iters, "flow iteration cap");
}

// flag > file > default
hgr::PipelineConfig resolve_config(const Overrides& o) {
  hgr::PipelineConfig cfg;
  if (!o.config_path.empty()) cfg = hgr::load_config(o.config_path);
  nlohmann::json patch = nlohmann::json::object();
  if (o.burn_in) patch["burn_in_frames"] = *o.burn_in;
  if (o.flow_input) patch["flow"]["input"] = *o.flow_input;
  if (o.alpha_sq) patch["flow"]["alpha_sq"] = *o.alpha_sq;
  if (o.max_iters) patch["flow"]["max_iters"] = *o.max_iters;
  return hgr::config_from_json(patch, cfg);
}

nlohmann::json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw hgr::ConfigError("cannot open " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw hgr::ConfigError(path + ": " + e.what());
  }
}

void print_report(const hgr::RunReport& r) {
  std::fprintf(stderr, "frames processed: %zu, classified: %zu, %.2f frames/s\n",
               r.frames_processed, r.classified_frames, r.fps);
  for (hgr::Direction d : hgr::kAllDirections)
    std::fprintf(stderr, "  %-5s %zu\n", std::string(hgr::to_string(d)).c_str(),
                 r.direction_counts[static_cast<std::size_t>(d)]);
  std::fprintf(stderr, "recognized: %s, gestures: %zu\n",
               std::string(hgr::to_string(r.recognized)).c_str(), r.gestures.size());
}

int cmd_run(const Overrides& o, const std::string& input, bool raw, hgr::RawFormat format,
            const std::string& masks, const std::string& flow, const std::string& events_path) {
  const hgr::PipelineConfig cfg = resolve_config(o);
  std::optional<hgr::FrameSource> source;
  if (raw) {
    std::ios::sync_with_stdio(false);
    source.emplace(hgr::FrameSource::from_stream(std::cin, format));
  } else {
    source.emplace(hgr::FrameSource::from_directory(input));
  }
  hgr::DumpOptions dumps;
  if (!masks.empty()) dumps.masks_dir = masks;
  if (!flow.empty()) dumps.flow_dir = flow;

  hgr::RunReport report;
  if (events_path.empty()) {
    report = hgr::run_pipeline(cfg, *source, std::cout, dumps);
  } else {
    std::ofstream out(events_path, std::ios::binary);
    if (!out) throw hgr::InputError(0, "cannot write " + events_path);
    report = hgr::run_pipeline(cfg, *source, out, dumps);
  }
  print_report(report);
  return 0;
}

int cmd_bench(const Overrides& o, const std::string& input, int frames) {
  const hgr::PipelineConfig cfg = resolve_config(o);
  std::vector<hgr::Frame> clip;
  if (!input.empty()) {
    auto source = hgr::FrameSource::from_directory(input);
    while (auto f = source.next_frame()) clip.push_back(std::move(*f));
  } else {
    clip = hgr::gen_clip(hgr::bench_scene(cfg.burn_in_frames, frames)).frames;
  }
  const hgr::RunReport r = hgr::bench(cfg, clip);
  std::printf("frames: %zu timed: %zu seconds: %.4f fps: %.2f\n", r.frames_processed,
              r.classified_frames, r.seconds, r.fps);
  return 0;
}

int cmd_evaluate(const Overrides& o, const std::string& manifest) {
  const hgr::PipelineConfig cfg = resolve_config(o);
  const hgr::EvaluationTable table = hgr::evaluate_manifest(cfg, manifest);
  std::fputs(hgr::format_table(table).c_str(), stdout);
  return 0;
}

hgr::CorpusSpec corpus_from_json(const nlohmann::json& j) {
  hgr::CorpusSpec c;
  c.width = j.value("width", c.width);
  c.height = j.value("height", c.height);
  c.clips_per_direction = j.value("clips_per_direction", c.clips_per_direction);
  c.noise_sigma = j.value("noise_sigma", c.noise_sigma);
  c.burn_in = j.value("burn_in", c.burn_in);
  c.motion_frames = j.value("motion_frames", c.motion_frames);
  c.speed = j.value("speed", c.speed);
  c.base_seed = j.value("base_seed", c.base_seed);
  return c;
}

// Spec documents:
//   {"kind": "clip", "scene": {...}}                    (default kind; scene may be inline)
//   {"kind": "gesture", "gesture": "YES|NO", "stroke_frames": 6, "scene": {...}}
//   {"kind": "corpus", "corpus": {...}}                 (writes <out>/manifest.json)
int cmd_synth(const std::string& spec_path, const std::string& out) {
  const nlohmann::json spec = read_json(spec_path);
  try {
    const std::string kind = spec.value("kind", "clip");
    const nlohmann::json scene = spec.contains("scene") ? spec.at("scene") : spec;
    if (kind == "corpus") {
      const auto corpus = hgr::make_direction_corpus(
          corpus_from_json(spec.value("corpus", nlohmann::json::object())));
      hgr::write_corpus(out, corpus);
      std::fprintf(stderr, "wrote %zu clips to %s\n", corpus.size(), out.c_str());
    } else if (kind == "gesture") {
      const std::string g = spec.value("gesture", "NO");
      if (g != "YES" && g != "NO") throw hgr::ConfigError("synth: gesture must be YES or NO");
      const auto clip = hgr::gen_gesture_clip(g == "YES" ? hgr::GestureKind::yes : hgr::GestureKind::no,
                                              hgr::scene_from_json(scene),
                                              spec.value("stroke_frames", 6));
      hgr::write_clip(out, clip);
    } else if (kind == "clip") {
      hgr::write_clip(out, hgr::gen_clip(hgr::scene_from_json(scene)));
    } else {
      throw hgr::ConfigError("synth: unknown kind '" + kind + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw hgr::ConfigError(std::string("synth spec: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw hgr::ConfigError(std::string("synth spec: ") + e.what());
  } catch (const std::out_of_range& e) {
    throw hgr::ConfigError(std::string("synth spec: ") + e.what());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Head-gesture recognition pipeline"};
  app.require_subcommand(1);

  Overrides run_o, bench_o, eval_o;
  std::string input, masks, flow, events, bench_input, manifest, spec_path, out_dir;
  bool raw = false;
  hgr::RawFormat format;
  int bench_frames = 100;

  auto* run = app.add_subcommand("run", "run the pipeline and emit JSONL events");
  auto* in_opt = run->add_option("--input", input, "directory of PGM/PPM frames");
  auto* raw_opt = run->add_flag("--raw", raw, "read headerless frames from standard input");
  in_opt->excludes(raw_opt);
  run->add_option("--width", format.width, "raw frame width");
  run->add_option("--height", format.height, "raw frame height");
  run->add_option("--channels", format.channels, "raw frame channels (1 or 3)");
  run->add_option("--dump-masks", masks, "write masks as PGM into DIR");
  run->add_option("--dump-flow", flow, "write flow fields as .flo into DIR");
  run->add_option("--events", events, "write JSONL events to FILE instead of stdout");
  add_config_options(*run, run_o);

  auto* bench = app.add_subcommand("bench", "measure throughput on a synthetic 320x240 clip");
  bench->add_option("--input", bench_input, "benchmark a frame directory instead");
  bench->add_option("--frames", bench_frames, "timed frames after burn-in")->check(CLI::PositiveNumber);
  add_config_options(*bench, bench_o);

  auto* evaluate = app.add_subcommand("evaluate", "success-rate table over a synthetic corpus");
  evaluate->add_option("--corpus", manifest, "corpus manifest.json")->required();
  add_config_options(*evaluate, eval_o);

  auto* synth = app.add_subcommand("synth", "generate synthetic clips with ground truth");
  synth->add_option("--spec", spec_path, "scene / gesture / corpus spec JSON")->required();
  synth->add_option("--out", out_dir, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigError;
  }

  try {
    if (*run) {
      if (!raw && input.empty()) throw hgr::ConfigError("run: --input DIR or --raw is required");
      if (raw && (format.width <= 0 || format.height <= 0))
        throw hgr::ConfigError("run: --raw needs --width and --height");
      if (raw && format.channels != 1 && format.channels != 3)
        throw hgr::ConfigError("run: --channels must be 1 or 3");
      return cmd_run(run_o, input, raw, format, masks, flow, events);
    }
    if (*bench) return cmd_bench(bench_o, bench_input, bench_frames);
    if (*evaluate) return cmd_evaluate(eval_o, manifest);
    if (*synth) return cmd_synth(spec_path, out_dir);
  } catch (const hgr::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kConfigError;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "input error: %s\n", e.what());
    return kInputError;
  }
  return 0;
}
