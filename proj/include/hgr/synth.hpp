#pragma once

// Deterministic synthetic clips with ground truth: a flat or vertically
// graded background, one rectangular blob following a motion path, an
// optional cast-shadow rectangle under the blob and additive Gaussian noise.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "hgr/classify.hpp"
#include "hgr/frame.hpp"
#include "hgr/gmm.hpp"

namespace hgr {

// xorshift64* generator; seed 0 is remapped since the all-zero state is fixed.
class XorShift64Star {
 public:
  explicit XorShift64Star(std::uint64_t seed) noexcept
      : state_(seed == 0 ? 0x9E3779B97F4A7C15ull : seed) {}

  std::uint64_t next() noexcept {
    state_ ^= state_ >> 12;
    state_ ^= state_ << 25;
    state_ ^= state_ >> 27;
    return state_ * 0x2545F4914F6CDD1Dull;
  }

  // Uniform in [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t state_;
};

// Box-Muller; both variates of each pair are used, cosine branch first.
class GaussianNoise {
 public:
  explicit GaussianNoise(std::uint64_t seed) noexcept : rng_(seed) {}

  double next() noexcept {
    if (cached_) {
      const double z = *cached_;
      cached_.reset();
      return z;
    }
    const double u1 = 1.0 - rng_.uniform();  // (0, 1]
    const double u2 = rng_.uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    cached_ = r * std::sin(theta);
    return r * std::cos(theta);
  }

 private:
  XorShift64Star rng_;
  std::optional<double> cached_;
};

using Color = std::array<double, 3>;

struct Background {
  bool gradient = false;
  Color top{128, 128, 128};
  Color bottom{128, 128, 128};  // used when gradient
};

struct Blob {
  int width = 20;
  int height = 20;
  double x = 0;  // top-left at appear_frame
  double y = 0;
  double vx = 0;  // pixels / frame
  double vy = 0;
  Color color{255, 255, 255};
  int appear_frame = 0;  // absent before this frame
};

struct SceneSpec {
  int width = 64;
  int height = 64;
  int channels = 3;
  Background background;
  Blob blob;
  std::optional<double> shadow_factor;
  double noise_sigma = 0.0;
  std::uint64_t seed = 1;
  int n_frames = 10;

  void validate() const {
    if (width < 2 || height < 2) throw std::invalid_argument("scene: frame must be >= 2x2");
    if (channels != 1 && channels != 3) throw std::invalid_argument("scene: channels must be 1 or 3");
    if (n_frames < 1) throw std::invalid_argument("scene: n_frames must be >= 1");
    if (blob.width < 1 || blob.height < 1) throw std::invalid_argument("scene: empty blob");
    if (blob.appear_frame < 0) throw std::invalid_argument("scene: appear_frame must be >= 0");
    if (shadow_factor && !(*shadow_factor > 0.0 && *shadow_factor < 1.0))
      throw std::invalid_argument("scene: shadow_factor must be in (0,1)");
    if (!(noise_sigma >= 0.0)) throw std::invalid_argument("scene: noise_sigma must be >= 0");
  }
};

class BlobOutOfBoundsError : public std::out_of_range {
 public:
  explicit BlobOutOfBoundsError(int frame)
      : std::out_of_range("blob leaves the frame at frame " + std::to_string(frame)),
        frame_(frame) {}
  int frame() const noexcept { return frame_; }

 private:
  int frame_;
};

struct Rect {
  int x = 0, y = 0, width = 0, height = 0;

  bool contains(int px, int py) const noexcept {
    return px >= x && px < x + width && py >= y && py < y + height;
  }
  bool empty() const noexcept { return width <= 0 || height <= 0; }
  friend bool operator==(const Rect&, const Rect&) = default;
};

struct FrameTruth {
  std::optional<Rect> blob;   // absent before appear_frame
  double vx = 0.0, vy = 0.0;  // displacement since the previous frame
  Direction direction = Direction::idle;
};

struct GroundTruth {
  std::vector<FrameTruth> frames;
  std::vector<GestureEvent> gestures;
};

struct Clip {
  std::vector<Frame> frames;
  GroundTruth truth;
};

// Image-space displacement to direction: dominant axis, y grows downward.
inline Direction direction_of_motion(double dx, double dy) noexcept {
  if (dx == 0.0 && dy == 0.0) return Direction::idle;
  if (std::abs(dx) >= std::abs(dy)) return dx > 0 ? Direction::right : Direction::left;
  return dy > 0 ? Direction::down : Direction::up;
}

inline SegmentationMask truth_mask(const FrameTruth& truth, int width, int height) {
  SegmentationMask mask(width, height);
  if (truth.blob)
    for (int y = 0; y < height; ++y)
      for (int x = 0; x < width; ++x)
        if (truth.blob->contains(x, y)) mask.at(x, y) = Label::foreground;
  return mask;
}

namespace detail {

inline int round_half_up(double v) noexcept { return static_cast<int>(std::floor(v + 0.5)); }

inline std::uint8_t to_sample(double v) noexcept {
  return static_cast<std::uint8_t>(std::clamp(round_half_up(v), 0, 255));
}

// Renders a clip whose blob top-left follows `path` (one entry per frame from
// appear_frame on, fractional positions rounded half-up).
inline Clip render_clip(const SceneSpec& spec, const std::vector<std::array<double, 2>>& path) {
  spec.validate();
  Clip clip;
  GaussianNoise noise(spec.seed);
  const std::size_t ch = static_cast<std::size_t>(spec.channels);

  std::optional<std::array<int, 2>> prev;
  for (int k = 0; k < spec.n_frames; ++k) {
    FrameTruth truth;
    std::optional<Rect> shadow;
    if (k >= spec.blob.appear_frame) {
      const auto& p = path.at(static_cast<std::size_t>(k - spec.blob.appear_frame));
      const Rect r{round_half_up(p[0]), round_half_up(p[1]), spec.blob.width, spec.blob.height};
      if (r.x < 0 || r.y < 0 || r.x + r.width > spec.width || r.y + r.height > spec.height)
        throw BlobOutOfBoundsError(k);
      truth.blob = r;
      if (prev) {
        truth.vx = r.x - (*prev)[0];
        truth.vy = r.y - (*prev)[1];
      }
      truth.direction = direction_of_motion(truth.vx, truth.vy);
      prev = std::array<int, 2>{r.x, r.y};
      if (spec.shadow_factor) shadow = Rect{r.x, r.y + r.height, r.width, r.height};
    }

    Frame frame(spec.width, spec.height, spec.channels, k);
    auto data = frame.data();
    for (int y = 0; y < spec.height; ++y) {
      const double t = spec.height > 1 ? static_cast<double>(y) / (spec.height - 1) : 0.0;
      for (int x = 0; x < spec.width; ++x) {
        Color c = spec.background.top;
        if (spec.background.gradient)
          for (std::size_t i = 0; i < 3; ++i)
            c[i] = spec.background.top[i] + (spec.background.bottom[i] - spec.background.top[i]) * t;
        if (shadow && shadow->contains(x, y))
          for (double& v : c) v *= *spec.shadow_factor;
        if (truth.blob && truth.blob->contains(x, y)) c = spec.blob.color;
        const std::size_t base = (static_cast<std::size_t>(y) * spec.width + x) * ch;
        for (std::size_t i = 0; i < ch; ++i) {
          double v = c[i];
          if (spec.noise_sigma > 0.0) v += spec.noise_sigma * noise.next();
          data[base + i] = to_sample(v);
        }
      }
    }
    clip.frames.push_back(std::move(frame));
    clip.truth.frames.push_back(truth);
  }
  return clip;
}

}  // namespace detail

// Constant-velocity clip.
inline Clip gen_clip(const SceneSpec& spec) {
  spec.validate();
  std::vector<std::array<double, 2>> path;
  for (int k = spec.blob.appear_frame; k < spec.n_frames; ++k) {
    const double steps = k - spec.blob.appear_frame;
    path.push_back({spec.blob.x + spec.blob.vx * steps, spec.blob.y + spec.blob.vy * steps});
  }
  return detail::render_clip(spec, path);
}

// Oscillating clip: NO moves left, right, left; YES moves up, down, up. The
// outer strokes last `stroke_frames`, the middle one twice that, so the blob
// returns to its start. Speed is |(vx, vy)| of the scene blob (2 px/frame when
// zero). The motion starts at appear_frame + 1; the blob idles afterwards.
inline Clip gen_gesture_clip(GestureKind kind, const SceneSpec& spec, int stroke_frames = 6) {
  spec.validate();
  if (stroke_frames < 1) throw std::invalid_argument("gesture clip: stroke_frames must be >= 1");
  double speed = std::hypot(spec.blob.vx, spec.blob.vy);
  if (speed == 0.0) speed = 2.0;
  const std::array<double, 2> step =
      kind == GestureKind::no ? std::array<double, 2>{-speed, 0} : std::array<double, 2>{0, -speed};

  std::vector<std::array<double, 2>> path;
  std::array<double, 2> pos{spec.blob.x, spec.blob.y};
  path.push_back(pos);
  const int moving = 4 * stroke_frames;
  for (int i = 0; i < moving && static_cast<int>(path.size()) < spec.n_frames - spec.blob.appear_frame; ++i) {
    const double sign = (i < stroke_frames || i >= 3 * stroke_frames) ? 1.0 : -1.0;
    pos[0] += sign * step[0];
    pos[1] += sign * step[1];
    path.push_back(pos);
  }
  while (static_cast<int>(path.size()) < spec.n_frames - spec.blob.appear_frame) path.push_back(pos);

  Clip clip = detail::render_clip(spec, path);
  const std::int64_t start = spec.blob.appear_frame + 1;
  const std::int64_t end =
      std::min<std::int64_t>(spec.blob.appear_frame + moving, spec.n_frames - 1);
  clip.truth.gestures.push_back({kind, start, end});
  return clip;
}

// ---------------------------------------------------------------------------
// Direction corpus

struct CorpusSpec {
  int width = 96;
  int height = 72;
  int clips_per_direction = 10;
  double noise_sigma = 2.0;
  int burn_in = 50;       // frames of empty scene (blob appears two frames earlier)
  int motion_frames = 20; // classified frames
  double speed = 1.0;
  std::uint64_t base_seed = 2024;
};

struct LabeledClip {
  std::string name;
  Direction expected = Direction::idle;
  SceneSpec spec;
};

// Ten (by default) clips per direction, ordered LEFT, RIGHT, UP, DOWN. Blob
// size, colours and start position are jittered per clip from its seed.
inline std::vector<LabeledClip> make_direction_corpus(const CorpusSpec& cs) {
  std::vector<LabeledClip> corpus;
  const std::array<Direction, 4> order{Direction::left, Direction::right, Direction::up,
                                       Direction::down};
  for (std::size_t di = 0; di < order.size(); ++di) {
    for (int n = 0; n < cs.clips_per_direction; ++n) {
      const std::uint64_t seed = cs.base_seed + 1000 * di + static_cast<std::uint64_t>(n);
      XorShift64Star jitter(seed ^ 0xA5A5A5A5A5A5A5A5ull);
      auto pick = [&](double lo, double hi) { return lo + (hi - lo) * jitter.uniform(); };

      SceneSpec s;
      s.width = cs.width;
      s.height = cs.height;
      s.seed = seed;
      s.noise_sigma = cs.noise_sigma;
      s.n_frames = cs.burn_in + cs.motion_frames;
      s.background.gradient = true;
      s.background.top = {pick(170, 210), pick(150, 190), pick(120, 160)};
      s.background.bottom = {pick(140, 180), pick(130, 170), pick(100, 140)};
      s.blob.width = static_cast<int>(pick(16, 24));
      s.blob.height = static_cast<int>(pick(16, 24));
      s.blob.color = {pick(30, 70), pick(40, 80), pick(60, 100)};
      s.blob.appear_frame = cs.burn_in - 2;

      const double travel = cs.speed * (cs.motion_frames + 2);
      double vx = 0, vy = 0;
      switch (order[di]) {
        case Direction::left: vx = -cs.speed; break;
        case Direction::right: vx = cs.speed; break;
        case Direction::up: vy = -cs.speed; break;
        default: vy = cs.speed; break;
      }
      s.blob.vx = vx;
      s.blob.vy = vy;
      // Start so that the whole path stays at least 2 px inside the frame.
      const double x_lo = 2 + (vx < 0 ? travel : 0);
      const double x_hi = cs.width - s.blob.width - 2 - (vx > 0 ? travel : 0);
      const double y_lo = 2 + (vy < 0 ? travel : 0);
      const double y_hi = cs.height - s.blob.height - 2 - (vy > 0 ? travel : 0);
      if (x_hi < x_lo || y_hi < y_lo)
        throw std::invalid_argument("corpus: frame too small for the requested motion");
      s.blob.x = std::floor(pick(x_lo, x_hi));
      s.blob.y = std::floor(pick(y_lo, y_hi));

      char name[32];
      std::snprintf(name, sizeof name, "%s_%02d", std::string(to_string(order[di])).c_str(), n);
      corpus.push_back({name, order[di], s});
    }
  }
  return corpus;
}

// ---------------------------------------------------------------------------
// JSON (scene specs and ground-truth manifests)

inline nlohmann::json to_json(const SceneSpec& s) {
  nlohmann::json j;
  j["width"] = s.width;
  j["height"] = s.height;
  j["channels"] = s.channels;
  j["background"] = {{"gradient", s.background.gradient},
                     {"top", s.background.top},
                     {"bottom", s.background.bottom}};
  j["blob"] = {{"width", s.blob.width}, {"height", s.blob.height}, {"x", s.blob.x},
               {"y", s.blob.y},         {"vx", s.blob.vx},         {"vy", s.blob.vy},
               {"color", s.blob.color}, {"appear_frame", s.blob.appear_frame}};
  j["shadow_factor"] = s.shadow_factor ? nlohmann::json(*s.shadow_factor) : nlohmann::json();
  j["noise_sigma"] = s.noise_sigma;
  j["seed"] = s.seed;
  j["n_frames"] = s.n_frames;
  return j;
}

inline SceneSpec scene_from_json(const nlohmann::json& j) {
  SceneSpec s;
  s.width = j.value("width", s.width);
  s.height = j.value("height", s.height);
  s.channels = j.value("channels", s.channels);
  if (j.contains("background")) {
    const auto& b = j.at("background");
    if (b.is_number()) {
      const double v = b.get<double>();
      s.background.top = s.background.bottom = {v, v, v};
    } else {
      s.background.gradient = b.value("gradient", false);
      s.background.top = b.value("top", s.background.top);
      s.background.bottom = b.value("bottom", s.background.top);
    }
  }
  if (j.contains("blob")) {
    const auto& b = j.at("blob");
    s.blob.width = b.value("width", s.blob.width);
    s.blob.height = b.value("height", s.blob.height);
    s.blob.x = b.value("x", s.blob.x);
    s.blob.y = b.value("y", s.blob.y);
    s.blob.vx = b.value("vx", s.blob.vx);
    s.blob.vy = b.value("vy", s.blob.vy);
    s.blob.color = b.value("color", s.blob.color);
    s.blob.appear_frame = b.value("appear_frame", s.blob.appear_frame);
  }
  if (j.contains("shadow_factor") && !j.at("shadow_factor").is_null())
    s.shadow_factor = j.at("shadow_factor").get<double>();
  s.noise_sigma = j.value("noise_sigma", s.noise_sigma);
  s.seed = j.value("seed", s.seed);
  s.n_frames = j.value("n_frames", s.n_frames);
  s.validate();
  return s;
}

inline nlohmann::json to_json(const GroundTruth& truth) {
  nlohmann::json frames = nlohmann::json::array();
  for (std::size_t k = 0; k < truth.frames.size(); ++k) {
    const auto& f = truth.frames[k];
    nlohmann::json jf = {{"frame", k},
                         {"vx", f.vx},
                         {"vy", f.vy},
                         {"direction", std::string(to_string(f.direction))}};
    jf["mask"] = f.blob ? nlohmann::json{{"x", f.blob->x},
                                         {"y", f.blob->y},
                                         {"width", f.blob->width},
                                         {"height", f.blob->height}}
                        : nlohmann::json();
    frames.push_back(std::move(jf));
  }
  nlohmann::json gestures = nlohmann::json::array();
  for (const auto& g : truth.gestures)
    gestures.push_back({{"gesture", std::string(to_string(g.kind))},
                        {"start_frame", g.start_frame},
                        {"end_frame", g.end_frame}});
  return {{"frames", frames}, {"gestures", gestures}};
}

// Writes frames as <dir>/000000.ppm ... and <dir>/truth.json.
inline void write_clip(const std::filesystem::path& dir, const Clip& clip) {
  std::filesystem::create_directories(dir);
  for (std::size_t k = 0; k < clip.frames.size(); ++k) {
    char name[32];
    std::snprintf(name, sizeof name, "%06zu.%s", k,
                  clip.frames[k].channels() == 1 ? "pgm" : "ppm");
    write_pnm(dir / name, clip.frames[k]);
  }
  const std::string text = to_json(clip.truth).dump(2) + "\n";
  write_file_bytes(dir / "truth.json",
                   std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

}  // namespace hgr
