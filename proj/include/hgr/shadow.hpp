#pragma once

// Cast-shadow relabelling from brightness / chromaticity distortion against
// the background component means.

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>

#include "hgr/frame.hpp"
#include "hgr/gmm.hpp"

namespace hgr {

struct ShadowConfig {
  double min_brightness = 0.4;   // lower BD bound
  double max_brightness = 0.95;  // upper BD bound; < 1 keeps only darkening
  double max_chromaticity = 10.0;  // CD threshold, brightness units

  void validate() const {
    if (!(min_brightness > 0.0 && min_brightness < max_brightness && max_brightness <= 1.0))
      throw std::invalid_argument("shadow: require 0 < min_brightness < max_brightness <= 1");
    if (!(max_chromaticity > 0.0))
      throw std::invalid_argument("shadow: max_chromaticity must be > 0");
  }
};

class UndefinedDistortionError : public std::domain_error {
 public:
  UndefinedDistortionError()
      : std::domain_error("distortion undefined for a zero background vector") {}
};

struct Distortion {
  double brightness = 0.0;    // BD
  double chromaticity = 0.0;  // CD
};

// BD = (fg . bg) / (bg . bg); CD = || fg - BD * bg ||.
inline Distortion distortion(std::span<const double> fg, std::span<const double> bg) {
  if (fg.size() != bg.size()) throw std::invalid_argument("distortion: channel mismatch");
  double dot = 0.0;
  double bg2 = 0.0;
  for (std::size_t c = 0; c < bg.size(); ++c) {
    dot += fg[c] * bg[c];
    bg2 += bg[c] * bg[c];
  }
  if (bg2 == 0.0) throw UndefinedDistortionError();
  Distortion out;
  out.brightness = dot / bg2;
  double cd2 = 0.0;
  for (std::size_t c = 0; c < bg.size(); ++c) {
    const double perp = fg[c] - out.brightness * bg[c];
    cd2 += perp * perp;
  }
  out.chromaticity = std::sqrt(cd2);
  return out;
}

inline double brightness_distortion(std::span<const double> fg, std::span<const double> bg) {
  return distortion(fg, bg).brightness;
}

inline double chromaticity_distortion(std::span<const double> fg, std::span<const double> bg) {
  return distortion(fg, bg).chromaticity;
}

inline bool classify_shadow(double bd, double cd, const ShadowConfig& cfg) noexcept {
  return cfg.min_brightness <= bd && bd <= cfg.max_brightness && cd <= cfg.max_chromaticity;
}

// Relabels foreground pixels as shadow when the sample matches the shadow rule
// against any of the pixel's B background components. Single-channel frames
// reduce to the brightness-ratio test (CD = 0).
inline SegmentationMask apply_shadow_pass(const SegmentationMask& mask, const Frame& frame,
                                          const BackgroundModel& model,
                                          const ShadowConfig& cfg) {
  if (mask.width() != frame.width() || mask.height() != frame.height() ||
      model.width() != frame.width() || model.height() != frame.height() ||
      model.channels() != frame.channels())
    throw std::invalid_argument("apply_shadow_pass: dimension mismatch");

  SegmentationMask out = mask;
  const std::size_t ch = static_cast<std::size_t>(frame.channels());
  const double threshold = model.config().background_threshold;
  std::array<double, kMaxChannels> sample{};
  const std::span<const double> fg(sample.data(), ch);

  for (int y = 0; y < frame.height(); ++y) {
    for (int x = 0; x < frame.width(); ++x) {
      if (mask.at(x, y) != Label::foreground) continue;
      const auto px = frame.pixel(x, y);
      for (std::size_t c = 0; c < ch; ++c) sample[c] = px[c];
      const auto mix = model.mixture(x, y);
      const std::size_t b = select_background_count(mix, threshold);
      for (std::size_t i = 0; i < b; ++i) {
        const std::span<const double> bg(mix[i].mean.data(), ch);
        double bg2 = 0.0;
        for (double v : bg) bg2 += v * v;
        if (bg2 == 0.0) continue;
        const Distortion d = distortion(fg, bg);
        if (classify_shadow(d.brightness, d.chromaticity, cfg)) {
          out.at(x, y) = Label::shadow;
          break;
        }
      }
    }
  }
  return out;
}

}  // namespace hgr
