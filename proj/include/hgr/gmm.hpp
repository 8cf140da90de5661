#pragma once

// Online per-pixel Gaussian mixture background model (isotropic components).

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "hgr/frame.hpp"

namespace hgr {

inline constexpr std::size_t kMaxChannels = 3;

struct GaussianComponent {
  double weight = 0.0;
  std::array<double, kMaxChannels> mean{};
  double variance = 0.0;  // isotropic: covariance = variance * I

  double sigma() const noexcept { return std::sqrt(variance); }
  double rank() const noexcept { return weight / sigma(); }
};

// A pixel's K components, kept sorted by rank (w / sigma) descending.
using PixelMixture = std::vector<GaussianComponent>;

struct GmmConfig {
  int components = 3;             // K
  double learning_rate = 0.005;   // alpha
  double background_threshold = 0.7;  // T
  double match_sigmas = 2.5;      // d
  double initial_variance = 900.0;
  double min_variance = 4.0;
  double initial_weight = 0.05;

  void validate() const {
    if (components < 1) throw std::invalid_argument("gmm: components must be >= 1");
    if (!(learning_rate > 0.0 && learning_rate < 1.0))
      throw std::invalid_argument("gmm: learning_rate must be in (0,1)");
    if (!(background_threshold > 0.0 && background_threshold < 1.0))
      throw std::invalid_argument("gmm: background_threshold must be in (0,1)");
    if (!(match_sigmas > 0.0)) throw std::invalid_argument("gmm: match_sigmas must be > 0");
    if (!(min_variance > 0.0)) throw std::invalid_argument("gmm: min_variance must be > 0");
    if (!(initial_variance >= min_variance))
      throw std::invalid_argument("gmm: initial_variance must be >= min_variance");
    if (!(initial_weight > 0.0 && initial_weight <= 1.0))
      throw std::invalid_argument("gmm: initial_weight must be in (0,1]");
  }
};

enum class Label : std::uint8_t { background = 0, foreground = 1, shadow = 2 };

class SegmentationMask {
 public:
  SegmentationMask() = default;
  SegmentationMask(int width, int height, Label fill = Label::background)
      : width_(width), height_(height),
        labels_(static_cast<std::size_t>(width) * height, fill) {
    if (width <= 0 || height <= 0)
      throw std::invalid_argument("SegmentationMask: width and height must be positive");
  }

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t size() const noexcept { return labels_.size(); }

  Label at(int x, int y) const noexcept {
    return labels_[static_cast<std::size_t>(y) * width_ + x];
  }
  Label& at(int x, int y) noexcept { return labels_[static_cast<std::size_t>(y) * width_ + x]; }

  std::span<const Label> labels() const noexcept { return labels_; }
  std::span<Label> labels() noexcept { return labels_; }

  std::size_t count(Label l) const noexcept {
    return static_cast<std::size_t>(std::count(labels_.begin(), labels_.end(), l));
  }

  friend bool operator==(const SegmentationMask&, const SegmentationMask&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<Label> labels_;
};

// PGM dump values: background 0, shadow 128, foreground 255.
inline Frame mask_to_frame(const SegmentationMask& mask) {
  Frame out(mask.width(), mask.height(), 1);
  auto dst = out.data();
  auto src = mask.labels();
  for (std::size_t i = 0; i < src.size(); ++i) {
    switch (src[i]) {
      case Label::background: dst[i] = 0; break;
      case Label::shadow: dst[i] = 128; break;
      case Label::foreground: dst[i] = 255; break;
    }
  }
  return out;
}

inline SegmentationMask mask_from_frame(const Frame& frame) {
  if (frame.channels() != 1) throw std::invalid_argument("mask dump must be single channel");
  SegmentationMask mask(frame.width(), frame.height());
  auto src = frame.data();
  auto dst = mask.labels();
  for (std::size_t i = 0; i < src.size(); ++i) {
    switch (src[i]) {
      case 0: dst[i] = Label::background; break;
      case 128: dst[i] = Label::shadow; break;
      case 255: dst[i] = Label::foreground; break;
      default: throw std::invalid_argument("mask dump: unexpected value " + std::to_string(src[i]));
    }
  }
  return mask;
}

// ---------------------------------------------------------------------------
// Per-pixel operations

inline double squared_distance(std::span<const double> pixel,
                               const GaussianComponent& comp) noexcept {
  double sum = 0.0;
  for (std::size_t c = 0; c < pixel.size(); ++c) {
    const double diff = pixel[c] - comp.mean[c];
    sum += diff * diff;
  }
  return sum;
}

// ||pixel - mean|| < d * sigma
inline bool match_component(std::span<const double> pixel, const GaussianComponent& comp,
                            double d) noexcept {
  const double reach = d * comp.sigma();
  return squared_distance(pixel, comp) < reach * reach;
}

// Isotropic normal density in D = pixel.size() dimensions.
inline double component_density(std::span<const double> pixel,
                                 const GaussianComponent& comp) noexcept {
  const double dims = static_cast<double>(pixel.size());
  const double norm = std::pow(2.0 * std::numbers::pi * comp.variance, -0.5 * dims);
  return norm * std::exp(-0.5 * squared_distance(pixel, comp) / comp.variance);
}

// Smallest b with w_0 + ... + w_{b-1} > T; K when the cumulative sum never exceeds T.
inline std::size_t select_background_count(std::span<const GaussianComponent> mixture,
                                           double threshold) noexcept {
  double cumulative = 0.0;
  for (std::size_t b = 0; b < mixture.size(); ++b) {
    cumulative += mixture[b].weight;
    if (cumulative > threshold) return b + 1;
  }
  return mixture.size();
}

inline std::span<const double> background_estimate(std::span<const GaussianComponent> mixture,
                                                   std::size_t channels) {
  if (mixture.empty()) throw std::invalid_argument("background_estimate: empty mixture");
  return std::span<const double>(mixture.front().mean).first(channels);
}

enum class UpdatePath : std::uint8_t { matched, replaced };

struct UpdateResult {
  Label label = Label::foreground;
  UpdatePath path = UpdatePath::replaced;
  std::size_t component = 0;  // post-sort position of the matched/replaced component
};

inline PixelMixture seed_mixture(std::span<const double> pixel, const GmmConfig& cfg) {
  PixelMixture mixture(static_cast<std::size_t>(cfg.components));
  for (std::size_t i = 0; i < mixture.size(); ++i) {
    auto& comp = mixture[i];
    comp.weight = i == 0 ? 1.0 : 0.0;
    std::copy(pixel.begin(), pixel.end(), comp.mean.begin());
    comp.variance = cfg.initial_variance;
  }
  return mixture;
}

// One online update of a rank-sorted mixture with a new observation.
//
// The first component (in rank order) within d sigmas is updated with
// learning factor rho = alpha * N(pixel | mean, variance); every other weight
// decays by (1 - alpha). Without a match the lowest-weight component is
// replaced by (pixel, initial_variance, initial_weight). Weights are then
// renormalised, variances floored and the list re-sorted. A matched component
// is background iff its new position is inside the first B components.
inline UpdateResult update_pixel(std::span<GaussianComponent> mixture,
                                 std::span<const double> pixel, const GmmConfig& cfg) {
  const double alpha = cfg.learning_rate;
  std::size_t hit = mixture.size();
  for (std::size_t i = 0; i < mixture.size(); ++i) {
    if (match_component(pixel, mixture[i], cfg.match_sigmas)) {
      hit = i;
      break;
    }
  }

  UpdateResult result;
  if (hit < mixture.size()) {
    result.path = UpdatePath::matched;
    auto& comp = mixture[hit];
    const double rho = std::clamp(alpha * component_density(pixel, comp), 0.0, 1.0);
    for (std::size_t i = 0; i < mixture.size(); ++i)
      mixture[i].weight = (1.0 - alpha) * mixture[i].weight + (i == hit ? alpha : 0.0);
    double dist2 = 0.0;
    for (std::size_t c = 0; c < pixel.size(); ++c) {
      comp.mean[c] = (1.0 - rho) * comp.mean[c] + rho * pixel[c];
      const double diff = pixel[c] - comp.mean[c];
      dist2 += diff * diff;
    }
    comp.variance = (1.0 - rho) * comp.variance + rho * dist2;
  } else {
    result.path = UpdatePath::replaced;
    // Lowest weight; ties go to the lowest-ranked component.
    hit = 0;
    for (std::size_t i = 1; i < mixture.size(); ++i)
      if (mixture[i].weight <= mixture[hit].weight) hit = i;
    auto& comp = mixture[hit];
    comp.weight = cfg.initial_weight;
    comp.mean = {};
    std::copy(pixel.begin(), pixel.end(), comp.mean.begin());
    comp.variance = cfg.initial_variance;
  }

  double total = 0.0;
  for (const auto& comp : mixture) total += comp.weight;
  for (auto& comp : mixture) {
    comp.weight /= total;
    comp.variance = std::max(comp.variance, cfg.min_variance);
  }

  // Insertion sort by rank, tracking the updated component. K is tiny and
  // the list is almost always already sorted.
  std::size_t pos = hit;
  for (std::size_t i = 1; i < mixture.size(); ++i) {
    for (std::size_t j = i; j > 0 && mixture[j - 1].rank() < mixture[j].rank(); --j) {
      std::swap(mixture[j - 1], mixture[j]);
      if (pos == j) pos = j - 1;
      else if (pos == j - 1) pos = j;
    }
  }
  result.component = pos;

  if (result.path == UpdatePath::matched) {
    const std::size_t b = select_background_count(mixture, cfg.background_threshold);
    result.label = pos < b ? Label::background : Label::foreground;
  } else {
    result.label = Label::foreground;
  }
  return result;
}

// ---------------------------------------------------------------------------
// Whole-frame model

class BackgroundModel {
 public:
  BackgroundModel(int width, int height, int channels, GmmConfig config = {})
      : width_(width), height_(height), channels_(channels), config_(config) {
    if (width <= 0 || height <= 0)
      throw std::invalid_argument("BackgroundModel: width and height must be positive");
    if (channels != 1 && channels != 3)
      throw std::invalid_argument("BackgroundModel: channels must be 1 or 3");
    config_.validate();
    components_.resize(static_cast<std::size_t>(width) * height * config_.components);
  }

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  int channels() const noexcept { return channels_; }
  const GmmConfig& config() const noexcept { return config_; }
  std::uint64_t frames_seen() const noexcept { return frames_seen_; }

  std::span<const GaussianComponent> mixture(int x, int y) const noexcept {
    return std::span<const GaussianComponent>(components_)
        .subspan(slot(x, y), static_cast<std::size_t>(config_.components));
  }

  // Updates every pixel; the first frame seeds the model and is all background.
  SegmentationMask process_frame(const Frame& frame) {
    if (frame.width() != width_ || frame.height() != height_ ||
        frame.channels() != channels_)
      throw std::invalid_argument(
          "process_frame: frame " + std::to_string(frame.width()) + "x" +
          std::to_string(frame.height()) + "x" + std::to_string(frame.channels()) +
          " does not match model " + std::to_string(width_) + "x" + std::to_string(height_) +
          "x" + std::to_string(channels_));

    SegmentationMask mask(width_, height_);
    auto labels = mask.labels();
    const auto src = frame.data();
    const std::size_t k = static_cast<std::size_t>(config_.components);
    const std::size_t ch = static_cast<std::size_t>(channels_);
    std::array<double, kMaxChannels> sample{};
    const std::span<const double> pixel(sample.data(), ch);

    for (std::size_t p = 0; p < labels.size(); ++p) {
      for (std::size_t c = 0; c < ch; ++c) sample[c] = src[p * ch + c];
      std::span<GaussianComponent> mix(components_.data() + p * k, k);
      if (frames_seen_ == 0) {
        const auto seeded = seed_mixture(pixel, config_);
        std::copy(seeded.begin(), seeded.end(), mix.begin());
        labels[p] = Label::background;
      } else {
        labels[p] = update_pixel(mix, pixel, config_).label;
      }
    }
    ++frames_seen_;
    return mask;
  }

 private:
  std::size_t slot(int x, int y) const noexcept {
    return (static_cast<std::size_t>(y) * width_ + x) * static_cast<std::size_t>(config_.components);
  }

  int width_;
  int height_;
  int channels_;
  GmmConfig config_;
  std::vector<GaussianComponent> components_;
  std::uint64_t frames_seen_ = 0;
};

}  // namespace hgr
