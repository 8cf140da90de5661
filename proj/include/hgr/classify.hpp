#pragma once

// Summed-flow direction classification, majority voting and YES / NO
// gesture detection.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "hgr/flow.hpp"
#include "hgr/gmm.hpp"

namespace hgr {

enum class Direction : std::uint8_t { left, right, up, down, idle };

inline constexpr std::array<Direction, 5> kAllDirections = {
    Direction::left, Direction::right, Direction::up, Direction::down, Direction::idle};

inline constexpr std::string_view to_string(Direction d) noexcept {
  switch (d) {
    case Direction::left: return "LEFT";
    case Direction::right: return "RIGHT";
    case Direction::up: return "UP";
    case Direction::down: return "DOWN";
    case Direction::idle: return "IDLE";
  }
  return "IDLE";
}

inline std::optional<Direction> direction_from_string(std::string_view s) noexcept {
  for (Direction d : kAllDirections)
    if (to_string(d) == s) return d;
  return std::nullopt;
}

struct FlowSummary {
  double s_x = 0.0;
  double s_y = 0.0;
  std::size_t n_pixels = 0;
  std::int64_t frame_index = 0;
};

// Maps image-space sums (sum of u, sum of v with v > 0 downward) into the
// classifier's (s_x, s_y) frame.
//
// The sign table puts RIGHT at (+,+), UP at (-,+), LEFT at (-,-) and DOWN at
// (+,-): its quadrants are centred on the diagonals. The screen-space motion
// (X, Y) = (sum_u, -sum_v), with +Y pointing up, is therefore rotated by +45
// degrees so each cardinal motion lands mid-quadrant. The rotation is
// orthonormal, so |(s_x, s_y)| = |(X, Y)|.
inline std::array<double, 2> table_axes_from_image(double sum_u, double sum_v) noexcept {
  const double screen_x = sum_u;
  const double screen_y = -sum_v;
  return {(screen_x - screen_y) * std::numbers::sqrt2 / 2.0,
          (screen_x + screen_y) * std::numbers::sqrt2 / 2.0};
}

enum class SumMode { masked, unmasked };

// Flow cell (x, y) sits at the centre of mask pixels (x..x+1, y..y+1); in
// masked mode it is summed when any of those four pixels is foreground.
inline FlowSummary sum_flow(const FlowField& flow, const SegmentationMask& mask,
                            SumMode mode = SumMode::masked) {
  if (mask.width() != flow.width + 1 || mask.height() != flow.height + 1)
    throw std::invalid_argument("sum_flow: mask must be one pixel larger than the flow grid");
  double su = 0.0, sv = 0.0;
  std::size_t n = 0;
  for (int y = 0; y < flow.height; ++y) {
    for (int x = 0; x < flow.width; ++x) {
      if (mode == SumMode::masked &&
          mask.at(x, y) != Label::foreground && mask.at(x + 1, y) != Label::foreground &&
          mask.at(x, y + 1) != Label::foreground && mask.at(x + 1, y + 1) != Label::foreground)
        continue;
      const std::size_t i = flow.index(x, y);
      su += flow.u[i];
      sv += flow.v[i];
      ++n;
    }
  }
  FlowSummary out;
  out.n_pixels = n;
  if (n > 0) {
    const auto axes = table_axes_from_image(su, sv);
    out.s_x = axes[0];
    out.s_y = axes[1];
  }
  return out;
}

struct ClassifierConfig {
  double idle_eps = 0.05;
  int vote_window = 5;

  void validate() const {
    if (!(idle_eps >= 0.0)) throw std::invalid_argument("classifier: idle_eps must be >= 0");
    if (vote_window < 1 || vote_window % 2 == 0)
      throw std::invalid_argument("classifier: vote_window must be odd and >= 1");
  }
};

// Sign table: (+,-) DOWN, (-,-) LEFT, (+,+) RIGHT, (-,+) UP; a zero component
// counts as positive.
inline Direction classify_direction(const FlowSummary& summary, const ClassifierConfig& cfg) {
  if (std::hypot(summary.s_x, summary.s_y) < cfg.idle_eps) return Direction::idle;
  const bool x_pos = summary.s_x >= 0.0;
  const bool y_pos = summary.s_y >= 0.0;
  if (x_pos) return y_pos ? Direction::right : Direction::down;
  return y_pos ? Direction::up : Direction::left;
}

// Most frequent non-IDLE direction; ties go to the direction seen most recently.
inline Direction vote(std::span<const Direction> window) {
  if (window.empty()) throw std::invalid_argument("vote: empty window");
  std::array<int, 5> count{};
  std::array<std::ptrdiff_t, 5> last{-1, -1, -1, -1, -1};
  for (std::size_t i = 0; i < window.size(); ++i) {
    const auto k = static_cast<std::size_t>(window[i]);
    ++count[k];
    last[k] = static_cast<std::ptrdiff_t>(i);
  }
  Direction best = Direction::idle;
  for (Direction d : {Direction::left, Direction::right, Direction::up, Direction::down}) {
    const auto k = static_cast<std::size_t>(d);
    if (count[k] == 0) continue;
    const auto b = static_cast<std::size_t>(best);
    if (best == Direction::idle || count[k] > count[b] ||
        (count[k] == count[b] && last[k] > last[b]))
      best = d;
  }
  return best;
}

// ---------------------------------------------------------------------------
// Gestures

enum class GestureKind : std::uint8_t { yes, no };

inline constexpr std::string_view to_string(GestureKind k) noexcept {
  return k == GestureKind::yes ? "YES" : "NO";
}

struct GestureEvent {
  GestureKind kind = GestureKind::no;
  std::int64_t start_frame = 0;
  std::int64_t end_frame = 0;

  friend bool operator==(const GestureEvent&, const GestureEvent&) = default;
};

struct GestureConfig {
  int min_alternations = 2;
  int max_gap = 3;

  void validate() const {
    if (min_alternations < 1) throw std::invalid_argument("gesture: min_alternations must be >= 1");
    if (max_gap < 1) throw std::invalid_argument("gesture: max_gap must be >= 1");
  }
};

// Streaming detector. LEFT/RIGHT reversals build a NO, UP/DOWN reversals a
// YES. Frames off the axis (IDLE or the other axis) count as gap frames; more
// than max_gap consecutive gap frames abandon the candidate. Events never
// overlap: completing one resets both axes.
class GestureDetector {
 public:
  explicit GestureDetector(GestureConfig cfg = {}) : cfg_(cfg) {
    cfg_.validate();
    horizontal_.kind = GestureKind::no;
    vertical_.kind = GestureKind::yes;
  }

  std::optional<GestureEvent> push(Direction d, std::int64_t frame) {
    for (Axis* axis : {&horizontal_, &vertical_}) {
      if (on_axis(*axis, d)) {
        if (axis->last && *axis->last != d) ++axis->alternations;
        if (!axis->last) axis->start = frame;
        axis->last = d;
        axis->gap = 0;
        if (axis->alternations >= cfg_.min_alternations) {
          GestureEvent ev{axis->kind, axis->start, frame};
          horizontal_.reset();
          vertical_.reset();
          return ev;
        }
      } else if (axis->last) {
        if (++axis->gap > cfg_.max_gap) axis->reset();
      }
    }
    return std::nullopt;
  }

 private:
  struct Axis {
    GestureKind kind = GestureKind::no;
    std::optional<Direction> last;
    std::int64_t start = 0;
    int alternations = 0;
    int gap = 0;
    void reset() {
      last.reset();
      alternations = 0;
      gap = 0;
    }
  };

  static bool on_axis(const Axis& axis, Direction d) noexcept {
    return axis.kind == GestureKind::no ? (d == Direction::left || d == Direction::right)
                                        : (d == Direction::up || d == Direction::down);
  }

  GestureConfig cfg_;
  Axis horizontal_;
  Axis vertical_;
};

// Batch form over a voted stream; frame indices are stream positions.
inline std::vector<GestureEvent> detect_gesture(std::span<const Direction> stream,
                                                const GestureConfig& cfg) {
  GestureDetector detector(cfg);
  std::vector<GestureEvent> events;
  for (std::size_t i = 0; i < stream.size(); ++i)
    if (auto ev = detector.push(stream[i], static_cast<std::int64_t>(i))) events.push_back(*ev);
  return events;
}

}  // namespace hgr
