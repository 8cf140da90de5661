#pragma once

// Dense Horn-Schunck optical flow.
//
// Coordinates: x grows rightward (columns), y grows downward (rows); u > 0 is
// rightward motion and v > 0 downward motion, in pixels per frame. Derivatives
// are estimated at the centre of each 2x2x2 sample cube, so a W x H frame pair
// yields a (W-1) x (H-1) derivative and flow grid.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "hgr/frame.hpp"

namespace hgr {

struct DerivativeField {
  int width = 0;
  int height = 0;
  std::vector<double> ex;
  std::vector<double> ey;
  std::vector<double> et;

  std::size_t size() const noexcept { return static_cast<std::size_t>(width) * height; }
};

struct FlowField {
  int width = 0;
  int height = 0;
  std::vector<double> u;
  std::vector<double> v;

  FlowField() = default;
  FlowField(int w, int h)
      : width(w), height(h),
        u(static_cast<std::size_t>(w) * h, 0.0),
        v(static_cast<std::size_t>(w) * h, 0.0) {}

  std::size_t size() const noexcept { return u.size(); }
  std::size_t index(int x, int y) const noexcept {
    return static_cast<std::size_t>(y) * width + x;
  }

  friend bool operator==(const FlowField&, const FlowField&) = default;
};

enum class FlowInput { binary_mask, grayscale };

struct FlowConfig {
  double alpha_sq = 100.0;
  int max_iters = 100;
  double eps = 1e-3;  // stop when mean |change| of (u, v) drops below this
  FlowInput input = FlowInput::binary_mask;

  void validate() const {
    if (!(alpha_sq > 0.0)) throw std::invalid_argument("flow: alpha_sq must be > 0");
    if (max_iters < 1) throw std::invalid_argument("flow: max_iters must be >= 1");
    if (!(eps >= 0.0)) throw std::invalid_argument("flow: eps must be >= 0");
  }
};

// Each derivative is the mean of the four first differences along its axis
// inside the cube (x..x+1, y..y+1, frame k..k+1).
inline DerivativeField estimate_derivatives(const GrayFrame& f0, const GrayFrame& f1) {
  if (f0.width() != f1.width() || f0.height() != f1.height())
    throw std::invalid_argument("estimate_derivatives: frame dimensions differ");
  if (f0.width() < 2 || f0.height() < 2)
    throw std::invalid_argument("estimate_derivatives: frames must be at least 2x2");

  DerivativeField d;
  d.width = f0.width() - 1;
  d.height = f0.height() - 1;
  d.ex.resize(d.size());
  d.ey.resize(d.size());
  d.et.resize(d.size());

  for (int y = 0; y < d.height; ++y) {
    for (int x = 0; x < d.width; ++x) {
      const double a00 = f0.at(x, y), a01 = f0.at(x + 1, y);
      const double a10 = f0.at(x, y + 1), a11 = f0.at(x + 1, y + 1);
      const double b00 = f1.at(x, y), b01 = f1.at(x + 1, y);
      const double b10 = f1.at(x, y + 1), b11 = f1.at(x + 1, y + 1);
      const std::size_t i = static_cast<std::size_t>(y) * d.width + x;
      d.ex[i] = ((a01 - a00) + (a11 - a10) + (b01 - b00) + (b11 - b10)) / 4.0;
      d.ey[i] = ((a10 - a00) + (a11 - a01) + (b10 - b00) + (b11 - b01)) / 4.0;
      d.et[i] = ((b00 - a00) + (b10 - a10) + (b01 - a01) + (b11 - a11)) / 4.0;
    }
  }
  return d;
}

namespace detail {

// 1/6 of the 4-neighbours plus 1/12 of the diagonals, edge-replicated.
inline void local_average_channel(std::span<const double> src, std::span<double> dst,
                                  int width, int height) {
  for (int y = 0; y < height; ++y) {
    const std::size_t rn = static_cast<std::size_t>(y > 0 ? y - 1 : 0) * width;
    const std::size_t rc = static_cast<std::size_t>(y) * width;
    const std::size_t rs = static_cast<std::size_t>(y + 1 < height ? y + 1 : y) * width;
    for (int x = 0; x < width; ++x) {
      const std::size_t cw = static_cast<std::size_t>(x > 0 ? x - 1 : 0);
      const std::size_t cc = static_cast<std::size_t>(x);
      const std::size_t ce = static_cast<std::size_t>(x + 1 < width ? x + 1 : x);
      const double edges = src[rn + cc] + src[rs + cc] + src[rc + cw] + src[rc + ce];
      const double corners = src[rn + cw] + src[rn + ce] + src[rs + cw] + src[rs + ce];
      dst[rc + cc] = edges / 6.0 + corners / 12.0;
    }
  }
}

}  // namespace detail

inline FlowField local_average(const FlowField& flow) {
  FlowField out(flow.width, flow.height);
  detail::local_average_channel(flow.u, out.u, flow.width, flow.height);
  detail::local_average_channel(flow.v, out.v, flow.width, flow.height);
  return out;
}

namespace detail {

// Jacobi step from precomputed local averages into `out`.
inline void hs_update(const FlowField& avg, const DerivativeField& d, double alpha_sq,
                      FlowField& out) {
  for (std::size_t i = 0; i < avg.size(); ++i) {
    const double ex = d.ex[i], ey = d.ey[i];
    const double s = (ex * avg.u[i] + ey * avg.v[i] + d.et[i]) / (alpha_sq + ex * ex + ey * ey);
    out.u[i] = avg.u[i] - ex * s;
    out.v[i] = avg.v[i] - ey * s;
  }
}

inline void check_same_grid(const FlowField& flow, const DerivativeField& d, const char* who) {
  if (flow.width != d.width || flow.height != d.height || flow.u.size() != d.size() ||
      flow.v.size() != d.size() || d.ex.size() != d.size() || d.ey.size() != d.size() ||
      d.et.size() != d.size())
    throw std::invalid_argument(std::string(who) + ": flow and derivative grids differ");
}

}  // namespace detail

// u' = u_avg - Ex * s,  v' = v_avg - Ey * s,
// s = (Ex u_avg + Ey v_avg + Et) / (alpha^2 + Ex^2 + Ey^2).
inline FlowField hs_iterate(const FlowField& flow, const DerivativeField& d, double alpha_sq) {
  detail::check_same_grid(flow, d, "hs_iterate");
  const FlowField avg = local_average(flow);
  FlowField out(flow.width, flow.height);
  detail::hs_update(avg, d, alpha_sq, out);
  return out;
}

struct FlowResiduals {
  double mean_abs_brightness = 0.0;  // mean |Ex u + Ey v + Et|
  double mean_sq_brightness = 0.0;   // mean (Ex u + Ey v + Et)^2
  double mean_smoothness = 0.0;      // mean of ux^2 + uy^2 + vx^2 + vy^2 (forward differences)

  double total_error(double alpha_sq) const noexcept {
    return alpha_sq * mean_smoothness + mean_sq_brightness;
  }
};

inline FlowResiduals flow_residuals(const FlowField& flow, const DerivativeField& d) {
  detail::check_same_grid(flow, d, "flow_residuals");
  FlowResiduals r;
  const std::size_t n = flow.size();
  if (n == 0) return r;
  for (int y = 0; y < flow.height; ++y) {
    for (int x = 0; x < flow.width; ++x) {
      const std::size_t i = flow.index(x, y);
      const double eb = d.ex[i] * flow.u[i] + d.ey[i] * flow.v[i] + d.et[i];
      r.mean_abs_brightness += std::abs(eb);
      r.mean_sq_brightness += eb * eb;
      const std::size_t right = x + 1 < flow.width ? i + 1 : i;
      const std::size_t down = y + 1 < flow.height ? i + flow.width : i;
      const double ux = flow.u[right] - flow.u[i], uy = flow.u[down] - flow.u[i];
      const double vx = flow.v[right] - flow.v[i], vy = flow.v[down] - flow.v[i];
      r.mean_smoothness += ux * ux + uy * uy + vx * vx + vy * vy;
    }
  }
  r.mean_abs_brightness /= static_cast<double>(n);
  r.mean_sq_brightness /= static_cast<double>(n);
  r.mean_smoothness /= static_cast<double>(n);
  return r;
}

inline GrayFrame binarize(const GrayFrame& frame) {
  GrayFrame out = frame;
  for (double& v : out.data()) v = v > 127.0 ? 255.0 : 0.0;
  return out;
}

// Called after every iteration with the 1-based iteration number and the iterate.
using FlowObserver = std::function<void(int, const FlowField&)>;

inline FlowField solve_flow(const GrayFrame& f0, const GrayFrame& f1, const FlowConfig& cfg,
                            const FlowObserver& observer = {}) {
  cfg.validate();
  const DerivativeField d = cfg.input == FlowInput::binary_mask
                                ? estimate_derivatives(binarize(f0), binarize(f1))
                                : estimate_derivatives(f0, f1);
  FlowField flow(d.width, d.height);
  FlowField avg(d.width, d.height);
  FlowField next(d.width, d.height);
  const double n = static_cast<double>(2 * flow.size());

  for (int iter = 1; iter <= cfg.max_iters; ++iter) {
    detail::local_average_channel(flow.u, avg.u, flow.width, flow.height);
    detail::local_average_channel(flow.v, avg.v, flow.width, flow.height);
    detail::hs_update(avg, d, cfg.alpha_sq, next);
    double change = 0.0;
    for (std::size_t i = 0; i < flow.size(); ++i)
      change += std::abs(next.u[i] - flow.u[i]) + std::abs(next.v[i] - flow.v[i]);
    std::swap(flow, next);
    if (observer) observer(iter, flow);
    if (change / n < cfg.eps) break;
  }
  return flow;
}

// ---------------------------------------------------------------------------
// Middlebury .flo: float tag 202021.25, int32 width, int32 height, then
// row-major float32 (u, v) pairs, all little-endian.

inline constexpr float kFloTag = 202021.25f;

namespace detail {

inline void put_le32(std::vector<std::uint8_t>& out, std::uint32_t bits) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
}

inline std::uint32_t get_le32(std::span<const std::uint8_t> in, std::size_t pos) {
  std::uint32_t bits = 0;
  for (int i = 0; i < 4; ++i) bits |= static_cast<std::uint32_t>(in[pos + i]) << (8 * i);
  return bits;
}

}  // namespace detail

inline std::vector<std::uint8_t> encode_flo(const FlowField& flow) {
  std::vector<std::uint8_t> out;
  out.reserve(12 + 8 * flow.size());
  detail::put_le32(out, std::bit_cast<std::uint32_t>(kFloTag));
  detail::put_le32(out, static_cast<std::uint32_t>(flow.width));
  detail::put_le32(out, static_cast<std::uint32_t>(flow.height));
  for (std::size_t i = 0; i < flow.size(); ++i) {
    detail::put_le32(out, std::bit_cast<std::uint32_t>(static_cast<float>(flow.u[i])));
    detail::put_le32(out, std::bit_cast<std::uint32_t>(static_cast<float>(flow.v[i])));
  }
  return out;
}

inline FlowField decode_flo(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 12) throw std::runtime_error("flo: truncated header");
  if (std::bit_cast<float>(detail::get_le32(bytes, 0)) != kFloTag)
    throw std::runtime_error("flo: bad tag");
  const auto w = static_cast<std::int32_t>(detail::get_le32(bytes, 4));
  const auto h = static_cast<std::int32_t>(detail::get_le32(bytes, 8));
  if (w <= 0 || h <= 0) throw std::runtime_error("flo: bad dimensions");
  FlowField flow(w, h);
  if (bytes.size() - 12 < 8 * flow.size()) throw std::runtime_error("flo: truncated data");
  for (std::size_t i = 0; i < flow.size(); ++i) {
    flow.u[i] = std::bit_cast<float>(detail::get_le32(bytes, 12 + 8 * i));
    flow.v[i] = std::bit_cast<float>(detail::get_le32(bytes, 16 + 8 * i));
  }
  return flow;
}

}  // namespace hgr
