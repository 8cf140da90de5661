#pragma once

// Test-only reference implementations, written directly from the update
// equations without sharing code paths with the library.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

namespace oracle {

struct Comp {
  double w, var;
  std::vector<double> mu;
};

inline double density(const std::vector<double>& z, const Comp& c) {
  double d2 = 0;
  for (std::size_t i = 0; i < z.size(); ++i) d2 += (z[i] - c.mu[i]) * (z[i] - c.mu[i]);
  double norm = 1.0;
  for (std::size_t i = 0; i < z.size(); ++i) norm /= std::sqrt(2 * std::numbers::pi * c.var);
  return norm * std::exp(-d2 / (2 * c.var));
}

// Returns true for background.
inline bool gmm_step(std::vector<Comp>& m, const std::vector<double>& z, double alpha, double T,
                     double d, double var_init, double var_min, double w_init) {
  int hit = -1;
  for (std::size_t i = 0; i < m.size() && hit < 0; ++i) {
    double d2 = 0;
    for (std::size_t c = 0; c < z.size(); ++c) d2 += (z[c] - m[i].mu[c]) * (z[c] - m[i].mu[c]);
    if (std::sqrt(d2) < d * std::sqrt(m[i].var)) hit = static_cast<int>(i);
  }
  Comp* tracked = nullptr;
  if (hit >= 0) {
    Comp& c = m[hit];
    double rho = std::min(1.0, alpha * density(z, c));
    for (std::size_t i = 0; i < m.size(); ++i)
      m[i].w = (1 - alpha) * m[i].w + (static_cast<int>(i) == hit ? alpha : 0.0);
    for (std::size_t k = 0; k < z.size(); ++k) c.mu[k] = (1 - rho) * c.mu[k] + rho * z[k];
    double d2 = 0;
    for (std::size_t k = 0; k < z.size(); ++k) d2 += (z[k] - c.mu[k]) * (z[k] - c.mu[k]);
    c.var = (1 - rho) * c.var + rho * d2;
    tracked = &c;
  } else {
    std::size_t lo = 0;
    for (std::size_t i = 1; i < m.size(); ++i)
      if (m[i].w <= m[lo].w) lo = i;
    m[lo] = Comp{w_init, var_init, z};
  }
  double sum = 0;
  for (auto& c : m) sum += c.w;
  for (auto& c : m) {
    c.w /= sum;
    c.var = std::max(c.var, var_min);
  }
  if (!tracked) {
    std::stable_sort(m.begin(), m.end(),
                     [](const Comp& a, const Comp& b) { return a.w / std::sqrt(a.var) > b.w / std::sqrt(b.var); });
    return false;
  }
  const Comp matched = *tracked;
  std::stable_sort(m.begin(), m.end(),
                   [](const Comp& a, const Comp& b) { return a.w / std::sqrt(a.var) > b.w / std::sqrt(b.var); });
  std::size_t pos = 0;
  for (std::size_t i = 0; i < m.size(); ++i)
    if (m[i].w == matched.w && m[i].var == matched.var && m[i].mu == matched.mu) { pos = i; break; }
  double cum = 0;
  std::size_t B = m.size();
  for (std::size_t b = 0; b < m.size(); ++b) {
    cum += m[b].w;
    if (cum > T) { B = b + 1; break; }
  }
  return pos < B;
}

// Clamped ("Neumann") sample of a row-major grid.
inline double at(const std::vector<double>& g, int w, int h, int x, int y) {
  x = std::clamp(x, 0, w - 1);
  y = std::clamp(y, 0, h - 1);
  return g[static_cast<std::size_t>(y) * w + x];
}

inline std::vector<double> laplacian_average(const std::vector<double>& g, int w, int h) {
  std::vector<double> out(g.size());
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      out[static_cast<std::size_t>(y) * w + x] =
          (at(g, w, h, x - 1, y) + at(g, w, h, x + 1, y) + at(g, w, h, x, y - 1) + at(g, w, h, x, y + 1)) / 6.0 +
          (at(g, w, h, x - 1, y - 1) + at(g, w, h, x + 1, y - 1) + at(g, w, h, x - 1, y + 1) +
           at(g, w, h, x + 1, y + 1)) / 12.0;
  return out;
}

}  // namespace oracle
