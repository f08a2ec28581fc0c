#pragma once

// Brute-force reference computations for the tests. These deliberately avoid
// the library's code paths: plain nested vectors, direct formulas.

#include <cmath>
#include <utility>
#include <vector>

namespace oracle {

using Grid = std::vector<std::vector<double>>;
using Bits = std::vector<std::vector<int>>;

inline Bits pixel_centre_mask(double x0, double y0, double x1, double y1, int H, int W) {
  Bits m(H, std::vector<int>(W, 0));
  for (int h = 0; h < H; ++h)
    for (int w = 0; w < W; ++w) {
      const double y = (h + 0.5) / H, x = (w + 0.5) / W;
      m[h][w] = (y0 <= y && y <= y1 && x0 <= x && x <= x1) ? 1 : 0;
    }
  return m;
}

inline int count(const Bits& m) {
  int n = 0;
  for (const auto& r : m)
    for (int b : r) n += b;
  return n;
}

inline double masked_mean(const Grid& g, const Bits& m) {
  double s = 0;
  int n = 0;
  for (std::size_t h = 0; h < g.size(); ++h)
    for (std::size_t w = 0; w < g[h].size(); ++w)
      if (m[h][w]) {
        s += g[h][w];
        ++n;
      }
  return s / n;
}

inline Grid gaussian(int H, int W, double cr, double cc, double sigma, double amp = 1.0) {
  Grid g(H, std::vector<double>(W));
  for (int h = 0; h < H; ++h)
    for (int w = 0; w < W; ++w) g[h][w] = amp * std::exp(-((h - cr) * (h - cr) + (w - cc) * (w - cc)) / (2 * sigma * sigma));
  return g;
}

// Tight box (top, left, bottom, right) of cells >= frac * max.
struct Box {
  int top, left, bottom, right;
};
inline Box threshold_box(const Grid& g, double frac) {
  double mx = 0;
  for (const auto& r : g)
    for (double v : r) mx = std::max(mx, v);
  Box b{1 << 30, 1 << 30, -1, -1};
  for (int h = 0; h < static_cast<int>(g.size()); ++h)
    for (int w = 0; w < static_cast<int>(g[h].size()); ++w)
      if (g[h][w] >= frac * mx) {
        b.top = std::min(b.top, h);
        b.left = std::min(b.left, w);
        b.bottom = std::max(b.bottom, h);
        b.right = std::max(b.right, w);
      }
  return b;
}

inline double sum(const Grid& g) {
  double s = 0;
  for (const auto& r : g)
    for (double v : r) s += v;
  return s;
}

}  // namespace oracle
