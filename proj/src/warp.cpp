#include "textcen/warp.hpp"

#include <algorithm>
#include <cmath>

namespace textcen {

Matrix3 AffineTransform::matrix() const {
  return {{{scale.row, 0.0, shift.row - origin.row},
           {0.0, scale.col, shift.col - origin.col},
           {0.0, 0.0, 1.0}}};
}

Matrix3 AffineTransform::action_matrix() const {
  return {{{scale.row, 0.0, scale.row * (shift.row - origin.row) + origin.row},
           {0.0, scale.col, scale.col * (shift.col - origin.col) + origin.col},
           {0.0, 0.0, 1.0}}};
}

Vec2 AffineTransform::apply(Vec2 p) const {
  auto axis = [](double x, double s, double d, double o) { return s == 1.0 ? x + d : s * (x + d - o) + o; };
  return {axis(p.row, scale.row, shift.row, origin.row), axis(p.col, scale.col, shift.col, origin.col)};
}

Vec2 AffineTransform::source_of(Vec2 p) const {
  auto axis = [](double x, double s, double d, double o) { return s == 1.0 ? x - d : (x - o) / s + o - d; };
  return {axis(p.row, scale.row, shift.row, origin.row), axis(p.col, scale.col, shift.col, origin.col)};
}

namespace {

// Bilinear sample with zero padding outside the grid.
double sample_zero(const AttentionMap& map, double r, double c) {
  const double fr0 = std::floor(r);
  const double fc0 = std::floor(c);
  if (fr0 < -1.0 || fc0 < -1.0 || fr0 > map.height() - 1 || fc0 > map.width() - 1) return 0.0;
  const int r0 = static_cast<int>(fr0);
  const int c0 = static_cast<int>(fc0);
  const double fr = r - fr0;
  const double fc = c - fc0;
  auto at = [&](int h, int w) {
    return (h < 0 || w < 0 || h >= map.height() || w >= map.width()) ? 0.0 : map(h, w);
  };
  double v = 0.0;
  if (fr < 1.0) {
    const double wr = 1.0 - fr;
    if (fc < 1.0) v += wr * (1.0 - fc) * at(r0, c0);
    if (fc > 0.0) v += wr * fc * at(r0, c0 + 1);
  }
  if (fr > 0.0) {
    if (fc < 1.0) v += fr * (1.0 - fc) * at(r0 + 1, c0);
    if (fc > 0.0) v += fr * fc * at(r0 + 1, c0 + 1);
  }
  return std::max(v, 0.0);
}

void require_scale(ScaleFactors s) {
  if (!(s.row > 0.0) || !(s.col > 0.0)) throw Error(ErrorCode::SingularTransform, "zero scale factor");
  if (s.row > 1.0 || s.col > 1.0) throw Error(ErrorCode::InvariantError, "scale factors must lie in (0,1]");
}

}  // namespace

AttentionMap apply_affine(const AttentionMap& map, const AffineTransform& t) {
  require_scale(t.scale);
  if (!std::isfinite(t.shift.row) || !std::isfinite(t.shift.col) || !std::isfinite(t.origin.row) ||
      !std::isfinite(t.origin.col)) {
    throw Error(ErrorCode::InvariantError, "transform entries must be finite");
  }
  std::vector<double> out(map.size());
  for (int h = 0; h < map.height(); ++h) {
    for (int w = 0; w < map.width(); ++w) {
      const Vec2 src = t.source_of({static_cast<double>(h), static_cast<double>(w)});
      out[static_cast<std::size_t>(h) * static_cast<std::size_t>(map.width()) + static_cast<std::size_t>(w)] =
          sample_zero(map, src.row, src.col);
    }
  }
  return map.with_values(std::move(out));
}

AttentionMap translate_map(const AttentionMap& map, Vec2 d) {
  return apply_affine(map, AffineTransform::translation(d));
}

ScaleFactors compute_scale(const BoundingBox& bbox_moved, int height, int width) {
  const double a = bbox_moved.bottom;
  const double b = bbox_moved.right;
  if (!(a > 0.0) || !(b > 0.0)) throw Error(ErrorCode::DegenerateBox, "lower-right corner must be positive");
  return {std::min(1.0, (height - 1) / a), std::min(1.0, (width - 1) / b)};
}

AffineTransform build_transform(Vec2 d, ScaleFactors scale, Vec2 o_new) {
  require_scale(scale);
  return {scale, d, o_new};
}

namespace {

// Pivot on one axis and the far-edge distance from it. A box leaving through
// the low side pivots on the high edge and vice versa.
struct AxisFrame {
  double pivot;
  double extent;
};

AxisFrame axis_frame(double lo, double hi, int size) {
  const double last = size - 1;
  if (lo < 0.0) return {last, last - lo};
  if (hi > last) return {0.0, hi};
  // Fits on this axis; prefer the low pivot unless it leaves no extent.
  return hi > 0.0 ? AxisFrame{0.0, hi} : AxisFrame{last, last - lo};
}

}  // namespace

WarpOutcome warp_step_detailed(const AttentionMap& map, Vec2 d, const GuidanceParams& params) {
  if (!std::isfinite(d.row) || !std::isfinite(d.col)) throw Error(ErrorCode::InvariantError, "non-finite displacement");
  const BoundingBox box = bounding_box(map, params.bbox_mass);
  const BoundingBox moved = box.shifted(d);
  const int H = map.height();
  const int W = map.width();

  if (moved.inside_canvas(H, W)) {
    const auto t = AffineTransform::translation(d);
    return {translate_map(map, d), t, false, box, moved};
  }

  const AxisFrame rows = axis_frame(moved.top, moved.bottom, H);
  const AxisFrame cols = axis_frame(moved.left, moved.right, W);
  const Vec2 o_new{rows.pivot, cols.pivot};
  // Box in the pivot frame, axes pointing back into the canvas.
  const BoundingBox framed{0.0, 0.0, rows.extent, cols.extent};
  const AffineTransform t = build_transform(d, compute_scale(framed, H, W), o_new);

  const Vec2 p0 = t.apply({box.top, box.left});
  const Vec2 p1 = t.apply({box.bottom, box.right});
  const BoundingBox after{std::min(p0.row, p1.row), std::min(p0.col, p1.col), std::max(p0.row, p1.row),
                          std::max(p0.col, p1.col)};
  constexpr double kTol = 1e-9;
  if (!after.inside_canvas(H, W, kTol)) {
    throw Error(ErrorCode::WarpFailure, "scaled box still leaves the canvas");
  }
  return {apply_affine(map, t), t, true, box, after};
}

AttentionMap warp_step(const AttentionMap& map, Vec2 d, const GuidanceParams& params) {
  return warp_step_detailed(map, d, params).map;
}

}  // namespace textcen
