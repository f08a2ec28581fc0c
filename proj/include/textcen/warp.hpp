#pragma once

#include <array>

#include "textcen/attention.hpp"

namespace textcen {

struct ScaleFactors {
  double row = 1.0;  // S_x, paired with the height
  double col = 1.0;  // S_y, paired with the width

  friend bool operator==(const ScaleFactors&, const ScaleFactors&) = default;
};

using Matrix3 = std::array<std::array<double, 3>, 3>;

/// Translate-then-scale about a pivot: p' = S (p + shift - origin) + origin.
struct AffineTransform {
  ScaleFactors scale;
  Vec2 shift;
  Vec2 origin;

  static AffineTransform identity() { return {}; }
  static AffineTransform translation(Vec2 d) { return {{}, d, {}}; }

  /// Raw homogeneous matrix (S_x, 0, dx - o_x; 0, S_y, dy - o_y; 0, 0, 1).
  Matrix3 matrix() const;
  /// Homogeneous matrix of the full action, including the return to the
  /// original origin.
  Matrix3 action_matrix() const;

  Vec2 apply(Vec2 p) const;
  /// Preimage of p. Axes with unit scale use p - shift exactly.
  Vec2 source_of(Vec2 p) const;

  bool is_translation() const { return scale.row == 1.0 && scale.col == 1.0; }

  friend bool operator==(const AffineTransform&, const AffineTransform&) = default;
};

/// Shifts a map by d with bilinear resampling; mass leaving the grid is lost
/// and uncovered cells are zero.
AttentionMap translate_map(const AttentionMap& map, Vec2 d);

/// Scale factors min(1, (H-1)/a'), min(1, (W-1)/b') where (a', b') is the
/// lower-right corner of `bbox_moved`.
ScaleFactors compute_scale(const BoundingBox& bbox_moved, int height, int width);

AffineTransform build_transform(Vec2 d, ScaleFactors scale, Vec2 o_new);

/// Inverse-mapped bilinear resampling of `map` under `t`, zero outside the
/// source grid.
AttentionMap apply_affine(const AttentionMap& map, const AffineTransform& t);

struct WarpOutcome {
  AttentionMap map;
  AffineTransform transform;
  bool scaled = false;
  BoundingBox box_before;  // bbox of the input at bbox_mass
  BoundingBox box_after;   // box_before carried through the transform
};

/// Moves a map by d. When the object's box would leave the canvas, the map is
/// also scaled about a canvas corner so the box lands exactly inside.
WarpOutcome warp_step_detailed(const AttentionMap& map, Vec2 d, const GuidanceParams& params);

AttentionMap warp_step(const AttentionMap& map, Vec2 d, const GuidanceParams& params);

}  // namespace textcen
