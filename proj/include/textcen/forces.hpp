#pragma once

#include <span>

#include "textcen/attention.hpp"

namespace textcen {

/// A force vector in grid units with its cached Euclidean magnitude.
struct Force {
  Vec2 vector;
  double magnitude = 0.0;

  static Force from(Vec2 v) { return {v, v.norm()}; }
  static Force zero() { return {}; }
};

struct TargetSpec {
  Vec2 position;
  double weight = 1.0;
};

/// Pushes `v` away from `target` with magnitude xi^2 / max(|v - target|, eps).
/// Coincident points are pushed towards row -1 (upwards).
Force repulsive_force(Vec2 v, Vec2 target, double xi, double eps_dist);

/// Weighted sum of repulsions over targets, in the given order.
Force multi_target_force(Vec2 v, std::span<const TargetSpec> targets, double xi, double eps_dist);

/// Saturates |f| to |f| / (alpha + |f|), keeping the direction.
Force balance(const Force& f, double alpha);

/// Inward push from all four borders of the [0,H-1] x [0,W-1] canvas, each
/// with magnitude m / max(d, eps)^2.
Force margin_force(Vec2 v, int height, int width, double m, double eps_dist);

/// Per-step displacement of a vertex: balanced multi-target repulsion scaled
/// to grid units plus the margin force, clamped to max_step * diagonal.
Vec2 displacement(Vec2 v, std::span<const TargetSpec> targets, int height, int width,
                  const GuidanceParams& params);

/// max_step * sqrt(H^2 + W^2).
double step_scale(int height, int width, double max_step);

}  // namespace textcen
