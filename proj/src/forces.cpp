#include "textcen/forces.hpp"

#include <algorithm>
#include <cmath>

namespace textcen {

Force repulsive_force(Vec2 v, Vec2 target, double xi, double eps_dist) {
  if (!(xi > 0.0)) throw Error(ErrorCode::InvariantError, "xi must be > 0");
  const Vec2 away = v - target;
  const double dist = away.norm();
  const double magnitude = xi * xi / std::max(dist, eps_dist);
  const Vec2 dir = dist > 0.0 ? (1.0 / dist) * away : Vec2{-1.0, 0.0};
  return {magnitude * dir, magnitude};
}

Force multi_target_force(Vec2 v, std::span<const TargetSpec> targets, double xi, double eps_dist) {
  if (targets.empty()) throw Error(ErrorCode::InvariantError, "multi-target force needs at least one target");
  Vec2 sum;
  for (const auto& t : targets) {
    if (!(t.weight >= 0.0) || !std::isfinite(t.weight)) {
      throw Error(ErrorCode::InvariantError, "target weights must be finite and >= 0");
    }
    sum = sum + t.weight * repulsive_force(v, t.position, xi, eps_dist).vector;
  }
  return Force::from(sum);
}

Force balance(const Force& f, double alpha) {
  if (!(alpha > 0.0)) throw Error(ErrorCode::InvariantError, "alpha must be > 0");
  if (f.magnitude == 0.0) return Force::zero();
  const double scaled = f.magnitude / (alpha + f.magnitude);
  return {(scaled / f.magnitude) * f.vector, scaled};
}

Force margin_force(Vec2 v, int height, int width, double m, double eps_dist) {
  if (!(m >= 0.0)) throw Error(ErrorCode::InvariantError, "margin strength must be >= 0");
  auto push = [&](double d) {
    const double dd = std::max(d, eps_dist);
    return m / (dd * dd);
  };
  // Each border pushes along its inward normal.
  const double row = push(v.row) - push(static_cast<double>(height - 1) - v.row);
  const double col = push(v.col) - push(static_cast<double>(width - 1) - v.col);
  return Force::from({row, col});
}

double step_scale(int height, int width, double max_step) {
  return max_step * std::hypot(static_cast<double>(height), static_cast<double>(width));
}

Vec2 displacement(Vec2 v, std::span<const TargetSpec> targets, int height, int width,
                  const GuidanceParams& params) {
  const double scale = step_scale(height, width, params.max_step);
  const Force repel = balance(multi_target_force(v, targets, params.xi, params.eps_dist), params.alpha);
  const Force margin = margin_force(v, height, width, params.margin_m, params.eps_dist);
  Vec2 d = scale * repel.vector + margin.vector;
  const double n = d.norm();
  if (n > scale) d = (scale / n) * d;
  return d;
}

}  // namespace textcen
