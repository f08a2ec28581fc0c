#pragma once

#include <map>
#include <set>

#include "textcen/attention.hpp"
#include "textcen/conflict.hpp"
#include "textcen/warp.hpp"

namespace textcen {

/// Edits applied to a stack at one step: a transform per edited (layer, token)
/// and the subset that also received the exclusion constraint.
struct EditPlan {
  std::map<LayerToken, AffineTransform> edits;
  std::set<LayerToken> sec_applied;
  std::map<int, Mask> masks;  // exclusion mask per layer id
  double lambda_sec = 1.0;

  bool empty() const { return edits.empty() && sec_applied.empty(); }
  bool touches(LayerToken where) const { return edits.contains(where) || sec_applied.contains(where); }
};

/// lambda * map (.) (1 - mask).
AttentionMap spatial_excluding_constraint(const AttentionMap& map, const Mask& mask, double lambda_sec);

/// Edited target for one (layer, token): the plan's warp, then the
/// constraint if the plan applies it there.
AttentionMap edited_target(const AttentionMap& original, LayerToken where, const EditPlan& plan);

/// Applies a plan to every map it touches.
AttentionStack apply_plan(const AttentionStack& original, const EditPlan& plan);

struct LossTerms {
  double total = 0.0;
  double main = 0.0;  // edited maps vs. their edited targets
  double norm = 0.0;  // untouched maps vs. the original
};

/// Squared Frobenius distance between two equally shaped maps.
double squared_distance(const AttentionMap& a, const AttentionMap& b);

LossTerms guidance_loss(const AttentionStack& ori, const AttentionStack& res, const EditPlan& plan, double gamma);

}  // namespace textcen
