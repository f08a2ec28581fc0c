#include "textcen/conflict.hpp"

#include <algorithm>

namespace textcen {

bool ConflictSet::contains(LayerToken where) const {
  return std::any_of(entries.begin(), entries.end(), [&](const ConflictEntry& e) { return e.where == where; });
}

std::set<int> ConflictSet::tokens() const {
  std::set<int> out;
  for (const auto& e : entries) out.insert(e.where.token);
  return out;
}

bool detect(const AttentionMap& map, const Mask& mask, double theta) {
  if (!(theta > 0.0)) throw Error(ErrorCode::InvariantError, "theta must be > 0");
  return mean_in_region(map, mask) > theta;
}

ConflictSet detect_all(const AttentionStack& stack, const std::vector<Mask>& layer_masks, double theta,
                       const std::set<int>& editable_tokens) {
  if (!(theta > 0.0)) throw Error(ErrorCode::InvariantError, "theta must be > 0");
  if (layer_masks.size() != stack.layer_count()) {
    throw Error(ErrorCode::LayoutMismatch, "one mask per layer is required");
  }
  for (int k : editable_tokens) {
    if (k < 0 || k >= stack.token_count()) throw Error(ErrorCode::InvariantError, "editable token outside 0..K");
  }
  ConflictSet out;
  for (std::size_t i = 0; i < stack.layer_count(); ++i) {
    for (int k : editable_tokens) {
      const double mean = mean_in_region(stack.map(i, k), layer_masks[i]);
      if (mean > theta) out.entries.push_back({{stack.layers()[i].id, k}, mean});
    }
  }
  return out;
}

ConflictSet detect_all(const AttentionStack& stack, const Region& region, const GuidanceParams& params,
                       const std::set<int>& editable_tokens) {
  std::vector<Mask> masks;
  masks.reserve(stack.layer_count());
  for (const auto& spec : stack.layers()) masks.push_back(rasterize_region(region, spec.height, spec.width));
  return detect_all(stack, masks, params.theta, editable_tokens);
}

}  // namespace textcen
