#pragma once

#include <set>
#include <vector>

#include "textcen/attention.hpp"

namespace textcen {

/// (layer id, token) address of one map in a stack.
struct LayerToken {
  int layer = 0;
  int token = 0;

  friend auto operator<=>(const LayerToken&, const LayerToken&) = default;
};

struct ConflictEntry {
  LayerToken where;
  double mean = 0.0;  // measured mean attention inside the region

  friend bool operator==(const ConflictEntry&, const ConflictEntry&) = default;
};

/// Flagged (layer, token) pairs, ordered by ascending layer position in the
/// source stack and then token.
struct ConflictSet {
  std::vector<ConflictEntry> entries;

  bool empty() const { return entries.empty(); }
  std::size_t size() const { return entries.size(); }
  bool contains(LayerToken where) const;
  std::set<int> tokens() const;
};

/// True iff the mean attention of `map` inside `mask` strictly exceeds theta.
bool detect(const AttentionMap& map, const Mask& mask, double theta);

/// Runs `detect` for every editable token at every layer, rasterizing the
/// region at each layer's resolution.
ConflictSet detect_all(const AttentionStack& stack, const Region& region, const GuidanceParams& params,
                       const std::set<int>& editable_tokens);

/// Same as above with one precomputed mask per layer (e.g. a union of regions).
ConflictSet detect_all(const AttentionStack& stack, const std::vector<Mask>& layer_masks, double theta,
                       const std::set<int>& editable_tokens);

}  // namespace textcen
