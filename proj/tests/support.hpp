#pragma once

#include <random>
#include <vector>

#include "oracle.hpp"
#include "textcen/attention.hpp"

namespace test {

inline textcen::AttentionMap to_map(const oracle::Grid& g, int token = 0, int layer = 0) {
  std::vector<double> v;
  for (const auto& r : g) v.insert(v.end(), r.begin(), r.end());
  return textcen::AttentionMap(static_cast<int>(g.size()), static_cast<int>(g.front().size()), std::move(v), token,
                               layer);
}

inline oracle::Grid to_grid(const textcen::AttentionMap& m) {
  oracle::Grid g(m.height(), std::vector<double>(m.width()));
  for (int h = 0; h < m.height(); ++h)
    for (int w = 0; w < m.width(); ++w) g[h][w] = m(h, w);
  return g;
}

inline textcen::Mask to_mask(const oracle::Bits& b) {
  textcen::Mask m(static_cast<int>(b.size()), static_cast<int>(b.front().size()));
  for (std::size_t h = 0; h < b.size(); ++h)
    for (std::size_t w = 0; w < b[h].size(); ++w) m.set(static_cast<int>(h), static_cast<int>(w), b[h][w] != 0);
  return m;
}

inline oracle::Grid random_grid(std::mt19937_64& rng, int H, int W, double hi = 1.0) {
  std::uniform_real_distribution<double> u(0.0, hi);
  oracle::Grid g(H, std::vector<double>(W));
  for (auto& r : g)
    for (double& v : r) v = u(rng);
  return g;
}

}  // namespace test

#include "textcen/constraint.hpp"

namespace test {

inline textcen::Mask random_mask(std::mt19937_64& rng, int H, int W, double p = 0.4) {
  std::bernoulli_distribution b(p);
  textcen::Mask m(H, W);
  for (int h = 0; h < H; ++h)
    for (int w = 0; w < W; ++w) m.set(h, w, b(rng));
  return m;
}

/// Two-layer stack of random maps, `tokens` channels each.
inline textcen::AttentionStack random_stack(std::mt19937_64& rng, int tokens) {
  std::vector<textcen::LayerSpec> layers{{0, 12, 12}, {1, 6, 6}};
  std::vector<std::vector<textcen::AttentionMap>> maps(2);
  for (int k = 0; k < tokens; ++k) {
    maps[0].push_back(to_map(random_grid(rng, 12, 12)));
    maps[1].push_back(to_map(random_grid(rng, 6, 6)));
  }
  return textcen::AttentionStack(layers, maps);
}

/// Random plan over `stack`: some warps, some constraints, random lambda.
inline textcen::EditPlan random_plan(std::mt19937_64& rng, const textcen::AttentionStack& stack) {
  std::uniform_real_distribution<double> u(0.0, 1.0), shift(-2.0, 2.0), scale(0.5, 1.0);
  textcen::EditPlan plan;
  plan.lambda_sec = u(rng);
  for (const auto& spec : stack.layers()) {
    plan.masks.emplace(spec.id, random_mask(rng, spec.height, spec.width));
    for (int k = 1; k < stack.token_count(); ++k) {
      if (u(rng) < 0.5) {
        plan.edits[{spec.id, k}] = textcen::build_transform({shift(rng), shift(rng)}, {scale(rng), 1.0},
                                                            {0.0, 0.0});
      }
      if (u(rng) < 0.5) plan.sec_applied.insert({spec.id, k});
    }
  }
  return plan;
}

}  // namespace test
