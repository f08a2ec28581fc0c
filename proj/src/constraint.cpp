#include "textcen/constraint.hpp"

namespace textcen {

AttentionMap spatial_excluding_constraint(const AttentionMap& map, const Mask& mask, double lambda_sec) {
  require_same_shape(map, mask);
  if (!(lambda_sec >= 0.0 && lambda_sec <= 1.0)) {
    throw Error(ErrorCode::InvariantError, "lambda_sec must lie in [0,1]");
  }
  std::vector<double> out(map.size());
  const auto bits = mask.bits();
  const auto in = map.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = bits[i] ? 0.0 : lambda_sec * in[i];
  return map.with_values(std::move(out));
}

AttentionMap edited_target(const AttentionMap& original, LayerToken where, const EditPlan& plan) {
  AttentionMap out = original;
  if (auto it = plan.edits.find(where); it != plan.edits.end()) out = apply_affine(out, it->second);
  if (plan.sec_applied.contains(where)) {
    auto m = plan.masks.find(where.layer);
    if (m == plan.masks.end()) throw Error(ErrorCode::LayoutMismatch, "edit plan lacks a mask for a constrained layer");
    out = spatial_excluding_constraint(out, m->second, plan.lambda_sec);
  }
  return out;
}

namespace {

std::size_t layer_index(const AttentionStack& stack, int layer_id) {
  const auto layers = stack.layers();
  for (std::size_t i = 0; i < layers.size(); ++i) {
    if (layers[i].id == layer_id) return i;
  }
  throw Error(ErrorCode::LayoutMismatch, "edit references an unknown layer");
}

void check_plan(const AttentionStack& stack, const EditPlan& plan) {
  auto check = [&](LayerToken w) {
    layer_index(stack, w.layer);
    if (w.token < 0 || w.token >= stack.token_count()) {
      throw Error(ErrorCode::LayoutMismatch, "edit references an unknown token");
    }
  };
  for (const auto& [w, t] : plan.edits) check(w);
  for (const auto& w : plan.sec_applied) check(w);
}

}  // namespace

AttentionStack apply_plan(const AttentionStack& original, const EditPlan& plan) {
  check_plan(original, plan);
  AttentionStack out = original;
  std::set<LayerToken> touched = plan.sec_applied;
  for (const auto& [w, t] : plan.edits) touched.insert(w);
  for (const auto& w : touched) {
    const std::size_t i = layer_index(original, w.layer);
    out.replace(i, edited_target(original.map(i, w.token), w, plan));
  }
  return out;
}

double squared_distance(const AttentionMap& a, const AttentionMap& b) {
  if (a.height() != b.height() || a.width() != b.width()) {
    throw Error(ErrorCode::ShapeMismatch, "distance between differently shaped maps");
  }
  double sum = 0.0;
  const auto x = a.values();
  const auto y = b.values();
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double diff = x[i] - y[i];
    sum += diff * diff;
  }
  return sum;
}

LossTerms guidance_loss(const AttentionStack& ori, const AttentionStack& res, const EditPlan& plan, double gamma) {
  if (!ori.same_layout(res)) throw Error(ErrorCode::LayoutMismatch, "original and result stacks differ in layout");
  if (!(gamma >= 0.0)) throw Error(ErrorCode::InvariantError, "gamma must be >= 0");
  check_plan(ori, plan);
  LossTerms loss;
  for (std::size_t i = 0; i < ori.layer_count(); ++i) {
    const int layer = ori.layers()[i].id;
    for (int k = 0; k < ori.token_count(); ++k) {
      const LayerToken w{layer, k};
      if (plan.touches(w)) {
        loss.main += squared_distance(edited_target(ori.map(i, k), w, plan), res.map(i, k));
      } else {
        loss.norm += squared_distance(ori.map(i, k), res.map(i, k));
      }
    }
  }
  loss.total = loss.main + gamma * loss.norm;
  return loss;
}

}  // namespace textcen
