#include "textcen/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace textcen {

AttentionMap composite_field(const AttentionStack& stack, std::span<const int> object_tokens) {
  if (object_tokens.empty()) throw Error(ErrorCode::InvariantError, "composite needs at least one object token");
  const std::size_t layer = stack.finest_layer();
  const auto& first = stack.map(layer, object_tokens.front());
  std::vector<double> field(first.size(), 0.0);
  for (int k : object_tokens) {
    const auto values = stack.map(layer, k).values();
    for (std::size_t i = 0; i < field.size(); ++i) field[i] = std::max(field[i], values[i]);
  }
  const double peak = *std::max_element(field.begin(), field.end());
  if (!(peak > 0.0)) throw Error(ErrorCode::ZeroMass, "all object maps are zero");
  for (double& v : field) v /= peak;
  return AttentionMap(first.height(), first.width(), std::move(field), -1, first.layer());
}

double tv_loss(const AttentionMap& field, const Mask& mask) {
  require_same_shape(field, mask);
  if (mask.count() == 0) throw Error(ErrorCode::EmptyMask, "total variation over an empty mask");
  double sum = 0.0;
  std::size_t pairs = 0;
  for (int h = 0; h < field.height(); ++h) {
    for (int w = 0; w < field.width(); ++w) {
      if (!mask(h, w)) continue;
      if (h + 1 < field.height() && mask(h + 1, w)) {
        sum += std::abs(field(h + 1, w) - field(h, w));
        ++pairs;
      }
      if (w + 1 < field.width() && mask(h, w + 1)) {
        sum += std::abs(field(h, w + 1) - field(h, w));
        ++pairs;
      }
    }
  }
  return pairs == 0 ? 0.0 : 100.0 * sum / static_cast<double>(pairs);
}

double saliency_iou(const AttentionMap& field, const Mask& mask, double sal_threshold) {
  require_same_shape(field, mask);
  if (mask.count() == 0) throw Error(ErrorCode::EmptyMask, "saliency IOU against an empty mask");
  if (!(sal_threshold > 0.0 && sal_threshold < 1.0)) {
    throw Error(ErrorCode::InvariantError, "sal_threshold must lie in (0,1)");
  }
  std::size_t inter = 0, uni = 0, salient = 0;
  for (int h = 0; h < field.height(); ++h) {
    for (int w = 0; w < field.width(); ++w) {
      const bool s = field(h, w) >= sal_threshold;
      const bool r = mask(h, w);
      salient += s;
      inter += s && r;
      uni += s || r;
    }
  }
  if (salient == 0) return 0.0;
  return 100.0 * static_cast<double>(inter) / static_cast<double>(uni);
}

double vtcm(double semantic_score, double saliency_iou, double tv) {
  if (!(saliency_iou > 0.0) || !(tv > 0.0)) {
    throw Error(ErrorCode::DivisionDomain, "VTCM needs positive saliency IOU and TV loss");
  }
  return semantic_score * (1.0 / saliency_iou + 1.0 / tv);
}

MetricsReport compute_metrics(const AttentionMap& field, const Mask& mask, double semantic_score,
                              double sal_threshold) {
  MetricsReport r;
  r.tv_loss_in_R = tv_loss(field, mask);
  r.saliency_iou = saliency_iou(field, mask, sal_threshold);
  r.semantic_score = semantic_score;
  if (r.tv_loss_in_R > 0.0 && r.saliency_iou > 0.0) r.vtcm = vtcm(semantic_score, r.saliency_iou, r.tv_loss_in_R);
  return r;
}

}  // namespace textcen
