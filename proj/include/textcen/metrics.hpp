#pragma once

#include <optional>
#include <span>

#include "textcen/attention.hpp"

namespace textcen {

struct MetricsReport {
  double tv_loss_in_R = 0.0;
  double saliency_iou = 0.0;  // percent
  double semantic_score = 1.0;
  std::optional<double> vtcm;  // absent when IOU or TV is zero

  friend bool operator==(const MetricsReport&, const MetricsReport&) = default;
};

/// Per-pixel max over the given object tokens at the finest layer, scaled to
/// peak 1.
AttentionMap composite_field(const AttentionStack& stack, std::span<const int> object_tokens);

/// Mean anisotropic total variation over neighbour pairs with both ends in the
/// mask, in percent. Zero when the mask has no interior pair.
double tv_loss(const AttentionMap& field, const Mask& mask);

/// 100 * |S n R| / |S u R| with S = {field >= sal_threshold}.
double saliency_iou(const AttentionMap& field, const Mask& mask, double sal_threshold);

/// semantic * (1/iou + 1/tv).
double vtcm(double semantic_score, double saliency_iou, double tv);

MetricsReport compute_metrics(const AttentionMap& field, const Mask& mask, double semantic_score = 1.0,
                              double sal_threshold = 0.5);

}  // namespace textcen
