#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "textcen/error.hpp"

namespace textcen {

/// Point or displacement on an attention grid, in (row, col) grid units with
/// the origin at the top-left cell.
struct Vec2 {
  double row = 0.0;
  double col = 0.0;

  friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.row + b.row, a.col + b.col}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.row - b.row, a.col - b.col}; }
  friend Vec2 operator*(double s, Vec2 v) { return {s * v.row, s * v.col}; }
  friend bool operator==(Vec2 a, Vec2 b) = default;

  double norm() const { return std::hypot(row, col); }
  double dot(Vec2 other) const { return row * other.row + col * other.col; }
};

/// Binary H x W mask, row-major.
class Mask {
 public:
  Mask(int height, int width);
  Mask(int height, int width, std::vector<std::uint8_t> bits);

  int height() const { return height_; }
  int width() const { return width_; }
  bool operator()(int row, int col) const { return bits_[index(row, col)] != 0; }
  void set(int row, int col, bool on) { bits_[index(row, col)] = on ? 1 : 0; }
  std::size_t count() const;
  std::span<const std::uint8_t> bits() const { return bits_; }

  friend bool operator==(const Mask&, const Mask&) = default;

 private:
  std::size_t index(int row, int col) const {
    return static_cast<std::size_t>(row) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(col);
  }

  int height_;
  int width_;
  std::vector<std::uint8_t> bits_;
};

/// One token's non-negative attention grid at one layer.
///
/// Values are validated on construction (finite, >= 0, H and W >= 2) and the
/// map is immutable afterwards; edits produce new maps.
class AttentionMap {
 public:
  AttentionMap(int height, int width, std::vector<double> values, int token = 0, int layer = 0);

  static AttentionMap zeros(int height, int width, int token = 0, int layer = 0);
  static AttentionMap filled(int height, int width, double value, int token = 0, int layer = 0);

  int height() const { return height_; }
  int width() const { return width_; }
  int token() const { return token_; }
  int layer() const { return layer_; }
  std::size_t size() const { return values_.size(); }

  double operator()(int row, int col) const {
    return values_[static_cast<std::size_t>(row) * static_cast<std::size_t>(width_) +
                   static_cast<std::size_t>(col)];
  }
  std::span<const double> values() const { return values_; }

  double total_mass() const;
  double max_value() const;

  /// Same grid with new values; token/layer labels carry over.
  AttentionMap with_values(std::vector<double> values) const;
  AttentionMap relabeled(int token, int layer) const;

  friend bool operator==(const AttentionMap&, const AttentionMap&) = default;

 private:
  int height_;
  int width_;
  int token_;
  int layer_;
  std::vector<double> values_;
};

void require_same_shape(const AttentionMap& map, const Mask& mask);

struct LayerSpec {
  int id = 0;
  int height = 0;
  int width = 0;

  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

/// K token maps for each of a set of layers.
class AttentionStack {
 public:
  /// `maps[i][k]` is token k at layer i. Shapes and labels are checked.
  AttentionStack(std::vector<LayerSpec> layers, std::vector<std::vector<AttentionMap>> maps);

  std::span<const LayerSpec> layers() const { return layers_; }
  std::size_t layer_count() const { return layers_.size(); }
  int token_count() const { return token_count_; }

  const AttentionMap& map(std::size_t layer_index, int token) const;
  void replace(std::size_t layer_index, const AttentionMap& map);

  /// Index of the layer with the most pixels (first on ties).
  std::size_t finest_layer() const;

  /// Token map averaged over all layers after bilinear resampling (pixel-centre
  /// aligned) onto a height x width grid.
  AttentionMap averaged(int token, int height, int width) const;

  bool same_layout(const AttentionStack& other) const;

  friend bool operator==(const AttentionStack&, const AttentionStack&) = default;

 private:
  std::vector<LayerSpec> layers_;
  std::vector<std::vector<AttentionMap>> maps_;
  int token_count_ = 0;
};

/// Axis-aligned rectangle in normalized coordinates. x spans columns, y spans
/// rows.
struct Region {
  double x0 = 0.0;
  double y0 = 0.0;
  double x1 = 1.0;
  double y1 = 1.0;

  /// Throws InvariantError unless 0 <= x0 < x1 <= 1 and 0 <= y0 < y1 <= 1.
  static Region make(double x0, double y0, double x1, double y1);

  friend bool operator==(const Region&, const Region&) = default;
};

/// Inclusive box in grid units: (top, left) upper-left, (bottom, right)
/// lower-right.
struct BoundingBox {
  double top = 0.0;
  double left = 0.0;
  double bottom = 0.0;
  double right = 0.0;

  BoundingBox shifted(Vec2 d) const { return {top + d.row, left + d.col, bottom + d.row, right + d.col}; }
  bool contains(Vec2 p) const { return p.row >= top && p.row <= bottom && p.col >= left && p.col <= right; }
  bool inside_canvas(int height, int width, double tol = 0.0) const {
    return top >= -tol && left >= -tol && bottom <= height - 1 + tol && right <= width - 1 + tol;
  }

  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

/// All guidance hyperparameters. Defaults are the engine defaults.
struct GuidanceParams {
  double theta = 0.2;       // detector threshold (mean attention)
  double xi = 1.0;          // repulsion strength
  double alpha = 0.1;       // force balance constant
  double margin_m = 0.5;    // margin force strength
  std::vector<double> omega;  // per-target weights; empty = scene/1.0
  double lambda_sec = 1.0;  // exclusion scale
  double gamma = 0.1;       // weight of the non-edited regularizer
  double max_step = 0.15;   // displacement cap, fraction of grid diagonal
  double bbox_mass = 0.3;   // relative-max threshold for bounding boxes
  double eps_dist = 0.25;   // distance floor for singular forces

  /// Throws InvariantError naming the first offending field.
  void validate() const;
};

Vec2 centroid(const AttentionMap& map);

Mask rasterize_region(const Region& region, int height, int width);

double mean_in_region(const AttentionMap& map, const Mask& mask);

BoundingBox bounding_box(const AttentionMap& map, double bbox_mass);

/// Centroid of the set pixels of a mask (uniform weights).
Vec2 mask_centroid(const Mask& mask);

Mask mask_union(const Mask& a, const Mask& b);

}  // namespace textcen
