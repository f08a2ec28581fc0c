#include "textcen/attention.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

namespace textcen {

namespace {

void require_grid(int height, int width) {
  if (height < 2 || width < 2) {
    std::ostringstream os;
    os << "grid must be at least 2x2, got " << height << "x" << width;
    throw Error(ErrorCode::InvariantError, os.str());
  }
}

}  // namespace

// ---- Mask ------------------------------------------------------------------

Mask::Mask(int height, int width)
    : height_(height), width_(width),
      bits_(static_cast<std::size_t>(std::max(height, 0)) * static_cast<std::size_t>(std::max(width, 0)), 0) {}

Mask::Mask(int height, int width, std::vector<std::uint8_t> bits)
    : height_(height), width_(width), bits_(std::move(bits)) {
  if (bits_.size() != static_cast<std::size_t>(height) * static_cast<std::size_t>(width)) {
    throw Error(ErrorCode::ShapeMismatch, "mask bit count does not match its shape");
  }
  for (auto& b : bits_) b = b ? 1 : 0;
}

std::size_t Mask::count() const {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

Mask mask_union(const Mask& a, const Mask& b) {
  if (a.height() != b.height() || a.width() != b.width()) {
    throw Error(ErrorCode::ShapeMismatch, "mask union of different shapes");
  }
  std::vector<std::uint8_t> bits(a.bits().size());
  for (std::size_t i = 0; i < bits.size(); ++i) bits[i] = a.bits()[i] | b.bits()[i];
  return Mask(a.height(), a.width(), std::move(bits));
}

// ---- AttentionMap ------------------------------------------------------------

AttentionMap::AttentionMap(int height, int width, std::vector<double> values, int token, int layer)
    : height_(height), width_(width), token_(token), layer_(layer), values_(std::move(values)) {
  require_grid(height, width);
  if (values_.size() != static_cast<std::size_t>(height) * static_cast<std::size_t>(width)) {
    throw Error(ErrorCode::ShapeMismatch, "attention value count does not match its shape");
  }
  for (double v : values_) {
    if (!std::isfinite(v) || v < 0.0) {
      throw Error(ErrorCode::InvariantError, "attention values must be finite and non-negative");
    }
  }
}

AttentionMap AttentionMap::zeros(int height, int width, int token, int layer) {
  return filled(height, width, 0.0, token, layer);
}

AttentionMap AttentionMap::filled(int height, int width, double value, int token, int layer) {
  require_grid(height, width);
  return AttentionMap(height, width,
                      std::vector<double>(static_cast<std::size_t>(height) * static_cast<std::size_t>(width), value),
                      token, layer);
}

double AttentionMap::total_mass() const { return std::accumulate(values_.begin(), values_.end(), 0.0); }

double AttentionMap::max_value() const { return *std::max_element(values_.begin(), values_.end()); }

AttentionMap AttentionMap::with_values(std::vector<double> values) const {
  return AttentionMap(height_, width_, std::move(values), token_, layer_);
}

AttentionMap AttentionMap::relabeled(int token, int layer) const {
  AttentionMap out = *this;
  out.token_ = token;
  out.layer_ = layer;
  return out;
}

void require_same_shape(const AttentionMap& map, const Mask& mask) {
  if (map.height() != mask.height() || map.width() != mask.width()) {
    std::ostringstream os;
    os << "map is " << map.height() << "x" << map.width() << " but mask is " << mask.height() << "x"
       << mask.width();
    throw Error(ErrorCode::ShapeMismatch, os.str());
  }
}

// ---- AttentionStack ------------------------------------------------------------

AttentionStack::AttentionStack(std::vector<LayerSpec> layers, std::vector<std::vector<AttentionMap>> maps)
    : layers_(std::move(layers)), maps_(std::move(maps)) {
  if (layers_.empty()) throw Error(ErrorCode::InvariantError, "stack needs at least one layer");
  if (maps_.size() != layers_.size()) {
    throw Error(ErrorCode::LayoutMismatch, "one token list per layer is required");
  }
  token_count_ = static_cast<int>(maps_.front().size());
  if (token_count_ == 0) throw Error(ErrorCode::InvariantError, "stack needs at least one token");
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const auto& spec = layers_[i];
    require_grid(spec.height, spec.width);
    for (std::size_t j = 0; j < i; ++j) {
      if (layers_[j].id == spec.id) throw Error(ErrorCode::InvariantError, "layer ids must be unique");
    }
    if (static_cast<int>(maps_[i].size()) != token_count_) {
      throw Error(ErrorCode::LayoutMismatch, "every layer must hold the same token count");
    }
    for (int k = 0; k < token_count_; ++k) {
      auto& m = maps_[i][static_cast<std::size_t>(k)];
      if (m.height() != spec.height || m.width() != spec.width) {
        throw Error(ErrorCode::LayoutMismatch, "map resolution differs from its layer");
      }
      if (m.token() != k || m.layer() != spec.id) m = m.relabeled(k, spec.id);
    }
  }
}

const AttentionMap& AttentionStack::map(std::size_t layer_index, int token) const {
  if (layer_index >= layers_.size() || token < 0 || token >= token_count_) {
    throw Error(ErrorCode::LayoutMismatch, "(layer, token) outside the stack");
  }
  return maps_[layer_index][static_cast<std::size_t>(token)];
}

void AttentionStack::replace(std::size_t layer_index, const AttentionMap& map) {
  const auto& current = this->map(layer_index, map.token());
  if (current.height() != map.height() || current.width() != map.width()) {
    throw Error(ErrorCode::LayoutMismatch, "replacement map has a different resolution");
  }
  maps_[layer_index][static_cast<std::size_t>(map.token())] = map.relabeled(map.token(), layers_[layer_index].id);
}

std::size_t AttentionStack::finest_layer() const {
  std::size_t best = 0;
  for (std::size_t i = 1; i < layers_.size(); ++i) {
    if (layers_[i].height * layers_[i].width > layers_[best].height * layers_[best].width) best = i;
  }
  return best;
}

namespace {

double sample_clamped(const AttentionMap& map, double r, double c) {
  r = std::clamp(r, 0.0, static_cast<double>(map.height() - 1));
  c = std::clamp(c, 0.0, static_cast<double>(map.width() - 1));
  const int r0 = std::min(static_cast<int>(std::floor(r)), map.height() - 2);
  const int c0 = std::min(static_cast<int>(std::floor(c)), map.width() - 2);
  const double fr = r - r0;
  const double fc = c - c0;
  return (1 - fr) * ((1 - fc) * map(r0, c0) + fc * map(r0, c0 + 1)) +
         fr * ((1 - fc) * map(r0 + 1, c0) + fc * map(r0 + 1, c0 + 1));
}

}  // namespace

AttentionMap AttentionStack::averaged(int token, int height, int width) const {
  require_grid(height, width);
  std::vector<double> acc(static_cast<std::size_t>(height) * static_cast<std::size_t>(width), 0.0);
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const auto& m = map(i, token);
    const double sr = static_cast<double>(m.height()) / height;
    const double sc = static_cast<double>(m.width()) / width;
    for (int h = 0; h < height; ++h) {
      for (int w = 0; w < width; ++w) {
        acc[static_cast<std::size_t>(h * width + w)] += sample_clamped(m, (h + 0.5) * sr - 0.5, (w + 0.5) * sc - 0.5);
      }
    }
  }
  for (double& v : acc) v /= static_cast<double>(layers_.size());
  return AttentionMap(height, width, std::move(acc), token, -1);
}

bool AttentionStack::same_layout(const AttentionStack& other) const {
  return layers_ == other.layers_ && token_count_ == other.token_count_;
}

// ---- Region / params ---------------------------------------------------------

Region Region::make(double x0, double y0, double x1, double y1) {
  const bool finite = std::isfinite(x0) && std::isfinite(y0) && std::isfinite(x1) && std::isfinite(y1);
  if (!finite || x0 < 0.0 || y0 < 0.0 || x1 > 1.0 || y1 > 1.0) {
    throw Error(ErrorCode::InvariantError, "region coordinates must lie in [0,1]");
  }
  if (!(x0 < x1)) throw Error(ErrorCode::InvariantError, "region needs x0 < x1");
  if (!(y0 < y1)) throw Error(ErrorCode::InvariantError, "region needs y0 < y1");
  return Region{x0, y0, x1, y1};
}

void GuidanceParams::validate() const {
  auto fail = [](const char* what) { throw Error(ErrorCode::InvariantError, what); };
  if (!(theta > 0.0) || !std::isfinite(theta)) fail("theta must be > 0");
  if (!(xi > 0.0) || !std::isfinite(xi)) fail("xi must be > 0");
  if (!(alpha > 0.0) || !std::isfinite(alpha)) fail("alpha must be > 0");
  if (!(margin_m >= 0.0) || !std::isfinite(margin_m)) fail("margin_m must be >= 0");
  for (double w : omega) {
    if (!(w >= 0.0) || !std::isfinite(w)) fail("omega weights must be finite and >= 0");
  }
  if (!(lambda_sec >= 0.0 && lambda_sec <= 1.0)) fail("lambda_sec must lie in [0,1]");
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) fail("gamma must be >= 0");
  if (!(max_step > 0.0 && max_step <= 1.0)) fail("max_step must lie in (0,1]");
  if (!(bbox_mass > 0.0 && bbox_mass < 1.0)) fail("bbox_mass must lie in (0,1)");
  if (!(eps_dist > 0.0) || !std::isfinite(eps_dist)) fail("eps_dist must be > 0");
}

// ---- operations --------------------------------------------------------------

Vec2 centroid(const AttentionMap& map) {
  double mass = 0.0;
  double sum_row = 0.0;
  double sum_col = 0.0;
  for (int h = 0; h < map.height(); ++h) {
    for (int w = 0; w < map.width(); ++w) {
      const double a = map(h, w);
      mass += a;
      sum_row += h * a;
      sum_col += w * a;
    }
  }
  if (!(mass > 0.0)) throw Error(ErrorCode::ZeroMass, "centroid of an all-zero map");
  return {sum_row / mass, sum_col / mass};
}

Mask rasterize_region(const Region& region, int height, int width) {
  require_grid(height, width);
  Mask mask(height, width);
  for (int h = 0; h < height; ++h) {
    const double y = (h + 0.5) / height;
    if (y < region.y0 || y > region.y1) continue;
    for (int w = 0; w < width; ++w) {
      const double x = (w + 0.5) / width;
      if (x >= region.x0 && x <= region.x1) mask.set(h, w, true);
    }
  }
  if (mask.count() == 0) {
    std::ostringstream os;
    os << "region covers no pixel centre at " << height << "x" << width;
    throw Error(ErrorCode::EmptyMask, os.str());
  }
  return mask;
}

double mean_in_region(const AttentionMap& map, const Mask& mask) {
  require_same_shape(map, mask);
  double sum = 0.0;
  std::size_t n = 0;
  for (int h = 0; h < map.height(); ++h) {
    for (int w = 0; w < map.width(); ++w) {
      if (mask(h, w)) {
        sum += map(h, w);
        ++n;
      }
    }
  }
  if (n == 0) throw Error(ErrorCode::EmptyMask, "mean over an empty mask");
  return sum / static_cast<double>(n);
}

BoundingBox bounding_box(const AttentionMap& map, double bbox_mass) {
  if (!(bbox_mass > 0.0 && bbox_mass < 1.0)) {
    throw Error(ErrorCode::InvariantError, "bbox_mass must lie in (0,1)");
  }
  const double peak = map.max_value();
  if (!(peak > 0.0)) throw Error(ErrorCode::ZeroMass, "bounding box of an all-zero map");
  const double cut = bbox_mass * peak;
  int top = map.height(), left = map.width(), bottom = -1, right = -1;
  for (int h = 0; h < map.height(); ++h) {
    for (int w = 0; w < map.width(); ++w) {
      if (map(h, w) >= cut) {
        top = std::min(top, h);
        bottom = std::max(bottom, h);
        left = std::min(left, w);
        right = std::max(right, w);
      }
    }
  }
  return {static_cast<double>(top), static_cast<double>(left), static_cast<double>(bottom),
          static_cast<double>(right)};
}

Vec2 mask_centroid(const Mask& mask) {
  double n = 0.0, sr = 0.0, sc = 0.0;
  for (int h = 0; h < mask.height(); ++h) {
    for (int w = 0; w < mask.width(); ++w) {
      if (mask(h, w)) {
        n += 1.0;
        sr += h;
        sc += w;
      }
    }
  }
  if (n == 0.0) throw Error(ErrorCode::EmptyMask, "centroid of an empty mask");
  return {sr / n, sc / n};
}

}  // namespace textcen
