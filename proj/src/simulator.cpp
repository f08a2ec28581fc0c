#include "textcen/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "textcen/forces.hpp"
#include "textcen/warp.hpp"

namespace textcen {

void BlobObject::validate() const {
  std::ostringstream os;
  os << "object token " << token << ": ";
  auto fail = [&](const char* what) { throw Error(ErrorCode::InvariantError, os.str() + what); };
  if (token < 0) fail("token must be >= 0");
  if (!(center_x >= 0.0 && center_x <= 1.0 && center_y >= 0.0 && center_y <= 1.0)) fail("center must lie in [0,1]^2");
  if (!(sigma > 0.0 && sigma <= 0.5)) fail("sigma must lie in (0, 0.5]");
  if (!(amplitude > 0.0 && amplitude <= 1.0)) fail("amplitude must lie in (0, 1]");
}

void Scene::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::InvariantError, what); };
  if (objects.empty()) fail("scene needs at least one object");
  std::set<int> seen;
  for (const auto& o : objects) {
    o.validate();
    if (!seen.insert(o.token).second) fail("object tokens must be distinct");
  }
  if (background_token < 0) fail("background_token must be >= 0");
  if (seen.contains(background_token)) fail("background_token collides with an object token");
  if (layers.empty()) fail("scene needs at least one layer");
  for (const auto& l : layers) {
    if (l.height < 2 || l.width < 2) fail("layer resolutions must be at least 2x2");
  }
  if (steps < 1) fail("steps must be >= 1");
  if (!(sharpen >= 0.0) || !std::isfinite(sharpen)) fail("sharpen must be >= 0");
  if (!(noise_amp >= 0.0) || !std::isfinite(noise_amp)) fail("noise_amp must be >= 0");
  for (const auto& t : targets) {
    Region::make(t.region.x0, t.region.y0, t.region.x1, t.region.y1);
    if (!(t.omega >= 0.0) || !std::isfinite(t.omega)) fail("target omega must be finite and >= 0");
  }
}

int Scene::token_count() const {
  int k = background_token;
  for (const auto& o : objects) k = std::max(k, o.token);
  return k + 1;
}

std::set<int> Scene::object_tokens() const {
  std::set<int> out;
  for (const auto& o : objects) out.insert(o.token);
  return out;
}

std::vector<BlobObject> Scene::sorted_objects() const {
  auto out = objects;
  std::sort(out.begin(), out.end(), [](const BlobObject& a, const BlobObject& b) { return a.token < b.token; });
  return out;
}

Scene standard_scene() {
  Scene s;
  s.objects = {
      {1, "sun", 0.78, 0.45, 0.09, 1.0},
      {2, "tree", 0.25, 0.60, 0.12, 1.0},
      {3, "bird", 0.50, 0.15, 0.06, 1.0},
  };
  s.background_token = 0;
  s.layers = {{64, 64}, {32, 32}, {16, 16}};
  s.steps = 50;
  s.sharpen = 1.0;
  s.noise_amp = 0.02;
  s.seed = 42;
  return s;
}

Region golden_region() { return Region::make(0.618, 0.30, 0.95, 0.70); }

double sigma_at(double sigma, double sharpen, int t, int steps) {
  return sigma * (1.0 + sharpen * static_cast<double>(t) / static_cast<double>(steps));
}

double noise_at(double noise_amp, int t, int steps) {
  return noise_amp * static_cast<double>(t) / static_cast<double>(steps);
}

AttentionMap render_blob(const BlobObject& obj, int height, int width, double noise_level, Rng& rng) {
  if (!(noise_level >= 0.0)) throw Error(ErrorCode::InvariantError, "noise level must be >= 0");
  const double cr = obj.center_y * height - 0.5;
  const double cc = obj.center_x * width - 0.5;
  const double s = obj.sigma * std::min(height, width);
  const double inv = 1.0 / (2.0 * s * s);
  std::vector<double> values(static_cast<std::size_t>(height) * static_cast<std::size_t>(width));
  std::size_t i = 0;
  for (int h = 0; h < height; ++h) {
    for (int w = 0; w < width; ++w, ++i) {
      const double dr = h - cr;
      const double dc = w - cc;
      const double v = obj.amplitude * std::exp(-(dr * dr + dc * dc) * inv) + noise_level * rng.uniform();
      values[i] = std::max(v, 0.0);
    }
  }
  return AttentionMap(height, width, std::move(values), obj.token, 0);
}

AttentionStack render_stack(const Scene& scene, const std::vector<BlobObject>& objects, int t, Rng& rng) {
  const int K = scene.token_count();
  const double noise = noise_at(scene.noise_amp, t, scene.steps);
  std::vector<LayerSpec> specs;
  std::vector<std::vector<AttentionMap>> maps;
  for (std::size_t i = 0; i < scene.layers.size(); ++i) {
    const auto [H, W] = scene.layers[i];
    const int id = static_cast<int>(i);
    specs.push_back({id, H, W});
    std::vector<AttentionMap> row;
    row.reserve(static_cast<std::size_t>(K));
    for (int k = 0; k < K; ++k) {
      auto it = std::find_if(objects.begin(), objects.end(), [k](const BlobObject& o) { return o.token == k; });
      if (it != objects.end()) {
        BlobObject dilated = *it;
        dilated.sigma = sigma_at(it->sigma, scene.sharpen, t, scene.steps);
        row.push_back(render_blob(dilated, H, W, noise, rng).relabeled(k, id));
      } else if (k == scene.background_token) {
        row.push_back(AttentionMap::filled(H, W, 1.0 / (static_cast<double>(H) * W), k, id));
      } else {
        row.push_back(AttentionMap::zeros(H, W, k, id));
      }
    }
    maps.push_back(std::move(row));
  }
  return AttentionStack(std::move(specs), std::move(maps));
}

AttentionStack step_unguided(const Scene& scene, int t, Rng& rng) {
  if (t < 0 || t >= scene.steps) throw Error(ErrorCode::InvariantError, "timestep outside [0, steps)");
  return render_stack(scene, scene.sorted_objects(), t, rng);
}

const BlobObject& GuidedState::object(int token) const {
  for (const auto& o : objects) {
    if (o.token == token) return o;
  }
  throw Error(ErrorCode::InvariantError, "unknown object token");
}

GuidanceSetup GuidanceSetup::build(const Scene& scene, const Region& region, const GuidanceParams& params) {
  const std::size_t n_targets = 1 + scene.targets.size();
  if (!params.omega.empty() && params.omega.size() != n_targets) {
    std::ostringstream os;
    os << "omega lists " << params.omega.size() << " weights for " << n_targets << " targets";
    throw Error(ErrorCode::InvariantError, os.str());
  }
  auto weight = [&](std::size_t j, double fallback) { return params.omega.empty() ? fallback : params.omega[j]; };

  GuidanceSetup setup;
  for (const auto& [H, W] : scene.layers) {
    Mask primary = rasterize_region(region, H, W);
    Mask exclusion = primary;
    std::vector<TargetSpec> targets{{mask_centroid(primary), weight(0, 1.0)}};
    for (std::size_t j = 0; j < scene.targets.size(); ++j) {
      const Mask m = rasterize_region(scene.targets[j].region, H, W);
      exclusion = mask_union(exclusion, m);
      targets.push_back({mask_centroid(m), weight(j + 1, scene.targets[j].omega)});
    }
    setup.primary.push_back(std::move(primary));
    setup.exclusion.push_back(std::move(exclusion));
    setup.targets.push_back(std::move(targets));
  }
  return setup;
}

namespace {

struct TokenUpdate {
  double shift_x = 0.0;  // pixel-count weighted, normalized units
  double shift_y = 0.0;
  double log_scale = 0.0;
  int scaled_layers = 0;
};

}  // namespace

StepOutcome step_guided(GuidedState& state, const Scene& scene, const GuidanceSetup& setup,
                        const GuidanceParams& params, int t, Rng& rng, const AttentionStack* reference) {
  AttentionStack rendered = render_stack(scene, state.objects, t, rng);
  const AttentionStack& source = reference ? *reference : rendered;
  if (reference && !reference->same_layout(rendered)) {
    throw Error(ErrorCode::LayoutMismatch, "reference stack layout differs from the guided stack");
  }

  StepOutcome out{rendered, rendered, {}, {}, {}};
  out.conflicts = detect_all(source, setup.exclusion, params.theta, scene.object_tokens());
  out.plan.lambda_sec = params.lambda_sec;
  for (std::size_t i = 0; i < rendered.layer_count(); ++i) {
    out.plan.masks.emplace(rendered.layers()[i].id, setup.exclusion[i]);
  }

  std::map<int, TokenUpdate> updates;
  for (const auto& entry : out.conflicts.entries) {
    const auto i = static_cast<std::size_t>(entry.where.layer);
    const int k = entry.where.token;
    const auto& spec = rendered.layers()[i];
    const AttentionMap& map = rendered.map(i, k);

    const Vec2 vertex = centroid(source.map(i, k));
    const Vec2 d = displacement(vertex, setup.targets[i], spec.height, spec.width, params);
    WarpOutcome warped = warp_step_detailed(map, d, params);

    const Vec2 shift = centroid(warped.map) - centroid(map);
    const double weight = static_cast<double>(spec.height) * spec.width;
    auto& u = updates[k];
    u.shift_x += weight * shift.col / spec.width;
    u.shift_y += weight * shift.row / spec.height;
    if (warped.scaled) {
      u.log_scale += 0.5 * std::log(warped.transform.scale.row * warped.transform.scale.col);
      ++u.scaled_layers;
    }

    out.displacements.push_back({entry.where, d, warped.scaled, warped.transform.scale});
    out.plan.edits.emplace(entry.where, warped.transform);
    out.plan.sec_applied.insert(entry.where);
    out.edited.replace(i, spatial_excluding_constraint(warped.map, setup.exclusion[i], params.lambda_sec));
  }

  double total_weight = 0.0;
  for (const auto& spec : rendered.layers()) total_weight += static_cast<double>(spec.height) * spec.width;
  for (auto& obj : state.objects) {
    auto it = updates.find(obj.token);
    if (it == updates.end()) continue;
    const auto& u = it->second;
    obj.center_x = std::clamp(obj.center_x + u.shift_x / total_weight, 0.0, 1.0);
    obj.center_y = std::clamp(obj.center_y + u.shift_y / total_weight, 0.0, 1.0);
    if (u.scaled_layers > 0) obj.sigma *= std::exp(u.log_scale / u.scaled_layers);
  }
  return out;
}

double StepRecord::max_displacement() const {
  double best = 0.0;
  for (const auto& d : displacements) best = std::max(best, d.delta.norm());
  return best;
}

GuidanceReport run(const Scene& scene, const Region& region, const GuidanceParams& params,
                   const RunOptions& options) {
  scene.validate();
  params.validate();
  const GuidanceSetup setup = GuidanceSetup::build(scene, region, params);
  const std::set<int> tokens = scene.object_tokens();
  const std::vector<int> token_list(tokens.begin(), tokens.end());

  Rng ori_rng(scene.seed, 0);
  Rng res_rng(scene.seed, 1);
  GuidedState state{scene.sorted_objects()};

  std::vector<StepRecord> records;
  std::map<int, std::vector<TrajectoryPoint>> trajectories;
  std::set<int> ever_flagged;
  std::optional<AttentionStack> last_ori, last_res, last_rendered;

  for (int step = 0; step < scene.steps; ++step) {
    const int t = scene.steps - 1 - step;
    AttentionStack ori = step_unguided(scene, t, ori_rng);
    StepOutcome outcome =
        step_guided(state, scene, setup, params, t, res_rng, options.use_original_centroids ? &ori : nullptr);

    StepRecord rec;
    rec.step = step;
    rec.t = t;
    rec.conflicts = outcome.conflicts.entries;
    rec.displacements = outcome.displacements;
    rec.loss = guidance_loss(ori, outcome.edited, outcome.plan, params.gamma);
    for (int k : token_list) {
      rec.mean_attn_in_R = std::max(rec.mean_attn_in_R, mean_in_region(outcome.rendered.map(0, k), setup.primary[0]));
    }
    for (const auto& e : outcome.conflicts.entries) ever_flagged.insert(e.where.token);
    for (const auto& o : state.objects) trajectories[o.token].push_back({o.center_x, o.center_y, o.sigma});

    if (options.on_step) options.on_step(step, t, ori, outcome);
    records.push_back(std::move(rec));
    last_ori = std::move(ori);
    last_rendered = std::move(outcome.rendered);
    last_res = std::move(outcome.edited);
  }

  const std::size_t finest = last_ori->finest_layer();
  const Mask& mask = setup.primary[finest];
  GuidanceReport report{std::move(records), *last_ori, *last_res, *last_rendered, std::move(trajectories),
                        state,              std::move(ever_flagged), {}, {}, {}};
  for (int k : token_list) report.final_mean_in_R[k] = mean_in_region(report.final_rendered.map(0, k), setup.primary[0]);
  report.metrics_ori = compute_metrics(composite_field(report.final_ori, token_list), mask, options.semantic_score,
                                       options.sal_threshold);
  report.metrics_res = compute_metrics(composite_field(report.final_res, token_list), mask, options.semantic_score,
                                       options.sal_threshold);
  return report;
}

}  // namespace textcen
