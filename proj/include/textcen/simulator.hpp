#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "textcen/attention.hpp"
#include "textcen/conflict.hpp"
#include "textcen/constraint.hpp"
#include "textcen/forces.hpp"
#include "textcen/metrics.hpp"
#include "textcen/rng.hpp"

namespace textcen {

/// Synthetic stand-in for a prompt object: an isotropic Gaussian blob in
/// normalized coordinates (x across columns, y down rows).
struct BlobObject {
  int token = 1;
  std::string label;
  double center_x = 0.5;
  double center_y = 0.5;
  double sigma = 0.1;  // fraction of min(H, W)
  double amplitude = 1.0;

  void validate() const;
  friend bool operator==(const BlobObject&, const BlobObject&) = default;
};

struct WeightedRegion {
  Region region;
  double omega = 1.0;

  friend bool operator==(const WeightedRegion&, const WeightedRegion&) = default;
};

struct Resolution {
  int height = 0;
  int width = 0;

  friend bool operator==(const Resolution&, const Resolution&) = default;
};

struct Scene {
  std::vector<BlobObject> objects;
  int background_token = 0;
  std::vector<Resolution> layers;
  int steps = 1;
  double sharpen = 0.0;
  double noise_amp = 0.0;
  std::uint64_t seed = 0;
  std::vector<WeightedRegion> targets;  // extra repulsion targets

  void validate() const;
  /// Number of token channels: one past the largest token used.
  int token_count() const;
  std::set<int> object_tokens() const;
  /// Objects sorted by token.
  std::vector<BlobObject> sorted_objects() const;
};

/// Three-object fixture used throughout the tests and the README.
Scene standard_scene();
/// Golden-ratio text region (0.618, 0.30, 0.95, 0.70).
Region golden_region();

/// sigma * (1 + sharpen * t / T).
double sigma_at(double sigma, double sharpen, int t, int steps);
/// noise_amp * t / T.
double noise_at(double noise_amp, int t, int steps);

/// Gaussian blob plus noise_level * U[0,1) per cell (row-major draws).
AttentionMap render_blob(const BlobObject& obj, int height, int width, double noise_level, Rng& rng);

/// Renders every object at every layer for timestep t. The background token
/// is uniform 1/(H W); unused tokens are zero.
AttentionStack render_stack(const Scene& scene, const std::vector<BlobObject>& objects, int t, Rng& rng);

AttentionStack step_unguided(const Scene& scene, int t, Rng& rng);

/// Guided-trajectory blob parameters, sorted by token.
struct GuidedState {
  std::vector<BlobObject> objects;

  const BlobObject& object(int token) const;
};

struct Displacement {
  LayerToken where;
  Vec2 delta;
  bool scaled = false;
  ScaleFactors scale;
};

/// Per-layer masks and force targets derived from the text region(s).
struct GuidanceSetup {
  std::vector<Mask> exclusion;             // union of all regions, per layer
  std::vector<Mask> primary;               // the text region alone, per layer
  std::vector<std::vector<TargetSpec>> targets;  // per layer, in declared order

  static GuidanceSetup build(const Scene& scene, const Region& region, const GuidanceParams& params);
};

struct StepOutcome {
  AttentionStack rendered;  // guided maps before editing
  AttentionStack edited;    // after warp and exclusion
  ConflictSet conflicts;
  EditPlan plan;
  std::vector<Displacement> displacements;
};

/// One guided timestep: detect, displace, warp, exclude, then fold the
/// per-layer centroid shifts back into the blob parameters. When `reference`
/// is given, detection and force vertices come from it instead of the guided
/// maps.
StepOutcome step_guided(GuidedState& state, const Scene& scene, const GuidanceSetup& setup,
                        const GuidanceParams& params, int t, Rng& rng, const AttentionStack* reference = nullptr);

struct StepRecord {
  int step = 0;
  int t = 0;
  std::vector<ConflictEntry> conflicts;
  std::vector<Displacement> displacements;
  LossTerms loss;
  double mean_attn_in_R = 0.0;  // max over objects, guided layer 0, before editing

  double max_displacement() const;
};

struct TrajectoryPoint {
  double center_x = 0.0;
  double center_y = 0.0;
  double sigma = 0.0;
};

struct GuidanceReport {
  std::vector<StepRecord> per_step;
  AttentionStack final_ori;
  AttentionStack final_res;       // edited guided stack at the last step
  AttentionStack final_rendered;  // guided stack at the last step before editing
  std::map<int, std::vector<TrajectoryPoint>> trajectories;  // guided, per step
  GuidedState final_state;
  std::set<int> ever_flagged;
  std::map<int, double> final_mean_in_R;  // per object token, guided layer 0 before editing
  MetricsReport metrics_ori;
  MetricsReport metrics_res;
};

struct RunOptions {
  bool use_original_centroids = false;
  double semantic_score = 1.0;
  double sal_threshold = 0.5;
  /// Called after each step with (step, t, unguided stack, outcome).
  std::function<void(int, int, const AttentionStack&, const StepOutcome&)> on_step;
};

GuidanceReport run(const Scene& scene, const Region& region, const GuidanceParams& params,
                   const RunOptions& options = {});

}  // namespace textcen
