#include "textcen/cli.hpp"

#include <algorithm>
#include <optional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "textcen/io.hpp"
#include "textcen/simulator.hpp"

namespace textcen {

namespace {

struct SimulateArgs {
  std::string scene;
  std::string region;
  std::optional<int> steps;
  std::optional<std::uint64_t> seed;
  std::optional<double> theta, xi, alpha, margin, lambda, gamma, max_step, bbox_mass, eps_dist;
  std::vector<double> omega;
  std::string out_dir = ".";
  double semantic_score = 1.0;
  double sal_threshold = 0.5;
  bool original_centroids = false;
  bool no_renders = false;
};

struct MetricsArgs {
  std::string field;
  std::string region;
  double semantic_score = 1.0;
  double sal_threshold = 0.5;
};

struct CompareArgs {
  std::string report_a;
  std::string report_b;
};

// Input problems map to exit 2, anything that fails while running to exit 4.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

template <typename F>
auto load_input(F&& f) {
  try {
    return f();
  } catch (const std::exception& e) {
    throw InputError(e.what());
  }
}

int simulate(const SimulateArgs& a, std::ostream& out) {
  Scene scene = load_input([&] { return load_scene(a.scene); });
  const Region region = load_input([&] { return parse_region(a.region); });
  if (a.steps) scene.steps = *a.steps;
  if (a.seed) scene.seed = *a.seed;

  GuidanceParams p;
  if (a.theta) p.theta = *a.theta;
  if (a.xi) p.xi = *a.xi;
  if (a.alpha) p.alpha = *a.alpha;
  if (a.margin) p.margin_m = *a.margin;
  if (a.lambda) p.lambda_sec = *a.lambda;
  if (a.gamma) p.gamma = *a.gamma;
  if (a.max_step) p.max_step = *a.max_step;
  if (a.bbox_mass) p.bbox_mass = *a.bbox_mass;
  if (a.eps_dist) p.eps_dist = *a.eps_dist;
  p.omega = a.omega;
  load_input([&] {
    scene.validate();
    p.validate();
    GuidanceSetup::build(scene, region, p);
    if (!(a.sal_threshold > 0.0 && a.sal_threshold < 1.0)) {
      throw Error(ErrorCode::InvariantError, "--sal-threshold must lie in (0,1)");
    }
    return 0;
  });

  const std::filesystem::path dir(a.out_dir);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create " + dir.string() + ": " + ec.message());

  std::vector<std::string> renders;
  RunOptions options;
  options.use_original_centroids = a.original_centroids;
  options.semantic_score = a.semantic_score;
  options.sal_threshold = a.sal_threshold;
  if (!a.no_renders) {
    const auto tokens = scene.object_tokens();
    options.on_step = [&, tokens](int, int t, const AttentionStack& ori, const StepOutcome& outcome) {
      const std::size_t layer = ori.finest_layer();
      for (int k : tokens) {
        for (const auto& [tag, stack] : {std::pair{"ori", &ori}, std::pair{"res", &outcome.edited}}) {
          const std::string name = "step_" + std::to_string(t) + "_" + tag + "_" + std::to_string(k) + ".pgm";
          write_render(stack->map(layer, k), dir / name);
          renders.push_back(name);
        }
      }
    };
  }

  const GuidanceReport report = run(scene, region, p, options);
  write_file_atomic(dir / "report.json", canonical_dump(report_to_json(report, scene, region, p, renders)));
  write_file_atomic(dir / "metrics.csv", metrics_csv(report));

  out << "steps: " << report.per_step.size() << "\n"
      << "flagged tokens:";
  for (int k : report.ever_flagged) out << " " << k;
  out << "\nguided   tv_loss_in_R=" << format_sig9(report.metrics_res.tv_loss_in_R)
      << " saliency_iou=" << format_sig9(report.metrics_res.saliency_iou) << "\n"
      << "unguided tv_loss_in_R=" << format_sig9(report.metrics_ori.tv_loss_in_R)
      << " saliency_iou=" << format_sig9(report.metrics_ori.saliency_iou) << "\n"
      << "wrote " << (dir / "report.json").string() << "\n";
  return kExitOk;
}

int metrics(const MetricsArgs& a, std::ostream& out) {
  const AttentionMap raw = load_input([&] { return read_pgm(a.field); });
  const Region region = load_input([&] { return parse_region(a.region); });
  const Mask mask = load_input([&] { return rasterize_region(region, raw.height(), raw.width()); });
  std::vector<double> values(raw.values().begin(), raw.values().end());
  const double peak = raw.max_value();
  if (peak > 0.0) {
    for (double& v : values) v /= peak;
  }
  const MetricsReport m = load_input(
      [&] { return compute_metrics(raw.with_values(std::move(values)), mask, a.semantic_score, a.sal_threshold); });
  out << canonical_dump(metrics_to_json(m));
  return kExitOk;
}

int compare(const CompareArgs& a, std::ostream& out) {
  const RunSummary ra = load_input([&] { return summary_from_report(parse_report(read_file(a.report_a))); });
  const RunSummary rb = load_input([&] { return summary_from_report(parse_report(read_file(a.report_b))); });
  auto row = [](double x, double y) {
    return Json{{"a", round_sig9(x)}, {"b", round_sig9(y)}, {"delta", round_sig9(x - y)}};
  };
  Json doc = {{"tv_loss_in_R", row(ra.guided.tv_loss_in_R, rb.guided.tv_loss_in_R)},
              {"saliency_iou", row(ra.guided.saliency_iou, rb.guided.saliency_iou)}};
  if (ra.guided.vtcm && rb.guided.vtcm) doc["vtcm"] = row(*ra.guided.vtcm, *rb.guided.vtcm);
  const bool dominates = ra.guided.tv_loss_in_R <= rb.guided.tv_loss_in_R &&
                         ra.guided.saliency_iou <= rb.guided.saliency_iou;
  doc["a_dominates"] = dominates;
  out << canonical_dump(doc);
  return dominates ? kExitOk : kExitNotDominant;
}

}  // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Force-directed text-region guidance on synthetic attention maps", "textcen"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* s = app.add_subcommand("simulate", "run guided and unguided trajectories on a scene");
  s->add_option("--scene", sim.scene, "scene JSON file")->required();
  s->add_option("--region", sim.region, "x0,y0,x1,y1 or golden|center")->required();
  s->add_option("--steps", sim.steps, "override scene steps");
  s->add_option("--seed", sim.seed, "override scene seed");
  s->add_option("--theta", sim.theta, "detector threshold");
  s->add_option("--xi", sim.xi, "repulsion strength");
  s->add_option("--alpha", sim.alpha, "force balance constant");
  s->add_option("--margin", sim.margin, "margin force strength");
  s->add_option("--lambda", sim.lambda, "exclusion scale in [0,1]");
  s->add_option("--gamma", sim.gamma, "weight of the untouched-token loss term");
  s->add_option("--max-step", sim.max_step, "displacement cap as a fraction of the grid diagonal");
  s->add_option("--bbox-mass", sim.bbox_mass, "relative threshold for bounding boxes");
  s->add_option("--eps-dist", sim.eps_dist, "distance floor for forces");
  s->add_option("--omega", sim.omega, "per-target weights (text region first)")->delimiter(',');
  s->add_option("--semantic-score", sim.semantic_score, "external semantic score used by VTCM");
  s->add_option("--sal-threshold", sim.sal_threshold, "saliency threshold in (0,1)");
  s->add_flag("--original-centroids", sim.original_centroids, "take force vertices from the unguided trajectory");
  s->add_flag("--no-renders", sim.no_renders, "skip per-step PGM output");
  s->add_option("--out", sim.out_dir, "output directory");

  MetricsArgs met;
  auto* m = app.add_subcommand("metrics", "score a rendered field against a text region");
  m->add_option("--field", met.field, "8-bit PGM")->required();
  m->add_option("--region", met.region, "x0,y0,x1,y1 or golden|center")->required();
  m->add_option("--semantic-score", met.semantic_score, "external semantic score");
  m->add_option("--sal-threshold", met.sal_threshold, "saliency threshold in (0,1)");

  CompareArgs cmp;
  auto* c = app.add_subcommand("compare", "compare the guided metrics of two reports");
  c->add_option("--report-a", cmp.report_a)->required();
  c->add_option("--report-b", cmp.report_b)->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  try {
    if (s->parsed()) return simulate(sim, out);
    if (m->parsed()) return metrics(met, out);
    return compare(cmp, out);
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

}  // namespace textcen
