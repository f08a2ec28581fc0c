#include <optional>

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "textcen/constraint.hpp"
#include "textcen/forces.hpp"
#include "textcen/io.hpp"
#include "textcen/metrics.hpp"
#include "textcen/simulator.hpp"
#include "textcen/warp.hpp"

namespace py = pybind11;
using namespace textcen;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;
using BoolArray = py::array_t<bool, py::array::c_style | py::array::forcecast>;

AttentionMap to_map(const Array& a) {
  if (a.ndim() != 2) throw py::value_error("expected a 2-D array");
  const auto H = static_cast<int>(a.shape(0)), W = static_cast<int>(a.shape(1));
  return AttentionMap(H, W, std::vector<double>(a.data(), a.data() + a.size()));
}

Array to_array(const AttentionMap& m) {
  Array out({m.height(), m.width()});
  std::copy(m.values().begin(), m.values().end(), out.mutable_data());
  return out;
}

Mask to_mask(const BoolArray& a) {
  if (a.ndim() != 2) throw py::value_error("expected a 2-D boolean array");
  const bool* p = a.data();
  return Mask(static_cast<int>(a.shape(0)), static_cast<int>(a.shape(1)), std::vector<std::uint8_t>(p, p + a.size()));
}

BoolArray mask_array(const Mask& m) {
  BoolArray out({m.height(), m.width()});
  std::copy(m.bits().begin(), m.bits().end(), out.mutable_data());
  return out;
}

py::tuple vec(Vec2 v) { return py::make_tuple(v.row, v.col); }
Vec2 vec(std::pair<double, double> p) { return {p.first, p.second}; }

Region region_of(const py::object& o) {
  if (py::isinstance<py::str>(o)) return parse_region(o.cast<std::string>());
  const auto t = o.cast<std::tuple<double, double, double, double>>();
  return Region::make(std::get<0>(t), std::get<1>(t), std::get<2>(t), std::get<3>(t));
}

GuidanceParams params_of(const py::kwargs& kw) {
  GuidanceParams p;
  for (const auto& [key, value] : kw) {
    const auto k = key.cast<std::string>();
    if (k == "theta") p.theta = value.cast<double>();
    else if (k == "xi") p.xi = value.cast<double>();
    else if (k == "alpha") p.alpha = value.cast<double>();
    else if (k == "margin_m") p.margin_m = value.cast<double>();
    else if (k == "lambda_sec") p.lambda_sec = value.cast<double>();
    else if (k == "gamma") p.gamma = value.cast<double>();
    else if (k == "max_step") p.max_step = value.cast<double>();
    else if (k == "bbox_mass") p.bbox_mass = value.cast<double>();
    else if (k == "eps_dist") p.eps_dist = value.cast<double>();
    else if (k == "omega") p.omega = value.cast<std::vector<double>>();
    else throw py::type_error("unknown guidance parameter '" + k + "'");
  }
  p.validate();
  return p;
}

std::vector<TargetSpec> targets_of(const std::vector<std::tuple<double, double, double>>& ts) {
  std::vector<TargetSpec> out;
  for (const auto& [r, c, w] : ts) out.push_back({{r, c}, w});
  return out;
}

}  // namespace

PYBIND11_MODULE(_textcen, m) {
  m.doc() = "Force-directed text-region guidance on attention maps";

  py::register_exception<Error>(m, "TextcenError", PyExc_ValueError);

  m.def("centroid", [](const Array& a) { return vec(centroid(to_map(a))); });
  m.def("rasterize_region", [](const py::object& region, int H, int W) {
    return mask_array(rasterize_region(region_of(region), H, W));
  }, py::arg("region"), py::arg("height"), py::arg("width"));
  m.def("mean_in_region", [](const Array& a, const BoolArray& mask) { return mean_in_region(to_map(a), to_mask(mask)); });
  m.def("detect", [](const Array& a, const BoolArray& mask, double theta) { return detect(to_map(a), to_mask(mask), theta); },
        py::arg("map"), py::arg("mask"), py::arg("theta"));
  m.def("bounding_box", [](const Array& a, double frac) {
    const BoundingBox b = bounding_box(to_map(a), frac);
    return py::make_tuple(b.top, b.left, b.bottom, b.right);
  }, py::arg("map"), py::arg("frac") = 0.3);

  m.def("repulsive_force", [](std::pair<double, double> v, std::pair<double, double> t, double xi, double eps) {
    return vec(repulsive_force(vec(v), vec(t), xi, eps).vector);
  }, py::arg("v"), py::arg("target"), py::arg("xi") = 1.0, py::arg("eps_dist") = 0.25);
  m.def("margin_force", [](std::pair<double, double> v, int H, int W, double mm, double eps) {
    return vec(margin_force(vec(v), H, W, mm, eps).vector);
  }, py::arg("v"), py::arg("height"), py::arg("width"), py::arg("m") = 0.5, py::arg("eps_dist") = 0.25);
  m.def("displacement", [](std::pair<double, double> v, const std::vector<std::tuple<double, double, double>>& targets,
                           int H, int W, const py::kwargs& kw) {
    const auto ts = targets_of(targets);
    return vec(displacement(vec(v), ts, H, W, params_of(kw)));
  }, py::arg("v"), py::arg("targets"), py::arg("height"), py::arg("width"),
     "targets are (row, col, weight) triples; keyword arguments override guidance defaults");

  m.def("translate_map", [](const Array& a, std::pair<double, double> d) { return to_array(translate_map(to_map(a), vec(d))); });
  m.def("warp_step", [](const Array& a, std::pair<double, double> d, const py::kwargs& kw) {
    const WarpOutcome w = warp_step_detailed(to_map(a), vec(d), params_of(kw));
    return py::make_tuple(to_array(w.map), w.scaled, py::make_tuple(w.transform.scale.row, w.transform.scale.col));
  }, py::arg("map"), py::arg("d"), "returns (map, scaled, (scale_row, scale_col))");
  m.def("exclude", [](const Array& a, const BoolArray& mask, double lambda) {
    return to_array(spatial_excluding_constraint(to_map(a), to_mask(mask), lambda));
  }, py::arg("map"), py::arg("mask"), py::arg("lambda_sec") = 1.0);

  m.def("tv_loss", [](const Array& a, const BoolArray& mask) { return tv_loss(to_map(a), to_mask(mask)); });
  m.def("saliency_iou", [](const Array& a, const BoolArray& mask, double s) {
    return saliency_iou(to_map(a), to_mask(mask), s);
  }, py::arg("field"), py::arg("mask"), py::arg("sal_threshold") = 0.5);
  m.def("vtcm", &vtcm, py::arg("semantic_score"), py::arg("saliency_iou"), py::arg("tv"));

  m.def("simulate", [](const std::string& scene_json, const py::object& region, const py::kwargs& kw) {
    const Scene scene = parse_scene(scene_json, "scene");
    const Region r = region_of(region);
    const GuidanceParams p = params_of(kw);
    std::optional<GuidanceReport> report;
    {
      py::gil_scoped_release release;
      report.emplace(run(scene, r, p));
    }
    return canonical_dump(report_to_json(*report, scene, r, p, {}));
  }, py::arg("scene_json"), py::arg("region") = "golden",
     "runs both trajectories and returns the canonical report JSON");
  m.def("standard_scene_json", [] { return canonical_dump(scene_to_json(standard_scene())); });
}
