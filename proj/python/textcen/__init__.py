"""Force-directed text-region guidance on synthetic attention maps."""

import json

from ._textcen import (
    TextcenError,
    bounding_box,
    centroid,
    detect,
    displacement,
    exclude,
    margin_force,
    mean_in_region,
    rasterize_region,
    repulsive_force,
    saliency_iou,
    simulate,
    standard_scene_json,
    translate_map,
    tv_loss,
    vtcm,
    warp_step,
)

__all__ = [
    "TextcenError",
    "bounding_box",
    "centroid",
    "detect",
    "displacement",
    "exclude",
    "margin_force",
    "mean_in_region",
    "rasterize_region",
    "repulsive_force",
    "run",
    "saliency_iou",
    "simulate",
    "standard_scene_json",
    "translate_map",
    "tv_loss",
    "vtcm",
    "warp_step",
]


def run(scene=None, region="golden", **params):
    """Run a scene (dict, JSON string, or None for the standard scene); returns the report as a dict."""
    if scene is None:
        text = standard_scene_json()
    elif isinstance(scene, str):
        text = scene
    else:
        text = json.dumps(scene)
    return json.loads(simulate(text, region, **params))
