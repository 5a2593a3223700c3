"""Shape tracking for cables, ropes and hoses from binary segmentation masks.

Each frame is processed independently: the mask is cleaned and thinned to
a skeleton, branch points are cut, branch-free segments are walked into
ordered pixel paths, greedily chained across gaps, and each chain is fitted
with a cubic B-spline (optionally lifted to 3D by a depth map).
"""

from .chainer import ChainerParams, EndpointDescriptor, SegmentChain, chain_greedy, filter_short
from .mask_io import (
    BinaryMask,
    CurveDocument,
    DepthMap,
    FrameMeta,
    load_depth,
    load_mask,
    read_curves,
    save_depth,
    save_mask,
    write_curves,
)
from .metrics import DiscretizedCurve, discretize_curve, l1_l2, l3, l3_aligned, mmd
from .skeleton import Skeleton, morphological_open, remove_branch_points, skeletonize
from .spline import (
    BSplineCurve,
    InsufficientDataError,
    NoDepthSupportError,
    ParameterizedChain,
    evaluate,
    fit,
    lift_to_3d,
    parameterize,
    place_knots,
)
from .synthgen import (
    GroundTruth,
    Occlusion,
    ScenarioSpec,
    builtin_scenarios,
    evolve,
    reference_curve,
    render_frame,
    render_scenario,
)
from .tracker import (
    FrameResult,
    TrackerConfig,
    match_instances,
    to_document,
    track_frame,
    track_frame_3d,
)
from .walker import PixelPath, walk_cycle, walk_segments

__version__ = "0.1.0"

__all__ = [
    "BSplineCurve",
    "BinaryMask",
    "ChainerParams",
    "CurveDocument",
    "DepthMap",
    "DiscretizedCurve",
    "EndpointDescriptor",
    "FrameMeta",
    "FrameResult",
    "GroundTruth",
    "InsufficientDataError",
    "NoDepthSupportError",
    "Occlusion",
    "ParameterizedChain",
    "PixelPath",
    "ScenarioSpec",
    "SegmentChain",
    "Skeleton",
    "TrackerConfig",
    "builtin_scenarios",
    "chain_greedy",
    "discretize_curve",
    "evaluate",
    "evolve",
    "filter_short",
    "fit",
    "l1_l2",
    "l3",
    "l3_aligned",
    "lift_to_3d",
    "load_depth",
    "load_mask",
    "match_instances",
    "mmd",
    "morphological_open",
    "parameterize",
    "place_knots",
    "read_curves",
    "reference_curve",
    "remove_branch_points",
    "render_frame",
    "render_scenario",
    "save_depth",
    "save_mask",
    "skeletonize",
    "to_document",
    "track_frame",
    "track_frame_3d",
    "walk_cycle",
    "walk_segments",
    "write_curves",
]
