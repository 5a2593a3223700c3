"""Per-frame pipeline: open, skeletonize, walk, chain, fit.

Stateless by design; every frame is processed from scratch, so frames can
run concurrently and tracking never drifts. Sub-stage failures (chains too
short to fit, chains without depth support) degrade per instance and are
noted in FrameResult.diagnostics instead of failing the frame.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from time import perf_counter

from .chainer import ChainerParams, SegmentChain, chain_greedy, filter_short, reverse_chain
from .mask_io import BinaryMask, CurveDocument, DepthMap, FrameMeta
from .metrics import discretize_curve, match_curves
from .skeleton import morphological_open, remove_branch_points, skeletonize
from .spline import (
    BSplineCurve,
    InsufficientDataError,
    NoDepthSupportError,
    fit,
    lift_to_3d,
    parameterize,
)
from .walker import walk_segments

STAGES = ("open", "skeletonize", "walk", "chain", "fit")


@dataclass
class TrackerConfig:
    m: float = 0.05
    p: int = 10
    k: int = 25
    j_th: float = 10.0
    w: int = 10
    open_kernel: int = 3

    def __post_init__(self):
        ChainerParams(m=self.m, p=self.p, j_th=self.j_th, w=self.w)
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        if self.open_kernel < 1 or self.open_kernel % 2 == 0:
            raise ValueError(f"open_kernel must be odd, got {self.open_kernel}")

    def chainer_params(self) -> ChainerParams:
        return ChainerParams(m=self.m, p=self.p, j_th=self.j_th, w=self.w)


@dataclass
class FrameResult:
    instances: list[BSplineCurve]
    chains: list[SegmentChain]
    elapsed_ms: float
    stage_timings: dict[str, float]
    diagnostics: list[str] = field(default_factory=list)


def track_frame(mask: BinaryMask, cfg: TrackerConfig | None = None) -> FrameResult:
    """Fit one cubic B-spline per detected cable in a binary mask."""
    return _track(mask, None, cfg or TrackerConfig())


def track_frame_3d(
    mask: BinaryMask, depth: DepthMap, cfg: TrackerConfig | None = None
) -> FrameResult:
    """As track_frame, with control points lifted to 3D from a depth map."""
    if depth.values.shape != mask.data.shape:
        raise ValueError(
            f"depth {depth.values.shape} does not match mask {mask.data.shape}"
        )
    return _track(mask, depth, cfg or TrackerConfig())


def _track(mask: BinaryMask, depth: DepthMap | None, cfg: TrackerConfig) -> FrameResult:
    timings = {}
    t_start = perf_counter()

    t0 = perf_counter()
    opened = morphological_open(mask, cfg.open_kernel)
    timings["open"] = (perf_counter() - t0) * 1000.0

    t0 = perf_counter()
    skel = remove_branch_points(skeletonize(opened))
    timings["skeletonize"] = (perf_counter() - t0) * 1000.0

    t0 = perf_counter()
    paths = walk_segments(skel)
    timings["walk"] = (perf_counter() - t0) * 1000.0

    t0 = perf_counter()
    kept = filter_short(paths, cfg.p)
    chains = chain_greedy(kept, cfg.chainer_params())
    timings["chain"] = (perf_counter() - t0) * 1000.0

    t0 = perf_counter()
    instances = []
    out_chains = []
    diagnostics = []
    for idx, chain in enumerate(chains):
        if tuple(chain.last_point()) < tuple(chain.first_point()):
            chain = reverse_chain(chain)
        try:
            pc = parameterize(chain)
            if depth is not None:
                try:
                    pc = lift_to_3d(pc, depth)
                except NoDepthSupportError:
                    diagnostics.append(f"instance {idx}: no valid depth, kept 2D")
            instances.append(fit(pc, cfg.k))
            out_chains.append(chain)
        except InsufficientDataError as exc:
            diagnostics.append(f"instance {idx}: dropped, {exc}")
    timings["fit"] = (perf_counter() - t0) * 1000.0

    elapsed = (perf_counter() - t_start) * 1000.0
    return FrameResult(
        instances=instances,
        chains=out_chains,
        elapsed_ms=elapsed,
        stage_timings=timings,
        diagnostics=diagnostics,
    )


def to_document(result: FrameResult, mask: BinaryMask, source: str = "") -> CurveDocument:
    meta = FrameMeta(
        width=mask.width, height=mask.height, source=source, elapsed_ms=result.elapsed_ms
    )
    return CurveDocument(frame=meta, instances=list(result.instances))


def match_instances(
    previous: list[BSplineCurve], current: list[BSplineCurve], samples: int = 128
) -> list[tuple[int, int, float]]:
    """Associate instances across frames by smallest orientation-free L3.

    Frame-to-frame identity is not part of the per-frame pipeline; this
    greedy pairing is a convenience for callers that need stable labels.
    """
    prev_d = [discretize_curve(c, samples) for c in previous]
    curr_d = [discretize_curve(c, samples) for c in current]
    return match_curves(prev_d, curr_d)
