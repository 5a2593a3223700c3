"""Command-line front end: track, eval, synth, bench.

Frame pairing between mask, depth, curve, and reference lists is
positional after lexicographic sorting of the given paths. All numeric
output uses the decimal point regardless of locale.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np
from PIL import Image

from .mask_io import (
    BinaryMask,
    load_depth,
    load_mask,
    read_curves,
    save_depth,
    save_mask,
    write_curves,
)
from .metrics import discretize_curve, l1_l2, match_curves
from .spline import evaluate
from .synthgen import (
    builtin_scenarios,
    evolve,
    load_scenario,
    reference_curve,
    render_frame,
    save_scenario,
    with_frames,
)
from .tracker import STAGES, FrameResult, TrackerConfig, to_document, track_frame, track_frame_3d

_PALETTE = [
    (235, 87, 87),
    (39, 174, 96),
    (45, 156, 219),
    (242, 201, 76),
    (155, 81, 224),
    (86, 204, 242),
]
_CONFIG_FIELDS = ("m", "p", "k", "j_th", "w", "open_kernel")


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--m", type=float, default=None, help="distance/orientation mix")
    parser.add_argument("--p", type=int, default=None, help="minimum segment pixels")
    parser.add_argument("--k", type=int, default=None, help="interior knot count")
    parser.add_argument("--j-th", type=float, default=None, dest="j_th",
                        help="connection cost threshold")
    parser.add_argument("--w", type=int, default=None, help="tangent window pixels")
    parser.add_argument("--open-kernel", type=int, default=None, dest="open_kernel",
                        help="morphological open kernel size")
    parser.add_argument("--config", type=Path, default=None,
                        help="JSON file with the same keys as the flags")


def _build_config(args: argparse.Namespace) -> TrackerConfig:
    values = {}
    if args.config is not None:
        with open(args.config, encoding="utf-8") as fh:
            loaded = json.load(fh)
        unknown = set(loaded) - set(_CONFIG_FIELDS)
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        values.update(loaded)
    for name in _CONFIG_FIELDS:
        value = getattr(args, name)
        if value is not None:
            values[name] = value
    return TrackerConfig(**values)


def _write_overlay(mask: BinaryMask, result: FrameResult, path: Path) -> None:
    h, w = mask.data.shape
    img = np.zeros((h, w, 3), dtype=np.uint8)
    img[mask.data] = 70
    for i, curve in enumerate(result.instances):
        color = _PALETTE[i % len(_PALETTE)]
        pts = evaluate(curve, np.linspace(*curve.t_range, 1024))[:, :2]
        xs = np.rint(pts[:, 0]).astype(int)
        ys = np.rint(pts[:, 1]).astype(int)
        for dy, dx in ((0, 0), (0, 1), (0, -1), (1, 0), (-1, 0)):
            qx, qy = xs + dx, ys + dy
            ok = (qx >= 0) & (qx < w) & (qy >= 0) & (qy < h)
            img[qy[ok], qx[ok]] = color
    Image.fromarray(img).save(path)


def cmd_track(args: argparse.Namespace) -> int:
    cfg = _build_config(args)
    masks = sorted(args.mask, key=str)
    depths = sorted(args.depth, key=str) if args.depth else []
    if depths and len(depths) != len(masks):
        print(
            f"error: {len(masks)} masks but {len(depths)} depth maps",
            file=sys.stderr,
        )
        return 2
    args.out.mkdir(parents=True, exist_ok=True)
    status = 0
    for i, mask_path in enumerate(masks):
        try:
            mask = load_mask(mask_path)
        except Exception as exc:
            print(f"error: {mask_path}: {exc}", file=sys.stderr)
            status = 1
            if args.keep_going:
                continue
            return status
        depth = None
        if depths:
            try:
                depth = load_depth(depths[i])
            except Exception as exc:
                print(f"error: {depths[i]}: {exc}", file=sys.stderr)
                status = 1
                if args.keep_going:
                    continue
                return status
        result = track_frame(mask, cfg) if depth is None else track_frame_3d(mask, depth, cfg)
        doc = to_document(result, mask, source=mask_path.name)
        write_curves(doc, args.out / (mask_path.stem + ".json"))
        if args.overlay:
            _write_overlay(mask, result, args.out / (mask_path.stem + "_overlay.png"))
        print(f"{mask_path}\t{result.elapsed_ms:.3f}")
    return status


def cmd_eval(args: argparse.Namespace) -> int:
    curves = sorted(args.curves, key=str)
    use_masks = bool(args.masks)
    use_refs = bool(args.ref)
    if use_masks == use_refs:
        print("error: need exactly one of --masks or --ref", file=sys.stderr)
        return 2
    targets = sorted(args.masks if use_masks else args.ref, key=str)
    if len(targets) != len(curves):
        print(
            f"error: {len(curves)} curve documents but {len(targets)} targets",
            file=sys.stderr,
        )
        return 2

    rows = []
    try:
        for curve_path, target_path in zip(curves, targets):
            doc = read_curves(curve_path)
            if use_masks:
                mask = load_mask(target_path)
                l1, l2 = l1_l2(mask, doc.instances, samples=args.samples)
                rows.append({"frame": curve_path.name, "l1": l1, "l2": l2})
            else:
                ref_doc = read_curves(target_path)
                refs = [discretize_curve(c, args.samples) for c in ref_doc.instances]
                cands = [discretize_curve(c, args.samples) for c in doc.instances]
                pairs = match_curves(refs, cands)
                score = float(np.mean([s for _, _, s in pairs])) if pairs else float("nan")
                rows.append(
                    {
                        "frame": curve_path.name,
                        "l3": score,
                        "missing": len(refs) - len(pairs),
                        "redundant": len(cands) - len(pairs),
                    }
                )
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    metrics = ("l1", "l2") if use_masks else ("l3",)
    aggregate = {}
    for name in metrics:
        vals = np.array([row[name] for row in rows], dtype=float)
        aggregate[f"{name}_mean"] = float(np.nanmean(vals))
        aggregate[f"{name}_std"] = float(np.nanstd(vals))
    if not use_masks:
        aggregate["missing"] = int(sum(row["missing"] for row in rows))
        aggregate["redundant"] = int(sum(row["redundant"] for row in rows))

    if args.as_json:
        json.dump({"frames": rows, "aggregate": aggregate}, sys.stdout, indent=1)
        print()
    else:
        header = "\t".join(["frame", *metrics] + ([] if use_masks else ["missing", "redundant"]))
        print(header)
        for row in rows:
            cells = [row["frame"]] + [f"{row[m]:.4f}" for m in metrics]
            if not use_masks:
                cells += [str(row["missing"]), str(row["redundant"])]
            print("\t".join(cells))
        summary = ", ".join(
            f"{name} = {aggregate[f'{name}_mean']:.4f} ± {aggregate[f'{name}_std']:.4f}"
            for name in metrics
        )
        print(f"aggregate over {len(rows)} frames (population std): {summary}")
        if not use_masks:
            print(f"missing: {aggregate['missing']}, redundant: {aggregate['redundant']}")
    return 0


def _resolve_scenario(args: argparse.Namespace) -> tuple:
    if (args.scenario is None) == (args.spec is None):
        raise ValueError("need exactly one of --scenario or --spec")
    if args.scenario is not None:
        spec, default_seed = builtin_scenarios()[args.scenario]
    else:
        spec, default_seed = load_scenario(args.spec), 0
    seed = default_seed if args.seed is None else args.seed
    if args.frames is not None:
        spec = with_frames(spec, args.frames)
    return spec, seed


def cmd_synth(args: argparse.Namespace) -> int:
    try:
        spec, seed = _resolve_scenario(args)
    except (ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    out = args.out
    (out / "gt").mkdir(parents=True, exist_ok=True)
    save_scenario(spec, out / "scenario.json")
    polys_per_frame = evolve(spec, seed)
    for f in range(spec.frames):
        mask, depth, _ = render_frame(spec, f, seed)
        save_mask(mask, out / f"mask_{f:04d}.png")
        if depth is not None:
            save_depth(depth, out / f"depth_{f:04d}.png")
        gt_doc = to_document(
            FrameResult(
                instances=[reference_curve(p) for p in polys_per_frame[f]],
                chains=[],
                elapsed_ms=0.0,
                stage_timings={},
            ),
            mask,
            source=f"reference_{f:04d}",
        )
        write_curves(gt_doc, out / "gt" / f"frame_{f:04d}.json")
    print(f"wrote {spec.frames} frames to {out}")
    return 0


def cmd_bench(args: argparse.Namespace) -> int:
    cfg = _build_config(args)
    if args.mask:
        inputs = [load_mask(p) for p in sorted(args.mask, key=str)]
    else:
        if args.scenario is None and args.spec is None:
            args.scenario = "hd"
        spec, seed = _resolve_scenario(args)
        inputs = [render_frame(spec, 0, seed)[0]]

    for i in range(args.warmup):
        track_frame(inputs[i % len(inputs)], cfg)

    totals = []
    stage_ms = {s: [] for s in STAGES}
    blobs = set()
    for r in range(args.reps):
        mask = inputs[r % len(inputs)]
        result = track_frame(mask, cfg)
        totals.append(result.elapsed_ms)
        for s in STAGES:
            stage_ms[s].append(result.stage_timings[s])
        if len(inputs) == 1:
            doc = to_document(result, mask)
            doc.frame.elapsed_ms = 0.0
            blobs.add(json.dumps(doc.to_json_obj(), sort_keys=True))
    deterministic = len(blobs) <= 1

    def stats(values):
        v = np.asarray(values)
        return {
            "min": float(v.min()),
            "median": float(np.median(v)),
            "p95": float(np.percentile(v, 95)),
        }

    report = {
        "reps": args.reps,
        "warmup": args.warmup,
        "stages": {s: stats(stage_ms[s]) for s in STAGES},
        "total": stats(totals),
        "deterministic": deterministic,
    }
    if args.as_json:
        json.dump(report, sys.stdout, indent=1)
        print()
    else:
        print("stage\tmin_ms\tmedian_ms\tp95_ms")
        for s in STAGES:
            st = report["stages"][s]
            print(f"{s}\t{st['min']:.3f}\t{st['median']:.3f}\t{st['p95']:.3f}")
        st = report["total"]
        print(f"total\t{st['min']:.3f}\t{st['median']:.3f}\t{st['p95']:.3f}")
        print(f"deterministic outputs across reps: {'yes' if deterministic else 'NO'}")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="dlotrack",
        description="Track deformable linear objects in binary masks as B-spline curves.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_track = sub.add_parser("track", help="fit curves to mask frames")
    p_track.add_argument("--mask", nargs="+", required=True, type=Path)
    p_track.add_argument("--depth", nargs="*", type=Path, default=[])
    p_track.add_argument("--out", required=True, type=Path)
    p_track.add_argument("--overlay", action="store_true")
    p_track.add_argument("--keep-going", action="store_true", dest="keep_going")
    _add_config_flags(p_track)
    p_track.set_defaults(func=cmd_track)

    p_eval = sub.add_parser("eval", help="score curve documents against truth")
    p_eval.add_argument("--curves", nargs="+", required=True, type=Path)
    p_eval.add_argument("--masks", nargs="*", type=Path, default=[])
    p_eval.add_argument("--ref", nargs="*", type=Path, default=[])
    p_eval.add_argument("--samples", type=int, default=512)
    p_eval.add_argument("--json", action="store_true", dest="as_json")
    p_eval.set_defaults(func=cmd_eval)

    scenario_names = sorted(builtin_scenarios())
    p_synth = sub.add_parser("synth", help="generate a synthetic scenario")
    p_synth.add_argument("--scenario", choices=scenario_names)
    p_synth.add_argument("--spec", type=Path)
    p_synth.add_argument("--out", required=True, type=Path)
    p_synth.add_argument("--seed", type=int, default=None)
    p_synth.add_argument("--frames", type=int, default=None)
    p_synth.set_defaults(func=cmd_synth)

    p_bench = sub.add_parser("bench", help="measure per-frame latency")
    p_bench.add_argument("--scenario", choices=scenario_names)
    p_bench.add_argument("--spec", type=Path)
    p_bench.add_argument("--mask", nargs="*", type=Path, default=[])
    p_bench.add_argument("--seed", type=int, default=None)
    p_bench.add_argument("--frames", type=int, default=None)
    p_bench.add_argument("--reps", type=int, default=20)
    p_bench.add_argument("--warmup", type=int, default=3)
    p_bench.add_argument("--json", action="store_true", dest="as_json")
    _add_config_flags(p_bench)
    p_bench.set_defaults(func=cmd_bench)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
