import argparse
import json
from pathlib import Path

import numpy as np
import pytest
from PIL import Image

from dlotrack.cli import _build_config, main
from dlotrack.mask_io import CurveDocument, FrameMeta, read_curves, write_curves
from dlotrack.spline import BSplineCurve
from dlotrack.synthgen import ScenarioSpec, save_scenario

SPEC_KW = dict(
    frames=3,
    width=200,
    height=150,
    control_points=[[(30, 40), (70, 100), (120, 50), (170, 90)]],
    cable_width=5.0,
    step_bound=2.0,
    margin=20.0,
)


@pytest.fixture(scope="module")
def scene_dir(tmp_path_factory):
    root = tmp_path_factory.mktemp("scene")
    spec_path = root / "spec.json"
    save_scenario(ScenarioSpec(**SPEC_KW), spec_path)
    out = root / "frames"
    rc = main(["synth", "--spec", str(spec_path), "--seed", "5", "--out", str(out)])
    assert rc == 0
    return out


@pytest.fixture(scope="module")
def scene3d_dir(tmp_path_factory):
    root = tmp_path_factory.mktemp("scene3d")
    spec_path = root / "spec.json"
    save_scenario(
        ScenarioSpec(**{**SPEC_KW, "depth_mode": "ramp", "depth_args": (400.0, 600.0)}),
        spec_path,
    )
    out = root / "frames"
    rc = main(["synth", "--spec", str(spec_path), "--seed", "5", "--out", str(out)])
    assert rc == 0
    return out


def _line_doc(y):
    ctrl = np.column_stack([np.linspace(0, 100, 4), np.full(4, float(y))])
    curve = BSplineCurve(
        degree=3,
        knots=np.array([0, 0, 0, 0, 1, 1, 1, 1], dtype=float),
        control_points=ctrl,
    )
    return CurveDocument(frame=FrameMeta(width=200, height=150), instances=[curve])


def test_synth_outputs(scene_dir):
    assert sorted(p.name for p in scene_dir.glob("mask_*.png")) == [
        "mask_0000.png",
        "mask_0001.png",
        "mask_0002.png",
    ]
    assert (scene_dir / "scenario.json").is_file()
    assert sorted(p.name for p in (scene_dir / "gt").glob("*.json")) == [
        "frame_0000.json",
        "frame_0001.json",
        "frame_0002.json",
    ]
    assert not list(scene_dir.glob("depth_*.png"))


def test_synth_writes_depth_when_requested(scene3d_dir):
    assert len(list(scene3d_dir.glob("depth_*.png"))) == 3


def test_synth_rejects_scenario_and_spec(tmp_path, capsys):
    rc = main(["synth", "--scenario", "plain", "--spec", "x.json", "--out", str(tmp_path)])
    assert rc == 2
    assert "exactly one" in capsys.readouterr().err


def test_synth_rejects_neither_source(tmp_path, capsys):
    rc = main(["synth", "--out", str(tmp_path)])
    assert rc == 2


def test_track_frames(scene_dir, tmp_path, capsys):
    masks = sorted(str(p) for p in scene_dir.glob("mask_*.png"))
    out = tmp_path / "curves"
    rc = main(["track", "--mask", *masks, "--out", str(out)])
    assert rc == 0
    lines = [l for l in capsys.readouterr().out.splitlines() if l]
    assert len(lines) == 3
    assert lines[0].split("\t")[0].endswith("mask_0000.png")
    float(lines[0].split("\t")[1])
    docs = sorted(out.glob("*.json"))
    assert [d.name for d in docs] == ["mask_0000.json", "mask_0001.json", "mask_0002.json"]
    doc = read_curves(docs[0])
    assert doc.frame.source == "mask_0000.png"
    assert len(doc.instances) == 1
    assert doc.instances[0].dim == 2


def test_track_with_depth_gives_3d(scene3d_dir, tmp_path):
    masks = sorted(str(p) for p in scene3d_dir.glob("mask_*.png"))
    depths = sorted(str(p) for p in scene3d_dir.glob("depth_*.png"))
    out = tmp_path / "curves3d"
    rc = main(["track", "--mask", *masks, "--depth", *depths, "--out", str(out)])
    assert rc == 0
    doc = read_curves(out / "mask_0000.json")
    assert doc.instances[0].dim == 3
    zs = doc.instances[0].control_points[:, 2]
    assert 390.0 <= zs.min() and zs.max() <= 610.0


def test_track_depth_count_mismatch(scene3d_dir, tmp_path, capsys):
    masks = sorted(str(p) for p in scene3d_dir.glob("mask_*.png"))
    depths = sorted(str(p) for p in scene3d_dir.glob("depth_*.png"))[:1]
    rc = main(["track", "--mask", *masks, "--depth", *depths, "--out", str(tmp_path)])
    assert rc == 2
    assert "3 masks but 1 depth" in capsys.readouterr().err


def test_track_missing_file_stops(scene_dir, tmp_path, capsys):
    rc = main(["track", "--mask", str(scene_dir / "nope.png"), "--out", str(tmp_path)])
    assert rc == 1
    assert "nope.png" in capsys.readouterr().err
    assert not list(tmp_path.glob("*.json"))


def test_track_keep_going_processes_rest(scene_dir, tmp_path, capsys):
    masks = sorted(str(p) for p in scene_dir.glob("mask_*.png"))
    bad = str(scene_dir / "nope.png")
    rc = main(["track", "--mask", masks[0], bad, masks[1], "--keep-going", "--out", str(tmp_path)])
    assert rc == 1
    assert len(list(tmp_path.glob("*.json"))) == 2


def test_track_overlay_written(scene_dir, tmp_path):
    mask = sorted(str(p) for p in scene_dir.glob("mask_*.png"))[0]
    rc = main(["track", "--mask", mask, "--overlay", "--out", str(tmp_path)])
    assert rc == 0
    overlay = Image.open(tmp_path / "mask_0000_overlay.png")
    assert overlay.size == (200, 150)
    assert overlay.mode == "RGB"


def test_track_rejects_bad_config_value(scene_dir, tmp_path, capsys):
    mask = sorted(str(p) for p in scene_dir.glob("mask_*.png"))[0]
    rc = main(["track", "--mask", mask, "--out", str(tmp_path), "--m", "7"])
    assert rc == 2
    assert "m must be" in capsys.readouterr().err


def test_eval_requires_exactly_one_target(tmp_path, capsys):
    doc = tmp_path / "c.json"
    write_curves(_line_doc(10), doc)
    assert main(["eval", "--curves", str(doc)]) == 2
    assert main(["eval", "--curves", str(doc), "--masks", "m.png", "--ref", "r.json"]) == 2


def test_eval_count_mismatch(tmp_path, capsys):
    doc = tmp_path / "c.json"
    write_curves(_line_doc(10), doc)
    rc = main(["eval", "--curves", str(doc), "--ref", "a.json", "b.json"])
    assert rc == 2
    assert "1 curve documents but 2 targets" in capsys.readouterr().err


def test_eval_missing_input_file(tmp_path, capsys):
    doc = tmp_path / "c.json"
    write_curves(_line_doc(10), doc)
    rc = main(["eval", "--curves", str(doc), "--ref", str(tmp_path / "missing.json")])
    assert rc == 1


def test_eval_ref_mode_known_scores(tmp_path, capsys):
    # candidate lines sit exactly 1, 2 and 3 px from their references, so
    # the l3 sequence and the population std are known in closed form
    for i, off in enumerate((1.0, 2.0, 3.0)):
        write_curves(_line_doc(10.0), tmp_path / f"ref_{i}.json")
        write_curves(_line_doc(10.0 + off), tmp_path / f"cand_{i}.json")
    cands = [str(tmp_path / f"cand_{i}.json") for i in range(3)]
    refs = [str(tmp_path / f"ref_{i}.json") for i in range(3)]
    rc = main(["eval", "--curves", *cands, "--ref", *refs, "--json"])
    assert rc == 0
    report = json.loads(capsys.readouterr().out)
    scores = [row["l3"] for row in report["frames"]]
    assert np.allclose(scores, [1.0, 2.0, 3.0])
    assert np.isclose(report["aggregate"]["l3_mean"], 2.0)
    assert np.isclose(report["aggregate"]["l3_std"], np.sqrt(2.0 / 3.0))
    assert report["aggregate"]["missing"] == 0
    assert report["aggregate"]["redundant"] == 0


def test_eval_ref_mode_table_output(tmp_path, capsys):
    write_curves(_line_doc(10.0), tmp_path / "ref.json")
    write_curves(_line_doc(11.0), tmp_path / "cand.json")
    rc = main(
        ["eval", "--curves", str(tmp_path / "cand.json"), "--ref", str(tmp_path / "ref.json")]
    )
    assert rc == 0
    out = capsys.readouterr().out
    assert "aggregate over 1 frames (population std)" in out
    assert "l3 = 1.0000" in out


def test_eval_masks_mode(scene_dir, tmp_path, capsys):
    masks = sorted(str(p) for p in scene_dir.glob("mask_*.png"))
    out = tmp_path / "curves"
    assert main(["track", "--mask", *masks, "--out", str(out)]) == 0
    capsys.readouterr()
    curves = sorted(str(p) for p in out.glob("*.json"))
    rc = main(["eval", "--curves", *curves, "--masks", *masks, "--json"])
    assert rc == 0
    report = json.loads(capsys.readouterr().out)
    assert set(report["aggregate"]) == {"l1_mean", "l1_std", "l2_mean", "l2_std"}
    # mask pixels span the full 5 px cable width, so their mean distance to
    # the centerline curve sits near width/4; the reverse direction only pays
    # the pixel-grid quantization cost
    assert 0.8 < report["aggregate"]["l1_mean"] < 1.8
    assert report["aggregate"]["l2_mean"] < 0.6
    assert len(report["frames"]) == 3


def test_bench_json_report(scene_dir, capsys):
    spec_path = scene_dir / "scenario.json"
    rc = main(
        ["bench", "--spec", str(spec_path), "--seed", "5", "--reps", "3", "--warmup", "1", "--json"]
    )
    assert rc == 0
    report = json.loads(capsys.readouterr().out)
    assert report["reps"] == 3
    assert report["deterministic"] is True
    assert set(report["stages"]) == {"open", "skeletonize", "walk", "chain", "fit"}
    assert report["total"]["median"] >= report["total"]["min"]


def test_bench_on_mask_files(scene_dir, capsys):
    mask = sorted(str(p) for p in scene_dir.glob("mask_*.png"))[0]
    rc = main(["bench", "--mask", mask, "--reps", "2", "--warmup", "0"])
    assert rc == 0
    out = capsys.readouterr().out
    assert out.startswith("stage\tmin_ms")
    assert "deterministic outputs across reps: yes" in out


def test_build_config_precedence(tmp_path):
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps({"m": 0.1, "k": 7}))
    ns = argparse.Namespace(
        m=0.2, p=None, k=None, j_th=None, w=None, open_kernel=None, config=cfg_path
    )
    cfg = _build_config(ns)
    assert cfg.m == 0.2
    assert cfg.k == 7
    assert cfg.p == 10


def test_build_config_rejects_unknown_keys(tmp_path):
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps({"threshold": 5}))
    ns = argparse.Namespace(
        m=None, p=None, k=None, j_th=None, w=None, open_kernel=None, config=cfg_path
    )
    with pytest.raises(ValueError, match="unknown config keys"):
        _build_config(ns)
