import numpy as np
import pytest

from dlotrack.mask_io import BinaryMask
from dlotrack.skeleton import Skeleton, remove_branch_points, skeletonize
from dlotrack.walker import PixelPath, walk_cycle, walk_segments


def _skel(coords, shape):
    img = np.zeros(shape, dtype=bool)
    for x, y in coords:
        img[y, x] = True
    return Skeleton(img)


def test_pixel_path_accessors():
    path = PixelPath(np.array([[0, 0], [1, 0], [2, 1]], dtype=float))
    assert len(path) == 3
    assert path.head.tolist() == [0.0, 0.0]
    assert path.tail.tolist() == [2.0, 1.0]
    assert np.isclose(path.length_px, 1.0 + np.sqrt(2.0))
    assert PixelPath(np.array([[5, 5]], dtype=float)).length_px == 0.0


def test_walk_straight_line():
    skel = _skel([(1, 2), (2, 2), (3, 2), (4, 2)], (5, 6))
    paths = walk_segments(skel)
    assert len(paths) == 1
    assert paths[0].points.tolist() == [[1, 2], [2, 2], [3, 2], [4, 2]]
    assert paths[0].length_px == 3.0


def test_walk_diagonal_line():
    skel = _skel([(1, 1), (2, 2), (3, 3)], (5, 5))
    (path,) = walk_segments(skel)
    assert path.points.tolist() == [[1, 1], [2, 2], [3, 3]]
    assert np.isclose(path.length_px, 2.0 * np.sqrt(2.0))


def test_walk_starts_at_scan_order_first_endpoint():
    # endpoint (4, 1) comes before (0, 3) in row-major order
    skel = _skel([(4, 1), (3, 2), (2, 2), (1, 3), (0, 3)], (5, 6))
    (path,) = walk_segments(skel)
    assert path.points[0].tolist() == [4, 1]
    assert path.points[-1].tolist() == [0, 3]


def test_walk_two_disjoint_segments():
    skel = _skel([(0, 0), (1, 0), (2, 0), (0, 4), (1, 4), (2, 4)], (6, 6))
    paths = walk_segments(skel)
    assert len(paths) == 2
    covered = {tuple(p) for path in paths for p in path.points.tolist()}
    assert covered == {(0, 0), (1, 0), (2, 0), (0, 4), (1, 4), (2, 4)}


def test_walk_isolated_pixels_become_singletons():
    skel = _skel([(1, 1), (4, 3)], (6, 6))
    paths = walk_segments(skel)
    assert [len(p) for p in paths] == [1, 1]
    assert paths[0].points.tolist() == [[1, 1]]


def test_walk_rejects_branch_points():
    img = np.zeros((5, 5), dtype=bool)
    img[2, :] = True
    img[:, 2] = True
    with pytest.raises(ValueError, match="branch"):
        walk_segments(Skeleton(img))


def test_walk_cuts_closed_loop():
    diamond = [(2, 0), (3, 1), (4, 2), (3, 3), (2, 4), (1, 3), (0, 2), (1, 1)]
    skel = _skel(diamond, (5, 5))
    paths = walk_segments(skel)
    assert len(paths) == 1
    path = paths[0]
    assert len(path) == 8
    assert path.points[0].tolist() == [2, 0]
    steps = np.abs(np.diff(path.points, axis=0))
    assert steps.max() <= 1
    assert np.all(np.abs(path.points[-1] - path.points[0]) <= 1)


def test_walk_segments_partition_property():
    rng = np.random.default_rng(5)
    for trial in range(10):
        mask = rng.random((30, 36)) < 0.4
        skel = remove_branch_points(skeletonize(BinaryMask(mask)))
        paths = walk_segments(skel)
        seen = {}
        for i, path in enumerate(paths):
            diffs = np.abs(np.diff(path.points, axis=0))
            if len(path) > 1:
                assert diffs.max() <= 1 and diffs.sum(axis=1).min() >= 1, trial
            for p in map(tuple, path.points.tolist()):
                assert p not in seen, (trial, p)
                seen[p] = i
        assert len(seen) == skel.count(), trial


def test_walk_segments_deterministic():
    rng = np.random.default_rng(6)
    mask = rng.random((40, 40)) < 0.45
    skel = remove_branch_points(skeletonize(BinaryMask(mask)))
    a = walk_segments(skel)
    b = walk_segments(skel)
    assert len(a) == len(b)
    for pa, pb in zip(a, b):
        assert np.array_equal(pa.points, pb.points)


def test_open_paths_run_endpoint_to_endpoint():
    rng = np.random.default_rng(7)
    mask = rng.random((30, 30)) < 0.4
    skel = remove_branch_points(skeletonize(BinaryMask(mask)))
    counts = skel.neighbor_counts()
    for path in walk_segments(skel):
        if len(path) < 2:
            continue
        x0, y0 = map(int, path.points[0])
        x1, y1 = map(int, path.points[-1])
        if counts[y0, x0] == 1:
            assert counts[y1, x1] == 1


def test_walk_cycle_two_by_two_block():
    img = np.zeros((4, 4), dtype=bool)
    img[1:3, 1:3] = True
    path = walk_cycle(img)
    assert path.points.tolist() == [[1, 1], [2, 1], [1, 2], [2, 2]]


def test_walk_cycle_diamond():
    img = np.zeros((5, 5), dtype=bool)
    for x, y in [(2, 0), (3, 1), (4, 2), (3, 3), (2, 4), (1, 3), (0, 2), (1, 1)]:
        img[y, x] = True
    path = walk_cycle(img)
    assert len(path) == 8
    assert path.points[0].tolist() == [2, 0]
    assert np.all(np.abs(path.points[-1] - path.points[0]) <= 1)


def test_walk_cycle_rejects_empty_and_open():
    with pytest.raises(ValueError, match="empty"):
        walk_cycle(np.zeros((3, 3), dtype=bool))
    img = np.zeros((3, 5), dtype=bool)
    img[1, 1:4] = True
    with pytest.raises(ValueError, match="endpoint"):
        walk_cycle(img)


def test_walk_cycle_rejects_two_loops():
    img = np.zeros((4, 8), dtype=bool)
    img[1:3, 1:3] = True
    img[1:3, 5:7] = True
    with pytest.raises(ValueError, match="single connected"):
        walk_cycle(img)


def test_ring_mask_walks_as_single_cycle():
    yy, xx = np.mgrid[0:40, 0:40]
    r = np.hypot(yy - 20, xx - 20)
    mask = (r >= 11) & (r <= 15)
    skel = remove_branch_points(skeletonize(BinaryMask(mask)))
    paths = walk_segments(skel)
    assert len(paths) == 1
    path = paths[0]
    assert len(path) == skel.count()
    assert np.all(np.abs(path.points[-1] - path.points[0]) <= 1)
