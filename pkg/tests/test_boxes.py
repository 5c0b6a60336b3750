import itertools
import json
import random
from fractions import Fraction

import pytest

from nilbm.boxes import (Box, BoxUnion, dilate_union, dump_union, load_union, minkowski_sum, translate, union,
                         union_from_dict, union_to_dict)
from nilbm.errors import DimensionMismatch, NonpositiveLambda

from _support import boxes, cube, random_union


def pixel_volume(u: BoxUnion, res: int, lo=-2, hi=4) -> Fraction:
    """Count pixel centres of a res-per-unit grid on [lo, hi]^d lying in u."""
    h = Fraction(1, res)
    pts = [lo + (k + Fraction(1, 2)) * h for k in range((hi - lo) * res)]
    count = sum(1 for p in itertools.product(pts, repeat=u.dim) if u.contains(p))
    return count * h**u.dim


def test_volume_examples():
    assert cube().volume() == 1
    assert boxes(((0, 1), (0, 1), (0, 1)), ((2, 3), (0, 1), (0, 1))).volume() == 2
    assert boxes(((0, 2), (0, 1)), ((1, 3), (0, 1))).volume() == 3


def test_normalization_is_canonical():
    a = boxes(((0, 2), (0, 1)), ((1, 3), (0, 1)))
    b = boxes(((0, 3), (0, 1)))
    assert a == b and hash(a) == hash(b)
    assert a.normalize() == a
    c = boxes(((0, 1), (0, 1)), ((1, 2), (0, 1)), ((0, 2), (1, 2)))
    assert c == boxes(((0, 2), (0, 2)))
    assert len(c) == 1


def test_normalization_preserves_point_set():
    rng = random.Random(1)
    for _ in range(10):
        u = random_union(rng, 2, max_boxes=4, denom=4)
        n = BoxUnion(2, u.boxes)
        for b in u.boxes:
            for x in itertools.product(*[(lo, (lo + hi) / 2, hi) for lo, hi in zip(b.lo, b.hi)]):
                assert n.contains(x)
        # interiors of normalized boxes are disjoint
        for p, r in itertools.combinations(n.boxes, 2):
            c = p.intersect(r)
            assert c is None or c.volume() == 0


def test_volume_matches_pixel_count():
    rng = random.Random(2)
    for _ in range(5):
        u = random_union(rng, 2, max_boxes=3, denom=2)
        assert u.volume() == pixel_volume(u, 2)


def test_degenerate_boxes():
    pt = Box((1, 1), (1, 1))
    u = BoxUnion(2, [pt])
    assert u.volume() == 0 and not u.is_empty() and u.contains((1, 1))
    v = BoxUnion(2, [Box((0, 0), (2, 2)), pt])
    assert v.degenerate == ()
    seg = Box((5, 0), (5, 1))
    assert BoxUnion(2, [seg, seg]).degenerate == (seg,)


def test_minkowski_sum():
    assert minkowski_sum(boxes(((0, 1),)), boxes(((0, 1),))) == boxes(((0, 2),))
    assert minkowski_sum(cube(), cube()).volume() == 8
    rng = random.Random(3)
    for _ in range(5):
        a, b = random_union(rng, 2, 2, 2), random_union(rng, 2, 2, 2)
        s = minkowski_sum(a, b)
        assert s.volume() >= max(a.volume(), b.volume())
        for bx in a.boxes:
            for by in b.boxes:
                assert s.contains(tuple(p + r for p, r in zip(bx.lo, by.hi)))


def test_minkowski_sum_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        minkowski_sum(cube(2), cube(3))
    with pytest.raises(DimensionMismatch):
        BoxUnion(2, [Box.cube(3)])


def test_translate_and_union():
    u = translate(cube(2), (Fraction(1, 2), 0))
    assert u == boxes(((Fraction(1, 2), Fraction(3, 2)), (0, 1)))
    assert union(cube(2), u).volume() == Fraction(3, 2)


def test_dilation_scales_by_weights():
    u = boxes(((0, 1), (0, 2), (1, 3)))
    d = dilate_union(u, (1, 1, 2), 2)
    assert d == boxes(((0, 2), (0, 4), (4, 12)))
    assert d.volume() == 16 * u.volume()
    with pytest.raises(NonpositiveLambda):
        dilate_union(u, (1, 1, 2), -1)


def test_hull_and_intersection_volume():
    u = boxes(((0, 1), (0, 1)), ((2, 3), (1, 2)))
    assert u.hull() == Box((0, 0), (3, 2))
    assert u.intersection_volume(Box((0, 0), (Fraction(5, 2), 2))) == Fraction(3, 2)


def test_json(tmp_path):
    u = boxes(((0, Fraction(1, 3)), (-1, 2)))
    doc = union_to_dict(u)
    assert doc["boxes"][0] == [["0", "1/3"], ["-1", "2"]]
    path = tmp_path / "u.json"
    path.write_text(dump_union(u))
    assert load_union(path) == u
    with pytest.raises(ValueError):
        union_from_dict({"dim": 2, "boxes": [[["0", "1"]]]})
    with pytest.raises(ValueError):
        union_from_dict(json.loads('{"boxes": []}'))


def test_box_validation():
    with pytest.raises(ValueError):
        Box((1,), (0,))
    assert Box.of((0, 1), (2, 3)).widths == (1, 1)
