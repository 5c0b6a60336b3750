"""Acceptance suite: one test per criterion, each with its tolerance and time limit.

Run with ``pytest tests/test_acceptance.py`` (or execute this file directly);
the terminal summary prints one PASS/FAIL line per criterion.
"""

import json
import random
import sys
import time
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

from nilbm import cli
from nilbm import group_law as G
from nilbm import inequalities as I
from nilbm import set_arith as S
from nilbm.boxes import Box, BoxUnion, dilate_union, dump_union
from nilbm.lie_core import catalog
from nilbm.polynomial import Polynomial, variables
from nilbm.reports import FAILS, HOLDS

from _support import HEIS_CUBE_VOLUME, cube, heis, heis_member, plane_column, plane_law, random_union


def crit(number, title, limit):
    return pytest.mark.criterion(number, title, limit)


class Clock:
    def __init__(self, limit):
        self.limit = limit
        self.t0 = time.perf_counter()

    @property
    def elapsed(self):
        return time.perf_counter() - self.t0

    def check(self):
        assert self.elapsed < self.limit, f"took {self.elapsed:.1f}s, limit {self.limit}s"


def detail(request, text):
    request.node.user_properties.append(("detail", text))


# -- shared payloads for the determinism criterion -------------------------------------


def bm_random_pairs():
    law, _ = heis()
    rng = random.Random(2024)
    reports = []
    for _ in range(100):
        A, B = random_union(rng, 3), random_union(rng, 3)
        reports.append(I.bm_verify(A, B, law, 3, tol="1/100", max_depth=7))
    return reports


def thin_slab_report():
    law, _ = heis()
    A = I.slab(Fraction(1, 10))
    return I.bm_verify(A, A, law, 4)


def cylinder_report():
    law, _ = heis()
    sq, seg = cube(2), cube(1)
    return I.cylinder_strict(sq, seg, sq, seg, law)


# -- criteria ---------------------------------------------------------------------------


@crit(1, "BCH law and associativity", 10)
def test_bch_correctness(request):
    clock = Clock(10)
    law, _ = heis()
    z1, z2, z3, w1, w2, w3 = variables(6)
    assert law.polys[0].is_zero() and law.polys[1].is_zero()
    assert law.polys[2] == Fraction(1, 2) * (z1 * w2 - z2 * w1)
    assert G.verify_associativity(law, symbolic=True)
    for name in ("engel", "free23"):
        res = G.verify_associativity(G.carnot_law(catalog(name))[0], samples=1000, seed=1)
        assert res, res.detail
    clock.check()
    detail(request, "P3 = (z1w2 - z2w1)/2; 1000 exact triples each for engel, free23")


@crit(2, "triangular form and zero first layer", 1)
def test_structural_theorems(request):
    names = ["abelian(1)", "abelian(4)", "heisenberg(1)", "heisenberg(2)", "heisenberg(3)", "engel", "free23",
             "free(2,2)", "free(2,4)", "free(3,2)", "free(3,3)"]
    laws = [G.carnot_law(catalog(n))[0] for n in names]  # derivation is not part of the timed check
    clock = Clock(1)
    for name, law in zip(names, laws):
        assert G.verify_triangular(law), name
        assert G.verify_first_layer(law), name
    clock.check()
    detail(request, f"{len(names)} catalog instances")


@crit(3, "translation invariance of volume", 60)
def test_translation_invariance(request):
    clock = Clock(60)
    law, _ = heis()
    rng = random.Random(3)
    worst = Fraction(0)
    for _ in range(10):
        # |z1| + |z2| <= 2 keeps the depth-6 shear loss, about (|z1| + |z2|) / 128, under 2%
        z = tuple(Fraction(rng.randint(-n, n), n) for n in (rng.randint(1, 12) for _ in range(3)))
        approx = S.product_volume_bounds(BoxUnion.of(Box(z, z)), cube(), law, "1/50", 6)
        b = approx.bounds
        assert b.lower <= 1 <= b.upper
        assert Fraction(49, 50) <= b.lower and b.upper <= Fraction(51, 50), (z, b)
        worst = max(worst, b.upper - 1, 1 - b.lower)
    clock.check()
    detail(request, f"10 points z in [-1,1]^3, worst deviation {float(worst):.4f}")


@crit(4, "dilation scales volume by 2^Q", 5)
def test_dilation_scaling(request):
    clock = Clock(5)
    _, spec = heis()
    assert spec.Q == 4
    rng = random.Random(4)
    for _ in range(20):
        u = random_union(rng, 3, max_boxes=4)
        assert dilate_union(u, spec.weights, 2).volume() == 16 * u.volume()
    clock.check()
    detail(request, "20 unions, exact")


@crit(5, "BM at topological dimension never fails", 600)
def test_bm_topological_dimension(request):
    clock = Clock(600)
    reports = bm_random_pairs()
    kinds = [r.kind for r in reports]
    assert FAILS not in kinds
    holds = kinds.count(HOLDS)
    assert holds >= 90
    clock.check()
    detail(request, f"{holds}/100 Holds, 0 Fails, max depth {max(r.depth for r in reports)}")


@crit(6, "exponent Q is too large", 60)
def test_exponent_sharpness(request):
    clock = Clock(60)
    r = thin_slab_report()
    assert r.kind == FAILS
    assert r.upper < Fraction(16, 100)
    assert abs(float(r.upper) - 0.0804) < 5e-4
    clock.check()
    detail(request, f"certified upper {float(r.upper):.6f} < 0.16")


@crit(7, "strict inequality for cylinders", 300)
def test_cylinder_strictness(request):
    clock = Clock(300)
    r = cylinder_report()
    assert r.strict and r.product_lower > 8 and r.sum_volume == 8
    # occupancy oracle: pixel centres of the enclosing box tested for membership exactly
    n = 8
    hull = Box((0, 0, Fraction(-1, 2)), (2, 2, Fraction(5, 2)))
    axes = [[lo + (k + Fraction(1, 2)) * (hi - lo) / ((hi - lo) * n) for k in range(int((hi - lo) * n))]
            for lo, hi in zip(hull.lo, hull.hi)]
    hits = sum(heis_member((x, y, t), cube(), cube()) for x in axes[0] for y in axes[1] for t in axes[2])
    estimate = Fraction(hits, n**3)
    assert abs(estimate - HEIS_CUBE_VOLUME) < Fraction(1, 2)
    assert r.product_lower <= HEIS_CUBE_VOLUME
    clock.check()
    detail(request, f"certified lower {r.product_lower} > 8, oracle estimate {float(estimate):.3f}")


@crit(8, "reduction equality when F ignores the first coordinate", 120)
def test_reduction_equality(request):
    clock = Clock(120)
    v = variables(6)
    law = G.custom_law(3, [Polynomial.constant(6, 0), Polynomial.constant(6, 0), v[1] * v[4]], "z2w2")
    r = I.lemma31_verify((0, 1), (0, 1), cube(2), cube(2), law, tol="1/50")
    assert r.inequality and r.equality_checked and r.equality
    clock.check()
    detail(request, f"full [{float(r.full_lower):.4f}, {float(r.full_upper):.4f}] vs "
                    f"{r.sum_length} x [{float(r.tail_lower):.4f}, {float(r.tail_upper):.4f}]")


@crit(9, "Prekopa-Leindler equality on the line", 1)
def test_pl_equality(request):
    clock = Clock(1)
    f = I.StepFunction(1, [(Box((0,), (1,)), 1)])
    h = I.StepFunction(1, [(Box((0,), (2,)), 1)])
    law = G.custom_law(1, [Polynomial.constant(2, 0)], "abelian(1)")
    r = I.pl_verify(f, f, h, "1/2", law)
    assert r.hypothesis == "verified"
    assert r.lhs == 2 and r.verdict.rhs_lo == r.verdict.rhs_hi == 2
    assert r.kind == HOLDS and r.verdict.margin == 0
    clock.check()
    detail(request, "both sides exactly 2")


def _plane_oracle(k: int):
    """Pixel oracle at width h = 2^-k for [0,1]^2 * [0,1]^2 under z + w + (0, z1 w1).

    (z1, w1) run over a grid of step h/4; z2 + w2 sweeps [0, 2], so each sample
    contributes the vertical segment [z1 w1, z1 w1 + 2] at abscissa z1 + w1.
    Returns per-column sorted segment bottoms (as Fractions of h units).
    """
    N = 4 << k
    i, j = np.meshgrid(np.arange(N + 1), np.arange(N + 1), indexing="ij")
    i, j = i.ravel(), j.ravel()
    s = i + j  # abscissa in units of 1/N = h/4
    keep = s % 4 != 0  # strictly inside a column
    col = s[keep] // 4
    bottom = (i[keep] * j[keep]).astype(np.int64)  # in units of 1/N^2
    out = {}
    for c in np.unique(col):
        out[int(c)] = np.sort(bottom[col == c])
    return N, out


@crit(10, "inner, pixel oracle and outer sets are nested", 120)
def test_oracle_equivalence(request):
    clock = Clock(120)
    law = plane_law()
    sq = cube(2)
    approxes = {a.bounds.depth: a for a in S.refine(sq, sq, law, 6)}
    gaps = []
    for k in range(3, 7):
        a = approxes[k]
        inner, outer = a.inner, a.outer
        h = Fraction(1, 2**k)
        assert inner.frame.unit[0] == outer.frame.unit[0] == h and inner.frame.anchor[0] == 0
        vu = inner.frame.unit[1]
        assert outer.frame.unit[1] == vu
        N, oracle = _plane_oracle(k)
        scale = Fraction(1, N * N) / vu  # oracle bottoms -> vertical grid units
        assert scale.denominator == 1
        sc, two = int(scale), int(2 / vu)
        hv = int(h / vu)

        runs = {}
        for c, lo, hi in zip(outer.cols[:, 0].tolist(), outer.lo.tolist(), outer.hi.tolist()):
            runs.setdefault(c, []).append((lo, hi))
        # oracle image within outer: every sampled segment lies in one outer run of its column
        for c, bottoms in oracle.items():
            for b in (bottoms[0], bottoms[-1], *bottoms[:: max(1, len(bottoms) // 50)]):
                y0 = int(b) * sc
                assert any(lo <= y0 and y0 + two <= hi for lo, hi in runs.get(c, [])), (k, c, y0)
        # inner within oracle, pixel by pixel, and within the exact sections
        for c, lo, hi in zip(inner.cols[:, 0].tolist(), inner.lo.tolist(), inner.hi.tolist()):
            for x in (c * h, (c + 1) * h):
                m, top = plane_column(x)
                assert m <= lo * vu and hi * vu <= top
            bottoms = oracle[c] * sc
            for p in range(-(-lo // hv), hi // hv):
                y0, y1 = p * hv, (p + 1) * hv
                # some segment [b, b + 2] meets the open pixel (y0, y1)
                idx = np.searchsorted(bottoms, y1, side="left")
                assert idx > 0 and bottoms[idx - 1] + two > y0, (k, c, p)
        gaps.append(a.bounds.gap)
    assert all(g1 < g0 for g0, g1 in zip(gaps, gaps[1:]))
    clock.check()
    detail(request, "gaps " + ", ".join(f"{float(g):.4f}" for g in gaps))


@crit(11, "Carnot additive form with exact dilated volumes", 300)
def test_carnot_corollary(request):
    clock = Clock(300)
    law, spec = heis()
    r = I.carnot_bm(cube(), cube(), "1/2", law, spec, "additive")
    assert r.kind == HOLDS
    assert r.extra["dilated_volume_A"] == Fraction(1, 16) * cube().volume()
    assert r.extra["dilated_volume_B"] == Fraction(1, 16) * cube().volume()
    clock.check()
    assert r.verdict.rhs_lo == r.verdict.rhs_hi == Fraction(1, 2)
    detail(request, f"lower {float(r.lower):.4f} vs target 1/2")


@crit(12, "byte-identical payloads on repeated runs", 600)
def test_determinism(request, tmp_path):
    clock = Clock(600)

    def payload():
        return cli.results_json([r.to_dict() for r in bm_random_pairs()]
                                + [thin_slab_report().to_dict(), cylinder_report().to_dict()])

    first, second = payload(), payload()
    assert first == second
    # the CLI path as well
    a, s = tmp_path / "a.json", tmp_path / "s.json"
    a.write_text(dump_union(cube()))
    s.write_text(dump_union(I.slab("1/10")))
    outs = []
    for n in range(2):
        out = tmp_path / f"out{n}.json"
        assert cli.main(["bm", "--group", "heisenberg(1)", "--A", str(s), "--B", str(s), "--m", "4",
                         "-o", str(out)]) == 0
        outs.append(cli.results_json(json.loads(out.read_text())["results"]))
    assert outs[0] == outs[1]
    clock.check()
    detail(request, f"{len(first)} bytes identical")


if __name__ == "__main__":
    sys.exit(pytest.main([str(Path(__file__)), "-v", "-p", "no:cacheprovider"]))
