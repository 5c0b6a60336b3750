"""Certified inner and outer approximations of product sets A * B.

Both sets are subdivided into cells. For a cell pair (a, b) with F
enclosed in [Flo, Fhi] over a x b, the image a * b satisfies

    [(a+b).lo + Flo, (a+b).hi + Fhi]  contains  a * b  contains  [(a+b).lo + Fhi, (a+b).hi + Flo]

coordinatewise. The right inclusion uses triangularity: a target p in the
inner box is reached by choosing z_i + w_i = p_i - F_i(z_<i, w_<i) one
coordinate at a time, and that value always lies in (a+b)_i.

The boxes are rasterised into columns over the first d-1 coordinates on a
grid anchored at (min A.lo + min B.lo). Along the last coordinate each column
stores an exact union of integer intervals. Inner boxes contribute only to
columns they contain completely; outer boxes to every column they meet. The
enclosures of F are computed in numpy with outward rounding, and snapping to
the grid rounds inward for inner and outward for outer, so both volumes are
certified rationals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Sequence

import numpy as np

from . import interval as iv
from .boxes import Box, BoxUnion, minkowski_sum
from .errors import BudgetExceeded, DimensionMismatch
from .group_law import ProductLaw, poly_interval
from .interval import Interval
from .rational import float_down, float_up, q

DEFAULT_BUDGET = 2**26
CHUNK_PAIRS = 1 << 20
_MAX_COLS_PER_AXIS = 1 << 20
_VERTICAL_BITS = 50  # magnitude cap (in sub-units) along the last axis


# -- subdivision ----------------------------------------------------------------


def split_axes(law: ProductLaw) -> tuple[set[int], set[int]]:
    """Axes worth subdividing: those the correction term F depends on."""
    return law.active_axes()


def subdivide(U: BoxUnion, axes: set[int], depth: int) -> list[Box]:
    """Split each nondegenerate coordinate in ``axes`` into 2**depth equal parts."""
    cells = []
    k = 1 << depth
    for box in U.all_boxes():
        parts = []
        for i in range(U.dim):
            lo, hi = box.lo[i], box.hi[i]
            if i in axes and hi > lo and depth:
                step = (hi - lo) / k
                parts.append([(lo + j * step, lo + (j + 1) * step) for j in range(k)])
            else:
                parts.append([(lo, hi)])
        grids = [[]]
        for p in parts:
            grids = [g + [iv_] for g in grids for iv_ in p]
        cells.extend(Box(tuple(a for a, _ in g), tuple(b for _, b in g)) for g in grids)
    return cells


def cell_count(U: BoxUnion, axes: set[int], depth: int) -> int:
    total = 0
    for box in U.all_boxes():
        n = 1
        for i in range(U.dim):
            if i in axes and box.hi[i] > box.lo[i]:
                n <<= depth
        total += n
    return total


def pair_count(A: BoxUnion, B: BoxUnion, law: ProductLaw, depth: int) -> int:
    za, wa = split_axes(law)
    return cell_count(A, za, depth) * cell_count(B, wa, depth)


# -- grid frame -----------------------------------------------------------------


def _frac_gcd(values) -> Fraction | None:
    g = None
    for v in values:
        v = abs(Fraction(v))
        if not v:
            continue
        if g is None:
            g = v
        else:
            g = Fraction(math.gcd(g.numerator * v.denominator, v.numerator * g.denominator),
                         g.denominator * v.denominator)
    return g


def _pow2_floor(x: Fraction) -> Fraction:
    e = math.floor(math.log2(x.numerator) - math.log2(x.denominator))
    p = Fraction(2) ** e
    while p > x:
        p /= 2
    while p * 2 <= x:
        p *= 2
    return p


@dataclass(frozen=True)
class Frame:
    """Rasterisation grid: point x maps to (x - anchor) / unit per axis."""

    anchor: tuple
    unit: tuple  # column width for axes < d-1, vertical unit for the last axis
    aligned: tuple  # per axis: all cell endpoints sit on grid lines

    @property
    def column_area(self) -> Fraction:
        a = Fraction(1)
        for u in self.unit[:-1]:
            a *= u
        return a


def make_frame(A: BoxUnion, cellsA: list[Box], B: BoxUnion, cellsB: list[Box], law: ProductLaw) -> Frame:
    d = A.dim
    anchorA = tuple(min(b.lo[i] for b in A.all_boxes()) for i in range(d))
    anchorB = tuple(min(b.lo[i] for b in B.all_boxes()) for i in range(d))
    anchor = tuple(a + b for a, b in zip(anchorA, anchorB))
    hullA, hullB = A.hull(), B.hull()
    units, aligned = [], []
    for i in range(d):
        vals = set()
        for cells, anc in ((cellsA, anchorA[i]), (cellsB, anchorB[i])):
            for c in cells:
                vals.add(c.lo[i] - anc)
                vals.add(c.hi[i] - c.lo[i])
        g = _frac_gcd(vals) or Fraction(1)
        extent = hullA.hi[i] - hullA.lo[i] + hullB.hi[i] - hullB.lo[i]
        ok = True
        if i < d - 1 and extent / g > _MAX_COLS_PER_AXIS:
            widths = [c.hi[i] - c.lo[i] for c in cellsA + cellsB if c.hi[i] > c.lo[i]]
            g = _pow2_floor(min(widths) / 4) if widths else Fraction(1)
            ok = False
        if i == d - 1:
            # the vertical axis costs nothing to refine; use a fine sub-unit
            span = _vertical_span(law, hullA, hullB, i) / g
            bits = max(0, _VERTICAL_BITS - max(1, math.ceil(math.log2(float(span) + 2))) - 4)
            bits = min(bits, 30)
            g = g / (1 << bits)
        units.append(g)
        aligned.append(ok)
    return Frame(anchor, tuple(units), tuple(aligned))


def _vertical_span(law: ProductLaw, hullA: Box, hullB: Box, i: int) -> Fraction:
    box = [Interval(a, b) for a, b in zip(hullA.lo, hullA.hi)] + [Interval(a, b) for a, b in zip(hullB.lo, hullB.hi)]
    f = poly_interval(law.polys[i], box)
    return (hullA.hi[i] - hullA.lo[i]) + (hullB.hi[i] - hullB.lo[i]) + f.width + abs(f.lo) + abs(f.hi) + 1


# -- column sets ----------------------------------------------------------------


@dataclass
class ColumnSet:
    """Union of vertical segments over grid columns, all in integer grid units.

    ``cols`` has shape (n, d-1) and holds column indices (column k of axis i
    covers anchor_i + [k, k+1] * unit_i); ``lo``/``hi`` are merged, disjoint
    runs along the last axis in multiples of unit_{d-1}.
    """

    dim: int
    frame: Frame
    cols: np.ndarray
    lo: np.ndarray
    hi: np.ndarray

    def volume(self) -> Fraction:
        return Fraction(_exact_sum(self.hi - self.lo)) * self.frame.column_area * self.frame.unit[-1]

    def __len__(self) -> int:
        return len(self.lo)

    def contains_point(self, x: Sequence) -> bool:
        x = [q(v) for v in x]
        if len(x) != self.dim:
            raise DimensionMismatch("point dimension differs from set dimension")
        f = self.frame
        mask = np.ones(len(self.lo), dtype=bool)
        for i in range(self.dim - 1):
            t = (x[i] - f.anchor[i]) / f.unit[i]
            k_hi = math.floor(t)
            k_lo = k_hi - 1 if t == k_hi else k_hi
            mask &= (self.cols[:, i] >= k_lo) & (self.cols[:, i] <= k_hi)
        t = (x[-1] - f.anchor[-1]) / f.unit[-1]
        # endpoints are integers, so lo <= t <= hi reduces to integer tests
        return bool(np.any((self.lo[mask] <= math.floor(t)) & (self.hi[mask] >= math.ceil(t))))

    def to_box_union(self) -> BoxUnion:
        f = self.frame
        boxes = []
        for c, a, b in zip(self.cols.tolist(), self.lo.tolist(), self.hi.tolist()):
            lo = tuple(f.anchor[i] + k * f.unit[i] for i, k in enumerate(c)) + (f.anchor[-1] + a * f.unit[-1],)
            hi = tuple(f.anchor[i] + (k + 1) * f.unit[i] for i, k in enumerate(c)) + (f.anchor[-1] + b * f.unit[-1],)
            boxes.append(Box(lo, hi))
        return BoxUnion(self.dim, boxes)

    def boxes(self) -> list[Box]:
        return list(self.to_box_union().all_boxes())


def _exact_sum(arr: np.ndarray) -> int:
    arr = np.asarray(arr, dtype=np.int64)
    if arr.size == 0:
        return 0
    block = 1 << 8
    pad = (-arr.size) % block
    parts = np.concatenate([arr, np.zeros(pad, dtype=np.int64)]).reshape(-1, block).sum(axis=1)
    return sum(int(p) for p in parts)


def _merge_runs(keys: np.ndarray, lo: np.ndarray, hi: np.ndarray):
    """Union of intervals grouped by key; returns (keys, lo, hi) of maximal runs."""
    if keys.size == 0:
        return keys, lo, hi
    base = int(lo.min())
    span = int(hi.max()) - base + 1
    if (int(keys.max()) + 1) * span < 2**62:
        order = np.argsort(keys * span + (lo - base))  # one int64 key sorts faster
    else:
        order = np.lexsort((lo, keys))
    keys, lo, hi = keys[order], lo[order], hi[order]
    new_seg = np.empty(keys.size, dtype=bool)
    new_seg[0] = True
    new_seg[1:] = keys[1:] != keys[:-1]
    seg = np.cumsum(new_seg) - 1
    runmax = np.empty_like(hi)
    # segmented running max via per-segment offsets, batched against overflow
    per_batch = max(1, (2**62) // span)
    nseg = int(seg[-1]) + 1
    starts = np.searchsorted(seg, np.arange(0, nseg, per_batch))
    bounds = list(starts) + [keys.size]
    for s, e in zip(bounds[:-1], bounds[1:]):
        local = seg[s:e] - seg[s]
        shifted = (hi[s:e] - base) + local * span
        runmax[s:e] = np.maximum.accumulate(shifted) - local * span + base
    start = new_seg.copy()
    start[1:] |= lo[1:] > runmax[:-1]
    idx = np.flatnonzero(start)
    ends = np.append(idx[1:], keys.size) - 1
    return keys[idx], lo[idx], runmax[ends]


class _Accumulator:
    def __init__(self):
        self.keys = np.empty(0, dtype=np.int64)
        self.lo = np.empty(0, dtype=np.int64)
        self.hi = np.empty(0, dtype=np.int64)

    def add(self, keys, lo, hi):
        self.keys, self.lo, self.hi = _merge_runs(
            np.concatenate([self.keys, keys]), np.concatenate([self.lo, lo]), np.concatenate([self.hi, hi]))


# -- engine -----------------------------------------------------------------------


class _Cells:
    """Float views of a cell list.

    ``olo``/``ohi`` are original coordinates rounded outward (for enclosing F).
    Grid-unit coordinates are kept in both rounding directions: outer boxes
    use the outward pair (``ulo``, ``uhi``), inner boxes the inward pair
    (``ulo_in``, ``uhi_in``). On aligned frames all four are exact integers.
    """

    def __init__(self, cells: list[Box], anchor: Sequence[Fraction], unit: Sequence[Fraction]):
        d = len(anchor)
        self.n = len(cells)

        def arr(rows):
            return np.array(rows, dtype=np.float64).reshape(-1, d)

        self.olo = arr([[float_down(c.lo[i]) for i in range(d)] for c in cells])
        self.ohi = arr([[float_up(c.hi[i]) for i in range(d)] for c in cells])
        lo = [[(c.lo[i] - anchor[i]) / unit[i] for i in range(d)] for c in cells]
        hi = [[(c.hi[i] - anchor[i]) / unit[i] for i in range(d)] for c in cells]
        self.ulo = arr([[float_down(x) for x in row] for row in lo])
        self.uhi = arr([[float_up(x) for x in row] for row in hi])
        self.ulo_in = arr([[float_up(x) for x in row] for row in lo])
        self.uhi_in = arr([[float_down(x) for x in row] for row in hi])


def _monomial_parts(law: ProductLaw, i: int, A: _Cells, B: _Cells):
    """Per-monomial enclosures split into a z-factor over A cells and a w-factor over B cells."""
    d = law.d
    out = []
    for mono, c in law.polys[i].items():
        zlo = np.ones(A.n)
        zhi = np.ones(A.n)
        wlo = np.ones(B.n)
        whi = np.ones(B.n)
        zused = wused = False
        for v, e in enumerate(mono):
            if not e:
                continue
            if v < d:
                plo, phi = iv.f_pow(A.olo[:, v], A.ohi[:, v], e)
                zlo, zhi = (plo, phi) if not zused else iv.f_mul(zlo, zhi, plo, phi)
                zused = True
            else:
                plo, phi = iv.f_pow(B.olo[:, v - d], B.ohi[:, v - d], e)
                wlo, whi = (plo, phi) if not wused else iv.f_mul(wlo, whi, plo, phi)
                wused = True
        # fold the coefficient into whichever side is present
        if zused:
            zlo, zhi = iv.f_scale(c, zlo, zhi)
        elif wused:
            wlo, whi = iv.f_scale(c, wlo, whi)
        else:
            zlo = np.full(A.n, float_down(c))
            zhi = np.full(A.n, float_up(c))
            zused = True
        out.append((zused, zlo, zhi, wused, wlo, whi))
    return out


def _pair_F(parts, ia, ib):
    """Enclosure of one F_i over the pairs (ia, ib); None when F_i has no terms."""
    lo = hi = None
    for zused, zlo, zhi, wused, wlo, whi in parts:
        if zused and wused:
            tlo, thi = iv.f_mul(zlo[ia], zhi[ia], wlo[ib], whi[ib])
        elif zused:
            tlo, thi = zlo[ia], zhi[ia]
        else:
            tlo, thi = wlo[ib], whi[ib]
        if lo is None:
            lo, hi = tlo, thi
        else:
            lo, hi = iv.f_add(lo, hi, tlo, thi)
    return lo, hi


@dataclass
class _Grid:
    cmin: np.ndarray
    strides: np.ndarray


def _column_grid(A: BoxUnion, B: BoxUnion, law: ProductLaw, frame: Frame) -> _Grid:
    d = A.dim
    hA, hB = A.hull(), B.hull()
    box = [Interval(a, b) for a, b in zip(hA.lo, hA.hi)] + [Interval(a, b) for a, b in zip(hB.lo, hB.hi)]
    cmin, counts = [], []
    for i in range(d - 1):
        f = poly_interval(law.polys[i], box)
        lo = (hA.lo[i] + hB.lo[i] + f.lo - frame.anchor[i]) / frame.unit[i]
        hi = (hA.hi[i] + hB.hi[i] + f.hi - frame.anchor[i]) / frame.unit[i]
        lo_k, hi_k = math.floor(lo) - 2, math.ceil(hi) + 2
        cmin.append(lo_k)
        counts.append(hi_k - lo_k + 1)
    strides = []
    s = 1
    for n in counts:
        strides.append(s)
        s *= n
    if s >= 2**62:
        raise BudgetExceeded(s, 2**62)
    return _Grid(np.array(cmin, dtype=np.int64), np.array(strides, dtype=np.int64))


def _expand(clo: np.ndarray, chi: np.ndarray, vlo: np.ndarray, vhi: np.ndarray, grid: _Grid):
    """One entry per (pair, covered column): returns (keys, lo, hi)."""
    counts = (chi - clo + 1).clip(min=0)
    total = counts.prod(axis=1) if counts.shape[1] else np.ones(len(vlo), dtype=np.int64)
    keep = (total > 0) & (vhi >= vlo)
    clo, counts, total, vlo, vhi = clo[keep], counts[keep], total[keep], vlo[keep], vhi[keep]
    n = int(total.sum())
    if n == 0:
        e = np.empty(0, dtype=np.int64)
        return e, e, e
    owner = np.repeat(np.arange(len(total)), total)
    offs = np.arange(n, dtype=np.int64) - np.repeat(np.cumsum(total) - total, total)
    keys = np.zeros(n, dtype=np.int64)
    for i in range(clo.shape[1]):
        ni = counts[owner, i]
        c = clo[owner, i] + offs % ni
        offs //= ni
        keys += (c - grid.cmin[i]) * grid.strides[i]
    return keys, vlo[owner], vhi[owner]


def _decode(keys: np.ndarray, grid: _Grid, d: int) -> np.ndarray:
    cols = np.zeros((keys.size, d - 1), dtype=np.int64)
    rem = keys.copy()
    for i in range(d - 2, -1, -1):
        cols[:, i] = rem // grid.strides[i] + grid.cmin[i]
        rem = rem % grid.strides[i]
    return cols


@dataclass
class _DepthResult:
    inner: ColumnSet
    outer: ColumnSet
    pairs: int


def _run_depth(A: BoxUnion, B: BoxUnion, law: ProductLaw, depth: int, want_inner: bool = True) -> _DepthResult:
    d = law.d
    za, wa = split_axes(law)
    cellsA = subdivide(A, za, depth)
    cellsB = subdivide(B, wa, depth)
    frame = make_frame(A, cellsA, B, cellsB, law)
    anchorA = tuple(min(b.lo[i] for b in A.all_boxes()) for i in range(d))
    anchorB = tuple(min(b.lo[i] for b in B.all_boxes()) for i in range(d))
    # unit coordinates of a and b are offsets from their own anchors, so
    # their sums are offsets from frame.anchor = anchorA + anchorB
    CA, CB = _Cells(cellsA, anchorA, frame.unit), _Cells(cellsB, anchorB, frame.unit)
    grid = _column_grid(A, B, law, frame)
    scale = [Fraction(1) / u for u in frame.unit]
    parts = [_monomial_parts(law, i, CA, CB) for i in range(d)]
    exact_axis = [law.polys[i].is_zero() and frame.aligned[i] for i in range(d)]

    acc_in, acc_out = _Accumulator(), _Accumulator()
    block = max(1, CHUNK_PAIRS // max(1, CB.n))
    for s in range(0, CA.n, block):
        e = min(CA.n, s + block)
        ia = np.repeat(np.arange(s, e), CB.n)
        ib = np.tile(np.arange(CB.n), e - s)
        olo = np.empty((ia.size, d))
        ohi = np.empty((ia.size, d))
        ilo = np.empty((ia.size, d))
        ihi = np.empty((ia.size, d))
        for i in range(d):
            if exact_axis[i]:
                # integer unit endpoints and no correction term: sums are exact
                blo = CA.ulo[ia, i] + CB.ulo[ib, i]
                bhi = CA.uhi[ia, i] + CB.uhi[ib, i]
                olo[:, i], ohi[:, i] = blo, bhi
                ilo[:, i], ihi[:, i] = blo, bhi
                continue
            flo, fhi = _pair_F(parts[i], ia, ib)
            if flo is None:
                flo = fhi = np.zeros(ia.size)
            else:
                flo, fhi = iv.f_scale(scale[i], flo, fhi)
            # outer: [a.lo + b.lo + Flo, a.hi + b.hi + Fhi] rounded outward
            olo[:, i] = iv.add_down(iv.add_down(CA.ulo[ia, i], CB.ulo[ib, i]), flo)
            ohi[:, i] = iv.add_up(iv.add_up(CA.uhi[ia, i], CB.uhi[ib, i]), fhi)
            # inner: [a.lo + b.lo + Fhi, a.hi + b.hi + Flo] rounded inward
            ilo[:, i] = iv.add_up(iv.add_up(CA.ulo_in[ia, i], CB.ulo_in[ib, i]), fhi)
            ihi[:, i] = iv.add_down(iv.add_down(CA.uhi_in[ia, i], CB.uhi_in[ib, i]), flo)
        h = d - 1
        # outer: every column met; vertical rounded outward
        oclo = np.floor(olo[:, :h]).astype(np.int64)
        ochi = np.maximum(np.ceil(ohi[:, :h]).astype(np.int64) - 1, oclo)
        acc_out.add(*_expand(oclo, ochi, np.floor(olo[:, h]).astype(np.int64),
                             np.ceil(ohi[:, h]).astype(np.int64), grid))
        if want_inner:
            iclo = np.ceil(ilo[:, :h]).astype(np.int64)
            ichi = np.floor(ihi[:, :h]).astype(np.int64) - 1
            acc_in.add(*_expand(iclo, ichi, np.ceil(ilo[:, h]).astype(np.int64),
                                np.floor(ihi[:, h]).astype(np.int64), grid))
    inner = ColumnSet(d, frame, _decode(acc_in.keys, grid, d), acc_in.lo, acc_in.hi)
    outer = ColumnSet(d, frame, _decode(acc_out.keys, grid, d), acc_out.lo, acc_out.hi)
    return _DepthResult(inner, outer, CA.n * CB.n)


def _check(A: BoxUnion, B: BoxUnion, law: ProductLaw) -> None:
    if A.dim != law.d or B.dim != law.d:
        raise DimensionMismatch(f"sets of dimension {A.dim}, {B.dim} with a law of dimension {law.d}")
    if A.is_empty() or B.is_empty():
        raise ValueError("product of an empty set")


def _budget_guard(A, B, law, depth, budget):
    n = pair_count(A, B, law, depth)
    if n > budget:
        raise BudgetExceeded(n, budget)


def outer_product_set(A: BoxUnion, B: BoxUnion, law: ProductLaw, depth: int,
                      budget: int = DEFAULT_BUDGET) -> ColumnSet:
    """Certified superset of A * B at the given subdivision depth."""
    _check(A, B, law)
    _budget_guard(A, B, law, depth, budget)
    return _run_depth(A, B, law, depth, want_inner=False).outer


def inner_product_set(A: BoxUnion, B: BoxUnion, law: ProductLaw, depth: int,
                      budget: int = DEFAULT_BUDGET) -> ColumnSet:
    """Certified subset of A * B at the given subdivision depth."""
    _check(A, B, law)
    _budget_guard(A, B, law, depth, budget)
    return _run_depth(A, B, law, depth).inner


# -- bounds and refinement ------------------------------------------------------


@dataclass(frozen=True)
class VolumeBounds:
    lower: Fraction
    upper: Fraction
    depth: int

    @property
    def gap(self) -> Fraction:
        return self.upper - self.lower

    def __post_init__(self):
        if not 0 <= self.lower <= self.upper:
            raise ValueError(f"inconsistent bounds {self.lower} > {self.upper}")


@dataclass
class ProductSetApprox:
    inner: ColumnSet
    outer: ColumnSet
    bounds: VolumeBounds
    history: list = field(default_factory=list)  # (depth, lower, upper) per round, unclamped


def refine(A: BoxUnion, B: BoxUnion, law: ProductLaw, max_depth: int,
           budget: int = DEFAULT_BUDGET, start_depth: int = 0) -> Iterator[ProductSetApprox]:
    """Yield approximations for depth = start_depth, start_depth + 1, ...

    Reported bounds are the running best, so they are monotone in depth.
    Raises BudgetExceeded (with ``best`` set) when the next depth would need
    more than ``budget`` cell pairs.
    """
    _check(A, B, law)
    best: ProductSetApprox | None = None
    history: list = []
    for depth in range(start_depth, max_depth + 1):
        n = pair_count(A, B, law, depth)
        if n > budget:
            raise BudgetExceeded(n, budget, best)
        res = _run_depth(A, B, law, depth)
        lo, hi = res.inner.volume(), res.outer.volume()
        history.append((depth, lo, hi))
        if best is None:
            inner, outer = res.inner, res.outer
        else:
            inner = res.inner if lo > best.bounds.lower else best.inner
            outer = res.outer if hi < best.bounds.upper else best.outer
        best = ProductSetApprox(inner, outer, VolumeBounds(inner.volume(), outer.volume(), depth), list(history))
        yield best
        if not split_axes(law)[0] and not split_axes(law)[1]:
            return  # nothing to subdivide: further depths are identical


def product_volume_bounds(A: BoxUnion, B: BoxUnion, law: ProductLaw, tol, max_depth: int,
                          budget: int = DEFAULT_BUDGET) -> ProductSetApprox:
    """Refine until gap <= tol * upper or max_depth is reached."""
    tol = q(tol)
    if tol <= 0:
        raise ValueError("tolerance must be positive")
    approx = None
    for approx in refine(A, B, law, max_depth, budget):
        b = approx.bounds
        if b.gap <= tol * b.upper:
            break
    return approx


def euclidean_sum_volume(A: BoxUnion, B: BoxUnion) -> Fraction:
    return minkowski_sum(A, B).volume()
