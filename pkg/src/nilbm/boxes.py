"""Axis-aligned rational boxes and their finite unions."""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Sequence

from .errors import DimensionMismatch, NonpositiveLambda
from .rational import q, qstr


@dataclass(frozen=True, order=True)
class Box:
    lo: tuple
    hi: tuple

    def __post_init__(self):
        lo = tuple(q(x) for x in self.lo)
        hi = tuple(q(x) for x in self.hi)
        if len(lo) != len(hi):
            raise DimensionMismatch("lo and hi differ in length")
        if any(a > b for a, b in zip(lo, hi)):
            raise ValueError(f"box with lo > hi: {lo} {hi}")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def of(cls, *intervals) -> "Box":
        """Box.of((0, 1), (0, 2)) builds [0,1] x [0,2]."""
        return cls(tuple(a for a, _ in intervals), tuple(b for _, b in intervals))

    @classmethod
    def cube(cls, d: int, lo=0, hi=1) -> "Box":
        return cls((lo,) * d, (hi,) * d)

    @property
    def dim(self) -> int:
        return len(self.lo)

    @property
    def widths(self) -> tuple:
        return tuple(b - a for a, b in zip(self.lo, self.hi))

    def volume(self) -> Fraction:
        v = Fraction(1)
        for w in self.widths:
            v *= w
        return v

    def is_degenerate(self) -> bool:
        return any(a == b for a, b in zip(self.lo, self.hi))

    def contains(self, x: Sequence) -> bool:
        return all(a <= v <= b for a, b, v in zip(self.lo, self.hi, x))

    def contains_box(self, other: "Box") -> bool:
        return all(a <= c and d <= b for a, b, c, d in zip(self.lo, self.hi, other.lo, other.hi))

    def intersect(self, other: "Box") -> "Box | None":
        lo = tuple(max(a, b) for a, b in zip(self.lo, other.lo))
        hi = tuple(min(a, b) for a, b in zip(self.hi, other.hi))
        if any(a > b for a, b in zip(lo, hi)):
            return None
        return Box(lo, hi)

    def __add__(self, other: "Box") -> "Box":
        if self.dim != other.dim:
            raise DimensionMismatch("boxes of different dimension")
        return Box(tuple(a + b for a, b in zip(self.lo, other.lo)), tuple(a + b for a, b in zip(self.hi, other.hi)))

    def to_list(self) -> list:
        return [[qstr(a), qstr(b)] for a, b in zip(self.lo, self.hi)]


class BoxUnion:
    """Normalized finite union of closed boxes.

    Full-dimensional boxes are stored in a canonical decomposition with
    disjoint interiors. Degenerate boxes (measure zero) are kept in a separate
    sorted list unless they lie inside the full-dimensional part.
    """

    __slots__ = ("dim", "boxes", "degenerate")

    def __init__(self, dim: int, boxes: Iterable[Box] = ()):
        boxes = list(boxes)
        for b in boxes:
            if b.dim != dim:
                raise DimensionMismatch(f"box of dimension {b.dim} in a union of dimension {dim}")
        self.dim = dim
        full = [b for b in boxes if not b.is_degenerate()]
        self.boxes = tuple(_normalize(full, 0))
        degen = sorted(set(b for b in boxes if b.is_degenerate()))
        self.degenerate = tuple(b for b in degen if not any(f.contains_box(b) for f in self.boxes))

    @classmethod
    def of(cls, *boxes: Box) -> "BoxUnion":
        if not boxes:
            raise ValueError("use BoxUnion(dim) for an empty union")
        return cls(boxes[0].dim, boxes)

    def all_boxes(self) -> tuple:
        return self.boxes + self.degenerate

    def normalize(self) -> "BoxUnion":
        return BoxUnion(self.dim, self.all_boxes())

    def volume(self) -> Fraction:
        return sum((b.volume() for b in self.boxes), Fraction(0))

    def is_empty(self) -> bool:
        return not self.boxes and not self.degenerate

    def contains(self, x: Sequence) -> bool:
        return any(b.contains(x) for b in self.all_boxes())

    def hull(self) -> Box:
        bs = self.all_boxes()
        if not bs:
            raise ValueError("empty union has no hull")
        return Box(tuple(min(b.lo[i] for b in bs) for i in range(self.dim)),
                   tuple(max(b.hi[i] for b in bs) for i in range(self.dim)))

    def intersection_volume(self, box: Box) -> Fraction:
        total = Fraction(0)
        for b in self.boxes:
            c = b.intersect(box)
            if c is not None:
                total += c.volume()
        return total

    def __eq__(self, other):
        return isinstance(other, BoxUnion) and (self.dim, self.boxes, self.degenerate) == (
            other.dim, other.boxes, other.degenerate)

    def __hash__(self):
        return hash((self.dim, self.boxes, self.degenerate))

    def __len__(self):
        return len(self.boxes) + len(self.degenerate)

    def __iter__(self):
        return iter(self.all_boxes())

    def __repr__(self):
        return f"BoxUnion(dim={self.dim}, boxes={len(self.boxes)}, degenerate={len(self.degenerate)})"


def _normalize(boxes: list[Box], axis: int) -> list[Box]:
    """Canonical slab decomposition along ``axis``, recursing on the rest.

    Adjacent slabs with identical cross-sections are merged, so the output
    depends only on the point set (up to measure zero).
    """
    return [Box(lo, hi) for lo, hi in _slabs([(b.lo, b.hi) for b in boxes], axis)]


def _slabs(boxes: list[tuple], axis: int) -> list[tuple]:
    # boxes and results are (lo, hi) tuples restricted to coordinates >= axis
    if not boxes:
        return []
    last = len(boxes[0][0]) == 1
    cuts = sorted({lo[0] for lo, _ in boxes} | {hi[0] for _, hi in boxes})
    merged: list[list] = []
    for a, b in zip(cuts, cuts[1:]):
        members = [(lo[1:], hi[1:]) for lo, hi in boxes if lo[0] <= a and b <= hi[0]]
        if not members:
            continue
        section = ((), ()) if last else tuple(_slabs(members, axis + 1))
        if merged and merged[-1][1] == a and merged[-1][2] == section:
            merged[-1][1] = b
        else:
            merged.append([a, b, section])
    out = []
    for a, b, section in merged:
        if last:
            out.append(((a,), (b,)))
        else:
            out.extend(((a,) + lo, (b,) + hi) for lo, hi in section)
    return out


def union(a: BoxUnion, b: BoxUnion) -> BoxUnion:
    _same_dim(a, b)
    return BoxUnion(a.dim, a.all_boxes() + b.all_boxes())


def minkowski_sum(a: BoxUnion, b: BoxUnion) -> BoxUnion:
    """Exact Euclidean sum A + B."""
    _same_dim(a, b)
    return BoxUnion(a.dim, [x + y for x in a.all_boxes() for y in b.all_boxes()])


def translate(u: BoxUnion, v: Sequence) -> BoxUnion:
    t = Box(tuple(v), tuple(v))
    return BoxUnion(u.dim, [b + t for b in u.all_boxes()])


def dilate_union(u: BoxUnion, weights: Sequence[int], lam) -> BoxUnion:
    """Image under x_i -> lam^{w_i} x_i; boxes map to boxes."""
    lam = q(lam)
    if lam <= 0:
        raise NonpositiveLambda(f"dilation factor must be positive, got {lam}")
    if len(weights) != u.dim:
        raise DimensionMismatch("weights do not match set dimension")
    s = [lam**w for w in weights]
    return BoxUnion(u.dim, [Box(tuple(x * c for x, c in zip(b.lo, s)), tuple(x * c for x, c in zip(b.hi, s)))
                            for b in u.all_boxes()])


def _same_dim(a: BoxUnion, b: BoxUnion) -> None:
    if a.dim != b.dim:
        raise DimensionMismatch(f"sets of dimension {a.dim} and {b.dim}")


# -- JSON ---------------------------------------------------------------------


def union_to_dict(u: BoxUnion) -> dict:
    return {"dim": u.dim, "boxes": [b.to_list() for b in u.all_boxes()]}


def union_from_dict(doc: dict) -> BoxUnion:
    try:
        d = int(doc["dim"])
        boxes = []
        for spec in doc["boxes"]:
            if len(spec) != d:
                raise DimensionMismatch(f"box with {len(spec)} intervals in a set of dimension {d}")
            boxes.append(Box(tuple(q(lo) for lo, _ in spec), tuple(q(hi) for _, hi in spec)))
        return BoxUnion(d, boxes)
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed set document: {exc}") from exc


def load_union(path: str | Path) -> BoxUnion:
    with open(path) as fh:
        return union_from_dict(json.load(fh))


def dump_union(u: BoxUnion) -> str:
    return json.dumps(union_to_dict(u), indent=2)
