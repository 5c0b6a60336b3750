"""Interval arithmetic: exact rational intervals and an outward-rounded float engine.

The exact classes are used for small, report-level enclosures. The numpy
functions evaluate many boxes at once; every operation widens its result by
one ulp in each direction, which dominates round-to-nearest error, so the
float enclosures remain sound.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .errors import DimensionMismatch
from .rational import float_down, float_up, q


@dataclass(frozen=True)
class Interval:
    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        object.__setattr__(self, "lo", q(self.lo))
        object.__setattr__(self, "hi", q(self.hi))
        if self.lo > self.hi:
            raise ValueError(f"empty interval [{self.lo}, {self.hi}]")

    @classmethod
    def point(cls, x) -> "Interval":
        return cls(x, x)

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    @property
    def mid(self) -> Fraction:
        return (self.lo + self.hi) / 2

    def contains(self, x) -> bool:
        return self.lo <= x <= self.hi

    def encloses(self, other: "Interval") -> bool:
        return self.lo <= other.lo and other.hi <= self.hi

    def __add__(self, other):
        other = _as_interval(other)
        return Interval(self.lo + other.lo, self.hi + other.hi)

    __radd__ = __add__

    def __neg__(self):
        return Interval(-self.hi, -self.lo)

    def __sub__(self, other):
        return self + (-_as_interval(other))

    def __mul__(self, other):
        other = _as_interval(other)
        p = (self.lo * other.lo, self.lo * other.hi, self.hi * other.lo, self.hi * other.hi)
        return Interval(min(p), max(p))

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n == 0:
            return Interval(1, 1)
        a, b = self.lo**n, self.hi**n
        if n % 2:
            return Interval(a, b)
        if self.lo <= 0 <= self.hi:
            return Interval(0, max(a, b))
        return Interval(min(a, b), max(a, b))

    def __str__(self):
        return f"[{self.lo}, {self.hi}]"


def _as_interval(x) -> Interval:
    return x if isinstance(x, Interval) else Interval.point(x)


class IntervalBox(tuple):
    """A d-tuple of Intervals."""

    def __new__(cls, intervals: Iterable):
        items = []
        for iv in intervals:
            if not isinstance(iv, Interval):
                lo, hi = iv
                iv = Interval(lo, hi)
            items.append(iv)
        return super().__new__(cls, items)

    @classmethod
    def point(cls, x: Sequence) -> "IntervalBox":
        return cls(Interval.point(v) for v in x)

    @property
    def dim(self) -> int:
        return len(self)

    def contains(self, x: Sequence) -> bool:
        if len(x) != len(self):
            raise DimensionMismatch(f"point of dimension {len(x)} vs box of dimension {len(self)}")
        return all(iv.contains(v) for iv, v in zip(self, x))

    def encloses(self, other: "IntervalBox") -> bool:
        return all(a.encloses(b) for a, b in zip(self, other))


# -- vectorised float engine ---------------------------------------------------
#
# Directed rounding without changing the FPU mode: TwoSum and Veltkamp/Dekker
# TwoProduct give the exact rounding error of each operation, so a result is
# stepped one ulp outward only when it actually erred in the wrong direction.
# Exact operations (common with dyadic data) therefore stay exact.

_NEG = -np.inf
_POS = np.inf
_SPLIT = 134217729.0  # 2**27 + 1
_BIG = 2.0**500
_TINY = 2.0**-900


def widen(lo: np.ndarray, hi: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    return np.nextafter(lo, _NEG), np.nextafter(hi, _POS)


def _sum_err(a, b):
    s = a + b
    bb = s - a
    err = (a - (s - bb)) + (b - bb)
    return s, err, ~np.isfinite(s)


def _split(a):
    c = _SPLIT * a
    hi = c - (c - a)
    return hi, a - hi


def _prod_err(a, b):
    p = a * b
    ah, al = _split(a)
    bh, bl = _split(b)
    err = ((ah * bh - p) + ah * bl + al * bh) + al * bl
    unsafe = (np.abs(a) > _BIG) | (np.abs(b) > _BIG) | ~np.isfinite(p)
    unsafe |= (np.abs(p) < _TINY) & (a != 0) & (b != 0)
    return p, err, unsafe


def _down(r, err, unsafe):
    return np.where(unsafe | (err < 0), np.nextafter(r, _NEG), r)


def _up(r, err, unsafe):
    return np.where(unsafe | (err > 0), np.nextafter(r, _POS), r)


def add_down(a, b):
    return _down(*_sum_err(a, b))


def add_up(a, b):
    return _up(*_sum_err(a, b))


def mul_down(a, b):
    return _down(*_prod_err(a, b))


def mul_up(a, b):
    return _up(*_prod_err(a, b))


def f_add(alo, ahi, blo, bhi):
    return add_down(alo, blo), add_up(ahi, bhi)


def f_mul(alo, ahi, blo, bhi):
    lo = hi = None
    for x, y in ((alo, blo), (alo, bhi), (ahi, blo), (ahi, bhi)):
        p, err, unsafe = _prod_err(x, y)
        dn, upv = _down(p, err, unsafe), _up(p, err, unsafe)
        lo = dn if lo is None else np.minimum(lo, dn)
        hi = upv if hi is None else np.maximum(hi, upv)
    return lo, hi


def _pow_nonneg(m, n: int, up: bool):
    # monotone on m >= 0, so chaining directed products stays directed
    op = mul_up if up else mul_down
    r = m
    for _ in range(n - 1):
        r = op(r, m)
    return r


def f_pow(lo, hi, n: int):
    if n == 1:
        return lo, hi
    if n % 2:
        rlo = np.where(lo >= 0, _pow_nonneg(np.abs(lo), n, False), -_pow_nonneg(np.abs(lo), n, True))
        rhi = np.where(hi >= 0, _pow_nonneg(np.abs(hi), n, True), -_pow_nonneg(np.abs(hi), n, False))
        return rlo, rhi
    a, b = np.abs(lo), np.abs(hi)
    straddle = (lo <= 0) & (hi >= 0)
    rlo = np.where(straddle, 0.0, _pow_nonneg(np.minimum(a, b), n, False))
    return rlo, _pow_nonneg(np.maximum(a, b), n, True)


def f_scale(c: Fraction, lo, hi):
    """Multiply by the exact rational c (exact whenever c and the products are representable)."""
    clo, chi = float_down(c), float_up(c)
    return f_mul(np.full_like(lo, clo), np.full_like(hi, chi), lo, hi)
