"""Verdicts, root brackets and JSON-friendly report rendering."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .rational import decimal_str, mth_root, qstr, root_bracket

HOLDS = "holds"
FAILS = "fails"
INCONCLUSIVE = "inconclusive"


def rat(x: Fraction | None) -> dict | None:
    """Authoritative rational string plus an advisory decimal."""
    if x is None:
        return None
    x = Fraction(x)
    return {"value": qstr(x), "decimal": decimal_str(x)}


class Target:
    """A real number known through rational brackets that tighten with ``bits``."""

    exact: Fraction | None = None

    def bracket(self, bits: int) -> tuple[Fraction, Fraction]:
        raise NotImplementedError

    def compare(self, x: Fraction) -> int | None:
        """Exact sign of x - target when cheaply available, else None."""
        if self.exact is not None:
            return (x > self.exact) - (x < self.exact)
        return None


class SumOfRootsPower(Target):
    """(a^{1/m} + b^{1/m})^m for nonnegative rationals a, b."""

    def __init__(self, a: Fraction, b: Fraction, m: int):
        self.a, self.b, self.m = Fraction(a), Fraction(b), m
        ra, rb = mth_root(self.a, m), mth_root(self.b, m)
        self.exact = (ra + rb) ** m if ra is not None and rb is not None else None
        if self.exact is None and self.b > 0:
            # (a^{1/m} + b^{1/m})^m = b (r + 1)^m when r = (a/b)^{1/m} is rational
            r = mth_root(self.a / self.b, m)
            if r is not None:
                self.exact = self.b * (r + 1) ** m

    def bracket(self, bits):
        if self.exact is not None:
            return self.exact, self.exact
        alo, ahi = root_bracket(self.a, self.m, bits)
        blo, bhi = root_bracket(self.b, self.m, bits)
        return (alo + blo) ** self.m, (ahi + bhi) ** self.m


class RootOf(Target):
    """R^{1/k} for a nonnegative rational R; comparisons are exact via x^k vs R."""

    def __init__(self, R: Fraction, k: int):
        self.R, self.k = Fraction(R), k
        self.exact = mth_root(self.R, k)

    def bracket(self, bits):
        return root_bracket(self.R, self.k, bits)

    def compare(self, x):
        x = Fraction(x)
        if x < 0:
            return -1
        p = x**self.k
        return (p > self.R) - (p < self.R)


@dataclass
class Verdict:
    kind: str
    margin: Fraction | None = None  # certified: lower - rhs >= margin (holds), upper - rhs <= margin (fails)
    gap: Fraction | None = None  # upper - lower when inconclusive
    rhs_lo: Fraction | None = None
    rhs_hi: Fraction | None = None

    def to_dict(self) -> dict:
        return {"kind": self.kind, "margin": rat(self.margin), "gap": rat(self.gap),
                "rhs_bracket": [rat(self.rhs_lo), rat(self.rhs_hi)]}


def decide(lower: Fraction, upper: Fraction, target: Target, max_bits: int = 4096) -> Verdict:
    """Holds iff lower >= target, Fails iff upper < target, certified either way."""
    lower, upper = Fraction(lower), Fraction(upper)
    e = target.exact
    if e is not None:
        if lower >= e:
            return Verdict(HOLDS, lower - e, None, e, e)
        if upper < e:
            return Verdict(FAILS, upper - e, None, e, e)
        return Verdict(INCONCLUSIVE, None, upper - lower, e, e)
    s_lo, s_up = target.compare(lower), target.compare(upper)
    bits = 64
    while True:
        lo, hi = target.bracket(bits)
        if lower >= hi:
            return Verdict(HOLDS, lower - hi, None, lo, hi)
        if upper < lo:
            return Verdict(FAILS, upper - lo, None, lo, hi)
        undecided = lower < lo and upper >= hi
        if s_lo is not None and s_up is not None:
            # exact signs: keep tightening only while a strict verdict is known to exist
            undecided = s_lo < 0 <= s_up
        if undecided or bits >= max_bits:
            return Verdict(INCONCLUSIVE, None, upper - lower, lo, hi)
        bits *= 2


@dataclass
class Report:
    """One inequality instance: verdict, bounds and provenance."""

    tag: str
    verdict: Verdict
    lower: Fraction | None = None
    upper: Fraction | None = None
    exponent: int | None = None
    depth: int | None = None
    extra: dict = field(default_factory=dict)

    @property
    def kind(self) -> str:
        return self.verdict.kind

    def to_dict(self) -> dict:
        out = {"tag": self.tag, "verdict": self.verdict.to_dict(), "lower": rat(self.lower),
               "upper": rat(self.upper), "exponent": self.exponent, "depth": self.depth}
        out.update({k: _render(v) for k, v in self.extra.items()})
        return out


def _render(v):
    if isinstance(v, Fraction):
        return rat(v)
    if isinstance(v, dict):
        return {k: _render(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_render(x) for x in v]
    if hasattr(v, "to_dict"):
        return v.to_dict()
    return v

