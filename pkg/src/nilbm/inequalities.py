"""Verdicts for Brunn-Minkowski and Prekopa-Leindler type inequalities.

Every verdict is a certificate: Holds means the certified lower bound of the
left side clears the (bracketed) right side, Fails means the certified upper
bound stays below it. Anything else is Inconclusive with the residual gap.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .boxes import Box, BoxUnion, dilate_union, minkowski_sum
from .errors import BudgetExceeded, DimensionMismatch, HypothesisUnverified, HypothesisViolated, OutOfTheoremScope
from .group_law import DilationSpec, ProductLaw, eval_interval, freeze_first
from .interval import IntervalBox
from .rational import decimal_str, q, qstr
from .reports import FAILS, HOLDS, INCONCLUSIVE, Report, RootOf, SumOfRootsPower, Target, Verdict, decide, rat
from .set_arith import DEFAULT_BUDGET, ProductSetApprox, product_volume_bounds, refine, split_axes, subdivide

TAG_BM_TOPDIM = "bm-topological-dimension"
TAG_BM_HOMOG = "bm-homogeneous-exponent"
TAG_BM_EUCLID = "bm-euclidean"
TAG_STRICT = "cylinder-strictness"
TAG_SHARP = "exponent-sharpness"
TAG_REDUCTION = "first-coordinate-reduction"
TAG_PL = "prekopa-leindler"
TAG_CARNOT_ADD = "carnot-bm-additive"
TAG_CARNOT_MUL = "carnot-bm-multiplicative"
TAG_ORDER = "product-order"


def _alpha(alpha) -> tuple[Fraction, int, int]:
    a = q(alpha)
    if not 0 < a < 1:
        raise ValueError(f"alpha must lie in (0, 1), got {a}")
    return a, a.numerator, a.denominator


# -- generic bound-vs-target loop ------------------------------------------------


def _verify_against(A: BoxUnion, B: BoxUnion, law: ProductLaw, target: Target, tol, max_depth: int,
                    budget: int) -> tuple[Verdict, ProductSetApprox | None, str | None]:
    """Refine A*B bounds until the comparison with ``target`` is decided.

    Stops early once the gap is within tol * upper (a smaller gap would not
    change an undecided verdict in practice), at max_depth, or on budget.
    """
    tol = q(tol)
    approx = None
    note = None
    verdict = None
    try:
        for approx in refine(A, B, law, max_depth, budget):
            b = approx.bounds
            verdict = decide(b.lower, b.upper, target)
            if verdict.kind != INCONCLUSIVE or b.gap <= tol * b.upper:
                break
    except BudgetExceeded as exc:
        note = str(exc)
        approx = exc.best
        if approx is None:
            lo, hi = target.bracket(64)
            return Verdict(INCONCLUSIVE, None, None, lo, hi), None, note
        verdict = decide(approx.bounds.lower, approx.bounds.upper, target)
    return verdict, approx, note


def _bm_report(tag, verdict, approx, m, note, extra) -> Report:
    extra = dict(extra)
    if note:
        extra["note"] = note
    if approx is not None:
        extra["history"] = [{"depth": d, "lower": lo, "upper": hi} for d, lo, hi in approx.history]
        return Report(tag, verdict, approx.bounds.lower, approx.bounds.upper, m, approx.bounds.depth, extra)
    return Report(tag, verdict, None, None, m, None, extra)


def bm_verify(A: BoxUnion, B: BoxUnion, law: ProductLaw, m: int, tol="1/100", max_depth: int = 7,
              budget: int = DEFAULT_BUDGET, tag: str | None = None) -> Report:
    """Compare certified bounds on |A*B| with (|A|^{1/m} + |B|^{1/m})^m."""
    if m < 1:
        raise ValueError("exponent m must be a positive integer")
    va, vb = A.volume(), B.volume()
    target = SumOfRootsPower(va, vb, m)
    verdict, approx, note = _verify_against(A, B, law, target, tol, max_depth, budget)
    tag = tag or (TAG_BM_TOPDIM if m == law.d else TAG_BM_HOMOG)
    return _bm_report(tag, verdict, approx, m, note, {"volume_A": va, "volume_B": vb})


def bm_euclidean_check(A: BoxUnion, B: BoxUnion, m: int) -> Report:
    """Classical inequality on the exact Minkowski sum."""
    if A.dim != B.dim:
        raise DimensionMismatch("sets of different dimension")
    s = minkowski_sum(A, B).volume()
    va, vb = A.volume(), B.volume()
    verdict = decide(s, s, SumOfRootsPower(va, vb, m))
    return Report(TAG_BM_EUCLID, verdict, s, s, m, None, {"volume_A": va, "volume_B": vb})


# -- cylinders -------------------------------------------------------------------


def cylinder(base: BoxUnion, fiber: BoxUnion) -> BoxUnion:
    """Product set base x fiber in H^n coordinates (horizontal first, vertical last)."""
    if fiber.dim != 1:
        raise DimensionMismatch("the vertical factor of a cylinder is one-dimensional")
    return BoxUnion(base.dim + 1, [Box(b.lo + f.lo, b.hi + f.hi) for b in base.all_boxes() for f in fiber.all_boxes()])


def _cyl_measure(u: BoxUnion) -> Fraction:
    return u.volume()


# Heisenberg texts often write the vertical term without the factor 1/2; that is a
# linear rescaling of the last coordinate and cannot change a strictness verdict.
VERTICAL_CONVENTION = "vertical term as derived from the BCH series, e.g. (z1 w2 - z2 w1)/2 on H^1"


@dataclass
class StrictReport:
    strict: bool
    product_lower: Fraction | None
    product_upper: Fraction | None
    sum_volume: Fraction
    depth: int | None
    note: str | None = None

    def to_dict(self) -> dict:
        return {"tag": TAG_STRICT, "strict": self.strict, "product_lower": rat(self.product_lower),
                "product_upper": rat(self.product_upper), "sum_volume": rat(self.sum_volume),
                "depth": self.depth, "note": self.note, "convention": VERTICAL_CONVENTION}


def cylinder_strict(A1: BoxUnion, A2: BoxUnion, B1: BoxUnion, B2: BoxUnion, law: ProductLaw,
                    max_depth: int = 7, budget: int = DEFAULT_BUDGET) -> StrictReport:
    """Certify |A.B| > |A+B| for cylinders A = A1 x A2, B = B1 x B2 with |A1|, |B1| > 0."""
    a1, b1 = _cyl_measure(A1), _cyl_measure(B1)
    if a1 == 0 or b1 == 0:
        if _cyl_measure(A2) == 0 and _cyl_measure(B2) == 0:
            raise OutOfTheoremScope(
                "horizontal cylinders with a null horizontal factor: equality behaviour is open, no verdict issued")
        raise HypothesisViolated(f"need |A1| > 0 and |B1| > 0, got |A1| = {a1}, |B1| = {b1}")
    A, B = cylinder(A1, A2), cylinder(B1, B2)
    if A.dim != law.d:
        raise DimensionMismatch("cylinder dimension does not match the law")
    s = minkowski_sum(A, B).volume()
    approx = None
    note = None
    try:
        for approx in refine(A, B, law, max_depth, budget):
            if approx.bounds.lower > s:
                break
    except BudgetExceeded as exc:
        approx, note = exc.best, str(exc)
    if approx is None:
        return StrictReport(False, None, None, s, None, note)
    b = approx.bounds
    return StrictReport(b.lower > s, b.lower, b.upper, s, b.depth, note)


# -- sharpness --------------------------------------------------------------------


def slab(eps, d: int = 3) -> BoxUnion:
    """[0, eps]^{d-1} x [0, 1]."""
    eps = q(eps)
    return BoxUnion.of(Box((0,) * d, (eps,) * (d - 1) + (1,)))


SHARPNESS_COLUMNS = ("eps", "lower", "upper", "rhs", "lower_decimal", "upper_decimal", "rhs_decimal", "verdict")


def sharpness_scan(law: ProductLaw, spec: DilationSpec, eps_list: Iterable, tol="1/100", max_depth: int = 4,
                   budget: int = DEFAULT_BUDGET) -> list[Report]:
    """bm_verify at m = Q on A = B = [0, eps]^{d-1} x [0, 1] for each eps."""
    rows = []
    for eps in eps_list:
        eps = q(eps)
        if not 0 < eps <= 1:
            raise ValueError(f"eps must lie in (0, 1], got {eps}")
        A = slab(eps, law.d)
        r = bm_verify(A, A, law, spec.Q, tol, max_depth, budget, tag=TAG_SHARP)
        r.extra["eps"] = eps
        rows.append(r)
    return rows


def sharpness_csv_rows(rows: Sequence[Report]) -> list[list[str]]:
    """Header plus one row per report. ``rhs`` is the exact rational when the
    right side is rational and empty otherwise; decimal columns are advisory."""
    out = [list(SHARPNESS_COLUMNS)]
    for r in rows:
        v = r.verdict
        exact = v.rhs_lo if v.rhs_lo == v.rhs_hi else None
        out.append([qstr(r.extra["eps"]), _s(r.lower), _s(r.upper), _s(exact), _d(r.lower), _d(r.upper),
                    _d((v.rhs_lo + v.rhs_hi) / 2), v.kind])
    return out


def _s(x) -> str:
    return "" if x is None else qstr(x)


def _d(x) -> str:
    return "" if x is None else decimal_str(x)


# -- reduction lemma ---------------------------------------------------------------


def selector(s1, I: tuple, J: tuple) -> tuple[Fraction, Fraction]:
    """First coordinates (z1, w1) paired with s1 in I + J by the linear selector."""
    a, b = q(I[0]), q(I[1])
    a2, b2 = q(J[0]), q(J[1])
    l, l2 = b - a, b2 - a2
    s1 = q(s1)
    z1 = a if l + l2 == 0 else (s1 - (a + a2)) / (l + l2) * l + a
    return z1, s1 - z1


def depends_on_first(law: ProductLaw) -> bool:
    return any({0, law.d} & p.variables() for p in law.polys)


@dataclass
class ReductionReport:
    full_lower: Fraction
    full_upper: Fraction
    sum_length: Fraction
    s1: Fraction
    z1: Fraction
    w1: Fraction
    tail_lower: Fraction
    tail_upper: Fraction
    inequality: bool
    equality_checked: bool
    equality: bool | None
    grid: list

    def to_dict(self) -> dict:
        return {"tag": TAG_REDUCTION, "full_lower": rat(self.full_lower), "full_upper": rat(self.full_upper),
                "sum_length": rat(self.sum_length), "s1": rat(self.s1), "z1": rat(self.z1), "w1": rat(self.w1),
                "tail_lower": rat(self.tail_lower), "tail_upper": rat(self.tail_upper),
                "inequality": self.inequality, "equality_checked": self.equality_checked,
                "equality": self.equality,
                "grid": [{"s1": rat(s), "lower": rat(lo), "upper": rat(hi)} for s, lo, hi in self.grid]}


def lemma31_verify(I: tuple, J: tuple, A_tail: BoxUnion, B_tail: BoxUnion, law: ProductLaw, tol="1/50",
                   max_depth: int = 6, grid_points: int = 5, budget: int = DEFAULT_BUDGET) -> ReductionReport:
    """Compare |A*B| with |I+J| * |A~ *' B~| for A = I x A~, B = J x B~.

    The reduced product freezes the first coordinates at the selector value
    for s1 on a grid of I + J (endpoints included); the grid point with the
    smallest certified tail volume stands in for the minimiser.
    """
    tol = q(tol)
    d = law.d
    if A_tail.dim != d - 1 or B_tail.dim != d - 1:
        raise DimensionMismatch("tail sets must have dimension d - 1")
    I = (q(I[0]), q(I[1]))
    J = (q(J[0]), q(J[1]))
    A = BoxUnion(d, [Box((I[0],) + b.lo, (I[1],) + b.hi) for b in A_tail.all_boxes()])
    B = BoxUnion(d, [Box((J[0],) + b.lo, (J[1],) + b.hi) for b in B_tail.all_boxes()])
    full = product_volume_bounds(A, B, law, tol, max_depth, budget).bounds
    s_lo, s_hi = I[0] + J[0], I[1] + J[1]
    length = s_hi - s_lo
    n = max(1, grid_points - 1)
    independent = not depends_on_first(law)
    grid = []
    seen = {}
    for k in range(n + 1):
        s1 = s_lo + length * k / n
        z1, w1 = selector(s1, I, J)
        reduced = freeze_first(law, z1, w1)
        key = tuple(reduced.polys)
        if key not in seen:
            seen[key] = product_volume_bounds(A_tail, B_tail, reduced, tol, max_depth, budget).bounds
        tb = seen[key]
        grid.append((s1, tb.lower, tb.upper, z1, w1))
        if independent:
            break  # every s1 gives the same reduced law
    best = min(grid, key=lambda t: (t[2], t[0]))
    s1, t_lo, t_hi, z1, w1 = best
    inequality = full.lower + tol * full.upper >= length * t_lo
    equality = None
    if independent:
        equality = (full.lower >= (1 - tol) * length * t_hi) and (length * t_lo >= (1 - tol) * full.upper)
    return ReductionReport(full.lower, full.upper, length, s1, z1, w1, t_lo, t_hi, inequality, independent,
                           equality, [(g[0], g[1], g[2]) for g in grid])


# -- Prekopa-Leindler --------------------------------------------------------------


class StepFunction:
    """Nonnegative step function: disjoint-interior boxes with rational values."""

    def __init__(self, dim: int, pieces: Iterable[tuple[Box, object]]):
        self.dim = dim
        clean = []
        for box, val in pieces:
            val = q(val)
            if val < 0:
                raise ValueError("step functions must be nonnegative")
            if box.dim != dim:
                raise DimensionMismatch("piece of the wrong dimension")
            if val and not box.is_degenerate():
                clean.append((box, val))
        for i in range(len(clean)):
            for j in range(i + 1, len(clean)):
                c = clean[i][0].intersect(clean[j][0])
                if c is not None and c.volume() > 0:
                    raise ValueError("step-function pieces must have disjoint interiors")
        self.pieces = tuple(sorted(clean, key=lambda t: (t[0].lo, t[0].hi)))

    @classmethod
    def indicator(cls, U: BoxUnion, value=1) -> "StepFunction":
        return cls(U.dim, [(b, value) for b in U.boxes])

    def integral(self) -> Fraction:
        return sum((b.volume() * v for b, v in self.pieces), Fraction(0))

    def support(self) -> BoxUnion:
        return BoxUnion(self.dim, [b for b, _ in self.pieces])

    def superlevel(self, accept) -> BoxUnion:
        return BoxUnion(self.dim, [b for b, v in self.pieces if accept(v)])

    def to_dict(self) -> dict:
        return {"dim": self.dim, "pieces": [{"box": b.to_list(), "value": str(v)} for b, v in self.pieces]}

    @classmethod
    def from_dict(cls, doc: dict) -> "StepFunction":
        try:
            d = int(doc["dim"])
            pieces = []
            for p in doc["pieces"]:
                spec = p["box"]
                pieces.append((Box(tuple(q(a) for a, _ in spec), tuple(q(b) for _, b in spec)), q(p["value"])))
            return cls(d, pieces)
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed step function: {exc}") from exc


@dataclass
class PLReport:
    hypothesis: str  # "verified" | "unverified"
    failing_pair: tuple | None
    lhs: Fraction
    int_f: Fraction
    int_g: Fraction
    alpha: Fraction
    verdict: Verdict
    tag: str = TAG_PL

    @property
    def kind(self) -> str:
        return self.verdict.kind

    def to_dict(self) -> dict:
        return {"tag": self.tag, "hypothesis": self.hypothesis,
                "failing_pair": [b.to_list() for b in self.failing_pair] if self.failing_pair else None,
                "lhs": rat(self.lhs), "int_f": rat(self.int_f), "int_g": rat(self.int_g),
                "alpha": rat(self.alpha), "verdict": self.verdict.to_dict()}


def _hypothesis(f: StepFunction, g: StepFunction, h: StepFunction, p: int, qd: int, law: ProductLaw,
                depth: int, image=None):
    """First (a-cell, b-cell) whose image box is not covered by {h >= f^(1-alpha) g^alpha}, or None."""
    image = image or (lambda a, b: eval_interval(law, _ibox(a), _ibox(b)))
    za, wa = split_axes(law)
    cache: dict = {}
    for abox, fv in f.pieces:
        for bbox, gv in g.pieces:
            need = fv ** (qd - p) * gv**p  # compare h^q against f^(q-p) g^p
            if need not in cache:
                cache[need] = h.superlevel(lambda v: v**qd >= need)
            good = cache[need]
            for a in subdivide(BoxUnion(law.d, [abox]), za, depth):
                for b in subdivide(BoxUnion(law.d, [bbox]), wa, depth):
                    img = image(a, b)
                    box = Box(tuple(iv.lo for iv in img), tuple(iv.hi for iv in img))
                    if box.is_degenerate():
                        continue  # null image, irrelevant for the integral form
                    if good.intersection_volume(box) != box.volume():
                        return a, b
    return None


def _ibox(b: Box) -> IntervalBox:
    return IntervalBox(zip(b.lo, b.hi))


def pl_verify(f: StepFunction, g: StepFunction, h: StepFunction, alpha, law: ProductLaw, depth: int = 0,
              dilations: tuple | None = None, raise_unverified: bool = False) -> PLReport:
    """Check the pointwise hypothesis conservatively, then the integral inequality exactly.

    With ``dilations = (spec, form)`` the hypothesis is taken at
    delta_{1-alpha}(a) * delta_alpha(b) and the constant of the dilated
    corollary is used instead.
    """
    a, p, qd = _alpha(alpha)
    for fn in (f, g, h):
        if fn.dim != law.d:
            raise DimensionMismatch("step functions must match the law dimension")
    image = None
    if dilations is not None:
        spec = dilations
        image = _dilated_image(law, spec, a)
    bad = _hypothesis(f, g, h, p, qd, law, depth, image)
    F, G, H = f.integral(), g.integral(), h.integral()
    d = law.d
    if dilations is None:
        # H >= (1-a)^{-d(1-a)} a^{-d a} F^{1-a} G^a, raised to the power q
        R = F ** (qd - p) * G**p / ((1 - a) ** (d * (qd - p)) * a ** (d * p))
    else:
        Qd = dilations.Q - d
        R = (1 - a) ** (Qd * (qd - p)) * a ** (Qd * p) * F ** (qd - p) * G**p
    verdict = decide(H, H, RootOf(R, qd))
    if bad is not None:
        if raise_unverified:
            raise HypothesisUnverified(bad)
        verdict = Verdict(INCONCLUSIVE, None, None, verdict.rhs_lo, verdict.rhs_hi)
        return PLReport("unverified", bad, H, F, G, a, verdict)
    return PLReport("verified", None, H, F, G, a, verdict)


def _dilated_image(law: ProductLaw, spec: DilationSpec, a: Fraction):
    def image(abox: Box, bbox: Box):
        da = dilate_union(BoxUnion(law.d, [abox]), spec.weights, 1 - a).all_boxes()[0]
        db = dilate_union(BoxUnion(law.d, [bbox]), spec.weights, a).all_boxes()[0]
        return eval_interval(law, _ibox(da), _ibox(db))

    return image


# -- Carnot corollaries ------------------------------------------------------------


def carnot_bm(A: BoxUnion, B: BoxUnion, alpha, law: ProductLaw, spec: DilationSpec, form: str = "additive",
              tol="1/100", max_depth: int = 7, budget: int = DEFAULT_BUDGET) -> Report:
    """Dilated inequalities on delta_{1-alpha}(A) * delta_alpha(B).

    ``additive``: |.|^{1/d} >= (1-a)^{Q/d}|A|^{1/d} + a^{Q/d}|B|^{1/d}.
    ``multiplicative``: |.| >= (1-a)^{(Q-d)(1-a)} a^{(Q-d)a} |A|^{1-a} |B|^a.
    """
    a, p, qd = _alpha(alpha)
    d, Q = law.d, spec.Q
    Ad = dilate_union(A, spec.weights, 1 - a)
    Bd = dilate_union(B, spec.weights, a)
    va, vb = A.volume(), B.volume()
    vad, vbd = Ad.volume(), Bd.volume()
    assert vad == (1 - a) ** Q * va and vbd == a**Q * vb
    if form == "additive":
        target: Target = SumOfRootsPower(vad, vbd, d)
        tag = TAG_CARNOT_ADD
    elif form == "multiplicative":
        R = (1 - a) ** ((Q - d) * (qd - p)) * a ** ((Q - d) * p) * va ** (qd - p) * vb**p
        target = RootOf(R, qd)
        tag = TAG_CARNOT_MUL
    else:
        raise ValueError(f"unknown form {form!r}; use 'additive' or 'multiplicative'")
    verdict, approx, note = _verify_against(Ad, Bd, law, target, tol, max_depth, budget)
    return _bm_report(tag, verdict, approx, d, note, {
        "alpha": a, "form": form, "volume_A": va, "volume_B": vb,
        "dilated_volume_A": vad, "dilated_volume_B": vbd})


def bm_order_compare(A: BoxUnion, B: BoxUnion, law: ProductLaw, tol="1/100", max_depth: int = 6,
                     budget: int = DEFAULT_BUDGET) -> dict:
    """Run the topological-dimension check for A*B and B*A."""
    ab = bm_verify(A, B, law, law.d, tol, max_depth, budget, tag=TAG_ORDER)
    ba = bm_verify(B, A, law, law.d, tol, max_depth, budget, tag=TAG_ORDER)
    rhs_lo = ab.verdict.rhs_lo
    uppers = [r.upper for r in (ab, ba) if r.upper is not None]
    min_side_ok = all(r.kind != FAILS for r in (ab, ba)) and (not uppers or min(uppers) >= rhs_lo)
    return {"tag": TAG_ORDER, "AB": ab, "BA": ba, "lower_AB": ab.lower, "lower_BA": ba.lower,
            "min_side_check": min_side_ok}


__all__ = [
    "HOLDS", "FAILS", "INCONCLUSIVE", "StepFunction", "PLReport", "ReductionReport", "StrictReport",
    "bm_verify", "bm_euclidean_check", "cylinder", "cylinder_strict", "slab", "sharpness_scan",
    "sharpness_csv_rows", "selector", "lemma31_verify", "pl_verify", "carnot_bm", "bm_order_compare",
]
