"""Polynomial multiplication laws in exponential coordinates of the first kind.

A law on R^d is stored as z * w = z + w + P(z, w). ``derive_bch`` builds P
from structure constants with Dynkin's commutator series, which terminates
exactly at the nilpotency step. Custom laws of the same triangular shape
(P_1 constant, P_i depending on earlier coordinates only) are also
supported; they need not be associative.
"""

from __future__ import annotations

import hashlib
import itertools
import json
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Mapping, Sequence

from . import lie_core
from .errors import DimensionMismatch, NilbmError, NonpositiveLambda
from .interval import Interval, IntervalBox
from .lie_core import MalcevBasis, Stratification, StructureConstants
from .polynomial import Polynomial
from .rational import q, qstr


def var_names(d: int) -> list[str]:
    return [f"z{i + 1}" for i in range(d)] + [f"w{i + 1}" for i in range(d)]


@dataclass(frozen=True)
class CheckResult:
    """Outcome of a structural check. Truthy on success."""

    ok: bool
    offending: object = None
    detail: str = ""

    def __bool__(self) -> bool:
        return self.ok


@dataclass(frozen=True)
class ProductLaw:
    d: int
    n1: int
    polys: tuple  # P_1..P_d, Polynomials in (z_1..z_d, w_1..w_d)
    kind: str = "group"
    name: str = ""
    weights: tuple | None = None  # layer weights when the coordinates are stratified

    def __post_init__(self):
        if len(self.polys) != self.d:
            raise DimensionMismatch(f"law of dimension {self.d} needs {self.d} polynomials")
        for p in self.polys:
            if p.nvars != 2 * self.d:
                raise DimensionMismatch("law polynomials must use 2d variables")
        if self.kind not in ("group", "custom"):
            raise ValueError(f"unknown law kind {self.kind!r}")

    @property
    def names(self) -> list[str]:
        return var_names(self.d)

    def degree(self) -> int:
        return max((p.degree() for p in self.polys), default=0)

    def active_axes(self) -> tuple[set[int], set[int]]:
        """Coordinates of z (resp. w) that some P_i actually depends on."""
        zs, ws = set(), set()
        for p in self.polys:
            for v in p.variables():
                (zs if v < self.d else ws).add(v % self.d)
        return zs, ws

    def describe(self) -> list[str]:
        return [f"P{i + 1} = {p.to_str(self.names)}" for i, p in enumerate(self.polys)]


def custom_law(d: int, F: Sequence, name: str = "", n1: int | None = None) -> ProductLaw:
    """Law z*w = z + w + F(z, w). F entries are Polynomials in 2d variables or constants."""
    polys = tuple(f if isinstance(f, Polynomial) else Polynomial.constant(2 * d, q(f)) for f in F)
    if n1 is None:
        n1 = d - _leading_zero_count(polys)
    return ProductLaw(d, n1, polys, "custom", name)


def _leading_zero_count(polys) -> int:
    k = 0
    for p in polys:
        if p.is_zero():
            k += 1
        else:
            break
    return k


# -- BCH / Dynkin series --------------------------------------------------------


@lru_cache(maxsize=None)
def _word_coefficient(word: tuple[int, ...]) -> Fraction:
    """Dynkin weight of a word over {0 = X, 1 = Y}.

    Sums (-1)^(n-1) / (n * N * prod r_i! s_i!) over all ways to cut the word
    into n nonempty blocks X^r Y^s.
    """
    N = len(word)
    # ways[pos][n]: sum of 1/prod(r! s!) over cuts of word[:pos] into n blocks
    ways: list[dict[int, Fraction]] = [dict() for _ in range(N + 1)]
    ways[0][0] = Fraction(1)
    for start in range(N):
        if not ways[start]:
            continue
        xrun = 0
        while start + xrun < N and word[start + xrun] == 0:
            xrun += 1
        yrun = 0
        while start + xrun + yrun < N and word[start + xrun + yrun] == 1:
            yrun += 1
        blocks = [(r, 0) for r in range(1, xrun + 1)] + [(xrun, s) for s in range(1, yrun + 1)]
        for r, s in blocks:
            end = start + r + s
            wgt = Fraction(1, math.factorial(r) * math.factorial(s))
            for n, c in ways[start].items():
                ways[end][n + 1] = ways[end].get(n + 1, 0) + c * wgt
    total = Fraction(0)
    for n, c in ways[N].items():
        total += Fraction((-1) ** (n - 1), n * N) * c
    return total


def _bracket_polys(sc: StructureConstants, u: Sequence[Polynomial], v: Sequence[Polynomial]) -> tuple:
    d = sc.dim
    nv = u[0].nvars
    out = [Polynomial(nv) for _ in range(d)]
    prods: dict[tuple[int, int], Polynomial] = {}
    for (i, j, k), c in sc.coeffs.items():
        if u[i].is_zero() or v[j].is_zero():
            continue
        key = (i, j)
        if key not in prods:
            prods[key] = u[i] * v[j]
        out[k] = out[k] + prods[key] * c
    return tuple(out)


def bch_polynomials(sc: StructureConstants, depth: int) -> tuple:
    """Components of log(exp Z exp W) - Z - W, truncated at word length ``depth``."""
    d = sc.dim
    nv = 2 * d
    z = tuple(Polynomial.var(nv, i) for i in range(d))
    w = tuple(Polynomial.var(nv, d + i) for i in range(d))
    letters = (z, w)
    memo: dict[tuple[int, ...], tuple] = {}

    def nested(word):
        # right-nested bracket [L1, [L2, [..., LN]]]
        if word in memo:
            return memo[word]
        if len(word) == 1:
            res = letters[word[0]]
        else:
            res = _bracket_polys(sc, letters[word[0]], nested(word[1:]))
        memo[word] = res
        return res

    total = [Polynomial(nv) for _ in range(d)]
    for N in range(2, depth + 1):
        for word in itertools.product((0, 1), repeat=N):
            if word[-1] == word[-2]:
                continue  # innermost bracket [L, L] vanishes
            coef = _word_coefficient(word)
            if not coef:
                continue
            vecp = nested(word)
            for k in range(d):
                if not vecp[k].is_zero():
                    total[k] = total[k] + vecp[k] * coef
    return tuple(total)


def derive_bch(
    sc: StructureConstants,
    basis: MalcevBasis | None = None,
    depth: int | None = None,
    stratification: Stratification | None = None,
) -> ProductLaw:
    """Group law of the simply connected group with Lie algebra ``sc``.

    Coordinates follow the Malcev order (or the adapted basis of
    ``stratification`` when given). ``depth`` overrides the truncation length
    and exists only to inject faults in tests.
    """
    lie_core.validate(sc)
    if stratification is not None:
        work = lie_core.stratified_constants(sc, stratification)
        series = stratification.malcev.series
        weights = stratification.weights
    else:
        if basis is None:
            basis = lie_core.malcev_basis(sc)
        work = lie_core.reorder(sc, basis)
        series = basis.series
        weights = None
    step = series.step
    polys = bch_polynomials(work, step if depth is None else depth)
    law = ProductLaw(sc.dim, series.n(1), polys, "group", sc.name, weights)
    if depth is None:
        _check_identity(law)
    return law


def carnot_law(sc: StructureConstants) -> tuple[ProductLaw, "DilationSpec"]:
    strat = lie_core.stratify(sc)
    law = derive_bch(sc, stratification=strat)
    return law, DilationSpec(strat.weights, strat.Q)


def _check_identity(law: ProductLaw) -> None:
    d = law.d
    zero = [Polynomial(2 * d)] * d
    zs = [Polynomial.var(2 * d, i) for i in range(d)]
    for p in law.polys:
        if not p.compose(zero + zs).is_zero() or not p.compose(zs + zero).is_zero():
            raise NilbmError("derived law violates 0*w = w or z*0 = z")


# -- structural checks ---------------------------------------------------------


def verify_triangular(law: ProductLaw) -> CheckResult:
    d = law.d
    names = law.names
    for i, p in enumerate(law.polys):
        bad = sorted(v for v in p.variables() if v % d >= i)
        if bad:
            # report the lowest offending z before w
            return CheckResult(False, (i + 1, names[bad[0]]), f"P{i + 1} involves {names[bad[0]]}")
    return CheckResult(True)


def verify_first_layer(law: ProductLaw, n1: int | None = None) -> CheckResult:
    n1 = law.n1 if n1 is None else n1
    for i in range(law.d - n1):
        if not law.polys[i].is_zero():
            return CheckResult(False, i + 1, f"P{i + 1} is not identically zero")
    return CheckResult(True)


# -- evaluation ---------------------------------------------------------------


def _check_dims(law: ProductLaw, *vs) -> None:
    for v in vs:
        if len(v) != law.d:
            raise DimensionMismatch(f"expected vectors of length {law.d}, got {len(v)}")


def eval_law(law: ProductLaw, z: Sequence, w: Sequence) -> tuple:
    _check_dims(law, z, w)
    z = [q(x) for x in z]
    w = [q(x) for x in w]
    point = z + w
    return tuple(z[i] + w[i] + law.polys[i].eval(point) for i in range(law.d))


def poly_interval(p: Polynomial, box: Sequence[Interval]) -> Interval:
    """Monomial-wise interval extension of p over ``box``."""
    total = Interval(0, 0)
    for mono, c in p.items():
        t = Interval(c, c)
        for iv, e in zip(box, mono):
            if e:
                t = t * (iv**e)
        total = total + t
    return total


def eval_interval(law: ProductLaw, Z: IntervalBox, W: IntervalBox) -> IntervalBox:
    _check_dims(law, Z, W)
    Z = IntervalBox(Z)
    W = IntervalBox(W)
    box = list(Z) + list(W)
    return IntervalBox(Z[i] + W[i] + poly_interval(law.polys[i], box) for i in range(law.d))


# -- dilations ----------------------------------------------------------------


@dataclass(frozen=True)
class DilationSpec:
    weights: tuple[int, ...]
    Q: int = field(default=-1)

    def __post_init__(self):
        if self.Q == -1:
            object.__setattr__(self, "Q", sum(self.weights))
        if sum(self.weights) != self.Q:
            raise ValueError("weights must sum to Q")

    @classmethod
    def from_stratification(cls, s: Stratification) -> "DilationSpec":
        return cls(tuple(s.weights), s.Q)


def dilate(spec: DilationSpec, lam, x: Sequence) -> tuple:
    lam = q(lam)
    if lam <= 0:
        raise NonpositiveLambda(f"dilation factor must be positive, got {lam}")
    if len(x) != len(spec.weights):
        raise DimensionMismatch("point and dilation weights differ in length")
    return tuple(q(v) * lam**w for v, w in zip(x, spec.weights))


def dilation_determinant(spec: DilationSpec, lam) -> Fraction:
    lam = q(lam)
    if lam <= 0:
        raise NonpositiveLambda(f"dilation factor must be positive, got {lam}")
    out = Fraction(1)
    for w in spec.weights:
        out *= lam**w
    return out


def verify_dilation_automorphism(law: ProductLaw, spec: DilationSpec) -> CheckResult:
    """Symbolic check of P_i(delta z, delta w) = lambda^{w_i} P_i(z, w)."""
    d = law.d
    if len(spec.weights) != d:
        raise DimensionMismatch("dilation weights do not match the law dimension")
    nv = 2 * d + 1
    lam = Polynomial.var(nv, 2 * d)
    subs = [Polynomial.var(nv, k) * lam ** spec.weights[k % d] for k in range(2 * d)]
    embed = list(range(2 * d))
    for i, p in enumerate(law.polys):
        lhs = p.compose(subs)
        rhs = p.embed(nv, embed) * lam ** spec.weights[i]
        diff = lhs - rhs
        if not diff.is_zero():
            point = _nonzero_point(diff)
            return CheckResult(False, {"coordinate": i + 1, "point": [qstr(x) for x in point]},
                               f"coordinate {i + 1}: scaling mismatch")
    return CheckResult(True)


def _nonzero_point(p: Polynomial) -> tuple:
    """A small integer point where p does not vanish (last variable >= 2)."""
    for t in range(2, 50):
        for base in range(1, 6):
            pt = tuple(Fraction(base + k % 3) for k in range(p.nvars - 1)) + (Fraction(t),)
            if p.eval(pt):
                return pt
    raise NilbmError("no witness point found")  # pragma: no cover


# -- associativity --------------------------------------------------------------


def _compose_product(law: ProductLaw, left: list, right: list) -> list:
    return [left[i] + right[i] + law.polys[i].compose(left + right) for i in range(law.d)]


def verify_associativity(
    law: ProductLaw, samples: int = 1000, seed: int = 0, symbolic: bool | None = None
) -> CheckResult:
    """(z*w)*u = z*(w*u), symbolically when the degree is small, else on samples."""
    d = law.d
    if symbolic is None:
        symbolic = law.degree() ** 2 <= 6
    if symbolic:
        nv = 3 * d
        z = [Polynomial.var(nv, i) for i in range(d)]
        w = [Polynomial.var(nv, d + i) for i in range(d)]
        u = [Polynomial.var(nv, 2 * d + i) for i in range(d)]
        zw = _compose_product(law, z, w)
        wu = _compose_product(law, w, u)
        lhs = _compose_product(law, zw, u)
        rhs = _compose_product(law, z, wu)
        for i in range(d):
            if lhs[i] != rhs[i]:
                return CheckResult(False, {"coordinate": i + 1, "mode": "symbolic"},
                                   f"coordinate {i + 1} differs symbolically")
        return CheckResult(True, None, "symbolic")
    rng = random.Random(seed)
    for t in range(samples):
        z, w, u = ([Fraction(rng.randint(-9, 9), rng.randint(1, 5)) for _ in range(d)] for _ in range(3))
        lhs = eval_law(law, eval_law(law, z, w), u)
        rhs = eval_law(law, z, eval_law(law, w, u))
        if lhs != rhs:
            return CheckResult(False, {"z": [qstr(x) for x in z], "w": [qstr(x) for x in w],
                                       "u": [qstr(x) for x in u]}, f"sample {t} fails")
    return CheckResult(True, None, f"{samples} samples")


# -- translations -------------------------------------------------------------


def translation_jacobian(law: ProductLaw, z: Sequence | None = None):
    """Determinant of d(z*w)/dw.

    With ``z`` given, returns a Fraction when the determinant is constant in
    w (always the case for triangular laws) and a Polynomial otherwise.
    Without ``z`` the symbolic determinant in (z, w) is returned.
    """
    d = law.d
    nv = 2 * d
    comps = [Polynomial.var(nv, i) + Polynomial.var(nv, d + i) + law.polys[i] for i in range(d)]
    if z is not None:
        _check_dims(law, z)
        subs = [Polynomial.constant(nv, q(x)) for x in z] + [Polynomial.var(nv, d + i) for i in range(d)]
        comps = [c.compose(subs) for c in comps]
    jac = [[c.derivative(d + j) for j in range(d)] for c in comps]
    det = _poly_det(jac, nv)
    if z is not None and det.is_constant():
        return det.constant_term()
    return det


def _poly_det(mat: list[list[Polynomial]], nv: int) -> Polynomial:
    """Laplace expansion along rows with memoisation over column subsets."""
    n = len(mat)
    memo: dict[int, Polynomial] = {}

    def minor(row: int, cols: int) -> Polynomial:
        if row == n:
            return Polynomial.constant(nv, 1)
        if cols in memo:
            return memo[cols]
        total = Polynomial(nv)
        sign = 1
        for j in range(n):
            if cols & (1 << j):
                continue
            entry = mat[row][j]
            if not entry.is_zero():
                sub = minor(row + 1, cols | (1 << j))
                if not sub.is_zero():
                    total = total + entry * sub * sign
            sign = -sign
        memo[cols] = total
        return total

    return minor(0, 0)


def freeze_first(law: ProductLaw, z1, w1) -> ProductLaw:
    """Reduced law on R^{d-1}: first coordinates of z and w frozen at z1, w1."""
    d = law.d
    if d < 2:
        raise DimensionMismatch("cannot reduce a one-dimensional law")
    nv = 2 * (d - 1)
    subs = [Polynomial.constant(nv, q(z1))] + [Polynomial.var(nv, i) for i in range(d - 1)]
    subs += [Polynomial.constant(nv, q(w1))] + [Polynomial.var(nv, d - 1 + i) for i in range(d - 1)]
    polys = tuple(p.compose(subs) for p in law.polys[1:])
    return ProductLaw(d - 1, d - 1 - _leading_zero_count(polys), polys, "custom",
                      f"{law.name or 'law'} frozen at ({z1}, {w1})")


# -- serialization ------------------------------------------------------------


def law_to_dict(law: ProductLaw) -> dict:
    names = law.names
    polys = []
    for p in law.polys:
        terms = []
        for mono, c in p.items():
            terms.append({"coeff": qstr(c), "monomial": {names[k]: e for k, e in enumerate(mono) if e}})
        polys.append(terms)
    doc = {"dim": law.d, "n1": law.n1, "kind": law.kind, "polys": polys}
    if law.weights is not None:
        doc["weights"] = list(law.weights)
    return doc


def law_from_dict(doc: Mapping) -> ProductLaw:
    try:
        d = int(doc["dim"])
        names = var_names(d)
        index = {n: k for k, n in enumerate(names)}
        polys = []
        for terms in doc["polys"]:
            coeffs = {}
            for t in terms:
                mono = [0] * (2 * d)
                for n, e in t["monomial"].items():
                    mono[index[n]] += int(e)
                coeffs[tuple(mono)] = coeffs.get(tuple(mono), 0) + q(t["coeff"])
            polys.append(Polynomial(2 * d, coeffs))
        weights = doc.get("weights")
        return ProductLaw(d, int(doc["n1"]), tuple(polys), doc.get("kind", "custom"), doc.get("name", ""),
                          tuple(weights) if weights else None)
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed law document: {exc}") from exc


def dump_law(law: ProductLaw) -> str:
    return json.dumps(law_to_dict(law), sort_keys=True, indent=2)


def law_digest(law: ProductLaw) -> str:
    canon = json.dumps(law_to_dict(law), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()
