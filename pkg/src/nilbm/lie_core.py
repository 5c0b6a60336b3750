"""Nilpotent Lie algebras given by exact structure constants.

Indices are 0-based internally; everything user-facing (error triples, JSON
files, catalog descriptions) is 1-based.
"""

from __future__ import annotations

import itertools
import json
import re
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Mapping

from . import linalg
from .errors import (
    AlgebraError,
    AntisymmetryViolation,
    JacobiViolation,
    NotNilpotent,
    NotStratifiable,
    UnknownGroup,
)
from .rational import q, qstr


@dataclass(frozen=True)
class StructureConstants:
    """[X_i, X_j] = sum_k c[(i, j, k)] X_k, sparse, 0-based, zeros omitted."""

    dim: int
    coeffs: Mapping[tuple[int, int, int], Fraction] = field(default_factory=dict)
    name: str = ""

    def __post_init__(self):
        if self.dim < 1:
            raise AlgebraError("dimension must be positive")
        clean = {}
        for (i, j, k), c in self.coeffs.items():
            if not all(0 <= t < self.dim for t in (i, j, k)):
                raise AlgebraError(f"index {(i + 1, j + 1, k + 1)} out of range for dim {self.dim}")
            c = q(c)
            if c:
                clean[(i, j, k)] = c
        object.__setattr__(self, "coeffs", dict(sorted(clean.items())))

    @classmethod
    def from_brackets(cls, dim: int, brackets: Mapping[tuple[int, int], Mapping[int, object]], name: str = ""):
        """Build from 1-based ``{(i, j): {k: c}}`` with i < j; antisymmetry is implied."""
        coeffs = {}
        for (i, j), terms in brackets.items():
            if not i < j:
                raise AlgebraError(f"bracket ({i}, {j}) must be given with i < j")
            for k, c in terms.items():
                c = q(c)
                coeffs[(i - 1, j - 1, k - 1)] = c
                coeffs[(j - 1, i - 1, k - 1)] = -c
        return cls(dim, coeffs, name)

    def c(self, i: int, j: int, k: int) -> Fraction:
        return self.coeffs.get((i, j, k), linalg.ZERO)

    def bracket_basis(self, i: int, j: int) -> tuple:
        out = [linalg.ZERO] * self.dim
        for k in range(self.dim):
            out[k] = self.c(i, j, k)
        return tuple(out)

    def bracket(self, u, v) -> tuple:
        out = [linalg.ZERO] * self.dim
        for (i, j, k), c in self.coeffs.items():
            if u[i] and v[j]:
                out[k] += c * u[i] * v[j]
        return tuple(out)

    def is_abelian(self) -> bool:
        return not self.coeffs

    def in_basis(self, rows) -> "StructureConstants":
        """Constants with respect to the basis whose vectors are ``rows``."""
        inv = linalg.inverse(rows)
        d = self.dim
        coeffs = {}
        for a in range(d):
            for b in range(d):
                x = self.bracket(rows[a], rows[b])
                if linalg.is_zero(x):
                    continue
                coords = linalg.matmul([x], inv)[0]
                for k, c in enumerate(coords):
                    if c:
                        coeffs[(a, b, k)] = c
        return StructureConstants(d, coeffs, self.name)


@dataclass(frozen=True)
class CentralSeries:
    subspaces: tuple  # RREF bases of g_0, g_1, ..., g_r (= 0)
    dims: tuple[int, ...]

    @property
    def step(self) -> int:
        return len(self.dims) - 1

    def n(self, i: int) -> int:
        return self.dims[i] if i < len(self.dims) else 0


@dataclass(frozen=True)
class MalcevBasis:
    change: tuple  # rows: new basis vectors X_1..X_d in input coordinates
    marks: tuple[int, ...]  # 0-based position where g_i starts in the new order
    series: CentralSeries

    @property
    def is_identity(self) -> bool:
        d = len(self.change)
        return all(self.change[i] == linalg.unit(d, i) for i in range(d))


@dataclass(frozen=True)
class Stratification:
    layers: tuple  # bases of V_1..V_r in Malcev coordinates
    weights: tuple[int, ...]  # layer index of each adapted coordinate
    Q: int
    basis: tuple  # adapted basis (layer bases concatenated), Malcev coordinates
    malcev: MalcevBasis

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(len(v) for v in self.layers)

    @property
    def change(self) -> tuple:
        """Adapted basis expressed in the original input coordinates."""
        return tuple(linalg.matmul(list(self.basis), list(self.malcev.change)))


# -- validation ---------------------------------------------------------------


def validate(sc: StructureConstants) -> None:
    """Raise AntisymmetryViolation / JacobiViolation for the first failure."""
    d = sc.dim
    for i in range(d):
        for j in range(i, d):
            for k in range(d):
                if sc.c(i, j, k) != -sc.c(j, i, k):
                    raise AntisymmetryViolation(i + 1, j + 1, k + 1)
    basis = [sc.bracket_basis(i, j) for i in range(d) for j in range(d)]

    def br(i, v):
        # [X_i, v]
        out = [linalg.ZERO] * d
        for j, vj in enumerate(v):
            if vj:
                row = basis[i * d + j]
                for k in range(d):
                    if row[k]:
                        out[k] += vj * row[k]
        return out

    for i, j, k in itertools.combinations(range(d), 3):
        total = [a + b + c for a, b, c in zip(
            br(i, basis[j * d + k]), br(j, basis[k * d + i]), br(k, basis[i * d + j]))]
        for comp, val in enumerate(total):
            if val:
                raise JacobiViolation(i + 1, j + 1, k + 1, comp + 1)


def is_valid(sc: StructureConstants) -> bool:
    try:
        validate(sc)
    except AlgebraError:
        return False
    return True


# -- series and bases ---------------------------------------------------------


def lower_central_series(sc: StructureConstants) -> CentralSeries:
    d = sc.dim
    current, _ = linalg.rref([linalg.unit(d, i) for i in range(d)])
    subspaces = [tuple(current)]
    dims = [d]
    while current:
        gens = [sc.bracket(linalg.unit(d, a), v) for a in range(d) for v in current]
        nxt, _ = linalg.rref(g for g in gens if not linalg.is_zero(g))
        if len(nxt) == len(current):
            raise NotNilpotent(tuple(dims))
        current = nxt
        subspaces.append(tuple(current))
        dims.append(len(current))
    return CentralSeries(tuple(subspaces), tuple(dims))


def malcev_basis(sc: StructureConstants) -> MalcevBasis:
    """Strong Malcev basis: complements of g_{i+1} in g_i, top layer first."""
    series = lower_central_series(sc)
    r = series.step
    blocks = [None] * r
    tail: list = []
    for i in range(r - 1, -1, -1):
        blocks[i] = linalg.extend(tail, series.subspaces[i])
        tail = list(blocks[i]) + tail
    change = tuple(v for b in blocks for v in b)
    d = sc.dim
    marks = tuple(d - n for n in series.dims[:-1])
    return MalcevBasis(change, marks, series)


def reorder(sc: StructureConstants, basis: MalcevBasis) -> StructureConstants:
    if basis.is_identity:
        return sc
    return sc.in_basis(list(basis.change))


def malcev_ordered(sc: StructureConstants) -> tuple[StructureConstants, MalcevBasis]:
    mb = malcev_basis(sc)
    return reorder(sc, mb), mb


def check_malcev(sc: StructureConstants, basis: MalcevBasis) -> bool:
    """Exact check of the tail-ideal and h_{n_i} = g_i properties."""
    d = sc.dim
    rows = list(basis.change)
    if linalg.rank(rows) != d:
        return False
    for n in range(1, d + 1):
        tail = rows[d - n:]
        for a in range(d):
            for t in tail:
                if not linalg.in_span(tail, sc.bracket(linalg.unit(d, a), t)):
                    return False
    for gi, ni in zip(basis.series.subspaces, basis.series.dims):
        if ni and not linalg.same_span(rows[d - ni:], list(gi)):
            return False
    return True


def stratify(sc: StructureConstants) -> Stratification:
    """Build and check one candidate stratification.

    V_1 is spanned by the Malcev vectors outside g_1; V_{i+1} = [V_1, V_i].
    Raises NotStratifiable if the candidate is not a direct-sum decomposition.
    """
    scm, mb = malcev_ordered(sc)
    d = sc.dim
    n1 = mb.series.n(1)
    v1 = [linalg.unit(d, i) for i in range(d - n1)]
    layers = [tuple(v1)]
    while True:
        gens = [scm.bracket(a, b) for a in v1 for b in layers[-1]]
        nxt, _ = linalg.rref(g for g in gens if not linalg.is_zero(g))
        if not nxt:
            break
        if len(layers) > d:
            raise NotStratifiable("layer recursion did not terminate")
        layers.append(tuple(nxt))
    total = sum(len(v) for v in layers)
    flat = [v for layer in layers for v in layer]
    if total != d:
        raise NotStratifiable(f"layer dimensions {[len(v) for v in layers]} sum to {total}, not {d}")
    if linalg.rank(flat) != d:
        raise NotStratifiable("layers are not in direct sum")
    if len(layers) != mb.series.step:
        raise NotStratifiable("number of layers differs from the nilpotency step")
    weights = tuple(i + 1 for i, layer in enumerate(layers) for _ in layer)
    return Stratification(tuple(layers), weights, sum(weights), tuple(flat), mb)


def homogeneous_dimension(s: Stratification) -> int:
    return sum((i + 1) * len(v) for i, v in enumerate(s.layers))


def stratified_constants(sc: StructureConstants, s: Stratification) -> StructureConstants:
    """Constants in the adapted basis, where dilations act diagonally."""
    scm = reorder(sc, s.malcev)
    d = sc.dim
    if all(s.basis[i] == linalg.unit(d, i) for i in range(d)):
        return scm
    return scm.in_basis(list(s.basis))


# -- catalog ------------------------------------------------------------------


def abelian(d: int) -> StructureConstants:
    return StructureConstants(d, {}, f"abelian({d})")


def heisenberg(n: int) -> StructureConstants:
    """Basis x_1..x_n, y_1..y_n, t with [x_i, y_i] = t."""
    if n < 1:
        raise UnknownGroup(f"heisenberg({n}): n must be >= 1")
    d = 2 * n + 1
    return StructureConstants.from_brackets(d, {(i, n + i): {d: 1} for i in range(1, n + 1)}, f"heisenberg({n})")


def engel() -> StructureConstants:
    return StructureConstants.from_brackets(4, {(1, 2): {3: 1}, (1, 3): {4: 1}}, "engel")


def lyndon_words(rank: int, max_len: int) -> list[tuple[int, ...]]:
    """Lyndon words over 1..rank of length <= max_len, by length then lex order."""
    words = []
    w = [0]
    while w:
        w[-1] += 1
        words.append(tuple(w))
        m = len(w)
        while len(w) < max_len:
            w.append(w[len(w) - m])
        while w and w[-1] == rank:
            w.pop()
    return sorted(words, key=lambda x: (len(x), x))


def _standard_factor(w):
    # longest proper suffix that is Lyndon
    for i in range(1, len(w)):
        s = w[i:]
        if _is_lyndon(s):
            return w[:i], s
    raise ValueError(w)


def _is_lyndon(w) -> bool:
    return all(w < w[i:] + w[:i] for i in range(1, len(w))) and len(w) > 0


def free_nilpotent(rank: int, step: int) -> StructureConstants:
    """Free nilpotent Lie algebra via the Lyndon basis inside the truncated tensor algebra."""
    if rank < 1 or step < 1:
        raise UnknownGroup(f"free({rank},{step}) needs rank, step >= 1")
    words = lyndon_words(rank, step)
    tensors: dict[tuple, dict[tuple, Fraction]] = {}

    def commutator(a, b):
        out: dict[tuple, Fraction] = {}
        for u, cu in a.items():
            for v, cv in b.items():
                if len(u) + len(v) > step:
                    continue
                out[u + v] = out.get(u + v, 0) + cu * cv
                out[v + u] = out.get(v + u, 0) - cu * cv
        return {k: c for k, c in out.items() if c}

    for w in words:
        if len(w) == 1:
            tensors[w] = {w: Fraction(1)}
        else:
            u, v = _standard_factor(w)
            tensors[w] = commutator(tensors[u], tensors[v])
    coords = sorted({k for t in tensors.values() for k in t}, key=lambda x: (len(x), x))
    index = {k: i for i, k in enumerate(coords)}
    rows = []
    for w in words:
        row = [linalg.ZERO] * len(coords)
        for k, c in tensors[w].items():
            row[index[k]] = c
        rows.append(tuple(row))
    d = len(words)
    coeffs = {}
    for a in range(d):
        for b in range(d):
            x = commutator(tensors[words[a]], tensors[words[b]])
            if not x:
                continue
            v = [linalg.ZERO] * len(coords)
            for k, c in x.items():
                v[index[k]] = c
            sol = linalg.solve(rows, v)
            if sol is None:
                raise AlgebraError("Lyndon basis failed to span a bracket")
            for k, c in enumerate(sol):
                if c:
                    coeffs[(a, b, k)] = c
    return StructureConstants(d, coeffs, f"free({rank},{step})")


_CATALOG_PATTERNS = [
    (re.compile(r"abelian\((\d+)\)"), lambda m: abelian(int(m.group(1)))),
    (re.compile(r"heisenberg\((\d+)\)"), lambda m: heisenberg(int(m.group(1)))),
    (re.compile(r"engel"), lambda m: engel()),
    (re.compile(r"free23"), lambda m: _named(free_nilpotent(2, 3), "free23")),
    (re.compile(r"free\((\d+),(\d+)\)"), lambda m: free_nilpotent(int(m.group(1)), int(m.group(2)))),
]

CATALOG_NAMES = ("abelian(d)", "heisenberg(n)", "engel", "free23", "free(rank,step)")


def _named(sc: StructureConstants, name: str) -> StructureConstants:
    return StructureConstants(sc.dim, sc.coeffs, name)


def catalog(name: str) -> StructureConstants:
    key = re.sub(r"\s+", "", name.lower())
    for pat, build in _CATALOG_PATTERNS:
        m = pat.fullmatch(key)
        if m:
            return build(m)
    raise UnknownGroup(f"unknown group {name!r}; known: {', '.join(CATALOG_NAMES)}")


# -- JSON ---------------------------------------------------------------------


def constants_to_dict(sc: StructureConstants) -> dict:
    brackets = []
    for i in range(sc.dim):
        for j in range(i + 1, sc.dim):
            terms = {str(k + 1): qstr(sc.c(i, j, k)) for k in range(sc.dim) if sc.c(i, j, k)}
            if terms:
                brackets.append({"i": i + 1, "j": j + 1, "terms": terms})
    return {"dim": sc.dim, "brackets": brackets}


def constants_from_dict(doc: dict, name: str = "") -> StructureConstants:
    try:
        dim = int(doc["dim"])
        brackets = {}
        for entry in doc.get("brackets", []):
            key = (int(entry["i"]), int(entry["j"]))
            if key in brackets:
                raise ValueError(f"duplicate bracket {key}")
            brackets[key] = {int(k): q(v) for k, v in entry["terms"].items()}
    except (KeyError, TypeError, ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"malformed structure-constants document: {exc}") from exc
    return StructureConstants.from_brackets(dim, brackets, name)


def load_constants(path: str | Path) -> StructureConstants:
    with open(path) as fh:
        doc = json.load(fh)
    return constants_from_dict(doc, Path(path).stem)


def dump_constants(sc: StructureConstants) -> str:
    return json.dumps(constants_to_dict(sc), indent=2, sort_keys=True)

