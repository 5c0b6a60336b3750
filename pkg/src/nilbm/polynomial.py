"""Sparse multivariate polynomials with exact rational coefficients."""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Mapping, Sequence

Monomial = tuple  # exponent vector


class Polynomial:
    """Immutable sparse polynomial in ``nvars`` variables.

    Terms map exponent tuples to nonzero Fractions. Canonical iteration order
    is graded lexicographic (total degree, then earlier variables first).
    """

    __slots__ = ("nvars", "_terms", "_hash")

    def __init__(self, nvars: int, terms: Mapping[Monomial, object] | None = None):
        self.nvars = nvars
        clean: dict[Monomial, Fraction] = {}
        for mono, c in (terms or {}).items():
            mono = tuple(mono)
            if len(mono) != nvars:
                raise ValueError(f"monomial {mono} has wrong arity for {nvars} variables")
            c = Fraction(c)
            if c:
                clean[mono] = clean.get(mono, 0) + c
                if not clean[mono]:
                    del clean[mono]
        self._terms = clean
        self._hash = None

    # -- constructors ---------------------------------------------------------

    @classmethod
    def constant(cls, nvars: int, c=0) -> "Polynomial":
        return cls(nvars, {(0,) * nvars: c})

    @classmethod
    def var(cls, nvars: int, i: int) -> "Polynomial":
        mono = [0] * nvars
        mono[i] = 1
        return cls(nvars, {tuple(mono): 1})

    @classmethod
    def _raw(cls, nvars: int, terms: dict) -> "Polynomial":
        p = cls.__new__(cls)
        p.nvars = nvars
        p._terms = terms
        p._hash = None
        return p

    # -- inspection -----------------------------------------------------------

    @property
    def terms(self) -> dict[Monomial, Fraction]:
        return dict(self._terms)

    def items(self) -> list[tuple[Monomial, Fraction]]:
        return sorted(self._terms.items(), key=lambda t: _grlex_key(t[0]))

    def __len__(self) -> int:
        return len(self._terms)

    def __bool__(self) -> bool:
        return bool(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def degree(self) -> int:
        return max((sum(m) for m in self._terms), default=0)

    def is_constant(self) -> bool:
        return all(not any(m) for m in self._terms)

    def constant_term(self) -> Fraction:
        return self._terms.get((0,) * self.nvars, Fraction(0))

    def variables(self) -> set[int]:
        return {i for m in self._terms for i, e in enumerate(m) if e}

    def weighted_degrees(self, weights: Sequence[int]) -> set[int]:
        return {sum(w * e for w, e in zip(weights, m)) for m in self._terms}

    # -- arithmetic -----------------------------------------------------------

    def _coerce(self, other) -> "Polynomial":
        if isinstance(other, Polynomial):
            if other.nvars != self.nvars:
                raise ValueError("polynomials live in different rings")
            return other
        return Polynomial.constant(self.nvars, Fraction(other))

    def __add__(self, other):
        other = self._coerce(other)
        out = dict(self._terms)
        for m, c in other._terms.items():
            v = out.get(m, 0) + c
            if v:
                out[m] = v
            else:
                out.pop(m, None)
        return Polynomial._raw(self.nvars, out)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial._raw(self.nvars, {m: -c for m, c in self._terms.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, Polynomial):
            c = Fraction(other)
            if not c:
                return Polynomial(self.nvars)
            return Polynomial._raw(self.nvars, {m: c * v for m, v in self._terms.items()})
        other = self._coerce(other)
        out: dict[Monomial, Fraction] = {}
        for m1, c1 in self._terms.items():
            for m2, c2 in other._terms.items():
                m = tuple(a + b for a, b in zip(m1, m2))
                out[m] = out.get(m, 0) + c1 * c2
        return Polynomial._raw(self.nvars, {m: c for m, c in out.items() if c})

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative power")
        result = Polynomial.constant(self.nvars, 1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __eq__(self, other):
        if isinstance(other, Polynomial):
            return self.nvars == other.nvars and self._terms == other._terms
        if isinstance(other, (int, Fraction)):
            return self._terms == Polynomial.constant(self.nvars, other)._terms
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.nvars, frozenset(self._terms.items())))
        return self._hash

    # -- calculus and substitution ---------------------------------------------

    def derivative(self, i: int) -> "Polynomial":
        out = {}
        for m, c in self._terms.items():
            e = m[i]
            if e:
                mm = list(m)
                mm[i] -= 1
                out[tuple(mm)] = c * e
        return Polynomial._raw(self.nvars, out)

    def eval(self, point: Sequence) -> Fraction:
        if len(point) != self.nvars:
            raise ValueError(f"expected {self.nvars} values, got {len(point)}")
        total = Fraction(0)
        for m, c in self._terms.items():
            t = c
            for x, e in zip(point, m):
                if e:
                    t *= x**e
            total += t
        return total

    def compose(self, subs: Sequence["Polynomial"]) -> "Polynomial":
        """Substitute variable i by ``subs[i]`` (all in one common target ring)."""
        if len(subs) != self.nvars:
            raise ValueError("need one substitution per variable")
        target = subs[0].nvars if subs else 0
        cache: dict[tuple[int, int], Polynomial] = {}

        def power(i, e):
            key = (i, e)
            if key not in cache:
                cache[key] = subs[i] ** e
            return cache[key]

        out = Polynomial(target)
        for m, c in self._terms.items():
            t = Polynomial.constant(target, c)
            for i, e in enumerate(m):
                if e:
                    t = t * power(i, e)
            out = out + t
        return out

    def embed(self, nvars: int, positions: Sequence[int]) -> "Polynomial":
        """Move variable i to position ``positions[i]`` in a ring of ``nvars`` variables."""
        out = {}
        for m, c in self._terms.items():
            mm = [0] * nvars
            for i, e in enumerate(m):
                if e:
                    mm[positions[i]] += e
            out[tuple(mm)] = c
        return Polynomial(nvars, out)

    # -- display --------------------------------------------------------------

    def to_str(self, names: Sequence[str] | None = None) -> str:
        if not self._terms:
            return "0"
        names = names or [f"x{i + 1}" for i in range(self.nvars)]
        parts = []
        for m, c in self.items():
            factors = [n if e == 1 else f"{n}^{e}" for n, e in zip(names, m) if e]
            mag = abs(c)
            if factors:
                body = "*".join(factors)
                body = body if mag == 1 else f"{mag}*{body}"
            else:
                body = str(mag)
            parts.append(("-" if c < 0 else "+", body))
        head = ("-" if parts[0][0] == "-" else "") + parts[0][1]
        return head + "".join(f" {s} {b}" for s, b in parts[1:])

    def __repr__(self):
        return f"Polynomial({self.to_str()})"


def _grlex_key(m: Monomial):
    return (sum(m), tuple(-e for e in m))


def variables(nvars: int) -> list[Polynomial]:
    return [Polynomial.var(nvars, i) for i in range(nvars)]


def sum_polys(items: Iterable[Polynomial], nvars: int) -> Polynomial:
    out = Polynomial(nvars)
    for p in items:
        out = out + p
    return out
