"""Rational-number plumbing: parsing, canonical strings, directed roots."""

from __future__ import annotations

import math
from decimal import Decimal, localcontext
from fractions import Fraction
from typing import Union

RationalLike = Union[int, str, Fraction]


def q(x: RationalLike) -> Fraction:
    """Coerce ``x`` to an exact Fraction. Floats are rejected on purpose."""
    if isinstance(x, float):
        raise TypeError("floats are not accepted where exact rationals are required")
    if isinstance(x, Fraction):
        return x
    if isinstance(x, str):
        return Fraction(x.strip())
    return Fraction(x)


def qstr(x: Fraction) -> str:
    return str(Fraction(x))


def decimal_str(x: Fraction, digits: int = 12) -> str:
    """Advisory decimal rendering with ``digits`` significant digits."""
    x = Fraction(x)
    with localcontext() as ctx:
        ctx.prec = digits
        d = Decimal(x.numerator) / Decimal(x.denominator)
    return f"{d:.{digits}g}" if d != 0 else "0"


def float_down(x: Fraction) -> float:
    f = float(x)
    if Fraction(f) > x:
        f = math.nextafter(f, -math.inf)
    return f


def float_up(x: Fraction) -> float:
    f = float(x)
    if Fraction(f) < x:
        f = math.nextafter(f, math.inf)
    return f


def mth_root(x: Fraction, m: int) -> Fraction | None:
    """Exact m-th root of a nonnegative rational, or None if irrational."""
    if x < 0:
        raise ValueError("negative radicand")
    n, d = x.numerator, x.denominator
    rn, rd = _iroot(n, m), _iroot(d, m)
    if rn**m == n and rd**m == d:
        return Fraction(rn, rd)
    return None


def root_bracket(x: Fraction, m: int, bits: int) -> tuple[Fraction, Fraction]:
    """Rational lo <= x**(1/m) <= hi with hi - lo <= 2**-bits."""
    exact = mth_root(x, m)
    if exact is not None:
        return exact, exact
    scaled = x * (1 << (bits * m))
    r = _iroot(scaled.numerator // scaled.denominator, m)
    return Fraction(r, 1 << bits), Fraction(r + 1, 1 << bits)


def _iroot(n: int, m: int) -> int:
    """floor(n ** (1/m)) for n >= 0."""
    if n < 2:
        return n
    x = 1 << ((n.bit_length() + m - 1) // m)
    while True:
        y = ((m - 1) * x + n // x ** (m - 1)) // m
        if y >= x:
            break
        x = y
    while x**m > n:
        x -= 1
    while (x + 1) ** m <= n:
        x += 1
    return x
