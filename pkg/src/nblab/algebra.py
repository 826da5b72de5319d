"""Exact univariate polynomials for seed functions Q(t) e^{-t^2}.

Coefficients are ``fractions.Fraction``; floats appear only when a
polynomial is evaluated. Under g -> -x g' - r g the coefficients grow fast, so
exactness keeps the Gram identities free of recursion round-off.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .specfun import gamma_complex

HALF = Fraction(1, 2)


def _frac(x) -> Fraction:
    if isinstance(x, float):
        return Fraction(x).limit_denominator(10 ** 12)
    return Fraction(x)


class RationalPoly:
    """Polynomial with exact rational coefficients, index = degree."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable = (0,)):
        c = [_frac(v) for v in coeffs]
        while len(c) > 1 and c[-1] == 0:
            c.pop()
        self.coeffs: tuple = tuple(c) if c else (Fraction(0),)

    @classmethod
    def monomial(cls, degree: int, coeff=1) -> "RationalPoly":
        return cls([0] * degree + [coeff])

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1 if any(self.coeffs) else -1

    def __eq__(self, other) -> bool:
        return isinstance(other, RationalPoly) and self.coeffs == other.coeffs

    def __hash__(self) -> int:
        return hash(self.coeffs)

    def __repr__(self) -> str:
        return f"RationalPoly({[str(c) for c in self.coeffs]})"

    def __add__(self, other: "RationalPoly") -> "RationalPoly":
        n = max(len(self.coeffs), len(other.coeffs))
        a = self.coeffs + (Fraction(0),) * (n - len(self.coeffs))
        b = other.coeffs + (Fraction(0),) * (n - len(other.coeffs))
        return RationalPoly(x + y for x, y in zip(a, b))

    def __neg__(self) -> "RationalPoly":
        return RationalPoly(-c for c in self.coeffs)

    def __sub__(self, other: "RationalPoly") -> "RationalPoly":
        return self + (-other)

    def __mul__(self, other) -> "RationalPoly":
        if not isinstance(other, RationalPoly):
            k = _frac(other)
            return RationalPoly(k * c for c in self.coeffs)
        out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(other.coeffs):
                    out[i + j] += a * b
        return RationalPoly(out)

    __rmul__ = __mul__

    def derivative(self) -> "RationalPoly":
        if len(self.coeffs) == 1:
            return RationalPoly([0])
        return RationalPoly(i * c for i, c in enumerate(self.coeffs) if i > 0)

    def shift_up(self, k: int = 1) -> "RationalPoly":
        """Multiply by t^k."""
        return RationalPoly([0] * k + list(self.coeffs))

    def __call__(self, t):
        t = np.asarray(t)
        out = np.zeros_like(t, dtype=np.result_type(t, float))
        for c in reversed(self.coeffs):
            out = out * t + float(c)
        return out if out.ndim else out[()]

    def to_json(self) -> list:
        return [str(c) for c in self.coeffs]

    @classmethod
    def from_json(cls, items: Sequence[str]) -> "RationalPoly":
        return cls(Fraction(s) for s in items)


@dataclass(frozen=True)
class SeedFunction:
    """normalization * Q(t) * exp(-t^2)."""

    poly: RationalPoly
    normalization: float = 1.0

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        return self.normalization * self.poly(t) * np.exp(-t * t)

    def derivative_poly(self, order: int) -> RationalPoly:
        """P with d^order/dt^order [Q e^{-t^2}] = P e^{-t^2}."""
        p = self.poly
        for _ in range(order):
            p = p.derivative() - p.shift_up(1) * 2
        return p

    def to_json(self) -> dict:
        return {"coeffs": self.poly.to_json(), "normalization": self.normalization}

    @classmethod
    def from_json(cls, obj: dict) -> "SeedFunction":
        return cls(RationalPoly.from_json(obj["coeffs"]), float(obj.get("normalization", 1.0)))


def gaussian_seed() -> SeedFunction:
    return SeedFunction(RationalPoly([1]))


def xi_seed(normalized: bool = True) -> SeedFunction:
    """(8t^6 - 28t^4 + 12t^2) e^{-t^2}, optionally scaled by pi^{-1/4}."""
    poly = RationalPoly([0, 0, 12, 0, -28, 0, 8])
    return SeedFunction(poly, math.pi ** -0.25 if normalized else 1.0)


def seed_recursion_step(g: SeedFunction, r=HALF) -> SeedFunction:
    """g -> -t g'(t) - r g(t); on Q: Q -> -t Q' + 2 t^2 Q - r Q."""
    q = g.poly
    new = -(q.derivative().shift_up(1)) + q.shift_up(2) * 2 - q * _frac(r)
    return SeedFunction(new, g.normalization)


def seed_sequence(g0: SeedFunction, k_max: int, r: Sequence | None = None) -> list:
    """[g_0, ..., g_{k_max}] with r_k from ``r`` (default all 1/2)."""
    rs = list(r) if r is not None else [HALF] * k_max
    if len(rs) < k_max:
        raise ValueError("need at least k_max recursion parameters")
    out = [g0]
    for k in range(k_max):
        out.append(seed_recursion_step(out[-1], rs[k]))
    return out


@dataclass(frozen=True)
class CoefficientTriangle:
    """a[l][k] with g_k = sum_l a[l][k] x^l g_0^{(l)}."""

    a: tuple   # a[k] is the row (a_{0,k}, ..., a_{k,k})

    def __getitem__(self, lk):
        l, k = lk
        return self.a[k][l] if l <= k else Fraction(0)

    @property
    def k_max(self) -> int:
        return len(self.a) - 1

    def expand(self, g0: SeedFunction, k: int) -> SeedFunction:
        """Rebuild g_k from g_0 and the triangle, exactly."""
        total = RationalPoly([0])
        for l in range(k + 1):
            total = total + g0.derivative_poly(l).shift_up(l) * self[l, k]
        return SeedFunction(total, g0.normalization)


def coefficient_triangle(k_max: int, r: Sequence | None = None) -> CoefficientTriangle:
    """a_{l,k+1} = -(l + r_k) a_{l,k} - a_{l-1,k}, a_{0,0} = 1."""
    if k_max < 0:
        raise ValueError("k_max must be >= 0")
    rs = [_frac(v) for v in r] if r is not None else [HALF] * k_max
    rows = [(Fraction(1),)]
    for k in range(k_max):
        prev = rows[-1]
        row = []
        for l in range(k + 2):
            cur = prev[l] if l <= k else Fraction(0)
            left = prev[l - 1] if l >= 1 else Fraction(0)
            row.append(-(l + rs[k]) * cur - left)
        rows.append(tuple(row))
    return CoefficientTriangle(tuple(rows))


def bernstein_eval(n: int, m: int, u):
    """C(n+m, n) u^n (1-u)^m."""
    if n < 0 or m < 0:
        raise ValueError("Bernstein indices must be nonnegative")
    u = np.asarray(u, dtype=float)
    out = math.comb(n + m, n) * u ** n * (1.0 - u) ** m
    return float(out) if out.ndim == 0 else out


def seed_mellin(g: SeedFunction, s):
    """Mellin transform of g: normalization * sum_j q_j Gamma((s+j)/2) / 2.

    The monomial sum cancels heavily for high-degree seeds (relative error about
    1e-10 at degree 10, 1e-1 at degree 26); callers multiply the seed transform by
    prod (s - r_j) instead of transforming g_k directly.
    """
    z = np.asarray(complex(s) if np.ndim(s) == 0 else s, dtype=complex)
    out = np.zeros_like(z)
    for j, q in enumerate(g.poly.coeffs):
        if q:
            out = out + float(q) * np.asarray(gamma_complex((z + j) / 2.0))
    out = 0.5 * g.normalization * out
    return complex(out) if out.ndim == 0 else out
