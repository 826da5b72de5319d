"""Recursive family g_{k+1} = -x g_k' - r_k g_k built from a seed g_0.

Convention: the k-th basis function carries exactly k Pochhammer-like factors,

    hat(g_k^x)(s) = -(s - r_0)...(s - r_{k-1}) * zeta(s)/s * hat(g_0)(s),

for k = 0, 1, ... On the critical line with r = 1/2 every factor is i t, so the
Gram matrix is G_{kj} = Re(i^{k-j}) m_{k+j} with m_j the moments of
|zeta(s)/s hat(g_0)(s)|^2 dt / (2 pi).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import quad
from .algebra import HALF, SeedFunction, seed_mellin, seed_sequence, xi_seed
from .report import ProvenancedValue
from .solver import (
    DistanceReport,
    GramSystem,
    distance_from_system,
    line_projection_distance,
)
from .specfun import ComplexValue, DomainError, xi_function, zeta_strip


class StructureError(ValueError):
    """Gram matrix lacks the structure an operation relies on."""


def _line(t):
    return 0.5 + 1j * np.asarray(t, dtype=float)


def _default_T(j: int) -> float:
    return float(max(30, 8 + 2 * j))


@dataclass
class MomentWeight:
    """Even weight w(t) on the critical line and its moments m_j = (1/2pi) int t^j w(t) dt.

    ``variant`` is "seed" (w = |zeta(s)/s hat(g_0)(s)|^2) or "xi" (w = Xi(t)^2).
    Values live on one composite GK15 grid over [-2T, 2T], T = max(30, 8 + 2 j_max);
    each moment is also evaluated on [-T_j, T_j] and the difference is its
    truncation estimate.
    """

    variant: str = "seed"
    seed: SeedFunction | None = None
    j_max: int = 12
    panel: float = 0.25
    _grid: dict | None = field(default=None, repr=False)
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if self.variant not in ("seed", "xi"):
            raise ValueError(f"unknown weight variant {self.variant!r}")
        if self.variant == "seed" and self.seed is None:
            raise ValueError("seed weight needs a seed function")

    @classmethod
    def xi_squared(cls, j_max: int = 12) -> "MomentWeight":
        return cls("xi", None, j_max)

    @property
    def T(self) -> float:
        return _default_T(self.j_max)

    def phi(self, t):
        """zeta(s)/s * hat(g_0)(s) on s = 1/2 + i t (seed variant only)."""
        if self.variant != "seed":
            raise ValueError("phi is defined for seed weights only")
        s = _line(t)
        return zeta_strip(s) / s * seed_mellin(self.seed, s)

    def weight(self, t):
        if self.variant == "xi":
            return xi_function(t) ** 2
        return np.abs(self.phi(t)) ** 2

    @property
    def grid(self) -> dict:
        if self._grid is None:
            lg = quad.line_grid(2.0 * self.T, self.panel)
            g = {"t": lg.t, "rule": lg}
            if self.variant == "seed":
                g["phi"] = self.phi(lg.t)
                g["w"] = np.abs(g["phi"]) ** 2
            else:
                g["w"] = self.weight(lg.t)
            self._grid = g
        return self._grid

    def integrate(self, values, T: float | None = None):
        """(1/2pi) int values(t) dt over the grid (optionally restricted to |t| <= T)."""
        # T is a multiple of the panel width, so no panel straddles +-T
        v, e = self.grid["rule"].integrate(values, T)
        return v / (2 * math.pi), e / (2 * math.pi)

    def moment(self, j: int) -> ProvenancedValue:
        if j < 0:
            raise ValueError("moment order must be >= 0")
        if j > 2 * self.j_max + 4:
            raise ValueError(f"moment {j} beyond the grid built for j_max={self.j_max}")
        if j in self._cache:
            return self._cache[j]
        g = self.grid
        Tj = min(_default_T(j), self.T)
        vals = g["t"] ** j * g["w"]
        inner, err = self.integrate(vals, Tj)
        full, err_full = self.integrate(vals, 2 * Tj)
        route = "xi-squared" if self.variant == "xi" else "seed-mellin"
        pv = ProvenancedValue(float(full), float(err_full + abs(full - inner)), route, 2 * Tj)
        self._cache[j] = pv
        return pv

    def moments(self, j_max: int | None = None) -> list:
        return [self.moment(j) for j in range((j_max if j_max is not None else 2 * self.j_max) + 1)]


@dataclass
class RecursiveBasis:
    seed: SeedFunction = field(default_factory=xi_seed)
    r: Sequence | None = None     # r_0, r_1, ...; None means all 1/2
    k_max: int = 6

    def __post_init__(self):
        if self.k_max < 0:
            raise ValueError("k_max must be >= 0")
        if self.r is not None:
            self.r = [Fraction(x) if not isinstance(x, float) else Fraction(x).limit_denominator(10 ** 12)
                      for x in self.r]
            if len(self.r) < self.k_max:
                raise ValueError("need r_0..r_{k_max-1}")

    @property
    def rs(self) -> list:
        return list(self.r) if self.r is not None else [HALF] * self.k_max

    @property
    def is_half(self) -> bool:
        return all(x == HALF for x in self.rs)

    def seeds(self) -> list:
        return seed_sequence(self.seed, self.k_max, self.rs)

    def check_decay(self, t: float = 12.0) -> bool:
        """Gaussian domination: |g_k(t)| <= e^{-t^2/2} at t (and beyond) for all k."""
        return all(abs(float(g(t))) <= math.exp(-t * t / 2) for g in self.seeds())

    def weight(self, j_max: int | None = None) -> MomentWeight:
        return MomentWeight("seed", self.seed, j_max if j_max is not None else max(self.k_max, 6))

    def pochhammer(self, k: int, s):
        """(s - r_0)...(s - r_{k-1})."""
        rs = self.rs
        if k > len(rs):
            raise ValueError(f"k={k} exceeds the recursion depth {len(rs)}")
        out = np.ones_like(np.asarray(s, dtype=complex))
        for j in range(k):
            out = out * (s - float(rs[j]))
        return out


def gx_hat_recursive(k: int, s, basis: RecursiveBasis):
    """Mellin transform of g_k^x(t) = int {x/t} g_k(x) dx/x."""
    if k < 0:
        raise ValueError("k must be >= 0")
    scalar = np.ndim(s) == 0
    if isinstance(s, ComplexValue):
        s = complex(s.require_strip())
    z = np.asarray(s, dtype=complex)
    if np.any((z.real <= 0) | (z.real >= 1)):
        raise DomainError("s must lie in the open critical strip")
    out = -basis.pochhammer(k, z) * zeta_strip(z) / z * seed_mellin(basis.seed, z)
    return complex(out) if scalar else out


def gx_recursive(k: int, t, basis: RecursiveBasis, x_max: float = 9.0, nodes: int = 10):
    """Time-domain g_k^x(t) by piecewise Gauss-Legendre between the kinks x = m t."""
    g = basis.seeds()[k]
    xg, wg = np.polynomial.legendre.leggauss(nodes)
    out = []
    for tv in np.atleast_1d(np.asarray(t, dtype=float)):
        kinks = np.arange(1, int(x_max / tv) + 1) * tv
        edges = np.unique(np.concatenate([[0.0, x_max], kinks[kinks < x_max], np.arange(0.25, x_max, 0.25)]))
        a, b = edges[:-1], edges[1:]
        x = 0.5 * (a + b)[:, None] + 0.5 * (b - a)[:, None] * xg[None, :]
        w = 0.5 * (b - a)[:, None] * wg[None, :]
        u = x / tv
        m = np.floor(0.5 * (a + b) / tv)[:, None]
        out.append(float(np.sum(w * (u - m) * g(x) / x)))
    out = np.array(out)
    return float(out[0]) if np.ndim(t) == 0 else out


def gx_hat_convolution_oracle(k: int, s: complex, basis: RecursiveBasis, tol: float = 1e-7,
                              t0: float = 0.02) -> complex:
    """hat(g_k^x)(s) by integrating t^{s-1} g_k^x(t) with g_k^x from ``gx_recursive``.

    Needs g_k(x)/x bounded at 0 (true for the Xi-seed). Near t = 0 the constant
    limit C = (1/2) int g_k(x) dx/x is integrated exactly; the remainder is
    O(t^3) and is dropped below ``t0``. Beyond t = 9 the function is exactly
    hat(g_k)(1)/t up to Gaussian-small terms.
    """
    g = basis.seeds()[k]
    if g.poly.coeffs[0] != 0:
        raise ValueError("oracle needs g_k(0) = 0")
    x_max = 9.0
    xs, ws = np.polynomial.legendre.leggauss(60)
    edges = np.linspace(0.0, x_max, 37)
    xx = (0.5 * (edges[:-1] + edges[1:])[:, None] + 0.5 * np.diff(edges)[:, None] * xs[None, :]).ravel()
    ww = (0.5 * np.diff(edges)[:, None] * ws[None, :]).ravel()
    C = 0.5 * float(np.sum(ww * g(xx) / xx))
    mass = float(np.sum(ww * g(xx)))

    def near(tv):
        tv = np.asarray(tv, dtype=float)
        return tv ** (s - 1) * (gx_recursive(k, tv, basis, x_max) - C)

    def far(tv):
        tv = np.asarray(tv, dtype=float)
        return tv ** (s - 1) * gx_recursive(k, tv, basis, x_max)

    part = quad.gk15(lambda v: near(v).real, t0, 1.0, tol).value + 1j * quad.gk15(lambda v: near(v).imag, t0, 1.0, tol).value
    part += quad.gk15(lambda v: far(v).real, 1.0, x_max, tol, breakpoints=np.arange(2.0, x_max)).value
    part += 1j * quad.gk15(lambda v: far(v).imag, 1.0, x_max, tol, breakpoints=np.arange(2.0, x_max)).value
    part += C / s + mass * x_max ** (s - 1) / (1 - s)
    return complex(part)


def moment(weight: MomentWeight, j: int) -> ProvenancedValue:
    return weight.moment(j)


def gram_from_moments(m: Sequence[float], n: int) -> np.ndarray:
    """Alternate-Hankel Gram matrix G_{kj} = Re(i^{k-j}) m_{k+j}, k, j = 0..n-1."""
    G = np.zeros((n, n))
    for k in range(n):
        for j in range(n):
            if (k + j) % 2 == 0:
                G[k, j] = (-1) ** ((j - k) // 2) * m[k + j]
    return G


def gram_mellin(basis: RecursiveBasis, n: int | None = None, weight: MomentWeight | None = None):
    """Gram matrix by line quadrature of Re[P_k conj(P_j)] |phi|^2, any r.

    Returns (G, imaginary residue, error estimate matrix).
    """
    n = n if n is not None else basis.k_max + 1
    w = weight if weight is not None else basis.weight()
    g = w.grid
    s = _line(g["t"])
    P = [basis.pochhammer(k, s) for k in range(n)]
    G = np.zeros((n, n))
    E = np.zeros((n, n))
    imag = 0.0
    for k in range(n):
        for j in range(k, n):
            vals = P[k] * np.conj(P[j]) * g["w"]
            v, e = w.integrate(vals)
            G[k, j] = G[j, k] = v.real
            E[k, j] = E[j, k] = e
            imag = max(imag, abs(v.imag) if k != j else 0.0)
    return G, imag, E


def gram_recursive(basis: RecursiveBasis, n: int | None = None, route: str = "auto",
                   weight: MomentWeight | None = None) -> GramSystem:
    """Gram system (with b from the Mellin route) for g_0..g_{n-1}."""
    n = n if n is not None else basis.k_max + 1
    if route == "auto":
        route = "moments" if basis.is_half else "mellin"
    w = weight if weight is not None else basis.weight(max(n, 6))
    if route == "moments":
        if not basis.is_half:
            raise StructureError("moment fast path needs r = 1/2 throughout")
        m = w.moments(2 * n - 2)
        G = gram_from_moments([pv.value for pv in m], n)
        tol = np.array([[m[k + j].est_error for j in range(n)] for k in range(n)])
    elif route == "mellin":
        G, _, tol = gram_mellin(basis, n, w)
    else:
        raise ValueError(f"unknown route {route!r}")
    b = np.array([rhs_recursive(k, basis, weight=w).value for k in range(n)])
    return GramSystem(G, b, family="recursive", entry_tolerances=np.maximum(tol, 1e-14 * np.max(np.abs(G))))


def gram_recurrence_residual(G: np.ndarray, r: Sequence) -> float:
    """max |G_{k,j} + G_{k+1,j-1} - (1 - r_k - r_{j-1}) G_{k,j-1}| over the valid indices.

    With constant r this is the identity G_{k,j} + G_{k+1,j-1} = (1 - 2 r) G_{k,j-1}.
    """
    n = G.shape[0]
    worst = 0.0
    for k in range(n - 1):
        for j in range(1, n):
            lhs = G[k, j] + G[k + 1, j - 1]
            rhs = (1 - float(r[k]) - float(r[j - 1])) * G[k, j - 1]
            worst = max(worst, abs(lhs - rhs))
    return worst


def block_hankel_permutation(n: int) -> np.ndarray:
    """Positions 1, 3, 5, ... (counting from one) first, then 2, 4, ..."""
    return np.concatenate([np.arange(0, n, 2), np.arange(1, n, 2)])


def block_hankel_reorder(G) -> GramSystem | np.ndarray:
    """Symmetric permutation P G P^T exposing the two alternate-Hankel blocks."""
    M = G.G if isinstance(G, GramSystem) else np.asarray(G, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError("square matrix required")
    p = block_hankel_permutation(M.shape[0])
    out = M[np.ix_(p, p)]
    if isinstance(G, GramSystem):
        return GramSystem(out, G.b[p], G.family, G.entry_tolerances)
    return out


def inverse_block_hankel_reorder(Gt: np.ndarray) -> np.ndarray:
    p = block_hankel_permutation(Gt.shape[0])
    inv = np.argsort(p)
    return np.asarray(Gt)[np.ix_(inv, inv)]


def sign_strip_to_moment_matrix(G, tol: float = 1e-8) -> np.ndarray:
    """H_{kj} = m_{k+j} from the alternate-Hankel G; raises if odd-sum entries are not ~0."""
    M = G.G if isinstance(G, GramSystem) else np.asarray(G, dtype=float)
    n = M.shape[0]
    scale = float(np.max(np.abs(np.diag(M))))
    H = np.zeros_like(M)
    for k in range(n):
        for j in range(n):
            if (k + j) % 2:
                if abs(M[k, j]) > tol * scale:
                    raise StructureError(f"entry ({k}, {j}) = {M[k, j]:.3g} should vanish")
                H[k, j] = M[k, j]
            else:
                H[k, j] = (-1) ** ((j - k) // 2) * M[k, j]
    return H


def _b_mellin(k: int, basis: RecursiveBasis, weight: MomentWeight):
    g = weight.grid
    s = _line(g["t"])
    vals = np.conj(-basis.pochhammer(k, s) * g["phi"]) / s
    v, e = weight.integrate(vals)
    return v, e


def rhs_recursive(k: int, basis: RecursiveBasis, route: str = "mellin",
                  weight: MomentWeight | None = None, T: float = 12.0) -> ProvenancedValue:
    """b_k = <chi, g_k^x>.

    ``mellin``: (1/2pi) int conj(hat(g_k^x)(s))/s dt. ``recursion``:
    b_{j+1} = -int_0^inf {x} g_j(x) dx/x + b_j/2, seeded with the Mellin b_0.
    """
    if k < 0:
        raise ValueError("k must be >= 0")
    w = weight if weight is not None else basis.weight()
    if route == "mellin":
        v, e = _b_mellin(k, basis, w)
        if abs(v.imag) > 1e-9 * max(1.0, abs(v.real)) + e:
            raise ArithmeticError(f"b_{k} has imaginary residue {v.imag:.3g}")
        return ProvenancedValue(float(v.real), float(e + abs(v.imag)), "mellin", w.T * 2)
    if route != "recursion":
        raise ValueError(f"unknown route {route!r}")
    if not basis.is_half:
        raise StructureError("the b recursion needs r = 1/2")
    v0, e0 = _b_mellin(0, basis, w)
    b = float(v0.real)
    err = float(e0)
    seeds = basis.seeds() if k <= basis.k_max else seed_sequence(basis.seed, k)
    for j in range(k):
        J = frac_moment(seeds[j], T)
        b = -J.value + 0.5 * b
        err = J.est_error + 0.5 * err
    return ProvenancedValue(b, err, "recursion" if k else "mellin", T)


def frac_moment(g: SeedFunction, T: float = 12.0, tol: float = 1e-14) -> ProvenancedValue:
    """int_0^T {x} g(x) dx/x with GK15 split at the integers; truncation beyond T by T -> T + 3."""

    def f(x):
        x = np.asarray(x, dtype=float)
        return (x - np.floor(x)) * g(x) / x

    def run(upper):
        return quad.gk15(f, 0.0, upper, tol, breakpoints=np.arange(1.0, upper))

    a = run(T)
    b = run(T + 3.0)
    return ProvenancedValue(float(a.value), float(a.error_estimate), "time-domain", abs(b.value - a.value))


def orthogonal_distance(n: int, basis: RecursiveBasis, weight: MomentWeight | None = None):
    """D_n^2 through polynomials orthonormal for |phi|^2 dt/2pi (Stieltjes), no moment matrix.

    Returns (D2, recurrence, projections).
    """
    if not basis.is_half:
        raise StructureError("orthogonal route needs r = 1/2")
    w = weight if weight is not None else basis.weight(max(n, 6))
    g = w.grid
    return line_projection_distance(g["rule"], g["phi"], n)


def distance_recursive(n: int, basis: RecursiveBasis | None = None, route: str = "monomial",
                       weight: MomentWeight | None = None, max_condition: float = 1e12) -> DistanceReport:
    """Distance from chi to span{g_0^x..g_{n-1}^x}; the other route fills D2_crosscheck."""
    if n < 1:
        raise ValueError("n must be >= 1")
    basis = basis if basis is not None else RecursiveBasis(k_max=max(n - 1, 0))
    if basis.k_max < n - 1:
        basis = RecursiveBasis(basis.seed, basis.r, n - 1)
    w = weight if weight is not None else basis.weight(max(n, 6))
    sys = gram_recursive(basis, n, weight=w)
    rep = distance_from_system(sys, 1.0, route="monomial-moments", max_condition=max_condition)
    d2o, rec, _ = orthogonal_distance(n, basis, w)
    if rec.truncated_at is not None:
        rep.flags.append(f"stieltjes-truncated@{rec.truncated_at}")
    if route == "orthogonal":
        rep.D2, rep.D2_crosscheck, rep.route = d2o, rep.D2, "orthogonal"
    elif route == "monomial":
        rep.D2_crosscheck = d2o
    else:
        raise ValueError(f"unknown route {route!r}")
    return rep
