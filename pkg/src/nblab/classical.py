"""Classical dilations e_k(t) = {1/(k t)}: Gram matrix, right-hand side, distance.

Two independent evaluations of the fractional-part inner products live here:

* the quadrature route (``gram_entry_classical``), adaptive GK15 with kinks at
  1/(k m) and a period-aligned, extrapolated tail near t = 0;
* the piecewise route (``pair_inner``), which integrates {x}{r x}/x^2 exactly
  between consecutive kinks and closes the tail with an Euler-Maclaurin
  correction. It works for arbitrary real dilations (Monte-Carlo, A(u)).
"""
from __future__ import annotations

import math

import numpy as np
from scipy.special import digamma, gammaln

from . import quad
from .solver import DistanceReport, GramSystem, distance_from_system
from .specfun import frac

EULER_GAMMA = 0.57721566490153286061
LOG2PI_MINUS_GAMMA = math.log(2 * math.pi) - EULER_GAMMA
#: largest lcm(1..n) for which the direct residual quadrature is attempted (n <= 12)
RESIDUAL_MAX_PERIOD = 30000


# --- closed forms used by both routes ------------------------------------------

def frac_over_x2_tail(X):
    """int_X^inf {x}/x^2 dx for X > 0."""
    X = np.asarray(X, dtype=float)
    big = np.maximum(X, 1.0)
    M = np.floor(big)
    above = 1.0 - np.log(big) + digamma(M + 1.0) - M / big
    below = (1.0 - EULER_GAMMA) - np.log(np.where(X < 1.0, X, 1.0))
    return np.where(X >= 1.0, above, below)


def frac_over_x_head(Y):
    """int_1^Y {x}/x dx for Y >= 1."""
    Y = np.asarray(Y, dtype=float)
    M = np.floor(Y)
    return Y - 1.0 - (M - 1.0) * np.log(M) + gammaln(M) - M * np.log(Y / M)


def chi_inner(theta):
    """<chi, {theta/t}> = int_0^1 {theta/t} dt, closed form."""
    th = np.asarray(theta, dtype=float)
    # int_0^1 {theta/t} dt = theta * int_theta^inf {u}/u^2 du
    out = th * frac_over_x2_tail(th)
    return float(out) if out.ndim == 0 else out


def bernoulli2_periodic(y):
    f = frac(y)
    return f * f - f + 1.0 / 6.0


def bernoulli3_periodic(y):
    f = frac(y)
    return f * (f - 0.5) * (f - 1.0)


def _b2_piece(m, a, b):
    """int_a^b B2({z})/z^2 dz for m <= a <= b <= m + 1."""
    return (b - a) - (2 * m + 1) * np.log(b / a) + (m * m + m + 1.0 / 6.0) * (1.0 / a - 1.0 / b)


def _w_asymptotic(Z):
    return -bernoulli3_periodic(Z) / (3 * Z * Z) - (bernoulli2_periodic(Z) ** 2 - 1.0 / 30.0) / (6 * Z ** 3) \
        - 1.0 / (180 * Z ** 3)


_W_SPLIT = 64
_W1 = float(_w_asymptotic(np.float64(_W_SPLIT))
            + sum(_b2_piece(m, m, m + 1.0) for m in range(1, _W_SPLIT)))


def _w_tail(Z):
    """W(Z) = int_Z^inf B2({z})/z^2 dz for Z >= 1."""
    Z = np.asarray(Z, dtype=float)
    out = np.empty_like(Z)
    big = Z >= _W_SPLIT
    out[big] = _w_asymptotic(Z[big])
    Zs = Z[~big]
    if Zs.size:
        m = np.arange(1, _W_SPLIT, dtype=float)[None, :]
        a = np.minimum(m, Zs[:, None])
        b = np.minimum(m + 1.0, Zs[:, None])
        out[~big] = _W1 - np.where(b > a, _b2_piece(m, a, np.maximum(b, a)), 0.0).sum(axis=1)
    return out


def _best_approximant(x: np.ndarray, p_max: int = 256):
    """Last continued-fraction convergent q/p of x with p <= p_max."""
    h1, h2 = np.floor(x), np.ones_like(x)
    k1, k2 = np.ones_like(x), np.zeros_like(x)
    q, p = h1.copy(), k1.copy()
    y = x - h1
    active = y > 0
    for _ in range(40):
        if not active.any():
            break
        y = np.where(active, 1.0 / np.where(active, y, 1.0), 0.0)
        a = np.floor(y)
        h1, h2 = a * h1 + h2, h1
        k1, k2 = a * k1 + k2, k1
        ok = active & (k1 <= p_max)
        q = np.where(ok, h1, q)
        p = np.where(ok, k1, p)
        y = y - a
        active = ok & (y > 1e-14 * np.maximum(1.0, a))
    return q, p


def _jump_tail(r: np.ndarray, last: np.ndarray) -> np.ndarray:
    """sum_{n > last} B2({n/r})/n^2.

    With 1/r = q/p + delta the block mean over p consecutive n is
    B2(p n delta)/p^2 (multiplication theorem); its sum is replaced by the
    integral (|p delta|/p^2) W(|p delta| (last + 1/2)), plus the leading
    correction for the spread of 1/n^2 inside the first block.
    """
    x = 1.0 / r
    q, p = _best_approximant(x)
    a = np.abs(p * x - q)
    Lh = last + 0.5
    Z = a * Lh
    small = Z < 1.0
    Zs = np.where(small, np.maximum(Z, 1e-300), 1.0)
    near = np.where(a > 0, a * (_W1 + 5.0 / 6.0 - Zs + np.log(Zs)), 0.0) + 1.0 / (6.0 * Lh)
    far = a * _w_tail(np.where(small, 1.0, Z))
    drift = np.where(small, near, far) / (p * p)
    p_max = int(p.max())
    i = np.arange(1, p_max + 1, dtype=float)[None, :]
    mask = i <= p[:, None]
    g = np.where(mask, bernoulli2_periodic((last[:, None] + i) / r[:, None]), 0.0)
    gbar = g.sum(axis=1) / p
    S = np.where(mask, i * (g - gbar[:, None]), 0.0).sum(axis=1)
    return drift - S / (p * last * last)


def _pair_F_block(r: np.ndarray, extra: int, n_terms: int) -> np.ndarray:
    """F(r) = int_0^inf {x}{r x}/x^2 dx for 0 < r <= 1, vectorised over r."""
    xs = np.maximum(1.0, 1.0 / r)
    X = xs + extra
    # [0, 1]: both parts linear, integrand r. [1, 1/r]: {rx} = rx.
    head = r + r * np.where(xs > 1.0, frac_over_x_head(xs), 0.0)
    # [xs, X]: exact integral between consecutive kinks
    ar = np.arange(extra, dtype=float)[None, :]
    ints = np.ceil(xs)[:, None] + ar
    mults = (np.floor(r * xs)[:, None] + 1.0 + ar) / r[:, None]
    Xc = X[:, None]
    pts = np.concatenate([xs[:, None], np.minimum(ints, Xc), np.minimum(mults, Xc), Xc], axis=1)
    pts = np.maximum(pts, xs[:, None])
    pts.sort(axis=1)
    x1, x2 = pts[:, :-1], pts[:, 1:]
    d = x2 - x1
    mid = 0.5 * (x1 + x2)
    m = np.floor(mid)
    n = np.floor(r[:, None] * mid)
    piece = r[:, None] * d - (n + r[:, None] * m) * np.log1p(d / x1) + m * n * d / (x1 * x2)
    body = np.where(d > 0, piece, 0.0).sum(axis=1)
    # tail beyond X: {x} averaged to 1/2 plus Euler-Maclaurin jump terms of {r x}
    rX = r * X
    tail = 0.5 * r * frac_over_x2_tail(rX) - 0.5 * bernoulli2_periodic(X) * frac(rX) / (X * X)
    n0 = np.floor(rX) + 1.0
    nn = n0[:, None] + np.arange(n_terms, dtype=float)[None, :]
    jumps = (bernoulli2_periodic(nn / r[:, None]) / (nn * nn)).sum(axis=1)
    jumps += _jump_tail(r, n0 + n_terms - 1.0)
    tail += 0.5 * r * r * jumps
    # next Euler-Maclaurin order: B3 against h' = r/x^2 - 2{rx}/x^3, which jumps by -2/x^3 at n/r
    hprime = r / (X * X) - 2.0 * frac(rX) / X ** 3
    cubes = (bernoulli3_periodic(nn / r[:, None]) / nn ** 3).sum(axis=1)
    tail += bernoulli3_periodic(X) * hprime / 6.0 + r ** 3 * cubes / 3.0
    return head + body + tail


def pair_F(r, extra: int = 2048, n_terms: int = 4096, block: int = 64):
    """F(r) = int_0^inf {1/t}{r/t} dt for 0 < r <= 1."""
    r = np.atleast_1d(np.asarray(r, dtype=float))
    if np.any((r <= 0) | (r > 1)):
        raise ValueError("pair_F needs 0 < r <= 1")
    out = np.empty_like(r)
    for s in range(0, r.size, block):
        out[s:s + block] = _pair_F_block(r[s:s + block], extra, n_terms)
    return out


def pair_inner(a, b, extra: int = 2048, n_terms: int = 4096):
    """<{a/t}, {b/t}> on (0, inf) for positive dilations, vectorised."""
    a = np.atleast_1d(np.asarray(a, dtype=float))
    b = np.atleast_1d(np.asarray(b, dtype=float))
    a, b = np.broadcast_arrays(a, b)
    hi = np.maximum(a, b)
    lo = np.minimum(a, b)
    return hi * pair_F(lo / hi, extra=extra, n_terms=n_terms)


# --- quadrature route ----------------------------------------------------------

def _classical_integrand(ks, weights=None, chi: bool = False) -> quad.Integrand:
    ks = [int(k) for k in ks]
    w = np.ones(len(ks)) if weights is None else np.asarray(weights, dtype=float)

    def f(t):
        t = np.asarray(t, dtype=float)
        acc = np.zeros_like(t)
        for k, wk in zip(ks, w):
            acc = acc + wk * frac(1.0 / (k * t))
        return acc

    period = math.lcm(*ks)
    tail = quad.ReciprocalTail(period=float(period), exponent=1.0, spacings=tuple(float(k) for k in set(ks)))
    return quad.Integrand(f, reciprocal_tail=tail, decay=quad.Decay("algebraic", 2.0))


def gram_entry_classical(k: int, l: int, tol: float = 1e-11) -> float:
    """G_{k,l} = int_0^inf {1/(k t)}{1/(l t)} dt by breakpoint-aware quadrature."""
    if k < 1 or l < 1:
        raise ValueError("indices start at 1")
    k, l = min(k, l), max(k, l)

    def f(t):
        t = np.asarray(t, dtype=float)
        return frac(1.0 / (k * t)) * frac(1.0 / (l * t))

    period = math.lcm(k, l)
    tail = quad.ReciprocalTail(period=float(period), exponent=1.0,
                               spacings=tuple(sorted({float(k), float(l)})))
    # on t >= 1 both fractional parts are 1/(k t), 1/(l t)
    head = quad.integrate_interval(quad.Integrand(f, reciprocal_tail=tail), 0.0, 1.0, tol / 2)
    return head.value + 1.0 / (k * l)


def rhs_entry_classical(k: int, tol: float = 1e-12) -> float:
    """b_k = int_0^1 {1/(k t)} dt by quadrature."""
    if k < 1:
        raise ValueError("indices start at 1")

    def f(t):
        return frac(1.0 / (k * np.asarray(t, dtype=float)))

    tail = quad.ReciprocalTail(period=float(k), exponent=1.0, spacings=(float(k),))
    return quad.integrate_unit(quad.Integrand(f, reciprocal_tail=tail), tol).value


def rhs_closed_form(k: int) -> float:
    """(1 - gamma + log k) / k."""
    return (1.0 - EULER_GAMMA + math.log(k)) / k


def gram_classical(n: int, tol: float = 1e-11) -> GramSystem:
    G = np.zeros((n, n))
    for k in range(1, n + 1):
        for l in range(k, n + 1):
            G[k - 1, l - 1] = G[l - 1, k - 1] = gram_entry_classical(k, l, tol)
    b = np.array([rhs_entry_classical(k) for k in range(1, n + 1)])
    return GramSystem(G, b, family="classical", entry_tolerances=np.full((n, n), tol))


def residual_norm2(c, tol: float = 1e-10) -> float:
    """int_0^inf (chi - sum_k c_k {1/(k t)})^2 dt by direct quadrature."""
    c = np.asarray(c, dtype=float)
    ks = list(range(1, c.size + 1))
    basis = _classical_integrand(ks, c)

    def on_unit(t):
        return (1.0 - basis.evaluator(t)) ** 2

    head = quad.integrate_interval(quad.Integrand(on_unit, reciprocal_tail=basis.reciprocal_tail), 0.0, 1.0, tol)
    # t >= 1: sum_k c_k / (k t); squared integral over [1, inf) is (sum c_k/k)^2
    s = math.fsum(c[k - 1] / k for k in ks)
    return head.value + s * s


def distance_classical(n: int, system: GramSystem | None = None, crosscheck: bool = True,
                       max_condition: float = 1e14) -> DistanceReport:
    if n < 1:
        raise ValueError("n must be >= 1")
    sys = system.leading(n) if system is not None else gram_classical(n)
    rep = distance_from_system(sys, 1.0, route="quadrature-gram", max_condition=max_condition)
    if crosscheck and math.lcm(*range(1, n + 1)) <= RESIDUAL_MAX_PERIOD:
        rep.D2_crosscheck = residual_norm2(rep.coefficients)
    elif crosscheck:
        # the combined integrand only repeats every lcm(1..n) in 1/t
        rep.flags.append("crosscheck-skipped")
    return rep
