"""Inverse-Gamma family Z_k = Y / X_k, X_k ~ Gamma(k, 1).

Basis functions g_k^x(t) = E{Z_k / t}. With rho(v) = E{Y/v},

    g_k^x(t) = E rho(X_k t) = 1/((k-1)! t^k) int_0^inf rho(v) v^{k-1} e^{-v/t} dv,

and the Gram entries follow from the Bernstein representation

    <g_{n+1}^x, g_{m+1}^x> = int_0^1 C(n+m, n) u^n (1-u)^m A(u) du,
    A(u) = int_0^inf rho(u t) rho((1-u) t) dt.

On the Mellin side hat(g_k^x)(s) = -phi(s) P_{k-1}(s)/(k-1)! with
phi(s) = zeta(s)/s E[Y^s] Gamma(1-s), so both a time-domain and a line-integral
least-squares problem are available.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln, kve

from . import quad
from .algebra import bernstein_eval
from .classical import frac_over_x2_tail, pair_inner
from .report import ProvenancedValue
from .solver import (
    DistanceReport,
    GramSystem,
    distance_from_system,
    line_projection_distance,
    tail_diagnostic,
)
from .specfun import (
    DomainError,
    RhoSpec,
    gamma_complex,
    pochhammer_eval,
    rho,
    zeta_strip,
)

# dirac pair integrals inside A(u): Euler-Maclaurin closure after 64 extra unit cells
A_EXTRA = 64
A_TERMS = 256


@dataclass(frozen=True)
class InvGammaBasis:
    y_spec: RhoSpec = field(default_factory=RhoSpec.dirac)
    n: int = 4

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")

    @property
    def delicate(self) -> tuple:
        # E Z_1 is infinite: the (1,1) entry is borderline and gets a wider tolerance
        return (1, 1)


def _gamma_density(k: int, x):
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore"):
        logd = (k - 1) * np.log(np.where(x > 0, x, 1.0)) - x - math.lgamma(k)
    return np.where(x > 0, np.exp(logd), 0.0 if k > 1 else 1.0)


def _start_periods(period: float) -> int:
    return int(math.ceil(64.0 / period))


def _gx_fourier_dirac(k: int, t: float) -> float:
    """Sawtooth series {u} = 1/2 - sum sin(2 pi n u)/(pi n) against the law of 1/X_k.

    E exp(i w / X_k) = 2 a^{k/2} K_k(2 sqrt(a)) / Gamma(k) with a = -i w; the terms
    fall like exp(-sqrt(4 pi n / t)).
    """
    n_max = max(64, int(math.ceil(t * (50.0 + 3.0 * k) ** 2 / (4.0 * math.pi))))
    n = np.arange(1, n_max + 1, dtype=float)
    a = -1j * (2.0 * math.pi * n / t)
    r = np.sqrt(a)
    cf = 2.0 * a ** (k / 2.0) * kve(k, 2.0 * r) * np.exp(-2.0 * r) / math.gamma(k)
    return 0.5 - math.fsum(cf.imag / n) / math.pi


def gx_invgamma(k: int, t: float, y_spec: RhoSpec, route: str = "auto", tol: float = 1e-12) -> float:
    """g_k^x(t) = E{Z_k/t}.

    ``auto``: ``fourier`` for dirac Y, ``formula`` otherwise.
    ``fourier`` (dirac only): Bessel-function sawtooth series, accurate for all t.
    ``formula``: 1/((k-1)! t^k) int rho(v) v^{k-1} e^{-v/t} dv (kinks of rho at v = 1/m).
    ``definition``: int rho(x t) x^{k-1} e^{-x}/(k-1)! dx (kinks at x = 1/(m t)).
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if not t > 0:
        raise DomainError("t must be positive")
    if route == "auto":
        route = "fourier" if y_spec.variant == "dirac" else "formula"
    if route == "fourier":
        if y_spec.variant != "dirac":
            raise ValueError("the fourier route is implemented for dirac Y only")
        return _gx_fourier_dirac(k, t)
    logc = -math.lgamma(k) - k * math.log(t)
    if route == "formula":
        def f(v):
            v = np.asarray(v, dtype=float)
            return rho(y_spec, v) * np.exp((k - 1) * np.log(v) - v / t + logc)
        period, spacing, rate = 1.0, 1.0, 1.0 / t
    elif route == "definition":
        def f(x):
            x = np.asarray(x, dtype=float)
            return rho(y_spec, x * t) * _gamma_density(k, x)
        period, spacing, rate = t, t, 1.0
    else:
        raise ValueError(f"unknown route {route!r}")
    if y_spec.variant == "dirac":
        tail = quad.ReciprocalTail(period=period, exponent=float(k), spacings=(spacing,),
                                   start_periods=_start_periods(period))
        head = quad.integrate_interval(quad.Integrand(f, reciprocal_tail=tail), 0.0, 1.0, tol / 2)
        bp = None
        if route == "definition" and t < 1:
            bp = quad.frac_breakpoints([1.0 / t], 1.0, 1.0 / t + 1)
        rest = quad.integrate_semiinf(quad.Integrand(f, breakpoints=bp, decay=quad.Decay("exponential", rate)),
                                      tol / 2, a=1.0)
        return float(head.value + rest.value)
    res = quad.gk15(f, 0.0, 1.0, tol / 2)
    rest = quad.integrate_semiinf(quad.Integrand(f, decay=quad.Decay("exponential", rate)), tol / 2, a=1.0)
    return float(res.value + rest.value)


# --- A(u) ---------------------------------------------------------------------

def _a_dirac(u):
    u = np.asarray(u, dtype=float)
    return pair_inner(1.0 / u, 1.0 / (1.0 - u), extra=A_EXTRA, n_terms=A_TERMS)


_LOG_GL = np.polynomial.legendre.leggauss(12)


def _a_exp(u, lam: float):
    """int rho(u t) rho((1-u) t) dt in log t: t e^y-weighted, smooth, 12-point GL per unit."""
    u = np.atleast_1d(np.asarray(u, dtype=float))
    out = np.empty_like(u)
    xg, wg = _LOG_GL
    for i, ui in enumerate(u):
        lo = -40.0 + math.log(1.0 / lam)
        hi = 40.0 + math.log(1.0 / (lam * ui * (1.0 - ui)))
        edges = np.arange(lo, hi + 1.0, 1.0)
        c = 0.5 * (edges[:-1] + edges[1:])
        y = (c[:, None] + 0.5 * xg[None, :]).ravel()
        w = np.tile(0.5 * wg, c.size)
        tt = np.exp(y)
        spec = RhoSpec.exponential(lam)
        out[i] = np.sum(w * tt * rho(spec, ui * tt) * rho(spec, (1.0 - ui) * tt))
    return out


def a_function(u, y_spec: RhoSpec):
    """A(u) = int_0^inf rho(u t) rho((1-u) t) dt for 0 < u < 1."""
    uu = np.atleast_1d(np.asarray(u, dtype=float))
    if np.any((uu <= 0) | (uu >= 1)):
        raise DomainError("A(u) needs 0 < u < 1")
    out = _a_dirac(uu) if y_spec.variant == "dirac" else _a_exp(uu, y_spec.lam)
    return float(out[0]) if np.ndim(u) == 0 else out


def _farey(max_den: int, hi: float = 0.5) -> np.ndarray:
    pts = {a / b for b in range(2, max_den + 1) for a in range(1, b) if math.gcd(a, b) == 1 and a / b < hi}
    return np.array(sorted(pts))


@dataclass
class AFunction:
    """A(u) on the final adaptive GK15 panels of (0, 1/2]; the other half follows by symmetry."""

    y_spec: RhoSpec
    tol: float = 1e-7
    u: np.ndarray | None = None
    wk: np.ndarray | None = None
    wg: np.ndarray | None = None
    values: np.ndarray | None = None
    error_estimate: float = float("nan")

    def build(self) -> "AFunction":
        f = (lambda x: a_function(np.asarray(x), self.y_spec))
        # cusps sit at rationals (dirac); log singularity at u = 0
        bp = np.unique(np.concatenate([_farey(12), 2.0 ** -np.arange(2, 40)]))
        panels = []
        res = quad.gk15(f, 0.0, 0.5, self.tol, breakpoints=bp, panels_out=panels)
        lo, hi = panels[0]
        c, h = 0.5 * (lo + hi), 0.5 * (hi - lo)
        self.u = (c[:, None] + h[:, None] * quad.NODES[None, :]).ravel()
        self.wk = (h[:, None] * quad.KRONROD_W[None, :]).ravel()
        self.wg = (h[:, None] * quad.GAUSS_W[None, :]).ravel()
        self.values = f(self.u)
        self.error_estimate = res.error_estimate
        return self

    def integrate_bernstein(self, n: int, m: int) -> ProvenancedValue:
        """int_0^1 B_n^{n+m}(u) A(u) du using A(u) = A(1-u)."""
        if self.values is None:
            self.build()
        B = bernstein_eval(n, m, self.u) + bernstein_eval(n, m, 1.0 - self.u)
        v = float(np.sum(self.wk * B * self.values))
        e = float(abs(np.sum((self.wk - self.wg) * B * self.values)))
        return ProvenancedValue(v, max(e, 2 * self.error_estimate), "bernstein")


_A_CACHE: dict = {}


def a_cache(y_spec: RhoSpec, tol: float = 1e-7) -> AFunction:
    key = (y_spec.variant, y_spec.lam, tol)
    if key not in _A_CACHE:
        _A_CACHE[key] = AFunction(y_spec, tol).build()
    return _A_CACHE[key]


def gram_entry_invgamma(n: int, m: int, y_spec: RhoSpec, tol: float = 1e-7) -> ProvenancedValue:
    """<g_{n+1}^x, g_{m+1}^x> by the Bernstein formula (indices n, m >= 0)."""
    if n < 0 or m < 0:
        raise ValueError("Bernstein indices must be >= 0")
    pv = a_cache(y_spec, tol).integrate_bernstein(n, m)
    if n == 0 and m == 0:
        # delicate entry: E Z_1 = infinity
        return ProvenancedValue(pv.value, max(pv.est_error, 1e-4), "bernstein-delicate")
    return pv


def _log_extrapolate(sizes, values) -> float:
    """Limit of S(L) = S + sum_j (a_j + b_j log L) / L^j fitted exactly through the data.

    The log terms come from q(b)/b ~ 1/(2b) when an index is zero.
    """
    L = np.asarray(sizes, dtype=float)
    cols = [np.ones_like(L)]
    j = 1
    while len(cols) < L.size:
        cols.append(np.log(L) / L ** j)
        if len(cols) < L.size:
            cols.append(1.0 / L ** j)
        j += 1
    return float(np.linalg.solve(np.column_stack(cols), np.asarray(values, dtype=float))[0])


def gram_entry_bruteforce(n: int, m: int, y_spec: RhoSpec, levels: int = 7, L0: int = 16,
                          order: int = 10, corner_order: int = 40) -> ProvenancedValue:
    """C(n+m, n) int int rho(x) rho(y) x^n y^m (x+y)^{-(n+m+1)} dx dy over the quadrant.

    With a = 1/x, b = 1/y this is C(n+m, n) int int q(a) q(b) a^{m-1} b^{n-1} (a+b)^{-(n+m+1)},
    q(a) = rho(1/a) ({a} for dirac). The cells [i, i+1] x [j, j+1] are integrated
    by tensor Gauss-Legendre (the corner cell by a Duffy split), squares [0, L]^2
    grow by doubling and the sequence is Richardson-extrapolated in 1/L.
    """
    N = n + m
    coef = math.comb(N, n)
    spec = y_spec

    def q_over(a):
        # rho(1/a)/a, bounded near a = 0
        return rho(spec, 1.0 / a) / a

    def rule(k):
        x, w = np.polynomial.legendre.leggauss(k)
        return 0.5 * (x + 1.0), 0.5 * w

    base, edge = rule(order), rule(2 * order)
    # corner cell via b = a w (and a = b w), where the integrand factorises
    xd, wd = rule(corner_order)
    A_, W_ = np.meshgrid(xd, xd, indexing="ij")
    WA, WW = np.meshgrid(wd, wd, indexing="ij")
    # triangle b < a: b = a w, db = a dw
    tri1 = q_over(A_) * q_over(A_ * W_) * W_ ** n / (1.0 + W_) ** (N + 1)
    tri2 = q_over(A_) * q_over(A_ * W_) * W_ ** m / (1.0 + W_) ** (N + 1)
    corner = float(np.sum(WA * WW * (tri1 + tri2)))

    def cells(i_idx, j_idx, ra, rb):
        i = np.asarray(i_idx, dtype=float)[:, None, None]
        j = np.asarray(j_idx, dtype=float)[:, None, None]
        a = i + ra[0][None, :, None]
        b = j + rb[0][None, None, :]
        val = rho(spec, 1.0 / a) * rho(spec, 1.0 / b) * a ** (m - 1) * b ** (n - 1) / (a + b) ** (N + 1)
        return float(np.sum(ra[1][None, :, None] * rb[1][None, None, :] * val))

    def ring(L_lo, L_hi):
        # cells with max(i, j) in [L_lo, L_hi); rho(1/a) is least polynomial-like on the unit strips
        i = np.arange(L_lo, L_hi)
        total = cells(i, np.zeros_like(i), base, edge) + cells(np.zeros_like(i), i, edge, base)
        for ii in i:
            jj = np.arange(1, ii + 1)
            total += cells(np.full(jj.size, ii), jj, base, base)
            jj = np.arange(1, ii)
            total += cells(jj, np.full(jj.size, ii), base, base)
        return total

    partial = []
    sizes = []
    acc = corner + ring(1, L0)
    L = L0
    partial.append(acc)
    sizes.append(L)
    for _ in range(levels - 1):
        acc += ring(L, 2 * L)
        L *= 2
        partial.append(acc)
        sizes.append(L)
    value = _log_extrapolate(sizes, partial)
    err = abs(value - _log_extrapolate(sizes[:-1], partial[:-1]))
    return ProvenancedValue(coef * float(value), coef * float(err), "bruteforce-quadrant", float(L))


# --- right-hand side -----------------------------------------------------------

def _r_over_w(w, y_spec: RhoSpec):
    """R(w)/w with R(w) = int_0^w rho(v) dv; equals int_0^1 rho(w t) dt."""
    w = np.asarray(w, dtype=float)
    if y_spec.variant == "dirac":
        return frac_over_x2_tail(1.0 / w) / w
    x = y_spec.lam * w
    return -np.log(-np.expm1(-x) / x) / x


def rhs_entry_invgamma(k: int, y_spec: RhoSpec, tol: float = 1e-12) -> ProvenancedValue:
    """b_k = <chi, g_k^x> = E[R(X_k)/X_k]."""
    if k < 1:
        raise ValueError("k must be >= 1")

    def f(x):
        x = np.asarray(x, dtype=float)
        return _r_over_w(x, y_spec) * _gamma_density(k, x)

    if y_spec.variant == "dirac":
        tail = quad.ReciprocalTail(period=1.0, exponent=float(k), spacings=(1.0,), start_periods=64)
        head = quad.integrate_interval(quad.Integrand(f, reciprocal_tail=tail), 0.0, 1.0, tol / 2)
    else:
        head = quad.gk15(f, 0.0, 1.0, tol / 2)
    rest = quad.integrate_semiinf(quad.Integrand(f, decay=quad.Decay("exponential", 1.0)), tol / 2, a=1.0)
    tot = head + rest
    return ProvenancedValue(float(tot.value), float(tot.error_estimate), "time-domain")


def rhs_entry_chi_direct(k: int, y_spec: RhoSpec, tol: float = 1e-9) -> float:
    """b_k = int_0^1 g_k^x(t) dt with g_k^x by the formula route (slow oracle)."""
    f = np.vectorize(lambda t: gx_invgamma(k, float(t), y_spec, tol=tol * 1e-2))
    return float(quad.gk15(f, 0.0, 1.0, tol).value)


# --- Mellin side ---------------------------------------------------------------

def mellin_phi(t, y_spec: RhoSpec):
    """phi(s) = zeta(s)/s E[Y^s] Gamma(1-s) on s = 1/2 + i t."""
    s = 0.5 + 1j * np.asarray(t, dtype=float)
    out = zeta_strip(s) / s * y_spec.mellin_moment(s) * gamma_complex(1.0 - s)
    return out


def mellin_weight_invgamma(t, y_spec: RhoSpec):
    """|phi(1/2 + i t)|^2."""
    out = np.abs(mellin_phi(t, y_spec)) ** 2
    return float(out) if np.ndim(t) == 0 else out


def gx_hat_invgamma(k: int, s, y_spec: RhoSpec):
    """-zeta(s)/s E[Y^s] Gamma(k-s)/Gamma(k)."""
    z = np.asarray(s, dtype=complex)
    return -zeta_strip(z) / z * y_spec.mellin_moment(z) * gamma_complex(1.0 - z) \
        * pochhammer_eval(k - 1, z) / math.factorial(k - 1)


@dataclass
class MellinSystem:
    rule: quad.LineGrid
    phi: np.ndarray
    y_spec: RhoSpec

    @classmethod
    def build(cls, y_spec: RhoSpec, T: float = 60.0, panel: float = 0.25) -> "MellinSystem":
        rule = quad.line_grid(T, panel)
        return cls(rule, mellin_phi(rule.t, y_spec), y_spec)

    def basis(self, k: int) -> np.ndarray:
        s = 0.5 + 1j * self.rule.t
        return -self.phi * pochhammer_eval(k - 1, s) / math.factorial(k - 1)

    def gram(self, n: int) -> GramSystem:
        s = 0.5 + 1j * self.rule.t
        vals = [self.basis(k) for k in range(1, n + 1)]
        G = np.zeros((n, n))
        E = np.zeros((n, n))
        for i in range(n):
            for j in range(i, n):
                v, e = self.rule.integrate((vals[i] * np.conj(vals[j])).real)
                G[i, j] = G[j, i] = v / (2 * math.pi)
                E[i, j] = E[j, i] = e / (2 * math.pi)
        b = np.array([self.rule.integrate((np.conj(vals[i]) / s).real)[0] / (2 * math.pi) for i in range(n)])
        return GramSystem(G, b, family="invgamma-mellin", entry_tolerances=np.maximum(E, 1e-15))

    def orthogonal_distance(self, n: int):
        return line_projection_distance(self.rule, self.phi, n)


_MELLIN_CACHE: dict = {}


def mellin_system(y_spec: RhoSpec) -> MellinSystem:
    key = (y_spec.variant, y_spec.lam)
    if key not in _MELLIN_CACHE:
        _MELLIN_CACHE[key] = MellinSystem.build(y_spec)
    return _MELLIN_CACHE[key]


# --- systems and distances -----------------------------------------------------

def gram_invgamma(n: int, y_spec: RhoSpec, tol: float = 1e-7) -> GramSystem:
    G = np.zeros((n, n))
    E = np.zeros((n, n))
    for i in range(n):
        for j in range(i, n):
            pv = gram_entry_invgamma(i, j, y_spec, tol)
            G[i, j] = G[j, i] = pv.value
            E[i, j] = E[j, i] = pv.est_error
    b = np.array([rhs_entry_invgamma(k, y_spec).value for k in range(1, n + 1)])
    return GramSystem(G, b, family="invgamma", entry_tolerances=E)


def distance_invgamma(n: int, y_spec: RhoSpec | None = None, system: GramSystem | None = None,
                      M: float = 10.0, max_condition: float = 1e14) -> DistanceReport:
    """Route (a) time-domain Bernstein Gram; route (b) Mellin least squares fills D2_crosscheck."""
    if n < 1:
        raise ValueError("n must be >= 1")
    spec = y_spec if y_spec is not None else RhoSpec.dirac()
    sys = system.leading(n) if system is not None else gram_invgamma(n, spec)
    rep = distance_from_system(sys, 1.0, route="time-domain", max_condition=max_condition)
    msys = mellin_system(spec).gram(n)
    rep_b = distance_from_system(msys, 1.0, route="mellin", max_condition=max_condition)
    rep.D2_crosscheck = rep_b.D2
    rep.flags.append("delicate(1,1)")
    rep.tail_diag = tail_diagnostic(rep.coefficients, spec, M)
    return rep


def moment_zk(k: int, alpha: float, y_spec: RhoSpec) -> float:
    """E[Z_k^alpha] = E[Y^alpha] Gamma(k - alpha)/Gamma(k), alpha < k."""
    if not alpha < k:
        return float("inf")
    ey = 1.0 if y_spec.variant == "dirac" else math.gamma(1 + alpha) / y_spec.lam ** alpha
    return ey * math.exp(gammaln(k - alpha) - gammaln(k))


__all__ = [
    "InvGammaBasis", "AFunction", "MellinSystem", "gx_invgamma", "a_function", "a_cache",
    "gram_entry_invgamma", "gram_entry_bruteforce", "rhs_entry_invgamma", "mellin_phi",
    "mellin_weight_invgamma", "gx_hat_invgamma", "gram_invgamma", "distance_invgamma", "moment_zk",
]
