"""Adaptive Gauss-Kronrod quadrature for the improper integrals of the lab.

Panels are refined in batches: every round evaluates all open panels in one
vectorised call, then bisects the largest-error panels until the summed
Kronrod-Gauss discrepancy drops below tolerance.

Integrands made of fractional parts {theta/t} have kinks at theta/m that pile
up at t = 0. Those are handled by declaring a ``ReciprocalTail``: near 0 the
substitution x = 1/t turns the integral into a periodic-times-smooth integral
on [X, inf), evaluated on period-aligned cut-offs X, 2X, 4X, ... and
Richardson-extrapolated in powers of 1/X.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

_XGK = np.array([0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
                 0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
                 0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
                 0.207784955007898467600689403773245, 0.0])
_WGK = np.array([0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
                 0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
                 0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
                 0.204432940075298892414161999234649, 0.209482141084727828012999174891714])
_WG = np.array([0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                0.381830050505118944950369775488975, 0.417959183673469387755102040816327])

NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])          # 15 Kronrod nodes, ascending
KRONROD_W = np.concatenate([_WGK[:-1], _WGK[::-1]])
GAUSS_W = np.zeros(15)
GAUSS_W[[1, 3, 5]] = _WG[:3]
GAUSS_W[[9, 11, 13]] = _WG[:3][::-1]
GAUSS_W[7] = _WG[3]

EPS = np.finfo(float).eps

# K - G is even and blind to odd error (two equal jumps placed symmetrically in a
# panel cancel in it). The odd null rule wk * P_13 annihilates all even functions and
# odd polynomials up to degree 11; it is scaled to the size of K - G.
_P13 = np.polynomial.legendre.legval(NODES, [0] * 13 + [1])
ODD_NULL = KRONROD_W * _P13
ODD_NULL *= np.linalg.norm(KRONROD_W - GAUSS_W) / np.linalg.norm(ODD_NULL)


class QuadratureError(RuntimeError):
    """Adaptive refinement did not reach tolerance; ``partial`` holds the best result."""

    def __init__(self, message: str, partial: "QuadResult"):
        super().__init__(message)
        self.partial = partial


@dataclass(frozen=True)
class Decay:
    """How an integrand decays at +inf: algebraic (|f| ~ t^-rate), gaussian, exponential (e^{-rate t})."""

    kind: str = "none"
    rate: float = 0.0

    def __post_init__(self):
        if self.kind not in ("none", "algebraic", "gaussian", "exponential"):
            raise ValueError(f"unknown decay kind {self.kind!r}")
        if self.kind == "algebraic" and self.rate <= 1:
            raise ValueError("algebraic decay needs rate > 1 for integrability")


@dataclass(frozen=True)
class ReciprocalTail:
    """Structure of f near t = 0 in the variable x = 1/t.

    f(1/x)/x^2 must be (a function periodic in x with ``period``) times (a
    power series in 1/x), with leading tail power x^-exponent after
    integration. ``spacings`` lists the kink spacings in x.
    """

    period: float
    exponent: complex = 1.0
    spacings: tuple = (1.0,)
    levels: int = 6
    start_periods: int = 0


@dataclass
class Integrand:
    evaluator: Callable
    breakpoints: Sequence[float] | None = None
    decay: Decay = field(default_factory=Decay)
    reciprocal_tail: ReciprocalTail | None = None
    even: bool = False

    def __post_init__(self):
        if self.breakpoints is not None:
            bp = np.asarray(self.breakpoints, dtype=float)
            if bp.size > 1 and np.any(np.diff(bp) <= 0):
                raise ValueError("breakpoints must be strictly increasing")


@dataclass
class QuadResult:
    value: complex | float
    error_estimate: float
    evaluations: int
    truncation_bound: float = 0.0

    def __add__(self, other: "QuadResult") -> "QuadResult":
        return QuadResult(self.value + other.value, self.error_estimate + other.error_estimate,
                          self.evaluations + other.evaluations, self.truncation_bound + other.truncation_bound)

    def scaled(self, c) -> "QuadResult":
        return QuadResult(self.value * c, self.error_estimate * abs(c), self.evaluations,
                          self.truncation_bound * abs(c))


def _clean(value):
    if isinstance(value, complex) or np.iscomplexobj(value):
        return complex(value)
    return float(value)


def gk15(f: Callable, a: float, b: float, tol: float = 1e-10, breakpoints=None,
         rel_tol: float = 0.0, max_panels: int = 200_000, panels_out: list | None = None) -> QuadResult:
    """Adaptive GK15 on [a, b], splitting first at every breakpoint inside (a, b).

    If ``panels_out`` is a list, the final panel edges (lo, hi) are appended to it.
    """
    if not b > a:
        if a == b:
            return QuadResult(0.0, 0.0, 0)
        raise ValueError("gk15 needs a <= b")
    edges = [a]
    if breakpoints is not None:
        bp = np.asarray(breakpoints, dtype=float)
        bp = bp[(bp > a) & (bp < b)]
        edges.extend(np.sort(bp).tolist())
    edges.append(b)
    lo = np.array(edges[:-1], dtype=float)
    hi = np.array(edges[1:], dtype=float)
    kron, err = _gk_panels(f, lo, hi)
    n_eval = 15 * lo.size
    while True:
        total = kron.sum()
        target = max(tol, rel_tol * abs(total))
        total_err = err.sum()
        if total_err <= target:
            if panels_out is not None:
                panels_out.append((lo, hi))
            return QuadResult(_clean(total), float(total_err), n_eval)
        # bisect the largest-error panels until the rest fit in half the budget
        order = np.argsort(err)[::-1]
        cum_rest = total_err - np.cumsum(err[order])
        n_split = int(np.searchsorted(-cum_rest, -0.5 * target)) + 1
        chosen = order[:min(n_split, order.size)]
        # panels too narrow to split stay as they are
        width_ok = (hi[chosen] - lo[chosen]) > 8 * EPS * np.maximum(np.abs(lo[chosen]), np.abs(hi[chosen]))
        # panels at the round-off floor cannot improve
        above_floor = err[chosen] > 50 * EPS * np.abs(kron[chosen])
        chosen = chosen[width_ok & above_floor]
        if chosen.size == 0:
            if panels_out is not None:
                panels_out.append((lo, hi))
            return QuadResult(_clean(total), float(total_err), n_eval)
        if lo.size + chosen.size > max_panels:
            raise QuadratureError(f"no convergence on [{a}, {b}] after {n_eval} evaluations",
                                  QuadResult(_clean(total), float(total_err), n_eval))
        mid = 0.5 * (lo[chosen] + hi[chosen])
        new_lo = np.concatenate([lo[chosen], mid])
        new_hi = np.concatenate([mid, hi[chosen]])
        k_new, e_new = _gk_panels(f, new_lo, new_hi)
        n_eval += 15 * new_lo.size
        keep = np.ones(lo.size, dtype=bool)
        keep[chosen] = False
        lo = np.concatenate([lo[keep], new_lo])
        hi = np.concatenate([hi[keep], new_hi])
        kron = np.concatenate([kron[keep], k_new])
        err = np.concatenate([err[keep], e_new])


def _gk_panels(f: Callable, lo: np.ndarray, hi: np.ndarray):
    centre = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    x = centre[:, None] + half[:, None] * NODES[None, :]
    fx = np.asarray(f(x.ravel())).reshape(x.shape)
    kron = half * (fx @ KRONROD_W)
    gauss = half * (fx @ GAUSS_W)
    odd = np.abs(half * (fx @ ODD_NULL))
    err = np.maximum(np.maximum(np.abs(kron - gauss), odd), 50 * EPS * np.abs(kron))
    return kron, err


def frac_breakpoints(thetas: Sequence[float], lo: float, hi: float, cap: int = 10_000) -> np.ndarray:
    """Kinks theta/m of t -> {theta/t} inside (lo, hi), at most ``cap`` per theta."""
    pts = []
    for th in thetas:
        m_lo = max(1, int(math.floor(th / hi)))
        m_hi = int(math.ceil(th / lo)) if lo > 0 else m_lo + cap
        m_hi = min(m_hi, m_lo + cap)
        m = np.arange(m_lo, m_hi + 1, dtype=float)
        p = th / m
        pts.append(p[(p > lo) & (p < hi)])
    if not pts:
        return np.array([])
    return np.unique(np.concatenate(pts))


def _richardson(values: list, exponent: complex) -> tuple:
    """Eliminate X^-(p), X^-(p+1), ... from partial integrals at X, 2X, 4X, ..."""
    table = [list(values)]
    for i in range(1, len(values)):
        r = 2.0 ** (-(exponent + i - 1))
        prev = table[-1]
        table.append([(prev[j + 1] - r * prev[j]) / (1 - r) for j in range(len(prev) - 1)])
    best = table[-1][0]
    err = abs(table[-1][0] - table[-2][-1]) if len(table) > 1 else float("inf")
    return best, err


def reciprocal_region(f: Callable, tail: ReciprocalTail, t_cut: float, tol: float) -> QuadResult:
    """Integral of f over (0, t_cut) via x = 1/t on [1/t_cut, inf) with period-aligned extrapolation.

    1/t_cut must be a multiple of ``tail.period``.
    """
    x0 = 1.0 / t_cut

    def g(x):
        x = np.asarray(x, dtype=float)
        return f(1.0 / x) / (x * x)

    partial = []
    total = QuadResult(0.0, 0.0, 0)
    lo = x0
    hi = x0
    for level in range(tail.levels):
        hi = x0 * 2 ** level
        if hi > lo:
            kinks = np.concatenate([np.arange(math.ceil(lo / sp) * sp, hi, sp) for sp in tail.spacings])
            piece = gk15(g, lo, hi, tol=tol / (4 * tail.levels), breakpoints=np.unique(kinks))
            total = total + piece
        partial.append(total.value)
        lo = hi
    value, rich_err = _richardson(partial, tail.exponent)
    return QuadResult(_clean(value), float(total.error_estimate + rich_err), total.evaluations)


def _reciprocal_cut(tail: ReciprocalTail, t_lo_hint: float) -> float:
    """Period-aligned t cut-off at or below ``t_lo_hint``."""
    periods = max(tail.start_periods, int(math.ceil(1.0 / (t_lo_hint * tail.period))))
    return 1.0 / (periods * tail.period)


def integrate_interval(f: Integrand, a: float, b: float, tol: float = 1e-10, rel_tol: float = 0.0) -> QuadResult:
    """Finite interval [a, b]; if a == 0 and a reciprocal tail is declared, (0, t_cut) goes through it."""
    if a == 0.0 and f.reciprocal_tail is not None:
        tail = f.reciprocal_tail
        hint = min(b, 1.0 / (64 * max(tail.spacings)))
        t_cut = _reciprocal_cut(tail, hint)
        head = reciprocal_region(f.evaluator, tail, t_cut, tol / 2)
        if t_cut >= b:
            return head
        bp = f.breakpoints
        if bp is None:
            bp = frac_breakpoints([1.0 / sp for sp in tail.spacings], t_cut, b)
        body = gk15(f.evaluator, t_cut, b, tol / 2, breakpoints=bp, rel_tol=rel_tol)
        return head + body
    return gk15(f.evaluator, a, b, tol, breakpoints=f.breakpoints, rel_tol=rel_tol)


def integrate_unit(f: Integrand, tol: float = 1e-10) -> QuadResult:
    """Integral over (0, 1)."""
    if not tol > 0:
        raise ValueError("tol must be positive")
    return integrate_interval(f, 0.0, 1.0, tol)


def _truncation_point(fn: Callable, decay: Decay, start: float, tol: float) -> tuple:
    """Smallest probed T >= start with estimated tail beyond T below tol/2."""
    T = max(start, 8.0)
    for _ in range(400):
        v = float(np.max(np.abs(np.asarray(fn(np.array([T, 1.05 * T]))))))
        if decay.kind == "exponential":
            bound = v / decay.rate
        else:
            bound = v / (2.0 * T)
        if bound <= tol / 2:
            return T, bound
        T *= 1.15
    raise QuadratureError("tail never dropped below tolerance", QuadResult(float("nan"), float("inf"), 0))


def integrate_semiinf(f: Integrand, tol: float = 1e-10, a: float = 0.0, rel_tol: float = 0.0) -> QuadResult:
    """Integral over (a, inf), a >= 0: split at max(a, 1), tail mapped or truncated per ``decay``."""
    if not tol > 0:
        raise ValueError("tol must be positive")
    decay = f.decay
    if decay.kind == "none":
        raise ValueError("semi-infinite integral needs a decay hint")
    split = max(a, 1.0)
    head = integrate_interval(f, a, split, tol / 2, rel_tol=rel_tol) if split > a else QuadResult(0.0, 0.0, 0)
    if decay.kind == "algebraic":
        fn = f.evaluator

        def mapped(x):
            x = np.asarray(x, dtype=float)
            return fn(split / x) * split / (x * x)

        tail = gk15(mapped, 0.0, 1.0, tol / 2, rel_tol=rel_tol)
        return head + tail
    T, bound = _truncation_point(f.evaluator, decay, split, tol)
    bp = None
    if f.breakpoints is not None:
        bp = np.asarray(f.breakpoints, dtype=float)
    body = gk15(f.evaluator, split, T, tol / 2, breakpoints=bp, rel_tol=rel_tol)
    body.truncation_bound = bound
    return head + body


def integrate_line(f: Integrand, tol: float = 1e-10, plancherel: bool = False, rel_tol: float = 0.0) -> QuadResult:
    """Integral over the real line; evenness is exploited when declared.

    With ``plancherel`` the result carries the 1/(2 pi) Mellin-Plancherel factor.
    """
    if f.even:
        res = integrate_semiinf(f, tol / 2, rel_tol=rel_tol).scaled(2.0)
    else:
        fn = f.evaluator
        mirrored = Integrand(lambda t: fn(-np.asarray(t)), decay=f.decay)
        res = integrate_semiinf(f, tol / 2, rel_tol=rel_tol) + integrate_semiinf(mirrored, tol / 2, rel_tol=rel_tol)
    if plancherel:
        res = res.scaled(1.0 / (2.0 * math.pi))
    return res


def integrate_2d(f: Callable, outer: Callable, tol: float = 1e-8) -> QuadResult:
    """Iterated integral: ``outer(g, tol)`` integrates g(x) = inner(x) where inner uses tol/10.

    ``f(x, tol)`` must return the inner QuadResult for a scalar x.
    """
    evals = [0]
    errs = [0.0]

    def g(xs):
        out = []
        for x in np.atleast_1d(xs):
            r = f(float(x), tol / 10)
            evals[0] += r.evaluations
            errs[0] = max(errs[0], r.error_estimate)
            out.append(r.value)
        return np.array(out)

    res = outer(g, tol)
    res.evaluations += evals[0]
    return res


@dataclass
class LineGrid:
    """Composite GK15 rule on [-T, T] with panels of fixed width (edges land on multiples of it)."""

    t: np.ndarray
    wk: np.ndarray
    wg: np.ndarray
    n_panels: int
    T: float

    def integrate(self, values, T: float | None = None):
        """(value, error estimate) of int values(t) dt, optionally over |t| <= T only."""
        v = np.asarray(values)
        mask = np.ones(self.t.size, dtype=bool) if T is None else np.abs(self.t) <= T
        val = np.sum(self.wk[mask] * v[mask])
        d = ((self.wk - self.wg) * np.where(mask, v, 0)).reshape(self.n_panels, 15)
        return val, float(np.sum(np.abs(d.sum(axis=1))))


def line_grid(T: float, panel: float = 0.25) -> LineGrid:
    n = int(round(2 * T / panel))
    edges = -T + panel * np.arange(n + 1)
    lo, hi = edges[:-1], edges[1:]
    c = 0.5 * (lo + hi)
    h = 0.5 * (hi - lo)
    t = (c[:, None] + h[:, None] * NODES[None, :]).ravel()
    wk = (h[:, None] * KRONROD_W[None, :]).ravel()
    wg = (h[:, None] * GAUSS_W[None, :]).ravel()
    return LineGrid(t, wk, wg, n, float(T))
