"""Identity and cross-route checks, grouped in suites.

Each check returns a :class:`Check`; ``run_suite`` collects them. The CLI
``verify`` command and the acceptance tests both go through here.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import classical, invgamma, quad, recursive
from .algebra import xi_seed
from .specfun import (
    RhoSpec,
    alouin_mellin,
    gamma_complex,
    mellin_frac,
    pochhammer_eval,
    rho,
    zeta_eta_oracle,
    zeta_strip,
)


@dataclass
class Check:
    name: str
    residual: float
    tol: float
    detail: dict = field(default_factory=dict)
    seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return bool(np.isfinite(self.residual) and self.residual <= self.tol)

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'} {self.name}: residual {self.residual:.3e} (tol {self.tol:.1e})"

    def to_json(self) -> dict:
        return {"name": self.name, "passed": self.passed, "residual": self.residual, "tol": self.tol,
                "seconds": self.seconds, "detail": self.detail}


def _timed(fn: Callable[[], Check]) -> Check:
    t0 = time.perf_counter()
    c = fn()
    c.seconds = time.perf_counter() - t0
    return c


# --- specfun -------------------------------------------------------------------

def strip_points(n: int = 20, seed: int = 7) -> np.ndarray:
    rng = np.random.default_rng(seed)
    return rng.uniform(0.05, 0.95, n) + 1j * rng.uniform(-25.0, 25.0, n)


def check_reflection() -> Check:
    s = np.concatenate([strip_points(), np.array([0.5, 0.25 + 3j, 1.5 - 2j, -0.3 + 0.7j])])
    lhs = gamma_complex(s) * gamma_complex(1 - s)
    rhs = np.pi / np.sin(np.pi * s)
    return Check("gamma reflection", float(np.max(np.abs(lhs / rhs - 1))), 1e-12)


def check_pochhammer(k_max: int = 12) -> Check:
    s = strip_points(8)
    worst = 0.0
    for k in range(k_max + 1):
        lhs = pochhammer_eval(k, s)
        rhs = gamma_complex(k + 1 - s) / gamma_complex(1 - s)
        worst = max(worst, float(np.max(np.abs(lhs - rhs) / np.abs(rhs))))
    return Check(f"pochhammer = Gamma ratio (k <= {k_max})", worst, 1e-11)


def _log_line_integral(f, left: float, right: float, tol: float = 1e-11) -> complex:
    """int_0^inf f(x) dx as int f(e^y) e^y dy over [-left, right]."""
    g = lambda y: f(np.exp(y)) * np.exp(y)
    return complex(quad.gk15(g, -left, right, tol, breakpoints=np.arange(-left, right, 2.0)).value)


def check_alouin() -> Check:
    worst = 0.0
    for s in strip_points(6, seed=11):
        s = complex(s.real, s.imag / 5)
        for k in (1, 2, 3, 5):
            f = lambda x, s=s, k=k: x ** (s - 1) / (1 + x) ** k
            num = _log_line_integral(f, 40.0 / s.real, 40.0 / (k - s.real))
            worst = max(worst, abs(num - complex(alouin_mellin(k, s))))
    return Check("alouin Mellin identity vs quadrature", worst, 1e-6)


def mellin_frac_quadrature(s: complex, tol: float = 1e-10) -> complex:
    """int_0^inf {1/x} x^{s-1} dx: (0, 1) through the reciprocal tail, (1, inf) mapped."""
    def f(x):
        x = np.asarray(x, dtype=float)
        return (1.0 / x - np.floor(1.0 / x)) * x ** (s - 1)

    tail = quad.ReciprocalTail(period=1.0, exponent=s, spacings=(1.0,), start_periods=64)
    head = quad.integrate_interval(quad.Integrand(f, reciprocal_tail=tail), 0.0, 1.0, tol)
    rest = quad.integrate_semiinf(quad.Integrand(lambda x: np.asarray(x, dtype=float) ** (s - 2),
                                                 decay=quad.Decay("algebraic", 2 - s.real)), tol, a=1.0)
    return complex(head.value + rest.value)


def check_mellin_frac(n: int = 20) -> Check:
    pts = strip_points(n, seed=3)
    pts = pts.real + 1j * pts.imag / 2.5
    worst = max(abs(mellin_frac_quadrature(complex(s)) - complex(mellin_frac(complex(s)))) for s in pts)
    return Check(f"Mellin of {{1/x}} = -zeta(s)/s ({n} strip points)", worst, 1e-6)


def rho_exp_quadrature(t: float, lam: float, tol: float = 1e-12) -> float:
    """E{Y/t}, Y ~ Exp(lam), with breakpoints at y = m t."""
    f = lambda y: (np.asarray(y) / t - np.floor(np.asarray(y) / t)) * lam * np.exp(-lam * np.asarray(y))
    upper = 40.0 / lam
    bp = np.arange(t, upper, t)[:20000]
    return float(quad.gk15(f, 0.0, upper, tol, breakpoints=bp).value)


def check_rho_exponential() -> Check:
    worst = 0.0
    for lam in (0.5, 1.0, 3.0):
        for t in (0.05, 0.3, 1.0, 2.7, 10.0):
            worst = max(worst, abs(rho_exp_quadrature(t, lam) - rho(RhoSpec.exponential(lam), t)))
    return Check("rho exponential closed form vs E{Y/t}", worst, 1e-8)


def check_zeta_oracle() -> Check:
    worst = 0.0
    for sigma in (0.3, 0.5, 0.7):
        for t in np.linspace(0.0, 100.0, 41):
            s = complex(sigma, t)
            a = complex(zeta_strip(s))
            b = zeta_eta_oracle(s)
            worst = max(worst, abs(a - b) / abs(b))
    return Check("zeta Euler-Maclaurin vs eta oracle (relative)", worst, 1e-9)


def check_zeta_zero() -> Check:
    return Check("|zeta(1/2 + 14.134725 i)|", abs(complex(zeta_strip(0.5 + 14.134725j))), 1e-4)


# --- mellin / recursive family ---------------------------------------------------

def check_xi_normalization() -> Check:
    seed_w = recursive.MomentWeight("seed", xi_seed(), 6)
    xi_w = recursive.MomentWeight.xi_squared(6)
    rel = {}
    for j in (0, 2, 4):
        a, b = seed_w.moment(j).value, xi_w.moment(j).value
        rel[j] = abs(a - b) / abs(b)
    return Check("Xi^2 moments vs seed-Mellin moments (m0, m2, m4)", max(rel.values()), 1e-8,
                 {"m0": xi_w.moment(0).value, "relative": rel})


def check_b_recursion(k_max: int = 3) -> Check:
    basis = recursive.RecursiveBasis(k_max=k_max)
    w = basis.weight()
    diffs = [abs(recursive.rhs_recursive(k, basis, "recursion", w).value
                 - recursive.rhs_recursive(k, basis, "mellin", w).value) for k in range(1, k_max + 1)]
    return Check("b recursion vs Mellin b_1..b_3", max(diffs), 1e-6)


def check_convolution_oracle() -> Check:
    basis = recursive.RecursiveBasis(k_max=2)
    worst = 0.0
    for k in (0, 1, 2):
        for t in (0.0, 1.0, 3.0):
            s = 0.5 + 1j * t
            a = complex(recursive.gx_hat_recursive(k, s, basis))
            b = recursive.gx_hat_convolution_oracle(k, s, basis)
            worst = max(worst, abs(a - b) / max(abs(a), 1.0))
    return Check("recursive g_k^x Mellin closed form vs convolution", worst, 1e-6)


def check_weight_decay() -> Check:
    t = np.linspace(5.0, 30.0, 101)
    worst = 0.0
    for spec in (RhoSpec.dirac(), RhoSpec.exponential(1.0)):
        scaled = invgamma.mellin_weight_invgamma(t, spec) * np.exp(np.pi * t)
        worst = max(worst, float(np.max(scaled)))
    return Check("e^{pi t} |phi|^2 bounded on [5, 30]", worst, 10.0)


# --- gram -----------------------------------------------------------------------

def check_bernstein(specs=(RhoSpec.dirac(), RhoSpec.exponential(1.0)), n_max: int = 2) -> Check:
    worst = 0.0
    rows = []
    for spec in specs:
        for n in range(n_max + 1):
            for m in range(n, n_max + 1):
                a = invgamma.gram_entry_invgamma(n, m, spec).value
                b = invgamma.gram_entry_bruteforce(n, m, spec).value
                rows.append((spec.variant, n, m, a, b))
                worst = max(worst, abs(a - b))
    return Check("Bernstein Gram vs brute-force quadrant (n, m <= 2)", worst, 1e-5, {"entries": rows})


def check_recursive_structure(n: int = 7) -> Check:
    basis = recursive.RecursiveBasis(k_max=n - 1)
    # the Mellin route computes every entry, so the zero pattern is a genuine check
    G, _, _ = recursive.gram_mellin(basis, n)
    m0 = G[0, 0]
    off = max(abs(G[k, k + 1]) for k in range(n - 1)) / m0
    pair = abs(G[0, 2] + G[1, 1]) / abs(G[1, 1])
    H = recursive.sign_strip_to_moment_matrix(G)
    hankel = max(abs(H[i, j] - H[i + 1, j - 1]) for i in range(n - 1) for j in range(1, n)) / np.max(np.abs(H))
    eig = float(np.min(np.linalg.eigvalsh(H[:6, :6] / np.max(np.abs(H[:6, :6])))))
    Gt = recursive.block_hankel_reorder(G)
    ne = (n + 1) // 2
    layout = max(float(np.max(np.abs(Gt[:ne, ne:]))) / m0,
                 float(np.max(np.abs(recursive.inverse_block_hankel_reorder(Gt) - G))))
    res = max(off, pair, hankel, layout, max(0.0, -eig))
    return Check("recursive Gram structure (odd entries, G13 = -G22, Hankel, PSD, block layout)", res, 1e-8,
                 {"G_k_k+1/m0": off, "G13+G22": pair, "hankel": hankel, "min_eig": eig, "block": layout})


def check_recurrence_third(n: int = 6) -> Check:
    r = [1 / 3] * n
    basis = recursive.RecursiveBasis(r=r, k_max=n)
    G, _, _ = recursive.gram_mellin(basis, n)
    return Check("Gram recurrence residual at r = 1/3", recursive.gram_recurrence_residual(G, r), 1e-7,
                 {"max_G": float(np.max(np.abs(G)))})


def _dual_route_rows(family: str, n_max: int, spec: RhoSpec | None = None) -> list:
    rows = []
    if family == "classical":
        sys = classical.gram_classical(n_max)
        for n in range(1, n_max + 1):
            rows.append(classical.distance_classical(n, sys))
    elif family == "invgamma":
        sys = invgamma.gram_invgamma(n_max, spec)
        for n in range(1, n_max + 1):
            rows.append(invgamma.distance_invgamma(n, spec, system=sys))
    else:
        basis = recursive.RecursiveBasis(k_max=n_max)
        w = basis.weight(max(n_max, 6))
        for n in range(1, n_max + 1):
            rows.append(recursive.distance_recursive(n, basis, weight=w))
    return rows


def check_dual_route(family: str, n_max: int, spec: RhoSpec | None = None) -> Check:
    rows = _dual_route_rows(family, n_max, spec)
    excess = 0.0
    prev = 1.0
    mono = 0.0
    for r in rows:
        tol = max(1e-4, 1e-2 * r.D2)
        if r.D2_crosscheck is None or not 0.0 < r.D2 < 1.0:
            excess = float("inf")
        else:
            excess = max(excess, abs(r.D2 - r.D2_crosscheck) / tol)
        mono = max(mono, r.D2 - prev)
        prev = r.D2
    label = family + (f" ({spec.variant})" if spec is not None else "")
    # residual expressed in units of the per-n tolerance; monotonicity violations count in full
    res = excess if mono <= 0 else float("inf")
    return Check(f"dual-route D2 {label}, n <= {n_max}", res, 1.0,
                 {"D2": [r.D2 for r in rows], "D2_crosscheck": [r.D2_crosscheck for r in rows],
                  "cond": [r.condition_estimate for r in rows]})


SUITES = {
    "specfun": [check_reflection, check_pochhammer, check_alouin, check_mellin_frac, check_rho_exponential,
                check_zeta_oracle, check_zeta_zero],
    "mellin": [check_xi_normalization, check_b_recursion, check_convolution_oracle, check_weight_decay],
    "gram": [check_recursive_structure, check_recurrence_third, check_bernstein,
             lambda: check_dual_route("classical", 10),
             lambda: check_dual_route("invgamma", 6, RhoSpec.dirac()),
             lambda: check_dual_route("invgamma", 6, RhoSpec.exponential(1.0)),
             lambda: check_dual_route("recursive", 6)],
}


def run_suite(name: str, echo: Callable[[str], None] | None = None) -> list:
    if name == "all":
        names = list(SUITES)
    elif name in SUITES:
        names = [name]
    else:
        raise KeyError(name)
    out = []
    for nm in names:
        for fn in SUITES[nm]:
            c = _timed(fn)
            out.append(c)
            if echo is not None:
                echo(c.line())
    return out
