"""Monte-Carlo version of the probabilistic approximation argument.

For fixed coefficients c_1..c_n the random approximant is

    sum_k (c_k / N) sum_{j<N} {Z_{k,j} / t},   Z_{k,j} = Y / X_k  i.i.d.,

and d2 is its squared L2 distance from chi, expanded into closed-form
<chi, {theta/t}> terms and pairwise integrals <{a/t}, {b/t}>.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .classical import chi_inner, pair_inner
from .specfun import RhoSpec

#: n * N above this is refused (the pair sum is quadratic in it)
PAIR_GUARD = 512
PAIR_EXTRA = 128
PAIR_TERMS = 512


class GuardError(ValueError):
    def __init__(self, n: int, N: int):
        super().__init__(f"n*N = {n * N} exceeds the pair-count guard {PAIR_GUARD}")
        self.bound = PAIR_GUARD


def _stream(seed: int, k: int, j: int) -> np.random.Generator:
    # counter-based generator keyed by (seed, k, j): any single draw is reproducible on its own
    key = np.random.SeedSequence([int(seed) & (2 ** 64 - 1), k, j]).generate_state(2, np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def sample_zk(k: int, y_spec: RhoSpec, stream: np.random.Generator, size: int | None = None):
    """Z = Y / X_k with X_k a sum of k unit exponentials."""
    if k < 1:
        raise ValueError("k must be >= 1")
    shape = () if size is None else (size,)
    x = stream.standard_exponential(shape + (k,)).sum(axis=-1)
    if y_spec.variant == "dirac":
        y = 1.0
    else:
        y = stream.standard_exponential(shape) / y_spec.lam
    z = y / x
    return float(z) if size is None else z


@dataclass
class MCExperiment:
    n: int
    N: int
    seed: int
    y_spec: RhoSpec = field(default_factory=RhoSpec.dirac)
    c: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self):
        self.c = np.atleast_1d(np.asarray(self.c, dtype=float))
        if self.N < 1 or self.n < 1:
            raise ValueError("n and N must be >= 1")
        if self.c.size != self.n:
            raise ValueError(f"need {self.n} coefficients, got {self.c.size}")
        if self.n * self.N > PAIR_GUARD:
            raise GuardError(self.n, self.N)

    def thetas(self) -> np.ndarray:
        """Samples, shape (n, N); row k-1 holds Z_{k,0..N-1}."""
        return np.array([[sample_zk(k, self.y_spec, _stream(self.seed, k, j)) for j in range(self.N)]
                         for k in range(1, self.n + 1)])

    def weights(self) -> np.ndarray:
        return np.repeat(self.c / self.N, self.N).reshape(self.n, self.N)


def _quadratic(theta: np.ndarray, w: np.ndarray) -> float:
    """sum_{i,j} w_i w_j <{theta_i/t}, {theta_j/t}>, upper triangle doubled."""
    iu, ju = np.triu_indices(theta.size)
    p = pair_inner(theta[iu], theta[ju], extra=PAIR_EXTRA, n_terms=PAIR_TERMS)
    terms = w[iu] * w[ju] * p * np.where(iu == ju, 1.0, 2.0)
    return math.fsum(terms)


def distance_for_thetas(theta, w) -> float:
    """|| chi - sum_i w_i {theta_i / t} ||^2."""
    theta = np.ravel(np.asarray(theta, dtype=float))
    w = np.ravel(np.asarray(w, dtype=float))
    lin = math.fsum(w * chi_inner(theta))
    return 1.0 - 2.0 * lin + _quadratic(theta, w)


def empirical_distance(exp: MCExperiment, theta: np.ndarray | None = None) -> float:
    theta = exp.thetas() if theta is None else theta
    return max(distance_for_thetas(theta, exp.weights()), 0.0)


def integrated_variance(theta) -> float:
    """int Var({Z/t}) dt estimated from a sample: sum ||e_j - mean||^2 / (M - 1)."""
    theta = np.ravel(np.asarray(theta, dtype=float))
    M = theta.size
    if M < 2:
        return float("nan")
    diag = math.fsum(pair_inner(theta, theta, extra=PAIR_EXTRA, n_terms=PAIR_TERMS))
    total = _quadratic(theta, np.ones(M))
    return max((diag - total / M) / (M - 1), 0.0)


@dataclass
class VarianceReport:
    N: int
    R2: float
    per_k: list
    d2: float

    def to_json(self) -> dict:
        return {"N": self.N, "R2": self.R2, "var_per_k": self.per_k, "d2": self.d2}


def variance_bound_check(exp: MCExperiment, theta: np.ndarray | None = None) -> VarianceReport:
    """R2 = (1/N) sum_k c_k^2 int Var({Z_k/t}) dt from the experiment's own samples."""
    theta = exp.thetas() if theta is None else theta
    per_k = [integrated_variance(theta[k]) for k in range(exp.n)]
    R2 = math.fsum(c * c * v for c, v in zip(exp.c, per_k)) / exp.N
    return VarianceReport(exp.N, R2, per_k, empirical_distance(exp, theta))


def record(exp: MCExperiment) -> dict:
    theta = exp.thetas()
    rep = variance_bound_check(exp, theta)
    return {"seed": exp.seed, "n": exp.n, "N": exp.N, "y": exp.y_spec.to_json(),
            "c": exp.c.tolist(), "d2": rep.d2, "R2": rep.R2,
            "witness_thetas": theta.tolist(),
            "theta_range": [float(theta.min()), float(theta.max())]}


def seed_sweep(c, y_spec: RhoSpec, N: int, seeds) -> list:
    n = len(np.atleast_1d(c))
    return [record(MCExperiment(n, N, int(s), y_spec, c)) for s in seeds]


def summarize(records: list) -> dict:
    d2 = np.array([r["d2"] for r in records])
    R2 = np.array([r["R2"] for r in records])
    q25, med, q75 = np.quantile(d2, [0.25, 0.5, 0.75])
    return {"N": records[0]["N"], "median_d2": float(med), "q25": float(q25), "q75": float(q75),
            "se_d2": float(np.std(d2, ddof=1) / math.sqrt(d2.size)) if d2.size > 1 else float("nan"),
            "median_R2": float(np.median(R2)), "min_d2": float(d2.min()),
            "witness_seed": int(records[int(np.argmin(d2))]["seed"])}


def sampled_moment(k: int, y_spec: RhoSpec, M: int, seed: int):
    """(k * mean(Z_k), standard error) from M draws on one substream."""
    z = sample_zk(k, y_spec, _stream(seed, k, -1 & 0xFFFFFFFF), size=M)
    return k * float(np.mean(z)), k * float(np.std(z, ddof=1) / math.sqrt(M))
