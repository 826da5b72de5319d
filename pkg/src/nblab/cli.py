"""``nb-lab`` command line: verify, gram, distance, moments, mc.

Exit codes: 0 ok, 1 numerical failure, 2 usage or configuration error.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__, checks, classical, invgamma, mc, recursive, report
from .algebra import gaussian_seed, xi_seed
from .solver import (
    ConditioningError,
    DistanceReport,
    NotPositiveDefinite,
    distance_from_system,
)
from .specfun import DomainError, RhoSpec

log = logging.getLogger("nblab")

FAMILIES = ("classical", "invgamma", "recursive")
SEEDS = {"xi": xi_seed, "gaussian": gaussian_seed}


class UsageError(ValueError):
    pass


@dataclass
class RunConfig:
    family: str = "classical"
    n_max: int = 6
    y: dict = field(default_factory=lambda: {"y": "dirac"})
    seed_function: str = "xi"
    r: list | None = None
    tol: float = 1e-7
    max_condition: float = 1e14
    out: str = "out"
    rng_seed: int = 0
    mc_N: list = field(default_factory=lambda: [4, 16, 64])
    mc_seeds: int = 32
    coefficients: list | None = None
    coefficients_file: str | None = None
    moments_j_max: int = 12
    grid_t_max: float = 30.0
    grid_step: float = 0.25
    tail_M: float = 10.0

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(d) - known)
        if unknown:
            raise UsageError(f"unknown config keys: {', '.join(unknown)}")
        cfg = cls(**d)
        cfg.validate()
        return cfg

    def validate(self) -> None:
        if self.family not in FAMILIES:
            raise UsageError(f"family must be one of {FAMILIES}, got {self.family!r}")
        if not isinstance(self.n_max, int) or self.n_max < 1:
            raise UsageError("n_max must be an integer >= 1")
        if self.seed_function not in SEEDS:
            raise UsageError(f"seed_function must be one of {sorted(SEEDS)}")
        try:
            RhoSpec.from_json(self.y)
        except (DomainError, KeyError, TypeError) as exc:
            raise UsageError(f"bad y spec {self.y!r}: {exc}") from exc
        if not self.tol > 0 or not self.max_condition > 1:
            raise UsageError("tol must be positive and max_condition > 1")
        if any(int(N) < 1 for N in self.mc_N) or self.mc_seeds < 1:
            raise UsageError("mc_N entries and mc_seeds must be >= 1")
        if self.r is not None and len(self.r) < self.n_max:
            raise UsageError("r needs at least n_max entries")
        if self.grid_step <= 0 or self.grid_t_max <= 0:
            raise UsageError("grid_t_max and grid_step must be positive")

    @property
    def y_spec(self) -> RhoSpec:
        return RhoSpec.from_json(self.y)

    def basis(self) -> recursive.RecursiveBasis:
        return recursive.RecursiveBasis(SEEDS[self.seed_function](), self.r, self.n_max)

    def to_json(self) -> dict:
        return dataclasses.asdict(self)


def load_config(args) -> RunConfig:
    d = {}
    if args.config:
        try:
            d = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(d, dict):
            raise UsageError("config must be a JSON object")
    for key, attr in (("out", "out"), ("tol", "tol"), ("rng_seed", "seed"), ("family", "family"),
                      ("n_max", "n_max")):
        v = getattr(args, attr, None)
        if v is not None:
            d[key] = v
    return RunConfig.from_dict(d)


def _out(cfg: RunConfig) -> Path:
    p = Path(cfg.out)
    p.mkdir(parents=True, exist_ok=True)
    return p


def _meta(cfg: RunConfig, **extra) -> dict:
    m = {"family": cfg.family, "tol": cfg.tol, "max_condition": cfg.max_condition}
    if cfg.family == "invgamma":
        m["y"] = cfg.y
    if cfg.family == "recursive":
        m["seed_function"] = cfg.seed_function
        m["r"] = "1/2" if cfg.r is None else [str(x) for x in cfg.r]
    m.update(extra)
    return m


# --- gram ----------------------------------------------------------------------

def build_system(cfg: RunConfig):
    n = cfg.n_max
    if cfg.family == "classical":
        return classical.gram_classical(n)
    if cfg.family == "invgamma":
        return invgamma.gram_invgamma(n, cfg.y_spec, tol=cfg.tol)
    basis = cfg.basis()
    return recursive.gram_recursive(basis, n, weight=basis.weight(max(n, 6)))


def cmd_gram(cfg: RunConfig) -> list:
    sys_ = build_system(cfg)
    tol = sys_.entry_tolerances
    E = np.broadcast_to(np.asarray(tol if tol is not None else 0.0, dtype=float), sys_.G.shape)
    route = {"classical": "time-domain", "invgamma": "bernstein", "recursive": "moments"}[cfg.family]
    m = [[report.ProvenancedValue(float(sys_.G[i, j]), float(E[i, j]), route) for j in range(sys_.n)]
         for i in range(sys_.n)]
    out = _out(cfg)
    p1 = report.emit_matrix(m, out / f"gram_{cfg.family}.csv", _meta(cfg), sym_tol=0.0)
    p2 = report.emit_table([{"k": k + 1, "b": float(v)} for k, v in enumerate(sys_.b)], ["k", "b"],
                           out / f"rhs_{cfg.family}.csv", _meta(cfg))
    return [p1, p2]


# --- distance --------------------------------------------------------------------

def distance_reports(cfg: RunConfig) -> list:
    sys_ = build_system(cfg)
    rows = []
    basis = cfg.basis() if cfg.family == "recursive" else None
    weight = basis.weight(max(cfg.n_max, 6)) if basis is not None else None
    for n in range(1, cfg.n_max + 1):
        try:
            if cfg.family == "classical":
                rep = classical.distance_classical(n, sys_, max_condition=cfg.max_condition)
            elif cfg.family == "invgamma":
                rep = invgamma.distance_invgamma(n, cfg.y_spec, system=sys_, M=cfg.tail_M,
                                                 max_condition=cfg.max_condition)
            elif basis.is_half:
                rep = recursive.distance_recursive(n, basis, weight=weight, max_condition=cfg.max_condition)
            else:
                rep = distance_from_system(sys_.leading(n), 1.0, route="mellin-gram",
                                           max_condition=cfg.max_condition)
        except (ConditioningError, NotPositiveDefinite) as exc:
            rep = DistanceReport(n, np.full(n, np.nan), float("nan"), getattr(exc, "condition", float("inf")),
                                 status=f"refused: {exc}")
        rows.append(rep)
    return rows


def cmd_distance(cfg: RunConfig) -> list:
    rows = distance_reports(cfg)
    out = _out(cfg)
    table = [{"n": r.n, "D2": r.D2, "D2_crosscheck": r.D2_crosscheck, "cond": r.condition_estimate,
              "status": r.status} for r in rows]
    paths = [report.emit_table(table, ["n", "D2", "D2_crosscheck", "cond", "status"],
                               out / f"distance_{cfg.family}.csv", _meta(cfg))]
    for r in rows:
        paths.append(report.write_json(r.to_json(), out / f"distance_{cfg.family}_n{r.n}.json"))
    if cfg.family == "recursive" and cfg.basis().is_half:
        paths.extend(cmd_moments(cfg))
    return paths


# --- moments ------------------------------------------------------------------

def cmd_moments(cfg: RunConfig) -> list:
    if cfg.family != "recursive":
        raise UsageError("moments needs the recursive family")
    jm = cfg.moments_j_max
    w = recursive.MomentWeight("seed", SEEDS[cfg.seed_function](), max(6, (jm + 1) // 2))
    rows = [{"j": j, "m_j": w.moment(j).value, "est_error": w.moment(j).est_error} for j in range(jm + 1)]
    meta = _meta(cfg, route="seed-mellin")
    if cfg.seed_function == "xi":
        xi = recursive.MomentWeight.xi_squared(w.j_max)
        meta["m0_xi_squared"] = xi.moment(0).value
        meta["m0_rel_diff"] = abs(xi.moment(0).value - rows[0]["m_j"]) / rows[0]["m_j"]
    out = _out(cfg)
    p1 = report.emit_table(rows, ["j", "m_j", "est_error"], out / "moments.csv", meta)
    t = np.arange(0.0, cfg.grid_t_max + cfg.grid_step / 2, cfg.grid_step)
    wt = w.weight(t)
    p2 = out / "weight_grid.dat"
    with open(p2, "w") as fh:
        fh.write(f"# weight |zeta(s)/s g0hat(s)|^2 on s = 1/2 + it, seed {cfg.seed_function}\n# t w(t)\n")
        for ti, wi in zip(t, wt):
            fh.write(f"{report.fmt(ti)} {report.fmt(wi)}\n")
    return [p1, p2]


# --- mc -----------------------------------------------------------------------

def _coefficients(cfg: RunConfig) -> np.ndarray:
    if cfg.coefficients is not None:
        return np.asarray(cfg.coefficients, dtype=float)
    if cfg.coefficients_file:
        p = Path(cfg.coefficients_file)
        if not p.exists():
            raise UsageError(f"coefficients file {p} not found; run `nb-lab distance` first")
        return np.asarray(report.read_json(p)["coefficients"], dtype=float)
    p = Path(cfg.out) / f"distance_invgamma_n{cfg.n_max}.json"
    if p.exists():
        return np.asarray(report.read_json(p)["coefficients"], dtype=float)
    raise UsageError("no coefficients: give `coefficients`, `coefficients_file`, or run "
                     "`nb-lab distance --family invgamma` into the same --out first")


def cmd_mc(cfg: RunConfig) -> list:
    if cfg.family != "invgamma":
        raise UsageError("mc needs the invgamma family")
    c = _coefficients(cfg)
    n = c.size
    for N in cfg.mc_N:
        if n * int(N) > mc.PAIR_GUARD:
            raise UsageError(f"n*N = {n * int(N)} exceeds the pair-count guard {mc.PAIR_GUARD}")
    out = _out(cfg) / "mc"
    out.mkdir(exist_ok=True)
    paths = []
    summary = []
    seeds = [cfg.rng_seed + i for i in range(cfg.mc_seeds)]
    for N in cfg.mc_N:
        recs = mc.seed_sweep(c, cfg.y_spec, int(N), seeds)
        for r in recs:
            paths.append(report.write_json(r, out / f"N{N}_seed{r['seed']}.json"))
        summary.append(mc.summarize(recs))
    paths.append(report.emit_table(summary, ["N", "median_d2", "q25", "q75", "se_d2", "median_R2", "min_d2",
                                             "witness_seed"], out / "summary.csv",
                                   _meta(cfg, coefficients=c.tolist(), seeds=len(seeds))))
    return paths


# --- verify ---------------------------------------------------------------------

def cmd_verify(suite: str, out: str | None = None) -> int:
    if suite not in (*checks.SUITES, "all"):
        raise UsageError(f"unknown suite {suite!r}; choose from {sorted(checks.SUITES) + ['all']}")
    results = checks.run_suite(suite, echo=lambda s: print(s, flush=True))
    failed = [c.to_json() for c in results if not c.passed]
    if out:
        report.write_json({"suite": suite, "results": [c.to_json() for c in results]},
                          Path(out) / f"verify_{suite}.json")
    if failed:
        print(json.dumps({"failed": [f["name"] for f in failed]}))
        return 1
    return 0


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON RunConfig file")
    common.add_argument("--out", help="output directory")
    common.add_argument("--tol", type=float, help="quadrature tolerance")
    common.add_argument("--seed", type=int, help="RNG seed (mc)")
    common.add_argument("--family", choices=FAMILIES)
    common.add_argument("--n-max", dest="n_max", type=int)
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="nb-lab", description="Nyman-Beurling style distance experiments")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    v = sub.add_parser("verify", parents=[common], help="run identity suites")
    v.add_argument("--suite", default="all")
    for name, hlp in (("gram", "Gram matrix and right-hand side"), ("distance", "D_n^2 table"),
                      ("moments", "moment table and weight grid"), ("mc", "Monte-Carlo experiment")):
        sub.add_parser(name, parents=[common], help=hlp)
    return p


def main(argv=None) -> int:
    parser = _parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    t0 = time.perf_counter()
    try:
        if args.command == "verify":
            return cmd_verify(args.suite, args.out)
        cfg = load_config(args)
        fn = {"gram": cmd_gram, "distance": cmd_distance, "moments": cmd_moments, "mc": cmd_mc}[args.command]
        for path in fn(cfg):
            print(path)
    except UsageError as exc:
        print(f"nb-lab: error: {exc}", file=sys.stderr)
        return 2
    except (ArithmeticError, np.linalg.LinAlgError, RuntimeError, DomainError) as exc:
        print(f"nb-lab: numerical failure: {exc}", file=sys.stderr)
        return 1
    log.info("done in %.1fs", time.perf_counter() - t0)
    return 0


if __name__ == "__main__":
    sys.exit(main())
