"""D_n^2 for all three families with both routes, written as CSV tables."""
import argparse
from pathlib import Path

from nblab import classical, invgamma, recursive, report
from nblab.solver import ConditioningError
from nblab.specfun import RhoSpec


def rows_classical(n_max):
    sys = classical.gram_classical(n_max)
    for n in range(1, n_max + 1):
        yield classical.distance_classical(n, sys)


def rows_invgamma(n_max, spec):
    sys = invgamma.gram_invgamma(n_max, spec)
    for n in range(1, n_max + 1):
        try:
            yield invgamma.distance_invgamma(n, spec, system=sys)
        except ConditioningError as exc:
            print(f"  n={n}: refused ({exc})")
            return


def rows_recursive(n_max):
    basis = recursive.RecursiveBasis(k_max=n_max)
    w = basis.weight(max(n_max, 6))
    for n in range(1, n_max + 1):
        try:
            yield recursive.distance_recursive(n, basis, weight=w)
        except ConditioningError as exc:
            # the Stieltjes route needs no moment matrix and keeps going
            d2, _, _ = recursive.orthogonal_distance(n, basis, w)
            print(f"  n={n}: monomial route refused ({exc}); orthogonal D2={d2:.8f}")


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="out/tables")
    ap.add_argument("--n-classical", type=int, default=20)
    ap.add_argument("--n-invgamma", type=int, default=10)
    ap.add_argument("--n-recursive", type=int, default=10)
    a = ap.parse_args()
    out = Path(a.out)
    jobs = {
        "classical": rows_classical(a.n_classical),
        "invgamma_dirac": rows_invgamma(a.n_invgamma, RhoSpec.dirac()),
        "invgamma_exp": rows_invgamma(a.n_invgamma, RhoSpec.exponential(1.0)),
        "recursive": rows_recursive(a.n_recursive),
    }
    for name, gen in jobs.items():
        print(name)
        table = []
        for r in gen:
            cross = "-" if r.D2_crosscheck is None else f"{r.D2_crosscheck:.8f}"
            print(f"  n={r.n:2d}  D2={r.D2:.8f}  cross={cross}  cond={r.condition_estimate:.2e}")
            table.append({"n": r.n, "D2": r.D2, "D2_crosscheck": r.D2_crosscheck,
                          "cond": r.condition_estimate, "flags": " ".join(r.flags)})
        report.emit_table(table, ["n", "D2", "D2_crosscheck", "cond", "flags"], out / f"{name}.csv")


if __name__ == "__main__":
    main()
