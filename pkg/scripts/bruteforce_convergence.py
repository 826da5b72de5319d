"""Brute-force quadrant sums against the Bernstein Gram entries as the square grows."""
import argparse

from nblab import invgamma
from nblab.specfun import RhoSpec


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--max-index", type=int, default=2)
    ap.add_argument("--levels", type=int, nargs="+", default=[3, 5, 7])
    a = ap.parse_args()
    for spec in (RhoSpec.dirac(), RhoSpec.exponential(1.0)):
        print(spec.variant)
        for n in range(a.max_index + 1):
            for m in range(n, a.max_index + 1):
                ref = invgamma.gram_entry_invgamma(n, m, spec).value
                diffs = []
                for lv in a.levels:
                    bf = invgamma.gram_entry_bruteforce(n, m, spec, levels=lv)
                    diffs.append(f"L={int(bf.truncation):5d}: {bf.value - ref:+.2e}")
                print(f"  ({n},{m}) {ref:.10f}  " + "  ".join(diffs))


if __name__ == "__main__":
    main()
