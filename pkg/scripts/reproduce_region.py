"""Reproduce the achievable-mass region of the normal-cone model.

Scans D = X0 - e E2 for e = k/100, writes the masses to CSV and checks that
a_1 sweeps (1/2, 1) while targets with a_1 <= 1/2 are not attainable by a
Kahler class of this model.
"""
import argparse
import csv
from fractions import Fraction

from zerofiber.model import ClassVector, ma_kahler
from zerofiber.serialize import load_model
from zerofiber.solver import variational_solve


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--steps", type=int, default=100, help="grid e = k/steps, 0 < k < steps")
    ap.add_argument("--out", default="region.csv")
    args = ap.parse_args()

    m = load_model("p1p1-normal-cone")
    rows = []
    for k in range(1, args.steps):
        e = Fraction(k, args.steps)
        mu = ma_kahler(m, ClassVector.divisor((Fraction(1), 1 - e)))
        assert mu.masses == (1 - e * e / 2, e * e / 2)
        rows.append((e, *mu.masses))
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["e", "a1", "a2"])
        w.writerows([str(x) for x in r] for r in rows)
    a1 = [r[1] for r in rows]
    print(f"wrote {len(rows)} rows to {args.out}; a_1 ranges over [{float(min(a1)):.6f}, {float(max(a1)):.6f}]")

    for a in (Fraction(1, 4), Fraction(1, 2), Fraction(51, 100), Fraction(7, 8)):
        r = variational_solve(m, (a, 1 - a))
        verdict = "attainable" if r.attainable else "not attainable"
        print(f"target a_1 = {a}: {verdict}")


if __name__ == "__main__":
    main()
