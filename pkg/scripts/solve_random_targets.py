"""Solve random interior targets with both solvers and report residuals and timings."""
import argparse
import random
import time

from zerofiber.serialize import load_model
from zerofiber.solver import solve_ma, variational_solve
from zerofiber.verification import random_measure


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--model", default="p1-chain-3")
    ap.add_argument("--count", type=int, default=50)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--tol", type=float, default=1e-9)
    args = ap.parse_args()

    m = load_model(args.model)
    rng = random.Random(args.seed)
    worst = (0.0, 0.0, 0.0)
    for _ in range(args.count):
        mu = random_measure(rng, m.N)
        t = time.perf_counter()
        r = solve_ma(m, mu, tol=args.tol)
        dt = time.perf_counter() - t
        v = variational_solve(m, mu, tol=args.tol)
        gap = max(abs(float(x - y)) for x, y in zip(v.masses, r.masses)) if v.attainable else float("nan")
        worst = (max(worst[0], float(r.residual_exact)), max(worst[1], dt), max(worst[2], gap))
        print(f"mu={[str(x) for x in mu]}  method={r.method}  residual={float(r.residual_exact):.1e}  "
              f"time={dt:.3f}s  variational_gap={gap:.1e}")
    print(f"worst residual {worst[0]:.1e}, worst time {worst[1]:.3f}s, worst gap {worst[2]:.1e}")


if __name__ == "__main__":
    main()
