"""Run the fuzzed identity suites and print a one-line summary per suite."""
import argparse
import json
import time

from zerofiber.verification import SUITES, FuzzSpec, run_suites


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--models", type=int, default=200)
    ap.add_argument("--divisors", type=int, default=5)
    ap.add_argument("--max-steps", type=int, default=8)
    ap.add_argument("--suite", default="all", help=f"'all' or comma list of {', '.join(SUITES)}")
    ap.add_argument("--out", help="optional JSON report")
    args = ap.parse_args()

    spec = FuzzSpec(seed=args.seed, models=args.models, divisors_per_model=args.divisors, max_steps=args.max_steps)
    t = time.perf_counter()
    reports = run_suites(args.suite.split(","), spec)
    for r in reports:
        print(f"{r.name:14s} {'PASS' if r.passed else 'FAIL'}  instances={r.instances}  failures={len(r.failures)}")
    print(f"total {time.perf_counter() - t:.1f}s")
    if args.out:
        with open(args.out, "w") as fh:
            json.dump([r.to_dict() for r in reports], fh, indent=2, sort_keys=True)


if __name__ == "__main__":
    main()
