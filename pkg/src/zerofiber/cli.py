"""Command-line entry point: ``zerofiber <command> ...``.

Exit codes: 0 on success, 1 on a domain or input error, 2 on a usage error.
Divisor and target arguments accept either a JSON file or an inline
comma-separated list of rationals such as ``9/4,1``.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from fractions import Fraction
from pathlib import Path

from . import serialize as ser
from .errors import NotKahlerError, ZeroFiberError
from .model import (ClassVector, DivisorialMeasure, contract, energy, grad_energy, is_kahler_certified,
                    ma_kahler, validate_model)
from .solver import solve_ma, variational_solve
from .surface import (BlowupStep, build, classify_components, envelope_values, is_big, lelong, ma_big,
                      orthogonality_pairing, restricted_volumes, zariski)
from .verification import SUITES, FuzzSpec, run_suites


class UsageError(Exception):
    pass


def _rationals(text: str) -> tuple[Fraction, ...]:
    text = text.strip()
    if not text:
        return ()
    try:
        return tuple(ser.parse_q(p.strip()) for p in text.split(","))
    except ZeroFiberError as exc:
        raise UsageError(str(exc)) from exc


def _divisor(arg: str) -> ClassVector:
    if Path(arg).is_file():
        return ser.divisor_from_dict(ser.read_json(arg))
    return ClassVector.divisor(_rationals(arg))


def _measure(arg: str) -> DivisorialMeasure:
    if Path(arg).is_file():
        return ser.measure_from_dict(ser.read_json(arg))
    return DivisorialMeasure(_rationals(arg))


def _grid(text: str) -> list[Fraction]:
    """``start:stop:step`` (inclusive) or a comma list."""
    if ":" not in text:
        return list(_rationals(text))
    parts = text.split(":")
    if len(parts) != 3:
        raise UsageError(f"grid {text!r} must be start:stop:step")
    start, stop, step = (ser.parse_q(p) for p in parts)
    if step <= 0:
        raise UsageError("grid step must be positive")
    out = []
    x = start
    while x <= stop:
        out.append(x)
        x += step
    return out


def _check_length(m, D: ClassVector) -> None:
    if len(D.d) != m.N:
        raise UsageError(f"divisor has {len(D.d)} coefficients, model has {m.N} components")


def _emit(args, doc: dict, text: str) -> None:
    print(ser.dumps(doc), end="") if args.json else print(text)


def _fmt(xs) -> str:
    return "(" + ", ".join(str(Fraction(x)) for x in xs) + ")"


# ---------------------------------------------------------------------------
# commands


def cmd_validate(args) -> int:
    m = ser.load_model(args.model)
    bad = validate_model(m)
    doc = {"valid": not bad, "violations": [{"identity": v.identity, "detail": v.detail, "value": ser.qstr(v.value)}
                                             for v in bad]}
    lines = ["valid"] if not bad else [f"identity ({v.identity}): {v.detail} = {v.value}" for v in bad]
    _emit(args, doc, "\n".join(lines))
    return 1 if bad else 0


def cmd_blowup(args) -> int:
    doc = ser.read_json(args.script)
    steps = doc["steps"] if isinstance(doc, dict) else doc
    b = build([BlowupStep.from_dict(s) for s in steps], V=ser.parse_q(args.V))
    ser.save_model(args.out, b.model)
    _emit(args, {"components": b.names, "out": str(args.out)}, f"wrote {args.out} with components {', '.join(b.names)}")
    return 0


def _measure_for(m, D: ClassVector, mode: str) -> tuple[DivisorialMeasure, str]:
    if mode == "kahler":
        return ma_kahler(m, D), "kahler"
    if mode == "big":
        return ma_big(m, D), "big"
    try:
        return ma_kahler(m, D), "kahler"
    except NotKahlerError:
        if m.n != 1:
            raise
        return ma_big(m, D), "big"


def cmd_ma(args) -> int:
    m = ser.load_model(args.model)
    D = _divisor(args.divisor)
    _check_length(m, D)
    mu, used = _measure_for(m, D, args.mode)
    if m.n == 1:
        status = classify_components(m, D)
        nu = lelong(m, D)
    else:
        status = ["kahler-locus"] * m.N
        nu = [Fraction(0)] * m.N
    if args.out:
        ser.write_json(args.out, ser.measure_to_dict(mu))
    doc = {"mode": used, "components": [
        {"name": c.name, "mass": ser.qstr(x), "status": s, "lelong": ser.qstr(v)}
        for c, x, s, v in zip(m.components, mu.masses, status, nu)]}
    lines = [f"mode: {used}"] + [f"{c.name}: mass {x}  status {s}  lelong {v}"
                                 for c, x, s, v in zip(m.components, mu.masses, status, nu)]
    _emit(args, doc, "\n".join(lines))
    return 0


def cmd_energy(args) -> int:
    m = ser.load_model(args.model)
    D = _divisor(args.divisor)
    _check_length(m, D)
    e = energy(m, D)
    doc = {"energy": ser.qstr(e), "kahler": is_kahler_certified(m, D)}
    lines = [f"energy {e}"]
    if doc["kahler"]:
        g = grad_energy(m, D)
        doc["gradient"] = [ser.qstr(x) for x in g]
        lines.append(f"gradient {_fmt(g)}")
    _emit(args, doc, "\n".join(lines))
    return 0


def cmd_zariski(args) -> int:
    m = ser.load_model(args.model)
    D = _divisor(args.divisor)
    _check_length(m, D)
    z = zariski(m, D)
    rv = restricted_volumes(m, D, z)
    doc = {"P": ser.divisor_to_dict(z.P), "N": [ser.qstr(x) for x in z.N],
           "support": [m.components[i].name for i in z.support], "volume": ser.qstr(z.volume),
           "restricted_volumes": [ser.qstr(x) for x in rv]}
    text = (f"P = {_fmt(z.P.d)} (A coefficient {z.P.s})\nN = {_fmt(z.N)}\n"
            f"support = {{{', '.join(doc['support'])}}}\nvolume = {z.volume}\nrestricted volumes = {_fmt(rv)}")
    _emit(args, doc, text)
    return 0


def cmd_envelope(args) -> int:
    m = ser.load_model(args.model)
    D = _divisor(args.divisor)
    _check_length(m, D)
    env = envelope_values(m, D)
    f = [d / b for d, b in zip(D.d, m.b)]
    pairing = orthogonality_pairing(m, D)
    doc = {"f": [ser.qstr(x) for x in f], "envelope": [ser.qstr(x) for x in env],
           "lelong": [ser.qstr(x) for x in lelong(m, D)], "orthogonality": ser.qstr(pairing)}
    text = f"f_D = {_fmt(f)}\nenvelope = {_fmt(env)}\northogonality pairing = {pairing}"
    _emit(args, doc, text)
    return 0


def cmd_solve(args) -> int:
    m = ser.load_model(args.model)
    mu = _measure(args.target)
    if len(mu.masses) != m.N:
        raise UsageError(f"target has {len(mu.masses)} masses, model has {m.N} components")
    if args.method == "fixed-point":
        r = solve_ma(m, mu, tol=args.tol, max_iter=args.max_iter)
        doc = {"method": r.method, "a": list(r.a), "a_exact": [ser.qstr(x) for x in r.a_exact],
               "D": ser.divisor_to_dict(r.D), "masses": [ser.qstr(x) for x in r.masses],
               "residual": float(r.residual_exact), "residual_exact": ser.qstr(r.residual_exact),
               "iterations": r.iterations, "converged": r.converged}
        trace = r.trace
        ok = r.converged
        text = (f"method {r.method}  converged {r.converged}  iterations {r.iterations}\n"
                f"D = {_fmt(r.D.d)}\nmasses = {_fmt(r.masses)}\nresidual = {float(r.residual_exact):.3e}")
    else:
        r = variational_solve(m, mu, tol=args.tol)
        doc = {"method": "variational", "attainable": r.attainable, "message": r.message,
               "D": ser.divisor_to_dict(r.D) if r.D is not None else None,
               "masses": [ser.qstr(x) for x in r.masses] if r.masses is not None else None,
               "residual": r.residual, "iterations": r.iterations,
               "dual_energy_lower_bound": (ser.qstr(r.dual_energy_lower_bound)
                                           if r.dual_energy_lower_bound is not None else None)}
        trace = [(r.iterations, r.residual, 0.0)]
        ok = r.attainable
        text = (f"attainable {r.attainable}  {r.message}\n" +
                (f"D = {_fmt(r.D.d)}\nmasses = {_fmt(r.masses)}\nresidual = {r.residual:.3e}" if r.attainable else ""))
    if args.trace:
        with open(args.trace, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["iteration", "residual", "step"])
            w.writerows([it, repr(float(res)), repr(float(lam))] for it, res, lam in trace)
    if args.out:
        ser.write_json(args.out, doc)
    _emit(args, doc, text.rstrip())
    return 0 if ok else 1


def cmd_check(args) -> int:
    names = [s for s in args.suite.split(",") if s]
    spec = FuzzSpec(seed=args.seed, models=args.models, divisors_per_model=args.divisors)
    try:
        reports = run_suites(names, spec)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    doc = {"seed": args.seed, "models": args.models, "reports": [r.to_dict() for r in reports]}
    if args.out:
        ser.write_json(args.out, doc)
    lines = [f"{r.name}: {'PASS' if r.passed else 'FAIL'} ({r.instances} instances, {len(r.failures)} failures)"
             for r in reports]
    if args.json:
        doc = {"reports": [{"name": r.name, "instances": r.instances, "passed": r.passed} for r in reports]}
    _emit(args, doc, "\n".join(lines))
    return 0 if all(r.passed for r in reports) else 1


def cmd_scan(args) -> int:
    m = ser.load_model(args.model)
    base = _divisor(args.base)
    direction = _divisor(args.direction)
    _check_length(m, base)
    _check_length(m, direction)
    grid = _grid(args.grid)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t"] + [f"mass_{c.name}" for c in m.components] + ["volume", "big", "status"])
    for t in grid:
        D = ClassVector(base.s, tuple(b + t * d for b, d in zip(base.d, direction.d)))
        try:
            mu, used = _measure_for(m, D, args.mode)
            vol = zariski(m, D).volume if used == "big" else contract(m, [D] * (m.n + 1))
            big = is_big(m, D) if m.n == 1 else vol > 0
            w.writerow([str(t)] + [str(x) for x in mu.masses] + [str(vol), int(big), "ok"])
        except ZeroFiberError as exc:
            big = ""
            if m.n == 1:
                big = int(is_big(m, D))
            w.writerow([str(t)] + [""] * m.N + ["", big, str(exc).replace("\n", " ")])
    if args.out:
        Path(args.out).write_text(buf.getvalue())
    else:
        sys.stdout.write(buf.getvalue())
    return 0


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="zerofiber", description="Monge-Ampere measures of test configurations.")
    ap.add_argument("--json", action="store_true", help="machine-readable output")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check the validity identities of a model")
    p.add_argument("model")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("blowup", help="build a surface model from a blow-up script")
    p.add_argument("--script", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--V", default="1", help="fibre volume of the trivial model (default 1)")
    p.set_defaults(func=cmd_blowup)

    for name, func, text in (("ma", cmd_ma, "Monge-Ampere measure of A + D"),
                             ("energy", cmd_energy, "energy of D"),
                             ("zariski", cmd_zariski, "Zariski decomposition of A + D (surfaces)"),
                             ("envelope", cmd_envelope, "envelope values at divisorial points (surfaces)")):
        p = sub.add_parser(name, help=text)
        p.add_argument("model")
        p.add_argument("divisor", help="divisor file or inline list d_1,...,d_N")
        if name == "ma":
            p.add_argument("--mode", choices=["kahler", "big", "auto"], default="auto")
            p.add_argument("--out", help="write the measure file here")
        p.set_defaults(func=func)

    p = sub.add_parser("solve", help="find D with prescribed Monge-Ampere measure")
    p.add_argument("--model", required=True)
    p.add_argument("--target", required=True, help="measure file or inline list of masses")
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--max-iter", type=int, default=500)
    p.add_argument("--method", choices=["fixed-point", "variational"], default="fixed-point")
    p.add_argument("--trace", help="CSV of per-iteration residuals")
    p.add_argument("--out", help="write the result document here")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("check", help="run the fuzzed identity suites")
    p.add_argument("--suite", default="all", help=f"'all' or comma list of {', '.join(SUITES)}")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--models", type=int, default=40)
    p.add_argument("--divisors", type=int, default=5)
    p.add_argument("--out", help="JSON report")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("scan", help="masses along the line base + t * direction, as CSV")
    p.add_argument("model")
    p.add_argument("--base", required=True)
    p.add_argument("--direction", required=True)
    p.add_argument("--grid", required=True, help="start:stop:step (inclusive) or comma list")
    p.add_argument("--mode", choices=["kahler", "big", "auto"], default="auto")
    p.add_argument("--out", help="CSV path (default stdout)")
    p.set_defaults(func=cmd_scan)
    return ap


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except ZeroFiberError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (OSError, json.JSONDecodeError, KeyError, TypeError) as exc:
        print(f"error: cannot read input: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
