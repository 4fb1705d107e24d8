"""JSON documents for models, divisors and measures.

Rationals are always written as ``"p/q"`` strings. Tensor keys are the
dot-joined basis names of a sorted multiset, e.g. ``"A.A.E1"``.
"""
from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path
from typing import Any

from .errors import ModelError
from .model import ClassVector, Component, Curve, DivisorialMeasure, Model


def qstr(x: Fraction) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def parse_q(x: Any) -> Fraction:
    if isinstance(x, bool) or isinstance(x, float):
        raise ModelError(f"expected an exact rational, got {x!r}")
    try:
        return Fraction(x)
    except (TypeError, ValueError) as exc:
        raise ModelError(f"cannot parse rational {x!r}") from exc


def model_to_dict(m: Model) -> dict:
    names = m.basis_names
    return {
        "n": m.n,
        "V": qstr(m.V),
        "components": [{"name": c.name, "b": qstr(c.b)} for c in m.components],
        "tensor": {".".join(names[k] for k in key): qstr(v) for key, v in sorted(m.tensor.items())},
        "faces": [list(f) for f in m.faces],
        "curves": [{"name": c.name, "pairing": [qstr(p) for p in c.pairing]} for c in m.curves],
    }


def model_from_dict(doc: dict) -> Model:
    try:
        n = int(doc["n"])
        comps = tuple(Component(i, str(c["name"]), parse_q(c["b"])) for i, c in enumerate(doc["components"]))
        index = {"A": 0}
        for c in comps:
            if c.name in index:
                raise ModelError(f"duplicate basis name {c.name!r}")
            index[c.name] = c.id + 1
        tensor = {}
        for k, v in doc.get("tensor", {}).items():
            try:
                key = tuple(sorted(index[p] for p in k.split(".")))
            except KeyError as exc:
                raise ModelError(f"unknown basis name in tensor key {k!r}") from exc
            if key in tensor:
                raise ModelError(f"tensor key {k!r} repeats another key")
            tensor[key] = parse_q(v)
        faces = [tuple(int(i) for i in f) for f in doc.get("faces", [])]
        curves = tuple(Curve(str(c["name"]), tuple(parse_q(p) for p in c["pairing"])) for c in doc.get("curves", []))
        return Model(n, parse_q(doc["V"]), comps, tensor, tuple(faces), curves)
    except KeyError as exc:
        raise ModelError(f"model document missing field {exc}") from exc


def divisor_to_dict(D: ClassVector) -> dict:
    return {"s": qstr(D.s), "d": [qstr(x) for x in D.d]}


def divisor_from_dict(doc: dict) -> ClassVector:
    try:
        return ClassVector(parse_q(doc.get("s", 1)), tuple(parse_q(x) for x in doc["d"]))
    except KeyError as exc:
        raise ModelError("divisor document needs field 'd'") from exc


def measure_to_dict(mu: DivisorialMeasure) -> dict:
    return {"masses": [qstr(x) for x in mu.masses]}


def measure_from_dict(doc: dict) -> DivisorialMeasure:
    try:
        return DivisorialMeasure(tuple(parse_q(x) for x in doc["masses"]))
    except KeyError as exc:
        raise ModelError("measure document needs field 'masses'") from exc


def dumps(doc: dict) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def read_json(path: str | Path) -> dict:
    with open(path) as fh:
        return json.load(fh)


def write_json(path: str | Path, doc: dict) -> None:
    Path(path).write_text(dumps(doc))


BUILTIN_MODELS = ("p1-one-blowup", "p1-chain-3", "p1p1-normal-cone")


def builtin_model_path(name: str) -> Path:
    return Path(__file__).parent / "models" / f"{name}.json"


def load_model(path: str | Path) -> Model:
    """Load a model file; the names in ``BUILTIN_MODELS`` resolve to shipped examples."""
    if str(path) in BUILTIN_MODELS and not Path(path).exists():
        path = builtin_model_path(str(path))
    return model_from_dict(read_json(path))


def save_model(path: str | Path, m: Model) -> None:
    write_json(path, model_to_dict(m))
