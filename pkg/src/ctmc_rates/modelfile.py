"""Plain-text model config files.

Format (comments with '#', blank lines ignored)::

    states: 2            # an integer, or a list of distinct labels
    generator:
    -0.5  0.5
     0.5 -0.5
    rates: 0.0 0.1

The parser reports malformed input and every violated model invariant with
the offending line number.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ModelFileError
from .model import (
    GeneratorMatrix,
    RateMap,
    StateSpace,
    validate_model,
)
from .policy import DEFAULT_POLICY, NumericPolicy


@dataclass(frozen=True)
class ModelSpec:
    states: StateSpace
    generator: GeneratorMatrix
    rates: RateMap


def _fail(path: str, lineno: int, msg: str):
    raise ModelFileError(f"{path}:{lineno}: {msg}")


def _parse_floats(path: str, lineno: int, text: str, what: str) -> list[float]:
    parts = text.replace(",", " ").split()
    try:
        return [float(p) for p in parts]
    except ValueError:
        _fail(path, lineno, f"could not parse {what}: {text!r}")


def parse_model_text(
    text: str, path: str = "<model>", policy: NumericPolicy = DEFAULT_POLICY
) -> ModelSpec:
    lines = text.splitlines()
    n = None
    labels = None
    states_line = gen_line = rates_line = None
    gen_rows: list[list[float]] = []
    gen_row_lines: list[int] = []
    rates = None

    idx = 0
    while idx < len(lines):
        lineno = idx + 1
        raw = lines[idx]
        idx += 1
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if ":" not in line:
            _fail(path, lineno, f"expected 'key: value', got {line!r}")
        key, _, value = line.partition(":")
        key = key.strip().lower()
        value = value.strip()
        if key == "states":
            states_line = lineno
            if not value:
                _fail(path, lineno, "states needs a count or a label list")
            tokens = value.replace(",", " ").split()
            if len(tokens) == 1 and tokens[0].lstrip("-").isdigit():
                n = int(tokens[0])
                if n < 1:
                    _fail(path, lineno, f"state count must be >= 1, got {n}")
            else:
                labels = tuple(tokens)
                if len(set(labels)) != len(labels):
                    _fail(path, lineno, "state labels must be distinct")
                n = len(labels)
        elif key == "generator":
            if n is None:
                _fail(path, lineno, "states must be declared before the generator")
            gen_line = lineno
            if value:
                _fail(path, lineno, "generator rows belong on the following lines")
            while len(gen_rows) < n and idx < len(lines):
                row_no = idx + 1
                row_txt = lines[idx].split("#", 1)[0].strip()
                idx += 1
                if not row_txt:
                    continue
                row = _parse_floats(path, row_no, row_txt, "generator row")
                if len(row) != n:
                    _fail(path, row_no, f"generator row has {len(row)} entries, expected {n}")
                gen_rows.append(row)
                gen_row_lines.append(row_no)
            if len(gen_rows) < n:
                _fail(path, gen_line, f"generator needs {n} rows, found {len(gen_rows)}")
        elif key == "rates":
            rates_line = lineno
            rates = _parse_floats(path, lineno, value, "rates")
        else:
            _fail(path, lineno, f"unknown key {key!r}")

    if n is None:
        _fail(path, 1, "missing 'states' entry")
    if not gen_rows:
        _fail(path, 1, "missing 'generator' entry")
    if rates is None:
        _fail(path, 1, "missing 'rates' entry")
    if len(rates) != n:
        _fail(path, rates_line, f"{len(rates)} rates for {n} states")

    S = StateSpace(n=n, labels=labels)
    G = GeneratorMatrix(np.array(gen_rows))
    r = RateMap(np.array(rates))
    report = validate_model(G, r, S, policy)
    if not report.ok:
        anchored = []
        for v in report.violations:
            if v.startswith("generator row ") or v.startswith("generator entry ") or v.startswith("generator diagonal "):
                row = int(v.split("(")[1].split(",")[0]) if "(" in v else int(v.split()[2])
                anchored.append(f"{path}:{gen_row_lines[row]}: {v}")
            elif v.startswith("generator"):
                anchored.append(f"{path}:{gen_line}: {v}")
            elif v.startswith("rate"):
                anchored.append(f"{path}:{rates_line}: {v}")
            else:
                anchored.append(f"{path}:{states_line}: {v}")
        raise ModelFileError("\n".join(anchored))
    return ModelSpec(states=S, generator=G, rates=r)


def load_model(path: str, policy: NumericPolicy = DEFAULT_POLICY) -> ModelSpec:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_model_text(fh.read(), path=path, policy=policy)
