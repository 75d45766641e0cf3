"""JSON and CSV I/O.

Probabilities, bids and values are written as decimal strings produced by
``repr(float)``, which round-trip bit-exactly.  Player indices are 1-based
in files and 0-based in the Python API.
"""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

from .cdf import PiecewiseCdf, ReciprocalSegment
from .core import Atom, AuctionInstance, FiniteEquilibrium
from .errors import InvalidInputError, InvariantError


class ParseError(InvalidInputError):
    def __init__(self, message: str, line: int, column: int):
        self.line, self.column = line, column
        super().__init__(f"line {line}, column {column}: {message}")


def num(x: float) -> str:
    return repr(float(x))


def _parse_json(text: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.lineno, exc.colno) from None


def _real(x: Any, where: str) -> float:
    if isinstance(x, bool) or not isinstance(x, (int, float, str)):
        raise InvariantError("schema", f"{where}: expected a number or decimal string, got {x!r}")
    try:
        val = float(x)
    except ValueError:
        raise InvariantError("schema", f"{where}: {x!r} is not a decimal number") from None
    if not math.isfinite(val):
        raise InvariantError("schema", f"{where}: {x!r} is not finite")
    return val


def _field(obj: Any, key: str, where: str) -> Any:
    if not isinstance(obj, dict) or key not in obj:
        raise InvariantError("schema", f"{where}: missing field {key!r}")
    return obj[key]


def _list(x: Any, where: str) -> list:
    if not isinstance(x, list):
        raise InvariantError("schema", f"{where}: expected a list")
    return x


# ---------------------------------------------------------------- equilibria

def equilibrium_to_dict(instance: AuctionInstance, eq: FiniteEquilibrium) -> dict:
    return {
        "values": [num(v) for v in instance.values],
        "tie_priority": [i + 1 for i in instance.tie_priority],
        "atoms": [
            {
                "p": num(a.probability),
                "bids": [num(b) for b in a.bids],
                "winner_shares": {str(i + 1): num(s) for i, s in a.winner_shares.items()},
            }
            for a in eq.atoms
        ],
    }


def equilibrium_from_dict(data: Any) -> tuple[AuctionInstance, FiniteEquilibrium]:
    values = [_real(v, f"values[{k}]") for k, v in enumerate(_list(_field(data, "values", "root"), "values"))]
    prio_raw = data.get("tie_priority") or list(range(1, len(values) + 1))
    prio = []
    for k, i in enumerate(_list(prio_raw, "tie_priority")):
        if isinstance(i, bool) or not isinstance(i, int):
            raise InvariantError("schema", f"tie_priority[{k}]: expected an integer")
        prio.append(i - 1)
    instance = AuctionInstance(tuple(values), tuple(prio))
    atoms = []
    for k, a in enumerate(_list(_field(data, "atoms", "root"), "atoms")):
        where = f"atoms[{k}]"
        p = _real(_field(a, "p", where), f"{where}.p")
        bids = tuple(_real(b, f"{where}.bids[{j}]") for j, b in enumerate(_list(_field(a, "bids", where), f"{where}.bids")))
        raw = _field(a, "winner_shares", where)
        if not isinstance(raw, dict):
            raise InvariantError("schema", f"{where}.winner_shares: expected an object")
        shares = {}
        for key, s in raw.items():
            try:
                idx = int(key) - 1
            except ValueError:
                raise InvariantError("schema", f"{where}.winner_shares: bad player key {key!r}") from None
            if not 0 <= idx < instance.n:
                raise InvariantError("schema", f"{where}.winner_shares: player {key} out of range")
            shares[idx] = _real(s, f"{where}.winner_shares[{key}]")
        if len(bids) != instance.n:
            raise InvariantError("schema", f"{where}.bids: expected {instance.n} bids, got {len(bids)}")
        atoms.append(Atom(p, bids, shares))
    return instance, FiniteEquilibrium(tuple(atoms))


def dumps_equilibrium(instance: AuctionInstance, eq: FiniteEquilibrium) -> str:
    return json.dumps(equilibrium_to_dict(instance, eq), indent=2) + "\n"


def loads_equilibrium(text: str) -> tuple[AuctionInstance, FiniteEquilibrium]:
    return equilibrium_from_dict(_parse_json(text))


def read_equilibrium(path: str | Path) -> tuple[AuctionInstance, FiniteEquilibrium]:
    return loads_equilibrium(Path(path).read_text())


# ---------------------------------------------------------------- CDFs

def cdf_to_dict(cdf: PiecewiseCdf) -> dict:
    return {
        "atoms": [{"x": num(x), "mass": num(m)} for x, m in cdf.atoms.items()],
        "segments": [{"a": num(s.a), "b": num(s.b), "lo": num(s.lo), "hi": num(s.hi)} for s in cdf.segments],
        "top": num(cdf.top),
    }


def cdf_from_dict(data: Any) -> PiecewiseCdf:
    atoms = {}
    for k, a in enumerate(_list(_field(data, "atoms", "root"), "atoms")):
        atoms[_real(_field(a, "x", f"atoms[{k}]"), f"atoms[{k}].x")] = _real(
            _field(a, "mass", f"atoms[{k}]"), f"atoms[{k}].mass")
    segs = []
    for k, s in enumerate(_list(_field(data, "segments", "root"), "segments")):
        where = f"segments[{k}]"
        segs.append(ReciprocalSegment(*(_real(_field(s, f, where), f"{where}.{f}") for f in ("a", "b", "lo", "hi"))))
    return PiecewiseCdf(atoms, tuple(segs), _real(_field(data, "top", "root"), "top"))


def dumps_cdf(cdf: PiecewiseCdf) -> str:
    return json.dumps(cdf_to_dict(cdf), indent=2) + "\n"


def loads_cdf(text: str) -> PiecewiseCdf:
    return cdf_from_dict(_parse_json(text))


# ---------------------------------------------------------------- generic output

def _default(obj: Any) -> Any:
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if hasattr(obj, "to_dict"):
        return obj.to_dict()
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(data: Any) -> str:
    return json.dumps(data, indent=2, default=_default) + "\n"


def write_csv(path_or_stream, header: Sequence[str], rows: Iterable[Sequence[float]]) -> None:
    own = isinstance(path_or_stream, (str, Path))
    stream = open(path_or_stream, "w", newline="") if own else path_or_stream
    try:
        w = csv.writer(stream)
        w.writerow(header)
        for row in rows:
            w.writerow([num(x) if isinstance(x, (float, np.floating)) else x for x in row])
    finally:
        if own:
            stream.close()


def csv_text(header: Sequence[str], rows: Iterable[Sequence[float]]) -> str:
    buf = io.StringIO()
    write_csv(buf, header, rows)
    return buf.getvalue()
