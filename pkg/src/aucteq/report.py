"""Run the acceptance suite and package the results for disk and terminal."""

from __future__ import annotations

import hashlib
import json
import platform
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import acceptance
from .errors import InvalidInputError
from .serialization import dumps, write_csv

TABLE_HEADER = ("criterion", "label", "computed", "expected", "basis", "pass")


def digest(payload: str | bytes) -> str:
    data = payload.encode() if isinstance(payload, str) else payload
    return hashlib.sha256(data).hexdigest()


@dataclass
class ReportBundle:
    command: list[str]
    input_digest: str
    results: list[acceptance.CriterionResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    def table(self) -> list[tuple]:
        return [(r.number, c.label, c.value, c.expected, c.basis, c.passed)
                for r in self.results for c in r.checks]

    def to_dict(self) -> dict:
        return {
            "command": self.command,
            "input_digest": self.input_digest,
            "numpy": np.__version__,
            "python": platform.python_version(),
            "pass": self.passed,
            "criteria": [r.to_dict() for r in self.results],
        }

    def render(self) -> str:
        lines = [r.line() for r in self.results]
        lines.append("")
        width = max((len(row[1]) for row in self.table()), default=10)
        for num, label, value, expected, basis, ok in self.table():
            lines.append(f"{num:>3}  {label:<{width}}  {value:>16.10g}  {expected:<32} {basis:<22} "
                         f"{'pass' if ok else 'FAIL'}")
        passed = sum(r.passed for r in self.results)
        lines.append(f"\n{passed}/{len(self.results)} criteria pass")
        return "\n".join(lines)

    def write(self, directory: str | Path) -> tuple[Path, Path]:
        out = Path(directory)
        out.mkdir(parents=True, exist_ok=True)
        js, csv_path = out / "report.json", out / "acceptance.csv"
        js.write_text(dumps(self.to_dict()))
        write_csv(csv_path, TABLE_HEADER, self.table())
        return js, csv_path


def build_report(command: Sequence[str], criteria: Sequence[int] | None = None) -> ReportBundle:
    numbers = list(criteria) if criteria else [n for n, _, _ in acceptance.CRITERIA]
    # The suite has no external input; the digest pins which criteria ran.
    titles = {n: t for n, t, _ in acceptance.CRITERIA}
    unknown = [n for n in numbers if n not in titles]
    if unknown:
        raise InvalidInputError(f"unknown criteria {unknown}; choose from 1..{len(titles)}")
    bundle = ReportBundle(list(command), digest(json.dumps([[n, titles[n]] for n in numbers])))
    for n in numbers:
        bundle.results.append(acceptance.run_criterion(n))
    return bundle
