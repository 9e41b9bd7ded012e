"""JSON instance files, run reports and CSV traces.

Instance file layout::

    {"tensor": <tensor entry list>, "b": [...],
     "known_solution": [...], "tolerance": 1e-9}

``known_solution`` and ``tolerance`` are optional; when the solution is
present its residual must not exceed the tolerance.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .model import TaveProblem, residual
from .solver import SolverConfig, SolverReport
from .tensor import Tensor

TRACE_COLUMNS = ("k", "norm_H", "norm_gradPsi", "step", "source", "r_norm")
DEFAULT_TOLERANCE = 1e-9


def dumps(obj) -> str:
    """Canonical JSON text: sorted keys, fixed indentation, trailing newline."""
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


@dataclass
class InstanceFile:
    problem: TaveProblem
    known_solution: np.ndarray | None = None
    tolerance: float = DEFAULT_TOLERANCE
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.known_solution is not None:
            x = np.asarray(self.known_solution, dtype=float)
            if x.shape != (self.problem.n,):
                raise ValueError(f"known_solution must have length {self.problem.n}")
            self.known_solution = x
            err = float(np.max(np.abs(residual(self.problem, x))))
            if err > self.tolerance:
                raise ValueError(f"known_solution residual {err:.3e} exceeds tolerance {self.tolerance:.3e}")

    def to_dict(self) -> dict:
        out = {
            "tensor": self.problem.A.to_json_dict(),
            "b": [float(v) for v in self.problem.b],
            "tolerance": self.tolerance,
        }
        if self.known_solution is not None:
            out["known_solution"] = [float(v) for v in self.known_solution]
        if self.meta:
            out["meta"] = self.meta
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "InstanceFile":
        if not isinstance(data, dict) or "tensor" not in data or "b" not in data:
            raise ValueError("instance JSON needs 'tensor' and 'b' fields")
        A = Tensor.from_json_dict(data["tensor"])
        P = TaveProblem(A, np.asarray(data["b"], dtype=float))
        known = data.get("known_solution")
        return cls(
            P,
            None if known is None else np.asarray(known, dtype=float),
            float(data.get("tolerance", DEFAULT_TOLERANCE)),
            dict(data.get("meta", {})),
        )

    def dumps(self) -> str:
        return dumps(self.to_dict())

    def write(self, path) -> None:
        Path(path).write_text(self.dumps())


def read_json(path) -> object:
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ValueError(f"{path}: malformed JSON ({exc})") from exc


def load_instance(path) -> InstanceFile:
    return InstanceFile.from_dict(read_json(path))


def load_tensor(path) -> Tensor:
    """A tensor file, or the tensor of an instance file."""
    data = read_json(path)
    if isinstance(data, dict) and "tensor" in data:
        data = data["tensor"]
    return Tensor.from_json_dict(data)


@dataclass
class RunReport:
    """Serialized outcome of one solver run."""

    config: SolverConfig
    report: SolverReport
    seed: dict = field(default_factory=dict)
    source: str = ""

    def to_dict(self) -> dict:
        return {
            "config": self.config.to_dict(),
            "seed": self.seed,
            "source": self.source,
            **self.report.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "RunReport":
        return cls(
            SolverConfig.from_dict(data["config"]),
            SolverReport.from_dict(data),
            dict(data.get("seed", {})),
            data.get("source", ""),
        )


def trace_rows(report: SolverReport) -> list[dict]:
    return [{c: getattr(rec, c) for c in TRACE_COLUMNS} for rec in report.trace]


def write_csv(rows: list[dict], path=None, columns=None) -> str:
    """Write ``rows`` as CSV to ``path`` (if given) and return the text."""
    columns = list(columns or (rows[0].keys() if rows else []))
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({c: "" if row.get(c) is None else _fmt(row.get(c)) for c in columns})
    text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text)
    return text


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (list, tuple, np.ndarray)):
        return " ".join(repr(float(a)) for a in v)
    return v
