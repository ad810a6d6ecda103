"""Per-leg entropy-change tables and volume-work bookkeeping."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

LEGS = ("1<-0", "2<-1", "3<-2", "0<-3")
COLUMNS = ("system", "system+sensor")
_LEG_LABELS = ("1 ← 0", "2 ← 1", "3 ← 2", "0 ← 3")


@dataclass(frozen=True)
class Cell:
    direct: float
    closed_form: float

    @property
    def error(self) -> float:
        return abs(self.direct - self.closed_form)


def leg_differences(system: np.ndarray, joint: np.ndarray) -> np.ndarray:
    """4x2 array of entropy differences from per-time entropies.

    ``system[tau]`` and ``joint[tau]`` are entropies at tau = 0..3; row k is
    the change from tau = k to tau = k + 1 (mod 4).
    """
    out = np.empty((4, 2))
    for k in range(4):
        nxt = (k + 1) % 4
        out[k, 0] = system[nxt] - system[k]
        out[k, 1] = joint[nxt] - joint[k]
    return out


@dataclass
class LegTable:
    """Entropy changes (nats) for the four legs of a Szilard cycle.

    Attributes
    ----------
    direct, closed_form : ndarray, shape (4, 2)
        Rows follow :data:`LEGS`, columns follow :data:`COLUMNS`.
    terms : dict
        Named information quantities entering the closed forms.
    corrections : ndarray or None
        Amount added to the commonly printed closed form of each cell to
        reach the exact expression (zero where the printed form is exact).
    work_terms : list of (label, kind, entropy)
        Terms converted to work by :func:`work_report`.
    """

    case: str
    direct: np.ndarray
    closed_form: np.ndarray
    terms: dict = field(default_factory=dict)
    corrections: np.ndarray | None = None
    work_terms: list = field(default_factory=list)

    def cell(self, leg: str, column: str) -> Cell:
        i, j = LEGS.index(leg), COLUMNS.index(column)
        return Cell(float(self.direct[i, j]), float(self.closed_form[i, j]))

    @property
    def cells(self) -> dict:
        return {leg: {col: self.cell(leg, col) for col in COLUMNS} for leg in LEGS}

    def max_cell_error(self) -> float:
        return float(np.max(np.abs(self.direct - self.closed_form)))

    def column_sums(self) -> np.ndarray:
        """Cycle sums of the direct and closed-form columns, shape (2, 2)."""
        return np.vstack([self.direct.sum(axis=0), self.closed_form.sum(axis=0)])

    def max_cycle_sum(self) -> float:
        return float(np.max(np.abs(self.column_sums())))

    def to_dict(self) -> dict:
        rows = {}
        for i, leg in enumerate(LEGS):
            rows[leg] = {
                col: {"direct": float(self.direct[i, j]), "closed_form": float(self.closed_form[i, j])}
                for j, col in enumerate(COLUMNS)
            }
            if self.corrections is not None:
                for j, col in enumerate(COLUMNS):
                    rows[leg][col]["correction"] = float(self.corrections[i, j])
        return {
            "case": self.case,
            "rows": rows,
            "terms": {k: float(v) for k, v in self.terms.items()},
            "max_cell_error": self.max_cell_error(),
            "max_cycle_sum": self.max_cycle_sum(),
        }

    def to_markdown(self, digits: int = 6) -> str:
        """Aligned 4x2 table; each cell shows ``direct (closed form)``."""
        fmt = f"{{:+.{digits}f}}"
        header = ["leg", *COLUMNS]
        body = []
        for i, label in enumerate(_LEG_LABELS):
            row = [label]
            for j in range(2):
                row.append(f"{fmt.format(self.direct[i, j])} ({fmt.format(self.closed_form[i, j])})")
            body.append(row)
        widths = [max(len(r[c]) for r in [header, *body]) for c in range(3)]

        def line(r):
            return "| " + " | ".join(v.ljust(w) for v, w in zip(r, widths)) + " |"

        sep = "|" + "|".join("-" * (w + 2) for w in widths) + "|"
        out = [f"**{self.case.upper()}** entropy changes in nats, direct (closed form)", "", line(header), sep]
        out += [line(r) for r in body]
        return "\n".join(out) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["case", "leg", "column", "direct", "closed_form"])
        for i, leg in enumerate(LEGS):
            for j, col in enumerate(COLUMNS):
                w.writerow([self.case, leg, col, repr(float(self.direct[i, j])), repr(float(self.closed_form[i, j]))])
        return buf.getvalue()


@dataclass(frozen=True)
class WorkEntry:
    label: str
    kind: str  # "volume", "landauer" or "correlation"
    entropy: float
    work: float


@dataclass(frozen=True)
class WorkReport:
    temperature: float
    entries: tuple

    def by_label(self, label: str) -> WorkEntry:
        for e in self.entries:
            if e.label == label:
                return e
        raise KeyError(label)

    def to_dict(self) -> dict:
        return {
            "temperature": self.temperature,
            "entries": [
                {"label": e.label, "kind": e.kind, "entropy": e.entropy, "work": e.work} for e in self.entries
            ],
        }


def work_report(table: LegTable, temperature: float) -> WorkReport:
    """Convert the table's volume, Landauer and correlation entropies to
    work at temperature ``temperature`` (energy units): W = T * entropy."""
    if not temperature > 0:
        raise ValueError("temperature must be positive")
    entries = tuple(
        WorkEntry(label, kind, float(s), float(temperature * s)) for label, kind, s in table.work_terms
    )
    return WorkReport(float(temperature), entries)
