"""Byte-deterministic CSV and JSON emission of report objects.

Cells are rendered one way everywhere: floats with 17 significant digits,
rationals as ``num/den``, booleans as ``true``/``false`` and lists joined
with ``;`` (list cells are always quoted in CSV).  The JSON mirror has the
same field names; list cells become arrays and floats stay numbers.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from ..arith import PrimeVolume, SignSequence
from ..correlators import ApAverageReport, BlockDecomposition, CorrelationSeries, GoodSetReport, MomoReport, OrbitAverage
from ..dynamics.rigidity import RigidityReport


@dataclass(frozen=True)
class Table:
    header: tuple[str, ...]
    rows: list[tuple]


@dataclass(frozen=True)
class DensityRow:
    X: int
    j: int
    count: int
    density: Fraction


@dataclass(frozen=True)
class MaxVolumeRow:
    X: int
    qstar: int
    volume: Fraction


@dataclass(frozen=True)
class CfRow:
    n: int
    a_n: int
    q_n: int
    p_n: int
    beta_n: float
    case: str


@dataclass(frozen=True)
class IetHit:
    q: int
    l2_defect: float


def fmt_float(v: float) -> str:
    v = float(v)
    if not math.isfinite(v):
        return repr(v)
    if v == 0:
        return "0"
    return format(v, ".17g")


def cell_text(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, Fraction):
        return f"{v.numerator}/{v.denominator}"
    if isinstance(v, (float, np.floating)):
        return fmt_float(v)
    if isinstance(v, (list, tuple)):
        return ";".join(cell_text(x) for x in v)
    if v is None:
        return ""
    return str(v)


def _csv_cell(v) -> str:
    s = cell_text(v)
    if isinstance(v, (list, tuple)) or any(c in s for c in ',"\r\n'):
        return '"' + s.replace('"', '""') + '"'
    return s


def _json_cell(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return fmt_float(v) if math.isfinite(v) else "null"
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_json_cell(x) for x in v) + "]"
    if v is None:
        return "null"
    return json.dumps(cell_text(v))


# ---------------------------------------------------------------------------


def to_table(report) -> Table:
    """Header and rows for any supported report, or a homogeneous list of them."""
    if isinstance(report, Table):
        return report
    if isinstance(report, (list, tuple)) and report and not isinstance(report[0], (int, float)):
        tables = [to_table(r) for r in report]
        return Table(tables[0].header, [row for t in tables for row in t.rows])
    if isinstance(report, (list, tuple)):
        raise TypeError("cannot emit an empty or scalar list without a header")
    return _table_of(report)


def empty_table(kind: type) -> Table:
    return Table(_HEADERS[kind], [])


_HEADERS = {
    SignSequence: ("n", "value"),
    PrimeVolume: ("q", "primes", "volume", "volume_float"),
    DensityRow: ("X", "j", "count", "density"),
    MaxVolumeRow: ("X", "qstar", "volume_num", "volume_den", "volume_float"),
    CfRow: ("n", "a_n", "q_n", "p_n", "beta_n", "case"),
    RigidityReport: ("q", "sup_defect", "l2_defect", "pr_sum", "delta", "grid", "functional"),
    IetHit: ("q", "l2_defect"),
    CorrelationSeries: ("kind", "h", "N", "value", "in_Dj"),
    OrbitAverage: ("kind", "N", "re", "im", "modulus"),
    ApAverageReport: ("X", "H", "q", "value", "condition_met", "epsilon"),
    BlockDecomposition: ("M", "L", "q", "z_star", "total_at_z", "mean_over_z"),
    GoodSetReport: ("M", "q", "L", "epsilon", "good_m", "good_interval", "good_residue"),
    MomoReport: ("K", "bK", "value"),
}


def _table_of(r) -> Table:
    t = type(r)
    if t not in _HEADERS:
        raise TypeError(f"no CSV schema for {t.__name__}")
    h = _HEADERS[t]
    if t is SignSequence:
        rows = [(r.lo + i, int(v)) for i, v in enumerate(r.values.tolist())]
    elif t is PrimeVolume:
        rows = [(r.q, list(r.primes), r.volume, r.volume_f)]
    elif t is DensityRow:
        rows = [(r.X, r.j, r.count, r.density)]
    elif t is MaxVolumeRow:
        rows = [(r.X, r.qstar, r.volume.numerator, r.volume.denominator, float(r.volume))]
    elif t is CfRow:
        rows = [(r.n, r.a_n, r.q_n, r.p_n, r.beta_n, r.case)]
    elif t is RigidityReport:
        rows = [(r.q, r.sup_defect, r.l2_defect, r.pr_sum, r.delta, r.grid_size, r.functional)]
    elif t is IetHit:
        rows = [(r.q, r.l2_defect)]
    elif t is CorrelationSeries:
        rows = [(r.kind, h, r.N, v, r.dj_filter is not None) for h, v in r.entries.items()]
    elif t is OrbitAverage:
        rows = [(r.kind, r.N, r.value.real, r.value.imag, r.modulus)]
    elif t is ApAverageReport:
        rows = [(r.X, r.H, r.q, r.value, r.condition_met, r.epsilon_used)]
    elif t is BlockDecomposition:
        rows = [(r.M, r.L, r.q, r.z_star, r.total_at_z, r.mean_over_z)]
    elif t is GoodSetReport:
        rows = [(r.M, r.q, r.L, r.epsilon, r.good_m_fraction, r.good_interval_fraction, r.good_residue_mean)]
    else:
        rows = [(r.K, r.bK, r.value)]
    return Table(h, rows)


def render(report, fmt: str = "csv") -> str:
    t = to_table(report)
    if fmt == "csv":
        lines = [",".join(t.header)] + [",".join(_csv_cell(c) for c in row) for row in t.rows]
        return "\n".join(lines) + "\n"
    if fmt == "json":
        objs = [
            "  {" + ", ".join(f"{json.dumps(k)}: {_json_cell(c)}" for k, c in zip(t.header, row)) + "}"
            for row in t.rows
        ]
        return "[\n" + ",\n".join(objs) + "\n]\n" if objs else "[]\n"
    raise ValueError(f"unknown format {fmt!r}")


def emit(report, fmt: str, path) -> None:
    """Write ``report`` to ``path`` as UTF-8 with ``\\n`` line endings."""
    data = render(report, fmt).encode("utf-8")
    Path(path).write_bytes(data)


def read_csv(path) -> Table:
    import csv

    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        return Table((), [])
    return Table(tuple(rows[0]), [tuple(r) for r in rows[1:]])


def rigidity_reports_from_json(text: str) -> list[RigidityReport]:
    """Inverse of the JSON mirror for rigidity reports."""
    out = []
    for o in json.loads(text):
        out.append(
            RigidityReport(
                q=int(o["q"]),
                sup_defect=float(o["sup_defect"]),
                l2_defect=float(o["l2_defect"]),
                pr_sum=float(o["pr_sum"]),
                delta=Fraction(o["delta"]),
                grid_size=int(o["grid"]),
                functional=o["functional"],
            )
        )
    return out


def summarise(tables: Sequence[tuple[str, Table]]) -> Table:
    """Per input file and numeric column: row count, min and max."""
    rows: list[tuple[Any, ...]] = []
    for name, t in tables:
        for i, col in enumerate(t.header):
            vals = []
            for r in t.rows:
                try:
                    vals.append(Fraction(r[i]) if "/" in r[i] else float(r[i]))
                except (ValueError, ZeroDivisionError, IndexError):
                    vals = None
                    break
            if vals:
                rows.append((name, col, len(t.rows), float(min(vals)), float(max(vals))))
    return Table(("file", "column", "rows", "min", "max"), rows)
