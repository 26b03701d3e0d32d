"""CSV and JSON document serialization.

Floats are printed with 17 significant digits so outputs round-trip
bit-exactly; infinities use the literals ``inf`` and ``-inf``.
"""

from __future__ import annotations

import json
import math

import numpy as np

from .boundary import BoundaryCurve, BoundaryEstimate, TimeGrid
from .verify import FptSample


class CsvFormatError(ValueError):
    pass


def format_float(x: float) -> str:
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(float(x), ".17g")


def parse_float(s: str) -> float:
    s = s.strip()
    if s == "inf":
        return math.inf
    if s == "-inf":
        return -math.inf
    try:
        return float(s)
    except ValueError as exc:
        raise CsvFormatError(f"bad float literal {s!r}") from exc


def curve_csv_lines(curve: BoundaryCurve):
    yield "t,b"
    for t, b in zip(curve.grid.points, curve.values):
        yield f"{format_float(t)},{format_float(b)}"


def estimate_csv_lines(est: BoundaryEstimate):
    yield "t,b,S_target,S_achieved"
    rows = zip(
        est.curve.grid.points,
        est.curve.values,
        est.survival_target,
        est.survival_achieved,
    )
    for t, b, st, sa in rows:
        yield (
            f"{format_float(t)},{format_float(b)},"
            f"{format_float(st)},{format_float(sa)}"
        )


def write_estimate_csv(path, est: BoundaryEstimate):
    with open(path, "w") as fh:
        for line in estimate_csv_lines(est):
            fh.write(line + "\n")


def read_boundary_csv(path) -> tuple[np.ndarray, np.ndarray]:
    """(times, values) from a boundary CSV; header must start with t,b."""
    with open(path) as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines:
        raise CsvFormatError("empty boundary CSV")
    header = [h.strip() for h in lines[0].split(",")]
    if header[:2] != ["t", "b"]:
        raise CsvFormatError(f"expected header starting 't,b', got {lines[0]!r}")
    ts, bs = [], []
    for ln in lines[1:]:
        cells = ln.split(",")
        if len(cells) != len(header):
            raise CsvFormatError(f"row has {len(cells)} cells, header has {len(header)}")
        ts.append(parse_float(cells[0]))
        bs.append(parse_float(cells[1]))
    if not ts:
        raise CsvFormatError("boundary CSV has no data rows")
    return np.array(ts), np.array(bs)


def write_fpt_sample(path, sample: FptSample):
    with open(path, "w") as fh:
        for t in sample.times:
            fh.write(format_float(t) + "\n")


def grid_document(grid: TimeGrid) -> dict:
    doc = {"points": len(grid), "t_first": float(grid.points[0]), "t_last": float(grid.points[-1])}
    if grid.is_arithmetic:
        doc.update({"t_start": grid.t_start, "dt": grid.dt, "steps": len(grid)})
    return doc


def estimate_document(est: BoundaryEstimate) -> dict:
    """Structured-text form of a calibrated boundary with grid metadata."""
    return {
        "grid": grid_document(est.curve.grid),
        "domain_bounds": [_jsonf(est.curve.domain_bounds[0]), _jsonf(est.curve.domain_bounds[1])],
        "off_grid_value": _jsonf(est.curve.off_grid_value),
        "values": [_jsonf(v) for v in est.curve.values],
        "particles": est.particles,
        "seed": est.seed,
        "diagnostics": est.diagnostics,
    }


def order_report_document(report) -> dict:
    return {
        "holds": bool(report.holds),
        "worst_violation": _jsonf(report.worst_violation),
        "witness": None if report.witness is None else _jsonf(report.witness),
    }


def _jsonf(x: float):
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return x


def write_json(path, doc: dict):
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
