"""CSV and JSON writers/readers for trajectories, spectra, distances and reports.

CSV floats use 17 significant digits; JSON floats use Python's shortest
round-trip repr.  Both parse back to the identical double.
"""

from __future__ import annotations

import csv
import io
import json
from typing import Iterable, Sequence

import numpy as np

TRAJECTORY_HEADER = ("t", "success_prob", "norm")
DISTANCE_HEADER = ("t", "d_exact", "d_embed", "d_total")
SWEEP_HEADER = ("N", "HT", "cot_qht", "max_success_prob", "thm2_distance_max")


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return format(float(v), ".17g")


def format_csv(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def parse_csv(text: str, header: Sequence[str]) -> list:
    """Rows as dicts of floats (ints where the column is ``t`` or ``N``)."""
    reader = csv.DictReader(io.StringIO(text))
    if tuple(reader.fieldnames or ()) != tuple(header):
        raise ValueError(f"unexpected CSV header {reader.fieldnames}, expected {list(header)}")
    ints = {"t", "N"}
    return [{k: int(v) if k in ints else float(v) for k, v in row.items()} for row in reader]


def trajectory_csv(rows: Iterable[Sequence], stride: int = 1) -> str:
    """Rows ``(t, success_prob, norm)``, keeping every ``stride``-th step."""
    if stride < 1:
        raise ValueError("stride must be >= 1")
    return format_csv(TRAJECTORY_HEADER, (r for r in rows if r[0] % stride == 0))


def distances_csv(dists: Iterable) -> str:
    return format_csv(DISTANCE_HEADER, ((d.t, d.d_exact, d.d_embed, d.d_total) for d in dists))


def sweep_csv(rows: Iterable[dict]) -> str:
    return format_csv(SWEEP_HEADER, ([r[k] for k in SWEEP_HEADER] for r in rows))


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        return f if np.isfinite(f) else None
    return obj


def to_json(obj) -> str:
    """JSON text with numpy types converted and non-finite floats as null."""
    return json.dumps(_plain(obj), indent=2, allow_nan=False) + "\n"


def eigenpairs_json(pairs: Sequence, w: np.ndarray) -> list:
    """``[{theta, overlap_sq}]`` for lifted eigenpairs against the state ``w``."""
    w = np.asarray(w).ravel()
    return [{"theta": p.theta * p.sign, "overlap_sq": float(abs(np.vdot(p.vector, w)) ** 2)} for p in pairs]


def reports_json(reports: Sequence) -> str:
    return to_json([r.to_dict() for r in reports])
