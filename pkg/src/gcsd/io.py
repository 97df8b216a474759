"""Columnar sample files and report writers shared by the CLI.

One input format for everything: a comma-delimited text file with a header
row, one sample per line.  A leading ``group`` (or ``label``) column carries
integer group ids; the remaining columns are the d feature coordinates.
Reports are written as CSV (with a single ``# meta:`` JSON comment line) or
as JSON with ``meta`` and ``rows`` keys, and floats round-trip exactly.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import InputError, ParseError
from .estimators import MultiSample
from .kernel import SampleSet

GROUP_COLUMN_NAMES = ("group", "label", "group_id")


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        return repr(value)  # shortest exact round-trip
    return str(value)


def read_samples(path: str | Path):
    """Parse a columnar sample file.

    Returns ``(ids, features)`` where ids is an int vector or None when the
    file has no group column.  Raises ParseError naming the offending line.
    """
    lines = Path(path).read_text().splitlines()
    if not lines:
        raise ParseError("empty file, expected a header row", 1)
    header = [h.strip() for h in lines[0].split(",")]
    if not header or not header[0]:
        raise ParseError("malformed header row", 1)
    has_groups = header[0].lower() in GROUP_COLUMN_NAMES
    n_cols = len(header)
    if n_cols - int(has_groups) < 1:
        raise ParseError("header declares no feature columns", 1)

    ids: list[int] = []
    rows: list[list[float]] = []
    for lineno, raw in enumerate(lines[1:], start=2):
        if not raw.strip():
            continue
        parts = raw.split(",")
        if len(parts) != n_cols:
            raise ParseError(f"expected {n_cols} fields, got {len(parts)}", lineno)
        try:
            if has_groups:
                ids.append(int(parts[0]))
                rows.append([float(p) for p in parts[1:]])
            else:
                rows.append([float(p) for p in parts])
        except ValueError as exc:
            raise ParseError(str(exc), lineno) from None
    if not rows:
        raise ParseError("no data rows", 2)
    features = np.asarray(rows, dtype=np.float64)
    if not np.all(np.isfinite(features)):
        bad = int(np.where(~np.isfinite(features).all(axis=1))[0][0])
        raise ParseError("non-finite feature value", bad + 2)
    return (np.asarray(ids, dtype=np.int64) if has_groups else None), features


def groups_from_ids(ids: np.ndarray, features: np.ndarray) -> MultiSample:
    """Split rows into per-group sample sets, ordered by ascending group id."""
    uniq = np.unique(ids)
    if uniq.size < 2:
        raise InputError(f"need at least two groups, file has {uniq.size}")
    return MultiSample(tuple(SampleSet(features[ids == g]) for g in uniq))


def write_samples(path: str | Path, ids: np.ndarray, features: np.ndarray):
    features = np.atleast_2d(features)
    header = "group," + ",".join(f"x{j}" for j in range(features.shape[1]))
    lines = [header]
    for gid, row in zip(ids, features):
        lines.append(",".join([str(int(gid))] + [repr(float(v)) for v in row]))
    Path(path).write_text("\n".join(lines) + "\n")


def multisample_ids(ms: MultiSample, group_ids=None):
    """Flatten a MultiSample into (ids, features) for serialization."""
    if group_ids is None:
        group_ids = list(range(1, ms.m + 1))
    ids = np.concatenate([np.full(g.n, gid, dtype=np.int64) for gid, g in zip(group_ids, ms.groups)])
    features = np.vstack([g.data for g in ms.groups])
    return ids, features


def write_report(path: str | Path | None, fmt: str, meta: dict, header: list[str], rows: list[list]):
    """Write rows + meta as CSV or JSON; returns the rendered text."""
    if fmt == "csv":
        lines = ["# meta: " + json.dumps(meta, sort_keys=True)]
        lines.append(",".join(header))
        for row in rows:
            lines.append(",".join(_fmt(v) for v in row))
        text = "\n".join(lines) + "\n"
    elif fmt == "json":
        payload = {"meta": meta, "rows": [dict(zip(header, row)) for row in rows]}
        text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    else:
        raise InputError(f"unknown output format {fmt!r}")
    if path is not None:
        Path(path).write_text(text)
    return text


def read_report(path: str | Path) -> tuple[dict, list[dict]]:
    """Load a report written by write_report, either format."""
    text = Path(path).read_text()
    if text.lstrip().startswith("{"):
        payload = json.loads(text)
        return payload["meta"], payload["rows"]
    lines = [ln for ln in text.splitlines() if ln.strip()]
    meta = json.loads(lines[0].removeprefix("# meta: "))
    header = lines[1].split(",")
    rows = [dict(zip(header, ln.split(","))) for ln in lines[2:]]
    return meta, rows
