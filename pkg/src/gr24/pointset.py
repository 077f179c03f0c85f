"""Reading and writing point sets on Gr(2,4).

Two formats are supported.

JSON::

    {"format": "gr24-frames-v1",
     "points": [[[r, r], [r, r], [r, r], [r, r]], ...],
     "metadata": {...}}

CSV: one point per row, eight columns holding the frame entries in
column-major order (x00, x10, x20, x30, x01, x11, x21, x31), written with 17
significant digits. Metadata is stored in leading ``#`` comment lines.

Readers re-orthonormalize every frame and reject any whose Gram matrix
deviates from the identity by more than 1e-6.
"""

from __future__ import annotations

import datetime as _dt
import json
import os
from pathlib import Path

import numpy as np

from .errors import MalformedPointSet, RankDeficient
from .grassmann import gram_deviation, orthonormalize_many

FORMAT_TAG = "gr24-frames-v1"
GRAM_TOL = 1e-6
CSV_HEADER = "x00,x10,x20,x30,x01,x11,x21,x31"


def _as_points(points) -> np.ndarray:
    P = np.asarray(points, dtype=float)
    if P.ndim == 2 and P.shape == (4, 2):
        P = P[None]
    if P.ndim != 3 or P.shape[1:] != (4, 2):
        raise MalformedPointSet(f"expected an array of 4x2 frames, got shape {P.shape}")
    return P


def validate_points(points) -> np.ndarray:
    """Check Gram deviation and return canonical orthonormal frames."""
    P = _as_points(points)
    if not np.all(np.isfinite(P)):
        raise MalformedPointSet("point set contains non-finite entries")
    for i, X in enumerate(P):
        dev = gram_deviation(X)
        if dev > GRAM_TOL:
            raise MalformedPointSet(f"frame {i} is not orthonormal (Gram deviation {dev:.3g})")
    try:
        return orthonormalize_many(P)
    except RankDeficient as exc:
        raise MalformedPointSet(str(exc)) from exc


def _format_of(path, fmt):
    if fmt is not None:
        return fmt
    return "csv" if str(path).lower().endswith(".csv") else "json"


def dumps_json(points, metadata=None) -> str:
    P = _as_points(points)
    doc = {"format": FORMAT_TAG, "points": P.tolist(), "metadata": dict(metadata or {})}
    # json uses repr for floats, which round-trips doubles exactly
    return json.dumps(doc, indent=1, sort_keys=False) + "\n"


def dumps_csv(points, metadata=None) -> str:
    P = _as_points(points)
    lines = [f"# format={FORMAT_TAG}"]
    for key, val in (metadata or {}).items():
        lines.append(f"# {key}={json.dumps(val)}")
    lines.append(CSV_HEADER)
    flat = np.swapaxes(P, 1, 2).reshape(len(P), 8)
    for row in flat:
        lines.append(",".join(f"{v:.17g}" for v in row))
    return "\n".join(lines) + "\n"


def write_points(path, points, metadata=None, fmt=None) -> None:
    """Write a point set as JSON (default) or CSV (by extension or ``fmt``)."""
    fmt = _format_of(path, fmt)
    text = dumps_csv(points, metadata) if fmt == "csv" else dumps_json(points, metadata)
    Path(path).write_text(text)


def loads_json(text):
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedPointSet(f"invalid JSON: {exc}") from exc
    if not isinstance(doc, dict) or doc.get("format") != FORMAT_TAG or "points" not in doc:
        raise MalformedPointSet(f"not a {FORMAT_TAG} document")
    try:
        P = np.asarray(doc["points"], dtype=float)
    except (TypeError, ValueError) as exc:
        raise MalformedPointSet(f"points are not a numeric array: {exc}") from exc
    if P.size == 0:
        raise MalformedPointSet("point set is empty")
    return validate_points(P), dict(doc.get("metadata") or {})


def loads_csv(text):
    metadata = {}
    rows = []
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            key, _, val = line[1:].strip().partition("=")
            if key and key != "format":
                try:
                    metadata[key] = json.loads(val)
                except json.JSONDecodeError:
                    metadata[key] = val
            continue
        if line == CSV_HEADER:
            continue
        fields = line.split(",")
        if len(fields) != 8:
            raise MalformedPointSet(f"CSV row has {len(fields)} columns, expected 8")
        try:
            rows.append([float(f) for f in fields])
        except ValueError as exc:
            raise MalformedPointSet(f"non-numeric CSV entry: {exc}") from exc
    if not rows:
        raise MalformedPointSet("point set is empty")
    flat = np.asarray(rows)
    P = np.swapaxes(flat.reshape(len(rows), 2, 4), 1, 2)
    return validate_points(P), metadata


def read_points(path, fmt=None):
    """Read a point set; returns ``(points, metadata)`` with points of shape (N, 4, 2)."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise MalformedPointSet(f"cannot read {path}: {exc}") from exc
    if _format_of(path, fmt) == "csv":
        return loads_csv(text)
    return loads_json(text)


def timestamp() -> str:
    """UTC timestamp for manifests; honours SOURCE_DATE_EPOCH for reproducible output."""
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    if epoch is not None:
        t = _dt.datetime.fromtimestamp(int(epoch), tz=_dt.timezone.utc)
    else:
        t = _dt.datetime.now(tz=_dt.timezone.utc)
    return t.strftime("%Y-%m-%dT%H:%M:%SZ")
