"""File formats: marker CSV, survival-curve CSV, posterior artifact, run manifest.

Marker CSV
    UTF-8, comma separated, header ``time,value``, one observation per row,
    LF or CRLF line endings. ``Z(0) = 0`` is implicit and must not appear.

Curve CSV
    A header row followed by numeric rows. Floats are written with ``repr``,
    which round-trips exactly.

Posterior artifact
    A JSON document with ``"schema": "hazard-potential/posterior"`` and
    ``"version": 1``. Keys: ``prior`` (a, b, beta_p, beta_q, delta),
    ``grid`` (eta_nodes, sigma2_nodes, eta_edges, sigma2_edges, log_weights
    as a row-per-eta matrix with ``null`` for an empty cell), ``threshold``
    (shift), ``marker`` (times, values) and ``summary`` (posterior means and
    mode, shift, last observation time).

Manifest
    A JSON sidecar ``<output>.manifest.json`` recording the command, its
    parameters, the seed, the package version and a UTC timestamp.
"""

from __future__ import annotations

import csv
import io as _io
import json
import math
import os
from datetime import datetime, timezone
from typing import Iterable, Sequence

import numpy as np

from .exceptions import DataError, DomainError
from .inference import MarkerSeries, PosteriorGrid, PriorConfig, ThresholdPosterior

__all__ = [
    "read_marker_csv",
    "parse_marker_csv",
    "read_hazard_table",
    "format_float",
    "write_csv",
    "posterior_to_dict",
    "posterior_from_dict",
    "save_posterior",
    "load_posterior",
    "write_manifest",
    "manifest_path",
    "POSTERIOR_SCHEMA",
]

POSTERIOR_SCHEMA = "hazard-potential/posterior"
POSTERIOR_VERSION = 1


def _read_text(path) -> str:
    try:
        with open(path, encoding="utf-8", newline="") as fh:
            return fh.read()
    except UnicodeDecodeError as exc:
        raise DataError(f"{path}: not valid UTF-8 ({exc})") from None


def _numeric_rows(text: str, header: Sequence[str], source: str):
    rows = list(csv.reader(_io.StringIO(text)))
    rows = [r for r in rows if any(cell.strip() for cell in r)]
    if not rows:
        raise DataError(f"{source}: file is empty")
    got = [c.strip().lstrip("﻿") for c in rows[0]]
    if got != list(header):
        raise DataError(f"{source}: expected header {','.join(header)!r}, got {','.join(got)!r}")
    if len(rows) == 1:
        raise DataError(f"{source}: no data rows")
    out = []
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise DataError(f"{source}: row {lineno} has {len(row)} fields, expected {len(header)}")
        try:
            vals = [float(c) for c in row]
        except ValueError:
            raise DataError(f"{source}: row {lineno} is not numeric: {row!r}") from None
        if not all(math.isfinite(v) for v in vals):
            raise DataError(f"{source}: row {lineno} contains a non-finite value")
        out.append((lineno, vals))
    return out


def parse_marker_csv(text: str, source: str = "<marker>") -> MarkerSeries:
    rows = _numeric_rows(text, ("time", "value"), source)
    prev = 0.0
    for lineno, (t, _) in rows:
        if t <= prev:
            if prev == 0.0:
                raise DataError(f"{source}: row {lineno}: times must be > 0 (Z(0)=0 is implicit)")
            raise DataError(f"{source}: row {lineno}: time {t!r} does not increase past {prev!r}")
        prev = t
    times = [r[1][0] for r in rows]
    values = [r[1][1] for r in rows]
    return MarkerSeries(np.array(times), np.array(values))


def read_marker_csv(path) -> MarkerSeries:
    """Read a ``time,value`` marker file; errors name the offending row."""
    return parse_marker_csv(_read_text(path), source=str(path))


def read_hazard_table(path):
    """Read a ``t,H`` cumulative hazard table."""
    from .riskmodels import TabulatedHazard

    rows = _numeric_rows(_read_text(path), ("t", "H"), str(path))
    try:
        return TabulatedHazard([r[1][0] for r in rows], [r[1][1] for r in rows])
    except DomainError as exc:
        raise DataError(f"{path}: {exc}") from None


def format_float(v) -> str:
    v = float(v)
    if v == 0.0:
        return "0.0"  # avoid "-0.0"
    return repr(v)


def write_csv(stream, header: Sequence[str], rows: Iterable[Sequence]):
    """Write a header and rows; floats use ``repr``, ints stay ints."""
    stream.write(",".join(header) + "\n")
    for row in rows:
        cells = [str(c) if isinstance(c, (int, np.integer)) else format_float(c) for c in row]
        stream.write(",".join(cells) + "\n")


def _nullable(arr):
    return [[None if not math.isfinite(v) else float(v) for v in row] for row in np.asarray(arr)]


def posterior_to_dict(g: PosteriorGrid, xp: ThresholdPosterior, m: MarkerSeries, p: PriorConfig) -> dict:
    eta_mode, s2_mode = g.mode()
    return {
        "schema": POSTERIOR_SCHEMA,
        "version": POSTERIOR_VERSION,
        "prior": {"a": p.a, "b": p.b, "beta_p": p.beta_p, "beta_q": p.beta_q, "delta": int(p.delta)},
        "grid": {
            "eta_nodes": g.eta_nodes.tolist(),
            "sigma2_nodes": g.sigma2_nodes.tolist(),
            "eta_edges": g.eta_edges.tolist(),
            "sigma2_edges": g.sigma2_edges.tolist(),
            "log_weights": _nullable(g.log_weights),
        },
        "threshold": {"shift": xp.shift},
        "marker": {"times": m.times.tolist(), "values": m.values.tolist()},
        "summary": {
            "eta_mean": g.eta_mean(),
            "sigma2_mean": g.sigma2_mean(),
            "eta_mode": eta_mode,
            "sigma2_mode": s2_mode,
            "shift": xp.shift,
            "last_time": m.last_time,
            "last_value": m.last_value,
        },
    }


def posterior_from_dict(doc: dict, source: str = "<posterior>"):
    """Rebuild ``(grid, threshold_posterior, marker, prior)`` from a document."""
    try:
        if doc.get("schema") != POSTERIOR_SCHEMA:
            raise DataError(f"{source}: not a posterior artifact (schema={doc.get('schema')!r})")
        if doc.get("version") != POSTERIOR_VERSION:
            raise DataError(f"{source}: unsupported posterior version {doc.get('version')!r}")
        gd = doc["grid"]
        lw = np.array(
            [[-math.inf if v is None else float(v) for v in row] for row in gd["log_weights"]],
            dtype=float,
        )
        g = PosteriorGrid(
            eta_nodes=gd["eta_nodes"],
            sigma2_nodes=gd["sigma2_nodes"],
            log_weights=lw,
            eta_edges=gd["eta_edges"],
            sigma2_edges=gd["sigma2_edges"],
        )
        total = float(g.masses.sum())
        if not abs(total - 1.0) <= 1e-8:
            raise DataError(f"{source}: posterior weights sum to {total!r}, not 1")
        xp = ThresholdPosterior(shift=float(doc["threshold"]["shift"]))
        m = MarkerSeries(np.array(doc["marker"]["times"]), np.array(doc["marker"]["values"]))
        p = PriorConfig(**doc["prior"])
    except DataError:
        raise
    except (KeyError, TypeError, ValueError, AttributeError) as exc:
        raise DataError(f"{source}: corrupt posterior artifact ({type(exc).__name__}: {exc})") from None
    return g, xp, m, p


def save_posterior(path, g: PosteriorGrid, xp: ThresholdPosterior, m: MarkerSeries, p: PriorConfig):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(posterior_to_dict(g, xp, m, p), fh, indent=1, allow_nan=False)
        fh.write("\n")


def load_posterior(path):
    try:
        doc = json.loads(_read_text(path))
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: corrupt posterior artifact ({exc})") from None
    if not isinstance(doc, dict):
        raise DataError(f"{path}: corrupt posterior artifact (top level is not an object)")
    return posterior_from_dict(doc, source=str(path))


def manifest_path(out_path) -> str:
    return os.fspath(out_path) + ".manifest.json"


def write_manifest(out_path, command: str, parameters: dict, seed: int | None, version: str, now: datetime | None = None):
    now = now or datetime.now(timezone.utc)
    doc = {
        "command": command,
        "parameters": parameters,
        "seed": seed,
        "artifact_version": version,
        "timestamp": now.strftime("%Y-%m-%dT%H:%M:%S.%fZ"),
    }
    path = manifest_path(out_path)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=1, sort_keys=True, default=str)
        fh.write("\n")
    return path
