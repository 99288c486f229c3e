"""JSON and CSV formats for tables, spectral measures and site coordinates.

Subsets are keyed by the JSON encoding of their member labels in ground-set
order, e.g. ``["a","c"]``.  Floats are written with ``repr`` precision, which
round-trips IEEE doubles exactly.
"""

from __future__ import annotations

import csv
import io
import json

import numpy as np

from .ecf import DiscreteSpectralMeasure, EcfTable, TauTable
from .semigroup import GroundSet


def subset_key(g: GroundSet, mask: int) -> str:
    return json.dumps(g.member_labels(mask), separators=(",", ":"))


def parse_subset_key(g: GroundSet, key: str) -> int:
    labels = json.loads(key)
    if not isinstance(labels, list):
        raise ValueError(f"subset key {key!r} is not a list")
    mask = g.mask(labels)
    if bin(mask).count("1") != len(labels):
        raise ValueError(f"subset key {key!r} repeats a site")
    return mask


def _ground_from(obj: dict) -> GroundSet:
    if "labels" not in obj:
        raise ValueError("missing 'labels'")
    return GroundSet(tuple(obj["labels"]), obj.get("coords"))


def _table_from(obj: dict, field: str) -> tuple[GroundSet, np.ndarray]:
    g = _ground_from(obj)
    vals = np.full(1 << g.size, np.nan)
    vals[0] = 0.0
    entries = obj.get(field)
    if not isinstance(entries, dict):
        raise ValueError(f"missing '{field}' object")
    for key, v in entries.items():
        vals[parse_subset_key(g, key)] = float(v)
    missing = np.flatnonzero(np.isnan(vals))
    if missing.size:
        raise ValueError(
            f"'{field}' has no entry for {len(missing)} subsets, e.g. {g.member_labels(int(missing[0]))}"
        )
    return g, vals


def _table_to(g: GroundSet, vals: np.ndarray, field: str, extra: dict | None = None) -> dict:
    out: dict = {"labels": list(g.labels)}
    if g.coords is not None:
        out["coords"] = g.coords.tolist()
    out[field] = {subset_key(g, s): float(vals[s]) for s in range(1, 1 << g.size)}
    if extra:
        out.update(extra)
    return out


def ecf_to_json(ecf: EcfTable, extra: dict | None = None) -> dict:
    return _table_to(ecf.ground, ecf.theta, "theta", extra)


def ecf_from_json(obj: dict) -> EcfTable:
    g, vals = _table_from(obj, "theta")
    return EcfTable(g, vals)


def tau_to_json(tau: TauTable) -> dict:
    return _table_to(tau.ground, tau.tau, "tau")


def tau_from_json(obj: dict) -> TauTable:
    g, vals = _table_from(obj, "tau")
    return TauTable(g, vals)


def spectral_to_csv(sm: DiscreteSpectralMeasure) -> str:
    buf = io.StringIO()
    buf.write(",".join(["site"] + [f"a{j + 1}" for j in range(sm.q)]) + "\n")
    for label, row in zip(sm.ground.labels, sm.atoms):
        buf.write(",".join([label] + ["%.17g" % v for v in row]) + "\n")
    return buf.getvalue()


def spectral_from_csv(text: str) -> DiscreteSpectralMeasure:
    rows = [r for r in csv.reader(io.StringIO(text)) if r]
    if not rows or rows[0][0].strip() != "site":
        raise ValueError("spectral measure CSV must start with a 'site,a1,...' header")
    q = len(rows[0]) - 1
    labels, atoms = [], []
    for r in rows[1:]:
        if len(r) != q + 1:
            raise ValueError(f"row for site {r[0]!r} has {len(r) - 1} atoms, expected {q}")
        labels.append(r[0].strip())
        atoms.append([float(v) for v in r[1:]])
    return DiscreteSpectralMeasure(GroundSet(tuple(labels)), np.array(atoms))


def sites_from_csv(text: str) -> GroundSet:
    """Site coordinates "label,x1,...,xd" with a header row."""
    rows = [r for r in csv.reader(io.StringIO(text)) if r]
    if len(rows) < 2 or rows[0][0].strip() != "label":
        raise ValueError("site CSV must start with a 'label,x1,...' header")
    d = len(rows[0]) - 1
    labels, coords = [], []
    for r in rows[1:]:
        if len(r) != d + 1:
            raise ValueError(f"site {r[0]!r} has {len(r) - 1} coordinates, expected {d}")
        labels.append(r[0].strip())
        coords.append([float(v) for v in r[1:]])
    return GroundSet(tuple(labels), np.array(coords))


def sites_to_csv(g: GroundSet) -> str:
    if g.coords is None:
        raise ValueError("ground set has no coordinates")
    d = g.coords.shape[1]
    buf = io.StringIO()
    buf.write(",".join(["label"] + [f"x{i + 1}" for i in range(d)]) + "\n")
    for label, row in zip(g.labels, g.coords):
        buf.write(",".join([label] + ["%.17g" % v for v in row]) + "\n")
    return buf.getvalue()


def dumps(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"
