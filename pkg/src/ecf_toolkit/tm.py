"""Tawn-Molchanov processes at finite resolution.

The TM process of a valid ECF is the max-linear vector
``X_i = max over L containing i of tau_L Z_L`` with i.i.d. unit Frechet Z_L.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass

import numpy as np

from . import kernels, rng
from .ecf import (
    TOL_VALIDATE,
    DiscreteSpectralMeasure,
    EcfTable,
    InvalidEcfError,
    TauTable,
    ecf_from_tau,
    validate_ecf,
)
from .semigroup import GroundSet, check_mask

ATOM_CUTOFF = 1e-15


@dataclass(frozen=True)
class TmProcess:
    tau: TauTable
    theta: EcfTable

    @classmethod
    def from_tau(cls, tau: TauTable) -> "TmProcess":
        return cls(tau, ecf_from_tau(tau))

    @property
    def ground(self) -> GroundSet:
        return self.tau.ground

    @property
    def m(self) -> int:
        return self.tau.m

    def atom_masks(self) -> np.ndarray:
        """Masks L with tau_L above the simulation cutoff."""
        return np.flatnonzero(self.tau.tau > ATOM_CUTOFF)

    def spectral_measure(self) -> DiscreteSpectralMeasure:
        """The TM process as a max-linear model: one column per atom L."""
        masks = self.atom_masks()
        member = (masks[None, :] >> np.arange(self.m)[:, None]) & 1
        return DiscreteSpectralMeasure(self.ground, member * np.clip(self.tau.tau[masks], 0, None))


def tm_from_ecf(ecf: EcfTable, tol: float = TOL_VALIDATE) -> TmProcess:
    report = validate_ecf(ecf, tol)
    if not report.passed:
        raise InvalidEcfError(report)
    # clip roundoff-level negatives so the weights are a genuine measure
    tau = TauTable(ecf.ground, np.clip(report.tau.tau, 0.0, None))
    return TmProcess(tau, ecf)


def _inverse_point(x, m: int) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (m,):
        raise ValueError(f"point must have {m} coordinates, got shape {x.shape}")
    if np.isnan(x).any() or (x <= 0).any():
        raise ValueError(f"c.d.f. arguments must be positive, got {x}")
    return 1.0 / x  # +inf coordinates drop out


def tm_neg_log_cdf(p: TmProcess, x) -> float:
    """-log P(X <= x) = sum over L of tau_L * max_{t in L} 1/x_t."""
    return float(np.dot(p.tau.tau, kernels.subset_max(_inverse_point(x, p.m), p.m)))


def stable_tail_dependence(p: TmProcess, x) -> float:
    """l(x) = sum over L of tau_L * max_{t in L} x_t, for x >= 0, x != 0."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (p.m,) or np.isnan(x).any() or (x < 0).any() or not np.isfinite(x).all():
        raise ValueError(f"expected a finite nonnegative point with {p.m} coordinates")
    if not x.any():
        raise ValueError("stable tail dependence is not defined at the origin")
    return float(np.dot(p.tau.tau, kernels.subset_max(x, p.m)))


def maxlinear_neg_log_cdf(sm: DiscreteSpectralMeasure, x) -> float:
    """Exact -log P(X <= x) of a max-linear model: sum_j max_i a_ij / x_i."""
    inv = _inverse_point(x, sm.ground.size)
    return float((sm.atoms * inv[:, None]).max(axis=0).sum())


def tm_bivariate_neg_log_cdf(eta: float, x: float, y: float) -> float:
    """eta / max(x, y) + 1 / min(x, y), where eta = theta({s, t}) - 1."""
    if not 0.0 <= eta <= 1.0:
        raise ValueError(f"bivariate eta must lie in [0, 1], got {eta}")
    if not (x > 0 and y > 0):
        raise ValueError("c.d.f. arguments must be positive")
    return eta / max(x, y) + 1.0 / min(x, y)


@dataclass(frozen=True)
class SampleBatch:
    values: np.ndarray  # n x m, one replicate per row
    seed: int
    labels: tuple[str, ...]
    generator: str = rng.GENERATOR

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def m(self) -> int:
        return self.values.shape[1]

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(",".join(self.labels) + "\n")
        for row in self.values:
            buf.write(",".join("%.17g" % v for v in row) + "\n")
        return buf.getvalue()

    def metadata(self) -> dict:
        return {"n": self.n, "seed": self.seed, "generator": self.generator}

    @classmethod
    def from_csv(cls, text: str, meta: dict | None = None) -> "SampleBatch":
        rows = list(csv.reader(io.StringIO(text)))
        if not rows:
            raise ValueError("empty sample file")
        labels = tuple(rows[0])
        vals = np.array([[float(v) for v in r] for r in rows[1:] if r], dtype=np.float64)
        if vals.ndim != 2 or vals.shape[1] != len(labels):
            raise ValueError("sample rows do not match the header")
        if not (np.isfinite(vals).all() and (vals > 0).all()):
            raise ValueError("samples must be strictly positive and finite")
        meta = meta or {}
        return cls(vals, int(meta.get("seed", -1)), labels, meta.get("generator", rng.GENERATOR))


def _simulate(atoms: np.ndarray, n: int, seed: int, threads: int | None) -> np.ndarray:
    if n < 1:
        raise ValueError("n must be >= 1")
    q = atoms.shape[1]

    def chunk(c, lo, hi):
        z = rng.unit_frechet(rng.stream(seed, c), (hi - lo, q))
        return kernels.maxlinear_apply(atoms, z)

    return np.vstack(rng.map_chunks(chunk, rng.chunks(n), threads))


def simulate_maxlinear(
    sm: DiscreteSpectralMeasure, n: int, seed: int, threads: int | None = None
) -> SampleBatch:
    """Exact samples of X_i = max_j a_ij Z_j."""
    return SampleBatch(_simulate(sm.atoms, n, seed, threads), seed, sm.ground.labels)


def simulate_tm(p: TmProcess, n: int, seed: int, threads: int | None = None) -> SampleBatch:
    """Exact samples of the TM process; atoms with tau_L <= 1e-15 are skipped."""
    return simulate_maxlinear(p.spectral_measure(), n, seed, threads)


def empirical_ecf(batch: SampleBatch, mask: int) -> tuple[float, float]:
    """theta_hat(A) = n / sum_k 1/max_{t in A} X_t and its standard error theta_hat/sqrt(n).

    1/max_{t in A} X_t is exponential with rate theta(A) for a simple
    max-stable vector.
    """
    check_mask(mask, batch.m)
    if mask == 0:
        raise ValueError("empirical ECF of the empty set is undefined")
    if batch.n < 2:
        raise ValueError("need at least two replicates")
    cols = [i for i in range(batch.m) if mask >> i & 1]
    est = batch.n / np.sum(1.0 / batch.values[:, cols].max(axis=1))
    return float(est), float(est / math.sqrt(batch.n))


def empirical_ecf_table(batch: SampleBatch, max_size: int | None = None) -> dict[int, tuple[float, float]]:
    """empirical_ecf for every nonempty subset with at most max_size sites."""
    out = {}
    for s in range(1, 1 << batch.m):
        if max_size is None or bin(s).count("1") <= max_size:
            out[s] = empirical_ecf(batch, s)
    return out


def continuity_bound(eta_st: float, eps: float) -> tuple[float, float]:
    """Bounds on P(|X_s - X_t| > eps): (2(1 - exp(-eta/eps)), 2 eta / eps)."""
    if eta_st < 0 or not eps > 0:
        raise ValueError("need eta >= 0 and eps > 0")
    return 2.0 * -math.expm1(-eta_st / eps), 2.0 * eta_st / eps


def batch_metadata_json(batch: SampleBatch) -> str:
    return json.dumps(batch.metadata(), indent=2) + "\n"
