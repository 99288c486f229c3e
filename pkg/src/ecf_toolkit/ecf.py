"""Extremal coefficient functions (ECFs) on a finite ground set.

An ECF table stores theta(A) for every subset A.  ``compute_tau`` recovers the
weights tau_L of the Tawn-Molchanov spectral measure by inclusion-exclusion;
the table is a valid ECF exactly when it is normalized and every tau_L >= 0.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels, rng
from .semigroup import GroundSet, SetFunction, check_mask, expand_index, popcounts

TOL_VALIDATE = 1e-9
TOL_NORMALIZATION = 1e-12
DIRECT_TAU_MAX_SITES = 16


class NormalizationError(ValueError):
    """theta(empty) != 0 or theta({t}) != 1."""

    def __init__(self, message: str, mask: int):
        super().__init__(message)
        self.mask = mask


class InvalidEcfError(ValueError):
    """Raised where a valid ECF is a precondition; carries the diagnostics."""

    def __init__(self, report: "ValidationReport"):
        worst = report.diagnostics[0].message if report.diagnostics else "invalid ECF"
        super().__init__(f"not a valid ECF: {worst}")
        self.report = report


def _frozen(a, shape=None) -> np.ndarray:
    a = np.array(a, dtype=np.float64)
    if shape is not None and a.shape != shape:
        raise ValueError(f"expected shape {shape}, got {a.shape}")
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class EcfTable:
    ground: GroundSet
    theta: np.ndarray

    def __post_init__(self):
        theta = _frozen(self.theta, (1 << self.ground.size,))
        if not np.isfinite(theta).all():
            raise ValueError("ECF table contains non-finite values")
        object.__setattr__(self, "theta", theta)

    @classmethod
    def from_callable(cls, ground: GroundSet, fn) -> "EcfTable":
        """theta(A) = fn(A) for nonempty masks A, theta(empty) = 0."""
        vals = np.zeros(1 << ground.size)
        for s in range(1, 1 << ground.size):
            vals[s] = fn(s)
        return cls(ground, vals)

    @property
    def m(self) -> int:
        return self.ground.size

    def __getitem__(self, mask: int) -> float:
        return float(self.theta[check_mask(mask, self.m)])

    def as_set_function(self) -> SetFunction:
        return SetFunction(self.theta)

    def restrict(self, mask: int) -> "EcfTable":
        """The ECF of the sub-vector indexed by ``mask``."""
        return EcfTable(self.ground.restrict(mask), self.theta[expand_index(mask, self.m)])


@dataclass(frozen=True)
class TauTable:
    """tau_L for nonempty L; entry 0 is unused and kept at 0."""

    ground: GroundSet
    tau: np.ndarray

    def __post_init__(self):
        tau = np.array(self.tau, dtype=np.float64)
        if tau.shape != (1 << self.ground.size,):
            raise ValueError(f"tau table needs {1 << self.ground.size} entries, got {tau.shape}")
        tau[0] = 0.0
        tau.setflags(write=False)
        object.__setattr__(self, "tau", tau)

    @property
    def m(self) -> int:
        return self.ground.size

    def __getitem__(self, mask: int) -> float:
        return float(self.tau[check_mask(mask, self.m)])

    def row_sums(self) -> np.ndarray:
        """sum of tau_L over L containing t, for each site t."""
        masks = np.arange(1 << self.m)
        return np.array([self.tau[(masks >> t) & 1 == 1].sum() for t in range(self.m)])

    def check(self, tol: float = TOL_VALIDATE) -> None:
        """Raise ValueError unless tau >= -tol and every row sum is 1."""
        neg = np.flatnonzero(self.tau < -tol)
        if neg.size:
            L = int(neg[0])
            raise ValueError(f"tau{self.ground.member_labels(L)} = {self.tau[L]:.3g} is negative")
        rs = self.row_sums()
        bad = np.flatnonzero(np.abs(rs - 1.0) > tol)
        if bad.size:
            t = int(bad[0])
            raise ValueError(f"tau weights of site {self.ground.labels[t]} sum to {rs[t]:.12g}, not 1")


@dataclass(frozen=True)
class DiscreteSpectralMeasure:
    """Max-linear model X_i = max_j a_ij Z_j with unit row sums."""

    ground: GroundSet
    atoms: np.ndarray = field(repr=False)

    def __post_init__(self):
        a = np.array(self.atoms, dtype=np.float64)
        if a.ndim != 2 or a.shape[0] != self.ground.size:
            raise ValueError(f"atom matrix must have {self.ground.size} rows, got shape {a.shape}")
        if not np.isfinite(a).all() or (a < 0).any():
            raise ValueError("atom weights must be finite and nonnegative")
        a = a[:, a.sum(axis=0) > 0]
        if a.shape[1] == 0:
            raise ValueError("spectral measure has no nonzero atom")
        rs = a.sum(axis=1)
        if np.abs(rs - 1.0).max() > TOL_VALIDATE:
            t = int(np.argmax(np.abs(rs - 1.0)))
            raise ValueError(f"row {self.ground.labels[t]} sums to {rs[t]:.12g}, not 1")
        a.setflags(write=False)
        object.__setattr__(self, "atoms", a)

    @classmethod
    def normalized(cls, ground: GroundSet, raw) -> "DiscreteSpectralMeasure":
        a = np.array(raw, dtype=np.float64)
        return cls(ground, a / a.sum(axis=1, keepdims=True))

    @property
    def q(self) -> int:
        return self.atoms.shape[1]


def check_normalization(ecf: EcfTable, tol: float = TOL_NORMALIZATION) -> None:
    if abs(ecf.theta[0]) > tol:
        raise NormalizationError(f"theta(empty) = {ecf.theta[0]:.12g}, expected 0", 0)
    for t in range(ecf.m):
        v = ecf.theta[1 << t]
        if abs(v - 1.0) > tol:
            raise NormalizationError(
                f"theta({{{ecf.ground.labels[t]}}}) = {v:.12g}, expected 1", 1 << t
            )


def compute_tau(
    ecf: EcfTable, method: str = "auto", norm_tol: float = TOL_NORMALIZATION
) -> TauTable:
    """tau_L = sum over I in L of (-1)**(|I|+1) theta((M \\ L) | I).

    ``method`` is "direct" (one pairwise-summed alternating sum per L, O(3**m)),
    "mobius" (O(m 2**m) butterfly) or "auto" (direct up to 16 sites).
    Negative coefficients are returned as they are.
    """
    check_normalization(ecf, norm_tol)
    if method == "auto":
        method = "direct" if ecf.m <= DIRECT_TAU_MAX_SITES else "mobius"
    if method == "direct":
        tau = kernels.tau_direct(ecf.theta, ecf.m)
    elif method == "mobius":
        tau = kernels.tau_mobius(ecf.theta, ecf.m)
    else:
        raise ValueError(f"unknown method {method!r}")
    return TauTable(ecf.ground, tau)


@dataclass(frozen=True)
class Diagnostic:
    kind: str  # empty-set | singleton | below-one | exceeds-size | monotonicity | negative-tau
    mask: int
    magnitude: float
    message: str


@dataclass(frozen=True)
class ValidationReport:
    passed: bool
    diagnostics: list[Diagnostic]
    tau: TauTable | None = None
    min_tau: float | None = None

    def to_json(self, ground: GroundSet) -> dict:
        return {
            "valid": self.passed,
            "min_tau": self.min_tau,
            "diagnostics": [
                {
                    "kind": d.kind,
                    "subset": ground.member_labels(d.mask),
                    "magnitude": d.magnitude,
                    "message": d.message,
                }
                for d in self.diagnostics
            ],
        }


def validate_ecf(ecf: EcfTable, tol: float = TOL_VALIDATE) -> ValidationReport:
    """Decide whether ``ecf`` is a valid ECF, listing every violated constraint.

    Passes iff theta(empty) = 0, theta({t}) = 1 and min tau_L >= -tol.  Range
    and monotonicity violations are reported as well; they always come with a
    negative tau coefficient.
    """
    g, th, m = ecf.ground, ecf.theta, ecf.m
    diags: list[Diagnostic] = []

    def add(kind, mask, mag, msg):
        diags.append(Diagnostic(kind, int(mask), float(mag), msg))

    if abs(th[0]) > tol:
        add("empty-set", 0, abs(th[0]), f"theta(empty) = {th[0]:.12g}, expected 0")
    for t in range(m):
        if abs(th[1 << t] - 1.0) > tol:
            add("singleton", 1 << t, abs(th[1 << t] - 1.0),
                f"theta({{{g.labels[t]}}}) = {th[1 << t]:.12g}, expected 1")
    normalized = not diags

    sizes = popcounts(m)
    for s in np.flatnonzero(th[1:] < 1.0 - tol) + 1:
        add("below-one", s, 1.0 - th[s], f"theta({g.member_labels(s)}) = {th[s]:.12g} is below 1")
    for s in np.flatnonzero(th > sizes + tol):
        if s:
            add("exceeds-size", s, th[s] - sizes[s],
                f"theta({g.member_labels(s)}) = {th[s]:.12g} exceeds |A| = {sizes[s]}")
    idx = np.arange(1 << m)
    for t in range(m):
        drop = th[idx] - th[idx | (1 << t)]
        for s in np.flatnonzero(drop > tol):
            add("monotonicity", s, drop[s],
                f"theta({g.member_labels(s)}) > theta({g.member_labels(s | 1 << t)})")

    if not normalized:
        return ValidationReport(False, diags)
    tau = compute_tau(ecf, norm_tol=tol)
    vals = tau.tau[1:]
    min_tau = float(vals.min())
    for L in np.flatnonzero(vals < -tol) + 1:
        add("negative-tau", L, -tau.tau[L], f"tau{g.member_labels(L)} = {tau.tau[L]:.12g} < 0")
    return ValidationReport(min_tau >= -tol, diags, tau, min_tau)


def ecf_from_tau(tau: TauTable, check: bool = True, tol: float = TOL_VALIDATE) -> EcfTable:
    """theta(A) = sum of tau_L over L meeting A."""
    if check:
        tau.check(tol)
    m = tau.m
    below = kernels.subset_zeta(tau.tau, m)  # sum over L subset of S
    full = (1 << m) - 1
    theta = below[full] - below[full ^ np.arange(1 << m)]
    theta[0] = 0.0
    return EcfTable(tau.ground, theta)


def marginalize_tau(tau: TauTable, mask: int) -> TauTable:
    """tau^A_K = sum over J in M \\ A of tau^M_{K | J}, re-indexed on A."""
    m = tau.m
    check_mask(mask, m)
    if mask == 0:
        raise ValueError("cannot marginalize onto the empty set")
    acc = np.array(tau.tau, dtype=np.float64)
    for b in range(m):
        if mask >> b & 1:
            continue
        v = acc.reshape(-1, 2, 1 << b)
        v[:, 0, :] += v[:, 1, :]  # fold sets containing b onto sets without it
    return TauTable(tau.ground.restrict(mask), acc[expand_index(mask, m)])


def ecf_from_spectral_measure(sm: DiscreteSpectralMeasure) -> EcfTable:
    """theta(A) = sum over atoms j of max_{i in A} a_ij."""
    m = sm.ground.size
    theta = np.zeros(1 << m)
    for j in range(sm.q):
        theta += kernels.subset_max(sm.atoms[:, j], m)
    return EcfTable(sm.ground, theta)


def random_spectral_measure(m: int, q: int, seed: int) -> DiscreteSpectralMeasure:
    """Atoms i.i.d. uniform on (0, 1), rows normalized; deterministic in (m, q, seed)."""
    if q < 1:
        raise ValueError("q must be >= 1")
    gen = rng.stream(seed, m, q)
    return DiscreteSpectralMeasure.normalized(GroundSet.of_size(m), rng.open_uniform(gen, (m, q)))


def random_valid_ecf(m: int, q: int, seed: int) -> EcfTable:
    return ecf_from_spectral_measure(random_spectral_measure(m, q, seed))
