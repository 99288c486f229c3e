"""ECFs of example max-stable models on sites with coordinates."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from . import kernels, rng
from .ecf import EcfTable
from .semigroup import GroundSet, popcounts

PSD_CLIP = -1e-10


def independent_ecf(g: GroundSet) -> EcfTable:
    """theta(A) = |A|."""
    return EcfTable(g, popcounts(g.size).astype(np.float64))


def identical_ecf(g: GroundSet) -> EcfTable:
    """theta(A) = 1 for every nonempty A."""
    theta = np.ones(1 << g.size)
    theta[0] = 0.0
    return EcfTable(g, theta)


def sqrt_ecf(g: GroundSet) -> EcfTable:
    """theta(A) = sqrt(|A|), the ECF of the Euclidean-norm stable tail dependence."""
    return EcfTable(g, np.sqrt(popcounts(g.size)))


def ball_ell(x) -> float:
    """Euclidean norm, a stable tail dependence function on the orthant."""
    x = np.asarray(x, dtype=np.float64)
    if (x < 0).any():
        raise ValueError("ball_ell is defined on the nonnegative orthant")
    return float(np.linalg.norm(x))


@dataclass(frozen=True)
class BoxKernel:
    """Indicator kernel of an axis-aligned box of unit volume."""

    lower: tuple[float, ...]
    upper: tuple[float, ...]

    def __post_init__(self):
        lo = tuple(float(v) for v in self.lower)
        hi = tuple(float(v) for v in self.upper)
        if len(lo) != len(hi) or not lo:
            raise ValueError("box corners must have the same positive dimension")
        vol = math.prod(h - l for l, h in zip(lo, hi))
        if any(h <= l for l, h in zip(lo, hi)) or abs(vol - 1.0) > 1e-12:
            raise ValueError(f"box must have volume 1, got {vol!r}")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @classmethod
    def unit(cls, d: int) -> "BoxKernel":
        return cls((0.0,) * d, (1.0,) * d)

    @property
    def dim(self) -> int:
        return len(self.lower)


def m3_box_ecf(g: GroundSet, box: BoxKernel) -> EcfTable:
    """theta(A) = volume of the union of the translates t + B, t in A.

    Intersection volumes of translated boxes are boxes; the union volume
    follows by inclusion-exclusion over the subsets of A.
    """
    if g.coords is None:
        raise ValueError("m3_box_ecf needs site coordinates")
    c = g.coords
    if c.shape[1] != box.dim:
        raise ValueError(f"sites are {c.shape[1]}-dimensional, box is {box.dim}-dimensional")
    m = g.size
    lo = c + np.asarray(box.lower)
    hi = c + np.asarray(box.upper)
    cap_lo = np.full((1 << m, box.dim), -np.inf)
    cap_hi = np.full((1 << m, box.dim), np.inf)
    for b in range(m):
        s = 1 << b
        cap_lo[s : 2 * s] = np.maximum(cap_lo[:s], lo[b])
        cap_hi[s : 2 * s] = np.minimum(cap_hi[:s], hi[b])
    inter = np.prod(np.clip(cap_hi - cap_lo, 0.0, None), axis=1)
    inter[0] = 0.0
    signed = np.where(popcounts(m) % 2 == 1, inter, -inter)
    theta = kernels.subset_zeta(signed, m)
    theta[0] = 0.0
    return EcfTable(g, theta)


@dataclass(frozen=True)
class VariogramSpec:
    """Power variogram gamma(h) = lam * |h|**alpha."""

    lam: float
    alpha: float
    kind: str = "power"

    def __post_init__(self):
        if self.kind != "power":
            raise ValueError(f"unsupported variogram kind {self.kind!r}")
        if not self.lam > 0 or not 0 < self.alpha <= 2:
            raise ValueError(f"need lam > 0 and 0 < alpha <= 2, got {self.lam}, {self.alpha}")

    def __call__(self, h) -> np.ndarray:
        r = np.linalg.norm(np.atleast_2d(np.asarray(h, dtype=np.float64)), axis=-1)
        return self.lam * r**self.alpha


def br_bivariate_theta(gamma: float) -> float:
    """theta({s, t}) = 1 + erf(sqrt(gamma / 8)) of a Brown-Resnick process."""
    if gamma < 0 or math.isnan(gamma):
        raise ValueError(f"variogram value must be >= 0, got {gamma}")
    if math.isinf(gamma):
        return 2.0
    return 1.0 + math.erf(math.sqrt(gamma / 8.0))


def hr_bivariate_neg_log_cdf(gamma: float, x1: float, x2: float) -> float:
    """Bivariate Huesler-Reiss -log P(X1 <= x1, X2 <= x2), unit Frechet margins.

    gamma = 0 is full dependence and gamma = inf independence.
    """
    if not (x1 > 0 and x2 > 0):
        raise ValueError("c.d.f. arguments must be positive")
    if gamma < 0 or math.isnan(gamma):
        raise ValueError(f"variogram value must be >= 0, got {gamma}")
    if gamma == 0:
        return 1.0 / min(x1, x2)
    if math.isinf(gamma):
        return 1.0 / x1 + 1.0 / x2
    a = math.sqrt(gamma)
    r = math.log(x2 / x1) / a
    return float(ndtr(a / 2 + r) / x1 + ndtr(a / 2 - r) / x2)


def hr_bivariate_ell(gamma: float, x) -> float:
    """Stable tail dependence of the bivariate Huesler-Reiss law."""
    x1, x2 = float(x[0]), float(x[1])
    if x1 < 0 or x2 < 0 or x1 == x2 == 0:
        raise ValueError("need x >= 0, x != 0")
    if x1 == 0 or x2 == 0:
        return x1 + x2
    return hr_bivariate_neg_log_cdf(gamma, 1.0 / x1, 1.0 / x2)


def _anchored_factor(g: GroundSet, v: VariogramSpec) -> tuple[np.ndarray, np.ndarray]:
    """Square root of the covariance of W with W at the first site pinned to 0."""
    c = g.coords
    g0 = v(c - c[0])
    gst = v(c[:, None, :] - c[None, :, :])
    cov = 0.5 * (g0[:, None] + g0[None, :] - gst)
    w, vec = np.linalg.eigh(cov)
    if w.min() < PSD_CLIP:
        raise ValueError(f"variogram covariance is not positive semidefinite (eigenvalue {w.min():.3g})")
    return vec * np.sqrt(np.clip(w, 0.0, None)), g0


def _rowwise_subset_max(y: np.ndarray, m: int) -> np.ndarray:
    """mx[k, S] = max_{t in S} y[k, t] for every replicate k."""
    mx = np.zeros((y.shape[0], 1 << m))
    for b in range(m):
        s = 1 << b
        np.maximum(mx[:, :s], y[:, b, None], out=mx[:, s : 2 * s])
    return mx


@dataclass(frozen=True)
class BrownResnickEstimate:
    raw: np.ndarray  # Monte Carlo theta estimates, all subsets
    se: np.ndarray  # their standard errors
    ecf: EcfTable  # self-normalized table, a valid ECF
    n: int
    seed: int


def br_ecf_mc(
    g: GroundSet, v: VariogramSpec, n: int, seed: int, threads: int | None = None
) -> BrownResnickEstimate:
    """Monte Carlo Brown-Resnick ECF, theta(A) = E exp(max_{t in A} W_t - gamma(t - t0)/2).

    The draws Y_kt = exp(W_t - sigma_t^2/2) define an empirical spectral
    measure with atoms Y_k / n.  ``raw`` is its ECF, the plain Monte Carlo
    average.  ``ecf`` is the ECF of the same measure with rows rescaled to
    unit sums, which differs from ``raw`` by Monte Carlo noise and is valid
    by construction.
    """
    if g.coords is None:
        raise ValueError("br_ecf_mc needs site coordinates")
    if n < 2:
        raise ValueError("need n >= 2")
    m = g.size
    factor, var = _anchored_factor(g, v)

    def chunk(c, lo, hi):
        normal = rng.stream(seed, c).standard_normal((hi - lo, m))
        y = np.exp(normal @ factor.T - 0.5 * var)
        mx = _rowwise_subset_max(y, m)
        return mx.sum(axis=0), (mx * mx).sum(axis=0), y.sum(axis=0)

    parts = rng.map_chunks(chunk, rng.chunks(n), threads)
    s1 = np.sum([p[0] for p in parts], axis=0)
    s2 = np.sum([p[1] for p in parts], axis=0)
    raw = s1 / n
    se = np.sqrt(np.clip(s2 / n - raw**2, 0.0, None) / (n - 1))
    raw[0] = se[0] = 0.0

    # theta_hat(A) = sum_k max_{t in A} Y_kt / (n rowmean_t): rescale sites, not atoms
    row_mean = np.sum([p[2] for p in parts], axis=0) / n

    def chunk_norm(c, lo, hi):
        normal = rng.stream(seed, c).standard_normal((hi - lo, m))
        y = np.exp(normal @ factor.T - 0.5 * var) / row_mean
        return _rowwise_subset_max(y, m).sum(axis=0)

    theta = np.sum(rng.map_chunks(chunk_norm, rng.chunks(n), threads), axis=0) / n
    theta[0] = 0.0
    theta[1 << np.arange(m)] = 1.0
    return BrownResnickEstimate(raw, se, EcfTable(g, theta), n, seed)

