"""Dependency-set polytopes of Tawn-Molchanov processes and the resulting bounds.

For a valid ECF theta on M the TM dependency set is the polytope
{x >= 0 : sum_{t in A} x_t <= theta(A) for every nonempty A}.  Its support
function is the stable tail dependence function of the TM process, the
largest one among all simple max-stable vectors sharing theta.
"""

from __future__ import annotations

import io
import itertools
import json
import math
from dataclasses import dataclass

import numpy as np

from . import kernels, rng
from .ecf import TOL_VALIDATE, EcfTable, InvalidEcfError, validate_ecf
from .semigroup import GroundSet, check_mask
from .tm import tm_from_ecf, tm_neg_log_cdf

GEOM_TOL = 1e-9
MAX_VERTEX_SITES = 6
EXHAUSTIVE_AUTO_MAX = 5


class GeometryError(RuntimeError):
    pass


def halfspaces_from_ecf(ecf: EcfTable, tol: float = TOL_VALIDATE) -> list[tuple[int, float]]:
    """(A, theta(A)) for every nonempty A."""
    report = validate_ecf(ecf, tol)
    if not report.passed:
        raise InvalidEcfError(report)
    return [(s, float(ecf.theta[s])) for s in range(1, 1 << ecf.m)]


def _constraint_matrix(halfspaces, m: int) -> tuple[np.ndarray, np.ndarray]:
    """Rows G, h of G x <= h: one per halfspace, then -x_t <= 0 per site."""
    rows, rhs = [], []
    for mask, bound in halfspaces:
        check_mask(mask, m)
        rows.append([(mask >> t) & 1 for t in range(m)])
        rhs.append(bound)
    for t in range(m):
        e = [0] * m
        e[t] = -1
        rows.append(e)
        rhs.append(0.0)
    return np.array(rows, dtype=np.float64), np.array(rhs, dtype=np.float64)


def dedupe_points(points: np.ndarray, tol: float = GEOM_TOL) -> np.ndarray:
    """Drop points within tol (max-norm) of an earlier one; result sorted lexicographically."""
    if len(points) == 0:
        return points
    pts = np.where(np.abs(points) < 1e-12, 0.0, points)
    pts = pts[np.lexsort(pts.T[::-1])]
    keep = [pts[0]]
    for p in pts[1:]:
        if np.min(np.max(np.abs(np.array(keep) - p), axis=1)) > tol:
            keep.append(p)
    keep = np.array(keep)
    # order on rounded keys so roundoff-level differences cannot reorder the output
    return keep[np.lexsort(np.round(keep, 9).T[::-1])]


def _is_polymatroid(bounds: dict[int, float], m: int, tol: float) -> bool:
    if len(bounds) != (1 << m) - 1:
        return False
    f = np.zeros(1 << m)
    for s, v in bounds.items():
        f[s] = v
    idx = np.arange(1 << m)
    for t in range(m):
        if (f[idx] - f[idx | (1 << t)] > tol).any():
            return False
        for u in range(t + 1, m):
            bt, bu = 1 << t, 1 << u
            if (f[idx | bt] + f[idx | bu] - f[idx] - f[idx | bt | bu] < -tol).any():
                return False
    return True


def greedy_vertices(halfspaces, m: int) -> np.ndarray:
    """Vertices of a polymatroid {x >= 0 : x(A) <= f(A)} with f monotone submodular.

    Each ordering t_1, ..., t_m and prefix length k gives the vertex with
    x_{t_i} = f({t_1..t_i}) - f({t_1..t_{i-1}}) for i <= k and 0 elsewhere.
    """
    f = dict(halfspaces)
    f[0] = 0.0
    pts = []
    for order in itertools.permutations(range(m)):
        x = np.zeros(m)
        prefix = 0
        pts.append(x.copy())
        for t in order:
            nxt = prefix | (1 << t)
            x[t] = f[nxt] - f[prefix]
            prefix = nxt
            pts.append(x.copy())
    return dedupe_points(np.array(pts))


def enumerate_vertices(halfspaces, m: int, method: str = "auto", tol: float = GEOM_TOL) -> np.ndarray:
    """Vertices of {x >= 0} intersected with the halfspaces {x(A) <= b}.

    "exhaustive" solves every m-subset of the bounding hyperplanes (coordinate
    planes included) and keeps the feasible solutions.  "greedy" uses the
    polymatroid structure of ECF halfspaces.  "auto" is exhaustive up to five
    sites and greedy at six when the bounds form a polymatroid.
    """
    if not 1 <= m <= MAX_VERTEX_SITES:
        raise ValueError(f"vertex enumeration supports 1..{MAX_VERTEX_SITES} sites, got {m}")
    halfspaces = list(halfspaces)
    if method == "auto":
        method = "exhaustive"
        if m > EXHAUSTIVE_AUTO_MAX and _is_polymatroid(dict(halfspaces), m, tol):
            method = "greedy"
    if method == "greedy":
        if not _is_polymatroid(dict(halfspaces), m, tol):
            raise ValueError("greedy enumeration needs monotone submodular bounds on every subset")
        return greedy_vertices(halfspaces, m)
    if method != "exhaustive":
        raise ValueError(f"unknown method {method!r}")
    g, h = _constraint_matrix(halfspaces, m)
    return dedupe_points(kernels.vertex_candidates(g, h, tol), tol)


@dataclass(frozen=True)
class DepSetPolytope:
    ground: GroundSet
    halfspaces: list[tuple[int, float]]
    vertices: np.ndarray

    @property
    def m(self) -> int:
        return self.ground.size

    def to_json(self) -> dict:
        return {
            "labels": list(self.ground.labels),
            "halfspaces": [
                {"A": self.ground.member_labels(s), "b": b} for s, b in self.halfspaces
            ],
            "vertices": [[float(v) for v in row] for row in self.vertices],
        }

    def vertices_csv(self) -> str:
        buf = io.StringIO()
        buf.write(",".join(self.ground.labels) + "\n")
        for row in self.vertices:
            buf.write(",".join("%.17g" % v for v in row) + "\n")
        return buf.getvalue()


def dependency_polytope(ecf: EcfTable, method: str = "auto") -> DepSetPolytope:
    hs = halfspaces_from_ecf(ecf)
    return DepSetPolytope(ecf.ground, hs, enumerate_vertices(hs, ecf.m, method))


def support_function(poly: DepSetPolytope, x) -> float:
    """max over vertices v of <x, v>."""
    if len(poly.vertices) == 0:
        raise ValueError("polytope has no vertices")
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (poly.m,):
        raise ValueError(f"direction must have {poly.m} coordinates")
    return float(np.max(poly.vertices @ x))


def contains(poly: DepSetPolytope, y, tol: float = GEOM_TOL) -> bool:
    y = np.asarray(y, dtype=np.float64)
    if (y < -tol).any():
        return False
    return all(sum(y[t] for t in range(poly.m) if s >> t & 1) <= b + tol for s, b in poly.halfspaces)


def touches_plane(poly: DepSetPolytope, mask: int, tol: float = GEOM_TOL) -> np.ndarray:
    """A vertex maximizing sum_{t in A} v_t; raises unless it attains theta(A)."""
    check_mask(mask, poly.m)
    bound = dict(poly.halfspaces).get(mask)
    if bound is None:
        raise ValueError("no halfspace for this subset")
    ind = np.array([(mask >> t) & 1 for t in range(poly.m)], dtype=np.float64)
    vals = poly.vertices @ ind
    i = int(np.argmax(vals))
    if abs(vals[i] - bound) > tol:
        raise GeometryError(f"plane for {poly.ground.member_labels(mask)} is not attained: {vals[i]!r} < {bound!r}")
    return poly.vertices[i].copy()


@dataclass(frozen=True)
class InclusionResult:
    passed: bool
    max_violation: float  # largest x(A) - b (or -x_t) over points and constraints
    worst_point: int | None


def inclusion_check(points, poly: DepSetPolytope, tol: float = GEOM_TOL) -> InclusionResult:
    pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
    g, h = _constraint_matrix(poly.halfspaces, poly.m)
    excess = pts @ g.T - h
    per_point = excess.max(axis=1)
    worst = int(np.argmax(per_point)) if len(pts) else None
    viol = float(per_point.max()) if len(pts) else -math.inf
    return InclusionResult(viol <= tol, viol, worst)


def positive_sphere_sample(m: int, n: int, seed: int) -> np.ndarray:
    """n points uniform on the positive part of the Euclidean unit sphere."""
    z = np.abs(rng.stream(seed, m, n).standard_normal((n, m)))
    return z / np.linalg.norm(z, axis=1, keepdims=True)


def support_gradient_points(ell, directions, h: float = 1e-6) -> np.ndarray:
    """Central-difference gradients of a support function at the given directions.

    The gradient of a support function at x is a boundary point of the body
    exposed in direction x.
    """
    dirs = np.atleast_2d(np.asarray(directions, dtype=np.float64))
    out = np.empty_like(dirs)
    for k, x in enumerate(dirs):
        for t in range(dirs.shape[1]):
            e = np.zeros(dirs.shape[1])
            e[t] = h * max(1.0, abs(x[t]))
            out[k, t] = (ell(x + e) - ell(x - e)) / (2 * e[t])
    return out


def fdd_lower_log_bound(ecf: EcfTable, x) -> float:
    """log of the sharp lower bound on P(X <= x) for any simple max-stable X with ECF theta."""
    return -tm_neg_log_cdf(tm_from_ecf(ecf), x)


def fdd_lower_bound(ecf: EcfTable, x) -> float:
    return math.exp(fdd_lower_log_bound(ecf, x))


def check_eta_triple(eta_rs: float, eta_st: float, eta_rt: float, tol: float = 1e-12) -> float:
    """Return a_rst after checking the bivariate feasibility conditions."""
    etas = (eta_rs, eta_st, eta_rt)
    if any(not (-tol <= e <= 1 + tol) for e in etas):
        raise ValueError(f"bivariate eta values must lie in [0, 1], got {etas}")
    a = min(eta_rs + eta_st, eta_rs + eta_rt, eta_st + eta_rt)
    if max(max(etas), sum(etas) - 1.0) > a + tol:
        raise ValueError(f"eta triple {etas} is not jointly feasible")
    return a


def trivariate_log_bound_from_bivariate(eta_rs, eta_st, eta_rt, x) -> float:
    xr, xs, xt = (float(v) for v in x)
    if min(xr, xs, xt) <= 0:
        raise ValueError("c.d.f. arguments must be positive")
    a = check_eta_triple(eta_rs, eta_st, eta_rt)
    pair_min = (1 / min(xr, xs), 1 / min(xs, xt), 1 / min(xr, xt))
    expo = (
        (1 - max(eta_rs, eta_st, eta_rt)) / min(xr, xs, xt)
        + min(a, 1.0) * sum(pair_min)
        - (eta_rs * pair_min[0] + eta_st * pair_min[1] + eta_rt * pair_min[2])
        + a * (1 / xr + 1 / xs + 1 / xt)
        - (eta_st / xr + eta_rt / xs + eta_rs / xt)
    )
    return -expo


def trivariate_bound_from_bivariate(eta_rs, eta_st, eta_rt, x) -> float:
    """Lower bound on P(X_r <= x_r, X_s <= x_s, X_t <= x_t) from the three bivariate etas."""
    return math.exp(trivariate_log_bound_from_bivariate(eta_rs, eta_st, eta_rt, x))


def simplex_grid(m: int, resolution: int) -> np.ndarray:
    """Directions x >= 0 with sum 1 on a regular grid with the given resolution."""
    pts = [
        np.array(c, dtype=np.float64) / resolution
        for c in itertools.product(range(resolution + 1), repeat=m)
        if sum(c) == resolution
    ]
    return np.array(pts)


def polytope_json(poly: DepSetPolytope, grid: np.ndarray | None = None) -> str:
    obj = poly.to_json()
    if grid is not None:
        obj["support"] = [
            {"x": [float(v) for v in x], "h": support_function(poly, x)} for x in grid
        ]
    return json.dumps(obj, indent=2) + "\n"
