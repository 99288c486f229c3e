"""Pure numpy implementations of the numeric kernels.

Every function here has a twin with the same signature in ``_ckernels.pyx``.
Arrays indexed by subsets have length ``2**m`` and use the bit pattern of the
subset as index.
"""

from __future__ import annotations

import itertools

import numpy as np

BACKEND = "python"


def _parity(nbits: int) -> np.ndarray:
    """(-1)**popcount(k) for k < 2**nbits as float64."""
    par = np.ones(1, dtype=np.float64)
    for _ in range(nbits):
        par = np.concatenate([par, -par])
    return par


def tau_direct(theta: np.ndarray, m: int) -> np.ndarray:
    """tau[L] = sum over I subset of L of (-1)**(|I|+1) theta[(M \\ L) | I].

    One alternating sum per coefficient, O(3**m) in total.  np.sum uses
    pairwise summation on contiguous arrays.
    """
    theta = np.ascontiguousarray(theta, dtype=np.float64)
    full = (1 << m) - 1
    tau = np.zeros(1 << m, dtype=np.float64)
    parities = [-_parity(p) for p in range(m + 1)]
    for L in range(1, 1 << m):
        bits = [b for b in range(m) if L >> b & 1]
        k = np.arange(1 << len(bits), dtype=np.int64)
        sub = np.zeros_like(k)
        for j, b in enumerate(bits):
            sub |= ((k >> j) & 1) << b
        terms = parities[len(bits)] * theta[(full & ~L) | sub]
        tau[L] = terms.sum()
    return tau


def tau_mobius(theta: np.ndarray, m: int) -> np.ndarray:
    """Same table as ``tau_direct`` via the O(m 2**m) Moebius butterfly."""
    full = (1 << m) - 1
    h = np.asarray(theta, dtype=np.float64)[full ^ np.arange(1 << m)].copy()
    for b in range(m):
        v = h.reshape(-1, 2, 1 << b)
        v[:, 1, :] -= v[:, 0, :]
    h = -h
    h[0] = 0.0
    return h


def subset_zeta(values: np.ndarray, m: int) -> np.ndarray:
    """s[S] = sum of values[L] over all L subset of S."""
    s = np.array(values, dtype=np.float64, copy=True)
    for b in range(m):
        v = s.reshape(-1, 2, 1 << b)
        v[:, 1, :] += v[:, 0, :]
    return s


def subset_max(v: np.ndarray, m: int) -> np.ndarray:
    """mx[S] = max of v[t] over t in S; mx[0] = 0.  Requires v >= 0."""
    v = np.asarray(v, dtype=np.float64)
    mx = np.zeros(1 << m, dtype=np.float64)
    for b in range(m):
        lo = 1 << b
        np.maximum(mx[:lo], v[b], out=mx[lo : 2 * lo])
    return mx


def maxlinear_apply(a: np.ndarray, z: np.ndarray) -> np.ndarray:
    """X[k, i] = max_j a[i, j] * z[k, j] for a of shape (m, q), z of shape (n, q)."""
    a = np.asarray(a, dtype=np.float64)
    z = np.asarray(z, dtype=np.float64)
    x = np.zeros((z.shape[0], a.shape[0]), dtype=np.float64)
    for j in range(a.shape[1]):
        col = a[:, j]
        rows = np.flatnonzero(col > 0.0)
        if rows.size == 0:
            continue
        x[:, rows] = np.maximum(x[:, rows], z[:, j, None] * col[None, rows])
    return x


def vertex_candidates(
    g: np.ndarray, h: np.ndarray, tol: float, chunk: int = 200_000
) -> np.ndarray:
    """Feasible solutions of every nonsingular m-subset of the planes G x = h.

    Returns a (k, m) array, duplicates included, in the lexicographic order of
    the chosen row subsets.
    """
    g = np.asarray(g, dtype=np.float64)
    h = np.asarray(h, dtype=np.float64)
    p, m = g.shape
    combos = itertools.combinations(range(p), m)
    found = []
    while True:
        block = np.fromiter(
            itertools.chain.from_iterable(itertools.islice(combos, chunk)),
            dtype=np.int64,
        )
        if block.size == 0:
            break
        idx = block.reshape(-1, m)
        mats = g[idx]
        ok = np.abs(np.linalg.det(mats)) > 1e-9
        if not ok.any():
            continue
        sol = np.linalg.solve(mats[ok], h[idx[ok]][..., None])[..., 0]
        feas = np.all(sol @ g.T <= h + tol, axis=1)
        if feas.any():
            found.append(sol[feas])
    if not found:
        return np.zeros((0, m))
    return np.concatenate(found)
