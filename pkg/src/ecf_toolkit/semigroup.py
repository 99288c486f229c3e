"""Finite subsets of a ground set as bit masks, and set-function differences.

Subsets of a ground set with ``m`` sites are integers below ``2**m``; bit ``i``
marks site ``i``.  Under union they form an idempotent semigroup with the empty
set (mask 0) as neutral element.  Set functions are dense float arrays indexed
by mask.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

MAX_SITES = 20


@dataclass(frozen=True)
class GroundSet:
    """Ordered finite set of sites, optionally with spatial coordinates."""

    labels: tuple[str, ...]
    coords: np.ndarray | None = field(default=None, compare=False)

    def __post_init__(self):
        labels = tuple(str(x) for x in self.labels)
        object.__setattr__(self, "labels", labels)
        if not 1 <= len(labels) <= MAX_SITES:
            raise ValueError(f"ground set must have 1..{MAX_SITES} sites, got {len(labels)}")
        if len(set(labels)) != len(labels):
            raise ValueError(f"site labels are not unique: {labels}")
        if self.coords is not None:
            c = np.asarray(self.coords, dtype=np.float64)
            if c.ndim == 1:
                c = c[:, None]
            if c.shape[0] != len(labels):
                raise ValueError(f"{c.shape[0]} coordinate rows for {len(labels)} sites")
            c.setflags(write=False)
            object.__setattr__(self, "coords", c)

    @classmethod
    def of_size(cls, m: int, coords=None) -> "GroundSet":
        return cls(tuple(str(i) for i in range(m)), coords)

    @property
    def size(self) -> int:
        return len(self.labels)

    @property
    def full(self) -> int:
        return (1 << self.size) - 1

    def mask(self, items: Iterable) -> int:
        """Mask of a collection of site labels or integer indices."""
        out = 0
        for it in items:
            i = it if isinstance(it, (int, np.integer)) else self.labels.index(str(it))
            if not 0 <= i < self.size:
                raise ValueError(f"site index {i} out of range for m={self.size}")
            out |= 1 << int(i)
        return out

    def members(self, mask: int) -> list[int]:
        check_mask(mask, self.size)
        return [i for i in range(self.size) if mask >> i & 1]

    def member_labels(self, mask: int) -> list[str]:
        return [self.labels[i] for i in self.members(mask)]

    def restrict(self, mask: int) -> "GroundSet":
        idx = self.members(mask)
        if not idx:
            raise ValueError("cannot restrict a ground set to the empty set")
        coords = None if self.coords is None else self.coords[idx]
        return GroundSet(tuple(self.labels[i] for i in idx), coords)

    def same_sites(self, other: "GroundSet") -> bool:
        return self.labels == other.labels


def check_mask(mask: int, m: int) -> int:
    if not 0 <= mask < (1 << m):
        raise ValueError(f"mask {mask} is not a subset of a {m}-site ground set")
    return mask


def popcounts(m: int) -> np.ndarray:
    """|S| for every mask S < 2**m."""
    pc = np.zeros(1, dtype=np.int64)
    for _ in range(m):
        pc = np.concatenate([pc, pc + 1])
    return pc


def enumerate_subsets(g: GroundSet, nonempty_only: bool = False) -> range:
    """All masks of ``g`` in ascending order."""
    return range(1 if nonempty_only else 0, 1 << g.size)


def expand_index(sub_mask: int, m: int) -> np.ndarray:
    """Full-set mask of every subset of ``sub_mask``, listed in the order of the
    compressed (sub-ground-set) masks 0 .. 2**|sub_mask| - 1."""
    bits = [b for b in range(m) if sub_mask >> b & 1]
    k = np.arange(1 << len(bits), dtype=np.int64)
    out = np.zeros_like(k)
    for j, b in enumerate(bits):
        out |= ((k >> j) & 1) << b
    return out


@dataclass(frozen=True)
class SetFunction:
    """A real function on all subsets, stored densely by mask."""

    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=np.float64)
        if v.ndim != 1 or v.size < 2 or v.size & (v.size - 1):
            raise ValueError(f"set function needs 2**m values, got shape {v.shape}")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def from_callable(cls, m: int, fn) -> "SetFunction":
        """Build from fn(mask) evaluated on every mask."""
        return cls(np.array([fn(s) for s in range(1 << m)], dtype=np.float64))

    @property
    def m(self) -> int:
        return self.values.size.bit_length() - 1

    def __call__(self, mask: int) -> float:
        return float(self.values[check_mask(mask, self.m)])

    def to_json(self) -> dict:
        out = {}
        for s in range(1 << self.m):
            key = json.dumps([i for i in range(self.m) if s >> i & 1], separators=(",", ":"))
            out[key] = float(self.values[s])
        return {"m": self.m, "values": out}

    @classmethod
    def from_json(cls, obj: dict) -> "SetFunction":
        m = int(obj["m"])
        vals = np.full(1 << m, np.nan)
        for key, v in obj["values"].items():
            vals[mask_from_indices(json.loads(key), m)] = float(v)
        if np.isnan(vals).any():
            missing = [s for s in range(1 << m) if np.isnan(vals[s])]
            raise ValueError(f"set function is missing subsets {missing[:5]}")
        return cls(vals)


def mask_from_indices(idx: Sequence[int], m: int) -> int:
    out = 0
    for i in idx:
        if not 0 <= int(i) < m:
            raise ValueError(f"site index {i} out of range for m={m}")
        out |= 1 << int(i)
    return out


def delta(f: SetFunction, k: int) -> SetFunction:
    """(Delta_K f)(L) = f(L) - f(L | K) for every L."""
    check_mask(k, f.m)
    idx = np.arange(1 << f.m)
    return SetFunction(f.values - f.values[idx | k])


def nested_delta(f: SetFunction, ks: Sequence[int], k: int) -> float:
    """Alternating sum over I of (-1)**|I| f(K | union of K_i for i in I).

    Equals the iterated difference Delta_{K_1} ... Delta_{K_n} f evaluated at K.
    Summed with math.fsum, so the result is the correctly rounded value of the
    alternating sum of the stored entries.
    """
    if len(ks) < 1:
        raise ValueError("nested_delta needs at least one generator")
    check_mask(k, f.m)
    for kk in ks:
        check_mask(kk, f.m)
    terms = []
    for r in range(len(ks) + 1):
        for sel in itertools.combinations(ks, r):
            u = k
            for kk in sel:
                u |= kk
            terms.append(-f.values[u] if r & 1 else f.values[u])
    return math.fsum(terms)


@dataclass(frozen=True)
class AlternationWitness:
    generators: tuple[int, ...]  # singleton masks K_1 < ... < K_n
    base: int  # K
    value: float


@dataclass(frozen=True)
class AlternationResult:
    passed: bool
    witness: AlternationWitness | None
    checked: int


def check_completely_alternating_direct(
    f: SetFunction, max_depth: int | None = None, tol: float = 1e-9
) -> AlternationResult:
    """Check every nested singleton difference of depth 1..max_depth is <= tol.

    Generators are distinct singletons.  The reported witness is the first
    violation in the order (depth, generator sites lexicographically, base
    mask ascending).
    """
    m = f.m
    if max_depth is None:
        max_depth = m
    if not 1 <= max_depth <= m:
        raise ValueError(f"max_depth must lie in 1..{m}, got {max_depth}")
    idx = np.arange(1 << m)
    best: tuple | None = None
    checked = 0

    # depth-first over increasing site tuples; Delta_{S+t} = Delta_t Delta_S
    def walk(sites: tuple[int, ...], d: np.ndarray):
        nonlocal best, checked
        start = sites[-1] + 1 if sites else 0
        for t in range(start, m):
            nd = d - d[idx | (1 << t)]
            here = sites + (t,)
            checked += nd.size
            bad = np.flatnonzero(nd > tol)
            if bad.size:
                key = (len(here), here, int(bad[0]))
                if best is None or key < best[0]:
                    best = (key, float(nd[bad[0]]))
            if len(here) < max_depth:
                walk(here, nd)

    walk((), f.values.copy())
    if best is None:
        return AlternationResult(True, None, checked)
    (_, sites, base), value = best
    value = nested_delta(f, [1 << t for t in sites], base)
    return AlternationResult(False, AlternationWitness(tuple(1 << t for t in sites), base, value), checked)
