"""New ECFs from old ones: convex combinations and Bernstein-function transforms.

Also checks the triangle inequalities that every ECF satisfies under a
Bernstein function g, written for eta = theta - 1.
"""

from __future__ import annotations

import itertools
import math
import re
from dataclasses import dataclass

import numpy as np

from .ecf import TOL_VALIDATE, EcfTable, InvalidEcfError, validate_ecf
from .semigroup import check_mask

SLACK_TOL = 1e-9
KINDS = ("affine", "log1p", "power", "negpower", "expmixture")


@dataclass(frozen=True)
class BernsteinFunction:
    """g(r) = c + b r + sum_k w_k (1 - exp(-lam_k r)) and the named special cases.

    power(alpha) is (1 + r)**alpha - 1 for 0 < alpha <= 1; negpower(alpha) is
    1 - (1 + r)**alpha for alpha <= 0.
    """

    kind: str
    c: float = 0.0
    b: float = 0.0
    alpha: float = 1.0
    atoms: tuple[tuple[float, float], ...] = ()

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown Bernstein kind {self.kind!r}; expected one of {KINDS}")
        if self.kind in ("affine", "expmixture") and (self.c < 0 or self.b < 0):
            raise ValueError("Bernstein constants c and b must be >= 0")
        if self.kind == "power" and not 0 < self.alpha <= 1:
            raise ValueError(f"power exponent must lie in (0, 1], got {self.alpha}")
        if self.kind == "negpower" and not self.alpha <= 0:
            raise ValueError(f"negpower exponent must be <= 0, got {self.alpha}")
        atoms = tuple((float(w), float(lam)) for w, lam in self.atoms)
        if any(w <= 0 or lam <= 0 for w, lam in atoms):
            raise ValueError("mixture weights and rates must be > 0")
        object.__setattr__(self, "atoms", atoms)

    @classmethod
    def affine(cls, c: float, b: float) -> "BernsteinFunction":
        return cls("affine", c=c, b=b)

    @classmethod
    def log1p(cls) -> "BernsteinFunction":
        return cls("log1p")

    @classmethod
    def power(cls, alpha: float) -> "BernsteinFunction":
        return cls("power", alpha=alpha)

    @classmethod
    def negpower(cls, alpha: float) -> "BernsteinFunction":
        return cls("negpower", alpha=alpha)

    @classmethod
    def expmixture(cls, c: float, b: float, atoms) -> "BernsteinFunction":
        return cls("expmixture", c=c, b=b, atoms=tuple(atoms))

    def __call__(self, r):
        r = np.asarray(r, dtype=np.float64)
        if (r < 0).any():
            raise ValueError("Bernstein functions are evaluated on [0, inf)")
        if self.kind == "log1p":
            out = np.log1p(r)
        elif self.kind == "power":
            out = np.expm1(self.alpha * np.log1p(r))
        elif self.kind == "negpower":
            out = -np.expm1(self.alpha * np.log1p(r))
        else:
            out = self.c + self.b * r
            for w, lam in self.atoms:
                out = out - w * np.expm1(-lam * r)
        return out if out.ndim else float(out)

    def is_constant(self) -> bool:
        if self.kind in ("affine", "expmixture"):
            return self.b == 0 and not self.atoms
        return self.kind == "negpower" and self.alpha == 0

    def to_json(self) -> dict:
        out: dict = {"kind": self.kind}
        if self.kind in ("affine", "expmixture"):
            out.update(c=self.c, b=self.b)
        if self.kind in ("power", "negpower"):
            out["alpha"] = self.alpha
        if self.kind == "expmixture":
            out["atoms"] = [{"w": w, "lambda": lam} for w, lam in self.atoms]
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "BernsteinFunction":
        atoms = tuple((a["w"], a["lambda"]) for a in obj.get("atoms", ()))
        return cls(
            obj["kind"],
            c=float(obj.get("c", 0.0)),
            b=float(obj.get("b", 0.0)),
            alpha=float(obj.get("alpha", 1.0)),
            atoms=atoms,
        )

    @classmethod
    def parse(cls, text: str) -> "BernsteinFunction":
        """Parse "log1p", "pow:0.5", "negpow:-1", "affine:c,b" or "mix:c,b,[w:lambda,...]"."""
        text = text.strip()
        if text == "log1p":
            return cls.log1p()
        head, _, rest = text.partition(":")
        try:
            if head == "pow":
                args = (float(rest),)
            elif head == "negpow":
                args = (float(rest),)
            elif head == "affine":
                args = tuple(float(v) for v in rest.split(","))
                if len(args) != 2:
                    raise ValueError
            elif head == "mix":
                mt = re.fullmatch(r"\s*([^,]+),([^,]+),\[(.*)\]\s*", rest)
                if mt is None:
                    raise ValueError
                pairs = [p for p in mt.group(3).split(",") if p.strip()]
                atoms = [tuple(float(v) for v in p.split(":")) for p in pairs]
                if any(len(a) != 2 for a in atoms):
                    raise ValueError
                args = (float(mt.group(1)), float(mt.group(2)), atoms)
            else:
                raise ValueError
        except ValueError:
            raise ValueError(f"cannot parse Bernstein function {text!r}") from None
        build = {"pow": cls.power, "negpow": cls.negpower, "affine": cls.affine, "mix": cls.expmixture}
        return build[head](*args)


def _require_valid(ecf: EcfTable, tol: float) -> None:
    report = validate_ecf(ecf, tol)
    if not report.passed:
        raise InvalidEcfError(report)


def bernstein_transform_ecf(
    ecf: EcfTable, g: BernsteinFunction, tol: float = TOL_VALIDATE
) -> EcfTable:
    """A -> (g(theta(A)) - g(0)) / (g(1) - g(0))."""
    if g.is_constant():
        raise ValueError("a constant Bernstein function cannot be normalized")
    _require_valid(ecf, tol)
    g0, g1 = g(0.0), g(1.0)
    theta = (g(ecf.theta) - g0) / (g1 - g0)
    theta[0] = 0.0
    theta[1 << np.arange(ecf.m)] = 1.0
    return EcfTable(ecf.ground, theta)


def convex_combine(e1: EcfTable, e2: EcfTable, alpha: float, tol: float = TOL_VALIDATE) -> EcfTable:
    """alpha * theta1 + (1 - alpha) * theta2, the ECF of alpha X v (1 - alpha) Y."""
    if not e1.ground.same_sites(e2.ground):
        raise ValueError("ECFs are defined on different ground sets")
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must lie in [0, 1], got {alpha}")
    _require_valid(e1, tol)
    _require_valid(e2, tol)
    return EcfTable(e1.ground, alpha * e1.theta + (1.0 - alpha) * e2.theta)


@dataclass(frozen=True)
class TriangleResult:
    passed: bool
    slack: float  # min over both inequalities of (right side - left side)
    first: float
    second: float


def triangle_check(
    ecf: EcfTable, g: BernsteinFunction, a: int, b: int, c: int, tol: float = SLACK_TOL
) -> TriangleResult:
    """f(A|B) <= f(C) + f(A|B) <= f(A|C) + f(C|B) with f = g(theta - 1)."""
    for s in (a, b, c):
        check_mask(s, ecf.m)
        if s == 0:
            raise ValueError("triangle inequalities need nonempty subsets")
    f = lambda s: g(max(ecf.theta[s] - 1.0, 0.0))  # noqa: E731
    first = f(c)
    second = f(a | c) + f(c | b) - f(c) - f(a | b)
    slack = min(first, second)
    return TriangleResult(slack >= -tol, slack, first, second)


def triangle_sweep(ecf: EcfTable, g: BernsteinFunction, tol: float = SLACK_TOL) -> TriangleResult:
    """triangle_check over every triple of nonempty subsets, vectorized.

    Returns the result for the worst triple.
    """
    m = ecf.m
    f = g(np.clip(ecf.theta - 1.0, 0.0, None))
    s = np.arange(1, 1 << m)
    ab = s[:, None] | s[None, :]
    worst_first = float(f[1:].min())
    worst_second = math.inf
    for c in s:
        # second[a, b] = f(a|c) + f(c|b) - f(c) - f(a|b)
        second = f[s | c][:, None] + f[s | c][None, :] - f[c] - f[ab]
        worst_second = min(worst_second, float(second.min()))
    slack = min(worst_first, worst_second)
    return TriangleResult(slack >= -tol, slack, worst_first, worst_second)


@dataclass(frozen=True)
class CooleyResult:
    product: float  # theta_sr * theta_rt - theta_st
    subadditive: float | None  # for 0 < alpha <= 1
    superadditive: float | None  # for alpha <= 0

    def passed(self, tol: float = SLACK_TOL) -> dict[str, bool | None]:
        return {
            "product": self.product >= -tol,
            "subadditive": None if self.subadditive is None else self.subadditive >= -tol,
            "superadditive": None if self.superadditive is None else self.superadditive >= -tol,
        }


def cooley_check(ecf: EcfTable, r: int, s: int, t: int, alpha: float) -> CooleyResult:
    """Slacks of the bivariate inequalities for sites r, s, t.

    theta_st <= theta_sr theta_rt, and theta_st**alpha <= theta_sr**alpha +
    theta_rt**alpha - 1 for 0 < alpha <= 1 (reversed for alpha <= 0).
    """
    if len({r, s, t}) != 3:
        raise ValueError("cooley_check needs three distinct sites")
    for i in (r, s, t):
        if not 0 <= i < ecf.m:
            raise ValueError(f"site {i} out of range")
    th_st = ecf[(1 << s) | (1 << t)]
    th_sr = ecf[(1 << s) | (1 << r)]
    th_rt = ecf[(1 << r) | (1 << t)]
    product = th_sr * th_rt - th_st
    sub = sup = None
    if 0 < alpha <= 1:
        sub = th_sr**alpha + th_rt**alpha - 1.0 - th_st**alpha
    elif alpha <= 0:
        sup = th_st**alpha - (th_sr**alpha + th_rt**alpha - 1.0)
    return CooleyResult(product, sub, sup)


def cooley_as_triangle(ecf: EcfTable, r: int, s: int, t: int, alpha: float) -> dict[str, TriangleResult]:
    """The Cooley inequalities as triangle_check(A={s}, B={t}, C={r}) with the matching g."""
    gs = {"product": BernsteinFunction.log1p()}
    if 0 < alpha <= 1:
        gs["subadditive"] = BernsteinFunction.power(alpha)
    elif alpha <= 0:
        gs["superadditive"] = BernsteinFunction.negpower(alpha)
    return {k: triangle_check(ecf, g, 1 << s, 1 << t, 1 << r) for k, g in gs.items()}


def all_site_triples(m: int):
    return itertools.permutations(range(m), 3)
