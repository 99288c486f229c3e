"""Command-line front end.

Every subcommand reads JSON/CSV (file or stdin) and writes JSON/CSV (file or
stdout).  Exit codes: 0 success, 1 validation failure, 2 input or usage error.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys

import numpy as np

from . import __version__, depset, formats, kernels, models, rng, semigroup, tm, transforms
from .ecf import (
    TOL_VALIDATE,
    DiscreteSpectralMeasure,
    EcfTable,
    InvalidEcfError,
    NormalizationError,
    TauTable,
    compute_tau,
    ecf_from_spectral_measure,
    ecf_from_tau,
    marginalize_tau,
    random_valid_ecf,
    validate_ecf,
)

log = logging.getLogger("ecf_toolkit")

EXIT_OK, EXIT_INVALID, EXIT_INPUT = 0, 1, 2

DEFAULTS = {
    "seed": 0,
    "n": 10000,
    "tol": TOL_VALIDATE,
    "lambda": 1.0,
    "alpha": 2.0,
    "q": 4,
    "grid": 4,
}


class InputError(Exception):
    pass


class ValidationFailure(Exception):
    def __init__(self, payload: dict):
        super().__init__("validation failed")
        self.payload = payload


# ---------------------------------------------------------------- input/output


def _read_text(path: str | None) -> str:
    if path in (None, "-"):
        return sys.stdin.read()
    try:
        with open(path) as fh:
            return fh.read()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None


def _write_text(path: str | None, text: str) -> None:
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _load(path: str | None):
    """EcfTable, TauTable or DiscreteSpectralMeasure, by content."""
    text = _read_text(path)
    stripped = text.lstrip()
    if stripped.startswith("{"):
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InputError(f"malformed JSON: {exc}") from None
        if "theta" in obj:
            return formats.ecf_from_json(obj)
        if "tau" in obj:
            return formats.tau_from_json(obj)
        raise InputError("JSON input has neither 'theta' nor 'tau'")
    if stripped.startswith("site"):
        return formats.spectral_from_csv(text)
    raise InputError("unrecognized input: expected ECF/tau JSON or spectral-measure CSV")


def _load_ecf(path: str | None) -> EcfTable:
    obj = _load(path)
    if isinstance(obj, EcfTable):
        return obj
    if isinstance(obj, TauTable):
        return ecf_from_tau(obj)
    return ecf_from_spectral_measure(obj)


def _floats(text: str, name: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",")]
    except ValueError:
        raise InputError(f"--{name} expects comma-separated numbers, got {text!r}") from None


def _labels_of(g: semigroup.GroundSet, text: str) -> int:
    try:
        return g.mask(s.strip() for s in text.split(","))
    except ValueError as exc:
        raise InputError(str(exc)) from None


# ---------------------------------------------------------------- ground sets


def _ground(args) -> semigroup.GroundSet:
    if args.sites:
        return formats.sites_from_csv(_read_text(args.sites))
    if args.m is None:
        raise InputError("give --m or --sites")
    return semigroup.GroundSet.of_size(args.m)


def _model_ecf(args) -> tuple[EcfTable, dict]:
    model = args.model
    extra: dict = {}
    if model in ("independent", "identical", "sqrt"):
        fn = {"independent": models.independent_ecf, "identical": models.identical_ecf,
              "sqrt": models.sqrt_ecf}[model]
        return fn(_ground(args)), extra
    if model == "random":
        if args.m is None:
            raise InputError("--model random needs --m")
        return random_valid_ecf(args.m, args.q, args.seed), extra
    if model == "spectral":
        obj = _load(args.input[0] if args.input else None)
        if not isinstance(obj, DiscreteSpectralMeasure):
            raise InputError("--model spectral expects a spectral-measure CSV input")
        return ecf_from_spectral_measure(obj), extra
    if model == "m3box":
        g = _ground(args)
        if g.coords is None:
            raise InputError("--model m3box needs --sites with coordinates")
        d = g.coords.shape[1]
        lower = _floats(args.box_lower, "box-lower") if args.box_lower else [0.0] * d
        upper = _floats(args.box_upper, "box-upper") if args.box_upper else [lo + 1.0 for lo in lower]
        return models.m3_box_ecf(g, models.BoxKernel(tuple(lower), tuple(upper))), extra
    if model == "br":
        if args.gamma is not None and args.sites is None:
            # two sites at unit distance, so gamma(s - t) = lambda = gamma
            g = semigroup.GroundSet(("0", "1"), np.array([[0.0], [1.0]]))
            v = models.VariogramSpec(args.gamma, args.alpha)
        else:
            g = _ground(args)
            if g.coords is None:
                raise InputError("--model br needs --sites with coordinates")
            v = models.VariogramSpec(args.lam, args.alpha)
        est = models.br_ecf_mc(g, v, args.n, args.seed, args.threads)
        extra = {
            "raw": {formats.subset_key(g, s): float(est.raw[s]) for s in range(1, 1 << g.size)},
            "se": {formats.subset_key(g, s): float(est.se[s]) for s in range(1, 1 << g.size)},
            "n": est.n,
            "seed": est.seed,
        }
        return est.ecf, extra
    raise InputError(f"unknown model {model!r}")


# ---------------------------------------------------------------- subcommands


def cmd_ecf(args) -> None:
    if args.model is None:
        raise InputError("ecf needs --model")
    ecf, extra = _model_ecf(args)
    _write_text(args.output, formats.dumps(formats.ecf_to_json(ecf, extra)))


def cmd_validate(args) -> None:
    ecf = _load_ecf(_single_input(args))
    report = validate_ecf(ecf, args.tol)
    payload = report.to_json(ecf.ground)
    if not report.passed:
        raise ValidationFailure(payload)
    _write_text(args.output, formats.dumps(payload))


def cmd_tau(args) -> None:
    obj = _load(_single_input(args))
    if isinstance(obj, TauTable):
        tau = obj
    else:
        ecf = obj if isinstance(obj, EcfTable) else ecf_from_spectral_measure(obj)
        tau = compute_tau(ecf)
    if args.marginal:
        tau = marginalize_tau(tau, _labels_of(tau.ground, args.marginal))
    _write_text(args.output, formats.dumps(formats.tau_to_json(tau)))


def cmd_simulate(args) -> None:
    obj = _load(_single_input(args)) if args.model is None else _model_ecf(args)[0]
    if isinstance(obj, DiscreteSpectralMeasure):
        batch = tm.simulate_maxlinear(obj, args.n, args.seed, args.threads)
    else:
        p = tm.TmProcess.from_tau(obj) if isinstance(obj, TauTable) else tm.tm_from_ecf(obj, args.tol)
        batch = tm.simulate_tm(p, args.n, args.seed, args.threads)
    _write_text(args.output, batch.to_csv())
    if args.output not in (None, "-"):
        _write_text(args.output + ".meta.json", tm.batch_metadata_json(batch))


def cmd_estimate(args) -> None:
    path = _single_input(args)
    meta = None
    if path not in (None, "-") and os.path.exists(path + ".meta.json"):
        meta = json.loads(_read_text(path + ".meta.json"))
    batch = tm.SampleBatch.from_csv(_read_text(path), meta)
    g = semigroup.GroundSet(batch.labels)
    table = tm.empirical_ecf_table(batch, args.max_subset_size)
    out = {
        "labels": list(g.labels),
        "n": batch.n,
        "theta": {formats.subset_key(g, s): v[0] for s, v in table.items()},
        "se": {formats.subset_key(g, s): v[1] for s, v in table.items()},
    }
    _write_text(args.output, formats.dumps(out))


def cmd_transform(args) -> None:
    inputs = args.input or [None]
    if args.alpha_combine is not None:
        if len(inputs) != 2:
            raise InputError("--alpha-combine needs exactly two --input tables")
        e1, e2 = (_load_ecf(p) for p in inputs)
        out = transforms.convex_combine(e1, e2, args.alpha_combine, args.tol)
    elif args.bernstein:
        if len(inputs) != 1:
            raise InputError("--bernstein takes one --input table")
        out = transforms.bernstein_transform_ecf(
            _load_ecf(inputs[0]), _bernstein(args.bernstein), args.tol
        )
    else:
        raise InputError("transform needs --bernstein or --alpha-combine")
    _write_text(args.output, formats.dumps(formats.ecf_to_json(out)))


def _bernstein(text: str) -> transforms.BernsteinFunction:
    try:
        if text.lstrip().startswith("{"):
            return transforms.BernsteinFunction.from_json(json.loads(text))
        return transforms.BernsteinFunction.parse(text)
    except (ValueError, KeyError) as exc:
        raise InputError(str(exc)) from None


def cmd_depset(args) -> None:
    ecf = _model_ecf(args)[0] if args.model else _load_ecf(_single_input(args))
    if ecf.m > depset.MAX_VERTEX_SITES:
        raise InputError(f"vertex enumeration supports at most {depset.MAX_VERTEX_SITES} sites")
    poly = depset.dependency_polytope(ecf, args.method or "auto")
    grid = depset.simplex_grid(ecf.m, args.grid) if args.grid > 0 else None
    _write_text(args.output, depset.polytope_json(poly, grid))
    if args.vertices_csv:
        _write_text(args.vertices_csv, poly.vertices_csv())


def cmd_bound(args) -> None:
    if args.x is None:
        raise InputError("bound needs --x")
    x = _floats(args.x, "x")
    if args.eta:
        etas = _floats(args.eta, "eta")
        if len(etas) != 3 or len(x) != 3:
            raise InputError("--eta needs eta_rs,eta_st,eta_rt and --x needs three coordinates")
        logb = depset.trivariate_log_bound_from_bivariate(*etas, x)
        out = {"kind": "trivariate-from-bivariate", "eta": etas, "x": x}
    else:
        ecf = _load_ecf(_single_input(args))
        if len(x) != ecf.m:
            raise InputError(f"--x needs {ecf.m} coordinates")
        logb = depset.fdd_lower_log_bound(ecf, x)
        out = {"kind": "tawn-molchanov", "labels": list(ecf.ground.labels), "x": x}
    out.update(log_bound=logb, bound=math.exp(logb))
    _write_text(args.output, formats.dumps(out))


def run_checks(ecf: EcfTable, tol: float, max_triangle_sites: int = 6, grid: int = 4) -> list[dict]:
    """Property suites on one table: name, passed, detail."""
    results = []

    def add(name, passed, **detail):
        results.append({"name": name, "passed": bool(passed), **detail})

    report = validate_ecf(ecf, tol)
    add("validate", report.passed, min_tau=report.min_tau)
    direct = semigroup.check_completely_alternating_direct(ecf.as_set_function(), tol=tol) \
        if report.tau is not None else None
    if direct is not None:
        add("alternation-agrees", direct.passed == report.passed, direct=direct.passed)
    if not report.passed:
        return results
    tau = report.tau
    back = ecf_from_tau(tau, check=False)
    add("tau-roundtrip", np.abs(back.theta - ecf.theta).max() <= 1e-12,
        max_error=float(np.abs(back.theta - ecf.theta).max()))
    add("row-sums", np.abs(tau.row_sums() - 1).max() <= 1e-12,
        max_error=float(np.abs(tau.row_sums() - 1).max()))
    worst = 0.0
    for a in range(1, 1 << ecf.m):
        sub = compute_tau(ecf.restrict(a)).tau
        worst = max(worst, float(np.abs(sub - marginalize_tau(tau, a).tau).max()))
    add("marginal-consistency", worst <= 1e-12, max_error=worst)
    if ecf.m <= max_triangle_sites:
        for g in (transforms.BernsteinFunction.log1p(), transforms.BernsteinFunction.power(0.5),
                  transforms.BernsteinFunction.negpower(-1.0)):
            r = transforms.triangle_sweep(ecf, g)
            add(f"triangle[{g.kind}:{g.alpha}]", r.passed, slack=r.slack)
    if ecf.m <= depset.EXHAUSTIVE_AUTO_MAX:
        poly = depset.dependency_polytope(ecf)
        p = tm.TmProcess(tau, ecf)
        err = max(abs(depset.support_function(poly, x) - tm.stable_tail_dependence(p, x))
                  for x in depset.simplex_grid(ecf.m, grid))
        add("polytope-support", err <= 1e-9, max_error=err, vertices=len(poly.vertices))
    return results


def cmd_check(args) -> None:
    ecf = _model_ecf(args)[0] if args.model else _load_ecf(_single_input(args))
    results = run_checks(ecf, args.tol, grid=args.grid)
    payload = {"labels": list(ecf.ground.labels), "passed": all(r["passed"] for r in results),
               "checks": results}
    if not payload["passed"]:
        raise ValidationFailure(payload)
    _write_text(args.output, formats.dumps(payload))


def _single_input(args) -> str | None:
    if not args.input:
        return None
    if len(args.input) > 1:
        raise InputError(f"{args.command} takes a single --input")
    return args.input[0]


COMMANDS = {
    "validate": cmd_validate,
    "tau": cmd_tau,
    "ecf": cmd_ecf,
    "simulate": cmd_simulate,
    "estimate": cmd_estimate,
    "transform": cmd_transform,
    "depset": cmd_depset,
    "bound": cmd_bound,
    "check": cmd_check,
}


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input", action="append", help="input file ('-' for stdin); repeat for two tables")
    common.add_argument("--output", help="output file (default stdout)")
    common.add_argument("--config", help="JSON file of option defaults; flags override it")
    common.add_argument("--seed", type=int)
    common.add_argument("--n", type=int, help="sample size")
    common.add_argument("--model", help="independent|identical|sqrt|random|spectral|m3box|br")
    common.add_argument("--m", type=int, help="number of sites for coordinate-free models")
    common.add_argument("--q", type=int, help="atoms of --model random")
    common.add_argument("--sites", help="CSV of site coordinates 'label,x1,...,xd'")
    common.add_argument("--gamma", type=float, help="variogram value for a two-site Brown-Resnick model")
    common.add_argument("--lambda", dest="lam", type=float, help="variogram scale")
    common.add_argument("--alpha", type=float, help="variogram exponent")
    common.add_argument("--box-lower", help="M3 box lower corner, comma separated")
    common.add_argument("--box-upper", help="M3 box upper corner, comma separated")
    common.add_argument("--bernstein", help="log1p | pow:a | negpow:a | affine:c,b | mix:c,b,[w:l,...] | JSON")
    common.add_argument("--alpha-combine", type=float)
    common.add_argument("--tol", type=float)
    common.add_argument("--threads", type=int, help=f"worker threads (env {rng.THREADS_ENV})")
    common.add_argument("--max-subset-size", type=int)
    common.add_argument("--marginal", help="comma-separated labels to marginalize onto")
    common.add_argument("--x", help="comma-separated c.d.f. argument")
    common.add_argument("--eta", help="eta_rs,eta_st,eta_rt for the trivariate bound")
    common.add_argument("--grid", type=int, help="simplex grid resolution for support values")
    common.add_argument("--method", help="vertex enumeration: auto|exhaustive|greedy")
    common.add_argument("--vertices-csv", help="also write the polytope vertices as CSV")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="ecf-toolkit", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__} ({kernels.BACKEND} kernels)")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def _apply_config(args) -> None:
    config = {}
    if args.config:
        try:
            config = json.loads(_read_text(args.config))
        except json.JSONDecodeError as exc:
            raise InputError(f"malformed config: {exc}") from None
        if not isinstance(config, dict):
            raise InputError("config must be a JSON object")
    aliases = {"lambda": "lam"}
    for key, value in config.items():
        attr = aliases.get(key, key.replace("-", "_"))
        if not hasattr(args, attr):
            raise InputError(f"unknown config key {key!r}")
        if getattr(args, attr) is None:
            setattr(args, attr, value if attr != "input" or isinstance(value, list) else [value])
    for key, value in DEFAULTS.items():
        attr = aliases.get(key, key)
        if getattr(args, attr) is None:
            setattr(args, attr, value)
    args.threads = rng.resolve_threads(args.threads)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        _apply_config(args)
        COMMANDS[args.command](args)
    except ValidationFailure as exc:
        sys.stdout.write(formats.dumps(exc.payload))
        return EXIT_INVALID
    except InvalidEcfError as exc:
        sys.stdout.write(formats.dumps({"valid": False, "error": str(exc),
                                        "diagnostics": [d.message for d in exc.report.diagnostics]}))
        return EXIT_INVALID
    except NormalizationError as exc:
        sys.stdout.write(formats.dumps({"valid": False, "error": str(exc)}))
        return EXIT_INVALID
    except (InputError, ValueError, KeyError) as exc:
        print(f"ecf-toolkit: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
