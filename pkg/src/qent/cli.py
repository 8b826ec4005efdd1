"""Command-line front end.

Commands read density matrices in the matrix JSON format
(``{"dim": n, "re": [...], "im": [...]}``, row-major) and write JSON reports or
CSV. Exit codes: 0 ok, 2 invalid input, 3 unsupported (near-pure) state,
4 verification failure. Errors are reported as JSON on standard error.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import __version__
from .entropy import (concavity_slack, quantum_shannon, random_density_matrix,
                      smooth, sweep_to_csv, sweep_two_state)
from .errors import NearPure, QentError
from .dexp import hessian_logZ
from .montecarlo import (SamplerConfig, estimate_density_matrix, estimate_entropy,
                         estimate_logZ, stream_generator)
from .solver import solve_lambda
from .spectral import eigh, matrix_from_json, validate_density

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_UNSUPPORTED = 3
EXIT_VERIFY = 4

DEFAULT_SEED = 42
DEFAULT_SAMPLES = 100_000
CONCAVITY_SLACK = -1e-9


class CliError(Exception):
    def __init__(self, code, kind, message):
        self.code = code
        self.kind = kind
        super().__init__(message)


def _num(x):
    """Round to 12 significant digits for output."""
    if isinstance(x, (list, tuple, np.ndarray)):
        return [_num(v) for v in x]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    x = float(x)
    if not math.isfinite(x):
        return None
    return float(f"{x:.12g}") + 0.0


def _emit(text: str, output: str) -> None:
    if output == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        with open(output, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def _emit_json(obj, output: str) -> None:
    _emit(json.dumps(obj, indent=2) + "\n", output)


def _read_matrix(path: str) -> np.ndarray:
    try:
        if path == "-":
            obj = json.load(sys.stdin)
        else:
            with open(path, encoding="utf-8") as fh:
                obj = json.load(fh)
    except OSError as exc:
        raise CliError(EXIT_INVALID, "InputError", f"cannot read {path}: {exc.strerror}")
    except json.JSONDecodeError as exc:
        raise CliError(EXIT_INVALID, "InputError", f"invalid JSON in {path}: {exc}")
    return matrix_from_json(obj)


def _load_state(args):
    a = _read_matrix(args.input)
    eps = getattr(args, "smooth", None)
    if eps is not None:
        if not 0.0 < eps < 1.0:
            raise CliError(EXIT_INVALID, "InvalidArgument", "--smooth must lie in (0, 1)")
        validate_density(a)
        a = smooth(a, eps)
    return validate_density(a)


def _env_int(name: str, flag, default: int) -> int:
    if flag is not None:
        return flag
    raw = os.environ.get(name)
    if raw is None or raw == "":
        return default
    try:
        return int(raw)
    except ValueError:
        raise CliError(EXIT_INVALID, "InvalidArgument", f"{name} must be an integer, got {raw!r}")


# --------------------------------------------------------------------------
# Commands

def cmd_entropy(args) -> int:
    dm = _load_state(args)
    rep = quantum_shannon(dm, offset=args.offset)
    _emit_json({
        "dim": dm.dim,
        "eigenvalues": _num(rep.spectrum),
        "lambda": _num(rep.multiplier),
        "s_rho": _num(rep.s_rho_total),
        "s_vn": _num(rep.s_von_neumann),
        "difference": _num(rep.difference),
        "iterations": rep.iterations,
        "gradient_norm": _num(rep.gradient_norm),
        "offset": _num(rep.volume_offset),
    }, args.output)
    return EXIT_OK


def cmd_sweep(args) -> int:
    lo, hi, step = args.lambda_min, args.lambda_max, args.step
    if not all(map(math.isfinite, (lo, hi, step))) or step <= 0 or hi < lo:
        raise CliError(EXIT_INVALID, "InvalidGrid",
                       "need finite bounds, lambda_min <= lambda_max and step > 0")
    if max(abs(lo), abs(hi)) > 350:
        raise CliError(EXIT_INVALID, "InvalidGrid", "|lambda| must not exceed 350")
    rows = sweep_two_state(lo, hi, step, offset=args.offset)
    _emit(sweep_to_csv(rows), args.output)
    return EXIT_OK


def _check(name, analytic, est, stderr, k=3.0):
    ok = abs(est - analytic) <= k * stderr
    return {"quantity": name, "analytic": _num(analytic), "estimate": _num(est),
            "stderr": _num(stderr), "pass": bool(ok)}


def cmd_mc_check(args) -> int:
    seed = _env_int("QENT_SEED", args.seed, DEFAULT_SEED)
    samples = _env_int("QENT_SAMPLES", args.samples, DEFAULT_SAMPLES)
    try:
        config = SamplerConfig(seed=seed, samples=samples, streams=args.streams)
    except ValueError as exc:
        raise CliError(EXIT_INVALID, "InvalidArgument", str(exc))
    dm = _load_state(args)
    p = dm.probabilities
    sol = solve_lambda(p)
    lam = sol.multiplier
    lam_mc = lam.copy()
    if args.inject_mismatch and lam.size > 1:
        # negative control: sample from a different multiplier than the one solved
        lam_mc[0] -= 0.5
        lam_mc[-1] += 0.5

    checks = [_check("logZ", sol.log_partition, *_pair(estimate_logZ(lam_mc, config)))]
    rho_hat = estimate_density_matrix(lam_mc, config)
    for i in range(p.size):
        checks.append(_check(f"p[{i}]", p[i], rho_hat.mean[i, i].real, rho_hat.stderr[i, i].real))
    checks.append(_check("entropy", sol.entropy, *_pair(estimate_entropy(lam_mc, config))))

    passed = all(c["pass"] for c in checks)
    _emit_json({"dim": dm.dim, "seed": seed, "samples": samples, "streams": args.streams,
                "lambda": _num(lam), "checks": checks, "pass": passed}, args.output)
    if not passed:
        failed = [c["quantity"] for c in checks if not c["pass"]]
        raise CliError(EXIT_VERIFY, "VerificationFailed",
                       f"Monte Carlo disagrees beyond 3 stderr for: {', '.join(failed)}")
    return EXIT_OK


def _pair(est):
    return est.mean, est.stderr


def cmd_concavity(args) -> int:
    if args.dim < 2:
        raise CliError(EXIT_INVALID, "InvalidArgument", "--dim must be at least 2")
    if args.trials < 1:
        raise CliError(EXIT_INVALID, "InvalidArgument", "--trials must be positive")
    seed = _env_int("QENT_SEED", args.seed, DEFAULT_SEED)
    rng = stream_generator(seed)
    slacks = []
    for _ in range(args.trials):
        k = int(rng.integers(2, 5))
        states = [random_density_matrix(args.dim, rng) for _ in range(k)]
        weights = rng.dirichlet(np.ones(k))
        slacks.append(concavity_slack(states, weights))
    slacks = np.array(slacks)
    violations = int(np.sum(slacks < CONCAVITY_SLACK))
    _emit_json({"dim": args.dim, "trials": args.trials, "seed": seed,
                "min_slack": _num(slacks.min()), "violations": violations,
                "pass": violations == 0}, args.output)
    if violations:
        raise CliError(EXIT_VERIFY, "VerificationFailed",
                       f"{violations} concavity violations, min slack {slacks.min():.3e}")
    return EXIT_OK


def cmd_fisher(args) -> int:
    dm = _load_state(args)
    sol = solve_lambda(dm.probabilities)
    H = hessian_logZ(sol.multiplier)
    spec = eigh(H.astype(complex))
    _emit_json({
        "dim": dm.dim,
        "eigenvalues": _num(dm.probabilities),
        "lambda": _num(sol.multiplier),
        "matrix": [_num(row) for row in H],
        "metric_eigenvalues": _num(spec.eigenvalues),
        "null_residual": _num(np.max(np.abs(H @ np.ones(dm.dim)))),
    }, args.output)
    return EXIT_OK


# --------------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError(EXIT_INVALID, "UsageError", f"{self.prog}: {message}")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="qent", description="Maximum-entropy Shannon entropy of quantum states.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_output(p):
        p.add_argument("--output", "-o", default="-", help="output path, '-' for stdout")

    p = sub.add_parser("entropy", help="entropy report for a density matrix")
    p.add_argument("--input", "-i", required=True, help="matrix JSON path, '-' for stdin")
    p.add_argument("--offset", type=float, default=0.0,
                   help="additive volume-convention constant for s_rho")
    p.add_argument("--smooth", type=float, default=None, metavar="EPS",
                   help="mix with the maximally mixed state before solving")
    add_output(p)
    p.set_defaults(func=cmd_entropy)

    p = sub.add_parser("sweep", help="two-state entropy derivatives as CSV")
    p.add_argument("--lambda-min", type=float, default=-10.0)
    p.add_argument("--lambda-max", type=float, default=10.0)
    p.add_argument("--step", type=float, default=0.05)
    p.add_argument("--offset", type=float, default=0.0)
    add_output(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("mc-check", help="compare analytic values with Monte Carlo")
    p.add_argument("--input", "-i", required=True)
    p.add_argument("--seed", type=int, default=None, help="default: $QENT_SEED or 42")
    p.add_argument("--samples", type=int, default=None, help="default: $QENT_SAMPLES or 100000")
    p.add_argument("--streams", type=int, default=1)
    p.add_argument("--smooth", type=float, default=None, metavar="EPS")
    p.add_argument("--inject-mismatch", action="store_true",
                   help="test mode: sample from a perturbed multiplier (must fail)")
    add_output(p)
    p.set_defaults(func=cmd_mc_check)

    p = sub.add_parser("concavity", help="random mixture concavity checks")
    p.add_argument("--dim", type=int, default=2)
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--seed", type=int, default=None)
    add_output(p)
    p.set_defaults(func=cmd_concavity)

    p = sub.add_parser("fisher", help="Fisher-Rao metric at the solved multiplier")
    p.add_argument("--input", "-i", required=True)
    p.add_argument("--smooth", type=float, default=None, metavar="EPS")
    add_output(p)
    p.set_defaults(func=cmd_fisher)
    return parser


def _fail(code: int, kind: str, message: str) -> int:
    sys.stderr.write(json.dumps({"error": kind, "message": message, "exit_code": code}) + "\n")
    return code


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:   # --help, --version
        return EXIT_OK if not exc.code else EXIT_INVALID
    except CliError as exc:
        return _fail(exc.code, exc.kind, str(exc))
    try:
        return args.func(args)
    except CliError as exc:
        return _fail(exc.code, exc.kind, str(exc))
    except NearPure as exc:
        return _fail(EXIT_UNSUPPORTED, "NearPure", str(exc))
    except QentError as exc:
        return _fail(EXIT_INVALID, type(exc).__name__, str(exc))
    except (ValueError, OSError) as exc:
        return _fail(EXIT_INVALID, type(exc).__name__, str(exc))


if __name__ == "__main__":
    sys.exit(main())
