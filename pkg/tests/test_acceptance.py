"""Acceptance criteria, one test per criterion.

Each test records a PASS/FAIL line, shown in the terminal summary (and on
stdout with ``-s``), then asserts.
"""
import csv
import io
import math
import time

import mpmath as mp
import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES, random_trace_free
from qent.cli import main
from qent.dexp import hessian_logZ, log_partition, moment_map
from qent.entropy import concavity_slack, quantum_shannon, random_density_matrix
from qent.montecarlo import (SamplerConfig, estimate_density_matrix, estimate_entropy,
                             estimate_expectation, estimate_logZ,
                             estimate_projector_covariance, linear_observable,
                             simplex_quadrature, stream_generator)
from qent.solver import solve_lambda
from qent.spectral import expectation_linear


def record(k, ok, detail):
    line = f"criterion {k}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def test_1_two_state_closed_form():
    start = time.perf_counter()
    deltas = np.concatenate([
        np.linspace(-20, 20, 801),
        np.logspace(-12, -3, 37), -np.logspace(-12, -3, 37), [0.0, 5e-4, -5e-4, 9.99e-4],
    ])
    offsets = stream_generator(1).uniform(-5, 5, deltas.size)
    worst = 0.0
    with mp.workdps(40):
        for d, lam2 in zip(deltas, offsets):
            lam1 = lam2 + d
            gap = mp.mpf(float(lam1)) - mp.mpf(float(lam2))
            ref = mp.mpf(1) / 2 if gap == 0 else 1 / gap + 1 / (1 - mp.exp(gap))
            got = moment_map([lam1, lam2])[0]
            worst = max(worst, abs(got - float(ref)) / float(ref))
    elapsed = time.perf_counter() - start
    record(1, worst <= 1e-8 and elapsed < 1.0,
           f"max rel err {worst:.2e} (tol 1e-8) over {deltas.size} gaps, {elapsed:.2f} s (< 1 s)")


def test_2_round_trip():
    rng = np.random.default_rng(2)
    start = time.perf_counter()
    worst = 0.0
    for _ in range(100):
        n = int(rng.integers(2, 9))
        lam = random_trace_free(n, rng, spread=20.0)
        worst = max(worst, float(np.max(np.abs(solve_lambda(moment_map(lam)).multiplier - lam))))
    elapsed = time.perf_counter() - start
    record(2, worst <= 1e-7 and elapsed < 10.0,
           f"max |lam - lam*| {worst:.2e} (tol 1e-7), {elapsed:.2f} s (< 10 s)")


def test_3_gauge_invariance():
    rng = np.random.default_rng(3)
    worst = dict(logZ=0.0, p=0.0, H=0.0, S=0.0)
    for _ in range(50):
        n = int(rng.integers(2, 9))
        lam = random_trace_free(n, rng) + rng.uniform(-3, 3)
        c = rng.uniform(-10, 10)
        worst["logZ"] = max(worst["logZ"], abs(log_partition(lam + c) - (log_partition(lam) - c)))
        p0, p1 = moment_map(lam), moment_map(lam + c)
        worst["p"] = max(worst["p"], float(np.max(np.abs(p1 - p0))))
        worst["H"] = max(worst["H"], float(np.max(np.abs(hessian_logZ(lam + c) - hessian_logZ(lam)))))
        s0 = lam @ p0 + log_partition(lam)
        s1 = (lam + c) @ p1 + log_partition(lam + c)
        worst["S"] = max(worst["S"], abs(s1 - s0))
    ok = max(worst.values()) <= 1e-12
    record(3, ok, "max deviation " + ", ".join(f"{k} {v:.1e}" for k, v in worst.items()) + " (tol 1e-12)")


def _second_differences(lam, h=1e-4):
    n = lam.size
    E = np.eye(n)
    f = log_partition
    return np.array([[(f(lam + h * (E[i] + E[j])) - f(lam + h * (E[i] - E[j]))
                       - f(lam - h * (E[i] - E[j])) + f(lam - h * (E[i] + E[j]))) / (4 * h * h)
                      for j in range(n)] for i in range(n)])


def test_4_hessian_identity():
    rng = np.random.default_rng(4)
    start = time.perf_counter()
    fd_worst = plain_worst = 0.0
    for n in (2, 3):
        for _ in range(20):
            lam = random_trace_free(n, rng, spread=20.0)
            H = hessian_logZ(lam)
            scale = np.max(np.abs(H))
            # the Hessian is gauge invariant; differencing where ln Z = 0 keeps
            # the function values small so their rounding stays below h^2 * 1e-6
            base = lam + log_partition(lam)
            fd_worst = max(fd_worst, float(np.max(np.abs(_second_differences(base) - H)) / scale))
            plain_worst = max(plain_worst, float(np.max(np.abs(_second_differences(lam) - H)) / scale))
    mc_ok = True
    zmax = 0.0
    for n, lam in ((2, np.array([-1.0, 1.0])), (3, np.array([-1.5, 0.5, 1.0]))):
        est = estimate_projector_covariance(lam, SamplerConfig(seed=40 + n, samples=1_000_000))
        H = hessian_logZ(lam)
        mc_ok &= bool(np.all(est.within(H)))
        zmax = max(zmax, float(np.max(np.abs(est.mean - H) / est.stderr)))
    elapsed = time.perf_counter() - start
    record(4, fd_worst <= 1e-6 and mc_ok and elapsed < 60.0,
           f"FD rel err {fd_worst:.2e} (tol 1e-6; {plain_worst:.1e} in the trace-free gauge); MC covariance max |z| {zmax:.2f} (<= 3); {elapsed:.1f} s (< 60 s)")


def test_5_concavity():
    start = time.perf_counter()
    rng = stream_generator(5)
    slacks = []
    for dim in (2, 3, 4):
        for _ in range(200):
            k = int(rng.integers(2, 5))
            states = [random_density_matrix(dim, rng) for _ in range(k)]
            slacks.append(concavity_slack(states, rng.dirichlet(np.ones(k))))
    elapsed = time.perf_counter() - start
    violations = sum(s < -1e-9 for s in slacks)
    record(5, violations == 0 and elapsed < 60.0,
           f"{violations} violations in {len(slacks)} mixtures, min slack {min(slacks):.3e}, {elapsed:.1f} s (< 60 s)")


def test_6_non_constancy():
    mixed = quantum_shannon(np.eye(2) / 2).difference
    skewed = quantum_shannon(np.diag([0.768658, 0.231342])).difference
    # cross-check the skewed value against the quadrature oracle
    lam = solve_lambda([0.768658, 0.231342]).multiplier
    logZ_q, p_q = simplex_quadrature(lam)
    s_q = float(lam @ p_q + logZ_q) - float(-(p_q * np.log(p_q)).sum())
    ok = (abs(mixed + 0.693147) <= 1e-6 and abs(skewed + 1.020236) <= 1e-4
          and abs(s_q - skewed) <= 1e-8 and abs(mixed - skewed) > 0.3)
    record(6, ok, f"diff(0.5,0.5) {mixed:.7f}, diff(0.768658,0.231342) {skewed:.7f} "
                  f"(quadrature {s_q:.7f}), gap {abs(mixed - skewed):.3f} (> 0.3)")


def test_7_sweep_shape(tmp_path, capsys):
    start = time.perf_counter()
    out = tmp_path / "sweep.csv"
    assert main(["sweep", "--lambda-min", "-10", "--lambda-max", "10", "--step", "0.05",
                 "--output", str(out)]) == 0
    rows = list(csv.DictReader(io.StringIO(out.read_text())))
    lam = np.array([float(r["lambda"]) for r in rows])
    ds_rho = np.array([float(r["ds_rho"]) for r in rows])
    ds_vn = np.array([float(r["ds_vn"]) for r in rows])
    odd = max(np.max(np.abs(ds_rho + ds_rho[::-1])), np.max(np.abs(ds_vn + ds_vn[::-1])))
    mid = int(np.flatnonzero(lam == 0.0)[0])
    at_zero = max(abs(ds_rho[mid]), abs(ds_vn[mid]))
    gap = np.abs(ds_rho - ds_vn)
    near = gap[np.isclose(np.abs(lam), 1.0)]
    far = gap[np.isclose(np.abs(lam), 10.0)]
    elapsed = time.perf_counter() - start
    ok = (len(rows) == 401 and odd <= 1e-8 and at_zero <= 1e-10
          and far.max() < near.min() and elapsed < 5.0)
    record(7, ok, f"{len(rows)} rows, odd-symmetry err {odd:.1e}, |ds| at 0 {at_zero:.1e}, "
                  f"|ds_rho-ds_vn| {near.min():.4f} at |lam|=1 vs {far.max():.4f} at |lam|=10, {elapsed:.2f} s (< 5 s)")


MC_SPECTRA = {2: [0.656518, 0.343482], 3: [0.6, 0.3, 0.1], 4: [0.4, 0.3, 0.2, 0.1]}


def test_8_monte_carlo_consistency():
    excursions = []
    checks = 0
    for n, p in MC_SPECTRA.items():
        sol = solve_lambda(p)
        lam = sol.multiplier
        p_lam = moment_map(lam)
        for seed in range(20):
            cfg = SamplerConfig(seed=seed, samples=50_000)
            rho = estimate_density_matrix(lam, cfg)
            results = [("logZ", estimate_logZ(lam, cfg).within(sol.log_partition)),
                       ("entropy", estimate_entropy(lam, cfg).within(sol.entropy))]
            results += [(f"p[{i}]", bool(ok)) for i, ok in
                        enumerate(np.abs(np.diag(rho.mean).real - p_lam) <= 3 * np.diag(rho.stderr).real)]
            checks += len(results)
            excursions += [f"n={n} seed={seed} {name}" for name, ok in results if not ok]
    rng = np.random.default_rng(8)
    G = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    F = G + G.conj().T
    lam3 = solve_lambda(MC_SPECTRA[3]).multiplier
    lin = estimate_expectation(linear_observable(F), lam3, SamplerConfig(seed=80, samples=200_000))
    trace = expectation_linear(F, np.diag(moment_map(lam3)))
    ok = len(excursions) <= 1 and lin.within(trace)
    record(8, ok, f"{len(excursions)} excursions in {checks} checks (<= 1) {excursions}; "
                  f"linear expectation {lin.mean:.5f} +- {lin.stderr:.5f} vs trace {trace:.5f}")


def test_9_oracle_equivalence():
    grid = [np.array([v]) for v in (-3.0, 0.0, 2.0)]
    grid += [np.array([a, -a]) for a in (-8.0, -2.5, -0.3, 0.0, 1e-4, 0.7, 3.0, 9.0)]
    grid += [np.array(v) for v in ([0.0, 1.0, 2.0], [-4.0, 1.0, 3.0], [0.0, 0.0, 1e-6], [5.0, -5.0, 0.0],
                                   [-7.0, 2.0, 5.0], [0.3, 0.3, -0.6], [1.0, -2.0, 1.0], [10.0, 0.0, -10.0],
                                   [-0.1, 0.05, 0.05])]
    assert len(grid) == 20
    worst = 0.0
    for lam in grid:
        logZ_q, p_q = simplex_quadrature(lam)
        worst = max(worst, abs(log_partition(lam) - logZ_q) / max(abs(logZ_q), 1e-300) if logZ_q else abs(log_partition(lam)),
                    float(np.max(np.abs(moment_map(lam) - p_q) / p_q)))
    record(9, worst <= 1e-8, f"max rel err {worst:.2e} (tol 1e-8) on {len(grid)} points")
