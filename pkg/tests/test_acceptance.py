"""Quantitative acceptance checks, one test per criterion.

Each test appends a single ``PASS``/``FAIL`` line to ``RESULTS`` (printed in
the pytest terminal summary) before asserting.
"""
import math
import os
import subprocess
import sys
import time
from fractions import Fraction

import numpy as np
import pytest

from conftest import random_lattice
from latslice import (
    CrossPolytope,
    FinderConfig,
    Lattice,
    enumerate_in_body,
    grid_scan_oracle,
    orth_prob_lower_bound,
    poisson_check,
    prob_zero,
    shifted_theta,
    theta,
    verify_bound,
)
from latslice.gaussian import ExactSampler, klein_sample_coeffs, orthogonal_mass
from latslice.suite import degenerate_suite, run_suite, standard_suite
from test_enumeration import _random_body

RESULTS = []
SEED = 20240601
WIDTHS = (0.5, 1.0, 2.0)


def report(n, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'} criterion {n}: {detail}"
    RESULTS.append(line)
    print(line)
    return ok


@pytest.fixture(scope="module")
def lattices():
    rng = np.random.default_rng(SEED)
    return [random_lattice(rng, d) for d in range(1, 6) for _ in range(10)]


def test_1_poisson_summation(lattices):
    start = time.perf_counter()
    worst = max(poisson_check(lat, s) for lat in lattices for s in WIDTHS)
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-9 and elapsed < 60
    report(1, ok, f"max residual {worst:.2e} <= 1e-9 over {len(lattices)} lattices x "
                  f"{len(WIDTHS)} widths, {elapsed:.1f}s < 60s")
    assert ok


def test_2_prob_zero_bound(lattices):
    worst = max(prob_zero(lat, s) / (lat.det_abs * s ** (-lat.dim))
                for lat in lattices for s in WIDTHS)
    ok = worst <= 1 + 1e-9
    report(2, ok, f"max prob_zero / (det s^-d) = {worst:.6f} <= 1 + 1e-9")
    assert ok


def test_3_shifted_theta(lattices):
    rng = np.random.default_rng(SEED + 3)
    worst = 0.0
    for lat in lattices:
        for s in WIDTHS:
            th = theta(lat, s).value
            for shift in rng.normal(size=(100 // len(WIDTHS) + 1, lat.dim)) * 2:
                worst = max(worst, shifted_theta(lat, shift, s) / th)
    ok = worst <= 1 + 1e-9
    report(3, ok, f"max shifted/unshifted theta = {worst:.6f} <= 1 + 1e-9 "
                  f"(102 shifts per lattice)")
    assert ok


def test_4_orthogonal_layer_mass():
    rng = np.random.default_rng(SEED + 4)
    worst = math.inf
    for i in range(20):
        d = 2 + i % 3
        lat = random_lattice(rng, d)
        a = rng.integers(-2, 3, size=d)
        if not a.any():
            a[0] = 1
        s = float(rng.uniform(0.5, 2.0))
        x_norm = float(np.linalg.norm(lat.points(a)))
        bound, _ = orth_prob_lower_bound(x_norm, s)
        worst = min(worst, orthogonal_mass(lat, a, s) - bound)
    ok = worst >= -1e-9
    report(4, ok, f"min (orthogonal mass - 1/rho_(s|x|)(Z)) = {worst:.3e} >= -1e-9 "
                  "over 20 triples")
    assert ok


def _binned(coeffs, index, n_bins):
    keys = [index.get(tuple(c), n_bins) for c in coeffs.tolist()]
    return np.bincount(keys, minlength=n_bins + 1) / len(keys)


def test_5_sampler_validity():
    rng = np.random.default_rng(SEED + 5)
    n = 100_000
    instances = [Lattice.integer(3),
                 Lattice(np.eye(3) + 0.25 * rng.normal(size=(3, 3))),
                 Lattice(np.eye(2) + 0.25 * rng.normal(size=(2, 2)))]
    worst_tv, worst_z = 0.0, 0.0
    for lat in instances:
        s = 2 * float(lat.gram_schmidt_norms.max())
        exact = ExactSampler(lat, s)
        # bins: support points of mass >= 1e-4, plus one bin for the tail
        probs = np.diff(np.concatenate([[0.0], exact.cdf]))
        heavy = exact.coeffs[probs >= 1e-4]
        index = {tuple(c): i for i, c in enumerate(heavy.tolist())}
        a = exact.sample_coeffs(rng, n)
        b = klein_sample_coeffs(lat, s, rng, n)
        tv = 0.5 * np.abs(_binned(a, index, len(heavy)) - _binned(b, index, len(heavy))).sum()
        worst_tv = max(worst_tv, tv)
        p0 = prob_zero(lat, s)
        sigma = math.sqrt(p0 * (1 - p0) / n)
        for sample in (a, b):
            freq = np.mean(np.all(sample == 0, axis=1))
            worst_z = max(worst_z, abs(freq - p0) / sigma)
    ok = worst_tv <= 0.03 and worst_z <= 3
    report(5, ok, f"max TV(exact, klein) = {worst_tv:.4f} <= 0.03, "
                  f"max zero-frequency deviation {worst_z:.2f} sigma <= 3")
    assert ok


def test_6_oracle_equivalence():
    rng = np.random.default_rng(SEED + 6)
    mismatches = 0
    sizes = []
    for i in range(100):
        d = 1 + i % 4
        lat = random_lattice(rng, d, max_cond=30)
        body = _random_body(rng, d)
        a = enumerate_in_body(lat, body)
        b = grid_scan_oracle(lat, body)
        sizes.append(len(a))
        mismatches += not np.array_equal(a.coeffs, b.coeffs)
    ok = mismatches == 0
    report(6, ok, f"{100 - mismatches}/100 pairs equal (d <= 4, "
                  f"{min(sizes)}..{max(sizes)} points)")
    assert ok


def test_7_cross_polytope_tightness():
    exact_ok = True
    scaled = []
    for d in range(2, 7):
        rep = verify_bound(Lattice.integer(d), CrossPolytope(np.ones(d)), FinderConfig(),
                           np.random.default_rng(SEED + d), body_id=f"cross_d{d}")
        exact_ok &= rep.best_ratio == Fraction(2 * d - 1, 2 * d + 1)
        want = (2 * d - 1) / (2 * d + 1) * (2**d / math.factorial(d)) ** (1 / d)
        exact_ok &= math.isclose(rep.implied_alpha_q1, want, rel_tol=1e-12)
        scaled.append(d * rep.implied_alpha_q1)
    band = max(scaled) / min(scaled)
    ok = exact_ok and band <= 2
    report(7, ok, f"ratios (2d-1)/(2d+1) exact for d=2..6: {exact_ok}; "
                  f"d*alpha in [{min(scaled):.4f}, {max(scaled):.4f}], band {band:.4f} <= 2")
    assert ok


def test_8_theorem_end_to_end():
    reports = run_suite(SEED, bodies=standard_suite())
    dims = {r.d for r in reports}
    failures = []
    for r in reports:
        if r.degenerate:
            continue
        if r.ratio_randomized is None or r.ratio_randomized < Fraction(r.p_threshold) / 2:
            failures.append(f"{r.body_id}: randomized below p/2")
        if r.best_ratio < r.ratio_randomized:
            failures.append(f"{r.body_id}: best below randomized")
    inf_c = min(r.implied_c_theorem for r in reports if r.implied_c_theorem is not None)
    ok = len(reports) >= 20 and dims == set(range(2, 7)) and not failures and inf_c > 0.1
    report(8, ok, f"{len(reports)} bodies, d in {sorted(dims)}, "
                  f"{len(failures)} finder failures, inf implied_c_theorem = {inf_c:.4f} > 0.1")
    assert ok, failures


def test_9_degenerate_branch():
    checked = small = 0
    ok = True
    for i, (bid, body) in enumerate(degenerate_suite()):
        d = body.dim
        lat = Lattice.integer(d)
        rep = verify_bound(lat, body, FinderConfig(), np.random.default_rng(SEED + i),
                           body_id=bid)
        ps = enumerate_in_body(lat, body)
        k = np.array(rep.best_normal, dtype=np.int64)
        ok &= rep.degenerate and rep.best_ratio == 1 and rep.best_method == "degenerate"
        ok &= bool(k.any()) and bool(np.all(ps.coeffs @ k == 0))
        small += rep.vol < d ** (-d)
        checked += 1
    ok = ok and small >= 3
    report(9, ok, f"{checked} rank-deficient bodies ({small} with vol < d^-d) give ratio 1 "
                  "with <x, y> = 0 for every enumerated x")
    assert ok


def test_10_reproducibility(tmp_path):
    cmd = [sys.executable, "-m", "latslice", "suite", "--seed", "7"]
    outs = []
    for threads in ("1", str(os.cpu_count() or 1)):
        env = dict(os.environ, LATSLICE_THREADS=threads)
        outs.append(subprocess.run(cmd, capture_output=True, check=True, env=env).stdout)
    ok = outs[0] == outs[1] and len(outs[0]) > 0
    report(10, ok, f"suite --seed 7 twice: byte-identical ({len(outs[0])} bytes)")
    assert ok
