"""The standard instance suite and the constant calibration sweep."""
import os
import warnings
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from .bodies import Box, CrossPolytope, Ellipsoid, SymmetricHPolytope, apply_transform
from .errors import AttemptsExhaustedError
from .gaussian import corollary_constant
from .lattice import Lattice
from .slicing import FinderConfig, prepare, randomized_finder, recommend_s, threshold_p, verify_bound

SUITE_SEED = 20150101


def _rotation(rng, d):
    q, r = np.linalg.qr(rng.normal(size=(d, d)))
    return q * np.sign(np.diag(r))


def _ball(d, r):
    return Ellipsoid(np.eye(d) / r**2)


def _random_ellipsoid(rng, d, lo, hi):
    q = _rotation(rng, d)
    axes = rng.uniform(lo, hi, size=d)
    return Ellipsoid(q @ np.diag(1 / axes**2) @ q.T)


def _random_hpolytope(rng, d, m):
    # offsets large enough that every +-e_j is inside, so K ∩ Z^d is full rank
    normals = rng.normal(size=(m, d))
    offsets = np.abs(normals).max(axis=1) * rng.uniform(1.0, 1.6, size=m)
    return SymmetricHPolytope(normals, offsets)


def standard_suite():
    """Non-degenerate (body_id, body) pairs over Z^d, d in 2..6."""
    rng = np.random.default_rng(SUITE_SEED)
    out = []
    for d in range(2, 7):
        out.append((f"cube_d{d}", Box(np.ones(d))))
        out.append((f"cross_d{d}", CrossPolytope(np.ones(d))))
    for d, r in ((2, 1.5), (3, 2.0), (4, 1.5), (5, 1.3), (6, 1.1)):
        out.append((f"ball_d{d}_r{r}", _ball(d, r)))
    out.append(("box_d2_3x1.5", Box([3.0, 1.5])))
    out.append(("box_d3_2x1x1", Box([2.0, 1.0, 1.0])))
    out.append(("box_d4_1.5x1x1x1", Box([1.5, 1.0, 1.0, 1.0])))
    out.append(("cube_d3_h3", Box(np.full(3, 3.0))))
    for d in (2, 3, 4):
        out.append((f"ellipsoid_d{d}", _random_ellipsoid(rng, d, 1.0, 2.5)))
    for d in (2, 3, 4):
        out.append((f"hpoly_d{d}", _random_hpolytope(rng, d, d + 2)))
    out.append(("rotbox_d3", apply_transform(Box([1.5, 1.5, 1.5]), _rotation(rng, 3))))
    return out


def degenerate_suite():
    """Bodies whose lattice points span a proper subspace; most have vol < d^-d."""
    return [
        ("tiny_cube_d3", Box(np.full(3, 0.1))),
        ("sliver_box_d2", Box([1.0, 0.05])),
        ("tiny_cross_d4", CrossPolytope(np.full(4, 0.2))),
        ("needle_ellipsoid_d3", Ellipsoid(np.diag([1 / 1.2**2, 1 / 0.1**2, 1 / 0.1**2]))),
    ]


def _threads():
    env = os.environ.get("LATSLICE_THREADS")
    return max(1, int(env)) if env else (os.cpu_count() or 1)


def _verify_one(args):
    idx, body_id, body, seed, cfg = args
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        return verify_bound(Lattice.integer(body.dim), body, cfg,
                            np.random.default_rng(seed + idx), body_id=body_id)


def run_suite(seed, cfg=None, bodies=None, threads=None):
    """BoundReports for every body, in suite order; body i uses seed + i."""
    cfg = cfg or FinderConfig(seed=seed)
    bodies = standard_suite() + degenerate_suite() if bodies is None else bodies
    jobs = [(i, bid, b, seed, cfg) for i, (bid, b) in enumerate(bodies)]
    workers = min(threads or _threads(), len(jobs))
    if workers <= 1:
        return [_verify_one(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_verify_one, jobs))


def calibrate(seed, small_c_grid=(0.1, 0.25, 0.5, 0.75, 1.0), big_C_grid=(1.0, 1.5, 2.0, 3.0, 4.0),
              bodies=None, max_attempts=None):
    """Sweep (small_c, big_C) and record where the randomized finder always succeeds."""
    bodies = standard_suite() if bodies is None else bodies
    prepared = []
    for i, (bid, body) in enumerate(bodies):
        rng = np.random.default_rng(seed + i)
        prepared.append((bid, prepare(Lattice.integer(body.dim), body, rng)))
    grid = []
    for c in small_c_grid:
        for big in big_C_grid:
            cfg = FinderConfig(big_C=big, small_c=c, max_attempts=max_attempts, seed=seed)
            failures, attempts = [], []
            for i, (bid, inst) in enumerate(prepared):
                with warnings.catch_warnings():
                    warnings.simplefilter("ignore", RuntimeWarning)
                    try:
                        res = randomized_finder(inst.lattice, inst.body, cfg,
                                                np.random.default_rng(seed + i), instance=inst)
                        attempts.append(res.attempts)
                    except AttemptsExhaustedError:
                        failures.append(bid)
            grid.append({"small_c": c, "big_C": big, "all_succeeded": not failures,
                         "failures": failures,
                         "max_attempts_used": max(attempts) if attempts else None})
    default = FinderConfig()
    ok_c = [g["small_c"] for g in grid if g["big_C"] == default.big_C and g["all_succeeded"]]
    ok_big = [g["big_C"] for g in grid if g["small_c"] == default.small_c and g["all_succeeded"]]
    inf, at = corollary_constant()
    return {
        "instances": [bid for bid, _ in prepared],
        "grid": grid,
        "largest_small_c_at_default_big_C": max(ok_c) if ok_c else None,
        "smallest_big_C_at_default_small_c": min(ok_big) if ok_big else None,
        "orthogonality_constant_infimum": inf,
        "orthogonality_constant_argmin": at,
        "zero_guard_holds": {
            bid: bool(recommend_zero_guard(inst, default)) for bid, inst in prepared},
    }


def recommend_zero_guard(inst, cfg):
    """Whether s^-d det(L*) < p/2 for this instance and constants."""
    d = inst.lattice.dim
    s = recommend_s(inst.body, cfg.big_C, vol=inst.vol)
    p = threshold_p(inst.radius, s, cfg.small_c)
    return s ** (-d) / inst.lattice.det_abs < p / 2

