import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_lattice
from latslice import _kernels

needs_compiled = pytest.mark.skipif(_kernels.compiled is None, reason="extension not built")
BACKENDS = [_kernels.fallback] + ([_kernels.compiled] if _kernels.compiled else [])


def brute_ball(lat, center, r2):
    d = lat.dim
    # |c_i - center_i| <= r |b*_i| for every point of the ball
    m = np.ceil(np.sqrt(r2) * np.linalg.norm(np.linalg.inv(lat.basis), axis=0)).astype(int) + 1
    axes = [np.arange(-mi, mi + 1) for mi in m]
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), -1).reshape(-1, d)
    x = (grid - center) @ lat.basis
    q = np.sum(x * x, axis=1)
    return {tuple(g) for g in grid[q <= r2 * (1 + 1e-12)].tolist()}


@pytest.mark.parametrize("backend", BACKENDS)
@settings(max_examples=30, deadline=None)
@given(st.integers(1, 4), st.floats(0.3, 3.0), st.integers(0, 2**32 - 1))
def test_enumerate_matches_bruteforce(backend, d, r, seed):
    rng = np.random.default_rng(seed)
    lat = random_lattice(rng, d, max_cond=30)
    center = rng.uniform(-0.5, 0.5, size=d)
    coeffs, q = backend.fp_enumerate(lat.mu, lat.gram_schmidt_norms**2, center, r * r, 10**6)
    got = {tuple(c) for c in coeffs.tolist()}
    want = brute_ball(lat, center, r * r)
    # the kernel may include boundary points within its widening epsilon
    assert want <= got
    x = (coeffs - center) @ lat.basis
    assert np.allclose(q, np.sum(x * x, axis=1))


@needs_compiled
@settings(max_examples=30, deadline=None)
@given(st.integers(1, 5), st.floats(0.5, 3.0), st.integers(0, 2**32 - 1))
def test_backends_agree(d, r, seed):
    rng = np.random.default_rng(seed)
    lat = random_lattice(rng, d)
    center = rng.uniform(-0.5, 0.5, size=d)
    args = (lat.mu, lat.gram_schmidt_norms**2, center, r * r, 10**6)
    ca, qa = _kernels.fallback.fp_enumerate(*args)
    cb, qb = _kernels.compiled.fp_enumerate(*args)
    assert np.array_equal(ca, cb)
    assert np.allclose(qa, qb, rtol=1e-12, atol=1e-12)
    bounds = np.array([r * r / 4, r * r])
    sa, na = _kernels.fallback.fp_shell_sums(lat.mu, lat.gram_schmidt_norms**2, center,
                                             bounds, 1.3, 10**6)
    sb, nb = _kernels.compiled.fp_shell_sums(lat.mu, lat.gram_schmidt_norms**2, center,
                                             bounds, 1.3, 10**6)
    assert np.array_equal(na, nb)
    assert np.allclose(sa, sb, rtol=1e-12, atol=1e-300)
    ks = rng.integers(-2, 3, size=(7, d))
    assert np.array_equal(_kernels.fallback.count_orthogonal(ca, ks),
                          _kernels.compiled.count_orthogonal(ca, ks))


@pytest.mark.parametrize("backend", BACKENDS)
def test_shell_sums(backend):
    lat = random_lattice(np.random.default_rng(5), 3)
    b2 = lat.gram_schmidt_norms**2
    bounds = np.array([1.0, 4.0, 9.0])
    sums, counts = backend.fp_shell_sums(lat.mu, b2, np.zeros(3), bounds, 0.7, 10**6)
    coeffs, q = backend.fp_enumerate(lat.mu, b2, np.zeros(3), 9.0, 10**6)
    shell = np.searchsorted(bounds, q, side="left")
    for i in range(3):
        assert counts[i] == np.sum(shell == i)
        assert sums[i] == pytest.approx(np.exp(-0.7 * q[shell == i]).sum(), rel=1e-12)


@pytest.mark.parametrize("backend", BACKENDS)
def test_count_orthogonal(backend):
    pts = np.array([[0, 0], [1, 0], [0, 1], [1, 1], [-1, 1]], dtype=np.int64)
    ks = np.array([[1, 0], [1, 1], [1, -1]], dtype=np.int64)
    assert list(backend.count_orthogonal(pts, ks)) == [2, 2, 2]


def test_backend_selected():
    assert _kernels.BACKEND in ("cython", "python")
