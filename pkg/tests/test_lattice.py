import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_lattice, random_unimodular
from latslice import Lattice, dual, gram_schmidt, integer_normal_of_span, lattice_equal
from latslice.errors import DimensionMismatchError, IllConditionedError, SingularBasisError
from latslice.lattice import (
    integer_kernel,
    integer_normal_coeffs,
    integer_rank,
    load_lattice,
    primitive,
    save_lattice,
)


def test_gram_schmidt_identity():
    ortho, norms = gram_schmidt(np.eye(3))
    assert np.allclose(ortho, np.eye(3))
    assert np.allclose(norms, 1)


def test_gram_schmidt_one_projection():
    ortho, norms = gram_schmidt([[1, 0], [1, 1]])
    assert np.allclose(ortho, [[1, 0], [0, 1]])
    assert np.allclose(norms, [1, 1])


def test_gram_schmidt_det(rng):
    b = rng.normal(size=(4, 4))
    _, norms = gram_schmidt(b)
    # independent determinant via Gaussian elimination with partial pivoting
    m = b.copy()
    det = 1.0
    for k in range(4):
        p = k + int(np.argmax(np.abs(m[k:, k])))
        if p != k:
            m[[k, p]] = m[[p, k]]
            det = -det
        det *= m[k, k]
        m[k + 1:] -= np.outer(m[k + 1:, k] / m[k, k], m[k])
    assert np.prod(norms) == pytest.approx(abs(det), rel=1e-9)


def test_singular_and_ill_conditioned():
    with pytest.raises(SingularBasisError):
        Lattice([[1, 2], [2, 4]])
    with pytest.raises(IllConditionedError):
        Lattice([[1, 0], [1, 1e-9]])


def test_dual_examples(rng):
    assert np.allclose(dual(Lattice.integer(3)).basis, np.eye(3))
    assert np.allclose(dual(Lattice([[2, 0], [0, 1]])).basis, [[0.5, 0], [0, 1]])
    lat = Lattice(rng.normal(size=(3, 3)))
    assert lat.det_abs * dual(lat).det_abs == pytest.approx(1.0, abs=1e-9)


def test_lattice_equal_examples():
    z2 = Lattice.integer(2)
    assert lattice_equal(z2, Lattice.integer(2))
    assert lattice_equal(z2, Lattice([[1, 1], [0, 1]]))
    assert not lattice_equal(z2, Lattice([[2, 0], [0, 1]]))
    with pytest.raises(DimensionMismatchError):
        lattice_equal(z2, Lattice.integer(3))


def test_immutable():
    lat = Lattice.integer(2)
    with pytest.raises(AttributeError):
        lat.basis = np.eye(2)
    with pytest.raises(ValueError):
        lat.basis[0, 0] = 3.0


def test_json_roundtrip(tmp_path, rng):
    lat = random_lattice(rng, 3)
    save_lattice(lat, tmp_path / "l.json")
    back = load_lattice(tmp_path / "l.json")
    assert np.array_equal(back.basis, lat.basis)
    with pytest.raises(DimensionMismatchError):
        Lattice.from_json({"dim": 3, "basis": [[1, 0], [0, 1]]})


def test_normal_of_rank_one_span():
    coeffs = np.array([[0, 0, 0], [1, 0, 0], [-1, 0, 0]])
    y = integer_normal_of_span(coeffs, Lattice.integer(3))
    assert y[0] == 0 and np.any(y != 0)


def test_normal_full_rank_is_none():
    coeffs = np.vstack([np.eye(3, dtype=int), -np.eye(3, dtype=int)])
    assert integer_normal_of_span(coeffs, Lattice.integer(3)) is None


def test_normal_of_plane():
    coeffs = np.array([[0, 0, 0], [1, 1, 0], [-1, -1, 0], [1, -1, 0], [-1, 1, 0]])
    y = integer_normal_of_span(coeffs, Lattice.integer(3))
    assert np.allclose(y, [0, 0, 1])


def test_normal_on_skew_lattice(rng):
    lat = random_lattice(rng, 3, unit_det=False)
    coeffs = np.array([[1, 2, 0], [0, 1, 1], [1, 3, 1]])
    y = integer_normal_of_span(coeffs, lat)
    assert np.allclose(lat.points(coeffs) @ y, 0, atol=1e-9)
    # y is a dual lattice vector: integer coordinates in the dual basis
    k = dual(lat).coords(y)
    assert np.allclose(k, np.rint(k), atol=1e-9)


def test_primitive():
    assert primitive([0, -4, 6]) == (0, 2, -3)
    assert primitive([0, 0]) == (0, 0)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 5), st.integers(0, 2**32 - 1))
def test_gso_invariants(d, seed):
    rng = np.random.default_rng(seed)
    lat = Lattice(rng.normal(size=(d, d)) + 2 * np.eye(d))
    assert np.allclose(lat.mu @ lat.gram_schmidt_basis, lat.basis, atol=1e-10)
    assert np.allclose(np.diag(lat.mu), 1)
    assert np.allclose(np.triu(lat.mu, 1), 0)
    g = lat.gram_schmidt_basis @ lat.gram_schmidt_basis.T
    assert np.allclose(g, np.diag(lat.gram_schmidt_norms**2), atol=1e-9)
    assert lat.det_abs == pytest.approx(abs(np.linalg.det(lat.basis)), rel=1e-9)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 5), st.integers(0, 2**32 - 1))
def test_dual_invariants(d, seed):
    rng = np.random.default_rng(seed)
    lat = random_lattice(rng, d)
    dl = dual(lat)
    assert np.allclose(lat.basis @ dl.basis.T, np.eye(d), atol=1e-9)
    assert lattice_equal(dual(dl), lat)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 5), st.integers(0, 2**32 - 1))
def test_lattice_equal_under_unimodular(d, seed):
    rng = np.random.default_rng(seed)
    lat = random_lattice(rng, d, unit_det=False)
    u = random_unimodular(rng, d)
    assert lattice_equal(lat, Lattice(u @ lat.basis))
    if d >= 1:
        doubled = u.copy()
        doubled[0] *= 2
        assert not lattice_equal(lat, Lattice(doubled @ lat.basis))


@settings(max_examples=80, deadline=None)
@given(st.integers(1, 5), st.integers(0, 4), st.integers(0, 2**32 - 1))
def test_integer_kernel(d, r, seed):
    rng = np.random.default_rng(seed)
    rows = rng.integers(-4, 5, size=(r, d)).tolist()
    ker = integer_kernel(rows, d)
    rank = integer_rank(rows, d)
    assert len(ker) == d - rank
    assert rank == (np.linalg.matrix_rank(np.array(rows, dtype=float)) if r else 0)
    for v in ker:
        assert any(v)
        assert all(sum(a * b for a, b in zip(row, v)) == 0 for row in rows)
    k = integer_normal_coeffs(rows, d)
    if rank == d:
        assert k is None
    else:
        assert primitive(k) == k
        assert all(sum(a * b for a, b in zip(row, k)) == 0 for row in rows)
