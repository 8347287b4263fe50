"""Full-rank lattices, duals, Gram-Schmidt data and integer kernels.

Basis vectors are the *rows* of every matrix in this package.
"""
import json
from pathlib import Path

import numpy as np

from .errors import DimensionMismatchError, IllConditionedError, SingularBasisError

MAX_CONDITION = 1e8
INTEGRALITY_TOL = 1e-7


def _as_matrix(basis):
    b = np.array(basis, dtype=np.float64)
    if b.ndim != 2 or b.shape[0] != b.shape[1]:
        raise DimensionMismatchError(f"basis must be square, got shape {b.shape}")
    if not np.all(np.isfinite(b)):
        raise ValueError("basis has non-finite entries")
    return b


def gram_schmidt(basis):
    """Orthogonalize the rows of ``basis`` in order.

    Returns
    -------
    ortho : (d, d) ndarray
        Row ``i`` is ``basis[i]`` minus its projection onto the span of the
        earlier rows.
    norms : (d,) ndarray
        Euclidean lengths of the rows of ``ortho``.
    """
    ortho, norms, _ = _gso(_as_matrix(basis))
    return ortho, norms


def _gso(b):
    d = b.shape[0]
    if d == 0:
        return b.copy(), np.zeros(0), np.zeros((0, 0))
    # b.T = Q R  =>  row i of b is sum_j R[j, i] q_j
    q, r = np.linalg.qr(b.T)
    diag = np.diag(r).copy()
    scale = max(np.abs(b).max(), 1.0)
    if np.any(np.abs(diag) <= 1e-12 * scale):
        raise SingularBasisError("singular basis")
    ortho = (q * diag).T
    norms = np.abs(diag)
    mu = (r / diag[:, None]).T
    np.fill_diagonal(mu, 1.0)
    mu = np.tril(mu)
    return ortho, norms, mu


class Lattice:
    """A full-rank lattice in R^d given by a basis (rows).

    Gram-Schmidt data and ``|det|`` are computed once at construction.  The
    coefficient matrix ``mu`` satisfies ``basis = mu @ gram_schmidt_basis``.
    """

    __slots__ = ("basis", "gram_schmidt_basis", "gram_schmidt_norms", "mu", "det_abs")

    def __init__(self, basis):
        b = _as_matrix(basis)
        ortho, norms, mu = _gso(b)
        if np.linalg.cond(b) > MAX_CONDITION:
            raise IllConditionedError("basis condition number exceeds 1e8")
        for arr in (b, ortho, norms, mu):
            arr.setflags(write=False)
        object.__setattr__(self, "basis", b)
        object.__setattr__(self, "gram_schmidt_basis", ortho)
        object.__setattr__(self, "gram_schmidt_norms", norms)
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "det_abs", float(np.prod(norms)))

    def __setattr__(self, name, value):
        raise AttributeError("Lattice is immutable")

    @classmethod
    def integer(cls, d):
        return cls(np.eye(d))

    @property
    def dim(self):
        return self.basis.shape[0]

    def dual(self):
        return dual(self)

    def points(self, coeffs):
        """Ambient coordinates of integer coefficient vectors (rows)."""
        return np.asarray(coeffs, dtype=np.float64) @ self.basis

    def coords(self, x):
        """Real coefficients of ambient vectors with respect to the basis."""
        return np.linalg.solve(self.basis.T, np.asarray(x, dtype=np.float64).T).T

    def __repr__(self):
        return f"Lattice(dim={self.dim}, det={self.det_abs:.6g})"

    def to_json(self):
        return {"dim": self.dim, "basis": self.basis.tolist()}

    @classmethod
    def from_json(cls, obj):
        basis = obj["basis"]
        if "dim" in obj and int(obj["dim"]) != len(basis):
            raise DimensionMismatchError("'dim' does not match the basis")
        return cls(basis)


def dual(lat):
    """Dual lattice; its basis is the inverse transpose of ``lat.basis``."""
    return Lattice(np.linalg.inv(lat.basis).T)


def lattice_equal(a, b):
    """True when the two bases generate the same lattice.

    With row bases, ``b.basis = U @ a.basis`` for a unimodular ``U``.
    """
    if a.dim != b.dim:
        raise DimensionMismatchError("lattices have different dimensions")
    u = b.basis @ np.linalg.inv(a.basis)
    if np.max(np.abs(u - np.rint(u)), initial=0.0) > INTEGRALITY_TOL:
        return False
    return abs(abs(np.linalg.det(u)) - 1.0) <= INTEGRALITY_TOL


def load_lattice(path):
    return Lattice.from_json(json.loads(Path(path).read_text()))


def save_lattice(lat, path):
    Path(path).write_text(json.dumps(lat.to_json()) + "\n")


# -- exact integer linear algebra ------------------------------------------


def integer_kernel(rows, d=None):
    """Z-basis of ``{k in Z^d : r . k = 0 for every row r}``.

    Column-style Hermite elimination with exact Python integers; the kernel
    basis is read off the trailing columns of the accumulated unimodular
    transform.  Returns a list of integer tuples (possibly empty).
    """
    rows = [[int(v) for v in r] for r in rows]
    if d is None:
        if not rows:
            raise ValueError("dimension needed for an empty row set")
        d = len(rows[0])
    cols_u = [[int(i == j) for i in range(d)] for j in range(d)]  # U column j
    rows = [r for r in rows if any(r)]
    pivot = 0
    for r in rows:
        if pivot == d:
            break
        vals = [sum(r[i] * cols_u[j][i] for i in range(d)) for j in range(d)]
        for j in range(pivot + 1, d):
            while vals[j] != 0:
                q = vals[pivot] // vals[j]
                vals[pivot] -= q * vals[j]
                cols_u[pivot] = [x - q * y for x, y in zip(cols_u[pivot], cols_u[j])]
                vals[pivot], vals[j] = vals[j], vals[pivot]
                cols_u[pivot], cols_u[j] = cols_u[j], cols_u[pivot]
        if vals[pivot] != 0:
            pivot += 1
    return [tuple(c) for c in cols_u[pivot:]]


def integer_rank(rows, d):
    return d - len(integer_kernel(rows, d))


def primitive(v):
    """Divide an integer vector by the gcd of its entries; first nonzero > 0."""
    v = [int(x) for x in v]
    g = 0
    for x in v:
        g = np.gcd(g, abs(x))
    if g == 0:
        return tuple(v)
    v = [x // int(g) for x in v]
    for x in v:
        if x != 0:
            if x < 0:
                v = [-y for y in v]
            break
    return tuple(v)


def integer_normal_coeffs(coeffs, d):
    """Primitive integer vector orthogonal to every coefficient row, or None.

    ``None`` means the rows span a full-rank sublattice.  An empty or all-zero
    row set returns the first unit vector.
    """
    kernel = integer_kernel(coeffs, d) if len(coeffs) else [tuple(int(i == j) for i in range(d))
                                                              for j in range(d)]
    if not kernel:
        return None
    return primitive(kernel[0])


def integer_normal_of_span(points, lat):
    """Nonzero dual-lattice vector orthogonal to all ``points``, or None.

    ``points`` is a PointSet or an array of integer coefficient vectors with
    respect to ``lat``.  Pairing a lattice vector with coefficients ``a``
    against the dual vector with dual coefficients ``k`` gives ``a . k``, so
    the normal is the dual-basis image of an integer kernel vector.
    """
    coeffs = getattr(points, "coeffs", points)
    coeffs = np.asarray(coeffs, dtype=np.int64).reshape(-1, lat.dim)
    k = integer_normal_coeffs(coeffs.tolist(), lat.dim)
    if k is None:
        return None
    return np.asarray(k, dtype=np.float64) @ dual(lat).basis
