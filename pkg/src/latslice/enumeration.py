"""Lattice points of a body, hyperplane counts, and a grid-scan oracle."""
import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .bodies import circumradius
from .errors import BudgetExceededError, DimensionMismatchError
from .gaussian import ball_volume
from .lattice import dual, integer_rank

MAX_POINTS = 10**8
GUARD_SLACK = 16
GRID_BUDGET = 10**7


@dataclass(frozen=True, eq=False)
class PointSet:
    """The finite set K ∩ L, in ambient and lattice coordinates.

    Rows are sorted lexicographically by coefficient vector.
    """

    points: np.ndarray
    coeffs: np.ndarray
    contains_zero: bool

    @classmethod
    def from_coeffs(cls, lat, coeffs):
        coeffs = np.asarray(coeffs, dtype=np.int64).reshape(-1, lat.dim)
        order = np.lexsort(coeffs.T[::-1])
        coeffs = coeffs[order]
        coeffs.setflags(write=False)
        pts = lat.points(coeffs)
        pts.setflags(write=False)
        zero = bool(np.any(np.all(coeffs == 0, axis=1)))
        return cls(points=pts, coeffs=coeffs, contains_zero=zero)

    def __len__(self):
        return self.coeffs.shape[0]

    @property
    def dim(self):
        return self.coeffs.shape[1]

    def coeff_set(self):
        return {tuple(int(v) for v in row) for row in self.coeffs}

    def rank(self):
        return integer_rank(self.coeffs.tolist(), self.dim)

    def to_csv(self):
        d = self.dim
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow([f"c{i}" for i in range(d)] + [f"x{i}" for i in range(d)])
        for c, x in zip(self.coeffs.tolist(), self.points.tolist()):
            w.writerow(c + [repr(float(v)) for v in x])
        return buf.getvalue()


def read_pointset_csv(text, lat):
    lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
    rows = list(csv.reader(lines))
    d = lat.dim
    if not rows or len(rows[0]) != 2 * d:
        raise DimensionMismatchError("CSV header does not match the lattice dimension")
    coeffs = [[int(v) for v in r[:d]] for r in rows[1:]]
    return PointSet.from_coeffs(lat, np.array(coeffs, dtype=np.int64).reshape(-1, d))


def enumerate_in_body(lat, body, max_points=MAX_POINTS):
    """All lattice points in ``body``: ball enumeration, then a membership filter."""
    if lat.dim != body.dim:
        raise DimensionMismatchError("lattice and body dimensions differ")
    d = lat.dim
    radius = circumradius(body) * (1 + 1e-9) + 1e-12
    if GUARD_SLACK * ball_volume(d, radius) / lat.det_abs > max_points:
        raise BudgetExceededError("enumeration too expensive")
    coeffs, _ = _kernels.fp_enumerate(lat.mu, lat.gram_schmidt_norms**2, np.zeros(d),
                                      radius**2, max_points)
    inside = body.contains_many(lat.points(coeffs))
    return PointSet.from_coeffs(lat, coeffs[inside])


def grid_scan_oracle(lat, body, budget=GRID_BUDGET):
    """Scan every coefficient vector in a box and test membership directly.

    A lattice point with norm at most R has ``|c_i| = |<x, b*_i>| <= R |b*_i|``,
    so the box of those bounds contains all of K ∩ L.
    """
    if lat.dim != body.dim:
        raise DimensionMismatchError("lattice and body dimensions differ")
    d = lat.dim
    radius = circumradius(body) * (1 + 1e-9) + 1e-12
    bounds = np.floor(radius * np.linalg.norm(dual(lat).basis, axis=1) + 1e-9).astype(np.int64)
    if math.prod(int(2 * m + 1) for m in bounds) > budget:
        raise BudgetExceededError("grid scan too expensive")
    axes = [np.arange(-m, m + 1, dtype=np.int64) for m in bounds]
    found = []
    for first in axes[0]:
        rest = np.stack(np.meshgrid(*axes[1:], indexing="ij"), axis=-1).reshape(-1, d - 1) \
            if d > 1 else np.zeros((1, 0), dtype=np.int64)
        block = np.hstack([np.full((rest.shape[0], 1), first, dtype=np.int64), rest])
        found.append(block[body.contains_many(lat.points(block))])
    return PointSet.from_coeffs(lat, np.vstack(found))


def slice_count(ps, y):
    """Return ``(#points on the hyperplane y-perp, #points)``.

    Integral points against an integral ``y`` are tested exactly; otherwise a
    point counts when ``|<x, y>| <= 1e-9 |x| |y|``.  The origin always counts.
    """
    y = np.asarray(y, dtype=np.float64)
    if y.shape != (ps.dim,):
        raise DimensionMismatchError("normal has the wrong dimension")
    if not np.any(y):
        raise ValueError("the normal must be nonzero")
    pts = ps.points
    if np.all(y == np.rint(y)) and np.all(pts == np.rint(pts)):
        on = int(_kernels.count_orthogonal(np.rint(pts).astype(np.int64),
                                           np.rint(y).astype(np.int64)[None, :])[0])
    else:
        dots = np.abs(pts @ y)
        tol = 1e-9 * np.linalg.norm(pts, axis=1) * np.linalg.norm(y)
        on = int(np.count_nonzero((dots <= tol) | np.all(pts == 0, axis=1)))
    return on, len(ps)


def slice_count_coeffs(ps, k):
    """Exact count for the dual vector with integer dual coefficients ``k``."""
    k = np.asarray(k, dtype=np.int64)
    if not np.any(k):
        raise ValueError("the normal must be nonzero")
    return int(_kernels.count_orthogonal(ps.coeffs, k[None, :])[0]), len(ps)


def slice_counts_coeffs(ps, normals):
    """Vectorized :func:`slice_count_coeffs` over rows of ``normals``."""
    return _kernels.count_orthogonal(ps.coeffs, np.asarray(normals, dtype=np.int64))
