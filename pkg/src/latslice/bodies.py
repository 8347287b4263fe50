"""Origin-symmetric convex bodies, their linear images, and John position.

Every body is closed: points on the boundary (up to a relative tolerance of
1e-12 on each defining inequality) count as inside.
"""
import itertools
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    DimensionMismatchError,
    InvalidBodyError,
    JohnUnsupportedError,
    RankDeficientError,
    SingularBasisError,
)
from .gaussian import ball_volume

BOUNDARY_TOL = 1e-12
JOHN_SLACK = 1.1
MC_REL_TARGET = 0.01
MC_BATCH = 200_000
MC_MAX_SAMPLES = 50_000_000
MAX_VERTICES = 100_000


def _vec(x):
    return np.asarray(x, dtype=np.float64)


class Body:
    """Common interface; subclasses hold the defining data."""

    dim: int

    def contains(self, x):
        x = _vec(x)
        if x.shape != (self.dim,):
            raise DimensionMismatchError(f"point of shape {x.shape} for a body in R^{self.dim}")
        return bool(self.contains_many(x[None, :])[0])

    def contains_many(self, xs):
        xs = _vec(xs).reshape(-1, self.dim)
        return self.gauge(xs) <= 1.0 + BOUNDARY_TOL

    def gauge(self, xs):
        raise NotImplementedError

    def vertices(self):
        """Vertex array, or None for bodies without one (ellipsoids)."""
        return None


@dataclass(frozen=True, eq=False)
class Ellipsoid(Body):
    """{x : x^T A x <= 1} with A symmetric positive definite."""

    shape: np.ndarray

    def __post_init__(self):
        a = _vec(self.shape)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise InvalidBodyError("ellipsoid shape must be square")
        if not np.allclose(a, a.T, rtol=1e-10, atol=1e-12):
            raise InvalidBodyError("ellipsoid shape must be symmetric")
        a = (a + a.T) / 2
        if np.linalg.eigvalsh(a)[0] <= 0:
            raise InvalidBodyError("ellipsoid shape must be positive definite")
        a.setflags(write=False)
        object.__setattr__(self, "shape", a)

    @property
    def dim(self):
        return self.shape.shape[0]

    def gauge(self, xs):
        return np.einsum("ij,jk,ik->i", xs, self.shape, xs)

    def to_json(self):
        return {"type": "ellipsoid", "shape": self.shape.tolist()}


@dataclass(frozen=True, eq=False)
class Box(Body):
    half_widths: np.ndarray

    def __post_init__(self):
        h = _vec(self.half_widths)
        if h.ndim != 1 or np.any(h <= 0):
            raise InvalidBodyError("box half widths must be positive")
        h.setflags(write=False)
        object.__setattr__(self, "half_widths", h)

    @property
    def dim(self):
        return self.half_widths.shape[0]

    def gauge(self, xs):
        return np.max(np.abs(xs) / self.half_widths, axis=1)

    def vertices(self):
        signs = np.array(list(itertools.product((-1.0, 1.0), repeat=self.dim)))
        return signs * self.half_widths

    def to_json(self):
        return {"type": "box", "half_widths": self.half_widths.tolist()}


@dataclass(frozen=True, eq=False)
class CrossPolytope(Body):
    """{x : sum_i |x_i| / scales_i <= 1}."""

    scales: np.ndarray

    def __post_init__(self):
        c = _vec(self.scales)
        if c.ndim != 1 or np.any(c <= 0):
            raise InvalidBodyError("cross-polytope scales must be positive")
        c.setflags(write=False)
        object.__setattr__(self, "scales", c)

    @property
    def dim(self):
        return self.scales.shape[0]

    def gauge(self, xs):
        return np.sum(np.abs(xs) / self.scales, axis=1)

    def vertices(self):
        e = np.diag(self.scales)
        return np.vstack([e, -e])

    def to_json(self):
        return {"type": "cross_polytope", "scales": self.scales.tolist()}


@dataclass(frozen=True, eq=False)
class SymmetricHPolytope(Body):
    """{x : |<a_i, x>| <= b_i for all i}; the normals must span R^d."""

    normals: np.ndarray
    offsets: np.ndarray

    def __post_init__(self):
        n = _vec(self.normals)
        b = _vec(self.offsets)
        if n.ndim != 2 or b.shape != (n.shape[0],):
            raise InvalidBodyError("need one positive offset per normal")
        if np.any(b <= 0):
            raise InvalidBodyError("offsets must be positive")
        if np.linalg.matrix_rank(n) < n.shape[1]:
            raise InvalidBodyError("normals do not span R^d; the polytope is unbounded")
        n.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "normals", n)
        object.__setattr__(self, "offsets", b)

    @property
    def dim(self):
        return self.normals.shape[1]

    def gauge(self, xs):
        return np.max(np.abs(xs @ self.normals.T) / self.offsets, axis=1)

    def vertices(self):
        return hpolytope_vertices(self.normals, self.offsets)

    def to_json(self):
        return {"type": "hpolytope", "normals": self.normals.tolist(),
                "offsets": self.offsets.tolist()}


@dataclass(frozen=True, eq=False)
class Pullback(Body):
    """The image T(base), with membership delegated through T^{-1}."""

    base: Body
    transform: np.ndarray

    def __post_init__(self):
        t = _vec(self.transform)
        if t.shape != (self.base.dim, self.base.dim):
            raise DimensionMismatchError("transform does not match the body dimension")
        inv = _inverse(t)
        t.setflags(write=False)
        inv.setflags(write=False)
        object.__setattr__(self, "transform", t)
        object.__setattr__(self, "inverse", inv)

    @property
    def dim(self):
        return self.base.dim

    def gauge(self, xs):
        return self.base.gauge(xs @ self.inverse.T)

    def vertices(self):
        v = self.base.vertices()
        return None if v is None else v @ self.transform.T

    def to_json(self):
        return {"type": "pullback", "base": self.base.to_json(),
                "transform": self.transform.tolist()}


# -- vertex enumeration ---------------------------------------------------------


def _dedupe_rows(v, tol=1e-9):
    if v.shape[0] == 0:
        return v
    keys = np.round(v / tol).astype(np.int64)
    _, idx = np.unique(keys, axis=0, return_index=True)
    return v[np.sort(idx)]


def hpolytope_vertices_bruteforce(normals, offsets):
    """Solve every d-subset of the 2m facet equations and keep feasible points."""
    normals, offsets = _vec(normals), _vec(offsets)
    d = normals.shape[1]
    g = np.vstack([normals, -normals])
    h = np.concatenate([offsets, offsets])
    found = []
    for rows in itertools.combinations(range(g.shape[0]), d):
        m = g[list(rows)]
        if abs(np.linalg.det(m)) < 1e-12:
            continue
        x = np.linalg.solve(m, h[list(rows)])
        if np.all(g @ x <= h * (1 + 1e-9) + 1e-12):
            found.append(x)
    return _dedupe_rows(np.array(found).reshape(-1, d))


def hpolytope_vertices(normals, offsets):
    """Vertices of {|N x| <= b}: brute force for d <= 4, qhull above."""
    normals, offsets = _vec(normals), _vec(offsets)
    d = normals.shape[1]
    if d <= 4:
        return hpolytope_vertices_bruteforce(normals, offsets)
    from scipy.spatial import HalfspaceIntersection

    g = np.vstack([normals, -normals])
    h = np.concatenate([offsets, offsets])
    hs = HalfspaceIntersection(np.hstack([g, -h[:, None]]), np.zeros(d))
    return _dedupe_rows(hs.intersections)


# -- operations -----------------------------------------------------------------


def contains(body, x):
    return body.contains(x)


def circumradius(body):
    """Radius of the smallest origin-centered ball containing the body."""
    if isinstance(body, Ellipsoid):
        return float(1.0 / math.sqrt(np.linalg.eigvalsh(body.shape)[0]))
    if isinstance(body, Box):
        return float(np.linalg.norm(body.half_widths))
    if isinstance(body, CrossPolytope):
        return float(body.scales.max())
    if isinstance(body, Pullback) and isinstance(body.base, Ellipsoid):
        return circumradius(apply_transform(body.base, body.transform))
    v = body.vertices()
    return float(np.linalg.norm(v, axis=1).max())


def _inverse(t):
    t = _vec(t)
    if t.ndim != 2 or t.shape[0] != t.shape[1]:
        raise DimensionMismatchError("transform must be square")
    if abs(np.linalg.det(t)) < 1e-12 * max(1.0, np.abs(t).max()) ** t.shape[0]:
        raise SingularBasisError("singular transform")
    return np.linalg.inv(t)


def _is_diagonal(t):
    return np.count_nonzero(t - np.diag(np.diag(t))) == 0


def apply_transform(body, t):
    """The body T K = {T x : x in K}."""
    t = _vec(t)
    if t.shape != (body.dim, body.dim):
        raise DimensionMismatchError("transform does not match the body dimension")
    inv = _inverse(t)
    if isinstance(body, Ellipsoid):
        a = inv.T @ body.shape @ inv
        return Ellipsoid((a + a.T) / 2)
    if isinstance(body, Box):
        if _is_diagonal(t):
            return Box(np.abs(np.diag(t)) * body.half_widths)
        return SymmetricHPolytope(inv, body.half_widths)
    if isinstance(body, CrossPolytope):
        if _is_diagonal(t):
            return CrossPolytope(np.abs(np.diag(t)) * body.scales)
        return Pullback(body, t)
    if isinstance(body, SymmetricHPolytope):
        return SymmetricHPolytope(body.normals @ inv, body.offsets)
    if isinstance(body, Pullback):
        return Pullback(body.base, t @ body.transform)
    raise InvalidBodyError(f"unsupported body {type(body).__name__}")


def bounding_box(body):
    """Half widths of the smallest axis-aligned box containing the body."""
    if isinstance(body, Ellipsoid):
        return np.sqrt(np.diag(np.linalg.inv(body.shape)))
    v = body.vertices()
    return np.abs(v).max(axis=0)


def volume(body, rng=None):
    """Return ``(value, std_error)``; the error is zero for closed forms.

    H-polytopes are estimated by rejection sampling in the bounding box until
    the relative standard error drops to 1%.
    """
    d = body.dim
    if isinstance(body, Ellipsoid):
        return ball_volume(d) / math.sqrt(np.linalg.det(body.shape)), 0.0
    if isinstance(body, Box):
        return float(np.prod(2 * body.half_widths)), 0.0
    if isinstance(body, CrossPolytope):
        return 2.0**d / math.factorial(d) * float(np.prod(body.scales)), 0.0
    if isinstance(body, Pullback):
        v, e = volume(body.base, rng)
        det = abs(np.linalg.det(body.transform))
        return v * det, e * det
    if rng is None:
        raise ValueError("Monte Carlo volume needs a random generator")
    half = bounding_box(body)
    box_vol = float(np.prod(2 * half))
    hits = n = 0
    while n < MC_MAX_SAMPLES:
        xs = (rng.random((MC_BATCH, d)) * 2 - 1) * half
        hits += int(np.count_nonzero(body.contains_many(xs)))
        n += MC_BATCH
        p = hits / n
        if hits and math.sqrt((1 - p) / (p * n)) <= MC_REL_TARGET:
            break
    p = hits / n
    return p * box_vol, box_vol * math.sqrt(p * (1 - p) / n)


# -- minimum-volume enclosing ellipsoid ----------------------------------------


def mvee(points, eps=1e-6, max_iter=100_000):
    """Origin-centered minimum-volume ellipsoid enclosing ``{+p, -p}``.

    Khachiyan's coordinate ascent on the barycentric weights, with
    Todd-Yildirim away steps so the gap closes linearly.  Stops once every
    point satisfies ``x^T A x <= 1 + eps`` and the weights are within ``eps``
    of optimal.
    """
    p = _vec(points)
    if p.ndim != 2:
        raise DimensionMismatchError("points must be a 2-D array")
    n, d = p.shape
    if n == 0 or np.linalg.matrix_rank(p) < d:
        raise RankDeficientError("rank-deficient point set")
    u = np.full(n, 1.0 / n)
    for _ in range(max_iter):
        m = (p.T * u) @ p
        g = np.einsum("ij,jk,ik->i", p, np.linalg.inv(m), p)
        j_up = int(np.argmax(g))
        live = np.flatnonzero(u > 0)
        j_dn = int(live[np.argmin(g[live])])
        gap_up = g[j_up] / d - 1.0
        gap_dn = 1.0 - g[j_dn] / d
        if gap_up <= eps and gap_dn <= eps:
            break
        if gap_up >= gap_dn:
            kappa = g[j_up]
            lam = (kappa - d) / (d * (kappa - 1.0))
            u *= 1.0 - lam
            u[j_up] += lam
        else:
            kappa = g[j_dn]
            cap = u[j_dn] / (1.0 - u[j_dn]) if u[j_dn] < 1 else np.inf
            lam = (d - kappa) / (d * (kappa - 1.0)) if kappa > 1.0 else cap
            lam = min(lam, cap)
            u *= 1.0 + lam
            u[j_dn] -= lam
            u[j_dn] = max(u[j_dn], 0.0)
            u /= u.sum()
    a = np.linalg.inv((p.T * u) @ p) / d
    return Ellipsoid((a + a.T) / 2)


# -- John position ----------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class JohnResult:
    transform: np.ndarray
    transformed_body: Body
    circumradius_after: float


def _sym_sqrt(a):
    w, v = np.linalg.eigh(a)
    return (v * np.sqrt(w)) @ v.T


def _whitening(a):
    """Determinant-one map sending {x^T A x <= 1} to a ball."""
    d = a.shape[0]
    t = _sym_sqrt(a)
    return t / abs(np.linalg.det(t)) ** (1.0 / d)


def john_normalize(body, rng=None, eps=1e-6, vol=None):
    """Determinant-one T with circumradius(T K) <= 1.1 d vol(K)^(1/d).

    Ellipsoids are whitened analytically; polytopes use the MVEE of their
    vertex set.  ``vol`` skips recomputing a Monte Carlo volume.
    """
    if isinstance(body, Ellipsoid):
        shape = body.shape
    else:
        if isinstance(body, Pullback) and isinstance(body.base, Ellipsoid):
            return john_normalize(apply_transform(body.base, body.transform), rng, eps, vol)
        if isinstance(body, Box) and 2**body.dim > MAX_VERTICES:
            raise JohnUnsupportedError("john unsupported: too many vertices")
        try:
            v = body.vertices()
        except Exception as exc:  # qhull failures surface as generic errors
            raise JohnUnsupportedError(f"john unsupported: {exc}") from exc
        if v is None or v.shape[0] > MAX_VERTICES:
            raise JohnUnsupportedError("john unsupported")
        shape = mvee(v, eps).shape
    t = _whitening(shape)
    out = apply_transform(body, t)
    r = circumradius(out)
    if vol is None:
        vol, _ = volume(body, rng)
    d = body.dim
    bound = JOHN_SLACK * d * vol ** (1.0 / d)
    if r > bound:
        raise RuntimeError(f"John normalization failed: circumradius {r:.6g} > {bound:.6g}")
    t.setflags(write=False)
    return JohnResult(transform=t, transformed_body=out, circumradius_after=r)


# -- serialization ------------------------------------------------------------------


def body_from_json(obj):
    kind = obj.get("type")
    if kind == "ellipsoid":
        return Ellipsoid(obj["shape"])
    if kind == "box":
        return Box(obj["half_widths"])
    if kind == "cross_polytope":
        return CrossPolytope(obj["scales"])
    if kind == "hpolytope":
        return SymmetricHPolytope(obj["normals"], obj["offsets"])
    if kind == "pullback":
        return Pullback(body_from_json(obj["base"]), obj["transform"])
    raise InvalidBodyError(f"unknown body type {kind!r}")


def load_body(path):
    return body_from_json(json.loads(Path(path).read_text()))


def save_body(body, path):
    Path(path).write_text(json.dumps(body.to_json()) + "\n")
