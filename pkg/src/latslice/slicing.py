"""Finding dual-lattice hyperplanes that capture many lattice points of a body.

A dual vector is carried by its integer coefficients ``k`` in the dual basis.
For a lattice point with coefficients ``a`` the pairing is ``a . k``, so all
slice counts are integer-exact no matter how the body was normalized.
"""
import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Optional

import numpy as np

from . import __version__, _kernels
from .bodies import JohnUnsupportedError, circumradius, john_normalize, volume
from .enumeration import PointSet, enumerate_in_body
from .errors import (
    AttemptsExhaustedError,
    BudgetExceededError,
    FullRankError,
    NoCandidatesError,
    NoHyperplaneError,
    NotFullDimensionalError,
)
from .gaussian import ExactSampler, _estimate_points, klein_in_regime, klein_sample_coeffs, tail_radius_factor
from .lattice import Lattice, dual, integer_normal_coeffs

EXACT_MAX_POINTS = 2000
EXACT_MAX_DIM = 6
EXACT_MAX_SUBSETS = 2_000_000
DUAL_SEARCH_TARGET = 20_000
EXACT_SUPPORT_LIMIT = 200_000
MAX_ATTEMPTS_CAP = 10**6


@dataclass
class FinderConfig:
    big_C: float = 2.0
    small_c: float = 0.5
    max_attempts: Optional[int] = None
    seed: int = 0
    sampler: str = "auto"
    batch: int = 64
    c_ahz: float = 2.0

    def __post_init__(self):
        if not self.big_C >= 1:
            raise ValueError("big_C must be at least 1")
        if not 0 < self.small_c <= 1:
            raise ValueError("small_c must lie in (0, 1]")
        if self.max_attempts is not None and self.max_attempts < 1:
            raise ValueError("max_attempts must be positive")
        if self.sampler not in ("auto", "exact", "klein"):
            raise ValueError(f"unknown sampler {self.sampler!r}")

    def attempts_for(self, p):
        if self.max_attempts is not None:
            return int(self.max_attempts)
        return min(10 * math.ceil(1.0 / p), MAX_ATTEMPTS_CAP)


@dataclass(frozen=True, eq=False)
class SliceResult:
    normal: np.ndarray
    dual_coeffs: tuple
    on_count: int
    total: int
    method: str
    attempts: Optional[int] = None

    @property
    def ratio(self):
        return Fraction(self.on_count, self.total)

    def to_json(self):
        return {
            "normal": [float(v) for v in self.normal],
            "dual_coeffs": list(self.dual_coeffs),
            "on_count": self.on_count,
            "total": self.total,
            "ratio": str(self.ratio),
            "method": self.method,
            "attempts": self.attempts,
            "version": __version__,
        }


def _result(lat, k, on, total, method, attempts=None):
    k = tuple(int(v) for v in k)
    normal = np.asarray(k, dtype=np.float64) @ dual(lat).basis
    return SliceResult(normal=normal, dual_coeffs=k, on_count=int(on), total=int(total),
                       method=method, attempts=attempts)


# -- parameters ---------------------------------------------------------------


def recommend_s(body, big_C=2.0, rng=None, vol=None):
    """Gaussian width big_C * vol^(1/(d(d-1))), never below 1."""
    d = body.dim
    if d < 2:
        raise NoHyperplaneError("d = 1 has no nontrivial hyperplanes")
    if vol is None:
        vol, _ = volume(body, rng)
    return max(1.0, big_C * vol ** (1.0 / (d * (d - 1))))


def threshold_p(body_or_radius, s, small_c=0.5):
    """min(1, small_c / (s R)) with R the circumradius."""
    r = body_or_radius if isinstance(body_or_radius, (int, float)) else circumradius(body_or_radius)
    return min(1.0, small_c / (s * r))


# -- prepared instance ----------------------------------------------------------


@dataclass(eq=False)
class Instance:
    """A (lattice, body) pair with everything the finders share."""

    lattice: Lattice
    body: object
    points: PointSet
    vol: float
    vol_err: float
    radius: float
    transform: np.ndarray
    john: bool
    rank: int = field(init=False)

    def __post_init__(self):
        self.rank = self.points.rank()

    @property
    def degenerate(self):
        return self.rank < self.lattice.dim


def prepare(lat, body, rng=None, points=None):
    vol, vol_err = volume(body, rng)
    try:
        jr = john_normalize(body, rng, vol=vol)
        t, radius, john = np.asarray(jr.transform), jr.circumradius_after, True
    except JohnUnsupportedError:
        t, radius, john = np.eye(body.dim), circumradius(body), False
    if points is None:
        points = enumerate_in_body(lat, body)
    return Instance(lat, body, points, vol, vol_err, radius, t, john)


# -- randomized finder ------------------------------------------------------------


def _sampler(lat, s, kind):
    """Return a ``draw(rng, n) -> coeffs`` callable for D_{lat,s}."""
    if kind == "auto":
        radius = tail_radius_factor(lat.dim) * s * math.sqrt(lat.dim)
        small = _estimate_points(lat, radius) <= EXACT_SUPPORT_LIMIT
        kind = "exact" if small or not klein_in_regime(lat, s) else "klein"
    if kind == "exact":
        return ExactSampler(lat, s).sample_coeffs, "exact"
    return (lambda rng, n: klein_sample_coeffs(lat, s, rng, n)), "klein"


def randomized_finder(lat, body, cfg=None, rng=None, instance=None):
    """Sample y from the discrete Gaussian on the dual of the normalized
    lattice until the slice keeps at least p/2 of the points.

    Raises NotFullDimensionalError when K ∩ L spans a proper subspace and
    AttemptsExhaustedError when the budget runs out.
    """
    cfg = cfg or FinderConfig()
    if rng is None:
        rng = np.random.default_rng(cfg.seed)
    inst = instance or prepare(lat, body, rng)
    if inst.degenerate:
        raise NotFullDimensionalError("not full dimensional; use degenerate_hyperplane")
    d = lat.dim
    s = recommend_s(body, cfg.big_C, vol=inst.vol)
    p = threshold_p(inst.radius, s, cfg.small_c)
    budget = cfg.attempts_for(p)
    # the dual of T L has basis rows B* T^{-1}; pulling back by T^T
    # turns its coefficient vectors into coefficients in B*
    sample_lat = Lattice(dual(lat).basis @ np.linalg.inv(inst.transform))
    zero_mass = sample_lat.det_abs * s ** (-d)
    if zero_mass >= p / 2:
        warnings.warn(f"Pr[y = 0] bound {zero_mass:.3g} is not below p/2 = {p / 2:.3g}; "
                      "raising max_attempts", RuntimeWarning, stacklevel=2)
        budget = min(budget * 10, MAX_ATTEMPTS_CAP)
    draw, _ = _sampler(sample_lat, s, cfg.sampler)
    need = Fraction(p) / 2
    total = len(inst.points)
    used = 0
    while used < budget:
        n = min(cfg.batch, budget - used)
        ks = draw(rng, n)
        counts = _kernels.count_orthogonal(inst.points.coeffs, ks)
        for i in range(n):
            if not ks[i].any():
                continue
            if Fraction(int(counts[i]), total) >= need:
                return _result(lat, ks[i], counts[i], total, "randomized", used + i + 1)
        used += n
    raise AttemptsExhaustedError(f"attempts exhausted after {budget} samples")


# -- degenerate branch ------------------------------------------------------------


def degenerate_hyperplane(lat, ps):
    """A dual vector orthogonal to every point of a rank-deficient set."""
    k = integer_normal_coeffs(ps.coeffs.tolist(), lat.dim)
    if k is None:
        raise FullRankError("points span the whole lattice")
    on = int(_kernels.count_orthogonal(ps.coeffs, np.array([k], dtype=np.int64))[0])
    assert on == len(ps), "integer normal is not orthogonal to the point set"
    return _result(lat, k, on, len(ps), "degenerate")


# -- deterministic oracles ------------------------------------------------------------


def _canonical(normals):
    """Primitive, sign-normalized, deduplicated, lexicographically sorted rows."""
    k = np.asarray(normals, dtype=np.int64)
    k = k[np.any(k != 0, axis=1)]
    if k.shape[0] == 0:
        return k
    g = np.gcd.reduce(np.abs(k), axis=1)
    k = k // g[:, None]
    first = k[np.arange(k.shape[0]), np.argmax(k != 0, axis=1)]
    k = k * np.where(first < 0, -1, 1)[:, None]
    return np.unique(k, axis=0)  # unique sorts lexicographically


def _pick_best(lat, ps, cands, method):
    counts = _kernels.count_orthogonal(ps.coeffs, cands)
    i = int(np.argmax(counts))  # first maximum = lexicographically smallest
    return _result(lat, cands[i], counts[i], len(ps), method)


def _directions(ps):
    return _canonical(ps.coeffs)


def _cross_normals(sub):
    """Integer normals of batches of (d-1) x d integer matrices via signed minors."""
    m, r, d = sub.shape
    out = np.empty((m, d), dtype=np.int64)
    for j in range(d):
        minor = np.delete(sub, j, axis=2).astype(np.float64)
        det = np.linalg.det(minor) if r else np.ones(m)
        out[:, j] = np.rint(det).astype(np.int64) * (-1) ** j
    bad = np.any(np.einsum("mrd,md->mr", sub, out) != 0, axis=1)
    for i in np.flatnonzero(bad):  # float rounding; redo exactly
        out[i] = _exact_cross(sub[i].tolist())
    return out


def _int_det(m):
    """Bareiss fraction-free determinant of a square integer matrix."""
    m = [list(map(int, r)) for r in m]
    n, sign, prev = len(m), 1, 1
    for i in range(n - 1):
        if m[i][i] == 0:
            swap = next((r for r in range(i + 1, n) if m[r][i] != 0), None)
            if swap is None:
                return 0
            m[i], m[swap] = m[swap], m[i]
            sign = -sign
        for r in range(i + 1, n):
            for c in range(i + 1, n):
                m[r][c] = (m[r][c] * m[i][i] - m[r][i] * m[i][c]) // prev
        prev = m[i][i]
    return sign * m[-1][-1] if n else 1


def _exact_cross(rows):
    d = len(rows[0])
    return [(-1) ** j * _int_det([r[:j] + r[j + 1:] for r in rows]) for j in range(d)]


def spanned_normals(ps, max_subsets=EXACT_MAX_SUBSETS):
    """Primitive normals of every hyperplane spanned by d-1 points of ``ps``."""
    d = ps.dim
    dirs = _directions(ps)
    n_sub = math.comb(dirs.shape[0], d - 1)
    if n_sub > max_subsets:
        raise BudgetExceededError(f"{n_sub} point subsets exceed the exact-oracle budget")
    if d == 1 or n_sub == 0:
        return np.zeros((0, d), dtype=np.int64)
    idx = np.array(list(combinations(range(dirs.shape[0]), d - 1)), dtype=np.int64)
    chunks = []
    for start in range(0, idx.shape[0], 100_000):
        chunks.append(_cross_normals(dirs[idx[start:start + 100_000]]))
    return _canonical(np.vstack(chunks))


def default_norm_bound(lat, target=DUAL_SEARCH_TARGET):
    """Radius whose dual ball holds roughly ``target`` points, at least the basis norms."""
    dl = dual(lat)
    d = lat.dim
    from .gaussian import ball_volume

    r = (target * dl.det_abs / ball_volume(d)) ** (1.0 / d)
    return max(r, float(np.linalg.norm(dl.basis, axis=1).max()) * (1 + 1e-9))


def _dual_candidates(lat, norm_bound):
    dl = dual(lat)
    coeffs, _ = _kernels.fp_enumerate(dl.mu, dl.gram_schmidt_norms**2, np.zeros(lat.dim),
                                      float(norm_bound) ** 2, 10**7)
    return _canonical(coeffs)


def best_slice_dual_search(lat, body, norm_bound=None, ps=None):
    """Best hyperplane among dual vectors of norm <= ``norm_bound``."""
    if ps is None:
        ps = enumerate_in_body(lat, body)
    if norm_bound is None:
        norm_bound = default_norm_bound(lat)
    cands = _dual_candidates(lat, norm_bound)
    if cands.shape[0] == 0:
        raise NoCandidatesError(f"no nonzero dual vectors of norm <= {norm_bound}")
    return _pick_best(lat, ps, cands, "dual_search")


def best_slice_exact(lat, body, ps=None, max_subsets=EXACT_MAX_SUBSETS):
    """The exact maximum of |K ∩ L ∩ y-perp| over nonzero dual vectors y.

    An optimal hyperplane may be taken to be spanned by d-1 independent
    points of K ∩ L (otherwise any hyperplane through their span does at
    least as well), so the candidates are the normals of all such subsets,
    plus the dual basis and a short-vector dual search.  Ties go to the
    lexicographically smallest primitive dual coefficient vector.
    """
    if ps is None:
        ps = enumerate_in_body(lat, body)
    d = lat.dim
    if len(ps) > EXACT_MAX_POINTS or d > EXACT_MAX_DIM:
        raise BudgetExceededError("instance too large for the exact oracle")
    if ps.rank() < d:
        return degenerate_hyperplane(lat, ps)
    cands = np.vstack([
        spanned_normals(ps, max_subsets),
        np.eye(d, dtype=np.int64),
        _dual_candidates(lat, default_norm_bound(lat, 2000)),
    ])
    return _pick_best(lat, ps, _canonical(cands), "exact_oracle")


# -- bound verification ---------------------------------------------------------------


@dataclass
class BoundReport:
    body_id: str
    d: int
    vol: float
    vol_err: float
    circumradius: float
    s_used: float
    p_threshold: float
    best_ratio: Fraction
    best_method: str
    ratio_randomized: Optional[Fraction]
    attempts: Optional[int]
    implied_c_theorem: Optional[float]
    implied_c_err: Optional[float]
    implied_alpha_q1: Optional[float]
    implied_alpha_err: Optional[float]
    ahz_baseline: float
    c_ahz: float
    degenerate: bool
    john: bool
    best_normal: tuple
    randomized_normal: Optional[tuple]
    version: str = __version__

    CSV_COLUMNS = ("body_id", "d", "vol", "vol_err", "circumradius", "s", "p",
                   "best_ratio_num", "best_ratio_den", "method", "implied_c_theorem",
                   "implied_alpha_q1", "attempts", "version")

    def check(self):
        """Recompute the implied constants from the stored fields."""
        r = float(self.best_ratio)
        if self.implied_c_theorem is not None:
            want = r * self.d * self.vol ** (1.0 / (self.d - 1))
            assert math.isclose(self.implied_c_theorem, want, rel_tol=1e-9)
        if self.implied_alpha_q1 is not None:
            assert math.isclose(self.implied_alpha_q1, r * self.vol ** (1.0 / self.d), rel_tol=1e-9)
        assert math.isclose(self.ahz_baseline, r * self.c_ahz**self.d, rel_tol=1e-9)
        return True

    def csv_row(self):
        def f(v):
            return "" if v is None else repr(float(v))
        return [self.body_id, str(self.d), f(self.vol), f(self.vol_err), f(self.circumradius),
                f(self.s_used), f(self.p_threshold), str(self.best_ratio.numerator),
                str(self.best_ratio.denominator), self.best_method, f(self.implied_c_theorem),
                f(self.implied_alpha_q1), "" if self.attempts is None else str(self.attempts),
                self.version]

    def to_json(self):
        out = {}
        for k, v in self.__dict__.items():
            if isinstance(v, Fraction):
                v = str(v)
            elif isinstance(v, tuple):
                v = list(v)
            out[k] = v
        return out


def verify_bound(lat, body, cfg=None, rng=None, body_id=""):
    """Run the full pipeline on one instance and fill a :class:`BoundReport`."""
    cfg = cfg or FinderConfig()
    if rng is None:
        rng = np.random.default_rng(cfg.seed)
    prep_rng, finder_rng = rng.spawn(2)
    inst = prepare(lat, body, prep_rng)
    d = lat.dim
    s = recommend_s(body, cfg.big_C, vol=inst.vol)
    p = threshold_p(inst.radius, s, cfg.small_c)
    rand = None
    if inst.degenerate:
        best = degenerate_hyperplane(lat, inst.points)
    else:
        try:
            best = best_slice_exact(lat, body, inst.points)
        except BudgetExceededError:
            best = best_slice_dual_search(lat, body, ps=inst.points)
        rand = randomized_finder(lat, body, cfg, finder_rng, instance=inst)
        if best.ratio < rand.ratio:
            raise AssertionError(f"{best.method} ratio {best.ratio} below randomized {rand.ratio}")
    r = float(best.ratio)
    rel = inst.vol_err / inst.vol if inst.vol > 0 else 0.0
    c_thm = c_err = alpha = alpha_err = None
    if best.ratio < 1:
        c_thm = r * d * inst.vol ** (1.0 / (d - 1))
        c_err = c_thm * rel / (d - 1)
    if not inst.degenerate:
        alpha = r * inst.vol ** (1.0 / d)
        alpha_err = alpha * rel / d
    report = BoundReport(
        body_id=body_id, d=d, vol=inst.vol, vol_err=inst.vol_err, circumradius=inst.radius,
        s_used=s, p_threshold=p, best_ratio=best.ratio, best_method=best.method,
        ratio_randomized=None if rand is None else rand.ratio,
        attempts=None if rand is None else rand.attempts,
        implied_c_theorem=c_thm, implied_c_err=c_err,
        implied_alpha_q1=alpha, implied_alpha_err=alpha_err,
        ahz_baseline=r * cfg.c_ahz**d, c_ahz=cfg.c_ahz,
        degenerate=inst.degenerate, john=inst.john, best_normal=best.dual_coeffs,
        randomized_normal=None if rand is None else rand.dual_coeffs,
    )
    report.check()
    return report
