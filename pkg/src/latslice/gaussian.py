"""Gaussian mass on lattices, theta series, and discrete Gaussian samplers.

The width convention is ``rho_s(x) = exp(-pi |x|^2 / s^2)``.

Theta sums are truncated at a radius ``c * s * sqrt(d)`` chosen from
Banaszczyk's tail inequality

    rho_s(L minus the ball of radius c s sqrt(d)) <= C(c)^d rho_s(L),
    C(c) = c sqrt(2 pi e) exp(-pi c^2),

so the recorded ``tail_bound`` is a proof, not an estimate.  On top of that
the series is extended by geometric shells until two consecutive shells are
negligible.
"""
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from . import _kernels
from .errors import BudgetExceededError, OutOfRegimeError
from .lattice import Lattice, dual

MAX_TERMS = 10**8
TAIL_REL = 1e-16
SHELL_GROWTH = 1.25
SHELL_NEGLIGIBLE = 1e-14
RHO1_Z = 1.0864348112133080  # sum_n exp(-pi n^2)


def _check_s(s):
    s = float(s)
    if not (s > 0 and math.isfinite(s)):
        raise ValueError(f"width parameter s must be positive and finite, got {s}")
    return s


def rho(x, s):
    """exp(-pi |x|^2 / s^2) for a vector, or row-wise for a 2-D array."""
    s = _check_s(s)
    x = np.asarray(x, dtype=np.float64)
    sq = np.sum(x * x, axis=-1)
    return np.exp(-math.pi * sq / (s * s))


def tail_constant(c, d):
    """Banaszczyk's bound C(c)^d on the relative mass outside radius c s sqrt(d)."""
    if c <= 1.0 / math.sqrt(2 * math.pi):
        return 1.0
    return math.exp(d * (math.log(c * math.sqrt(2 * math.pi * math.e)) - math.pi * c * c))


def tail_radius_factor(d, rel=TAIL_REL):
    """Smallest c with tail_constant(c, d) <= rel."""
    lo = 1.0 / math.sqrt(2 * math.pi)
    target = math.log(rel)
    f = lambda c: d * (math.log(c * math.sqrt(2 * math.pi * math.e)) - math.pi * c * c) - target
    return brentq(f, lo, 20.0, xtol=1e-12) * (1 + 1e-9)


def ball_volume(d, r=1.0):
    return math.pi ** (d / 2) / math.gamma(d / 2 + 1) * r**d


def _estimate_points(lat, radius):
    """Heuristic lattice point count of a ball, with slack for small radii."""
    return ball_volume(lat.dim, radius + 0.5 * float(lat.gram_schmidt_norms.max())) / lat.det_abs


@dataclass(frozen=True)
class ThetaResult:
    value: float
    truncation_radius: float
    terms_used: int
    tail_bound: float


def _center_for_shift(lat, shift):
    if shift is None:
        return np.zeros(lat.dim)
    return -lat.coords(shift)


def _gauss_series(lat, s, shift=None, rel=TAIL_REL, max_terms=MAX_TERMS):
    s = _check_s(s)
    d = lat.dim
    r0 = tail_radius_factor(d, rel) * s * math.sqrt(d)
    center = _center_for_shift(lat, shift)
    b2 = lat.gram_schmidt_norms**2
    scale = math.pi / (s * s)
    n_shells = 2
    while True:
        radii = r0 * SHELL_GROWTH ** np.arange(n_shells + 1)
        if _estimate_points(lat, radii[-1]) > 4 * max_terms:
            raise BudgetExceededError("theta too expensive")
        sums, counts = _kernels.fp_shell_sums(lat.mu, b2, center, radii**2, scale, max_terms)
        value = 0.0
        for v in sums:
            value += float(v)
        if all(v < SHELL_NEGLIGIBLE * value for v in sums[-2:]):
            break
        n_shells += 2
    radius = float(radii[-1])
    ct = tail_constant(radius / (s * math.sqrt(d)), d)
    return value, radius, int(counts.sum()), ct, float(sums[-1])


def theta(lat, s, max_terms=MAX_TERMS):
    """Total Gaussian mass rho_s(lat) with a certified truncation error."""
    value, radius, terms, ct, last = _gauss_series(lat, s, max_terms=max_terms)
    tail = float(ct / (1.0 - ct) * value)
    return ThetaResult(value=value, truncation_radius=radius, terms_used=terms, tail_bound=tail)


def shifted_theta(lat, shift, s, max_terms=MAX_TERMS):
    """rho_s(lat + shift), truncated like :func:`theta`."""
    shift = np.asarray(shift, dtype=np.float64)
    if shift.shape != (lat.dim,):
        raise ValueError("shift has the wrong dimension")
    return _gauss_series(lat, s, shift=shift, max_terms=max_terms)[0]


def poisson_check(lat, s):
    """Relative gap between rho_s(L) and det(L)^-1 s^d rho_{1/s}(L*)."""
    s = _check_s(s)
    lhs = theta(lat, s).value
    rhs = s**lat.dim / lat.det_abs * theta(dual(lat), 1.0 / s).value
    return abs(lhs - rhs) / lhs


def prob_zero(lat, s):
    """Probability that D_{L,s} returns the zero vector."""
    return 1.0 / theta(lat, s).value


def orth_prob_lower_bound(x_norm, s):
    """Return ``(1 / rho_{s|x|}(Z), min(1, 1/(s|x|)))``.

    The first entry is the exact lower bound on the probability that a dual
    Gaussian sample is orthogonal to a lattice vector of length ``x_norm``;
    the second is its shape without the absolute constant.
    """
    if not x_norm > 0:
        raise ValueError("x_norm must be positive")
    t = _check_s(s) * float(x_norm)
    exact = 1.0 / theta(Lattice.integer(1), t).value
    return exact, min(1.0, 1.0 / t)


def corollary_constant(grid=None):
    """Empirical infimum of exact / closed_form over a grid of s|x| values."""
    if grid is None:
        grid = np.concatenate([np.linspace(0.05, 4.0, 80), np.geomspace(4.0, 200.0, 30)])
    ratios = [e / c for e, c in (orth_prob_lower_bound(t, 1.0) for t in grid)]
    i = int(np.argmin(ratios))
    return float(ratios[i]), float(grid[i])


def layer_masses(lat, x_coeffs, s):
    """Mass of D_{L*,s} on each layer {y : <x, y> = i}.

    ``x_coeffs`` are the integer coordinates of x in the basis of ``lat``, so
    ``<x, y> = x_coeffs . k`` exactly for a dual vector with dual coefficients
    ``k``.  Returns ``(layers, masses)`` with masses normalized to sum to 1.
    """
    a = np.asarray(x_coeffs, dtype=np.int64)
    coeffs, weights = _support(dual(lat), s)
    idx = coeffs @ a
    layers, inv = np.unique(idx, return_inverse=True)
    masses = np.bincount(inv, weights=weights)
    return layers, masses / weights.sum()


def orthogonal_mass(lat, x_coeffs, s):
    """Pr_{y ~ D_{L*,s}}[<x, y> = 0] by layer decomposition."""
    layers, masses = layer_masses(lat, x_coeffs, s)
    hit = np.flatnonzero(layers == 0)
    return float(masses[hit[0]]) if hit.size else 0.0


# -- samplers ---------------------------------------------------------------


def _support(lat, s, max_points=MAX_TERMS // 10):
    """Coefficients and unnormalized weights of the truncated support of D_{L,s}."""
    s = _check_s(s)
    d = lat.dim
    radius = tail_radius_factor(d) * s * math.sqrt(d)
    if _estimate_points(lat, radius) > 4 * max_points:
        raise BudgetExceededError("theta too expensive")
    coeffs, sq = _kernels.fp_enumerate(lat.mu, lat.gram_schmidt_norms**2, np.zeros(d),
                                       radius**2, max_points)
    return coeffs, np.exp(-math.pi * sq / (s * s))


class ExactSampler:
    """Inverse-CDF sampler over the enumerated support of D_{L,s}.

    The support is computed once, so repeated draws are cheap.
    """

    def __init__(self, lat, s):
        self.lattice = lat
        self.s = _check_s(s)
        self.coeffs, weights = _support(lat, s)
        self.cdf = np.cumsum(weights)
        self.cdf /= self.cdf[-1]

    @property
    def support_size(self):
        return self.coeffs.shape[0]

    def sample_coeffs(self, rng, size):
        idx = np.searchsorted(self.cdf, rng.random(size), side="right")
        return self.coeffs[np.minimum(idx, self.coeffs.shape[0] - 1)]


def sample_z(centers, s, rng):
    """One draw of D_{Z,s,c} per center, by rejection from [c - 12s, c + 12s]."""
    centers = np.asarray(centers, dtype=np.float64)
    out = np.empty(centers.shape, dtype=np.int64)
    width = int(math.ceil(12 * s))
    lo = np.floor(centers).astype(np.int64) - width
    span = 2 * width + 2
    todo = np.arange(centers.shape[0])
    while todo.size:
        k = lo[todo] + rng.integers(0, span, size=todo.size)
        u = rng.random(todo.size)
        acc = u < np.exp(-math.pi * (k - centers[todo]) ** 2 / (s * s))
        out[todo[acc]] = k[acc]
        todo = todo[~acc]
    return out


def klein_in_regime(lat, s):
    return s >= float(lat.gram_schmidt_norms.max())


def klein_sample_coeffs(lat, s, rng, size):
    """Klein's nearest-plane sampler, vectorized over ``size`` draws."""
    s = _check_s(s)
    if not klein_in_regime(lat, s):
        raise OutOfRegimeError(
            f"s={s:.6g} is below the largest Gram-Schmidt norm "
            f"{lat.gram_schmidt_norms.max():.6g}; use exact_sampler")
    d = lat.dim
    z = np.zeros((size, d), dtype=np.int64)
    for i in range(d - 1, -1, -1):
        ctr = -(z[:, i + 1:] @ lat.mu[i + 1:, i]) if i < d - 1 else np.zeros(size)
        z[:, i] = sample_z(ctr, s / lat.gram_schmidt_norms[i], rng)
    return z


def exact_sampler(lat, s, rng, size=None):
    """Draw from D_{L,s}; one vector, or an array of ``size`` rows."""
    n = 1 if size is None else int(size)
    pts = lat.points(ExactSampler(lat, s).sample_coeffs(rng, n))
    return pts[0] if size is None else pts


def klein_sampler(lat, s, rng, size=None):
    """Approximate draw from D_{L,s}; requires s >= max Gram-Schmidt norm."""
    n = 1 if size is None else int(size)
    pts = lat.points(klein_sample_coeffs(lat, s, rng, n))
    return pts[0] if size is None else pts
