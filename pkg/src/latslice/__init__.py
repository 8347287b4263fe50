"""Discrete Gaussians over lattices and empirical checks of a lattice slicing bound."""
__version__ = "0.1.0"

from ._kernels import BACKEND  # noqa: E402
from .lattice import Lattice, dual, gram_schmidt, integer_normal_of_span, lattice_equal  # noqa: E402
from .bodies import (  # noqa: E402
    Box,
    CrossPolytope,
    Ellipsoid,
    SymmetricHPolytope,
    apply_transform,
    circumradius,
    contains,
    john_normalize,
    mvee,
    volume,
)
from .gaussian import (  # noqa: E402
    exact_sampler,
    klein_sampler,
    orth_prob_lower_bound,
    poisson_check,
    prob_zero,
    rho,
    shifted_theta,
    theta,
)
from .enumeration import PointSet, enumerate_in_body, grid_scan_oracle, slice_count  # noqa: E402
from .slicing import (  # noqa: E402
    BoundReport,
    FinderConfig,
    SliceResult,
    best_slice_dual_search,
    best_slice_exact,
    degenerate_hyperplane,
    randomized_finder,
    recommend_s,
    threshold_p,
    verify_bound,
)
