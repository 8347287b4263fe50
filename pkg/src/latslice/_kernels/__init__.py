"""Hot-loop kernels, compiled when available.

The Cython extension is used unless it failed to build or the environment
variable ``LATSLICE_PURE`` is set to a non-empty value other than ``0``.
Both backends expose ``fp_enumerate``, ``fp_shell_sums`` and
``count_orthogonal`` with identical semantics.
"""
import os

from . import _fallback

fallback = _fallback

try:
    from . import _ckernels as compiled
except ImportError:  # extension not built
    compiled = None

if compiled is not None and os.environ.get("LATSLICE_PURE", "0") in ("", "0"):
    backend = compiled
    BACKEND = "cython"
else:
    backend = _fallback
    BACKEND = "python"

fp_enumerate = backend.fp_enumerate
fp_shell_sums = backend.fp_shell_sums
count_orthogonal = backend.count_orthogonal
