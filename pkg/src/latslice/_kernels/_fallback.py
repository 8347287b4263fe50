"""Pure numpy implementations of the hot loops.

Fincke-Pohst enumeration is run breadth-first, one level at a time, with the
tree split at the outermost coordinate so memory stays proportional to one
subtree.  Output order is lexicographic in (c[k-1], ..., c[0]), identical to
the depth-first order of the compiled kernel.
"""
import numpy as np

from ..errors import BudgetExceededError

_EPS = 1e-9


def _level_bounds(ctr, rem, bstar2_j):
    w = np.sqrt(np.maximum(rem, 0.0) / bstar2_j)
    lo = np.ceil(ctr - w - _EPS).astype(np.int64)
    hi = np.floor(ctr + w + _EPS).astype(np.int64)
    return lo, hi


def _expand(lo, hi):
    cnt = np.maximum(hi - lo + 1, 0)
    parent = np.repeat(np.arange(lo.shape[0]), cnt)
    starts = np.cumsum(cnt) - cnt
    offs = np.arange(parent.shape[0]) - np.repeat(starts, cnt)
    return parent, lo[parent] + offs


def _subtrees(mu, bstar2, center, radius2, max_nodes):
    """Yield (coeffs, sqnorms) for each outermost coefficient value in order."""
    k = bstar2.shape[0]
    top = k - 1
    lo, hi = _level_bounds(np.array([center[top]]), np.array([radius2]), bstar2[top])
    for v in range(int(lo[0]), int(hi[0]) + 1):
        coeffs = np.full((1, k), 0, dtype=np.int64)
        coeffs[0, top] = v
        above = np.array([bstar2[top] * (v - center[top]) ** 2])
        if above[0] > radius2:
            continue
        for level in range(top - 1, -1, -1):
            y = coeffs[:, level + 1:] - center[level + 1:]
            ctr = center[level] - y @ mu[level + 1:, level]
            lo_l, hi_l = _level_bounds(ctr, radius2 - above, bstar2[level])
            parent, vals = _expand(lo_l, hi_l)
            if vals.shape[0] > max_nodes:
                raise BudgetExceededError("enumeration too expensive")
            q = above[parent] + bstar2[level] * (vals - ctr[parent]) ** 2
            keep = q <= radius2
            coeffs = coeffs[parent[keep]]
            coeffs[:, level] = vals[keep]
            above = q[keep]
            if coeffs.shape[0] == 0:
                break
        if coeffs.shape[0]:
            yield coeffs, above


def fp_enumerate(mu, bstar2, center, radius2, max_points):
    mu = np.ascontiguousarray(mu, dtype=np.float64)
    bstar2 = np.ascontiguousarray(bstar2, dtype=np.float64)
    center = np.ascontiguousarray(center, dtype=np.float64)
    k = bstar2.shape[0]
    chunks, norms, total = [], [], 0
    for coeffs, q in _subtrees(mu, bstar2, center, float(radius2), 4 * max_points):
        total += coeffs.shape[0]
        if total > max_points:
            raise BudgetExceededError("enumeration too expensive")
        chunks.append(coeffs)
        norms.append(q)
    if not chunks:
        return np.zeros((0, k), dtype=np.int64), np.zeros(0)
    return np.concatenate(chunks), np.concatenate(norms)


def fp_shell_sums(mu, bstar2, center, bounds2, scale, max_points):
    """Gaussian mass exp(-scale*q) per shell; shell i is bounds2[i-1] < q <= bounds2[i]."""
    mu = np.ascontiguousarray(mu, dtype=np.float64)
    bstar2 = np.ascontiguousarray(bstar2, dtype=np.float64)
    center = np.ascontiguousarray(center, dtype=np.float64)
    edges = np.asarray(bounds2, dtype=np.float64)
    sums = np.zeros(edges.shape[0])
    counts = np.zeros(edges.shape[0], dtype=np.int64)
    visited = 0
    for _, q in _subtrees(mu, bstar2, center, float(edges[-1]), 4 * max_points):
        visited += q.shape[0]
        if visited > max_points:
            raise BudgetExceededError("theta too expensive")
        q = np.minimum(q, edges[-1])
        shell = np.searchsorted(edges, q, side="left")
        vals = np.exp(-scale * q)
        for i in np.unique(shell):
            v = vals[shell == i]
            # sequential order, matching the compiled loop
            sums[i] = np.cumsum(np.concatenate(([sums[i]], v)))[-1]
            counts[i] += v.shape[0]
    return sums, counts


def count_orthogonal(coeffs, normals, chunk=4096):
    coeffs = np.ascontiguousarray(coeffs, dtype=np.int64)
    normals = np.ascontiguousarray(normals, dtype=np.int64)
    out = np.empty(normals.shape[0], dtype=np.int64)
    for start in range(0, normals.shape[0], chunk):
        block = normals[start:start + chunk]
        out[start:start + chunk] = np.count_nonzero(coeffs @ block.T == 0, axis=0)
    return out

