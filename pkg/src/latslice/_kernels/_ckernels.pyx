# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled Fincke-Pohst enumeration and orthogonality counting."""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, ceil, floor, exp

from ..errors import BudgetExceededError

cnp.import_array()

cdef double _EPS = 1e-9


cdef inline void _bounds(double ctr, double rem, double b2, long *lo, long *hi) noexcept:
    cdef double w = sqrt(rem / b2) if rem > 0.0 else 0.0
    lo[0] = <long>ceil(ctr - w - _EPS)
    hi[0] = <long>floor(ctr + w + _EPS)


cdef class _Walker:
    """Depth-first walk over lattice coefficients inside a ball."""
    cdef int k
    cdef const double[:, ::1] mu
    cdef const double[::1] b2
    cdef const double[::1] center
    cdef double radius2
    cdef long[::1] c
    cdef long[::1] hi
    cdef double[::1] ctr
    cdef double[::1] above
    cdef int level
    cdef bint done

    def __cinit__(self, const double[:, ::1] mu, const double[::1] b2, const double[::1] center, double radius2):
        self.k = b2.shape[0]
        self.mu = mu
        self.b2 = b2
        self.center = center
        self.radius2 = radius2
        self.c = np.zeros(self.k, dtype=np.int_)
        self.hi = np.zeros(self.k, dtype=np.int_)
        self.ctr = np.zeros(self.k, dtype=np.float64)
        self.above = np.zeros(self.k, dtype=np.float64)
        cdef long lo, h
        self.level = self.k - 1
        self.ctr[self.level] = center[self.level]
        self.above[self.level] = 0.0
        _bounds(center[self.level], radius2, b2[self.level], &lo, &h)
        self.c[self.level] = lo
        self.hi[self.level] = h
        self.done = False

    cdef bint next(self, double *q_out) noexcept:
        """Advance to the next point; returns False when exhausted."""
        cdef int lvl, i, nl
        cdef double diff, q, s
        cdef long lo, h
        while True:
            lvl = self.level
            if self.c[lvl] > self.hi[lvl]:
                lvl += 1
                if lvl == self.k:
                    self.done = True
                    return False
                self.level = lvl
                self.c[lvl] += 1
                continue
            diff = self.c[lvl] - self.ctr[lvl]
            q = self.above[lvl] + self.b2[lvl] * diff * diff
            if q > self.radius2:
                self.c[lvl] += 1
                continue
            if lvl == 0:
                q_out[0] = q
                self.c[0] += 1
                return True
            nl = lvl - 1
            s = self.center[nl]
            for i in range(nl + 1, self.k):
                s -= (self.c[i] - self.center[i]) * self.mu[i, nl]
            self.ctr[nl] = s
            self.above[nl] = q
            _bounds(s, self.radius2 - q, self.b2[nl], &lo, &h)
            self.c[nl] = lo
            self.hi[nl] = h
            self.level = nl


def fp_enumerate(mu, bstar2, center, double radius2, long max_points):
    cdef const double[:, ::1] m = np.ascontiguousarray(mu, dtype=np.float64)
    cdef const double[::1] b = np.ascontiguousarray(bstar2, dtype=np.float64)
    cdef const double[::1] t = np.ascontiguousarray(center, dtype=np.float64)
    cdef int k = b.shape[0]
    cdef _Walker w = _Walker(m, b, t, radius2)
    cdef long cap = 1024, n = 0
    cdef int j
    cdef double q
    out = np.empty((cap, k), dtype=np.int64)
    norms = np.empty(cap, dtype=np.float64)
    cdef cnp.int64_t[:, ::1] ov = out
    cdef double[::1] nv = norms
    while w.next(&q):
        if n >= max_points:
            raise BudgetExceededError("enumeration too expensive")
        if n == cap:
            cap *= 2
            out = np.resize(out, (cap, k))
            norms = np.resize(norms, cap)
            ov = out
            nv = norms
        # c[0] was already advanced past the emitted point
        ov[n, 0] = w.c[0] - 1
        for j in range(1, k):
            ov[n, j] = w.c[j]
        nv[n] = q
        n += 1
    return out[:n].copy(), norms[:n].copy()


def fp_shell_sums(mu, bstar2, center, bounds2, double scale, long max_points):
    cdef const double[:, ::1] m = np.ascontiguousarray(mu, dtype=np.float64)
    cdef const double[::1] b = np.ascontiguousarray(bstar2, dtype=np.float64)
    cdef const double[::1] t = np.ascontiguousarray(center, dtype=np.float64)
    cdef const double[::1] edges = np.ascontiguousarray(bounds2, dtype=np.float64)
    cdef Py_ssize_t nb = edges.shape[0], sh
    cdef _Walker w = _Walker(m, b, t, edges[nb - 1])
    sums = np.zeros(nb, dtype=np.float64)
    counts = np.zeros(nb, dtype=np.int64)
    cdef double[::1] sv = sums
    cdef cnp.int64_t[::1] cv = counts
    cdef long visited = 0
    cdef double q
    while w.next(&q):
        visited += 1
        if visited > max_points:
            raise BudgetExceededError("theta too expensive")
        sh = 0
        while q > edges[sh]:
            sh += 1
        sv[sh] += exp(-scale * q)
        cv[sh] += 1
    return sums, counts


def count_orthogonal(coeffs, normals):
    cdef const cnp.int64_t[:, ::1] a = np.ascontiguousarray(coeffs, dtype=np.int64)
    cdef const cnp.int64_t[:, ::1] y = np.ascontiguousarray(normals, dtype=np.int64)
    cdef Py_ssize_t n = a.shape[0], m = y.shape[0], d = a.shape[1]
    cdef Py_ssize_t i, j, l
    cdef cnp.int64_t acc, cnt
    out = np.empty(m, dtype=np.int64)
    cdef cnp.int64_t[::1] ov = out
    with nogil:
        for j in range(m):
            cnt = 0
            for i in range(n):
                acc = 0
                for l in range(d):
                    acc = acc + a[i, l] * y[j, l]
                if acc == 0:
                    cnt = cnt + 1
            ov[j] = cnt
    return out
