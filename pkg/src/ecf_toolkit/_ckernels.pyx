# cython: language_level=3
"""Compiled versions of the kernels in ``_pykernels``; same signatures."""

import numpy as np
cimport numpy as cnp
from libc.math cimport fabs
from libc.stdlib cimport malloc, free

cnp.import_array()

BACKEND = "compiled"


cdef inline int _popcount(long long x) nogil:
    cdef int c = 0
    while x:
        x &= x - 1
        c += 1
    return c


cdef double _pairwise(double* buf, Py_ssize_t n) nogil:
    cdef Py_ssize_t i, half
    cdef double s
    if n <= 8:
        s = 0.0
        for i in range(n):
            s += buf[i]
        return s
    half = n // 2
    return _pairwise(buf, half) + _pairwise(buf + half, n - half)


def tau_direct(theta, int m):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] th = np.ascontiguousarray(theta, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] tau = np.zeros(1 << m, dtype=np.float64)
    cdef long long full = (1 << m) - 1
    cdef long long L, comp, sub
    cdef Py_ssize_t k
    cdef double* buf = <double*> malloc((1 << m) * sizeof(double))
    cdef double* thp = &th[0]
    cdef double* taup = &tau[0]
    if buf == NULL:
        raise MemoryError()
    try:
        with nogil:
            for L in range(1, full + 1):
                comp = full & ~L
                sub = 0
                k = 0
                while True:
                    # (-1)**(|I| + 1)
                    if _popcount(sub) & 1:
                        buf[k] = thp[comp | sub]
                    else:
                        buf[k] = -thp[comp | sub]
                    k += 1
                    sub = (sub - L) & L
                    if sub == 0:
                        break
                taup[L] = _pairwise(buf, k)
    finally:
        free(buf)
    return tau


def tau_mobius(theta, int m):
    cdef long long full = (1 << m) - 1
    cdef long long n = 1 << m
    cdef cnp.ndarray[cnp.float64_t, ndim=1] th = np.ascontiguousarray(theta, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] h = np.empty(n, dtype=np.float64)
    cdef long long S, bit
    cdef int b
    for S in range(n):
        h[S] = th[full ^ S]
    with nogil:
        for b in range(m):
            bit = 1 << b
            for S in range(n):
                if S & bit:
                    h[S] -= h[S ^ bit]
        for S in range(n):
            h[S] = -h[S]
        h[0] = 0.0
    return h


def subset_zeta(values, int m):
    cdef long long n = 1 << m
    cdef cnp.ndarray[cnp.float64_t, ndim=1] s = np.array(values, dtype=np.float64, copy=True)
    cdef long long S, bit
    cdef int b
    with nogil:
        for b in range(m):
            bit = 1 << b
            for S in range(n):
                if S & bit:
                    s[S] += s[S ^ bit]
    return s


def subset_max(v, int m):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] vv = np.ascontiguousarray(v, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] mx = np.zeros(1 << m, dtype=np.float64)
    cdef long long lo, S
    cdef int b
    cdef double vb
    with nogil:
        for b in range(m):
            lo = 1 << b
            vb = vv[b]
            for S in range(lo):
                mx[lo + S] = mx[S] if mx[S] > vb else vb
    return mx


def maxlinear_apply(a, z):
    cdef cnp.ndarray[cnp.float64_t, ndim=2] aa = np.ascontiguousarray(a, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] zz = np.ascontiguousarray(z, dtype=np.float64)
    cdef Py_ssize_t m = aa.shape[0], q = aa.shape[1], n = zz.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] x = np.zeros((n, m), dtype=np.float64)
    cdef Py_ssize_t i, j, k
    cdef double v, best
    with nogil:
        for k in range(n):
            for i in range(m):
                best = 0.0
                for j in range(q):
                    v = aa[i, j] * zz[k, j]
                    if v > best:
                        best = v
                x[k, i] = best
    return x


cdef class _Enum:
    cdef double[:, ::1] g
    cdef double[::1] h
    cdef Py_ssize_t p, m
    cdef double tol
    cdef double[:, ::1] ech      # reduced rows, one per depth
    cdef double[::1] rhs
    cdef Py_ssize_t[::1] piv
    cdef list out

    def __init__(self, g, h, double tol):
        self.g = np.ascontiguousarray(g, dtype=np.float64)
        self.h = np.ascontiguousarray(h, dtype=np.float64)
        self.p = self.g.shape[0]
        self.m = self.g.shape[1]
        self.tol = tol
        self.ech = np.zeros((self.m, self.m), dtype=np.float64)
        self.rhs = np.zeros(self.m, dtype=np.float64)
        self.piv = np.zeros(self.m, dtype=np.intp)
        self.out = []

    cdef bint _push(self, Py_ssize_t depth, Py_ssize_t row):
        """Reduce plane `row` against depth earlier pivots; False if dependent."""
        cdef Py_ssize_t c, d, best
        cdef double f, amax
        for c in range(self.m):
            self.ech[depth, c] = self.g[row, c]
        self.rhs[depth] = self.h[row]
        for d in range(depth):
            f = self.ech[depth, self.piv[d]]
            if f != 0.0:
                for c in range(self.m):
                    self.ech[depth, c] -= f * self.ech[d, c]
                self.rhs[depth] -= f * self.rhs[d]
        best = -1
        amax = 1e-9
        for c in range(self.m):
            if fabs(self.ech[depth, c]) > amax:
                amax = fabs(self.ech[depth, c])
                best = c
        if best < 0:
            return False
        f = self.ech[depth, best]
        for c in range(self.m):
            self.ech[depth, c] /= f
        self.rhs[depth] /= f
        self.piv[depth] = best
        return True

    cdef void _leaf(self):
        cdef Py_ssize_t d, e, c, i
        cdef double s
        x = np.zeros(self.m, dtype=np.float64)
        cdef double[::1] xv = x
        # rows are reduced only against earlier pivots: solve from the last row up
        for d in range(self.m - 1, -1, -1):
            s = self.rhs[d]
            for c in range(self.m):
                if c != self.piv[d]:
                    s -= self.ech[d, c] * xv[c]
            xv[self.piv[d]] = s
        for i in range(self.p):
            s = 0.0
            for c in range(self.m):
                s += self.g[i, c] * xv[c]
            if s > self.h[i] + self.tol:
                return
        self.out.append(x)

    cdef void _walk(self, Py_ssize_t depth, Py_ssize_t start):
        cdef Py_ssize_t r
        for r in range(start, self.p - (self.m - depth) + 1):
            if not self._push(depth, r):
                continue
            if depth + 1 == self.m:
                self._leaf()
            else:
                self._walk(depth + 1, r + 1)


def vertex_candidates(g, h, double tol, chunk=None):
    cdef _Enum e = _Enum(g, h, tol)
    if e.m == 0:
        return np.zeros((0, 0))
    e._walk(0, 0)
    if not e.out:
        return np.zeros((0, e.m))
    return np.vstack(e.out)
