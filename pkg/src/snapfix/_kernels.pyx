# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled coverage kernels.

Mirrors :mod:`snapfix._kernels_py` function for function. The hot path is
``enumerate_palm``, which scans finger subsets of one palm without
touching Python objects until a valid subset is recorded.
"""

from libc.math cimport sqrt, fabs

import numpy as np
cimport numpy as cnp

cnp.import_array()

cdef enum:
    MAXN = 16

cdef double TINY = 1e-12


cdef inline double _maxdot(const double[:, ::1] n, int m, double dx, double dy, double dz) nogil:
    cdef double best = -1e300
    cdef double t
    cdef int i
    for i in range(m):
        t = n[i, 0] * dx + n[i, 1] * dy + n[i, 2] * dz
        if t > best:
            best = t
    return best


cdef int _witness(const double[:, ::1] n, int m, double eps, double* out) nogil:
    """Write an unblocked direction into ``out`` and return 1, else 0."""
    cdef int i, j
    cdef double x, y, z, r, s, a, b, c
    if m == 0:
        out[0] = 1.0
        out[1] = 0.0
        out[2] = 0.0
        return 1
    for i in range(m):
        x = -n[i, 0]
        y = -n[i, 1]
        z = -n[i, 2]
        if _maxdot(n, m, x, y, z) <= eps:
            out[0] = x
            out[1] = y
            out[2] = z
            return 1
    for i in range(m):
        for j in range(i + 1, m):
            x = -(n[i, 0] + n[j, 0])
            y = -(n[i, 1] + n[j, 1])
            z = -(n[i, 2] + n[j, 2])
            r = sqrt(x * x + y * y + z * z)
            if r > TINY:
                x /= r
                y /= r
                z /= r
                if _maxdot(n, m, x, y, z) <= eps:
                    out[0] = x
                    out[1] = y
                    out[2] = z
                    return 1
            x = n[i, 1] * n[j, 2] - n[i, 2] * n[j, 1]
            y = n[i, 2] * n[j, 0] - n[i, 0] * n[j, 2]
            z = n[i, 0] * n[j, 1] - n[i, 1] * n[j, 0]
            r = sqrt(x * x + y * y + z * z)
            if r <= TINY:
                continue
            x /= r
            y /= r
            z /= r
            if _maxdot(n, m, x, y, z) <= eps:
                out[0] = x
                out[1] = y
                out[2] = z
                return 1
            if _maxdot(n, m, -x, -y, -z) <= eps:
                out[0] = -x
                out[1] = -y
                out[2] = -z
                return 1
    # all normals parallel: the blocked set misses a whole great circle
    a = n[0, 0]
    b = n[0, 1]
    c = n[0, 2]
    if fabs(a) <= fabs(b) and fabs(a) <= fabs(c):
        s = sqrt(b * b + c * c)
        x = 0.0
        y = -c / s
        z = b / s
    elif fabs(b) <= fabs(c):
        s = sqrt(a * a + c * c)
        x = c / s
        y = 0.0
        z = -a / s
    else:
        s = sqrt(a * a + b * b)
        x = -b / s
        y = a / s
        z = 0.0
    if _maxdot(n, m, x, y, z) <= eps:
        out[0] = x
        out[1] = y
        out[2] = z
        return 1
    return 0


def witness(normals, double eps):
    """Return a unit direction ``d`` with ``max(normals @ d) <= eps`` or None."""
    cdef const double[:, ::1] n = np.ascontiguousarray(normals, dtype=np.float64).reshape(-1, 3)
    cdef double out[3]
    cdef int found
    with nogil:
        found = _witness(n, n.shape[0], eps, out)
    if found:
        return (out[0], out[1], out[2])
    return None


def covers_sphere(normals, double eps):
    cdef const double[:, ::1] n = np.ascontiguousarray(normals, dtype=np.float64).reshape(-1, 3)
    cdef double out[3]
    cdef int found
    with nogil:
        found = _witness(n, n.shape[0], eps, out)
    return not found


cdef inline int _valid(const double[:, ::1] table, double[:, ::1] buf, int palm,
                       int* bodies, int* tips, int k, double eps) nogil:
    cdef int i, m
    cdef double out[3]
    m = 0
    buf[m, 0] = table[palm, 0]
    buf[m, 1] = table[palm, 1]
    buf[m, 2] = table[palm, 2]
    m += 1
    for i in range(k):
        buf[m, 0] = table[bodies[i], 0]
        buf[m, 1] = table[bodies[i], 1]
        buf[m, 2] = table[bodies[i], 2]
        m += 1
    # C2 first: palm and bodies alone must leave a serving direction
    if not _witness(buf, m, eps, out):
        return 0
    for i in range(k):
        buf[m, 0] = table[tips[i], 0]
        buf[m, 1] = table[tips[i], 1]
        buf[m, 2] = table[tips[i], 2]
        m += 1
    return not _witness(buf, m, eps, out)


def valid_fixture(normals, int palm, bodies, tips, double eps):
    """C1 and C2 on facet indices into the unit-normal table ``normals``."""
    cdef const double[:, ::1] table = np.ascontiguousarray(normals, dtype=np.float64)
    cdef double[:, ::1] buf = np.empty((MAXN, 3), dtype=np.float64)
    cdef int k = len(bodies)
    cdef int b[8]
    cdef int t[8]
    cdef int i
    if k > 7 or len(tips) != k:
        raise ValueError("at most 7 fingers with one tip each")
    for i in range(k):
        b[i] = bodies[i]
        t[i] = tips[i]
    return bool(_valid(table, buf, palm, b, t, k, eps))


def enumerate_palm(normals, int palm, cand_bodies, cand_tips, int k,
                   double eps, bint first_only=False):
    """Valid k-subsets of a palm's candidate fingers.

    Subsets are visited in lexicographic order of candidate positions;
    subsets that reuse a body facet are skipped. Returns a list of tuples
    of candidate positions.
    """
    cdef const double[:, ::1] table = np.ascontiguousarray(normals, dtype=np.float64)
    cdef double[:, ::1] buf = np.empty((MAXN, 3), dtype=np.float64)
    cdef cnp.int64_t[::1] cb = np.ascontiguousarray(cand_bodies, dtype=np.int64)
    cdef cnp.int64_t[::1] ct = np.ascontiguousarray(cand_tips, dtype=np.int64)
    cdef int c = cb.shape[0]
    cdef int idx[8]
    cdef int b[8]
    cdef int t[8]
    cdef int i, j, ok, pos
    cdef list found = []
    if k < 1 or k > 7:
        raise ValueError("k must be in 1..7")
    if c < k:
        return found
    for i in range(k):
        idx[i] = i
    with nogil:
        while True:
            ok = 1
            for i in range(k):
                b[i] = <int>cb[idx[i]]
                t[i] = <int>ct[idx[i]]
                for j in range(i):
                    if b[j] == b[i]:
                        ok = 0
            if ok and _valid(table, buf, palm, b, t, k, eps):
                with gil:
                    found.append(tuple([idx[i] for i in range(k)]))
                if first_only:
                    break
            # next combination
            pos = k - 1
            while pos >= 0 and idx[pos] == c - k + pos:
                pos -= 1
            if pos < 0:
                break
            idx[pos] += 1
            for i in range(pos + 1, k):
                idx[i] = idx[i - 1] + 1
    return found
