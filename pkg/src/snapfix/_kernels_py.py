"""Pure-Python coverage kernels.

Same contract and candidate order as the compiled ``_kernels`` module, so
the two are interchangeable (and comparable in ``benchmarks/``). Plain
float arithmetic beats numpy here: the inputs are at most a dozen vectors.
"""

from itertools import combinations
from math import sqrt

TINY = 1e-12


def _rows(normals):
    if hasattr(normals, "tolist"):
        normals = normals.tolist()
    rows = [tuple(map(float, r)) for r in normals]
    if rows and len(rows[0]) != 3:
        flat = [v for r in rows for v in r]
        rows = [tuple(flat[i:i + 3]) for i in range(0, len(flat), 3)]
    return rows


def _maxdot(rows, x, y, z):
    return max(a * x + b * y + c * z for a, b, c in rows)


def _witness(rows, eps):
    if not rows:
        return (1.0, 0.0, 0.0)
    for a, b, c in rows:
        if _maxdot(rows, -a, -b, -c) <= eps:
            return (-a, -b, -c)
    m = len(rows)
    for i in range(m):
        ai, bi, ci = rows[i]
        for j in range(i + 1, m):
            aj, bj, cj = rows[j]
            x, y, z = -(ai + aj), -(bi + bj), -(ci + cj)
            r = sqrt(x * x + y * y + z * z)
            if r > TINY:
                x, y, z = x / r, y / r, z / r
                if _maxdot(rows, x, y, z) <= eps:
                    return (x, y, z)
            x = bi * cj - ci * bj
            y = ci * aj - ai * cj
            z = ai * bj - bi * aj
            r = sqrt(x * x + y * y + z * z)
            if r <= TINY:
                continue
            x, y, z = x / r, y / r, z / r
            if _maxdot(rows, x, y, z) <= eps:
                return (x, y, z)
            if _maxdot(rows, -x, -y, -z) <= eps:
                return (-x, -y, -z)
    # all normals parallel: the blocked set misses a whole great circle
    a, b, c = rows[0]
    if abs(a) <= abs(b) and abs(a) <= abs(c):
        s = sqrt(b * b + c * c)
        d = (0.0, -c / s, b / s)
    elif abs(b) <= abs(c):
        s = sqrt(a * a + c * c)
        d = (c / s, 0.0, -a / s)
    else:
        s = sqrt(a * a + b * b)
        d = (-b / s, a / s, 0.0)
    if _maxdot(rows, *d) <= eps:
        return d
    return None


def witness(normals, eps):
    """Return a unit direction ``d`` with ``max(normals @ d) <= eps`` or None."""
    return _witness(_rows(normals), eps)


def covers_sphere(normals, eps):
    return _witness(_rows(normals), eps) is None


def _valid(table, palm, bodies, tips, eps):
    rows = [table[palm]] + [table[b] for b in bodies]
    if _witness(rows, eps) is None:
        return False
    rows += [table[t] for t in tips]
    return _witness(rows, eps) is None


def valid_fixture(normals, palm, bodies, tips, eps):
    """C1 and C2 on facet indices into the unit-normal table ``normals``."""
    if len(bodies) > 7 or len(tips) != len(bodies):
        raise ValueError("at most 7 fingers with one tip each")
    return _valid(_rows(normals), palm, list(bodies), list(tips), eps)


def enumerate_palm(normals, palm, cand_bodies, cand_tips, k, eps, first_only=False):
    """Valid k-subsets of a palm's candidate fingers.

    Subsets are visited in lexicographic order of candidate positions;
    subsets that reuse a body facet are skipped. Returns a list of tuples
    of candidate positions.
    """
    if k < 1 or k > 7:
        raise ValueError("k must be in 1..7")
    table = _rows(normals)
    cb = [int(b) for b in cand_bodies]
    ct = [int(t) for t in cand_tips]
    found = []
    for combo in combinations(range(len(cb)), k):
        bodies = [cb[i] for i in combo]
        if len(set(bodies)) < k:
            continue
        if _valid(table, palm, bodies, [ct[i] for i in combo], eps):
            found.append(combo)
            if first_only:
                break
    return found
