"""Coverage of the sphere and of great circles by open hemispheres/semicircles.

An open hemisphere with normal ``n`` is ``{d : d . n > 0}``; a family of
them fails to cover the sphere exactly when some nonzero ``d`` has
``d . n_i <= 0`` for every member. The decision procedures search a finite
family of candidate directions that contains a generator of that cone
whenever it is nonzero (see :mod:`snapfix.kernels`), and return the
direction found as a witness.

The ``reduce_*`` functions extract small covering subfamilies: 3 or 4
semicircles for a circle, 3 to 5 hemispheres for a closed hemisphere and
4 to 6 for the whole sphere. They follow the constructive route of the
Helly-type covering lemmas (central projection of a closed hemisphere to
the extended plane, then a Helly search among the projected halfplanes)
and verify every answer with the exact predicates before returning it.
"""

from dataclasses import dataclass
from itertools import combinations
from typing import Optional, Sequence

import numpy as np

from . import kernels
from .geometry import plane_frame

EPS_COVER = 1e-9
EPS_ANTI = 1e-9

__all__ = [
    "EPS_COVER", "EPS_ANTI", "Hemisphere", "Semicircle", "CoverWitness",
    "as_direction", "hemisphere_of", "covers_sphere", "covers_circle",
    "covers_closed_hemisphere", "antipodal", "reduce_cover_sphere",
    "reduce_cover_closed_hemisphere", "reduce_cover_circle",
    "reduce_cover_closed_semicircle", "CoverError",
]


class CoverError(ValueError):
    """A reduction was asked for a family that does not cover its target."""


def as_direction(v):
    d = np.asarray(v, dtype=np.float64).reshape(3)
    n = np.linalg.norm(d)
    if not np.isfinite(n) or n == 0.0:
        raise ValueError("direction must be a finite nonzero vector")
    return d / n


@dataclass(frozen=True)
class Hemisphere:
    """Open unit hemisphere ``{d : d . normal > 0}``."""

    normal: tuple

    def __init__(self, normal):
        object.__setattr__(self, "normal", tuple(float(x) for x in as_direction(normal)))

    @property
    def n(self):
        return np.array(self.normal)

    def complement_interior(self):
        return Hemisphere(-self.n)

    def contains(self, d):
        return float(np.dot(self.normal, d)) > 0.0


@dataclass(frozen=True)
class Semicircle:
    """Open semicircle ``{d on the great circle : d . mid > 0}``."""

    circle_normal: tuple
    mid_direction: tuple

    def __init__(self, circle_normal, mid_direction):
        c = as_direction(circle_normal)
        m = np.asarray(mid_direction, dtype=np.float64)
        if abs(float(np.dot(c, m))) > 1e-9 * max(1.0, np.linalg.norm(m)):
            raise ValueError("mid direction must lie in the circle's plane")
        m = as_direction(m - np.dot(m, c) * c)
        object.__setattr__(self, "circle_normal", tuple(float(x) for x in c))
        object.__setattr__(self, "mid_direction", tuple(float(x) for x in m))

    @classmethod
    def at_angle(cls, circle_normal, angle):
        """Semicircle whose mid direction sits at ``angle`` radians in the
        circle's :func:`~snapfix.geometry.plane_frame`."""
        u, w = plane_frame(circle_normal)
        return cls(circle_normal, np.cos(angle) * u + np.sin(angle) * w)

    @property
    def m(self):
        return np.array(self.mid_direction)


@dataclass(frozen=True)
class CoverWitness:
    covered: bool
    witness: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.covered and self.witness is not None:
            raise ValueError("a covering family has no witness")
        if not self.covered and self.witness is None:
            raise ValueError("an uncovered family needs a witness")

    def __bool__(self):
        return self.covered


def hemisphere_of(facet_or_normal):
    """Blocked translation directions of a contact facet: its outward normal's
    open hemisphere."""
    n = getattr(facet_or_normal, "normal", facet_or_normal)
    return Hemisphere(n)


def _normals(H):
    rows = [h.normal if isinstance(h, Hemisphere) else tuple(as_direction(h)) for h in H]
    return np.array(rows, dtype=np.float64).reshape(-1, 3)


def covers_sphere(H, eps=EPS_COVER):
    """Decide whether the open hemispheres ``H`` cover the unit sphere.

    Directions whose largest dot product with the normals is within ``eps``
    of zero count as uncovered.
    """
    n = _normals(H)
    d = kernels.witness(n, eps)
    if d is None:
        return CoverWitness(True)
    d = np.array(d)
    if len(n) and np.max(n @ d) > eps:
        raise AssertionError("kernel returned an invalid witness")
    return CoverWitness(False, d)


def covers_closed_hemisphere(H, target, eps=EPS_COVER):
    """Whether ``H`` covers the closed complement of the open hemisphere ``target``."""
    return covers_sphere(list(H) + [target], eps)


def _circle_coords(S):
    if not S:
        return None, np.zeros((0, 2))
    c = np.array(S[0].circle_normal)
    for s in S[1:]:
        if np.dot(s.circle_normal, c) < 1 - 1e-9:
            raise ValueError("semicircles must lie on a common great circle")
    u, w = plane_frame(c)
    mids = np.array([s.mid_direction for s in S])
    return (c, u, w), np.column_stack([mids @ u, mids @ w])


def _circle_witness(U, eps):
    """A unit 2D direction ``d`` with ``max(U @ d) <= eps``, or None."""
    if len(U) == 0:
        return np.array([1.0, 0.0])
    cands = [-U, U[:, ::-1] * [-1.0, 1.0], U[:, ::-1] * [1.0, -1.0]]
    for i, j in combinations(range(len(U)), 2):
        s = -(U[i] + U[j])
        ln = np.linalg.norm(s)
        if ln > 1e-12:
            cands.append((s / ln)[None, :])
    for block in cands:
        for d in block:
            d = d / np.linalg.norm(d)
            if np.max(U @ d) <= eps:
                return d
    return None


def covers_circle(S: Sequence[Semicircle], eps=EPS_COVER):
    """Decide whether open semicircles on one great circle cover it.

    The witness, when uncovered, is a 3D unit vector on that circle.
    """
    frame, U = _circle_coords(list(S))
    d = _circle_witness(U, eps)
    if d is None:
        return CoverWitness(True)
    if frame is None:
        return CoverWitness(False, np.array([1.0, 0.0, 0.0]))
    _, u, w = frame
    return CoverWitness(False, d[0] * u + d[1] * w)


def antipodal(a, b, eps=EPS_ANTI):
    """Whether two open hemispheres (or two semicircles on one circle) are
    antipodal: the closure of their union is everything."""
    if isinstance(a, Hemisphere) and isinstance(b, Hemisphere):
        return float(np.dot(a.normal, b.normal)) <= -1 + eps
    if isinstance(a, Semicircle) and isinstance(b, Semicircle):
        if np.dot(a.circle_normal, b.circle_normal) < 1 - 1e-9:
            raise ValueError("semicircles must lie on a common great circle")
        return float(np.dot(a.mid_direction, b.mid_direction)) <= -1 + eps
    raise TypeError("antipodal() needs two hemispheres or two semicircles")


# -- reductions ----------------------------------------------------------------


def _prune(items, is_cover):
    """Greedily drop members while the rest still covers."""
    items = list(items)
    i = 0
    while i < len(items):
        rest = items[:i] + items[i + 1:]
        if rest and is_cover(rest):
            items = rest
        else:
            i += 1
    return items


def reduce_cover_closed_semicircle(S, center, eps=EPS_ANTI):
    """Two or three members of ``S`` covering the closed semicircle centered at
    ``center`` (a unit vector on the common circle).

    Tries the projective route first: the closed semicircle is mapped to
    the extended real line, where each member becomes an open ray and the
    two extreme rays settle coverage. If that fails, the member equal to
    the semicircle's interior is required and two more members cover the
    endpoints.
    """
    S = list(S)
    if not S:
        raise CoverError("empty family cannot cover a closed semicircle")
    c = np.array(S[0].circle_normal)
    w = as_direction(center)
    perp = np.cross(c, w)
    outside = Semicircle(c, -w)

    def check(R):
        return covers_circle(list(R) + [outside]).covered

    # distance, not 1 - dot: the latter is quadratic in the angle
    interior = [s for s in S if np.linalg.norm(s.mid_direction - w) <= eps]
    rest = [s for s in S if s not in interior]
    right = left = None
    for s in rest:
        a, b = float(np.dot(s.mid_direction, w)), float(np.dot(s.mid_direction, perp))
        if b > eps:
            thr = -a / b
            if right is None or thr < right[0]:
                right = (thr, s)
        elif b < -eps:
            thr = -a / b
            if left is None or thr > left[0]:
                left = (thr, s)
    if right and left and check([right[1], left[1]]):
        return [s for s in S if s in (right[1], left[1])]
    if interior and right and left:
        R = [interior[0], right[1], left[1]]
        if check(R):
            return [s for s in S if s in R]
    raise CoverError("family does not cover the closed semicircle")


def reduce_cover_circle(S, eps=EPS_ANTI):
    """Three or four members of a covering family of open semicircles.

    Each member in turn is taken as the pivot; the rest must cover the
    pivot's closed complement, which reduces to two or three members. The
    smallest answer is pruned to a minimal cover, so a four-member result
    is always two antipodal pairs.
    """
    S = list(S)
    if not covers_circle(S).covered:
        raise CoverError("family does not cover the circle")
    best = None
    for p in S:
        others = [s for s in S if s is not p]
        try:
            R = reduce_cover_closed_semicircle(others, -p.m, eps)
        except CoverError:
            continue
        R = [s for s in S if s is p or any(s is r for r in R)]
        if best is None or len(R) < len(best):
            best = R
        if len(best) == 3:
            break
    best = _prune(S if best is None else best, lambda R: covers_circle(R).covered)
    if not covers_circle(best).covered or len(best) not in (3, 4):
        raise AssertionError("circle reduction produced an invalid cover")
    return best


def _plane_cover_triple(g, c, tol):
    """Whether open halfplanes ``g_i . p + c_i > 0`` (three of them) cover R^2."""
    lam = np.cross(g[:, 0], g[:, 1])
    if np.all(lam <= tol) and not np.all(lam >= -tol):
        lam = -lam
    if not np.all(lam >= -tol) or np.max(lam) <= tol:
        return False
    return float(lam @ c) > tol


def reduce_cover_closed_hemisphere(H, target, eps=EPS_ANTI):
    """Three to five members of ``H`` covering the closed complement of the open
    hemisphere ``target``.

    The closed hemisphere is centrally projected to the extended plane,
    where every member not equal to its interior becomes an open halfplane.
    A covering triple of halfplanes (found by Helly search with a Farkas
    certificate) gives three members; a covering parallel pair misses two
    antipodal points at infinity and needs two more. When the interior
    itself is indispensable, the boundary great circle is covered by the
    members' semicircles instead, giving four or five.
    """
    H = list(H)
    target = target if isinstance(target, Hemisphere) else Hemisphere(target)
    if not covers_closed_hemisphere(H, target).covered:
        raise CoverError("family does not cover the closed hemisphere")
    w = -target.n
    e1, e2 = plane_frame(w)

    def check(R):
        return covers_closed_hemisphere(R, target).covered

    def ordered(R):
        return [h for h in H if any(h is r for r in R)]

    # distance, not 1 - dot: the latter is quadratic in the angle
    interior = [h for h in H if np.linalg.norm(h.normal - w) <= eps]
    rest = [h for h in H if not any(h is i for i in interior)]
    if rest:
        N = np.array([h.normal for h in rest])
        g = np.column_stack([N @ e1, N @ e2])
        c = N @ w
        tol = 1e-12
        for tri in combinations(range(len(rest)), 3):
            t = list(tri)
            if _plane_cover_triple(g[t], c[t], tol):
                R = [rest[i] for i in t]
                if check(R):
                    return ordered(R)
        for i, j in combinations(range(len(rest)), 2):
            gi, gj = g[i], g[j]
            if abs(gi[0] * gj[1] - gi[1] * gj[0]) > 1e-12 or gi @ gj >= 0:
                continue
            if np.linalg.norm(gj) * c[i] + np.linalg.norm(gi) * c[j] <= tol:
                continue
            # the pair leaves the two points at infinity along its edges open
            edge = as_direction(-gi[1] * e1 + gi[0] * e2)
            picks = []
            for d in (edge, -edge):
                for h in rest:
                    if np.dot(h.normal, d) > eps:
                        picks.append(h)
                        break
            if len(picks) == 2:
                R = [rest[i], rest[j]] + picks
                if check(R):
                    return ordered(R)
    if interior:
        core = interior[0]
        circle = []
        for h in rest:
            m = h.n - np.dot(h.n, w) * w
            if np.linalg.norm(m) > eps:
                circle.append((Semicircle(w, m), h))
        sc = [s for s, _ in circle]
        if covers_circle(sc).covered:
            picked = reduce_cover_circle(sc)
            R = [core] + [h for s, h in circle if any(s is p for p in picked)]
            if check(R):
                return ordered(R)
    # near-degenerate families can slip between the tolerances above; pruning
    # under the exact predicate still gives a minimal cover
    R = _prune(H, check)
    if len(R) <= 5:
        return ordered(R)
    raise CoverError("no cover of the closed hemisphere with at most five members")


def reduce_cover_sphere(H, eps=EPS_ANTI):
    """Four to six members of a family of open hemispheres covering the sphere.

    Each member is tried as the pivot whose closed complement the others
    must cover; the smallest answer is pruned to a minimal cover, so a
    six-member result consists of three antipodal pairs.
    """
    H = list(H)
    if not covers_sphere(H).covered:
        raise CoverError("family does not cover the sphere")
    best = None
    for p in H:
        others = [h for h in H if h is not p]
        try:
            R = reduce_cover_closed_hemisphere(others, p, eps)
        except CoverError:
            continue
        R = [h for h in H if h is p or any(h is r for r in R)]
        if best is None or len(R) < len(best):
            best = R
        if len(best) == 4:
            break
    best = _prune(H if best is None else best, lambda R: covers_sphere(R).covered)
    if not covers_sphere(best).covered or len(best) not in (4, 5, 6):
        raise AssertionError("sphere reduction produced an invalid cover")
    return best
