"""Snapping-fixture synthesis.

A fixture is a palm facet plus fingers; each finger is a body facet next to
the palm and a tip facet next to the body. It is valid when

* C1: the open hemispheres of palm, bodies and tips cover the sphere, so
  the held workpiece cannot translate at all, and
* C2: the hemispheres of palm and bodies alone do not, so a serving
  direction exists along which the fixture snaps on.

:func:`minimal_snapping_fixture` finds a fixture with the fewest fingers
(two-finger scan, three-finger scan, then the circle-class construction
for four). :func:`enumerate_fixtures` visits every valid fixture up to a
finger budget by plain subset search.

Fingers of one fixture sit on pairwise distinct body facets; two fingers
sharing a body would be one physical finger forking into two tips.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations, product
import math
import os
import time
from typing import NamedTuple, Optional

import numpy as np

from . import kernels
from .cover import EPS_ANTI, EPS_COVER, Semicircle, covers_circle

MAX_FINGERS = 4
OBJECTIVES = ("fingers", "weight", "obscuration")


class FixtureError(ValueError):
    """A fixture is structurally inconsistent with its workpiece."""


class Finger(NamedTuple):
    body: int
    tip: int


@dataclass(frozen=True, order=True)
class Fixture:
    """Palm facet id and a sorted tuple of fingers."""

    palm: int
    fingers: tuple = ()

    def __post_init__(self):
        fingers = tuple(sorted(Finger(int(b), int(t)) for b, t in self.fingers))
        if len(set(fingers)) != len(fingers):
            raise FixtureError("fingers of a fixture must be distinct")
        if len(fingers) > MAX_FINGERS:
            raise FixtureError(f"at most {MAX_FINGERS} fingers")
        object.__setattr__(self, "palm", int(self.palm))
        object.__setattr__(self, "fingers", fingers)

    @property
    def n_fingers(self):
        return len(self.fingers)

    @property
    def F_P(self):
        return (self.palm,)

    @property
    def F_B(self):
        return tuple(f.body for f in self.fingers)

    @property
    def F_T(self):
        return tuple(f.tip for f in self.fingers)

    @property
    def F_PB(self):
        return self.F_P + self.F_B

    @property
    def F_PBT(self):
        return self.F_PB + self.F_T

    def to_dict(self):
        return {"palm": self.palm,
                "fingers": [{"body": f.body, "tip": f.tip} for f in self.fingers]}

    @classmethod
    def from_dict(cls, d):
        return cls(d["palm"], tuple((f["body"], f["tip"]) for f in d["fingers"]))


@dataclass(frozen=True)
class QualityMetrics:
    finger_count: int
    weight_proxy: float
    obscuration_proxy: float

    def to_dict(self):
        return {"finger_count": self.finger_count, "weight_proxy": self.weight_proxy,
                "obscuration_proxy": self.obscuration_proxy}


@dataclass
class SynthesisResult:
    fixture: Optional[Fixture] = None
    serving_direction: Optional[np.ndarray] = None
    stats: dict = field(default_factory=dict)

    def __post_init__(self):
        if (self.fixture is None) != (self.serving_direction is None):
            raise ValueError("a fixture comes with its serving direction")

    @property
    def found(self):
        return self.fixture is not None

    def to_dict(self, metrics=None):
        if self.fixture is None:
            return {"palm": None, "fingers": [], "metrics": None, "serving_direction": None}
        d = self.fixture.to_dict()
        d["metrics"] = metrics.to_dict() if metrics is not None else None
        d["serving_direction"] = [float(x) for x in self.serving_direction]
        return d


def default_threads():
    """Thread count from ``SNAPFIX_THREADS``, else 1."""
    try:
        return max(1, int(os.environ.get("SNAPFIX_THREADS", "1")))
    except ValueError:
        return 1


def _map_palms(fn, palms, threads):
    threads = default_threads() if threads is None else max(1, int(threads))
    if threads == 1 or len(palms) < 2:
        return [fn(p) for p in palms]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, palms))


# -- candidates and validity ---------------------------------------------------


def build_candidate_map(P):
    """Candidate fingers per palm: ``M[i] = [(j, l) : j ~ i, l ~ j, l != i]``.

    Sorted by (j, l), so lexicographic subsets of candidate positions are
    lexicographic subsets of fingers.
    """
    M = {}
    for i in range(P.n_facets):
        M[i] = [Finger(j, l) for j in P.neighbors(i) for l in P.neighbors(j) if l != i]
    return M


def distinct_finger_count(M):
    """Number of distinct (body, tip) pairs over all palms; at most 2E."""
    return len({f for cands in M.values() for f in cands})


def check_structure(P, F):
    """Raise :class:`FixtureError` unless ``F`` fits the adjacency of ``P``."""
    n = P.n_facets
    if not 0 <= F.palm < n:
        raise FixtureError(f"palm {F.palm} is not a facet")
    for b, t in F.fingers:
        if not (0 <= b < n and 0 <= t < n):
            raise FixtureError(f"finger ({b}, {t}) references a missing facet")
        if b not in P.neighbors(F.palm):
            raise FixtureError(f"body {b} is not a neighbor of palm {F.palm}")
        if t not in P.neighbors(b):
            raise FixtureError(f"tip {t} is not a neighbor of body {b}")
        if t == F.palm:
            raise FixtureError("a tip cannot lie on the palm facet")


def valid_fixture(P, F, eps=EPS_COVER):
    """C1 and C2 for fixture ``F``; structural violations raise."""
    check_structure(P, F)
    return bool(kernels.valid_fixture(P.normals, F.palm, list(F.F_B), list(F.F_T), eps))


def serving_direction(P, F, eps=EPS_COVER):
    """Translation direction left free by palm and bodies (the C2 witness)."""
    if not valid_fixture(P, F, eps):
        raise FixtureError("serving direction requested for an invalid fixture")
    d = kernels.witness(P.normals[list(F.F_PB)], eps)
    return np.array(d)


# -- Algorithm 1 ---------------------------------------------------------------


def _combo_rank(combo, m):
    """Zero-based lexicographic rank of a k-combination of range(m)."""
    k = len(combo)
    rank, prev = 0, -1
    for pos, c in enumerate(combo):
        for x in range(prev + 1, c):
            rank += math.comb(m - 1 - x, k - 1 - pos)
        prev = c
    return rank


def _scan(P, M, k, eps, threads, stats, key):
    def one(i):
        cands = M[i]
        if len(cands) < k:
            return None, 0
        found = kernels.enumerate_palm(P.normals, i, [c.body for c in cands],
                                       [c.tip for c in cands], k, eps, True)
        if found:
            return Fixture(i, tuple(cands[p] for p in found[0])), _combo_rank(found[0], len(cands)) + 1
        return None, math.comb(len(cands), k)

    palms = list(range(P.n_facets))
    if (threads or default_threads()) == 1:
        for i in palms:
            fx, calls = one(i)
            stats["palms_scanned"] += 1
            stats[key] += calls
            if fx is not None:
                return fx
        return None
    results = _map_palms(one, palms, threads)
    for fx, calls in results:
        stats["palms_scanned"] += 1
        stats[key] += calls
        if fx is not None:
            return fx
    return None


def circle_classes(normals, palm_normal, facets, eps=EPS_ANTI):
    """Group facets by the semicircle their hemisphere cuts from the palm's
    great circle.

    Returns a list of ``(direction, members)`` where ``direction`` is the
    unit projection of the member normals onto the palm plane and
    ``members`` are facet ids ordered from the maximal hemisphere (most
    negative dot with the palm normal, covering most of the palm's
    complement) down. Facets parallel to the palm cut no semicircle and
    are left out.
    """
    p = np.asarray(palm_normal, dtype=float)
    classes = []
    for f in facets:
        n = np.asarray(normals[f], dtype=float)
        m = n - np.dot(n, p) * p
        ln = np.linalg.norm(m)
        if ln <= eps:
            continue
        m = m / ln
        # a second projection removes the error amplified by a short ``m``
        m = m - np.dot(m, p) * p
        m = m / np.linalg.norm(m)
        for c in classes:
            if np.dot(c[0], m) >= 1 - eps:
                c[1].append(f)
                break
        else:
            classes.append((m, [f]))
    out = []
    for m, members in classes:
        members = sorted(set(members), key=lambda f: (float(np.dot(normals[f], p)), f))
        out.append((m, members))
    return out


def class_quadruples(directions, palm_normal, eps=EPS_ANTI):
    """Index quadruples (E1, E2, E3, E4) of circle classes where E1 and E2
    are antipodal and the four semicircles cover the circle."""
    p = np.asarray(palm_normal, dtype=float)
    U = [np.asarray(u, dtype=float) for u in directions]
    out = []
    for a, b in combinations(range(len(U)), 2):
        if np.dot(U[a], U[b]) > -1 + eps:
            continue
        gap = np.cross(p, U[a])
        above = [c for c in range(len(U)) if c not in (a, b) and np.dot(U[c], gap) > eps]
        below = [c for c in range(len(U)) if c not in (a, b) and np.dot(U[c], gap) < -eps]
        for c, d in product(above, below):
            S = [Semicircle(p, U[x]) for x in (a, b, c, d)]
            if covers_circle(S).covered:
                out.append((a, b, c, d))
    return out


def four_fingers_fixture(P, palm, C=None, eps=EPS_COVER, stats=None):
    """Four-finger fixture for ``palm`` built from circle classes, or None.

    The candidates' hemispheres are grouped by the semicircle they cut
    from the great circle bounding the palm's complement. For every pair
    of antipodal classes completed by two more classes to a cover of that
    circle, fingers containing the four classes' maximal facets (as body
    or as tip) are combined and checked with :func:`valid_fixture`.
    """
    C = build_candidate_map(P)[palm] if C is None else [Finger(*c) for c in C]
    p = P.normals[palm]
    facets = sorted({f for c in C for f in c})
    classes = circle_classes(P.normals, p, facets)
    quads = class_quadruples([c[0] for c in classes], p)
    calls = 0
    tried = set()
    for quad in quads:
        tops = [classes[q][1][0] for q in quad]
        options = [[c for c in C if top in c] for top in tops]
        for choice in product(*options):
            fingers = tuple(sorted(set(choice)))
            if len(fingers) != 4 or len({f.body for f in fingers}) != 4 or fingers in tried:
                continue
            tried.add(fingers)
            calls += 1
            if kernels.valid_fixture(P.normals, palm, [f.body for f in fingers],
                                     [f.tip for f in fingers], eps):
                if stats is not None:
                    stats["valid_calls_2_3"] += calls
                return Fixture(palm, fingers)
    if stats is not None:
        stats["valid_calls_2_3"] += calls
    return None


def minimal_snapping_fixture(P, eps=EPS_COVER, threads=None):
    """Fixture with the fewest fingers (at most four), or an empty result.

    Scans two-finger subsets for every palm, then three-finger subsets,
    then the four-finger circle-class construction; within a subphase the
    first fixture in (palm, finger) order wins.
    """
    t0 = time.perf_counter()
    stats = {"palms_scanned": 0, "valid_calls_2_1": 0, "valid_calls_2_2": 0,
             "valid_calls_2_3": 0, "subphase": None}
    M = build_candidate_map(P)
    stats["candidates"] = sum(len(v) for v in M.values())
    fx = None
    for k, key in ((2, "valid_calls_2_1"), (3, "valid_calls_2_2")):
        fx = _scan(P, M, k, eps, threads, stats, key)
        if fx is not None:
            stats["subphase"] = key[-3:].replace("_", ".")
            break
    if fx is None:
        for i in range(P.n_facets):
            stats["palms_scanned"] += 1
            fx = four_fingers_fixture(P, i, M[i], eps, stats)
            if fx is not None:
                stats["subphase"] = "2.3"
                break
    stats["wall_ms"] = (time.perf_counter() - t0) * 1e3
    if fx is None:
        return SynthesisResult(stats=stats)
    return SynthesisResult(fx, serving_direction(P, fx, eps), stats)


# -- Appendix-B enumeration ----------------------------------------------------


def _palm_fixtures(P, M, i, k, eps):
    cands = M[i]
    if len(cands) < k:
        return []
    found = kernels.enumerate_palm(P.normals, i, [c.body for c in cands],
                                   [c.tip for c in cands], k, eps, False)
    return [Fixture(i, tuple(cands[p] for p in combo)) for combo in found]


def enumerate_fixtures(P, max_fingers=MAX_FINGERS, eps=EPS_COVER, threads=None):
    """Yield every valid fixture with at most ``max_fingers`` fingers.

    Order: by palm, then lexicographically by finger tuple. Palms are
    processed in parallel when ``threads`` > 1; the output order does not
    depend on it.
    """
    if max_fingers not in (2, 3, 4):
        raise ValueError("max_fingers must be 2, 3 or 4")
    M = build_candidate_map(P)

    def one(i):
        out = []
        for k in range(2, max_fingers + 1):
            out += _palm_fixtures(P, M, i, k, eps)
        return sorted(out)

    palms = list(range(P.n_facets))
    threads = default_threads() if threads is None else threads
    if threads == 1:
        for i in palms:
            yield from one(i)
        return
    for chunk in _map_palms(one, palms, threads):
        yield from chunk


def minimal_fixtures(P, max_fingers=MAX_FINGERS, eps=EPS_COVER, threads=None):
    """All valid fixtures at the minimal finger count, as ``(k, fixtures)``.

    Finger counts are tried in increasing order, so larger subsets are
    never enumerated when smaller ones suffice. ``k`` is None when no
    fixture with at most ``max_fingers`` fingers exists.
    """
    M = build_candidate_map(P)
    palms = list(range(P.n_facets))
    for k in range(2, max_fingers + 1):
        found = [fx for chunk in _map_palms(lambda i: _palm_fixtures(P, M, i, k, eps),
                                            palms, threads) for fx in chunk]
        if found:
            return k, found
    return None, []


def count_minimal(P, max_fingers=MAX_FINGERS, eps=EPS_COVER, threads=None):
    """``(minimal finger count, number of fixtures at that count)``."""
    k, found = minimal_fixtures(P, max_fingers, eps, threads)
    return k, len(found)


# -- quality -------------------------------------------------------------------


def quality_of(P, F, params=None, resolve_overlaps=True):
    """Weight and obscuration proxies of ``F``.

    ``weight_proxy`` is the sum of base area times extrusion thickness over
    palm, bodies and tips; ``obscuration_proxy`` the sum of base areas.
    By default the bases are those the solid builder uses, after shrinking
    parts that would overlap on a shared facet, so the weight proxy equals
    the solid's volume. ``resolve_overlaps=False`` scores the unshrunk
    bases instead.
    """
    from .solid import ExtrusionParams, fixture_layout

    params = ExtrusionParams() if params is None else params
    parts = fixture_layout(P, F, params, resolve_overlaps)
    weight = sum(part.alpha * part.area for part in parts)
    obscured = sum(part.area for part in parts)
    return QualityMetrics(F.n_fingers, float(weight), float(obscured))


def best_fixture(P, objective="fingers", params=None, max_fingers=MAX_FINGERS,
                 eps=EPS_COVER, threads=None):
    """Minimal-finger fixture minimizing ``objective``, with its metrics.

    Ties go to the first fixture in (palm, finger) order. Returns None when
    no fixture exists.
    """
    if objective not in OBJECTIVES:
        raise ValueError(f"objective must be one of {OBJECTIVES}")
    k, found = minimal_fixtures(P, max_fingers, eps, threads)
    if not found:
        return None
    found = sorted(found)
    if objective == "fingers":
        fx = found[0]
        return fx, quality_of(P, fx, params)
    attr = "weight_proxy" if objective == "weight" else "obscuration_proxy"
    scored = [(getattr(quality_of(P, fx, params), attr), n) for n, fx in enumerate(found)]
    _, n = min(scored)
    return found[n], quality_of(P, found[n], params)
