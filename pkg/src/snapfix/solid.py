"""Printable fixture solids.

The palm, every finger body and every fingertip is a prism (an
alpha-extrusion) over a planar base polygon lying on a workpiece facet:

* palm: the whole palm facet;
* body: the convex quadrilateral spanned by the middle ``body_shrink``
  fraction of the palm-body edge and of the body-tip edge;
* fingertip: the strip of width ``tip_width`` along the body-tip edge,
  inside the tip facet.

Parts whose bases would overlap on a shared facet are shrunk together
(bisection on a common factor) until they keep a small gap. Each part is
then moved off the workpiece by the clearance along its facet normal, and
the parts are emitted as separate closed shells of one mesh.
"""

from dataclasses import dataclass, field
import math
from typing import Optional

import numpy as np
from scipy.optimize import linprog
from scipy.spatial import ConvexHull, HalfspaceIntersection
from shapely.geometry import MultiPoint, Polygon
from shapely.geometry.polygon import orient

from . import fileio
from .geometry import ear_clip, from_plane, newell_normal, plane_frame, polygon_area, to_plane
from .synth import FixtureError, valid_fixture

CLEARANCE_CAP = 0.2
PART_GAP = 1e-4          # bases closer than this on one facet count as overlapping
SHRINK_ITERATIONS = 20
MIN_AREA = 1e-12


class SolidError(ValueError):
    """The fixture solid cannot be built or fails its checks."""


@dataclass(frozen=True)
class ExtrusionParams:
    """Thicknesses (mm), workpiece gap (mm), body fraction and tip width (mm).

    ``tip_width`` defaults to ``alpha_t``. ``max_tip_width`` caps it, e.g.
    with :attr:`JointFeasibility.max_tip_width`.
    """

    alpha_p: float = 5.0
    alpha_b: float = 5.0
    alpha_t: float = 5.0
    clearance: float = 0.2
    body_shrink: float = 0.8
    tip_width: Optional[float] = None
    max_tip_width: Optional[float] = None
    clearance_cap: float = CLEARANCE_CAP

    def __post_init__(self):
        for name in ("alpha_p", "alpha_b", "alpha_t"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if not 0 <= self.clearance <= self.clearance_cap:
            raise ValueError(f"clearance must lie in [0, {self.clearance_cap}] mm")
        if not 0 < self.body_shrink <= 1:
            raise ValueError("body_shrink must lie in (0, 1]")
        if self.tip_width is not None and not self.tip_width >= 0:
            raise ValueError("tip_width must be non-negative")
        if self.max_tip_width is not None and not self.max_tip_width >= 0:
            raise ValueError("max_tip_width must be non-negative")

    @property
    def effective_tip_width(self):
        b = self.alpha_t if self.tip_width is None else self.tip_width
        if self.max_tip_width is None:
            return b
        return min(b, self.max_tip_width)


def max_fingertip_width(a, theta_c, eta):
    """Widest fingertip whose joint bends by at most ``theta_c`` while
    snapping on: ``a sin(theta_c) / sin(theta_c + eta)`` (law of sines)."""
    s = math.sin(theta_c + eta)
    if s <= 0:
        raise ValueError("theta_c + eta must lie in (0, pi)")
    return a * math.sin(theta_c) / s


@dataclass(frozen=True)
class JointFeasibility:
    """Body-edge length ``a`` (mm), body/tip angle ``eta`` and joint
    threshold angle ``theta_c`` (radians)."""

    a: float
    eta: float
    theta_c: float

    def __post_init__(self):
        if not self.a > 0:
            raise ValueError("a must be positive")
        if not 0 < self.eta < math.pi:
            raise ValueError("eta must lie in (0, pi)")
        if not 0 < self.theta_c < math.pi - self.eta:
            raise ValueError("theta_c must lie in (0, pi - eta)")

    @property
    def max_tip_width(self):
        return max_fingertip_width(self.a, self.theta_c, self.eta)


# -- meshes --------------------------------------------------------------------


@dataclass
class SolidMesh:
    """Indexed triangle mesh made of closed shells.

    ``shells`` holds ``(label, first_face, end_face)`` per shell; shells
    never share vertices.
    """

    vertices: np.ndarray
    faces: np.ndarray
    shells: list = field(default_factory=list)

    def __post_init__(self):
        self.vertices = np.asarray(self.vertices, dtype=np.float64).reshape(-1, 3)
        self.faces = np.asarray(self.faces, dtype=np.int64).reshape(-1, 3)
        if not self.shells:
            self.shells = [("solid", 0, len(self.faces))]

    @property
    def n_shells(self):
        return len(self.shells)

    def shell(self, k):
        label, a, b = self.shells[k]
        f = self.faces[a:b]
        used = np.unique(f)
        remap = np.full(len(self.vertices), -1)
        remap[used] = np.arange(len(used))
        return SolidMesh(self.vertices[used], remap[f], [(label, 0, b - a)])

    def volume(self):
        p = self.vertices[self.faces]
        return float(np.einsum("ij,ij->i", p[:, 0], np.cross(p[:, 1], p[:, 2])).sum() / 6.0)

    def shell_volumes(self):
        return [self.shell(k).volume() for k in range(self.n_shells)]

    def is_watertight(self):
        """Every shell is a closed, consistently oriented sphere-like surface."""
        for _, a, b in self.shells:
            f = self.faces[a:b]
            directed = {}
            for tri in f:
                for u, v in ((tri[0], tri[1]), (tri[1], tri[2]), (tri[2], tri[0])):
                    key = (int(u), int(v))
                    if u == v or key in directed:
                        return False
                    directed[key] = True
            if any((v, u) not in directed for (u, v) in directed):
                return False
            n_v = len(np.unique(f))
            if n_v - len(directed) // 2 + len(f) != 2:
                return False
        return True

    def validate(self):
        if len(self.faces) == 0:
            raise SolidError("empty solid")
        if not self.is_watertight():
            raise SolidError("solid is not watertight")
        if min(self.shell_volumes()) <= 0:
            raise SolidError("solid has a shell with non-positive volume")
        return self

    @classmethod
    def concatenate(cls, meshes):
        verts, faces, shells = [], [], []
        nv = nf = 0
        for m in meshes:
            for label, a, b in m.shells:
                shells.append((label, nf + a, nf + b))
            verts.append(m.vertices)
            faces.append(m.faces + nv)
            nv += len(m.vertices)
            nf += len(m.faces)
        return cls(np.vstack(verts), np.vstack(faces), shells)


def extrude_polygon(L, alpha, label="prism"):
    """Prism of thickness ``alpha`` over the planar polygon ``L``.

    ``L`` is counter-clockwise seen from the side it is extruded towards.
    """
    L = np.asarray(L, dtype=np.float64).reshape(-1, 3)
    if not alpha > 0:
        raise ValueError("extrusion thickness must be positive")
    nn = newell_normal(L)
    if len(L) < 3 or 0.5 * np.linalg.norm(nn) < MIN_AREA:
        raise ValueError("degenerate polygon")
    n = nn / np.linalg.norm(nn)
    k = len(L)
    tris = ear_clip(to_plane(L, L[0], n))
    verts = np.vstack([L, L + alpha * n])
    faces = [(c, b, a) for a, b, c in tris]
    faces += [(a + k, b + k, c + k) for a, b, c in tris]
    for i in range(k):
        j = (i + 1) % k
        faces += [(i, j, j + k), (i, j + k, i + k)]
    return SolidMesh(verts, faces, [(label, 0, len(faces))])


# -- fixture layout ------------------------------------------------------------


def contact_segment(P, f, g):
    """Endpoints of the edge of facet ``f`` shared with facet ``g``.

    Collinear runs of shared edges are joined; when ``f`` and ``g`` meet
    along several runs the longest is used. Endpoints follow the boundary
    orientation of ``f``.
    """
    edges = P.shared_edges(f, g)
    if not edges:
        raise FixtureError(f"facets {f} and {g} share no edge")
    nxt = dict(edges)
    starts = [a for a, _ in edges if a not in {b for _, b in edges}] or [edges[0][0]]
    best = None
    for a in starts:
        b = nxt[a]
        while b in nxt and nxt[b] != a:
            b = nxt[b]
        p, q = P.vertices[a], P.vertices[b]
        if best is None or np.linalg.norm(q - p) > np.linalg.norm(best[1] - best[0]):
            best = (p, q)
    return best


def _lerp(seg, t):
    return seg[0] + t * (seg[1] - seg[0])


def _middle(seg, frac):
    lo = 0.5 * (1 - frac)
    return _lerp(seg, lo), _lerp(seg, 1 - lo)


class _FacetFrame:
    """2D coordinates on a facet plane plus the facet outline."""

    def __init__(self, P, f):
        pts = P.facet_points(f)
        self.origin = pts[0]
        self.normal = P.normals[f]
        self.outline = Polygon(to_plane(pts, self.origin, self.normal))

    def to2d(self, pts):
        return to_plane(np.atleast_2d(pts), self.origin, self.normal)

    def to3d(self, poly):
        poly = orient(poly, 1.0)
        uv = np.asarray(poly.exterior.coords)[:-1]
        return from_plane(uv, self.origin, self.normal)

    def clip(self, poly):
        poly = poly.intersection(self.outline)
        if poly.geom_type != "Polygon":
            parts = [g for g in getattr(poly, "geoms", []) if g.geom_type == "Polygon"]
            if not parts:
                return Polygon()
            poly = max(parts, key=lambda g: g.area)
        return poly.simplify(0.0)


def build_fingertip_quad(e_bt, tip_normal, width, facet_polygon=None):
    """Quadrilateral ``{p1, p2, p2 + v, p1 + v}`` on the tip facet.

    ``v`` is the edge direction crossed with the tip normal, scaled to
    ``width``; with ``facet_polygon`` (3D outline of the tip facet) the
    sign is chosen to point into the facet and the quad is clipped to it.
    Returns the quad counter-clockwise about ``tip_normal``.
    """
    p1, p2 = (np.asarray(p, dtype=float) for p in e_bt)
    n = np.asarray(tip_normal, dtype=float)
    n = n / np.linalg.norm(n)
    e = p2 - p1
    if abs(float(np.dot(e, n))) > 1e-6 * max(1.0, np.linalg.norm(e)):
        raise ValueError("edge does not lie in the tip plane")
    v = np.cross(e, n)
    if np.linalg.norm(v) < 1e-9:
        raise ValueError("degenerate fingertip edge")
    if not width > 0:
        raise ValueError("fingertip width must be positive")
    v = v / np.linalg.norm(v) * width
    quad = np.array([p1, p2, p2 + v, p1 + v])
    if facet_polygon is not None:
        outline = Polygon(to_plane(facet_polygon, p1, n))
        cands = []
        for q in (quad, np.array([p1, p2, p2 - v, p1 - v])):
            clipped = Polygon(to_plane(q, p1, n)).buffer(0).intersection(outline)
            cands.append(clipped)
        best = max(cands, key=lambda g: g.area)
        if best.geom_type != "Polygon" or best.area < MIN_AREA:
            raise ValueError("fingertip does not fit on the tip facet")
        uv = np.asarray(orient(best, 1.0).exterior.coords)[:-1]
        return from_plane(uv, p1, n)
    if np.dot(newell_normal(quad), n) < 0:
        quad = quad[::-1]
    return quad


@dataclass
class Part:
    label: str
    facet: int
    base: np.ndarray
    normal: np.ndarray
    alpha: float

    @property
    def area(self):
        return polygon_area(self.base)

    def solid(self, clearance=0.0):
        return extrude_polygon(self.base + clearance * self.normal, self.alpha, self.label)


class _PartSpec:
    """A part's base as a function of a shrink factor in (0, 1]."""

    def __init__(self, label, facet, frame, alpha, make):
        self.label, self.facet, self.frame, self.alpha, self.make = label, facet, frame, alpha, make

    def polygon(self, s):
        return self.make(s)


def _body_spec(P, frames, palm, k, finger, params):
    j, l = finger
    fr = frames[j]
    e_pb = contact_segment(P, j, palm)
    e_bt = contact_segment(P, j, l)

    def make(s):
        frac = params.body_shrink * s
        pts = np.vstack([*_middle(e_pb, frac), *_middle(e_bt, frac)])
        hull = MultiPoint([tuple(p) for p in fr.to2d(pts)]).convex_hull
        if hull.geom_type != "Polygon":
            return Polygon()
        return fr.clip(hull)

    return _PartSpec(f"body{k}", j, fr, params.alpha_b, make)


def _tip_spec(P, frames, k, finger, params):
    j, l = finger
    fr = frames[l]
    e_bt = contact_segment(P, l, j)
    width = params.effective_tip_width

    def make(s):
        if width <= 0:
            return Polygon()
        seg = _middle(e_bt, s)
        try:
            quad = build_fingertip_quad(seg, fr.normal, width * s, P.facet_points(l))
        except ValueError:
            return Polygon()
        return Polygon(fr.to2d(quad))

    return _PartSpec(f"tip{k}", l, fr, params.alpha_t, make)


def _conflict(polys):
    live = [p for p in polys if not p.is_empty and p.area > MIN_AREA]
    return any(a.distance(b) < PART_GAP for i, a in enumerate(live) for b in live[i + 1:])


def fixture_layout(P, F, params=None, resolve_overlaps=True):
    """Base polygons of all parts of fixture ``F`` on the workpiece surface.

    Parts sharing a facet are shrunk by a common factor, found by
    bisection, until their bases are at least ``PART_GAP`` apart; with
    ``resolve_overlaps=False`` the unshrunk bases are returned. Zero-area
    parts (e.g. tips of width zero) are dropped.
    """
    params = ExtrusionParams() if params is None else params
    frames = {}
    for f in {F.palm, *F.F_B, *F.F_T}:
        frames[f] = _FacetFrame(P, f)
    specs = []
    for k, finger in enumerate(F.fingers):
        specs.append(_body_spec(P, frames, F.palm, k, finger, params))
        specs.append(_tip_spec(P, frames, k, finger, params))

    scale = {id(s): 1.0 for s in specs}
    by_facet = {}
    for s in specs:
        by_facet.setdefault(s.facet, []).append(s)
    for facet, group in sorted(by_facet.items()):
        if not resolve_overlaps or len(group) < 2 or not _conflict([g.polygon(1.0) for g in group]):
            continue
        lo, hi = 0.0, 1.0
        for _ in range(SHRINK_ITERATIONS):
            mid = 0.5 * (lo + hi)
            if _conflict([g.polygon(mid) for g in group]):
                hi = mid
            else:
                lo = mid
        if lo == 0.0:
            raise SolidError(f"cannot separate the parts sharing facet {facet}")
        for g in group:
            scale[id(g)] = lo

    palm_pts = P.facet_points(F.palm)
    parts = [Part("palm", F.palm, palm_pts.copy(), P.normals[F.palm], params.alpha_p)]
    for s in specs:
        poly = s.polygon(scale[id(s)])
        if poly.is_empty or poly.area <= MIN_AREA:
            continue
        parts.append(Part(s.label, s.facet, s.frame.to3d(poly), s.frame.normal, s.alpha))
    return parts


# -- pairwise overlap ----------------------------------------------------------


def _prism_halfspaces(part, clearance):
    """Halfspaces ``A x + b <= 0`` of the convex prism over ``part``."""
    n = part.normal
    base = part.base + clearance * n
    d0 = float(np.mean(base @ n))
    rows = [np.append(-n, d0), np.append(n, -(d0 + part.alpha))]
    k = len(base)
    for i in range(k):
        e = base[(i + 1) % k] - base[i]
        m = np.cross(e, n)
        ln = np.linalg.norm(m)
        if ln < 1e-12:
            continue
        m /= ln
        rows.append(np.append(m, -float(m @ base[i])))
    return np.array(rows)


def _convex_pieces(part):
    """Split a part into parts with convex bases (triangles if needed)."""
    uv = to_plane(part.base, part.base[0], part.normal)
    if Polygon(uv).convex_hull.area - Polygon(uv).area <= 1e-9 * max(Polygon(uv).area, 1.0):
        return [part]
    return [Part(part.label, part.facet, part.base[list(t)], part.normal, part.alpha)
            for t in ear_clip(uv)]


def overlap_volume(a, b, clearance=0.0):
    """Volume of the intersection of two part prisms (mm^3)."""
    total = 0.0
    for pa in _convex_pieces(a):
        for pb in _convex_pieces(b):
            total += _convex_overlap(np.vstack([_prism_halfspaces(pa, clearance),
                                                _prism_halfspaces(pb, clearance)]))
    return total


def _convex_overlap(hs):
    A, b = hs[:, :3], hs[:, 3]
    norms = np.linalg.norm(A, axis=1)
    # Chebyshev center: maximize r with A x + r |A| <= -b
    res = linprog(c=[0, 0, 0, -1], A_ub=np.column_stack([A, norms]), b_ub=-b,
                  bounds=[(None, None)] * 3 + [(0, None)], method="highs")
    if res.status != 0 or res.x[3] <= 1e-7:
        return 0.0
    pts = HalfspaceIntersection(hs, res.x[:3]).intersections
    return float(ConvexHull(pts).volume)


def max_pairwise_overlap(parts, clearance=0.0):
    """Largest intersection volume over all pairs of parts."""
    worst = 0.0
    boxes = [(p.base.min(0) - p.alpha - clearance, p.base.max(0) + p.alpha + clearance)
             for p in parts]
    for i in range(len(parts)):
        for j in range(i + 1, len(parts)):
            lo = np.maximum(boxes[i][0], boxes[j][0])
            hi = np.minimum(boxes[i][1], boxes[j][1])
            if np.any(lo >= hi):
                continue
            worst = max(worst, overlap_volume(parts[i], parts[j], clearance))
    return worst


# -- assembly ------------------------------------------------------------------


def build_fixture_solid(P, F, params=None, check=True):
    """Multi-shell solid of fixture ``F``: palm, then body and tip per finger.

    Raises
    ------
    FixtureError
        If ``check`` and the fixture is not valid.
    SolidError
        If parts cannot be separated or the result is not watertight.
    """
    params = ExtrusionParams() if params is None else params
    if check and not valid_fixture(P, F):
        raise FixtureError("refusing to build a solid for an invalid fixture")
    parts = fixture_layout(P, F, params)
    mesh = SolidMesh.concatenate([p.solid(params.clearance) for p in parts])
    return mesh.validate()


def export_mesh(S, fmt="stl-binary", sink=None):
    """Write a solid as STL (binary or ASCII), OFF or OBJ.

    Returns the bytes when ``sink`` is None.
    """
    if len(S.faces) == 0:
        raise ValueError("refusing to export an empty mesh")
    if not S.is_watertight():
        raise SolidError("refusing to export a non-watertight mesh")
    return fileio.write(S.vertices, S.faces.tolist(), fmt, sink)
