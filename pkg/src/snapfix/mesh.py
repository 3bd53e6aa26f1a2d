"""Polyhedral workpieces: loading, validation, facet merging, adjacency.

A :class:`Polyhedron` is an immutable closed, consistently oriented
2-manifold whose facets are planar simple polygons. Meshes come in
triangulated (:func:`load_mesh`) and are normalized with
:func:`merge_coplanar_facets`, after which no two edge-adjacent facets are
coplanar.
"""

from dataclasses import dataclass
from functools import cached_property
import math

import numpy as np
from scipy.spatial import cKDTree
from shapely.geometry import LinearRing

from . import fileio
from .fileio import ParseError
from .geometry import newell_normal, to_plane, triangulate_polygon

ANGLE_TOL = 1e-6
DIST_TOL = 1e-6


class MeshError(ValueError):
    """Base class for invalid-workpiece errors."""


class NonManifoldError(MeshError):
    pass


class OpenBoundaryError(MeshError):
    pass


class OrientationError(MeshError):
    pass


class NonSimpleFacetError(MeshError):
    pass


__all__ = [
    "ANGLE_TOL", "DIST_TOL", "Facet", "Polyhedron", "MeshError", "ParseError",
    "NonManifoldError", "OpenBoundaryError", "OrientationError",
    "NonSimpleFacetError", "load_mesh", "merge_coplanar_facets", "genus",
    "neighbors", "weld_vertices",
]


@dataclass(frozen=True)
class Facet:
    id: int
    normal: np.ndarray
    offset: float
    area: float
    neighbors: tuple
    vertices: tuple

    @property
    def plane(self):
        return self.normal, self.offset


class Polyhedron:
    """Closed oriented polyhedral surface with planar polygon facets.

    Parameters
    ----------
    vertices : array_like, shape (V, 3)
        Coordinates in millimeters. Vertices not referenced by any facet
        are rejected, so V always counts the surface's vertices.
    facets : sequence of sequence of int
        Cyclic vertex-index lists, counter-clockwise seen from outside.
    triangle_count : int, optional
        Number of triangles the surface had before merging; defaults to the
        facet count of a fully triangulated surface.
    source_facets : sequence of tuple of int, optional
        For merged surfaces, the original facet ids that make up each facet.
    dist_tol : float
        Planarity tolerance for polygon facets, in mm.

    Raises
    ------
    OpenBoundaryError, NonManifoldError, OrientationError, NonSimpleFacetError
    """

    def __init__(self, vertices, facets, *, triangle_count=None,
                 source_facets=None, dist_tol=DIST_TOL):
        v = np.array(vertices, dtype=np.float64).reshape(-1, 3)
        v.setflags(write=False)
        self.vertices = v
        self.facets = tuple(tuple(int(i) for i in f) for f in facets)
        if not self.facets:
            raise MeshError("polyhedron has no facets")
        used = {i for f in self.facets for i in f}
        if used != set(range(len(v))):
            raise MeshError("vertex list contains unreferenced vertices")
        self._edge_owner = self._check_manifold()
        self._compute_planes(dist_tol)
        if triangle_count is None:
            triangle_count = sum(len(f) - 2 for f in self.facets)
        self.triangle_count = int(triangle_count)
        self.source_facets = (tuple(tuple(s) for s in source_facets)
                              if source_facets is not None
                              else tuple((i,) for i in range(len(self.facets))))

    # -- construction checks -------------------------------------------------

    def _check_manifold(self):
        owner = {}
        for fi, f in enumerate(self.facets):
            if len(f) < 3 or len(set(f)) != len(f):
                raise NonSimpleFacetError(f"facet {fi} repeats a vertex or has < 3 vertices")
            for a, b in zip(f, f[1:] + f[:1]):
                if (a, b) in owner:
                    if (b, a) in owner:
                        raise NonManifoldError(f"edge ({a}, {b}) is used by more than two facets")
                    raise OrientationError(
                        f"edge ({a}, {b}) traversed twice in the same direction")
                owner[(a, b)] = fi
        for (a, b) in owner:
            if (b, a) not in owner:
                raise OpenBoundaryError(f"edge ({a}, {b}) has a single incident facet")
        return owner

    def _compute_planes(self, dist_tol):
        normals, offsets, areas = [], [], []
        for fi, f in enumerate(self.facets):
            pts = self.vertices[list(f)]
            nn = newell_normal(pts)
            twice_area = float(np.linalg.norm(nn))
            if twice_area <= 1e-300:
                raise NonSimpleFacetError(f"facet {fi} has zero area")
            n = nn / twice_area
            d = float(np.mean(pts @ n))
            if len(f) > 3:
                dev = np.max(np.abs(pts @ n - d))
                if dev > dist_tol:
                    raise NonSimpleFacetError(f"facet {fi} is not planar (deviation {dev:.3g} mm)")
                if not LinearRing(to_plane(pts, pts[0], n)).is_simple:
                    raise NonSimpleFacetError(f"facet {fi} is not a simple polygon")
            normals.append(n)
            offsets.append(d)
            areas.append(0.5 * twice_area)
        self.normals = np.ascontiguousarray(normals)
        self.normals.setflags(write=False)
        self.offsets = np.array(offsets)
        self.areas = np.array(areas)

    # -- counts and invariants -----------------------------------------------

    @property
    def n_vertices(self):
        return len(self.vertices)

    @property
    def n_edges(self):
        return len(self._edge_owner) // 2

    @property
    def n_facets(self):
        return len(self.facets)

    @property
    def euler_characteristic(self):
        return self.n_vertices - self.n_edges + self.n_facets

    @property
    def genus(self):
        return genus(self)

    @property
    def is_triangulated(self):
        return all(len(f) == 3 for f in self.facets)

    def signed_volume(self):
        total = 0.0
        for f in self.facets:
            p = self.vertices[list(f)]
            for i in range(1, len(f) - 1):
                total += np.dot(p[0], np.cross(p[i], p[i + 1]))
        return total / 6.0

    # -- adjacency -------------------------------------------------------------

    def facet_of_edge(self, a, b):
        """Facet that traverses the directed edge a -> b."""
        return self._edge_owner[(a, b)]

    @cached_property
    def adjacency(self):
        adj = [set() for _ in self.facets]
        for (a, b), fi in self._edge_owner.items():
            adj[fi].add(self._edge_owner[(b, a)])
        return tuple(tuple(sorted(s)) for s in adj)

    def neighbors(self, f):
        return self.adjacency[int(f)]

    def shared_edges(self, f, g):
        """Directed edges (a, b) of facet ``f`` whose twin lies in ``g``."""
        out = []
        face = self.facets[f]
        for a, b in zip(face, face[1:] + face[:1]):
            if self._edge_owner[(b, a)] == g:
                out.append((a, b))
        return out

    def facet(self, f):
        f = int(f)
        return Facet(id=f, normal=self.normals[f], offset=float(self.offsets[f]),
                     area=float(self.areas[f]), neighbors=self.adjacency[f],
                     vertices=self.facets[f])

    def facet_points(self, f):
        return self.vertices[list(self.facets[f])]

    def __repr__(self):
        return (f"Polyhedron(V={self.n_vertices}, E={self.n_edges}, "
                f"F={self.n_facets}, genus={self.genus})")


def genus(P):
    """Genus 1 - (V - E + F) / 2 of a connected closed surface."""
    return genus_from_counts(P.n_vertices, P.n_edges, P.n_facets)


def genus_from_counts(v, e, f):
    chi = v - e + f
    if chi % 2:
        raise MeshError(f"odd Euler characteristic {chi}; surface is not orientable and closed")
    return 1 - chi // 2


def neighbors(P, f):
    return set(P.neighbors(f))


# -- loading -------------------------------------------------------------------


def weld_vertices(vertices, faces, dist_tol=DIST_TOL):
    """Merge vertices closer than ``dist_tol`` and drop collapsed faces.

    The lowest-index vertex of each cluster is kept unchanged, so surviving
    coordinates are bit-exact copies of the input. Unreferenced vertices
    are removed. Returns ``(vertices, faces)``.
    """
    vertices = np.asarray(vertices, dtype=np.float64).reshape(-1, 3)
    parent = np.arange(len(vertices))
    if len(vertices) and dist_tol > 0:
        pairs = cKDTree(vertices).query_pairs(dist_tol, output_type="ndarray")

        def find(i):
            while parent[i] != i:
                parent[i] = parent[parent[i]]
                i = parent[i]
            return i

        for i, j in pairs:
            ri, rj = find(i), find(j)
            if ri != rj:
                parent[max(ri, rj)] = min(ri, rj)
        for i in range(len(parent)):
            parent[i] = find(i)
    new_faces = []
    for f in faces:
        g = []
        for i in f:
            r = int(parent[i])
            if not g or g[-1] != r:
                g.append(r)
        while len(g) > 1 and g[0] == g[-1]:
            g.pop()
        if len(set(g)) >= 3 and len(set(g)) == len(g):
            new_faces.append(g)
    used = sorted({i for f in new_faces for i in f})
    remap = {old: new for new, old in enumerate(used)}
    return (vertices[used],
            [[remap[i] for i in f] for f in new_faces])


def polyhedron_from_polygons(vertices, faces, *, dist_tol=DIST_TOL, triangulate=True):
    """Weld, optionally triangulate, validate and outward-orient a surface."""
    vertices, faces = weld_vertices(vertices, faces, dist_tol)
    if not faces:
        raise MeshError("mesh has no non-degenerate faces")
    if triangulate:
        tris = []
        for f in faces:
            pts = vertices[f]
            try:
                local = triangulate_polygon(pts)
            except ValueError as exc:
                raise NonSimpleFacetError(str(exc)) from exc
            tris.extend([f[a], f[b], f[c]] for a, b, c in local)
        faces = tris
    P = Polyhedron(vertices, faces, dist_tol=dist_tol)
    if P.signed_volume() < 0:
        P = Polyhedron(vertices, [f[::-1] for f in faces], dist_tol=dist_tol)
    return P


def load_mesh(source, fmt=None, *, dist_tol=DIST_TOL):
    """Read a closed workpiece from OFF, OBJ or STL into a triangulated Polyhedron.

    ``source`` is a path, a bytes object or a binary stream; ``fmt`` is
    inferred from a path's extension when omitted. Coincident vertices are
    welded within ``dist_tol`` and a globally inverted surface is flipped.
    """
    if fmt is None:
        if not isinstance(source, (str, bytes)) and not hasattr(source, "__fspath__"):
            raise ParseError("format must be given for stream input")
        fmt = fileio.guess_format(source)
    vertices, faces = fileio.read(source, fmt)
    return polyhedron_from_polygons(vertices, faces, dist_tol=dist_tol)


def export_polyhedron(P, fmt, sink=None):
    faces = P.facets
    if fmt.startswith("stl") and not P.is_triangulated:
        faces = [[f[a], f[b], f[c]] for f in P.facets
                 for a, b, c in triangulate_polygon(P.vertices[list(f)])]
    return fileio.write(P.vertices, faces, fmt, sink)


# -- merging -------------------------------------------------------------------


def _coplanar(P, f, g, cos_tol, dist_tol):
    if float(P.normals[f] @ P.normals[g]) < cos_tol:
        return False
    pf, pg = P.facet_points(f), P.facet_points(g)
    return (np.max(np.abs(pg @ P.normals[f] - P.offsets[f])) <= dist_tol
            and np.max(np.abs(pf @ P.normals[g] - P.offsets[g])) <= dist_tol)


def merge_coplanar_facets(P, angle_tol=ANGLE_TOL, dist_tol=DIST_TOL):
    """Merge edge-adjacent facets whose planes agree within tolerance.

    Groups are formed with union-find over edge adjacency, then each
    group's boundary is traced into one polygon. Merged facets are ordered
    by their smallest source facet id.

    Raises
    ------
    NonSimpleFacetError
        If a merged region is not a simple polygon (a pinch or a hole).
    """
    cos_tol = math.cos(angle_tol)
    parent = list(range(P.n_facets))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for f in range(P.n_facets):
        for g in P.neighbors(f):
            if g > f and find(f) != find(g) and _coplanar(P, f, g, cos_tol, dist_tol):
                a, b = find(f), find(g)
                parent[max(a, b)] = min(a, b)

    groups = {}
    for f in range(P.n_facets):
        groups.setdefault(find(f), []).append(f)
    ordered = sorted(groups.values(), key=min)

    group_of = {}
    for gi, members in enumerate(ordered):
        for f in members:
            group_of[f] = gi

    polygons, sources = [], []
    for gi, members in enumerate(ordered):
        nxt = {}
        for f in members:
            face = P.facets[f]
            for a, b in zip(face, face[1:] + face[:1]):
                if group_of[P.facet_of_edge(b, a)] != gi:
                    if a in nxt:
                        raise NonSimpleFacetError(
                            f"merged facet from {members} pinches at vertex {a}")
                    nxt[a] = b
        start = min(nxt)
        loop = [start]
        while nxt[loop[-1]] != start:
            loop.append(nxt[loop[-1]])
            if len(loop) > len(nxt):
                raise NonSimpleFacetError("broken boundary while merging")
        if len(loop) != len(nxt):
            raise NonSimpleFacetError(f"merged facet from {members} has a hole")
        polygons.append(loop)
        sources.append(tuple(s for f in members for s in P.source_facets[f]))

    used = sorted({i for poly in polygons for i in poly})
    remap = {old: new for new, old in enumerate(used)}
    return Polyhedron(P.vertices[used], [[remap[i] for i in poly] for poly in polygons],
                      triangle_count=P.triangle_count, source_facets=sources,
                      dist_tol=max(dist_tol, DIST_TOL))
