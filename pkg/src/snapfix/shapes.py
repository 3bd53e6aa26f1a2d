"""Built-in workpieces: Platonic solids, pyramids, prisms and random polytopes.

Convex solids are assembled from their vertex sets: hull triangles are
grouped by supporting plane into polygon faces, each face is fanned into
triangles, and the result is a triangulated :class:`Polyhedron` ready for
:func:`~snapfix.mesh.merge_coplanar_facets`.
"""

from itertools import product
import math

import numpy as np
from scipy.spatial import ConvexHull, HalfspaceIntersection

from .geometry import plane_frame
from .mesh import Polyhedron, polyhedron_from_polygons

PHI = (1 + math.sqrt(5)) / 2


def convex_faces(points, plane_tol=1e-9):
    """Polygon faces (outward, counter-clockwise) of the hull of ``points``."""
    pts = np.asarray(points, dtype=float)
    hull = ConvexHull(pts)
    scale = max(np.ptp(pts, axis=0).max(), 1.0)
    planes = []
    members = []
    for simplex, eq in zip(hull.simplices, hull.equations):
        for k, (n, d) in enumerate(planes):
            if np.dot(n, eq[:3]) > 1 - plane_tol and abs(d - eq[3]) <= plane_tol * scale:
                members[k].update(simplex.tolist())
                break
        else:
            planes.append((eq[:3], eq[3]))
            members.append(set(simplex.tolist()))
    faces = []
    for (n, _), verts in zip(planes, members):
        verts = sorted(verts)
        c = pts[verts].mean(axis=0)
        u, w = plane_frame(n)
        ang = [math.atan2((pts[v] - c) @ w, (pts[v] - c) @ u) for v in verts]
        faces.append([v for _, v in sorted(zip(ang, verts))])
    return pts, faces


def _fan(faces):
    return [[f[0], f[i], f[i + 1]] for f in faces for i in range(1, len(f) - 1)]


def convex_polyhedron(points):
    """Triangulated convex polyhedron with fan-triangulated polygon faces."""
    pts, faces = convex_faces(points)
    used = sorted({v for f in faces for v in f})
    remap = {old: new for new, old in enumerate(used)}
    faces = [[remap[v] for v in f] for f in faces]
    return Polyhedron(pts[used], _fan(faces))


def tetrahedron(size=20.0):
    s = size / (2 * math.sqrt(2))
    return convex_polyhedron(s * np.array([[1, 1, 1], [1, -1, -1], [-1, 1, -1], [-1, -1, 1]]))


def cube(size=20.0):
    return convex_polyhedron(size * np.array(list(product([0.0, 1.0], repeat=3))))


def octahedron(size=20.0):
    r = size / math.sqrt(2)
    pts = [[r, 0, 0], [-r, 0, 0], [0, r, 0], [0, -r, 0], [0, 0, r], [0, 0, -r]]
    return convex_polyhedron(pts)


def icosahedron(size=20.0):
    pts = []
    for a, b in product([-1, 1], repeat=2):
        pts += [[0, a, b * PHI], [a, b * PHI, 0], [b * PHI, 0, a]]
    return convex_polyhedron(np.array(pts) * size / 2)


def dodecahedron(size=20.0):
    pts = [list(p) for p in product([-1, 1], repeat=3)]
    for a, b in product([-1, 1], repeat=2):
        pts += [[0, a / PHI, b * PHI], [a / PHI, b * PHI, 0], [b * PHI, 0, a / PHI]]
    return convex_polyhedron(np.array(pts) * size / (2 / PHI))


def square_pyramid(size=20.0, height=None):
    h = size / math.sqrt(2) if height is None else height
    s = size / 2
    return convex_polyhedron([[s, s, 0], [-s, s, 0], [-s, -s, 0], [s, -s, 0], [0, 0, h]])


def prism(n, radius=20.0, height=20.0):
    """Right prism over a regular n-gon (the "n-base cylinder")."""
    ang = 2 * math.pi * np.arange(n) / n
    ring = np.column_stack([radius * np.cos(ang), radius * np.sin(ang)])
    pts = np.vstack([np.column_stack([ring, np.zeros(n)]),
                     np.column_stack([ring, np.full(n, height)])])
    return convex_polyhedron(pts)


def bifrustum(n=4, bottom=14.0, middle=16.0, top=13.0, h1=16.0, h2=5.5):
    """Two stacked frusta over regular n-gons sharing the ``middle`` ring.

    With a narrow bottom ring the bottom facet is a palm that needs four
    fingers: its neighbours all tilt below the palm's boundary circle.
    """
    ang = 2 * math.pi * np.arange(n) / n
    rings = [(bottom, 0.0), (middle, h1), (top, h1 + h2)]
    pts = [np.column_stack([r * np.cos(ang), r * np.sin(ang), np.full(n, z)]) for r, z in rings]
    return convex_polyhedron(np.vstack(pts))


def truncated_cuboctahedron(size=10.0):
    base = [1.0, 1 + math.sqrt(2), 1 + 2 * math.sqrt(2)]
    pts = set()
    for perm in ((0, 1, 2), (0, 2, 1), (1, 0, 2), (1, 2, 0), (2, 0, 1), (2, 1, 0)):
        for signs in product([-1, 1], repeat=3):
            pts.add(tuple(s * base[i] for s, i in zip(signs, perm)))
    return convex_polyhedron(np.array(sorted(pts)) * size / 2)


def quad_torus(n_ring=8, n_tube=4, major=30.0, minor=10.0):
    """Torus of planar quads (a ring of ``n_ring`` tube segments), genus 1.

    The tube cross-section is a regular ``n_tube``-gon with a vertex on the
    equator, so for ``n_tube = 4`` no tube edge is horizontal and no two
    adjacent quads are coplanar.
    """
    verts, faces = [], []
    for i in range(n_ring):
        t = 2 * math.pi * i / n_ring
        for j in range(n_tube):
            s = 2 * math.pi * j / n_tube
            r = major + minor * math.cos(s)
            verts.append([r * math.cos(t), r * math.sin(t), minor * math.sin(s)])
    for i in range(n_ring):
        for j in range(n_tube):
            a = i * n_tube + j
            b = ((i + 1) % n_ring) * n_tube + j
            c = ((i + 1) % n_ring) * n_tube + (j + 1) % n_tube
            d = i * n_tube + (j + 1) % n_tube
            faces.append([a, b, c, d])
    return polyhedron_from_polygons(np.array(verts), faces, triangulate=False)


def random_hull_polytope(rng, n_vertices):
    """Convex hull of uniform points on a sphere; simplicial in general.

    Points on a sphere are in convex position, so every one is a vertex.
    """
    while True:
        p = rng.normal(size=(n_vertices, 3))
        p /= np.linalg.norm(p, axis=1, keepdims=True)
        P = convex_polyhedron(p * 20.0)
        if P.n_vertices == n_vertices:
            return P


def random_halfspace_polytope(rng, n_planes):
    """Intersection of random tangent halfspaces; a simple polytope.

    Facets are genuine polygons with many neighbours, which exercises the
    three- and four-finger searches.
    """
    while True:
        n = rng.normal(size=(n_planes, 3))
        n /= np.linalg.norm(n, axis=1, keepdims=True)
        d = rng.uniform(0.9, 1.1, size=n_planes)
        hs = np.column_stack([n, -d])
        try:
            vert = HalfspaceIntersection(hs, np.zeros(3)).intersections
        except Exception:
            continue
        if not np.all(np.isfinite(vert)) or np.abs(vert).max() > 10:
            continue
        # drop coincident vertices produced by degenerate vertex figures
        vert = np.unique(np.round(vert, 12), axis=0)
        try:
            return convex_polyhedron(vert * 20.0)
        except Exception:
            continue


CANONICAL = {
    "tetrahedron": tetrahedron,
    "cube": cube,
    "octahedron": octahedron,
    "icosahedron": icosahedron,
    "dodecahedron": dodecahedron,
    "square_pyramid": square_pyramid,
    "truncated_cuboctahedron": truncated_cuboctahedron,
    "torus": quad_torus,
    "bifrustum": bifrustum,
}


def builtin(name):
    """Look up a built-in workpiece; ``prism<N>`` gives the N-base prism."""
    key = name.lower().replace("-", "_")
    if key.startswith("prism") and key[5:].isdigit():
        return prism(int(key[5:]))
    if key.endswith("_base_cylinder") and key.split("_")[0].isdigit():
        return prism(int(key.split("_")[0]))
    if key not in CANONICAL:
        raise KeyError(f"unknown built-in workpiece {name!r}")
    return CANONICAL[key]()
