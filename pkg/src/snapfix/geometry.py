"""Small planar-polygon helpers shared by the mesh and solid modules."""

import numpy as np


def newell_normal(points):
    """Unnormalized Newell normal of a closed 3D polygon.

    Its length is twice the polygon's area, which makes it the natural
    building block for both facet normals and facet areas.
    """
    p = np.asarray(points, dtype=float)
    q = np.roll(p, -1, axis=0)
    return np.array([
        np.sum((p[:, 1] - q[:, 1]) * (p[:, 2] + q[:, 2])),
        np.sum((p[:, 2] - q[:, 2]) * (p[:, 0] + q[:, 0])),
        np.sum((p[:, 0] - q[:, 0]) * (p[:, 1] + q[:, 1])),
    ])


def polygon_area(points):
    return 0.5 * float(np.linalg.norm(newell_normal(points)))


def unit(v):
    v = np.asarray(v, dtype=float)
    n = np.linalg.norm(v)
    if n == 0.0:
        raise ValueError("cannot normalize a zero vector")
    return v / n


def plane_frame(normal):
    """Orthonormal (u, w) spanning the plane orthogonal to ``normal``.

    (u, w, normal) is right-handed, so counter-clockwise polygons seen from
    the normal side stay counter-clockwise in (u, w) coordinates.
    """
    n = unit(normal)
    a = np.eye(3)[int(np.argmin(np.abs(n)))]
    u = unit(np.cross(a, n))
    w = np.cross(n, u)
    return u, w


def to_plane(points, origin, normal):
    u, w = plane_frame(normal)
    d = np.asarray(points, dtype=float) - origin
    return np.column_stack([d @ u, d @ w])


def from_plane(uv, origin, normal):
    u, w = plane_frame(normal)
    uv = np.asarray(uv, dtype=float)
    return origin + np.outer(uv[:, 0], u) + np.outer(uv[:, 1], w)


def _cross2(o, a, b):
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def ear_clip(uv):
    """Triangulate a simple counter-clockwise 2D polygon.

    Returns index triples into ``uv``. Collinear vertices are tolerated;
    they end up as corners of thin triangles, never as zero-area ones
    unless the whole polygon is degenerate.
    """
    uv = [tuple(p) for p in np.asarray(uv, dtype=float)]
    idx = list(range(len(uv)))
    if len(idx) < 3:
        raise ValueError("polygon needs at least three vertices")
    scale = max(max(abs(c) for p in uv for c in p), 1.0)
    tol = 1e-14 * scale * scale
    tris = []
    guard = 0
    while len(idx) > 3:
        n = len(idx)
        clipped = False
        # prefer strictly convex ears; fall back to flat ones to make progress
        for allow_flat in (False, True):
            for k in range(n):
                i0, i1, i2 = idx[k - 1], idx[k], idx[(k + 1) % n]
                a, b, c = uv[i0], uv[i1], uv[i2]
                area = _cross2(a, b, c)
                if area < -tol or (not allow_flat and area <= tol):
                    continue
                if area > tol and any(
                    _inside(uv[j], a, b, c, tol)
                    for j in idx if j not in (i0, i1, i2)
                ):
                    continue
                tris.append((i0, i1, i2))
                del idx[k]
                clipped = True
                break
            if clipped:
                break
        guard += 1
        if not clipped or guard > 10 * len(uv):
            raise ValueError("polygon is not simple; ear clipping failed")
    tris.append(tuple(idx))
    return tris


def _inside(p, a, b, c, tol):
    return (_cross2(a, b, p) >= -tol and _cross2(b, c, p) >= -tol
            and _cross2(c, a, p) >= -tol)


def triangulate_polygon(points, normal=None):
    """Triangulate a planar simple 3D polygon; returns local index triples."""
    pts = np.asarray(points, dtype=float)
    if len(pts) == 3:
        return [(0, 1, 2)]
    if normal is None:
        normal = newell_normal(pts)
    uv = to_plane(pts, pts[0], normal)
    return ear_clip(uv)
