"""OFF, OBJ and STL (ASCII and binary) readers and writers.

Readers return ``(vertices, faces)`` where ``vertices`` is an (N, 3) float64
array and ``faces`` a list of vertex-index lists. STL carries no
connectivity, so its reader emits three fresh vertices per triangle and
relies on the caller to weld them.
"""

import io
import os
import struct

import numpy as np

FORMATS = ("off", "obj", "stl")
EXPORT_FORMATS = ("stl-binary", "stl-ascii", "off", "obj")


class ParseError(ValueError):
    """Input stream is not valid in the declared format."""


def guess_format(path):
    ext = os.path.splitext(str(path))[1].lower().lstrip(".")
    if ext not in FORMATS:
        raise ParseError(f"cannot infer mesh format from extension {ext!r}")
    return ext


def _as_bytes(source):
    if isinstance(source, (bytes, bytearray, memoryview)):
        return bytes(source)
    if isinstance(source, (str, os.PathLike)):
        with open(source, "rb") as fh:
            return fh.read()
    data = source.read()
    return data.encode() if isinstance(data, str) else data


def read(source, fmt):
    """Parse ``source`` (path, bytes or binary stream) in format ``fmt``."""
    data = _as_bytes(source)
    fmt = fmt.lower()
    if fmt == "off":
        return read_off(data)
    if fmt == "obj":
        return read_obj(data)
    if fmt == "stl":
        return read_stl(data)
    raise ParseError(f"unsupported format {fmt!r}")


def _text(data):
    try:
        return data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise ParseError("text mesh is not valid UTF-8") from exc


def read_off(data):
    lines = []
    for line in _text(data).splitlines():
        line = line.split("#", 1)[0].split()
        if line:
            lines.append(line)
    if not lines:
        raise ParseError("empty OFF stream")
    head = lines[0]
    if head[0] == "OFF":
        head = head[1:] or (lines[1] if len(lines) > 1 else [])
        body = lines[1:] if len(lines[0]) > 1 else lines[2:]
    elif head[0].startswith("OFF") and head[0][3:].isdigit():
        head = [head[0][3:], *head[1:]]
        body = lines[1:]
    else:
        raise ParseError(f"missing or unsupported OFF header {head[0]!r}")
    try:
        nv, nf = int(head[0]), int(head[1])
        if len(body) < nv + nf:
            raise ParseError("truncated OFF stream")
        verts = np.array([[float(x) for x in row[:3]] for row in body[:nv]],
                         dtype=np.float64).reshape(nv, 3)
        faces = []
        for row in body[nv:nv + nf]:
            k = int(row[0])
            if len(row) < k + 1:
                raise ParseError("truncated OFF face record")
            # anything after the k indices is per-face colour data
            faces.append([int(t) for t in row[1:k + 1]])
    except (IndexError, ValueError) as exc:
        if isinstance(exc, ParseError):
            raise
        raise ParseError(f"malformed OFF: {exc}") from exc
    _check_indices(faces, len(verts))
    return verts, faces


def read_obj(data):
    verts, faces = [], []
    for lineno, line in enumerate(_text(data).splitlines(), 1):
        parts = line.split("#", 1)[0].split()
        if not parts:
            continue
        try:
            if parts[0] == "v":
                verts.append([float(x) for x in parts[1:4]])
                if len(verts[-1]) != 3:
                    raise ValueError("vertex needs three coordinates")
            elif parts[0] == "f":
                face = []
                for ref in parts[1:]:
                    i = int(ref.split("/")[0])
                    face.append(i - 1 if i > 0 else len(verts) + i)
                faces.append(face)
        except ValueError as exc:
            raise ParseError(f"malformed OBJ line {lineno}: {exc}") from exc
    verts = np.array(verts, dtype=np.float64).reshape(-1, 3)
    _check_indices(faces, len(verts))
    return verts, faces


def read_stl(data):
    if len(data) >= 84:
        (count,) = struct.unpack_from("<I", data, 80)
        if len(data) == 84 + 50 * count:
            return _read_stl_binary(data, count)
    if data.lstrip()[:5].lower() == b"solid":
        return _read_stl_ascii(data)
    raise ParseError("stream is neither ASCII nor binary STL")


def _read_stl_binary(data, count):
    rec = np.dtype([("n", "<f4", 3), ("v", "<f4", (3, 3)), ("attr", "<u2")])
    tris = np.frombuffer(data, dtype=rec, count=count, offset=84)
    verts = tris["v"].reshape(-1, 3).astype(np.float64)
    faces = [[3 * i, 3 * i + 1, 3 * i + 2] for i in range(count)]
    return verts, faces


def _read_stl_ascii(data):
    verts = []
    for line in _text(data).splitlines():
        parts = line.split()
        if parts and parts[0] == "vertex":
            try:
                verts.append([float(x) for x in parts[1:4]])
            except ValueError as exc:
                raise ParseError(f"malformed STL vertex: {line!r}") from exc
    if len(verts) % 3:
        raise ParseError("ASCII STL vertex count is not a multiple of three")
    verts = np.array(verts, dtype=np.float64).reshape(-1, 3)
    faces = [[3 * i, 3 * i + 1, 3 * i + 2] for i in range(len(verts) // 3)]
    return verts, faces


def _check_indices(faces, nv):
    for face in faces:
        if len(face) < 3:
            raise ParseError("face with fewer than three vertices")
        if min(face) < 0 or max(face) >= nv:
            raise ParseError("face references a missing vertex")


def _fmt(x):
    return format(float(x), ".17g")


def write(vertices, faces, fmt, sink=None):
    """Serialize a mesh; returns bytes when ``sink`` is None.

    ``fmt`` is one of ``EXPORT_FORMATS`` (``"stl"`` means binary STL).
    STL output requires triangular faces.
    """
    fmt = fmt.lower()
    if fmt == "stl":
        fmt = "stl-binary"
    vertices = np.asarray(vertices, dtype=np.float64).reshape(-1, 3)
    if len(faces) == 0:
        raise ValueError("refusing to write an empty mesh")
    if fmt == "off":
        out = _write_off(vertices, faces)
    elif fmt == "obj":
        out = _write_obj(vertices, faces)
    elif fmt == "stl-ascii":
        out = _write_stl_ascii(vertices, faces)
    elif fmt == "stl-binary":
        out = _write_stl_binary(vertices, faces)
    else:
        raise ValueError(f"unsupported export format {fmt!r}")
    if sink is None:
        return out
    if isinstance(sink, (str, os.PathLike)):
        with open(sink, "wb") as fh:
            fh.write(out)
    else:
        sink.write(out)
    return None


def _write_off(vertices, faces):
    buf = io.StringIO()
    buf.write(f"OFF\n{len(vertices)} {len(faces)} 0\n")
    for v in vertices:
        buf.write(" ".join(_fmt(x) for x in v) + "\n")
    for f in faces:
        buf.write(" ".join(str(int(i)) for i in [len(f), *f]) + "\n")
    return buf.getvalue().encode()


def _write_obj(vertices, faces):
    buf = io.StringIO()
    for v in vertices:
        buf.write("v " + " ".join(_fmt(x) for x in v) + "\n")
    for f in faces:
        buf.write("f " + " ".join(str(int(i) + 1) for i in f) + "\n")
    return buf.getvalue().encode()


def _tri_normals(vertices, faces):
    tri = np.asarray(faces, dtype=np.int64)
    if tri.ndim != 2 or tri.shape[1] != 3:
        raise ValueError("STL export needs triangular faces")
    a, b, c = (vertices[tri[:, i]] for i in range(3))
    n = np.cross(b - a, c - a)
    ln = np.linalg.norm(n, axis=1, keepdims=True)
    return tri, np.divide(n, ln, out=np.zeros_like(n), where=ln > 0)


def _write_stl_ascii(vertices, faces):
    tri, normals = _tri_normals(vertices, faces)
    lines = ["solid snapfix"]
    for t, n in zip(tri, normals):
        lines.append("  facet normal " + " ".join(_fmt(x) for x in n))
        lines.append("    outer loop")
        for i in t:
            lines.append("      vertex " + " ".join(_fmt(x) for x in vertices[i]))
        lines.append("    endloop")
        lines.append("  endfacet")
    lines.append("endsolid snapfix")
    return ("\n".join(lines) + "\n").encode()


def _write_stl_binary(vertices, faces):
    tri, normals = _tri_normals(vertices, faces)
    rec = np.zeros(len(tri), dtype=[("n", "<f4", 3), ("v", "<f4", (3, 3)), ("attr", "<u2")])
    rec["n"] = normals
    rec["v"] = vertices[tri]
    header = b"snapfix binary STL".ljust(80, b" ")
    return header + struct.pack("<I", len(tri)) + rec.tobytes()
