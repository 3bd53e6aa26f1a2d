import io
import math

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from snapfix import fileio, shapes
from snapfix.mesh import load_mesh, merge_coplanar_facets
from snapfix.solid import (JointFeasibility, ExtrusionParams, SolidError, SolidMesh,
                           build_fingertip_quad, build_fixture_solid, contact_segment,
                           export_mesh, extrude_polygon, fixture_layout, max_fingertip_width,
                           max_pairwise_overlap, overlap_volume)
from snapfix.synth import Fixture, FixtureError, minimal_fixtures, minimal_snapping_fixture, quality_of

SQUARE = [[0, 0, 0], [1, 0, 0], [1, 1, 0], [0, 1, 0]]


# -- parameters ----------------------------------------------------------------


def test_params_defaults_and_checks():
    p = ExtrusionParams()
    assert (p.alpha_p, p.alpha_b, p.alpha_t, p.clearance, p.body_shrink) == (5, 5, 5, 0.2, 0.8)
    assert p.effective_tip_width == 5
    assert ExtrusionParams(tip_width=4, max_tip_width=3).effective_tip_width == 3
    for bad in (dict(alpha_p=0), dict(clearance=0.3), dict(clearance=-0.1),
                dict(body_shrink=0), dict(body_shrink=1.5), dict(tip_width=-1)):
        with pytest.raises(ValueError):
            ExtrusionParams(**bad)


def test_max_fingertip_width():
    assert max_fingertip_width(10, math.radians(30), math.radians(60)) == pytest.approx(5.0)
    assert max_fingertip_width(10, math.radians(45), math.radians(45)) == pytest.approx(7.0710678)
    assert max_fingertip_width(10, 1e-9, 1.0) == pytest.approx(0, abs=1e-7)
    with pytest.raises(ValueError):
        max_fingertip_width(10, 2.0, 2.0)
    j = JointFeasibility(10, math.radians(60), math.radians(30))
    assert j.max_tip_width == pytest.approx(5.0)
    with pytest.raises(ValueError):
        JointFeasibility(10, math.radians(100), math.radians(90))


# -- extrusion -----------------------------------------------------------------


def test_extrude_unit_square():
    S = extrude_polygon(SQUARE, 1.0)
    assert S.volume() == pytest.approx(1.0, rel=1e-12)
    assert S.is_watertight()


@settings(max_examples=50, deadline=None)
@given(st.lists(st.tuples(st.floats(-10, 10), st.floats(-10, 10)), min_size=3, max_size=3),
       st.floats(0.01, 10))
def test_extrude_triangle(pts, alpha):
    from snapfix.geometry import polygon_area

    L = np.array([[x, y, 0.0] for x, y in pts])
    A = polygon_area(L)
    assume(A > 1e-6)
    S = extrude_polygon(L, alpha)
    assert S.is_watertight()
    assert abs(S.volume()) == pytest.approx(A * alpha, rel=1e-9)


def test_extrude_non_convex():
    L = [[0, 0, 0], [4, 0, 0], [4, 4, 0], [2, 1, 0], [0, 4, 0]]
    S = extrude_polygon(L, 2.0)
    assert S.is_watertight()
    assert S.volume() == pytest.approx(2 * 10.0)


def test_extrude_errors():
    with pytest.raises(ValueError):
        extrude_polygon(SQUARE, 0.0)
    with pytest.raises(ValueError):
        extrude_polygon([[0, 0, 0], [1, 0, 0], [2, 0, 0]], 1.0)


# -- fingertip quad ------------------------------------------------------------


def test_fingertip_quad_direction():
    q = build_fingertip_quad(([0, 0, 0], [1, 0, 0]), [0, 0, 1], 2.0)
    # (1,0,0) x (0,0,1) = (0,-1,0), scaled to the width
    pts = {tuple(np.round(p, 12)) for p in q}
    assert pts == {(0, 0, 0), (1, 0, 0), (1, -2, 0), (0, -2, 0)}


def test_fingertip_quad_points_into_facet():
    facet = np.array([[0, 0, 0], [1, 0, 0], [1, 3, 0], [0, 3, 0]], dtype=float)
    q = build_fingertip_quad(([0, 0, 0], [1, 0, 0]), [0, 0, 1], 2.0, facet)
    assert q[:, 1].min() == pytest.approx(0) and q[:, 1].max() == pytest.approx(2)
    # narrower facet: clipped
    q = build_fingertip_quad(([0, 0, 0], [1, 0, 0]), [0, 0, 1], 5.0, facet)
    assert q[:, 1].max() == pytest.approx(3)


@pytest.mark.parametrize("w, b", [(1.0, 2.0), (3.5, 0.25), (10.0, 4.0)])
def test_fingertip_quad_area(w, b):
    from snapfix.geometry import polygon_area

    q = build_fingertip_quad(([0, 0, 0], [w, 0, 0]), [0, 0, 1], b)
    assert polygon_area(q) == pytest.approx(w * b)


def test_fingertip_quad_errors():
    with pytest.raises(ValueError):
        build_fingertip_quad(([0, 0, 0], [1, 0, 0]), [0, 0, 1], 0.0)
    with pytest.raises(ValueError):
        build_fingertip_quad(([0, 0, 0], [0, 0, 0]), [0, 0, 1], 1.0)
    with pytest.raises(ValueError):
        build_fingertip_quad(([0, 0, 0], [0, 0, 1]), [0, 0, 1], 1.0)


# -- fixture solids ------------------------------------------------------------


@pytest.fixture(scope="module")
def cube():
    return merge_coplanar_facets(shapes.cube(20.0))


def test_contact_segment(cube):
    j = cube.neighbors(0)[0]
    p, q = contact_segment(cube, 0, j)
    assert np.linalg.norm(q - p) == pytest.approx(20)
    with pytest.raises(FixtureError):
        opp = [f for f in range(6) if f != 0 and f not in cube.neighbors(0)][0]
        contact_segment(cube, 0, opp)


def test_tetrahedron_solid():
    T = merge_coplanar_facets(shapes.tetrahedron())
    F = minimal_snapping_fixture(T).fixture
    for shrink in (0.8, 1.0):
        params = ExtrusionParams(body_shrink=shrink)
        S = build_fixture_solid(T, F, params)
        assert S.is_watertight() and S.volume() > 0
        w = quality_of(T, F, params).weight_proxy
        assert S.volume() == pytest.approx(w, rel=0.05)


def test_cube_solid_part_count(cube):
    F = minimal_snapping_fixture(cube).fixture
    parts = fixture_layout(cube, F)
    assert [p.label for p in parts] == ["palm", "body0", "tip0", "body1", "tip1", "body2", "tip2"]
    S = build_fixture_solid(cube, F)
    assert S.n_shells == 7
    assert max_pairwise_overlap(parts, 0.2) < 1e-9
    assert all(v > 0 for v in S.shell_volumes())


def test_shared_facet_parts_are_shrunk(cube):
    """A tip lying on another finger's body facet: both parts shrink."""
    _, found = minimal_fixtures(cube)
    shared = [F for F in found if set(F.F_B) & set(F.F_T)]
    assert shared
    F = shared[0]
    facet = sorted(set(F.F_B) & set(F.F_T))[0]
    raw = {p.label: p for p in fixture_layout(cube, F, resolve_overlaps=False)}
    res = {p.label: p for p in fixture_layout(cube, F)}
    on_facet = [lab for lab, p in raw.items() if p.facet == facet and lab != "palm"]
    assert len(on_facet) >= 2
    for lab in on_facet:
        assert res[lab].area < raw[lab].area
    assert max_pairwise_overlap(list(res.values()), 0.2) < 1e-9
    assert build_fixture_solid(cube, F).is_watertight()


def test_clearance_offsets_every_part(cube):
    F = minimal_snapping_fixture(cube).fixture
    for c in (0.0, 0.1, 0.2):
        params = ExtrusionParams(clearance=c)
        S = build_fixture_solid(cube, F, params)
        parts = fixture_layout(cube, F, params)
        for k, part in enumerate(parts):
            shell = S.shell(k)
            n, d = cube.normals[part.facet], cube.offsets[part.facet]
            heights = shell.vertices @ n - d
            assert heights.min() == pytest.approx(c, abs=1e-3)
            assert heights.max() == pytest.approx(c + part.alpha, abs=1e-3)


def test_invalid_fixture_refused(cube):
    F = minimal_snapping_fixture(cube).fixture
    with pytest.raises(FixtureError):
        build_fixture_solid(cube, Fixture(F.palm, F.fingers[:1]))


def test_overlap_volume_of_identical_prisms(cube):
    F = minimal_snapping_fixture(cube).fixture
    palm = fixture_layout(cube, F)[0]
    assert overlap_volume(palm, palm) == pytest.approx(20 * 20 * 5, rel=1e-6)


@pytest.mark.parametrize("name", ["tetrahedron", "cube", "octahedron", "square_pyramid", "prism8"])
def test_canonical_solids(name):
    P = merge_coplanar_facets(shapes.builtin(name))
    _, found = minimal_fixtures(P)
    for F in found[:: max(1, len(found) // 6)]:
        parts = fixture_layout(P, F)
        assert max_pairwise_overlap(parts, 0.2) < 1e-9
        S = build_fixture_solid(P, F)
        assert S.is_watertight()
        assert S.volume() == pytest.approx(quality_of(P, F).weight_proxy, rel=1e-9)


# -- export --------------------------------------------------------------------


def test_unit_cube_stl_size():
    S = extrude_polygon(SQUARE, 1.0)
    data = export_mesh(S, "stl-binary")
    assert len(data) == 84 + 12 * 50


def test_off_round_trip():
    T = merge_coplanar_facets(shapes.tetrahedron())
    S = build_fixture_solid(T, minimal_snapping_fixture(T).fixture)
    v, f = fileio.read(export_mesh(S, "off"), "off")
    R = SolidMesh(v, f, S.shells)
    assert len(R.vertices) == len(S.vertices)
    assert R.volume() == pytest.approx(S.volume(), rel=1e-12)
    sink = io.BytesIO()
    export_mesh(S, "stl-ascii", sink)
    assert sink.getvalue().startswith(b"solid")


def test_single_shell_reimports_as_polyhedron():
    S = extrude_polygon(SQUARE, 1.0)
    P = load_mesh(export_mesh(S, "stl-binary"), "stl")
    assert (P.n_vertices, P.n_edges, P.n_facets) == (8, 18, 12)
    assert P.signed_volume() == pytest.approx(1.0)


def test_export_errors():
    with pytest.raises(ValueError):
        export_mesh(SolidMesh(np.zeros((0, 3)), np.zeros((0, 3))), "stl-binary")
    S = extrude_polygon(SQUARE, 1.0)
    broken = SolidMesh(S.vertices, S.faces[:-1])
    with pytest.raises(SolidError):
        export_mesh(broken, "off")
    with pytest.raises(SolidError):
        broken.validate()
