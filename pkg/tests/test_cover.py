from itertools import combinations
import math

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from snapfix.cover import (CoverError, CoverWitness, Hemisphere, Semicircle, antipodal,
                           covers_circle, covers_closed_hemisphere, covers_sphere, hemisphere_of,
                           reduce_cover_circle, reduce_cover_closed_hemisphere,
                           reduce_cover_closed_semicircle, reduce_cover_sphere)

Z = np.array([0.0, 0.0, 1.0])
AXES = [Hemisphere(v) for v in np.vstack([np.eye(3), -np.eye(3)])]


def H(*normals):
    return [Hemisphere(n) for n in normals]


def sc(*degrees):
    """Semicircles on the xy great circle, mid directions at ``degrees``."""
    return [Semicircle(Z, [math.cos(math.radians(a)), math.sin(math.radians(a)), 0])
            for a in degrees]


def test_at_angle_uses_plane_frame():
    s = Semicircle.at_angle([0, 0, 1], 0.3)
    assert abs(np.dot(s.circle_normal, s.mid_direction)) < 1e-15
    assert Semicircle.at_angle([0, 0, 1], 0.3 + math.pi).m @ s.m == pytest.approx(-1)


def unit_vectors(k):
    v = st.tuples(*[st.floats(-1, 1, allow_nan=False)] * 3).filter(
        lambda t: 0.1 < math.sqrt(sum(x * x for x in t)) <= 1)
    return st.lists(v, min_size=k[0], max_size=k[1])


# -- types ---------------------------------------------------------------------


def test_hemisphere_normalizes():
    h = Hemisphere([0, 0, 5])
    assert h.normal == (0.0, 0.0, 1.0)
    assert h.contains([0, 0.1, 0.2]) and not h.contains([1, 0, 0])
    with pytest.raises(ValueError):
        Hemisphere([0, 0, 0])


def test_semicircle_orthogonality_enforced():
    s = Semicircle(Z, [1, 0, 0])
    assert abs(np.dot(s.circle_normal, s.mid_direction)) < 1e-15
    with pytest.raises(ValueError):
        Semicircle(Z, [1, 0, 0.5])


def test_cover_witness_consistency():
    with pytest.raises(ValueError):
        CoverWitness(True, np.array([1.0, 0, 0]))
    with pytest.raises(ValueError):
        CoverWitness(False)


def test_hemisphere_of():
    class F:
        normal = np.array([0, 0, 1.0])

    assert hemisphere_of(F()).normal == (0, 0, 1)
    a, b = hemisphere_of([0, 1, 0]), hemisphere_of([0, -1, 0])
    assert antipodal(a, b)


# -- covers_sphere ---------------------------------------------------------------


def test_axes_cover():
    assert covers_sphere(AXES).covered


def test_five_axes_leave_minus_z():
    r = covers_sphere(H([1, 0, 0], [-1, 0, 0], [0, 1, 0], [0, -1, 0], [0, 0, 1]))
    assert not r.covered
    assert np.allclose(r.witness, [0, 0, -1])


def test_tetrahedral_directions_cover():
    assert covers_sphere(H([1, 1, 1], [1, -1, -1], [-1, 1, -1], [-1, -1, 1])).covered


def test_empty_and_single():
    r = covers_sphere([])
    assert not r.covered and np.linalg.norm(r.witness) == pytest.approx(1)
    r = covers_sphere(H([0, 0, 1]))
    assert not r.covered and r.witness[2] <= 1e-9


def test_parallel_normals_have_a_witness():
    r = covers_sphere(H([0, 0, 1], [0, 0, 2], [0, 0, 1]))
    assert not r.covered
    assert max(h.n @ r.witness for h in H([0, 0, 1])) <= 1e-9


@settings(max_examples=300, deadline=None)
@given(unit_vectors((1, 3)))
def test_three_or_fewer_never_cover(normals):
    assert not covers_sphere(H(*normals)).covered


@settings(max_examples=300, deadline=None)
@given(unit_vectors((1, 10)))
def test_witness_is_valid(normals):
    hs = H(*normals)
    r = covers_sphere(hs)
    if not r.covered:
        assert np.linalg.norm(r.witness) == pytest.approx(1)
        assert max(h.n @ r.witness for h in hs) <= 1e-9


@settings(max_examples=200, deadline=None)
@given(unit_vectors((1, 8)), unit_vectors((1, 1)))
def test_monotone(normals, extra):
    hs = H(*normals)
    if covers_sphere(hs).covered:
        assert covers_sphere(hs + H(*extra)).covered


@settings(max_examples=200, deadline=None)
@given(unit_vectors((1, 8)))
def test_witness_agrees_with_lp(normals):
    # independent oracle: maximize t subject to n_i . d <= 0 ... via the
    # Gordan alternative, the origin is strictly inside conv(normals) iff
    # min over the simplex of |sum lambda_i n_i| is zero with full support
    from scipy.optimize import linprog

    N = np.array([np.array(n) / np.linalg.norm(n) for n in normals])
    # minimize s subject to N d <= s, -1 <= d <= 1
    res = linprog(np.r_[0, 0, 0, 1.0], A_ub=np.c_[N, -np.ones(len(N))], b_ub=np.zeros(len(N)),
                  bounds=[(-1, 1)] * 3 + [(None, None)], method="highs")
    s = res.fun
    assume(abs(s) > 1e-7)
    assert covers_sphere(H(*N)).covered == (s > 0)


# -- circles -------------------------------------------------------------------


def test_circle_examples():
    assert covers_circle(sc(0, 180, 90, 270)).covered
    r = covers_circle(sc(0, 180))
    assert not r.covered
    assert abs(np.dot(r.witness, [1, 0, 0])) < 1e-12 and abs(r.witness[2]) < 1e-12
    assert covers_circle(sc(0, 120, 240)).covered


def test_circle_mixed_normals_rejected():
    with pytest.raises(ValueError):
        covers_circle([Semicircle(Z, [1, 0, 0]), Semicircle([1, 0, 0], [0, 1, 0])])


@settings(max_examples=300, deadline=None)
@given(st.lists(st.floats(0, 360), min_size=1, max_size=2))
def test_two_semicircles_never_cover(angles):
    assert not covers_circle(sc(*angles)).covered


@settings(max_examples=300, deadline=None)
@given(st.lists(st.floats(0, 360), min_size=1, max_size=8))
def test_circle_matches_gap_oracle(angles):
    # covered iff every gap between consecutive mid angles is below 180 degrees
    a = sorted(x % 360 for x in angles)
    gaps = [b - c for b, c in zip(a[1:] + [a[0] + 360], a)]
    assume(all(abs(g - 180) > 1e-6 for g in gaps))
    assert covers_circle(sc(*angles)).covered == (max(gaps) < 180)


def test_antipodal():
    assert antipodal(Hemisphere(Z), Hemisphere(-Z))
    assert not antipodal(Hemisphere(Z), Hemisphere([1, 0, 0]))
    a, b = sc(10, 190)
    assert antipodal(a, b)
    with pytest.raises(TypeError):
        antipodal(Hemisphere(Z), a)


# -- reductions ----------------------------------------------------------------


def test_reduce_sphere_examples():
    d = np.ones(3) / math.sqrt(3)
    hs = AXES + [Hemisphere(d)]
    R = reduce_cover_sphere(hs)
    assert covers_sphere(R).covered and len(R) <= 5
    four = H([-1, 0, 0], [0, -1, 0], [0, 0, -1], d)
    assert covers_sphere(four).covered
    assert len(reduce_cover_sphere(four)) == 4
    assert reduce_cover_sphere(AXES) == AXES


def test_reduce_sphere_requires_cover():
    with pytest.raises(CoverError):
        reduce_cover_sphere(AXES[:5])


def test_reduce_closed_hemisphere_examples():
    target = Hemisphere(Z)          # closed complement is {d_z <= 0}
    tilt = [Hemisphere([math.cos(t), math.sin(t), -1.0])
            for t in np.radians([0, 90, 180, 270])]
    deep = Hemisphere(-Z)
    R = reduce_cover_closed_hemisphere(tilt + [deep], target)
    assert covers_closed_hemisphere(R, target).covered and 3 <= len(R) <= 5
    # tilts barely below the equator cannot cover the rim: the interior is kept
    rim = [Hemisphere([math.cos(t), math.sin(t), 0.05]) for t in np.radians([0, 90, 180, 270])]
    R = reduce_cover_closed_hemisphere(rim + [deep], target)
    assert len(R) == 5 and deep in R
    tri = H([-0.1, 0, -1], [0.05, 0.09, -1], [0.05, -0.09, -1])
    assert covers_closed_hemisphere(tri, target).covered
    assert reduce_cover_closed_hemisphere(tri, target) == tri


def test_reduce_closed_hemisphere_parallel_pair():
    # two opposite slabs cover the plane except the two points at infinity
    target = Hemisphere(Z)
    hs = H([1, 0, -0.5], [-1, 0, -0.5], [0, 1, 0.3], [0, -1, 0.3])
    R = reduce_cover_closed_hemisphere(hs, target)
    assert covers_closed_hemisphere(R, target).covered and len(R) == 4


def test_reduce_circle_examples():
    S = sc(0, 120, 240, 180)
    assert reduce_cover_circle(S) == S[:3]
    S = sc(0, 180, 90, 270)
    assert reduce_cover_circle(S) == S


def test_reduce_closed_semicircle():
    S = sc(80, 280, 30)
    R = reduce_cover_closed_semicircle(S, [1, 0, 0])
    assert len(R) in (2, 3)
    with pytest.raises(CoverError):
        reduce_cover_closed_semicircle(sc(10), [1, 0, 0])


@settings(max_examples=150, deadline=None)
@given(st.lists(st.floats(0, 360), min_size=5, max_size=12))
def test_reduce_circle_size(angles):
    S = sc(*angles)
    assume(covers_circle(S).covered)
    R = reduce_cover_circle(S)
    assert covers_circle(R).covered
    assert len(R) == 3 or (len(R) == 4 and
                           sum(antipodal(a, b) for a, b in combinations(R, 2)) == 2)


@settings(max_examples=100, deadline=None)
@given(unit_vectors((4, 12)))
def test_reduce_sphere_size(normals):
    hs = H(*normals)
    assume(covers_sphere(hs).covered)
    R = reduce_cover_sphere(hs)
    assert covers_sphere(R).covered and len(R) in (4, 5, 6)
    assert all(any(r is h for h in hs) for r in R)


def test_reduce_sphere_nearly_interior_member():
    # -x sits 2.4e-7 rad from the pivot's interior: close in 1 - dot, far in angle
    N = [(0, 1, 0), (0, -np.sqrt(0.5), np.sqrt(0.5)), (-1, 0, 0),
         (0.9999999999999716, 0, -2.3841857919999323e-07)]
    H = [Hemisphere(n) for n in N]
    R = reduce_cover_sphere(H)
    assert covers_sphere(R).covered and 4 <= len(R) <= 6
