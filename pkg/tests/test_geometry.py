import math
from fractions import Fraction as F

import pytest
from hypothesis import given, strategies as st

from rotspec.geometry import (
    DomainError,
    convex_hull,
    edge_slopes,
    gkr_g,
    hull_support,
    predicted_vertices,
    strictly_monotone,
)
from rotspec.potential import Potential, Vec2Q
from rotspec.symbolic import enumerate_orbits

P = Potential()
rationals = st.fractions(min_value=-5, max_value=5, max_denominator=12)
points = st.builds(Vec2Q, rationals, rationals)


def test_hull_examples():
    h = convex_hull([Vec2Q(0, 0), Vec2Q(1, 0), Vec2Q(F(13, 16), F(1, 8)), Vec2Q(F(1, 2), 0)])
    assert h.vertices == (Vec2Q(0, 0), Vec2Q(1, 0), Vec2Q(F(13, 16), F(1, 8)))
    assert convex_hull([Vec2Q(0, 0)]).vertices == (Vec2Q(0, 0),)
    with pytest.raises(ValueError):
        convex_hull([])


def test_hull_of_period_4_orbits():
    h = convex_hull(P.rotation_vectors(enumerate_orbits(3, 4)))
    assert h.vertex_set() == {P.w_point(math.inf), P.w0, P.w_point(1)}


def test_support_examples():
    h = convex_hull([Vec2Q(0, 0), Vec2Q(1, 0), Vec2Q(F(13, 16), F(1, 8))])
    assert hull_support(h, Vec2Q(0, 1)) == F(1, 8)
    assert hull_support(h, Vec2Q(1, 0)) == 1
    assert hull_support(h, Vec2Q(-1, -1)) == 0
    with pytest.raises(ValueError):
        hull_support(h, Vec2Q(0, 0))


def test_slopes():
    ws = [P.w_point(k) for k in range(4)]
    assert edge_slopes(ws) == [F(-2, 3), F(-1, 6), F(8, 207)]
    with pytest.raises(ValueError):
        edge_slopes([Vec2Q(1, 0), Vec2Q(1, 1)])
    assert strictly_monotone([1, 2, 3]) == "increasing"
    assert strictly_monotone([3, 2, 1]) == "decreasing"
    assert strictly_monotone([1, 1, 2]) is None


def test_slopes_and_extremality_up_to_20():
    ws = [P.w_point(k) for k in range(21)]
    assert strictly_monotone(edge_slopes(ws)) is not None
    h = convex_hull(ws + [P.w_point(math.inf)])
    assert h.vertex_set() == set(ws) | {P.w_point(math.inf)}
    assert all(P.params.h_exceeds(w) for w in ws)


def test_predicted_vertices():
    inf = P.w_point(math.inf)
    assert set(predicted_vertices(P, 4)) == {P.w0, P.w_point(1), inf}
    assert set(predicted_vertices(P, 5)) == {P.w0, P.w_point(1), P.w_point(2), inf}
    assert set(predicted_vertices(P, 3)) == {P.w0, inf}


@pytest.mark.parametrize("n", range(4, 11))
def test_hull_grows_by_one_vertex(n):
    h = convex_hull(P.rotation_vectors(enumerate_orbits(3, n)))
    assert h.vertex_set() == set(predicted_vertices(P, n))
    assert len(h) == n - P.lam + 2


def test_gkr_examples():
    assert gkr_g(0, 0) == 1
    assert gkr_g(0.5, 0.25) == 0
    assert gkr_g(0.5, 0.5) == 0.5
    with pytest.raises(DomainError):
        gkr_g(0.5, 0.1)
    with pytest.raises(DomainError):
        gkr_g(0, 1.5)


def _turn(o, a, b):
    return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)


@given(st.lists(points, min_size=1, max_size=30))
def test_hull_properties(pts):
    h = convex_hull(pts)
    assert convex_hull(h.vertices) == h
    assert all(h.contains(p) for p in pts)
    v = h.vertices
    assert v[0] == min(pts)
    if len(v) >= 3:
        # strictly convex, counterclockwise
        assert all(_turn(v[i - 2], v[i - 1], v[i]) > 0 for i in range(len(v)))


@given(st.lists(points, min_size=1, max_size=30), points)
def test_support_is_max_over_points(pts, d):
    if d == Vec2Q(0, 0):
        return
    assert hull_support(convex_hull(pts), d) == max(p.dot(d) for p in pts)


@given(
    st.floats(-1, 1), st.floats(0, 1), st.floats(-1, 1), st.floats(0, 1), st.floats(0, 1)
)
def test_gkr_midpoint_concave(a1, a2, b1, b2, t):
    if a1 * a1 > a2 or b1 * b1 > b2:
        return
    mid = (t * a1 + (1 - t) * b1, t * a2 + (1 - t) * b2)
    assert gkr_g(*mid) >= t * gkr_g(a1, a2) + (1 - t) * gkr_g(b1, b2) - 1e-12
