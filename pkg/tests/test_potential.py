import math
from fractions import Fraction as F
from itertools import combinations, product

import pytest
from hypothesis import given, settings, strategies as st

from rotspec.geometry import convex_hull, predicted_vertices
from rotspec.potential import (
    ParamFileError,
    Potential,
    PotentialParams,
    ValueClass,
    Vec2Q,
    empirical_lipschitz,
    format_params,
    parse_params,
)
from rotspec.symbolic import PeriodicOrbit, enumerate_orbits, orbit_points, theta_distance

P = Potential()


def test_points():
    assert P.v_point(1) == Vec2Q(F(1, 4), F(1, 2))
    assert P.v_point(3) == Vec2Q(F(1, 64), F(1, 8))
    assert P.u_point(2) == Vec2Q(F(1, 16), 0)
    with pytest.raises(ValueError):
        P.v_point(0)
    with pytest.raises(ValueError):
        P.u_point(0)


def test_w_points():
    assert P.w_point(0) == Vec2Q(1, 0)
    assert P.w_point(1) == Vec2Q(F(13, 16), F(1, 8))
    assert P.w_point(2) == Vec2Q(F(53, 80), F(3, 20))
    assert P.w_point(math.inf) == Vec2Q(0, 0)


def test_w_point_matches_definition():
    for k in range(1, 15):
        s = sum((P.v_point(j) for j in range(1, k + 1)), P.w0 * P.lam)
        assert P.w_point(k) == s / (k + P.lam)


def test_classify_prefix():
    assert P.classify_prefix("112") == ValueClass("W0")
    assert P.classify_prefix("1112") == ValueClass("V", k=1)
    assert P.classify_prefix("0112") == ValueClass("U", k=1)
    assert P.classify_prefix("11111") == ValueClass("Undetermined", bound=F(1, 4))
    with pytest.raises(ValueError):
        P.classify_prefix("0113")


def test_phi_on_periodic():
    assert P.phi_on_periodic("0") == Vec2Q(0, 0)
    assert P.phi_on_periodic("1112") == Vec2Q(F(1, 4), F(1, 2))
    assert P.phi_on_periodic("2111") == Vec2Q(1, 0)


def test_rotation_vector_examples():
    assert P.rotation_vector(PeriodicOrbit(2, "02")) == Vec2Q(1, 0)
    assert P.rotation_vector(PeriodicOrbit(4, "1112")) == Vec2Q(F(13, 16), F(1, 8))
    assert P.rotation_vector(PeriodicOrbit(1, "0")) == Vec2Q(0, 0)


@pytest.mark.parametrize("k", range(1, 13))
def test_xi_orbit_realizes_w_k(k):
    assert P.rotation_vector("1" * (k + P.lam - 1) + "2") == P.w_point(k)


def test_fast_rotation_vector_matches_reference():
    for o in enumerate_orbits(3, 8):
        assert P.rotation_vector(o) == P.rotation_vector_slow(o)


def test_rotation_vectors_inside_predicted_hull():
    hull = convex_hull(predicted_vertices(P, 10))
    for o in enumerate_orbits(3, 10):
        v = P.rotation_vector(o)
        assert 0 <= v.x <= 1 and 0 <= v.y <= 1
        assert hull.contains(v)


def test_table():
    t = P.locally_constant_table(4)
    assert len(t.values) == 81
    assert t["1112"] == Vec2Q(F(1, 4), F(1, 2))
    assert t["0000"] == Vec2Q(0, 0)
    # C theta^(m+1-lam) = 2 / 4; the largest value an undetermined cylinder can take is |v_2| = 1/4
    assert t.sup_error == F(1, 2)
    assert P.v_point(2).sup_norm() == F(1, 4)
    with pytest.raises(ValueError, match="memory below lambda\\+1"):
        P.locally_constant_table(3)
    assert len(P.locally_constant_table(3, coarse=True).values) == 27


@pytest.mark.parametrize("m", [4, 5, 6])
def test_table_error_bound_on_extensions(m):
    # every extension of an undetermined word stays within sup_error of its table value
    t = P.locally_constant_table(m)
    for w, val in t.values.items():
        if "2" in w:
            continue
        for suffix in product("012", repeat=3):
            s = w + "".join(suffix)
            ext = P.phi_on_periodic(s) if "2" in s else Vec2Q(0, 0)
            assert (ext - val).sup_norm() <= t.sup_error


def test_decay():
    assert P.params.decay_holds(30)
    p = P.params
    for k in range(1, 31):
        assert P.v_point(k).sup_norm() < p.C * p.theta**k


def test_lipschitz_bound_examples():
    assert P.lipschitz_bound() == 32
    assert Potential(PotentialParams(C1=10)).lipschitz_bound() == 80
    assert Potential(PotentialParams(theta=F(1, 4))).lipschitz_bound() == 256


def test_empirical_lipschitz_matches_brute_force():
    h = P.params.theta
    for n in (4, 5):
        pts = [q for o in enumerate_orbits(3, n) for q in orbit_points(o)]
        vals = {q: P.phi_on_periodic(q) for q in pts}
        best = max(
            (vals[x] - vals[y]).sup_norm() / theta_distance(x, y, h) for x, y in combinations(pts, 2)
        )
        ratio, pair = empirical_lipschitz(P, n)
        assert ratio == best
        x, y = pair
        assert (vals[x] - vals[y]).sup_norm() / theta_distance(x, y, h) == ratio


def test_empirical_lipschitz_period_8():
    ratio, _ = empirical_lipschitz(P, 8)
    assert ratio <= P.lipschitz_bound()


def test_params_validation():
    for bad in (dict(a=0), dict(b=-1), dict(lam=2), dict(theta=1), dict(C=0), dict(x_rule="linear")):
        with pytest.raises(ValueError):
            PotentialParams(**bad)


def test_param_file_roundtrip():
    p = PotentialParams(a=F(3, 2), lam=4, theta=F(1, 3), C=3)
    assert parse_params(format_params(p)) == p
    assert parse_params("# defaults\n\n") == PotentialParams()


@pytest.mark.parametrize(
    "text, field",
    [
        ("lambda = 2", "lambda"),
        ("alpha = 1", "alpha"),
        ("a = 1\na = 2", "a"),
        ("a = 0.5", "a"),
        ("theta_num = 1\ntheta_den = 0", "theta_den"),
        ("just words", "line 1"),
    ],
)
def test_param_file_errors(text, field):
    with pytest.raises(ParamFileError) as e:
        parse_params(text)
    assert e.value.field == field


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 4), st.integers(2, 6), st.integers(3, 5), st.integers(2, 12))
def test_xi_realizes_w_k_for_other_parameters(num, den, lam, k):
    if num >= den:
        num = den - 1
    pot = Potential(PotentialParams(lam=lam, theta=F(num, den), C=2))
    seg = "1" * (k + lam - 1) + "2"
    assert pot.rotation_vector(seg) == pot.w_point(k)
    assert pot.rotation_vector(PeriodicOrbit.from_segment(seg)) == pot.rotation_vector_slow(
        PeriodicOrbit.from_segment(seg)
    )
