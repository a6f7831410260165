import math
from fractions import Fraction as F

import numpy as np
import pytest

from rotspec.acceptance import automaton_root
from rotspec.entropy import (
    InfeasibleTarget,
    check_feasible,
    dual_localized_entropy,
    primal_constrained_entropy,
)
from rotspec.potential import Potential, Vec2Q
from rotspec.transfer import build_graph, pressure

P = Potential()
G3 = build_graph(P.locally_constant_table(3, coarse=True))
G4 = build_graph(P.locally_constant_table(4))
L6 = build_graph(P.locally_constant_table(6)).lumped()
LOG2 = math.log(2)


def test_dual_at_origin():
    s = dual_localized_entropy(L6, P.w_point(math.inf))
    assert LOG2 - 1e-12 <= s.estimate <= LOG2 + 5e-3


def test_dual_at_w0():
    s = dual_localized_entropy(G4, P.w0)
    assert s.estimate == pytest.approx(math.log(automaton_root(3)), abs=1e-2)


def test_dual_at_w_k_is_small():
    for k in (1, 2):
        assert dual_localized_entropy(L6, P.w_point(k)).estimate < 1e-6


def test_infeasible_target_names_direction():
    with pytest.raises(InfeasibleTarget, match="direction"):
        dual_localized_entropy(L6, (2.0, 0.0))
    with pytest.raises(InfeasibleTarget):
        check_feasible(L6, (0.5, 0.5))


def test_dual_is_certified_at_every_iterate():
    w = P.w_point(1)
    s = dual_localized_entropy(L6, w, T=50, max_iter=40)
    d = pressure(L6, s.alpha_star)
    assert s.estimate == pytest.approx(d.pressure - s.alpha_star @ np.array(w.as_float()), abs=1e-12)
    assert np.linalg.norm(s.alpha_star) <= 50 * (1 + 1e-12)
    assert s.estimate == min(s.history)


def test_cap_reported_as_unconverged():
    s = dual_localized_entropy(L6, P.w_point(2), T=5)
    assert np.linalg.norm(s.alpha_star) == pytest.approx(5)
    assert not s.converged


def test_estimate_non_increasing_in_cap():
    for w in (P.w_point(1), P.w0 / 2):
        ests = [dual_localized_entropy(L6, w, T=T).estimate for T in (1, 10, 100, 1000)]
        assert all(b <= a + 1e-12 for a, b in zip(ests, ests[1:]))


def test_primal_examples():
    uniform = pressure(G3, [0, 0]).rv
    assert primal_constrained_entropy(G3, uniform) == pytest.approx(math.log(3), abs=1e-9)
    assert primal_constrained_entropy(G3, (0, 0)) == pytest.approx(LOG2, abs=1e-6)


def test_primal_limits():
    with pytest.raises(ValueError):
        primal_constrained_entropy(L6, (0.5, 0.0))
    with pytest.raises(InfeasibleTarget):
        primal_constrained_entropy(G3, (0.5, 0.1))


@pytest.mark.parametrize("t", [F(1, 6), F(1, 3), F(1, 2), F(2, 3), F(5, 6)])
def test_primal_dual_agree_m3(t):
    w = P.w0 * t
    dual = dual_localized_entropy(G3.lumped(), w).estimate
    assert primal_constrained_entropy(G3, w) == pytest.approx(dual, abs=1e-6)


@pytest.mark.parametrize("w", [(0.5, 0.05), (0.8, 0.1), (0.364, 0.003)])
def test_primal_dual_agree_m4(w):
    dual = dual_localized_entropy(G4, w).estimate
    assert primal_constrained_entropy(G4, w) == pytest.approx(dual, abs=1e-6)


def test_weak_duality_midpoint():
    w = 0.5 * pressure(G3, [0, 0]).rv
    assert primal_constrained_entropy(G3, w) <= dual_localized_entropy(G3, w).estimate + 1e-6
    for w in (P.w_point(math.inf), P.w0):
        assert primal_constrained_entropy(G3, w) <= dual_localized_entropy(G3, w).estimate + 1e-6
