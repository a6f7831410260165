"""The acceptance suite: twelve numbered criteria, run by ``rotspec verify``.

Each criterion returns a Report whose checks include its runtime budget.
"""
from __future__ import annotations

import filecmp
import math
import tempfile
import time
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Callable

import numpy as np

from . import reproduce as R
from .entropy import dual_localized_entropy, primal_constrained_entropy
from .geometry import convex_hull, edge_slopes, strictly_monotone
from .potential import Potential, PotentialParams, Vec2Q, empirical_lipschitz
from .symbolic import enumerate_orbits
from .transfer import build_graph, karp_max_cycle_means, pressure


@dataclass
class SuiteConfig:
    params: PotentialParams
    out_dir: Path
    seed: int = 0
    tol: float = 1e-9
    T: float = 1e3


def _budget(rep: R.Report, seconds: float) -> None:
    # elapsed time stays out of the detail so that report.json is reproducible
    rep.check(f"runtime < {seconds:g} s", rep.wall_time < seconds)


def automaton_root(lam: int) -> float:
    """Perron root of the run-length automaton of sequences with a 2 in every lam-window.

    State j counts the symbols since the last 2; a 2 resets to 0, while
    either of the two other symbols moves to j + 1 and is forbidden at j = lam - 1.
    """
    M = np.zeros((lam, lam))
    M[:, 0] = 1.0
    for j in range(lam - 1):
        M[j, j + 1] = 2.0
    return float(max(abs(np.linalg.eigvals(M))))


# -- criteria -------------------------------------------------------------------


def c1_rotation_set(cfg: SuiteConfig, pot: Potential) -> R.Report:
    rep = R.rotation_set_report(pot, 12, cfg.out_dir)
    _budget(rep, 10)
    return rep


def c2_uniqueness(cfg: SuiteConfig, pot: Potential) -> R.Report:
    t0 = time.perf_counter()
    rep = R.Report("uniqueness of the w_k orbits, k = 1..6, N = 12", params=R.param_echo(pot.params))
    for k in range(1, 7):
        sub = R.uniqueness_report(pot, k, 12)
        rep.checks += sub.checks
    rep.wall_time = time.perf_counter() - t0
    _budget(rep, 10)
    return rep


def c3_slopes(cfg: SuiteConfig, pot: Potential) -> R.Report:
    t0 = time.perf_counter()
    rep = R.Report("slopes and extremality, k <= 20", params=R.param_echo(pot.params))
    ws = [pot.w_point(k) for k in range(21)]
    slopes = edge_slopes(ws)
    mono = strictly_monotone(slopes)
    rep.check("slopes m_k strictly monotone", mono is not None,
              f"{mono}; m_1..m_4 = {[str(s) for s in slopes[:4]]}")
    hull = convex_hull(ws + [pot.w_point(math.inf)])
    missing = [k for k, w in enumerate(ws) if w not in hull.vertex_set()]
    rep.check("every w_k (k <= 20) is a hull vertex", not missing, f"non-vertices: {missing}")
    above = [k for k, w in enumerate(ws) if not pot.params.h_exceeds(w)]
    rep.check("every w_k lies strictly below the graph of h", not above, f"violations: {above}")
    rep.tables["slopes"] = [{"k": k + 1, "m_k": str(s)} for k, s in enumerate(slopes)]
    rep.wall_time = time.perf_counter() - t0
    _budget(rep, 1)
    return rep


def c4_lipschitz(cfg: SuiteConfig, pot: Potential) -> R.Report:
    t0 = time.perf_counter()
    rep = R.Report("Lipschitz bound on periodic points, period <= 8", params=R.param_echo(pot.params))
    ratio, pair = empirical_lipschitz(pot, 8)
    bound = pot.lipschitz_bound()
    rep.check("empirical ratio <= bound (exact)", ratio <= bound,
              f"ratio {ratio}, bound {bound}, witness {pair}")
    rep.wall_time = time.perf_counter() - t0
    _budget(rep, 30)
    return rep


def c5_entropy_at_origin(cfg: SuiteConfig, pot: Potential) -> R.Report:
    t0 = time.perf_counter()
    rep = R.Report("entropy at w_inf equals log 2 (m = 8)", params=R.param_echo(pot.params))
    witness = R.bernoulli_witness()
    rep.check("primal witness is exactly log 2", witness == math.log(2), repr(witness))
    g = build_graph(pot.locally_constant_table(8)).lumped()
    s = dual_localized_entropy(g, pot.w_point(math.inf), T=cfg.T, tol=cfg.tol)
    lo, hi = math.log(2), math.log(2) + 5e-3
    rep.check("dual estimate in [log 2, log 2 + 5e-3]",
              lo - R.FLOAT_SLACK <= s.estimate <= hi,
              f"{s.estimate:.12f} (converged={s.converged}, {s.iterations} it)")
    rep.wall_time = time.perf_counter() - t0
    _budget(rep, 30)
    return rep


def c6_entropy_at_w0(cfg: SuiteConfig, pot: Potential) -> R.Report:
    t0 = time.perf_counter()
    rep = R.Report("entropy at w_0 against the automaton root (m = 8)", params=R.param_echo(pot.params))
    x_star = automaton_root(pot.lam)
    if pot.lam == 3:
        cubic = max(r.real for r in np.roots([1, -1, -2, -4]) if abs(r.imag) < 1e-12)
        rep.check("automaton root is the real root of x^3 - x^2 - 2x - 4",
                  abs(cubic - x_star) < 1e-12, f"{x_star:.15f} vs {cubic:.15f}")
    g = build_graph(pot.locally_constant_table(8)).lumped()
    s = dual_localized_entropy(g, pot.w0, T=cfg.T, tol=cfg.tol)
    target = math.log(x_star)
    rep.check("|dual estimate - log x*| <= 1e-2", abs(s.estimate - target) <= 1e-2,
              f"estimate {s.estimate:.10f}, log x* {target:.10f}")
    rep.wall_time = time.perf_counter() - t0
    _budget(rep, 30)
    return rep


def c7_discontinuity(cfg: SuiteConfig, pot: Potential) -> R.Report:
    m = 9
    ks = list(range(1, m - pot.lam))
    rep = R.discontinuity_report(pot, ks, m, T=cfg.T, tol=cfg.tol, out_dir=cfg.out_dir)
    _budget(rep, 120)
    return rep


def c8_pressure_gradient(cfg: SuiteConfig, pot: Potential) -> R.Report:
    t0 = time.perf_counter()
    rep = R.Report("pressure gradient and equilibrium identity (m = 6)", params=R.param_echo(pot.params))
    g = build_graph(pot.locally_constant_table(6))
    rng = np.random.default_rng(cfg.seed)
    radius = 5 * np.sqrt(rng.random(20))
    angle = 2 * np.pi * rng.random(20)
    alphas = np.stack([radius * np.cos(angle), radius * np.sin(angle)], axis=1)

    def P_mid(a):
        d = pressure(g, a, tol=1e-14)
        return 0.5 * (d.pressure + d.pressure_lower)

    def central(a, h):
        out = np.empty(2)
        for i in range(2):
            e = np.zeros(2)
            e[i] = h
            out[i] = (P_mid(a + e) - P_mid(a - e)) / (2 * h)
        return out

    worst_rel = worst_vec = worst_id = 0.0
    for a in alphas:
        d = pressure(g, a, tol=1e-14)
        # Richardson extrapolation of central differences, error O(h^4)
        fd = (4 * central(a, 5e-3) - central(a, 1e-2)) / 3
        worst_rel = max(worst_rel, float(np.max(np.abs(fd - d.rv) / np.abs(d.rv))))
        worst_vec = max(worst_vec, float(np.max(np.abs(fd - d.rv)) / np.max(np.abs(d.rv))))
        worst_id = max(worst_id, abs(d.pressure - d.entropy - a @ d.rv))
    rep.check("finite differences match rv componentwise, relative <= 1e-5", worst_rel <= 1e-5,
              f"worst componentwise {worst_rel:.3g}, worst in sup norm {worst_vec:.3g}")
    rep.check("P = h + alpha . rv within 1e-8", worst_id <= 1e-8, f"worst {worst_id:.3g}")
    rep.wall_time = time.perf_counter() - t0
    _budget(rep, 10)
    return rep


def c9_primal_dual(cfg: SuiteConfig, pot: Potential) -> R.Report:
    t0 = time.perf_counter()
    rep = R.Report("primal/dual agreement (m = 3)", params=R.param_echo(pot.params))
    g = build_graph(pot.locally_constant_table(3, coarse=True))
    lg = g.lumped()
    # the memory-3 rotation set is the segment [w_inf, w_0]
    interior = [pot.w0 * Fraction(i, 6) for i in range(1, 6)]
    boundary = [pot.w_point(math.inf), pot.w0]
    rows = []
    for w in interior + boundary:
        dual = dual_localized_entropy(lg, w, T=cfg.T, tol=cfg.tol).estimate
        primal = primal_constrained_entropy(g, w)
        rows.append((w, primal, dual))
    gap = max(abs(p - d) for w, p, d in rows[: len(interior)])
    rep.check("|primal - dual| <= 1e-3 at 5 interior targets", gap <= 1e-3, f"max gap {gap:.3g}")
    weak = max(p - d for w, p, d in rows)
    rep.check("primal <= dual + 1e-6 at all targets", weak <= 1e-6, f"max primal - dual {weak:.3g}")
    rep.tables["primal_dual"] = [
        {"wx": R.q(w.x), "wy": R.q(w.y), "primal": R.fnum(p), "dual": R.fnum(d)} for w, p, d in rows
    ]
    rep.wall_time = time.perf_counter() - t0
    _budget(rep, 30)
    return rep


def c10_karp(cfg: SuiteConfig, pot: Potential) -> R.Report:
    t0 = time.perf_counter()
    rep = R.Report("Karp support against orbit enumeration (m = 3)", params=R.param_echo(pot.params))
    table = pot.locally_constant_table(3, coarse=True)
    g = build_graph(table)
    rng = np.random.default_rng(cfg.seed)
    angle = 2 * np.pi * rng.random(16)
    dirs = np.stack([np.cos(angle), np.sin(angle)], axis=1)
    karp = karp_max_cycle_means(g, dirs)
    rvs = np.array([pot.rotation_vector_table(o, table).as_float() for o in enumerate_orbits(3, 9)])
    enum = (rvs @ dirs.T).max(axis=0)
    err = float(np.max(np.abs(karp - enum)))
    rep.check("karp_support = max over orbits of period <= 9, to 1e-12", err <= 1e-12, f"max error {err:.3g}")
    rep.wall_time = time.perf_counter() - t0
    _budget(rep, 10)
    return rep


def c11_gkr(cfg: SuiteConfig, pot: Potential) -> R.Report:
    rep = R.gkr_report(10_000, cfg.seed)
    _budget(rep, 5)
    return rep


CRITERIA: list[tuple[int, str, Callable[[SuiteConfig, Potential], R.Report]]] = [
    (1, "exact rotation set", c1_rotation_set),
    (2, "uniqueness", c2_uniqueness),
    (3, "slopes and extremality", c3_slopes),
    (4, "Lipschitz bound", c4_lipschitz),
    (5, "entropy at w_inf", c5_entropy_at_origin),
    (6, "entropy at w_0", c6_entropy_at_w0),
    (7, "discontinuity at w_inf", c7_discontinuity),
    (8, "pressure gradient", c8_pressure_gradient),
    (9, "primal/dual consistency", c9_primal_dual),
    (10, "Karp vs enumeration", c10_karp),
    (11, "g counterexample", c11_gkr),
]


def run_criteria(cfg: SuiteConfig, ids=None, echo: Callable[[str], None] | None = None) -> list[tuple[int, str, R.Report]]:
    """Run criteria 1-11 (or the listed ids) with one fresh Potential."""
    pot = Potential(cfg.params)
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    results = []
    for cid, name, fn in CRITERIA:
        if ids is not None and cid not in ids:
            continue
        rep = fn(cfg, pot)
        results.append((cid, name, rep))
        if echo:
            echo(status_line(cid, name, rep))
    return results


def status_line(cid: int, name: str, rep: R.Report) -> str:
    failed = [c for c in rep.checks if not c.passed]
    shown = failed or [c for c in rep.checks if c.detail][:1]
    detail = "; ".join(f"{c.name}: {c.detail}" for c in shown)
    return f"criterion {cid:2d} [{'PASS' if rep.passed else 'FAIL'}] {name} ({rep.wall_time:.2f} s): {detail}"


def suite_json(results, params: PotentialParams) -> dict:
    return {
        "params": R.param_echo(params),
        "passed": all(rep.passed for _, _, rep in results),
        "criteria": [
            {"id": cid, "name": name, **rep.to_dict()} for cid, name, rep in results
        ],
    }


OUTPUT_SUFFIXES = (".csv", ".json", ".svg")


def _outputs(d: Path) -> list[str]:
    return sorted(p.name for p in d.iterdir() if p.suffix in OUTPUT_SUFFIXES)


def c12_determinism(cfg: SuiteConfig, first: Path) -> R.Report:
    """Rerun criteria 1-11 into a scratch directory and compare every output byte for byte."""
    t0 = time.perf_counter()
    rep = R.Report("determinism of CSV/JSON/SVG outputs", params=R.param_echo(cfg.params))
    with tempfile.TemporaryDirectory() as tmp:
        second = Path(tmp)
        cfg2 = SuiteConfig(cfg.params, second, cfg.seed, cfg.tol, cfg.T)
        results = run_criteria(cfg2)
        R.write_json(second / "report.json", suite_json(results, cfg.params))
        a, b = _outputs(first), _outputs(second)
        rep.check("same output files", a == b, f"{a} vs {b}")
        _, mismatch, errors = filecmp.cmpfiles(first, second, a, shallow=False)
        rep.check("byte-identical outputs", not mismatch and not errors,
                  f"{len(a)} files compared; differing: {mismatch + errors}")
    rep.wall_time = time.perf_counter() - t0
    return rep


def verify(cfg: SuiteConfig, echo: Callable[[str], None] | None = print) -> tuple[bool, dict]:
    """Run the full suite, write report.json, return (all passed, json document)."""
    results = run_criteria(cfg, echo=echo)
    # report.json of criteria 1-11 first, so the determinism rerun can compare it
    R.write_json(cfg.out_dir / "report.json", suite_json(results, cfg.params))
    rep12 = c12_determinism(cfg, cfg.out_dir)
    results.append((12, "determinism", rep12))
    if echo:
        echo(status_line(12, "determinism", rep12))
    doc = suite_json(results, cfg.params)
    R.write_json(cfg.out_dir / "report.json", doc)
    return doc["passed"], doc
