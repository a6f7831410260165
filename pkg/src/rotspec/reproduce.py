"""End-to-end experiments: each returns a Report and writes its files under an output directory."""
from __future__ import annotations

import csv
import io
import json
import math
import time
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Sequence

import numpy as np

from .entropy import InfeasibleTarget, SpectrumSample, dual_localized_entropy
from .geometry import HullQ, convex_hull, gkr_g, predicted_vertices
from .potential import Potential, PotentialParams, Vec2Q
from .symbolic import PeriodicOrbit, canonical_necklace, enumerate_orbits
from .transfer import build_graph, markov_entropy


@dataclass
class Check:
    name: str
    passed: bool
    detail: str = ""


@dataclass
class Report:
    name: str
    checks: list[Check] = field(default_factory=list)
    tables: dict[str, list[dict]] = field(default_factory=dict)
    params: dict[str, str] = field(default_factory=dict)
    wall_time: float = 0.0
    files: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def check(self, name: str, ok: bool, detail: str = "") -> bool:
        self.checks.append(Check(name, bool(ok), detail))
        return bool(ok)

    def to_dict(self, with_time: bool = False) -> dict:
        d = {
            "name": self.name,
            "passed": self.passed,
            "checks": [asdict(c) for c in self.checks],
            "params": self.params,
            "tables": self.tables,
            "files": self.files,
        }
        if with_time:
            d["wall_time"] = self.wall_time
        return d

    def summary(self) -> str:
        lines = [f"[{'PASS' if self.passed else 'FAIL'}] {self.name} ({self.wall_time:.2f} s)"]
        for c in self.checks:
            lines.append(f"  {'ok ' if c.passed else 'BAD'} {c.name}: {c.detail}")
        return "\n".join(lines)


def param_echo(p: PotentialParams) -> dict[str, str]:
    return {
        "a": str(p.a),
        "b": str(p.b),
        "lambda": str(p.lam),
        "theta": str(p.theta),
        "C": str(p.C),
        "C1": str(p.C1),
        "x_rule": p.x_rule,
    }


# float slack when comparing a computed value against an exact lower bound
FLOAT_SLACK = 1e-12


def q(v: Fraction) -> str:
    return str(Fraction(v))


def fnum(x: float) -> str:
    return repr(float(x))


def _write_csv(path: Path, header: Sequence[str], rows: Sequence[Sequence]) -> None:
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(header)
    wr.writerows(rows)
    path.write_text(buf.getvalue())


# -- cached exact data ----------------------------------------------------------


def orbit_rotation_vectors(pot: Potential, max_period: int) -> tuple[list[PeriodicOrbit], list[Vec2Q]]:
    cache = pot.__dict__.setdefault("_orbit_rv_cache", {})
    # a longer enumeration serves any shorter horizon (orbits are sorted by period)
    for n, (orbs, rvs) in cache.items():
        if n >= max_period:
            k = next((i for i, o in enumerate(orbs) if o.period > max_period), len(orbs))
            return orbs[:k], rvs[:k]
    orbs = enumerate_orbits(3, max_period)
    rvs = pot.rotation_vectors(orbs)
    cache[max_period] = (orbs, rvs)
    return orbs, rvs


# -- rotation set ---------------------------------------------------------------


def rotation_set_report(pot: Potential, max_period: int, out_dir: Path | None = None) -> Report:
    if max_period < 1:
        raise ValueError("max_period must be >= 1")
    t0 = time.perf_counter()
    rep = Report(f"rotation_set(N={max_period})", params=param_echo(pot.params))
    orbs, rvs = orbit_rotation_vectors(pot, max_period)
    hull = convex_hull(rvs)
    predicted = predicted_vertices(pot, max_period)
    rep.check(
        "hull vertices equal predicted {w_0..w_(N-lam), w_inf}",
        hull.vertex_set() == frozenset(predicted),
        f"{len(hull)} hull vertices from {len(orbs)} orbits, {len(predicted)} predicted",
    )
    names = _vertex_names(pot, hull)
    rep.tables["hull"] = [
        {"label": names[v], "x": q(v.x), "y": q(v.y)} for v in hull.vertices
    ]
    if out_dir is not None:
        out_dir.mkdir(parents=True, exist_ok=True)
        csv_path = out_dir / f"hull_{max_period}.csv"
        _write_csv(
            csv_path,
            ["index", "label", "x", "y", "x_float", "y_float"],
            [
                [i, names[v], q(v.x), q(v.y), fnum(v.x), fnum(v.y)]
                for i, v in enumerate(hull.vertices)
            ],
        )
        svg_path = out_dir / f"hull_{max_period}.svg"
        svg_path.write_text(hull_svg(pot, hull, names))
        rep.files += [csv_path.name, svg_path.name]
    rep.wall_time = time.perf_counter() - t0
    return rep


def _vertex_names(pot: Potential, hull: HullQ) -> dict[Vec2Q, str]:
    names = {}
    kmax = 64
    known = {pot.w_point(k): f"w_{k}" for k in range(kmax)}
    known[pot.w_point(math.inf)] = "w_inf"
    for v in hull.vertices:
        names[v] = known.get(v, "?")
    return names


def hull_svg(pot: Potential, hull: HullQ, names: dict[Vec2Q, str]) -> str:
    """SVG of the hull with vertex labels and the graph of h; fixed styling so diffs stay readable."""
    W, H, pad = 640, 400, 40
    a, b = float(pot.params.a), float(pot.params.b)
    ymax = max(float(v.y) for v in hull.vertices) * 1.6 or b

    def sx(x):
        return pad + (W - 2 * pad) * x / a

    def sy(y):
        return H - pad - (H - 2 * pad) * y / ymax

    poly = " ".join(f"{sx(float(v.x)):.3f},{sy(float(v.y)):.3f}" for v in hull.vertices)
    curve = " ".join(
        f"{sx(x):.3f},{sy(b * math.sqrt(x / a)):.3f}"
        for x in (a * (i / 400) ** 2 for i in range(401))
    )
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">',
        f'<clipPath id="box"><rect x="{pad}" y="{pad}" width="{W - 2 * pad}" height="{H - 2 * pad}"/></clipPath>',
        f'<line x1="{pad}" y1="{H - pad}" x2="{W - pad / 2}" y2="{H - pad}" stroke="black"/>',
        f'<line x1="{pad}" y1="{H - pad}" x2="{pad}" y2="{pad / 2}" stroke="black"/>',
        f'<polygon points="{poly}" fill="lightgray" fill-opacity="0.5" stroke="black" stroke-width="1"/>',
        f'<polyline points="{curve}" fill="none" stroke="steelblue" clip-path="url(#box)"/>',
        f'<text x="{W - pad}" y="{pad + 12}" font-size="12" fill="steelblue">h</text>',
    ]
    for v in hull.vertices:
        x, y = sx(float(v.x)), sy(float(v.y))
        parts.append(f'<circle cx="{x:.3f}" cy="{y:.3f}" r="2.5"/>')
        parts.append(
            f'<text x="{x + 3:.3f}" y="{y - 5:.3f}" font-size="10">{names.get(v, "")}</text>'
        )
    parts.append("</svg>\n")
    return "\n".join(parts)


# -- uniqueness -----------------------------------------------------------------


def xi_necklace(pot: Potential, k: int) -> str:
    """Generating segment 1^{k+lam-1} 2 of the orbit realizing w_k, as a Lyndon word."""
    return canonical_necklace("1" * (k + pot.lam - 1) + "2")


def uniqueness_report(pot: Potential, k: int, max_period: int) -> Report:
    if k < 1 or k + pot.lam > max_period:
        raise ValueError("need k >= 1 and k + lambda <= max_period")
    t0 = time.perf_counter()
    rep = Report(f"uniqueness(k={k}, N={max_period})", params=param_echo(pot.params))
    orbs, rvs = orbit_rotation_vectors(pot, max_period)
    target = pot.w_point(k)
    hits = [o.necklace for o, v in zip(orbs, rvs) if v == target]
    expected = xi_necklace(pot, k)
    rep.check(
        f"only O({expected}) has rotation vector w_{k}",
        hits == [expected],
        f"orbits with rv = w_{k} = {target}: {hits}",
    )
    rep.tables["hits"] = [{"necklace": h} for h in hits]
    rep.wall_time = time.perf_counter() - t0
    return rep


# -- spectrum -------------------------------------------------------------------

SPECTRUM_COLUMNS = ["wx", "wy", "estimate_nats", "alpha1", "alpha2", "converged", "iterations"]


def segment_targets(pot: Potential, m: int, samples: int = 10) -> list[Vec2Q]:
    """Equally spaced points from the centroid of predicted_vertices(m) to w_inf (inclusive)."""
    verts = predicted_vertices(pot, m)
    c = sum(verts[1:], verts[0]) / len(verts)
    return [c * Fraction(samples - 1 - i, samples - 1) for i in range(samples)]


def vertex_targets(pot: Potential, m: int) -> list[Vec2Q]:
    return predicted_vertices(pot, m)


def spectrum_scan(
    pot: Potential,
    targets: Sequence[Vec2Q],
    m: int,
    T: float = 1e3,
    tol: float = 1e-9,
    out_dir: Path | None = None,
) -> tuple[list[SpectrumSample | None], Report]:
    t0 = time.perf_counter()
    rep = Report(f"spectrum(m={m}, T={T:g})", params=param_echo(pot.params))
    g = build_graph(pot.locally_constant_table(m)).lumped()
    samples: list[SpectrumSample | None] = []
    rows = []
    for w in targets:
        try:
            s = dual_localized_entropy(g, w, T=T, tol=tol)
        except InfeasibleTarget as exc:
            samples.append(None)
            rows.append([fnum(w.x), fnum(w.y), "infeasible", "", "", "", ""])
            rep.check(f"target {w} feasible", False, str(exc))
            continue
        samples.append(s)
        rows.append([
            fnum(w.x), fnum(w.y), fnum(s.estimate),
            fnum(s.alpha_star[0]), fnum(s.alpha_star[1]),
            str(s.converged).lower(), str(s.iterations),
        ])
    rep.tables["spectrum"] = [dict(zip(SPECTRUM_COLUMNS, r)) for r in rows]
    if out_dir is not None:
        out_dir.mkdir(parents=True, exist_ok=True)
        path = out_dir / f"spectrum_{m}.csv"
        _write_csv(path, SPECTRUM_COLUMNS, rows)
        rep.files.append(path.name)
    rep.wall_time = time.perf_counter() - t0
    return samples, rep


# -- discontinuity --------------------------------------------------------------


def bernoulli_witness() -> float:
    """Entropy of the uniform Bernoulli measure on {0,1}^N, whose rotation vector is w_inf."""
    P = np.full((2, 2), 0.5)
    return markov_entropy(P, np.array([0.5, 0.5]))


DISCONTINUITY_COLUMNS = [
    "target", "wx", "wy", "estimate_nats", "exact_value", "alpha1", "alpha2",
    "converged", "iterations", "primal_witness",
]


def discontinuity_report(
    pot: Potential,
    ks: Sequence[int],
    m: int,
    T: float = 1e3,
    tol: float = 1e-9,
    gap_threshold: float = 0.3,
    out_dir: Path | None = None,
) -> Report:
    if not ks or min(ks) < 1 or max(ks) > m - pot.lam - 1:
        raise ValueError(f"need 1 <= k <= m - lambda - 1 = {m - pot.lam - 1}")
    t0 = time.perf_counter()
    rep = Report(f"discontinuity(m={m}, T={T:g}, ks={list(ks)})", params=param_echo(pot.params))
    table = pot.locally_constant_table(m)
    g = build_graph(table).lumped()

    rows = []
    w_inf = pot.w_point(math.inf)
    s_inf = dual_localized_entropy(g, w_inf, T=T, tol=tol)
    s_inf.primal_witness = bernoulli_witness()
    rows.append(("w_inf", w_inf, s_inf, "log 2"))
    est_k = {}
    for k in ks:
        s = dual_localized_entropy(g, pot.w_point(k), T=T, tol=tol)
        est_k[k] = s.estimate
        rows.append((f"w_{k}", pot.w_point(k), s, "0"))

    out_rows = []
    for name, w, s, exact in rows:
        out_rows.append([
            name, q(w.x), q(w.y), fnum(s.estimate), exact,
            fnum(s.alpha_star[0]), fnum(s.alpha_star[1]),
            str(s.converged).lower(), str(s.iterations),
            "" if s.primal_witness is None else fnum(s.primal_witness),
        ])
    rep.tables["discontinuity"] = [dict(zip(DISCONTINUITY_COLUMNS, r)) for r in out_rows]

    # 2-free words are exactly the undetermined cylinders, all valued (0, 0)
    free_zero = all(
        v.x == 0 and v.y == 0 for wd, v in table.values.items() if "2" not in wd
    )
    rep.check(
        "Bernoulli witness on {0,1}: rotation vector (0,0), entropy log 2",
        free_zero and s_inf.primal_witness == math.log(2),
        f"witness {s_inf.primal_witness!r}",
    )
    rep.check(
        "dual estimate at w_inf >= witness",
        s_inf.estimate >= s_inf.primal_witness - FLOAT_SLACK,
        f"{s_inf.estimate:.12f}",
    )
    gap = s_inf.estimate - max(est_k.values())
    rep.check(
        f"gap estimate(w_inf) - max_k estimate(w_k) >= {gap_threshold}",
        gap >= gap_threshold,
        f"gap {gap:.6f} (exact values: log 2 - 0 = {math.log(2):.6f})",
    )
    if out_dir is not None:
        out_dir.mkdir(parents=True, exist_ok=True)
        path = out_dir / "discontinuity.csv"
        _write_csv(path, DISCONTINUITY_COLUMNS, out_rows)
        rep.files.append(path.name)
    rep.wall_time = time.perf_counter() - t0
    return rep


# -- the concave, usc, discontinuous function g --------------------------------


def gkr_samples(rng: np.random.Generator, n: int) -> np.ndarray:
    """Points of {x1^2 <= x2 <= 1}; x2 uniform in (0, 1], x1 uniform on its fibre."""
    x2 = 1.0 - rng.random(n)
    x1 = (2 * rng.random(n) - 1) * np.sqrt(x2)
    return np.stack([x1, x2], axis=1)


def gkr_report(samples: int = 10_000, seed: int = 0) -> Report:
    if samples < 1000:
        raise ValueError("need at least 1000 samples")
    t0 = time.perf_counter()
    rep = Report(f"gkr(samples={samples}, seed={seed})")
    rng = np.random.default_rng(seed)

    p = gkr_samples(rng, samples)
    r = gkr_samples(rng, samples)
    t = rng.random(samples)
    worst = 0.0
    for i in range(samples):
        mid = t[i] * p[i] + (1 - t[i]) * r[i]
        lhs = gkr_g(*mid)
        rhs = t[i] * gkr_g(*p[i]) + (1 - t[i]) * gkr_g(*r[i])
        worst = max(worst, rhs - lhs)
    rep.check("concave on random triples (x, y, t)", worst <= 1e-12, f"max violation {worst:.3g}")

    xs = np.concatenate([rng.uniform(-1, 1, samples), [1e-3, -1e-3, 1.0]])
    on_parabola = max(abs(gkr_g(x, x * x)) for x in xs if x != 0)
    rep.check("g = 0 on the parabola x2 = x1^2", on_parabola == 0.0, f"max |g| {on_parabola:.3g}")

    x2s = np.concatenate([1.0 - rng.random(samples), [1e-12, 1.0]])
    axis_ok = all(gkr_g(0.0, x2) == 1.0 for x2 in x2s)
    rep.check("g(0, x2) = 1 for x2 > 0 (limit along segments is 1)", axis_ok)
    rep.check("g(0, 0) = 1", gkr_g(0.0, 0.0) == 1.0)

    end = np.array([0.9, 0.81])
    vals = np.sort([gkr_g(*(s * end)) for s in np.linspace(0.0, 1.0, 100)])
    mesh = float(np.max(np.diff(vals)))
    rep.check(
        "segment from (0.9, 0.81) to the origin: values cover [0, 1], mesh <= 0.02",
        vals[0] <= 0.02 and vals[-1] >= 0.98 and mesh <= 0.02,
        f"min {vals[0]:.4f} max {vals[-1]:.4f} mesh {mesh:.4f}",
    )
    rep.wall_time = time.perf_counter() - t0
    return rep


def write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")
