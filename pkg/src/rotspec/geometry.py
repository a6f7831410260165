"""Exact planar convex geometry: hulls, support values and slope sequences."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .potential import Potential, Vec2Q


def _turn(o: Vec2Q, a: Vec2Q, b: Vec2Q) -> Fraction:
    return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)


@dataclass(frozen=True)
class HullQ:
    """Vertices in counterclockwise order, starting at the lexicographically smallest."""

    vertices: tuple[Vec2Q, ...]

    def __len__(self) -> int:
        return len(self.vertices)

    def __iter__(self):
        return iter(self.vertices)

    def vertex_set(self) -> frozenset[Vec2Q]:
        return frozenset(self.vertices)

    def contains(self, p: Vec2Q) -> bool:
        v = self.vertices
        if len(v) == 1:
            return p == v[0]
        if len(v) == 2:
            a, b = v
            return _turn(a, b, p) == 0 and min(a, b) <= p <= max(a, b)
        return all(_turn(v[i], v[(i + 1) % len(v)], p) >= 0 for i in range(len(v)))


def convex_hull(points: Iterable[Vec2Q]) -> HullQ:
    """Andrew's monotone chain on exact rationals; collinear boundary points are dropped."""
    pts = sorted(set(points))
    if not pts:
        raise ValueError("convex hull of no points")
    if len(pts) <= 2:
        return HullQ(tuple(pts))

    def chain(seq):
        out: list[Vec2Q] = []
        for p in seq:
            while len(out) >= 2 and _turn(out[-2], out[-1], p) <= 0:
                out.pop()
            out.append(p)
        return out

    lower = chain(pts)
    upper = chain(reversed(pts))
    verts = lower[:-1] + upper[:-1]
    if len(verts) == 2 and verts[0] == verts[1]:
        verts = verts[:1]
    return HullQ(tuple(verts))


def hull_support(h: HullQ, direction: Vec2Q) -> Fraction:
    if direction.x == 0 and direction.y == 0:
        raise ValueError("support function needs a nonzero direction")
    return max(v.dot(direction) for v in h.vertices)


def edge_slopes(ws: Sequence[Vec2Q]) -> list[Fraction]:
    """Slopes m_k of the segments [w_{k-1}, w_k], k = 1 .. len(ws) - 1."""
    out = []
    for prev, cur in zip(ws, ws[1:]):
        if cur.x == prev.x:
            raise ValueError(f"repeated x-coordinate {cur.x}")
        out.append((cur.y - prev.y) / (cur.x - prev.x))
    return out


def strictly_monotone(seq: Sequence[Fraction]) -> str | None:
    """'increasing', 'decreasing' or None."""
    pairs = list(zip(seq, seq[1:]))
    if all(a < b for a, b in pairs):
        return "increasing"
    if all(a > b for a, b in pairs):
        return "decreasing"
    return None


def predicted_vertices(pot: Potential, max_period: int) -> list[Vec2Q]:
    """Extreme points reachable by orbits of period <= N: w_0 .. w_{N-lam} and w_inf.

    The orbit of 1^{k+lam-1}2 realizing w_k has period k + lam.
    """
    kmax = max(0, max_period - pot.lam)
    return [pot.w_point(k) for k in range(kmax + 1)] + [pot.w_point(math.inf)]


class DomainError(ValueError):
    pass


def gkr_g(x1: float, x2: float, slack: float = 1e-12) -> float:
    """Concave, upper semi-continuous but discontinuous g(x) = 1 - x1^2 / x2 on x1^2 <= x2 <= 1."""
    if x1 * x1 > x2 + slack or x2 > 1 + slack:
        raise DomainError(f"({x1}, {x2}) outside x1^2 <= x2 <= 1")
    if x2 <= 0:
        return 1.0
    return 1.0 - x1 * x1 / x2
