"""The two-dimensional potential on the full 3-shift and its exact evaluation.

Everything here is exact rational arithmetic (``fractions.Fraction``). With the
geometric rule x_k = a * theta**(2k) and h(x) = b * sqrt(x / a) the points
v_k = (x_k, h(x_k)) = (a theta^{2k}, b theta^k) are rational, so rotation
vectors of periodic orbits, hull vertices and Lipschitz ratios are all exact.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from itertools import product
from math import lcm
from typing import Iterable, Union

from .symbolic import PeriodicOrbit, check_word, orbit_points

Number = Union[int, Fraction]


@dataclass(frozen=True, order=True)
class Vec2Q:
    x: Fraction
    y: Fraction

    def __post_init__(self):
        object.__setattr__(self, "x", Fraction(self.x))
        object.__setattr__(self, "y", Fraction(self.y))

    def __add__(self, o: "Vec2Q") -> "Vec2Q":
        return Vec2Q(self.x + o.x, self.y + o.y)

    def __sub__(self, o: "Vec2Q") -> "Vec2Q":
        return Vec2Q(self.x - o.x, self.y - o.y)

    def __mul__(self, s: Number) -> "Vec2Q":
        return Vec2Q(self.x * s, self.y * s)

    __rmul__ = __mul__

    def __truediv__(self, s: Number) -> "Vec2Q":
        return Vec2Q(self.x / s, self.y / s)

    def dot(self, o: "Vec2Q") -> Fraction:
        return self.x * o.x + self.y * o.y

    def cross(self, o: "Vec2Q") -> Fraction:
        return self.x * o.y - self.y * o.x

    def sup_norm(self) -> Fraction:
        return max(abs(self.x), abs(self.y))

    def as_float(self) -> tuple[float, float]:
        return (float(self.x), float(self.y))

    def __str__(self) -> str:
        return f"({self.x}, {self.y})"


ORIGIN = Vec2Q(0, 0)


@dataclass(frozen=True)
class ValueClass:
    """Which branch of the potential a cylinder falls in.

    ``kind`` is one of ``"W0"``, ``"U"``, ``"V"``, ``"WInf"``, ``"Undetermined"``;
    ``k`` is the U/V index and ``bound`` the sup-norm bound of an undetermined value.
    """

    kind: str
    k: int | None = None
    bound: Fraction | None = None

    def __post_init__(self):
        if self.kind in ("U", "V") and (self.k is None or self.k < 1):
            raise ValueError("U/V index must be >= 1")
        if self.kind == "Undetermined" and (self.bound is None or self.bound < 0):
            raise ValueError("undetermined bound must be >= 0")


@dataclass(frozen=True)
class PotentialParams:
    a: Fraction = Fraction(1)
    b: Fraction = Fraction(1)
    lam: int = 3
    theta: Fraction = Fraction(1, 2)
    C: Fraction = Fraction(2)
    C1: Fraction = Fraction(1)
    x_rule: str = "geometric"

    def __post_init__(self):
        for name in ("a", "b", "theta", "C", "C1"):
            object.__setattr__(self, name, Fraction(getattr(self, name)))
        if self.a <= 0 or self.b <= 0:
            raise ValueError("a and b must be positive")
        if isinstance(self.lam, bool) or int(self.lam) != self.lam or self.lam < 3:
            raise ValueError("lambda must be an integer >= 3")
        object.__setattr__(self, "lam", int(self.lam))
        if not 0 < self.theta < 1:
            raise ValueError("theta must lie in (0, 1)")
        if self.C <= 0:
            raise ValueError("C must be positive")
        if self.C1 < 0:
            raise ValueError("C1 must be non-negative")
        if self.x_rule != "geometric":
            raise ValueError(f"unknown x_rule {self.x_rule!r} (only 'geometric')")

    def x(self, k: int) -> Fraction:
        return self.a * self.theta ** (2 * k)

    def h_exceeds(self, p: Vec2Q) -> bool:
        """True when p lies strictly below the graph of h(x) = b sqrt(x / a)."""
        if not 0 <= p.x <= self.a:
            return False
        return p.y < 0 or p.y * p.y * self.a < self.b * self.b * p.x

    def decay_holds(self, horizon: int) -> bool:
        """||v_k||_sup < C theta^k for 1 <= k <= horizon."""
        return all(
            max(self.x(k), self.b * self.theta**k) < self.C * self.theta**k
            for k in range(1, horizon + 1)
        )


PARAM_KEYS = ("a", "b", "lambda", "theta_num", "theta_den", "C", "C1", "x_rule")


class ParamFileError(ValueError):
    def __init__(self, field: str, msg: str):
        super().__init__(f"{field}: {msg}")
        self.field = field


def parse_params(text: str) -> PotentialParams:
    """Parse the flat ``key = value`` parameter format.

    Rationals are written as ``p/q`` or plain integers; theta is given by the
    integer pair ``theta_num``/``theta_den``. Blank lines and ``#`` comments are
    ignored, unknown or repeated keys are rejected.
    """
    raw: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParamFileError(f"line {lineno}", "expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in PARAM_KEYS:
            raise ParamFileError(key, "unknown key")
        if key in raw:
            raise ParamFileError(key, "repeated key")
        raw[key] = value

    kwargs: dict = {}
    for key in ("a", "b", "C", "C1"):
        if key in raw:
            kwargs[key] = _rational(key, raw[key])
    if "lambda" in raw:
        kwargs["lam"] = _integer("lambda", raw["lambda"])
    if "theta_num" in raw or "theta_den" in raw:
        num = _integer("theta_num", raw.get("theta_num", "1"))
        den = _integer("theta_den", raw.get("theta_den", "2"))
        if den == 0:
            raise ParamFileError("theta_den", "zero denominator")
        kwargs["theta"] = Fraction(num, den)
    if "x_rule" in raw:
        kwargs["x_rule"] = raw["x_rule"]
    try:
        return PotentialParams(**kwargs)
    except ValueError as exc:
        field_name = str(exc).split()[0]
        raise ParamFileError(field_name, str(exc)) from exc


def format_params(p: PotentialParams) -> str:
    return (
        f"a = {p.a}\nb = {p.b}\nlambda = {p.lam}\n"
        f"theta_num = {p.theta.numerator}\ntheta_den = {p.theta.denominator}\n"
        f"C = {p.C}\nC1 = {p.C1}\nx_rule = {p.x_rule}\n"
    )


def _rational(key: str, s: str) -> Fraction:
    try:
        if "." in s or "e" in s.lower():
            raise ValueError
        return Fraction(s)
    except (ValueError, ZeroDivisionError):
        raise ParamFileError(key, f"not a rational p/q: {s!r}") from None


def _integer(key: str, s: str) -> int:
    try:
        return int(s)
    except ValueError:
        raise ParamFileError(key, f"not an integer: {s!r}") from None


@dataclass(frozen=True)
class PotentialTable:
    """Locally constant approximation: length-m words to plane values."""

    memory: int
    values: dict[str, Vec2Q] = field(repr=False)
    sup_error: Fraction

    def __post_init__(self):
        if len(self.values) != 3**self.memory:
            raise ValueError("table must have 3**m entries")

    def __getitem__(self, word: str) -> Vec2Q:
        return self.values[word]


class Potential:
    """Exact evaluation of the potential for one parameter set."""

    def __init__(self, params: PotentialParams | None = None):
        self.params = params or PotentialParams()
        self._w_cache: list[Vec2Q] = []

    @property
    def lam(self) -> int:
        return self.params.lam

    # -- the point sequences ------------------------------------------------

    def v_point(self, k: int) -> Vec2Q:
        if k < 1:
            raise ValueError("indices start at 1")
        p = self.params
        return Vec2Q(p.x(k), p.b * p.theta**k)

    def u_point(self, k: int) -> Vec2Q:
        if k < 1:
            raise ValueError("indices start at 1")
        return Vec2Q(self.params.x(k), 0)

    @cached_property
    def w0(self) -> Vec2Q:
        return Vec2Q(self.params.a, 0)

    def w_point(self, k: int | float) -> Vec2Q:
        """w_0 = (a, 0), w_inf = (0, 0) and w_k = (lam w_0 + v_1 + ... + v_k) / (k + lam)."""
        if k == math.inf:
            return ORIGIN
        if k < 0 or int(k) != k:
            raise ValueError("k must be a non-negative integer or math.inf")
        k = int(k)
        lam = self.lam
        # cache holds the numerators lam w_0 + sum_{j<=k} v_j
        if not self._w_cache:
            self._w_cache.append(self.w0 * lam)
        while len(self._w_cache) <= k:
            self._w_cache.append(self._w_cache[-1] + self.v_point(len(self._w_cache)))
        return self._w_cache[k] / (k + lam)

    # -- evaluation -----------------------------------------------------------

    def undetermined_bound(self, m: int) -> Fraction:
        p = self.params
        if m >= self.lam:
            return p.C * p.theta ** (m + 1 - self.lam)
        # a 2 may still sit at a position <= lambda, so w_0 is a possible value
        return max(p.a, p.C * p.theta)

    def classify_prefix(self, w: str) -> ValueClass:
        check_word(w, 3)
        if not w:
            raise ValueError("prefix must be nonempty")
        lam = self.lam
        l = w.find("2") + 1
        if l == 0:
            return ValueClass("Undetermined", bound=self.undetermined_bound(len(w)))
        if l <= lam:
            return ValueClass("W0")
        if w[: l - 1] == "1" * (l - 1):
            return ValueClass("V", k=l - lam)
        return ValueClass("U", k=l - lam)

    def value_of(self, c: ValueClass) -> Vec2Q:
        if c.kind == "W0":
            return self.w0
        if c.kind == "V":
            return self.v_point(c.k)
        if c.kind == "U":
            return self.u_point(c.k)
        if c.kind == "WInf":
            return ORIGIN
        raise ValueError("undetermined class has no single value")

    def classify_periodic(self, p: str) -> ValueClass:
        """Exact branch of O(p); the first 2 (if any) appears within one period."""
        check_word(p, 3)
        if not p:
            raise ValueError("empty generating segment")
        if "2" not in p:
            return ValueClass("WInf")
        return self.classify_prefix(p[: p.index("2") + 1])

    def phi_on_periodic(self, p: str) -> Vec2Q:
        return self.value_of(self.classify_periodic(p))

    def rotation_vector(self, o: PeriodicOrbit | str) -> Vec2Q:
        """Orbit average of the potential, exact."""
        seg = o.necklace if isinstance(o, PeriodicOrbit) else o
        n = len(seg)
        sx, sy = self._scaled_orbit_sum(seg)
        d = self._scale_for(n) * n
        return Vec2Q(Fraction(sx, d), Fraction(sy, d))

    def rotation_vector_slow(self, o: PeriodicOrbit) -> Vec2Q:
        """Reference path: literal average over the orbit points."""
        total = ORIGIN
        for q in orbit_points(o):
            total = total + self.phi_on_periodic(q)
        return total / o.period

    def rotation_vectors(self, orbits: Iterable[PeriodicOrbit]) -> list[Vec2Q]:
        return [self.rotation_vector(o) for o in orbits]

    # integer-scaled values: index 0 is w_0, index j >= 1 is (x_j, y_j)
    def _scale_for(self, n: int) -> int:
        self._ensure_scaled(n)
        return self._scale

    def _ensure_scaled(self, n: int) -> None:
        need = max(1, n - self.lam)
        if getattr(self, "_scaled_upto", 0) >= need:
            return
        need = max(need, 2 * getattr(self, "_scaled_upto", 0), 16)
        vals = [self.w0] + [self.v_point(j) for j in range(1, need + 1)]
        scale = 1
        for v in vals:
            scale = lcm(scale, v.x.denominator, v.y.denominator)
        self._scale = scale
        self._sx = [int(v.x * scale) for v in vals]
        self._sy = [int(v.y * scale) for v in vals]
        self._scaled_upto = need

    def _scaled_orbit_sum(self, s: str) -> tuple[int, int]:
        n = len(s)
        self._ensure_scaled(n)
        if "2" not in s:
            return 0, 0
        lam = self.lam
        sx, sy = self._sx, self._sy
        t = s + s
        # scan backwards: dist to next '2' and length of the run of '1's from i
        dist = 0
        ones = 0
        tot_x = tot_y = 0
        for i in range(2 * n - 1, -1, -1):
            c = t[i]
            if c == "2":
                dist = 0
                ones = 0
            else:
                dist += 1
                ones = ones + 1 if c == "1" else 0
            if i >= n:
                continue
            l = dist + 1
            if l <= lam:
                tot_x += sx[0]
            else:
                j = l - lam
                tot_x += sx[j]
                if ones == dist:
                    tot_y += sy[j]
        return tot_x, tot_y

    # -- locally constant approximation --------------------------------------

    def locally_constant_table(self, m: int, coarse: bool = False) -> PotentialTable:
        """Phi_m on all length-m words; undetermined cylinders map to (0, 0).

        Memory m <= lambda keeps only the values w_0 and (0, 0); it is refused
        unless ``coarse=True`` (small-graph oracle checks use it deliberately).
        """
        if m < 1:
            raise ValueError("memory must be >= 1")
        if m <= self.lam and not coarse:
            raise ValueError(f"memory below lambda+1 loses all V-values (m={m}, lambda={self.lam})")
        values = {}
        for letters in product("012", repeat=m):
            w = "".join(letters)
            c = self.classify_prefix(w)
            values[w] = ORIGIN if c.kind == "Undetermined" else self.value_of(c)
        return PotentialTable(m, values, self.undetermined_bound(m))

    def rotation_vector_table(self, o: PeriodicOrbit | str, table: PotentialTable) -> Vec2Q:
        """Orbit average of Phi_m (the table) rather than of the exact potential."""
        seg = o.necklace if isinstance(o, PeriodicOrbit) else o
        n, m = len(seg), table.memory
        reps = -(-(n + m) // n)
        t = seg * reps
        total = ORIGIN
        for i in range(n):
            total = total + table.values[t[i:i + m]]
        return total / n

    # -- regularity -----------------------------------------------------------

    def lipschitz_bound(self) -> Fraction:
        p = self.params
        inv = p.theta ** (-self.lam)
        return max(p.C1 * inv, 2 * p.C * inv)


def empirical_lipschitz(pot: Potential, max_period: int) -> tuple[Fraction, tuple[str, str] | None]:
    """Exact max of ||Phi(x) - Phi(y)||_sup / d_theta(x, y) over orbit points of period <= max_period.

    Points are inserted in a trie of their first 2*max_period symbols (two
    distinct periodic points of periods <= N disagree within 2N - 1 symbols).
    For pairs splitting at depth k the best ratio is the largest coordinate
    spread between two different child subtrees, times theta**-(k+1).
    Returns the ratio and one witnessing pair of generating segments.
    """
    from .symbolic import enumerate_orbits

    theta = pot.params.theta
    depth = 2 * max_period
    points: list[tuple[str, Vec2Q]] = []
    for o in enumerate_orbits(3, max_period):
        for q in orbit_points(o):
            points.append((q, pot.phi_on_periodic(q)))

    best = Fraction(0)
    witness = None

    # each stack frame: indices of points sharing a prefix of length k
    stack = [(0, list(range(len(points))))]
    expanded = [(q * (-(-depth // len(q))))[:depth] for q, _ in points]
    while stack:
        k, idx = stack.pop()
        if len(idx) < 2 or k >= depth:
            continue
        groups: dict[str, list[int]] = {}
        for i in idx:
            groups.setdefault(expanded[i][k], []).append(i)
        if len(groups) > 1:
            # per child: (min_x, max_x, min_y, max_y) with witnesses
            ext = {}
            for c, g in groups.items():
                ext[c] = (
                    min(g, key=lambda i: points[i][1].x),
                    max(g, key=lambda i: points[i][1].x),
                    min(g, key=lambda i: points[i][1].y),
                    max(g, key=lambda i: points[i][1].y),
                )
            scale = theta ** (-(k + 1))
            keys = sorted(ext)
            for c1 in keys:
                for c2 in keys:
                    if c1 == c2:
                        continue
                    lo_x, _, lo_y, _ = ext[c1]
                    _, hi_x, _, hi_y = ext[c2]
                    for i, j, comp in ((lo_x, hi_x, "x"), (lo_y, hi_y, "y")):
                        diff = getattr(points[j][1], comp) - getattr(points[i][1], comp)
                        r = diff * scale
                        if r > best:
                            best, witness = r, (points[i][0], points[j][0])
        for c in sorted(groups):
            stack.append((k + 1, groups[c]))
    return best, witness
