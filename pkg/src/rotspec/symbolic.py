"""Words over a finite alphabet, periodic orbits of the full shift and the theta-metric.

Words are plain strings of decimal digits (``"0112"``), so the alphabet size is
limited to 10 symbols. A periodic orbit is keyed by its Lyndon word: the
aperiodic, lexicographically minimal rotation of any generating segment.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Iterator


class AlphabetError(ValueError):
    pass


def check_word(w: str, d: int = 3) -> str:
    if not 1 <= d <= 10:
        raise AlphabetError(f"alphabet size {d} not in 1..10")
    for c in w:
        if not ("0" <= c <= "9") or int(c) >= d:
            raise AlphabetError(f"symbol {c!r} not in alphabet of size {d}")
    return w


def rotate(w: str, j: int) -> str:
    if not w:
        return w
    j %= len(w)
    return w[j:] + w[:j]


def primitive_root(w: str) -> str:
    """Shortest u with w == u * (len(w) // len(u))."""
    n = len(w)
    # smallest period p dividing n, via the doubling trick
    p = (w + w).find(w, 1)
    if p < n and n % p == 0:
        return w[:p]
    return w


def minimal_rotation(w: str) -> str:
    """Booth's least-rotation algorithm, O(n)."""
    s = w + w
    n = len(w)
    f = [-1] * len(s)
    k = 0
    for j in range(1, len(s)):
        sj = s[j]
        i = f[j - k - 1]
        while i != -1 and sj != s[k + i + 1]:
            if sj < s[k + i + 1]:
                k = j - i - 1
            i = f[i]
        if sj != s[k + i + 1]:
            if sj < s[k]:
                k = j
            f[j - k] = -1
        else:
            f[j - k] = i + 1
    return s[k:k + n]


def canonical_necklace(w: str) -> str:
    """Lyndon representative of the orbit generated by ``w``.

    >>> canonical_necklace("210"), canonical_necklace("0101")
    ('021', '01')
    """
    if not w:
        raise ValueError("empty generating segment")
    return minimal_rotation(primitive_root(w))


@dataclass(frozen=True, order=True)
class PeriodicOrbit:
    """Orbit of the periodic point O(necklace); ``necklace`` is a Lyndon word."""

    period: int
    necklace: str

    def __post_init__(self):
        if self.period != len(self.necklace) or self.period < 1:
            raise ValueError("period must equal necklace length and be positive")

    @classmethod
    def from_segment(cls, w: str) -> "PeriodicOrbit":
        c = canonical_necklace(w)
        return cls(len(c), c)

    def __str__(self) -> str:
        return f"O({self.necklace})"


def lyndon_words(d: int, n: int) -> Iterator[str]:
    """Duval's generator: all Lyndon words of length <= n over d symbols, lexicographic."""
    digits = "0123456789"[:d]
    w = [-1]
    while w:
        w[-1] += 1
        yield "".join(digits[i] for i in w)
        m = len(w)
        while len(w) < n:
            w.append(w[len(w) - m])
        while w and w[-1] == d - 1:
            w.pop()


def enumerate_orbits(d: int, max_period: int) -> list[PeriodicOrbit]:
    """One orbit per prime period <= max_period, ordered by (period, necklace)."""
    if d < 2 or max_period < 1:
        raise ValueError("need d >= 2 and max_period >= 1")
    out = [PeriodicOrbit(len(w), w) for w in lyndon_words(d, max_period)]
    out.sort()
    return out


def orbit_points(o: PeriodicOrbit) -> list[str]:
    """Generating segments of the ``period`` points x, f(x), ..., f^{n-1}(x)."""
    return [rotate(o.necklace, j) for j in range(o.period)]


def theta_distance(x: str, y: str, theta: Fraction) -> Fraction:
    """d_theta between O(x) and O(y): theta**k with k the first (1-based) disagreement."""
    theta = Fraction(theta)
    if not 0 < theta < 1:
        raise ValueError("theta must lie in (0, 1)")
    p, q = len(x), len(y)
    # two periodic sequences agreeing on p + q - gcd(p, q) symbols are equal (Fine-Wilf);
    # lcm + max period is a looser, always sufficient horizon
    horizon = p * q // gcd(p, q) + max(p, q)
    for k in range(horizon):
        if x[k % p] != y[k % q]:
            return theta ** (k + 1)
    return Fraction(0)
