"""Transfer graphs for the locally constant potential, pressure, Gibbs data and Karp.

A graph here is any directed graph in which every node has exactly three
out-edges, one per appended symbol. The full de Bruijn graph of memory m has
the 3**(m-1) words of length m-1 as nodes; ``lumped()`` returns its quotient
under forward bisimulation (nodes whose future value sequences coincide are
merged). Pressure, Gibbs rotation vectors, Gibbs entropies and maximum cycle
means are identical on both, so the heavy solvers run on the quotient.

Pressures are computed in log space so that weights exp(alpha . value) with
|alpha| ~ 1e3 neither overflow nor underflow.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import cached_property
from itertools import product

import numpy as np
from scipy.special import logsumexp

from .potential import PotentialTable

log = logging.getLogger(__name__)

ALPHABET = "012"


@dataclass(frozen=True, eq=False)
class TransferGraph:
    """Out-degree-3 graph with a plane value on every edge.

    ``targets[u, s]`` is the node reached from ``u`` by appending symbol ``s``
    and ``values[u, s]`` the value of the corresponding length-m word.
    """

    memory: int
    nodes: tuple[str, ...]
    targets: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)
    # for a quotient graph: class index of every node of the parent graph
    parent_class: np.ndarray | None = field(default=None, repr=False)

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def n_edges(self) -> int:
        return 3 * len(self.nodes)

    def edge_value(self, word: str) -> tuple[float, float]:
        """Value carried by the edge of the full graph labelled by a length-m word."""
        u = self.nodes.index(word[:-1])
        return tuple(self.values[u, int(word[-1])])

    @cached_property
    def _incoming(self) -> tuple[np.ndarray, np.ndarray]:
        # flat edge ids sorted by target, and segment starts for reduceat
        tgt = self.targets.ravel()
        order = np.argsort(tgt, kind="stable")
        counts = np.bincount(tgt, minlength=self.n_nodes)
        if np.any(counts == 0):
            raise ValueError("graph has a node without incoming edges")
        starts = np.concatenate([[0], np.cumsum(counts)[:-1]])
        return order, starts

    def lumped(self) -> "TransferGraph":
        """Quotient by forward bisimulation (coarsest partition respecting values and targets)."""
        return _lump(self)


def build_graph(table: PotentialTable) -> TransferGraph:
    """Full de Bruijn graph of memory m, nodes in lexicographic order."""
    m = table.memory
    nodes = tuple("".join(w) for w in product(ALPHABET, repeat=m - 1))
    n = len(nodes)
    edge_ids = np.arange(3 * n).reshape(n, 3)
    # word u.s has base-3 index 3u + s; its target drops the first symbol
    targets = edge_ids % n
    values = np.empty((n, 3, 2))
    for u, word in enumerate(nodes):
        for s in range(3):
            v = table.values[word + ALPHABET[s]]
            values[u, s] = (float(v.x), float(v.y))
    return TransferGraph(m, nodes, targets, values)


def _lump(g: TransferGraph) -> TransferGraph:
    # label exact edge values (floats come from the same rationals, so equality is exact)
    _, vid = np.unique(g.values.reshape(-1, 2), axis=0, return_inverse=True)
    vid = vid.reshape(g.n_nodes, 3)
    cls = np.zeros(g.n_nodes, dtype=np.int64)
    n_cls = 1
    while True:
        sig = np.concatenate([vid, cls[g.targets]], axis=1)
        _, first, new = np.unique(sig, axis=0, return_index=True, return_inverse=True)
        new = new.ravel()
        if new.max() + 1 == n_cls:
            break
        cls, n_cls = new, new.max() + 1
    # renumber classes by their lexicographically first member
    first_member = np.full(n_cls, g.n_nodes)
    np.minimum.at(first_member, cls, np.arange(g.n_nodes))
    order = np.argsort(first_member)
    rank = np.empty(n_cls, dtype=np.int64)
    rank[order] = np.arange(n_cls)
    cls = rank[cls]
    reps = first_member[order]
    targets = cls[g.targets[reps]]
    values = g.values[reps]
    nodes = tuple(g.nodes[i] for i in reps)
    return TransferGraph(g.memory, nodes, targets, values, parent_class=cls)


@dataclass
class GibbsData:
    """Perron data of the matrix exp(alpha . value) and its equilibrium measure.

    ``pressure`` is the Collatz-Wielandt upper bound for log of the spectral
    radius; ``pressure_lower`` the matching lower bound. Perron vectors are
    stored as logs (normalised to max 0), since they span hundreds of orders of
    magnitude at large alpha.
    """

    pressure: float
    pressure_lower: float
    alpha: np.ndarray
    log_right: np.ndarray
    log_left: np.ndarray
    edge_probs: np.ndarray
    rv: np.ndarray
    entropy: float
    iterations: int
    converged: bool

    @property
    def right_vector(self) -> np.ndarray:
        v = np.exp(self.log_right)
        return v / v.sum()

    @property
    def left_vector(self) -> np.ndarray:
        v = np.exp(self.log_left)
        return v / v.sum()


def _segment_logsumexp(x: np.ndarray, starts: np.ndarray) -> np.ndarray:
    mx = np.maximum.reduceat(x, starts)
    seg = np.repeat(np.arange(len(starts)), np.diff(np.append(starts, len(x))))
    return mx + np.log(np.add.reduceat(np.exp(x - mx[seg]), starts))


def pressure(
    g: TransferGraph,
    alpha,
    tol: float = 1e-12,
    max_iter: int = 100_000,
    init: GibbsData | None = None,
) -> GibbsData:
    """Topological pressure of alpha . Phi_m by log-space power iteration.

    Each step applies (M + rho I) to the current vector, rho being the running
    eigenvalue estimate; the shift removes the peripheral spectrum of
    near-periodic matrices (large alpha concentrates the weight on one cycle).
    ``init`` warm-starts both iterations from earlier Perron vectors. Stops when the Collatz-Wielandt bracket of both the right and the left
    iteration is narrower than ``tol``.
    """
    alpha = np.asarray(alpha, dtype=float)
    if alpha.shape != (2,) or not np.all(np.isfinite(alpha)):
        raise ValueError("alpha must be a finite plane vector")
    n = g.n_nodes
    W = g.values @ alpha  # (n, 3)
    tgt = g.targets
    order, starts = g._incoming
    W_in = W.ravel()[order]
    src_in = (order // 3)

    if init is not None and init.log_right.shape == (n,):
        r, l = init.log_right.copy(), init.log_left.copy()
    else:
        r = np.zeros(n)
        l = np.zeros(n)
    converged = False
    lo = hi = 0.0
    it = 0
    for it in range(1, max_iter + 1):
        y = logsumexp(W + r[tgt], axis=1)
        d = y - r
        lo, hi = float(d.min()), float(d.max())
        z = _segment_logsumexp(W_in + l[src_in], starts)
        dl = z - l
        lo_l, hi_l = float(dl.min()), float(dl.max())
        if hi - lo < tol and hi_l - lo_l < tol:
            converged = True
            break
        shift = 0.5 * (lo + hi)
        r = np.logaddexp(y, r + shift)
        r -= r.max()
        l = np.logaddexp(z, l + shift)
        l -= l.max()
    if not converged:
        log.warning("pressure: no convergence after %d iterations (bracket %.3g)", it, hi - lo)

    P = 0.5 * (lo + hi)
    # edge measure pi_e ∝ l_src exp(W_e) r_tgt
    log_pi = l[:, None] + W + r[tgt]
    log_pi -= logsumexp(log_pi)
    pi = np.exp(log_pi)
    log_p = W + r[tgt] - r[:, None] - P
    # renormalise rows against the residual bracket width
    log_p -= logsumexp(log_p, axis=1)[:, None]
    entropy = float(-(pi * log_p).sum())
    rv = np.einsum("us,usk->k", pi, g.values)
    return GibbsData(
        pressure=hi,
        pressure_lower=lo,
        alpha=alpha,
        log_right=r,
        log_left=l,
        edge_probs=pi,
        rv=rv,
        entropy=entropy,
        iterations=it,
        converged=converged,
    )


def markov_entropy(transitions, stationary) -> float:
    """Entropy rate -sum_u pi_u sum_v p_uv log p_uv of a stationary Markov chain (nats)."""
    P = np.asarray(transitions, dtype=float)
    pi = np.asarray(stationary, dtype=float)
    if P.ndim != 2 or P.shape[0] != P.shape[1] or pi.shape != (P.shape[0],):
        raise ValueError("need a square transition matrix and a matching distribution")
    if np.any(P < 0) or np.any(pi < 0):
        raise ValueError("negative probabilities")
    if np.max(np.abs(P.sum(axis=1) - 1)) > 1e-12:
        raise ValueError("rows of the transition matrix must sum to 1")
    if abs(pi.sum() - 1) > 1e-10 or np.max(np.abs(pi @ P - pi)) > 1e-10:
        raise ValueError("distribution is not stationary")
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(P > 0, P * np.log(P), 0.0)
    return float(-(pi @ terms.sum(axis=1)))


def karp_max_cycle_means(g: TransferGraph, directions) -> np.ndarray:
    """Maximum cycle mean of d . value for each row d of ``directions`` (Karp's DP).

    D_k(u) is the heaviest walk of length k leaving u (Karp on the reversed
    graph, which has the same cycles); the answer is
    max_u min_{k<n} (D_n(u) - D_k(u)) / (n - k). D_n is computed in a first
    pass and the minimum accumulated in a second, so memory stays O(n).
    """
    dirs = np.atleast_2d(np.asarray(directions, dtype=float))
    n = g.n_nodes
    W = np.einsum("usk,dk->usd", g.values, dirs)  # (n, 3, ndir)
    tgt = g.targets

    def step(D):
        return (W + D[tgt]).max(axis=1)

    D = np.zeros((n, len(dirs)))
    for _ in range(n):
        D = step(D)
    Dn = D
    best = np.full((n, len(dirs)), np.inf)
    D = np.zeros((n, len(dirs)))
    for k in range(n):
        best = np.minimum(best, (Dn - D) / (n - k))
        D = step(D)
    return best.max(axis=0)


def karp_support(g: TransferGraph, direction) -> float:
    """Support function of the Phi_m rotation set in ``direction``."""
    d = np.asarray(direction, dtype=float)
    if not np.any(d):
        raise ValueError("support function needs a nonzero direction")
    return float(karp_max_cycle_means(g, d[None, :])[0])


def unit_directions(k: int = 32) -> np.ndarray:
    t = 2 * np.pi * np.arange(k) / k
    return np.stack([np.cos(t), np.sin(t)], axis=1)
