"""Localized entropy of Phi_m: the convex dual solver and a primal oracle.

The dual value F(alpha) = P(alpha . Phi_m) - alpha . w is an upper bound for
sup{h_mu : rv(mu) = w} at every alpha (variational principle), so the best
iterate is a certified bound whether or not the minimisation converged. The
primal side maximises the entropy of an explicit stationary Markov chain with
rotation vector w, which is a lower bound.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.optimize import linprog

from .transfer import TransferGraph, karp_max_cycle_means, pressure, unit_directions

log = logging.getLogger(__name__)


class InfeasibleTarget(ValueError):
    def __init__(self, w, direction, support):
        d = tuple(round(float(c), 6) for c in direction)
        super().__init__(
            f"target {tuple(float(c) for c in w)} outside the rotation set: "
            f"direction {d} has support {support:.12g} < {float(np.dot(direction, w)):.12g}"
        )
        self.direction = np.asarray(direction)


@dataclass
class SpectrumSample:
    w: np.ndarray
    estimate: float
    alpha_star: np.ndarray
    alpha_norm_cap: float
    iterations: int
    converged: bool
    grad_norm: float
    primal_witness: float | None = None
    history: list[float] = field(default_factory=list, repr=False)


FEASIBILITY_SLACK = 1e-12
F_NOISE = 1e-12


@lru_cache(maxsize=16)
def _supports(g: TransferGraph, n_dirs: int) -> tuple[np.ndarray, np.ndarray]:
    dirs = unit_directions(n_dirs)
    return dirs, karp_max_cycle_means(g, dirs)


def check_feasible(g: TransferGraph, w, n_dirs: int = 32) -> None:
    """Raise InfeasibleTarget when some direction separates w from the rotation set."""
    w = np.asarray(w, dtype=float)
    lg = g if g.parent_class is not None else g.lumped()
    dirs, sup = _supports(lg, n_dirs)
    excess = dirs @ w - sup
    i = int(np.argmax(excess))
    if excess[i] > FEASIBILITY_SLACK:
        raise InfeasibleTarget(w, dirs[i], sup[i])


def _as_float_vec(w) -> np.ndarray:
    if hasattr(w, "x") and hasattr(w, "y"):
        return np.array([float(w.x), float(w.y)])
    return np.asarray(w, dtype=float)


def dual_localized_entropy(
    g: TransferGraph,
    w,
    T: float = 1e3,
    tol: float = 1e-9,
    max_iter: int = 500,
    check: bool = True,
) -> SpectrumSample:
    """Minimise F(alpha) = P(alpha . Phi_m) - alpha . w over |alpha| <= T.

    Descent from alpha = 0 along -H grad F, where H is a BFGS estimate of the
    inverse Hessian (reset to the identity whenever it stops giving a descent
    direction), with Armijo backtracking (constant 1e-4, halving) and radial
    projection onto the ball of radius T. At boundary targets the gradient
    decays exponentially and H grows with it, so the iterate can travel out to
    the cap. Stops when the projected gradient norm drops below ``tol``;
    a result on the cap is reported with converged=False. The returned
    estimate is the smallest F actually evaluated.
    """
    w = _as_float_vec(w)
    lg = g if g.parent_class is not None else g.lumped()
    if check:
        check_feasible(lg, w)

    last: list = [None]

    def evaluate(a):
        gd = pressure(lg, a, init=last[0])
        last[0] = gd
        return gd.pressure - a @ w, gd.rv - w

    alpha = np.zeros(2)
    F, grad = evaluate(alpha)
    best_F, best_alpha = F, alpha.copy()
    history = [F]
    H = np.eye(2)
    pg_norm = _projected_grad_norm(alpha, grad, T)
    converged = pg_norm < tol
    it = 0
    while not converged and it < max_iter:
        it += 1
        d = -H @ grad
        if grad @ d >= 0:
            H = np.eye(2)
            d = -grad
        t = 1.0
        accepted = False
        while t > 1e-20:
            cand = _project(alpha + t * d, T)
            dec = grad @ (alpha - cand)
            if dec <= 0:
                break
            F_c, g_c = evaluate(cand)
            if F_c <= F - 1e-4 * dec:
                accepted = True
                break
            # near the minimum F is flat below its float noise; accept steps
            # that keep F within noise and shrink the (accurate) gradient
            if F_c <= F + F_NOISE * (1 + abs(F)) and np.linalg.norm(g_c) < (1 - 1e-4) * np.linalg.norm(grad):
                accepted = True
                break
            t *= 0.5
        if not accepted:
            if not np.allclose(H, np.eye(2)):
                H = np.eye(2)
                continue
            break
        s_vec, y_vec = cand - alpha, g_c - grad
        sy = s_vec @ y_vec
        if sy > 1e-12 * np.linalg.norm(s_vec) * np.linalg.norm(y_vec):
            rho = 1.0 / sy
            V = np.eye(2) - rho * np.outer(s_vec, y_vec)
            H = V @ H @ V.T + rho * np.outer(s_vec, s_vec)
        alpha, F, grad = cand, F_c, g_c
        history.append(F)
        if F < best_F:
            best_F, best_alpha = F, alpha.copy()
        pg_norm = _projected_grad_norm(alpha, grad, T)
        converged = pg_norm < tol

    # a minimiser on the cap means the infimum lies further out: an upper bound only
    if np.linalg.norm(alpha) >= T * (1 - 1e-9):
        converged = False
    return SpectrumSample(
        w=w,
        estimate=float(best_F),
        alpha_star=best_alpha,
        alpha_norm_cap=T,
        iterations=it,
        converged=converged,
        grad_norm=pg_norm,
        history=history,
    )


def _project(a: np.ndarray, T: float) -> np.ndarray:
    n = np.linalg.norm(a)
    return a if n <= T else a * (T / n)


def _projected_grad_norm(alpha: np.ndarray, grad: np.ndarray, T: float) -> float:
    n = np.linalg.norm(alpha)
    if n < T * (1 - 1e-12):
        return float(np.linalg.norm(grad))
    # on the sphere: only the tangential part and an inward radial part count
    u = alpha / n
    radial = grad @ u
    tangential = grad - radial * u
    inward = max(radial, 0.0)
    return float(np.hypot(np.linalg.norm(tangential), inward))


# -- primal oracle -----------------------------------------------------------


def _edge_constraints(g: TransferGraph, w: np.ndarray):
    n, E = g.n_nodes, g.n_edges
    src = np.repeat(np.arange(n), 3)
    tgt = g.targets.ravel()
    vals = g.values.reshape(-1, 2)
    rows = [np.ones(E)]
    rhs = [1.0]
    for v in range(n):
        rows.append((tgt == v).astype(float) - (src == v).astype(float))
        rhs.append(0.0)
    rows.append(vals[:, 0])
    rhs.append(w[0])
    rows.append(vals[:, 1])
    rhs.append(w[1])
    return np.array(rows), np.array(rhs), src


def primal_constrained_entropy(
    g: TransferGraph,
    w,
    max_memory: int = 4,
    tol: float = 1e-12,
    max_iter: int = 20_000,
) -> float:
    """Entropy of the best stationary Markov chain on g with rotation vector w.

    Edge probabilities pi_e are constrained by normalisation, flow balance and
    sum_e pi_e value_e = w. Edges that no feasible chain can use are found by
    linear programming and removed; the rest start from the most interior
    feasible point and are improved by projected gradient ascent (gradient
    -log p_e of the entropy rate) with Armijo backtracking. Every iterate is
    feasible, so the result is a lower bound for the localized entropy.
    """
    if g.memory > max_memory or g.parent_class is not None:
        raise ValueError(f"primal oracle is for full graphs of memory <= {max_memory}")
    w = _as_float_vec(w)
    A, b, src = _edge_constraints(g, w)
    E = g.n_edges

    support = np.zeros(E, dtype=bool)
    for e in range(E):
        c = np.zeros(E)
        c[e] = -1.0
        res = linprog(c, A_eq=A, b_eq=b, bounds=(0, None), method="highs")
        if res.status == 2:
            raise InfeasibleTarget(w, np.zeros(2), float("nan"))
        if res.status == 0 and -res.fun > 1e-9:
            support[e] = True
    if not support.any():
        raise InfeasibleTarget(w, np.zeros(2), float("nan"))

    idx = np.flatnonzero(support)
    A_s = A[:, idx]
    # most interior point: max t with pi_e >= t on the support
    k = len(idx)
    c = np.zeros(k + 1)
    c[-1] = -1.0
    A_eq = np.hstack([A_s, np.zeros((A_s.shape[0], 1))])
    A_ub = np.hstack([-np.eye(k), np.ones((k, 1))])
    res = linprog(c, A_ub=A_ub, b_ub=np.zeros(k), A_eq=A_eq, b_eq=b,
                  bounds=[(0, None)] * k + [(0, 1)], method="highs")
    if res.status != 0 or res.x[-1] <= 0:
        raise InfeasibleTarget(w, np.zeros(2), float("nan"))
    x = res.x[:k]

    # orthogonal projector onto the null space of the active constraints
    u, s, vt = np.linalg.svd(A_s)
    rank = int((s > 1e-10 * s[0]).sum())
    N = vt[rank:].T
    proj = N @ N.T
    src_s = src[idx]
    n_nodes = g.n_nodes

    def entropy_and_grad(p):
        out = np.bincount(src_s, weights=p, minlength=n_nodes)
        logp = np.log(p) - np.log(out[src_s])
        return float(-(p * logp).sum()), -logp

    h, grad = entropy_and_grad(x)
    step = 1.0
    for _ in range(max_iter):
        d = proj @ grad
        dn = float(d @ grad)
        if dn < tol:
            break
        neg = d < 0
        step_max = np.min(-x[neg] / d[neg]) * 0.99 if neg.any() else np.inf
        t = min(2.0 * step, step_max)
        while t > 1e-18:
            cand = x + t * d
            h_c, g_c = entropy_and_grad(cand)
            if h_c >= h + 1e-4 * t * dn:
                break
            t *= 0.5
        else:
            break
        x, h, grad, step = cand, h_c, g_c, t
    return h
