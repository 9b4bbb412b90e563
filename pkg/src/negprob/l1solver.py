"""Minimum total-variation signed measure on an affine constraint set.

``min ||mu||_1  s.t.  A mu = b`` is solved as the linear program

    min  sum(p) + sum(n)   s.t.  A p - A n = b,  p, n >= 0

with a dense two-phase tableau simplex. ``mu = p - n``; a basic optimum never
carries both ``p_i`` and ``n_i`` because their columns are linearly dependent.
"""
from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass

import numpy as np

from .constraints import ConstraintSystem, rank_report
from .errors import InputError, SolverError
from .measure import DEFAULT_TOL, SignedMeasure, total_variation

log = logging.getLogger(__name__)

PIVOT_TOL = 1e-10
FEAS_TOL = 1e-9


@dataclass
class LPResult:
    status: str  # "optimal" | "infeasible"
    x: np.ndarray | None
    objective: float
    basis: np.ndarray | None
    reduced_costs: np.ndarray | None
    iterations: int
    degenerate: bool


class _Tableau:
    """Canonical-form tableau ``[B^-1 A | B^-1 b]`` with an explicit basis."""

    def __init__(self, body, rhs, basis, max_iter, pivot_tol):
        self.body = body
        self.rhs = rhs
        self.basis = basis
        self.max_iter = max_iter
        self.pivot_tol = pivot_tol
        self.iterations = 0

    def pivot(self, row, col):
        piv = self.body[row, col]
        self.body[row] /= piv
        self.rhs[row] /= piv
        factors = self.body[:, col].copy()
        factors[row] = 0.0
        self.body -= np.outer(factors, self.body[row])
        self.rhs -= factors * self.rhs[row]
        self.body[:, col] = 0.0
        self.body[row, col] = 1.0
        self.basis[row] = col
        self.iterations += 1

    def reduced_costs(self, cost):
        return cost - cost[self.basis] @ self.body

    def optimize(self, cost, allowed, opt_tol):
        """Run primal simplex on columns where ``allowed`` is true.

        Dantzig pricing until a run of degenerate pivots suggests stalling,
        then Bland's rule, which cannot cycle.
        """
        m = self.body.shape[0]
        stall_limit = max(10, m)
        degenerate_run = 0
        bland = False
        while True:
            if self.iterations >= self.max_iter:
                raise SolverError(
                    f"simplex hit the iteration cap ({self.max_iter})",
                    {"iterations": self.iterations, "bland": bland, "basis": self.basis.tolist()},
                )
            d = self.reduced_costs(cost)
            candidates = np.flatnonzero(allowed & (d < -opt_tol))
            if candidates.size == 0:
                return d
            col = int(candidates[0]) if bland else int(candidates[np.argmin(d[candidates])])
            column = self.body[:, col]
            rows = np.flatnonzero(column > self.pivot_tol)
            if rows.size == 0:
                raise SolverError("objective unbounded below", {"column": col})
            ratios = np.maximum(self.rhs[rows], 0.0) / column[rows]
            best = ratios.min()
            tied = rows[ratios <= best + 1e-12]
            if bland:
                row = int(tied[np.argmin(self.basis[tied])])
            else:
                row = int(tied[np.argmax(column[tied])])
            if best <= 1e-12:
                degenerate_run += 1
                if degenerate_run > stall_limit and not bland:
                    log.debug("switching to Bland's rule after %d degenerate pivots", degenerate_run)
                    bland = True
            else:
                degenerate_run = 0
            self.pivot(row, col)


def solve_standard_form(
    A: np.ndarray,
    b: np.ndarray,
    c: np.ndarray,
    pivot_tol: float = PIVOT_TOL,
    feas_tol: float = FEAS_TOL,
    max_iter: int | None = None,
) -> LPResult:
    """``min c.x`` subject to ``A x = b``, ``x >= 0``. ``A`` may be rank deficient."""
    A = np.array(A, dtype=float)
    b = np.array(b, dtype=float)
    c = np.array(c, dtype=float)
    m, n = A.shape
    if max_iter is None:
        max_iter = 50 * (m + n)

    sign = np.where(b < 0, -1.0, 1.0)
    A = A * sign[:, None]
    b = b * sign

    # phase 1: artificial identity block
    body = np.hstack([A, np.eye(m)])
    tab = _Tableau(body, b.copy(), np.arange(n, n + m), max_iter, pivot_tol)
    cost1 = np.concatenate([np.zeros(n), np.ones(m)])
    allowed = np.ones(n + m, dtype=bool)
    tab.optimize(cost1, allowed, feas_tol * 1e-3)
    infeasibility = float(tab.rhs[tab.basis >= n].sum())
    if infeasibility > feas_tol:
        return LPResult("infeasible", None, math.nan, None, None, tab.iterations, False)

    # drive zero-level artificials out of the basis; drop rows that are redundant
    keep = np.ones(m, dtype=bool)
    for row in range(m):
        if tab.basis[row] < n:
            continue
        entries = np.abs(tab.body[row, :n])
        col = int(np.argmax(entries))
        if entries[col] > pivot_tol:
            tab.pivot(row, col)
        else:
            keep[row] = False
    tab.body = tab.body[keep][:, :n]
    tab.rhs = tab.rhs[keep]
    tab.basis = tab.basis[keep]

    d = tab.optimize(c, np.ones(n, dtype=bool), feas_tol * 1e-3)

    # re-solve the basic block against the original rows to shed pivot drift
    rows = np.flatnonzero(keep)
    x = np.zeros(n)
    try:
        x[tab.basis] = np.linalg.solve(A[rows][:, tab.basis], b[rows])
    except np.linalg.LinAlgError:
        x[tab.basis] = tab.rhs
    if x.min() < -1e3 * feas_tol:
        x[tab.basis] = tab.rhs
    x = np.maximum(x, 0.0)
    degenerate = bool(np.any(np.abs(x[tab.basis]) <= feas_tol))
    return LPResult("optimal", x, float(c @ x), tab.basis.copy(), d, tab.iterations, degenerate)


@dataclass
class L1Solution:
    measure: SignedMeasure | None
    norm: float
    contextuality: float
    feasible: bool
    unique_hint: bool
    iterations: int
    residual: float = math.nan


def minimize_l1(system: ConstraintSystem, tol: float = FEAS_TOL) -> L1Solution:
    """Minimal-norm signed measure satisfying ``system``.

    Contextuality is reported as ``||mu|| - 1``, which is non-negative because
    every normalised measure has norm at least one.
    """
    A = system.matrix
    n = A.shape[1]
    res = solve_standard_form(np.hstack([A, -A]), system.rhs, np.ones(2 * n), feas_tol=tol)
    if res.status == "infeasible":
        return L1Solution(None, math.nan, math.nan, False, False, res.iterations)
    weights = res.x[:n] - res.x[n:]
    measure = SignedMeasure(system.space, weights)
    norm = total_variation(measure)
    nonbasic = np.ones(2 * n, dtype=bool)
    nonbasic[res.basis] = False
    # strictly positive reduced costs on every nonbasic column certify a unique optimum
    unique = bool(np.all(res.reduced_costs[nonbasic] > tol))
    return L1Solution(
        measure=measure,
        norm=norm,
        contextuality=max(norm - 1.0, 0.0),
        feasible=True,
        unique_hint=unique,
        iterations=res.iterations,
        residual=system.residual(weights),
    )


def enumerate_vertices(system: ConstraintSystem, max_unknowns: int = 20) -> list[SignedMeasure]:
    """All basic solutions of ``A mu = b`` (brute force over column supports).

    Each is a vertex of the constraint set intersected with a sign orthant, so
    the smallest norm among them is the L1 minimum. Exponential; test use only.
    """
    A, b = system.matrix, system.rhs
    m, n = A.shape
    if n > max_unknowns:
        raise InputError(f"{n} unknowns exceeds the enumeration guard of {max_unknowns}")
    rank = rank_report(system).rank

    # independent row subset so each candidate block is square
    rows: list[int] = []
    for i in range(m):
        if np.linalg.matrix_rank(A[rows + [i]]) > len(rows):
            rows.append(i)
        if len(rows) == rank:
            break
    R, rb = A[rows], b[rows]

    supports = np.array(list(itertools.combinations(range(n), rank)), dtype=int)
    vertices: list[SignedMeasure] = []
    seen = set()
    for chunk in np.array_split(supports, max(1, len(supports) // 4096)):
        blocks = R[:, chunk].transpose(1, 0, 2)  # (k, rank, rank)
        sv = np.linalg.svd(blocks, compute_uv=False)
        ok = sv[:, -1] > 1e-9 * np.maximum(sv[:, 0], 1.0)
        if not ok.any():
            continue
        sols = np.linalg.solve(blocks[ok], np.broadcast_to(rb, (int(ok.sum()), rank))[..., None])[..., 0]
        for support, vals in zip(chunk[ok], sols):
            w = np.zeros(n)
            w[support] = vals
            if np.abs(A @ w - b).max() > 1e-8:
                continue
            key = tuple(np.round(w, 10))
            if key in seen:
                continue
            seen.add(key)
            vertices.append(SignedMeasure(system.space, w))
    return vertices


def oracle_min_norm(system: ConstraintSystem, max_unknowns: int = 20) -> float:
    vertices = enumerate_vertices(system, max_unknowns)
    if not vertices:
        return math.inf
    return min(total_variation(v) for v in vertices)
