"""Niggli reduction, the reducedness predicate and a brute-force oracle.

The reduction loop itself is compiled (see ``_kernels``); this module adds the
Python-facing result types and the condition-by-condition predicate.
"""
from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import NoCandidateError, NonConvergenceError
from .g6_core import as_g6, check_valid_g6, g6_matrices_from_bases, g6_matrix_from_basis

DEFAULT_TOL = 1e-9
DEFAULT_MAX_ITER = 1000

PLUS = "+++"
MINUS = "---"

# Names of the reducedness conditions, in evaluation order.
CONDITIONS = (
    "0 <= g1",
    "g1 <= g2",
    "g2 <= g3",
    "g1 = g2 => |g4| <= |g5|",
    "g2 = g3 => |g5| <= |g6|",
    "g4,g5,g6 all > 0 or all <= 0",
    "|g4| <= g2",
    "|g5| <= g1",
    "|g6| <= g1",
    "g3 <= g1+g2+g3+g4+g5+g6",
    "g4 = g2 => g6 <= 2 g5",
    "g5 = g1 => g6 <= 2 g4",
    "g6 = g1 => g5 <= 2 g4",
    "g4 = -g2 => g6 = 0",
    "g5 = -g1 => g6 = 0",
    "g6 = -g1 => g5 = 0",
    "g3 = g1+g2+g3+g4+g5+g6 => 2 g1 + 2 g5 + g6 <= 0",
)


def tolerance_scale(g) -> np.ndarray:
    """Magnitude used to turn a relative tolerance into an absolute one."""
    g = np.asarray(g, dtype=float)
    return np.max(np.abs(g[..., :3]), axis=-1)


def condition_table(gs, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Boolean array (n, len(CONDITIONS)); True where a condition holds.

    Vectorised over a stack of G6 vectors so the oracle can screen many
    candidates at once.
    """
    G = np.atleast_2d(np.asarray(gs, dtype=float))
    g1, g2, g3, g4, g5, g6 = G.T
    eps = tol * tolerance_scale(G)

    def eq(x, y):
        return np.abs(x - y) <= eps

    def le(x, y):
        return x <= y + eps

    def implies(a, b):
        return ~a | b

    plus = (g4 > eps) & (g5 > eps) & (g6 > eps)
    minus = (g4 <= eps) & (g5 <= eps) & (g6 <= eps)
    total = g1 + g2 + g3 + g4 + g5 + g6
    cols = [
        le(0, g1),
        le(g1, g2),
        le(g2, g3),
        implies(eq(g1, g2), le(np.abs(g4), np.abs(g5))),
        implies(eq(g2, g3), le(np.abs(g5), np.abs(g6))),
        plus | minus,
        le(np.abs(g4), g2),
        le(np.abs(g5), g1),
        le(np.abs(g6), g1),
        le(g3, total),
        implies(eq(g4, g2), le(g6, 2 * g5)),
        implies(eq(g5, g1), le(g6, 2 * g4)),
        implies(eq(g6, g1), le(g5, 2 * g4)),
        implies(eq(g4, -g2), eq(g6, 0)),
        implies(eq(g5, -g1), eq(g6, 0)),
        implies(eq(g6, -g1), eq(g5, 0)),
        implies(eq(g3, total), le(2 * g1 + 2 * g5 + g6, 0)),
    ]
    return np.stack(cols, axis=1)


def branch_of(g, tol: float = DEFAULT_TOL) -> str | None:
    """'+++' if g4,g5,g6 are all positive, '---' if all <= 0, else None.

    All-zero angles count as '---'.
    """
    g = as_g6(g)
    eps = tol * float(tolerance_scale(g))
    if np.all(g[3:] > eps):
        return PLUS
    if np.all(g[3:] <= eps):
        return MINUS
    return None


@dataclass(frozen=True)
class NiggliReport:
    satisfied: bool
    failed_conditions: list[str] = field(default_factory=list)
    branch: str | None = None


def is_niggli_reduced(g, tol: float = DEFAULT_TOL) -> NiggliReport:
    g = check_valid_g6(g)
    ok = condition_table(g, tol)[0]
    failed = [name for name, good in zip(CONDITIONS, ok) if not good]
    return NiggliReport(not failed, failed, branch_of(g, tol))


@dataclass(frozen=True)
class ReductionResult:
    input: np.ndarray
    reduced: np.ndarray
    basis_transform: np.ndarray
    g6_transform: np.ndarray
    steps: list[str]
    iterations: int

    @property
    def branch(self):
        return branch_of(self.reduced)


def niggli_reduce(g, tol: float = DEFAULT_TOL,
                  max_iter: int = DEFAULT_MAX_ITER) -> ReductionResult:
    """Reduce ``g`` to its Niggli cell, tracking the total transformation."""
    g = check_valid_g6(g)
    if max_iter < 1:
        raise ValueError("max_iter must be >= 1")
    steps = np.zeros(4 * max_iter + 8, dtype=np.int8)
    red, m, n, it, status = _kernels.kg_reduce(g.copy(), float(tol), int(max_iter), steps)
    names = [_kernels.STEP_NAMES[int(s)] for s in steps[:min(n, steps.size)]]
    if status != _kernels.OK:
        why = "iteration cap reached" if status == _kernels.FAIL_CAP else "non-finite value"
        raise NonConvergenceError(
            f"reduction did not converge ({why} after {it} iterations); "
            f"last steps: {names[-3:]}", names[-3:])
    return ReductionResult(g, red, m, g6_matrix_from_basis(m), names, int(it))


def reduce_many(gs, tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER):
    """Reduce a stack of vectors; returns (reduced, basis transforms, status codes).

    Inputs are not validated; a nonzero status marks a failed reduction.
    """
    G = np.ascontiguousarray(np.atleast_2d(gs), dtype=float)
    out_g = np.empty_like(G)
    out_m = np.empty((G.shape[0], 3, 3), dtype=np.int64)
    status = np.empty(G.shape[0], dtype=np.int64)
    _kernels.reduce_batch(G, float(tol), int(max_iter), out_g, out_m, status)
    return out_g, out_m, status


@functools.lru_cache(maxsize=4)
def unimodular_bases(entry_bound: int = 2) -> np.ndarray:
    """All 3x3 integer matrices with entries in [-k, k] and determinant +1."""
    vals = np.arange(-entry_bound, entry_bound + 1, dtype=np.int64)
    rows = np.array(list(itertools.product(vals, repeat=3)), dtype=np.int64)
    # a row pair fixes the cofactor vector; det = row3 . (row1 x row2)
    r1, r2 = np.meshgrid(np.arange(len(rows)), np.arange(len(rows)), indexing="ij")
    r1, r2 = r1.ravel(), r2.ravel()
    cross = np.cross(rows[r1], rows[r2])
    keep = np.any(cross != 0, axis=1)
    r1, r2, cross = r1[keep], r2[keep], cross[keep]
    det = cross @ rows.T
    pair, third = np.nonzero(det == 1)
    out = np.stack([rows[r1[pair]], rows[r2[pair]], rows[third]], axis=1)
    out.setflags(write=False)
    return out


@functools.lru_cache(maxsize=4)
def _oracle_matrices(entry_bound: int) -> np.ndarray:
    mats = g6_matrices_from_bases(unimodular_bases(entry_bound)).astype(float)
    mats = np.unique(mats.reshape(len(mats), 36), axis=0).reshape(-1, 6, 6)
    mats.setflags(write=False)
    return mats


def brute_force_reduce(g, entry_bound: int = 2, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Test oracle: search every small unimodular basis for the reduced cell.

    Among candidates passing :func:`is_niggli_reduced` the lexicographically
    smallest (g1, g2, g3, then g4, g5, g6) is returned.
    """
    g = check_valid_g6(g)
    cand = _oracle_matrices(entry_bound) @ g
    ok = condition_table(cand, tol).all(axis=1)
    if not ok.any():
        raise NoCandidateError(
            f"no reduced cell within entry bound {entry_bound} for {g.tolist()}")
    cand = cand[ok]
    order = np.lexsort(cand.T[::-1])
    return cand[order[0]].copy()
