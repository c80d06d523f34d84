"""The fifteen five-dimensional boundaries of the Niggli cone.

Each case bundles its hyperplane, inequality qualifier, sign branch, the
reduction matrix ``M`` that carries nearby unreduced cells back into the cone,
the orthogonal projector ``P`` onto its hyperplane and the extra linear
conditions (the "primed" conditions) whose points ``M`` leaves fixed.

Matrices are transcribed from their printed form and held as exact sympy
rationals.  In that notation every entry is one digit, a combining overbar
(U+0304) negates it, ``n/d`` is a fraction and ``|`` separates rows.
"""
from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np
import sympy

from .errors import UnknownCaseError
from .g6_core import as_g6, g6_matrix_from_basis, parse_edges, parse_printed_matrix

CASE_IDS = "123456789ABCDEF"

EQUAL_EDGE = "equal-edge"
NINETY_DEGREE = "ninety-degree"
FACE_DIAGONAL = "face-diagonal"
BODY_DIAGONAL = "body-diagonal"

BOTH = "both"
PLUS = "+++"
MINUS = "---"

# (M, P) in printed notation.
_PRINTED = {
    "1": (
        "0 1 0 0 0 0 | 1 0 0 0 0 0 | 0 0 1 0 0 0 | 0 0 0 0 1 0 | 0 0 0 1 0 0 | 0 0 0 0 0 1",
        "1/2 1/2 0 0 0 0 | 1/2 1/2 0 0 0 0 | 0 0 1 0 0 0 | 0 0 0 1 0 0 | 0 0 0 0 1 0 | 0 0 0 0 0 1"),
    "2": (
        "1 0 0 0 0 0 | 0 0 1 0 0 0 | 0 1 0 0 0 0 | 0 0 0 1 0 0 | 0 0 0 0 0 1 | 0 0 0 0 1 0",
        "1 0 0 0 0 0 | 0 1/2 1/2 0 0 0 | 0 1/2 1/2 0 0 0 | 0 0 0 1 0 0 | 0 0 0 0 1 0 | 0 0 0 0 0 1"),
    "3": (
        "1 0 0 0 0 0 | 0 1 0 0 0 0 | 0 0 1 0 0 0 | 0 0 0 1 0 0 | 0 0 0 0 1̄ 0 | 0 0 0 0 0 1̄",
        "1 0 0 0 0 0 | 0 1 0 0 0 0 | 0 0 1 0 0 0 | 0 0 0 0 0 0 | 0 0 0 0 1 0 | 0 0 0 0 0 1"),
    "4": (
        "1 0 0 0 0 0 | 0 1 0 0 0 0 | 0 0 1 0 0 0 | 0 0 0 1̄ 0 0 | 0 0 0 0 1 0 | 0 0 0 0 0 1̄",
        "1 0 0 0 0 0 | 0 1 0 0 0 0 | 0 0 1 0 0 0 | 0 0 0 1 0 0 | 0 0 0 0 0 0 | 0 0 0 0 0 1"),
    "5": (
        "1 0 0 0 0 0 | 0 1 0 0 0 0 | 0 0 1 0 0 0 | 0 0 0 1̄ 0 0 | 0 0 0 0 1̄ 0 | 0 0 0 0 0 1",
        "1 0 0 0 0 0 | 0 1 0 0 0 0 | 0 0 1 0 0 0 | 0 0 0 1 0 0 | 0 0 0 0 1 0 | 0 0 0 0 0 0"),
    "6": (
        "1 0 0 0 0 0 | 0 1 0 0 0 0 | 0 1 1 1̄ 0 0 | 0 2̄ 0 1 0 0 | 0 0 0 0 1̄ 1 | 0 0 0 0 0 1̄",
        "1 0 0 0 0 0 | 0 1/2 0 1/2 0 0 | 0 0 1 0 0 0 | 0 1/2 0 1/2 0 0 | 0 0 0 0 1 0 | 0 0 0 0 0 1"),
    "7": (
        "1 0 0 0 0 0 | 0 1 0 0 0 0 | 0 1 1 1̄ 0 0 | 0 2 0 1̄ 0 0 | 0 0 0 0 1̄ 1 | 0 0 0 0 0 1",
        "1 0 0 0 0 0 | 0 1/2 0 1/2 0 0 | 0 0 1 0 0 0 | 0 1/2 0 1/2 0 0 | 0 0 0 0 1 0 | 0 0 0 0 0 1"),
    "8": (
        "1 0 0 0 0 0 | 0 1 0 0 0 0 | 0 1 1 1 0 0 | 0 2 0 1 0 0 | 0 0 0 0 1̄ 1̄ | 0 0 0 0 0 1̄",
        "1 0 0 0 0 0 | 0 1/2 0 1̄/2 0 0 | 0 0 1 0 0 0 | 0 1̄/2 0 1/2 0 0 | 0 0 0 0 1 0 | 0 0 0 0 0 1"),
    "9": (
        "1 0 0 0 0 0 | 0 1 0 0 0 0 | 1 0 1 0 1̄ 0 | 0 0 0 1̄ 0 1 | 2̄ 0 0 0 1 0 | 0 0 0 0 0 1̄",
        "1/2 0 0 0 1/2 0 | 0 1 0 0 0 0 | 0 0 1 0 0 0 | 0 0 0 1 0 0 | 1/2 0 0 0 1/2 0 | 0 0 0 0 0 1"),
    "A": (
        "1 0 0 0 0 0 | 0 1 0 0 0 0 | 1 0 1 0 1̄ 0 | 0 0 0 1̄ 0 1 | 2 0 0 0 1̄ 0 | 0 0 0 0 0 1",
        "1/2 0 0 0 1/2 0 | 0 1 0 0 0 0 | 0 0 1 0 0 0 | 0 0 0 1 0 0 | 1/2 0 0 0 1/2 0 | 0 0 0 0 0 1"),
    "B": (
        "1 0 0 0 0 0 | 0 1 0 0 0 0 | 1 0 1 0 1 0 | 0 0 0 1̄ 0 1̄ | 2 0 0 0 1 0 | 0 0 0 0 0 1̄",
        "1/2 0 0 0 1̄/2 0 | 0 1 0 0 0 0 | 0 0 1 0 0 0 | 0 0 0 1 0 0 | 1̄/2 0 0 0 1/2 0 | 0 0 0 0 0 1"),
    "C": (
        "1 0 0 0 0 0 | 1 1 0 0 0 1̄ | 0 0 1 0 0 0 | 0 0 0 1̄ 1 0 | 0 0 0 0 1̄ 0 | 2̄ 0 0 0 0 1",
        "1/2 0 0 0 0 1/2 | 0 1 0 0 0 0 | 0 0 1 0 0 0 | 0 0 0 1 0 0 | 0 0 0 0 1 0 | 1/2 0 0 0 0 1/2"),
    "D": (
        "1 0 0 0 0 0 | 1 1 0 0 0 1̄ | 0 0 1 0 0 0 | 0 0 0 1̄ 1 0 | 0 0 0 0 1 0 | 2 0 0 0 0 1̄",
        "1/2 0 0 0 0 1/2 | 0 1 0 0 0 0 | 0 0 1 0 0 0 | 0 0 0 1 0 0 | 0 0 0 0 1 0 | 1/2 0 0 0 0 1/2"),
    "E": (
        "1 0 0 0 0 0 | 1 1 0 0 0 1 | 0 0 1 0 0 0 | 0 0 0 1̄ 1̄ 0 | 0 0 0 0 1̄ 0 | 2 0 0 0 0 1",
        "1/2 0 0 0 0 1̄/2 | 0 1 0 0 0 0 | 0 0 1 0 0 0 | 0 0 0 1 0 0 | 0 0 0 0 1 0 | 1̄/2 0 0 0 0 1/2"),
    "F": (
        "1 0 0 0 0 0 | 0 1 0 0 0 0 | 1 1 1 1 1 1 | 0 2̄ 0 1̄ 0 1̄ | 2̄ 0 0 0 1̄ 1̄ | 0 0 0 0 0 1",
        "4/5 1̄/5 0 1̄/5 1̄/5 1̄/5 | 1̄/5 4/5 0 1̄/5 1̄/5 1̄/5 | 0 0 1 0 0 0 | 1̄/5 1̄/5 0 4/5 1̄/5 1̄/5 | 1̄/5 1̄/5 0 1̄/5 4/5 1̄/5 | 1̄/5 1̄/5 0 1̄/5 1̄/5 4/5"),
}

# id: (class, hyperplane normal, qualifier normal (q.g >= 0) or None, branch,
#      edge presentation, primed condition normals, condition text, primed text)
_DEFS = {
    "1": (EQUAL_EDGE, (1, -1, 0, 0, 0, 0), None, BOTH,
          "-b, -a, -c", [(0, 0, 0, 1, -1, 0)], "g1 = g2", "g4 = g5"),
    "2": (EQUAL_EDGE, (0, 1, -1, 0, 0, 0), None, BOTH,
          "-a, -c, -b", [(0, 0, 0, 0, 1, -1)], "g2 = g3", "g5 = g6"),
    "3": (NINETY_DEGREE, (0, 0, 0, 1, 0, 0), None, BOTH,
          "a, -b, -c", [(0, 0, 0, 0, 1, 0), (0, 0, 0, 0, 0, 1)], "g4 = 0", "g5 = g6 = 0"),
    "4": (NINETY_DEGREE, (0, 0, 0, 0, 1, 0), None, BOTH,
          "-a, b, -c", [(0, 0, 0, 1, 0, 0), (0, 0, 0, 0, 0, 1)], "g5 = 0", "g4 = g6 = 0"),
    "5": (NINETY_DEGREE, (0, 0, 0, 0, 0, 1), None, BOTH,
          "-a, -b, c", [(0, 0, 0, 1, 0, 0), (0, 0, 0, 0, 1, 0)], "g6 = 0", "g4 = g5 = 0"),
    "6": (FACE_DIAGONAL, (0, 1, 0, -1, 0, 0), (0, 0, 0, 0, 1, -1), PLUS,
          "a, -b, b-c", [], "g2 = g4 and g5 >= g6", None),
    "7": (FACE_DIAGONAL, (0, 1, 0, -1, 0, 0), (0, 0, 0, 0, -1, 1), PLUS,
          "-a, -b, c-b", [(0, 0, 0, 0, 2, -1)], "g2 = g4 and g5 < g6", "g5 = g6/2"),
    "8": (FACE_DIAGONAL, (0, 1, 0, 1, 0, 0), None, MINUS,
          "a, -b, -b-c", [], "g2 = -g4", None),
    "9": (FACE_DIAGONAL, (1, 0, 0, 0, -1, 0), (0, 0, 0, 1, 0, -1), PLUS,
          "-a, b, a-c", [], "g1 = g5 and g4 >= g6", None),
    "A": (FACE_DIAGONAL, (1, 0, 0, 0, -1, 0), (0, 0, 0, -1, 0, 1), PLUS,
          "-a, -b, -a+c", [(0, 0, 0, 2, 0, -1)], "g1 = g5 and g4 < g6", "g4 = g6/2"),
    "B": (FACE_DIAGONAL, (1, 0, 0, 0, 1, 0), None, MINUS,
          "-a, b, -a-c", [], "g1 = -g5", None),
    "C": (FACE_DIAGONAL, (1, 0, 0, 0, 0, -1), (0, 0, 0, 1, -1, 0), PLUS,
          "-a, a-b, c", [], "g1 = g6 and g4 >= g5", None),
    "D": (FACE_DIAGONAL, (1, 0, 0, 0, 0, -1), (0, 0, 0, -1, 1, 0), PLUS,
          "-a, -a+b, -c", [(0, 0, 0, 2, -1, 0)], "g1 = g6 and g4 < g5", "g4 = g5/2"),
    "E": (FACE_DIAGONAL, (1, 0, 0, 0, 0, 1), None, MINUS,
          "-a, -a-b, c", [], "g1 = -g6", None),
    "F": (BODY_DIAGONAL, (1, 1, 0, 1, 1, 1), None, MINUS,
          "-a, -b, a+b+c", [(1, -1, 0, -1, 1, 0)],
          "g1 + g2 + g3 + g4 + g5 + g6 = g3", "g1 - g2 - g4 + g5 = 0"),
}

# Cases sharing one hyperplane and the normal of the plane that divides them.
FLAT_PAIRS = {
    frozenset("67"): (0, 0, 0, 0, 1, -1),
    frozenset("9A"): (0, 0, 0, 1, 0, -1),
    frozenset("CD"): (0, 0, 0, 1, -1, 0),
}

# Cases 3, 4 and 5 share the orthorhombic fixed subspace g4 = g5 = g6 = 0.
_ORTHO_HAT = [(0, 0, 0, 1, 0, 0), (0, 0, 0, 0, 1, 0), (0, 0, 0, 0, 0, 1)]


@dataclass(frozen=True)
class BoundaryCase:
    id: str
    kind: str
    normal: tuple
    qualifier: tuple | None
    branch: str
    e3_text: str
    condition_text: str
    primed_text: str | None
    primed_normals: tuple
    M: sympy.ImmutableMatrix
    P: sympy.ImmutableMatrix

    @property
    def e3(self) -> np.ndarray:
        return parse_edges(self.e3_text)

    @property
    def unit_normal(self) -> np.ndarray:
        n = np.array(self.normal, dtype=float)
        return n / np.linalg.norm(n)

    @property
    def M_float(self) -> np.ndarray:
        return _float_matrix(self.M)

    @property
    def P_float(self) -> np.ndarray:
        return _float_matrix(self.P)

    @property
    def hat_normals(self) -> tuple:
        """Conditions of the fixed subspace, hyperplane included."""
        if self.id in "345":
            return tuple(_ORTHO_HAT)
        if not self.primed_normals:
            return ()
        return (self.normal,) + self.primed_normals


def _float_matrix(m) -> np.ndarray:
    return np.array(m.tolist(), dtype=float)


@functools.lru_cache(maxsize=None)
def catalog() -> dict[str, BoundaryCase]:
    out = {}
    for cid in CASE_IDS:
        kind, normal, qual, branch, e3, primed, cond, primed_text = _DEFS[cid]
        m_text, p_text = _PRINTED[cid]
        out[cid] = BoundaryCase(
            cid, kind, normal, qual, branch, e3, cond, primed_text, tuple(primed),
            parse_printed_matrix(m_text), parse_printed_matrix(p_text))
    return out


def get_case(case) -> BoundaryCase:
    key = str(case).strip().upper()
    try:
        return catalog()[key]
    except KeyError:
        raise UnknownCaseError(f"unknown boundary case {case!r}; expected one of 1-9, A-F") from None


def parse_case_list(text) -> list[str]:
    """Accept "1,2,F", "12F" or an iterable of ids; ids are validated."""
    if isinstance(text, str):
        ids = [c for c in text.replace(",", " ").replace(" ", "")]
    else:
        ids = [str(c) for c in text]
    return [get_case(c).id for c in ids]


def printed_text(case) -> tuple[str, str]:
    return _PRINTED[get_case(case).id]


def e3_g6_matrix(case) -> sympy.ImmutableMatrix:
    """The G6 matrix computed from the edge presentation (cross-check of M)."""
    return sympy.ImmutableMatrix(g6_matrix_from_basis(get_case(case).e3).tolist())


def distinct_projectors() -> list[tuple[str, ...]]:
    """Groups of case ids that share one projector."""
    groups: dict = {}
    for cid, c in catalog().items():
        groups.setdefault(c.P, []).append(cid)
    return [tuple(v) for v in groups.values()]


# --- subspace projectors ----------------------------------------------------

def subspace_projector(normals) -> np.ndarray:
    """Orthogonal projector onto {g : n.g = 0 for every n in normals}."""
    if len(normals) == 0:
        return np.eye(6)
    A = np.atleast_2d(np.asarray(normals, dtype=float))
    u, s, vt = np.linalg.svd(A)
    rank = int(np.sum(s > 1e-10 * s[0]))
    basis = vt[:rank]
    return np.eye(6) - basis.T @ basis


def exact_subspace_projector(normals) -> sympy.ImmutableMatrix:
    A = sympy.Matrix([list(map(sympy.Rational, n)) for n in normals])
    if A.rows == 0:
        return sympy.ImmutableMatrix(sympy.eye(6))
    rows = A.T.columnspace()
    B = sympy.Matrix.hstack(*rows)
    return sympy.ImmutableMatrix(sympy.eye(6) - B * (B.T * B).inv() * B.T)


# --- queries ----------------------------------------------------------------

def _scale(g) -> float:
    return float(np.max(np.abs(g)))


def boundary_distance(case, g) -> float:
    """Euclidean distance from ``g`` to the case's hyperplane."""
    c = get_case(case)
    return float(abs(c.unit_normal @ as_g6(g)))


def qualifier_holds(case, g, tol: float = 1e-9) -> bool:
    c = get_case(case)
    if c.qualifier is None:
        return True
    g = as_g6(g)
    return bool(np.dot(c.qualifier, g) >= -tol * _scale(g))


def in_branch(case, g, tol: float = 1e-9) -> bool:
    """Closure test of the case's sign branch for g4, g5, g6."""
    c = get_case(case)
    g = as_g6(g)
    eps = tol * _scale(g)
    plus = bool(np.all(g[3:] >= -eps))
    minus = bool(np.all(g[3:] <= eps))
    if c.branch == PLUS:
        return plus
    if c.branch == MINUS:
        return minus
    return plus or minus


def on_boundary(case, g, tol: float = 1e-9) -> bool:
    g = as_g6(g)
    return (boundary_distance(case, g) <= tol * _scale(g)
            and qualifier_holds(case, g, tol)
            and in_branch(case, g, tol))


def apply_boundary_transform(case, g) -> np.ndarray:
    return get_case(case).M_float @ as_g6(g)


def project_to_boundary(case, g, exact: bool = False):
    """``P g``.  With ``exact=True`` the product is a list of sympy rationals."""
    c = get_case(case)
    if exact:
        v = sympy.Matrix([sympy.nsimplify(x, rational=True) for x in g])
        return list(c.P * v)
    return c.P_float @ as_g6(g)


def special_subspace_fixed(case, g, tol: float = 1e-9) -> bool:
    """True when g lies on the hyperplane and meets the primed conditions."""
    c = get_case(case)
    if not c.primed_normals:
        return False
    g = as_g6(g)
    eps = tol * _scale(g)
    return all(abs(np.dot(n, g)) / np.linalg.norm(n) <= eps
               for n in (c.normal,) + c.primed_normals)


def hat_fixed(case, g, tol: float = 1e-9) -> bool:
    """Membership in the full fixed subspace (g4 = g5 = g6 = 0 for 3, 4, 5)."""
    c = get_case(case)
    g = as_g6(g)
    eps = tol * _scale(g)
    return bool(c.hat_normals) and all(
        abs(np.dot(n, g)) / np.linalg.norm(n) <= eps for n in c.hat_normals)


def boundary_report(g, tol: float = 1e-9) -> list[dict]:
    """One row per case, ordered by distance."""
    g = as_g6(g)
    rows = [{"case": cid,
             "distance": boundary_distance(cid, g),
             "on_boundary": on_boundary(cid, g, tol),
             "special": special_subspace_fixed(cid, g, tol)}
            for cid in CASE_IDS]
    rows.sort(key=lambda r: (r["distance"], CASE_IDS.index(r["case"])))
    return rows
