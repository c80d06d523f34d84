"""G6 vectors, cell parameters and the two matrix presentations of a basis change.

A G6 vector is ``(a.a, b.b, c.c, 2 b.c, 2 a.c, 2 a.b)``.  Angles are degrees at
the public boundary (``CellParams``) and radians nowhere else; every function
here is a pure function of its arguments.

A 3x3 integer basis transform ``m`` maps old edges to new edges row-wise::

    new_edges = m @ old_edges      # rows are a, b, c

so ``m = [[0, -1, 0], [-1, 0, 0], [0, 0, -1]]`` is ``a -> -b, b -> -a, c -> -c``.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
import sympy

from .errors import InvalidCellError

PD_TOL = 1e-12


@dataclass(frozen=True)
class CellParams:
    a: float
    b: float
    c: float
    alpha: float
    beta: float
    gamma: float

    def problems(self) -> list[str]:
        out = []
        for name in ("a", "b", "c"):
            if not getattr(self, name) > 0:
                out.append(f"{name} must be > 0")
        angles = (self.alpha, self.beta, self.gamma)
        for name, ang in zip(("alpha", "beta", "gamma"), angles):
            if not 0 < ang < 180:
                out.append(f"{name} must lie strictly between 0 and 180 degrees")
        if not out:
            if sum(angles) >= 360:
                out.append("alpha + beta + gamma must be < 360")
            for i, name in enumerate(("alpha", "beta", "gamma")):
                others = sum(angles) - angles[i]
                if angles[i] >= others:
                    out.append(f"{name} must be smaller than the sum of the other two angles")
        return out

    def validate(self) -> "CellParams":
        bad = self.problems()
        if bad:
            raise InvalidCellError("invalid cell: " + "; ".join(bad))
        return self

    def as_tuple(self):
        return (self.a, self.b, self.c, self.alpha, self.beta, self.gamma)


def as_g6(g) -> np.ndarray:
    arr = np.asarray(g, dtype=float).reshape(-1)
    if arr.shape != (6,):
        raise InvalidCellError(f"a G6 vector needs 6 components, got {arr.size}")
    return arr


def cell_to_g6(cell: CellParams) -> np.ndarray:
    cell.validate()
    a, b, c = cell.a, cell.b, cell.c
    al, be, ga = (math.radians(x) for x in (cell.alpha, cell.beta, cell.gamma))
    return np.array([a * a, b * b, c * c,
                     2 * b * c * math.cos(al),
                     2 * a * c * math.cos(be),
                     2 * a * b * math.cos(ga)])


def metric_tensor(g) -> np.ndarray:
    g1, g2, g3, g4, g5, g6 = as_g6(g)
    return np.array([[g1, g6 / 2, g5 / 2],
                     [g6 / 2, g2, g4 / 2],
                     [g5 / 2, g4 / 2, g3]])


def metric_determinant(g) -> float:
    """Squared cell volume; no validity check is made."""
    g1, g2, g3, g4, g5, g6 = as_g6(g)
    # cofactor expansion keeps the exact-friendly form for small integer inputs
    return (g1 * (g2 * g3 - g4 * g4 / 4)
            - g6 / 2 * (g6 / 2 * g3 - g4 / 2 * g5 / 2)
            + g5 / 2 * (g6 / 2 * g4 / 2 - g2 * g5 / 2))


def positive_definite_problem(g, tol: float = PD_TOL) -> str | None:
    """Sylvester's criterion with tolerances relative to the largest |g_i|.

    Returns a description of the first failing leading minor, or None.
    """
    g = as_g6(g)
    if not np.all(np.isfinite(g)):
        return "non-finite component"
    s = float(np.max(np.abs(g)))
    if s == 0:
        return "zero vector"
    g1, g2, g3, g4, g5, g6 = g
    if not g1 > tol * s:
        return "first leading minor g1 <= 0"
    if not g1 * g2 - g6 * g6 / 4 > tol * s * s:
        return "second leading minor g1*g2 - g6^2/4 <= 0"
    if not metric_determinant(g) > tol * s ** 3:
        return "metric tensor determinant <= 0"
    return None


def is_valid_g6(g, tol: float = PD_TOL) -> bool:
    return positive_definite_problem(g, tol) is None


def check_valid_g6(g, tol: float = PD_TOL) -> np.ndarray:
    g = as_g6(g)
    why = positive_definite_problem(g, tol)
    if why is not None:
        raise InvalidCellError(f"not a positive-definite metric ({why}): {g.tolist()}")
    return g


def g6_to_cell(g) -> CellParams:
    g1, g2, g3, g4, g5, g6 = check_valid_g6(g)
    a, b, c = math.sqrt(g1), math.sqrt(g2), math.sqrt(g3)

    def angle(x):
        return math.degrees(math.acos(max(-1.0, min(1.0, x))))

    return CellParams(a, b, c,
                      angle(g4 / (2 * b * c)),
                      angle(g5 / (2 * a * c)),
                      angle(g6 / (2 * a * b)))


# --- basis transforms -------------------------------------------------------

_DOUBLED_METRIC_INDEX = [(0, 0), (1, 1), (2, 2), (1, 2), (0, 2), (0, 1)]


def g6_matrices_from_bases(ms: np.ndarray) -> np.ndarray:
    """Vectorised :func:`g6_matrix_from_basis` for a stack of shape (n, 3, 3)."""
    ms = np.asarray(ms, dtype=np.int64)
    single = ms.ndim == 2
    if single:
        ms = ms[None]
    out = np.zeros((ms.shape[0], 6, 6), dtype=np.int64)
    for j in range(6):
        # doubled metric 2G of the j-th unit G6 vector keeps everything integral
        dg = np.zeros((3, 3), dtype=np.int64)
        r, c = _DOUBLED_METRIC_INDEX[j]
        if r == c:
            dg[r, r] = 2
        else:
            dg[r, c] = dg[c, r] = 1
        new = np.einsum("nik,kl,njl->nij", ms, dg, ms)
        for i, (r, c) in enumerate(_DOUBLED_METRIC_INDEX):
            out[:, i, j] = new[:, r, c] // 2 if r == c else new[:, r, c]
    return out[0] if single else out


def g6_matrix_from_basis(m) -> np.ndarray:
    """The exact integer 6x6 matrix acting on G6 for the edge transform ``m``.

    ``g6_matrix_from_basis(m) == g6_matrix_from_basis(-m)``.
    """
    m = np.asarray(m)
    if m.shape != (3, 3) or not np.all(m == np.round(m)):
        raise ValueError("basis transform must be a 3x3 integer matrix")
    return g6_matrices_from_bases(m.astype(np.int64))


def apply_g6(matrix, g) -> np.ndarray:
    return np.asarray(matrix, dtype=float) @ as_g6(g)


_EDGE_TERM = re.compile(r"\s*([+-]?)\s*(\d*)\s*([abc])")


def parse_edges(text: str) -> np.ndarray:
    """Parse an edge presentation like ``"a, -b, b-c"`` into a 3x3 transform."""
    parts = [p for p in re.split(r"[,;]", text.replace("−", "-"))]
    if len(parts) != 3:
        raise ValueError(f"need three comma-separated edges: {text!r}")
    m = np.zeros((3, 3), dtype=np.int64)
    for row, part in enumerate(parts):
        pos = 0
        part = part.strip()
        while pos < len(part):
            mt = _EDGE_TERM.match(part, pos)
            if not mt:
                raise ValueError(f"cannot parse edge expression {part!r}")
            sign = -1 if mt.group(1) == "-" else 1
            coef = int(mt.group(2) or 1)
            m[row, "abc".index(mt.group(3))] += sign * coef
            pos = mt.end()
    return m


# Printed matrix rows: one digit per entry, an overbar (U+0304) negates the digit,
# and "n/d" forms a fraction.  Rows are separated by "|"; spaces are ignored.
_PRINTED_ENTRY = re.compile(r"(\d)(̄?)(?:/(\d))?")


def parse_printed_matrix(text: str) -> sympy.ImmutableMatrix:
    rows = []
    for row_text in _split_rows(text):
        entries = []
        pos = 0
        row_text = row_text.replace(" ", "")
        while pos < len(row_text):
            mt = _PRINTED_ENTRY.match(row_text, pos)
            if not mt:
                raise ValueError(f"bad printed row {row_text!r} at {pos}")
            num = int(mt.group(1)) * (-1 if mt.group(2) else 1)
            den = int(mt.group(3) or 1)
            entries.append(sympy.Rational(num, den))
            pos = mt.end()
        rows.append(entries)
    if len(rows) != 6 or any(len(r) != 6 for r in rows):
        raise ValueError(f"printed matrix is not 6x6: {text!r}")
    return sympy.ImmutableMatrix(rows)


def _split_rows(text):
    # rows are separated by "|" so that "/" stays free for fractions
    return [r for r in text.split("|") if r.strip()]


def to_fractions(g) -> list[Fraction]:
    return [x if isinstance(x, Fraction) else Fraction(x) for x in g]
