"""Lattice characters as linear subspaces of G6, and a distance-based classifier.

Each table row carries its Roof/Niggli symbol, IT lattice character, Bravais
type, the printed subspace pattern and the boundary-polytope expression that
generates it.  A generator string is a sequence of case ids, each optionally
followed by a prime (only that case's special-position condition) or a hat
(the case's full fixed subspace).
"""
from __future__ import annotations

import functools
import unicodedata
from dataclasses import dataclass

import numpy as np

from .boundaries import CASE_IDS, get_case
from .errors import NotReducedError
from .g6_core import as_g6, check_valid_g6
from .polytope_lab import (CONE_MINUS, CONE_PLUS, intersect_projectors, parse_pattern,
                           pattern_basis)
from .reduction import DEFAULT_TOL, is_niggli_reduced

PRIME = "′"
HAT = "̂"

# roof, IT character, Bravais, pattern, printed expression, generators used
_TABLE = [
    ("44A", 3, "cP", "(r, r, r, 0, 0, 0)", "12345 = 123̂ = 124̂ = 125̂", "12345"),
    ("44C", 1, "cF", "(r, r, r, r, r, r)", "12679ACD", "12679ACD"),
    ("44B", 5, "cI", "(r, r, r, -2r/3, -2r/3, -2r/3)", "12F2′F′ = 12F̂", "12F2′F′"),
    ("45A", 11, "tP", "(r, r, s, 0, 0, 0)", "1345 = 13̂ = 14 = 15̂", "1345"),
    ("45B", 21, "tP", "(r, s, s, 0, 0, 0)", "2345 = 23̂ = 24̂ = 25̂", "2345"),
    ("45D", 6, "tI", "(r, r, r, -r+s, -r+s, -2s)", "12FF′ = 12F̂", "12FF′"),
    ("45D", 7, "tI", "(r, r, r, -2s, -r+s, -r+s)", "12F2′ = 12F̂", "12F2′"),
    ("45C", 15, "tI", "(r, r, s, -r, -r, 0)", "158BF", "158BF"),
    ("45E", 18, "tI", "(r, s, s, r/2, r, r)", "2ADA′ = 2ÂD", "2ADA′"),
    ("48A", 12, "hP", "(r, r, s, 0, 0, -r)", "134E", "134E"),
    ("48B", 22, "hP", "(r, s, s, -s, 0, 0)", "2458", "2458"),
    ("49C", 2, "hR", "(r, r, r, s, s, s)", "121′2′ = 12̂", "121′2′"),
    ("49D", 4, "hR", "(r, r, r, -s, -s, -s)", "121′2′ = 12̂", "121′2′"),
    ("49B", 9, "hR", "(r, r, s, r, r, r)", "1679ACD", "1679ACD"),
    ("49E", 24, "hR", "(r, s, s, -s+r/3, -2r/3, -2r/3)", "2F2′F′ = 2F̂", "2F2′F′"),
    ("50C", 32, "oP", "(r, s, t, 0, 0, 0)", "345 = 3̂ = 4̂ = 5̂", "345"),
    ("50D", 13, "oC", "(r, r, s, 0, 0, -t)", "134", "134"),
    ("50E", 23, "oC", "(r, s, s, -t, 0, 0)", "245", "245"),
    ("50A", 36, "oC", "(r, s, t, 0, -r, 0)", "35B", "35B"),
    ("50B", 38, "oC", "(r, s, t, 0, 0, -r)", "34E", "34E"),
    ("50F", 40, "oC", "(r, s, t, -s, 0, 0)", "458", "458"),
    ("51A", 16, "oF", "(r, r, s, -t, -t, -2r+2t)", "1F1′ = 1F̂", "1F1′"),
    ("51B", 26, "oF", "(r, s, t, r/2, r, r)", "ADA′ = ÂD", "ADA′"),
    ("52A", 8, "oI", "(r, r, r, -s, -t, -2r+s+t)", "12F", "12F"),
    ("52B", 19, "oI", "(r, s, s, t, r, r)", "29C = 2AD", "29C"),
    ("52C", 42, "oI", "(r, s, t, -s, -r, 0)", "58BF", "58BF"),
    ("53A", 33, "mP", "(r, s, t, 0, -u, 0)", "35", "35"),
    ("53B", 35, "mP", "(r, s, t, -u, 0, 0)", "45", "45"),
    ("53C", 34, "mP", "(r, s, t, 0, 0, -u)", "34", "34"),
    ("55A", 10, "mC", "(r, r, s, t, t, u)", "11′ = 1̂", "11′"),
    ("55A", 14, "mC", "(r, r, s, t, t, u)", "11′ = 1̂", "11′"),
    ("57B", 17, "mC", "(r, r, s, -t, -u, -2r+t+u)", "1F", "1F"),
    ("55B", 20, "mC", "(r, s, s, t, u, u)", "22′ = 2̂", "22′"),
    ("55B", 25, "mC", "(r, s, s, t, u, u)", "22′ = 2̂", "22′"),
    ("57C", 27, "mC", "(r, s, t, u, r, r)", "9C = AD", "9C"),
    ("56A", 28, "mC", "(r, s, t, u, r, 2u)", "AA′ = Â", "AA′"),
    ("56C", 29, "mC", "(r, s, t, u, 2u, r)", "DD′ = D̂", "DD′"),
    ("56B", 30, "mC", "(r, s, t, s, u, 2u)", "77′ = 7̂", "77′"),
    ("54C", 37, "mC", "(r, s, t, -u, -r, 0)", "5B", "5B"),
    ("54A", 39, "mC", "(r, s, t, -u, 0, -r)", "4E", "4E"),
    ("54B", 41, "mC", "(r, s, t, -s, -u, 0)", "58", "58"),
    ("57A", 43, "mC", "(r, s, t, -s+u, -r+u, -2u)", "FF′ = F̂", "FF′"),
]


def parse_generators(text: str) -> tuple[list[str], list[tuple]]:
    """Split a generator string into (case ids, extra hyperplane normals)."""
    cases, normals = [], []
    # NFD splits precomposed letters such as "Â" into letter + combining hat
    text = unicodedata.normalize("NFD", text).replace("'", PRIME).replace(" ", "")
    i = 0
    while i < len(text):
        cid = get_case(text[i]).id
        i += 1
        mark = text[i] if i < len(text) and text[i] in (PRIME, HAT) else ""
        i += bool(mark)
        c = get_case(cid)
        if mark == PRIME:
            normals.extend(c.primed_normals)
        elif mark == HAT:
            normals.extend(c.hat_normals or (c.normal,))
        else:
            cases.append(cid)
    return cases, normals


def generator_projector(text: str) -> np.ndarray:
    cases, normals = parse_generators(text)
    return intersect_projectors(cases, extra_normals=normals)


@dataclass(frozen=True)
class CharacterEntry:
    roof_symbol: str
    it_character: int
    bravais: str
    subspace_pattern: str
    generator_expression: str
    generators: str
    index: int

    @property
    def free_params(self) -> int:
        return _param_count(self.subspace_pattern)

    @property
    def projector(self) -> np.ndarray:
        return _entry_projector(self.generators)

    @property
    def pattern_basis(self) -> np.ndarray:
        return _pattern_basis(self.subspace_pattern)

    def build(self, params) -> np.ndarray:
        """G6 vector for the given parameter values (r, s, t, u order)."""
        return np.asarray(params, dtype=float) @ self.pattern_basis

    def to_json(self) -> dict:
        return {"roof": self.roof_symbol, "it_character": self.it_character,
                "bravais": self.bravais, "pattern": self.subspace_pattern,
                "generators": self.generator_expression}


@functools.lru_cache(maxsize=None)
def _param_count(pattern: str) -> int:
    return len(parse_pattern(pattern)[1])


@functools.lru_cache(maxsize=None)
def _pattern_basis(pattern: str) -> np.ndarray:
    b = pattern_basis(pattern)
    b.setflags(write=False)
    return b


@functools.lru_cache(maxsize=None)
def _entry_projector(generators: str) -> np.ndarray:
    p = generator_projector(generators)
    p.setflags(write=False)
    return p


@functools.lru_cache(maxsize=1)
def character_table() -> tuple[CharacterEntry, ...]:
    return tuple(CharacterEntry(roof, it, bravais, pattern, expr, gens, i)
                 for i, (roof, it, bravais, pattern, expr, gens) in enumerate(_TABLE))


def lookup(key) -> list[CharacterEntry]:
    """Entries by Roof symbol (e.g. "45D") or IT character number."""
    if isinstance(key, (int, np.integer)) or str(key).isdigit():
        return [e for e in character_table() if e.it_character == int(key)]
    return [e for e in character_table() if e.roof_symbol == str(key).upper()]


def in_closed_cone(g, tol: float = 1e-9) -> bool:
    """Membership in the closure of the Niggli cone (either sign branch)."""
    g = as_g6(g)
    eps = tol * float(np.max(np.abs(g)))
    return any(all(np.dot(L, g) >= -eps for L in cone) for cone in (CONE_PLUS, CONE_MINUS))


def character_distance(entry: CharacterEntry, g, tol: float = 1e-9) -> float:
    """Distance from g to the entry's subspace; inf if the nearest point is
    outside the closed Niggli cone."""
    g = as_g6(g)
    pg = entry.projector @ g
    if not in_closed_cone(pg, tol):
        return float("inf")
    return float(np.linalg.norm(g - pg))


@dataclass(frozen=True)
class Classification:
    input: np.ndarray
    tol: float
    ranked: list  # (CharacterEntry, distance)

    @property
    def scale(self) -> float:
        return float(np.max(np.abs(self.input)))

    @property
    def matches(self) -> list:
        lim = self.tol * self.scale
        return [(e, d) for e, d in self.ranked if d <= lim]

    def top(self, n: int) -> list:
        return self.ranked[:n]


def classify(g, tol: float = 1e-6, reduce_tol: float = DEFAULT_TOL) -> Classification:
    """Rank all characters by distance from a Niggli-reduced vector.

    Entries within ``tol * scale`` are matches; they are ordered by fewest
    free parameters (most specific first), then by table order.  Other
    entries follow by distance.
    """
    g = check_valid_g6(g)
    report = is_niggli_reduced(g, reduce_tol)
    if not report.satisfied:
        raise NotReducedError(report.failed_conditions)
    scale = float(np.max(np.abs(g)))
    rows = [(e, character_distance(e, g)) for e in character_table()]

    def key(row):
        e, d = row
        rel = 0.0 if d <= tol * scale else round(d / scale, 12)
        return (rel, e.free_params, e.index)

    return Classification(g, tol, sorted(rows, key=key))


# --- Hosoya conditions ------------------------------------------------------

HOSOYA = (
    ("2g1 = g5 + g6", (2, 0, 0, 0, -1, -1)),
    ("2g2 = g4 + g6", (0, 2, 0, -1, 0, -1)),
    ("2g3 = g4 + g5", (0, 0, 2, -1, -1, 0)),
    ("g4 = g5", (0, 0, 0, 1, -1, 0)),
    ("g5 = g6", (0, 0, 0, 0, 1, -1)),
    ("g4 = g5/2", (0, 0, 0, 2, -1, 0)),
)


def hosoya_conditions(g, tol: float = 1e-9) -> tuple[bool, ...]:
    g = as_g6(g)
    eps = tol * float(np.max(np.abs(g)))
    return tuple(bool(abs(np.dot(n, g)) <= eps) for _, n in HOSOYA)


def synthetic_samples(entry: CharacterEntry, n: int, rng: np.random.Generator,
                      tol: float = DEFAULT_TOL, max_draws: int = 2_000_000) -> np.ndarray:
    """Random Niggli-reduced points of an entry's subspace (rejection sampling)."""
    from .reduction import condition_table
    from .g6_core import is_valid_g6

    basis = entry.pattern_basis
    out = []
    drawn = 0
    while len(out) < n and drawn < max_draws:
        batch = 20_000
        params = rng.uniform(-1, 1, size=(batch, len(basis)))
        G = params @ basis
        ok = condition_table(G, tol).all(axis=1)
        for g in G[ok]:
            if is_valid_g6(g):
                out.append(g)
                if len(out) == n:
                    break
        drawn += batch
    return np.array(out)


__all__ = ["CharacterEntry", "Classification", "character_table", "character_distance",
           "classify", "hosoya_conditions", "lookup", "synthetic_samples",
           "generator_projector", "parse_generators", "CASE_IDS"]
