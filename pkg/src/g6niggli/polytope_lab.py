"""Projector algebra and the catalog of lower-dimensional boundary polytopes.

The closure of the Niggli cone is the union of two polyhedral cones, one per
sign branch.  Every boundary polytope is a face of one or both, so the catalog
is built exactly from the extreme rays of the two cones:

* each case selects the rays lying on its hyperplane, meeting its closed
  qualifier and belonging to its branch;
* a set of cases selects the rays common to all of them;
* the polytope reached is identified by the *closed* case set, i.e. every case
  whose selection contains those rays.  Its dimension is the rank of the rays.

Monte Carlo witness probing then confirms that each polytope borders reduced
cells and records the reduction matrices seen near it.
"""
from __future__ import annotations

import functools
import itertools
import json
import warnings
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import sympy

from . import _kernels
from .boundaries import CASE_IDS, FLAT_PAIRS, MINUS, PLUS, catalog, parse_case_list
from .errors import G6Error, InsufficientSamplesError, RankAmbiguityError

SQUARING_TOL = 1e-12
MAX_SQUARINGS = 64
EIGEN_TOL = 1e-6

# Interior reference points of the two branches (used to step back into the cone).
CENTER_PLUS = np.array([1.0, 1.3, 1.7, 0.4, 0.3, 0.2])
CENTER_MINUS = np.array([1.0, 1.3, 1.7, -0.4, -0.3, -0.2])


class ProjectorConvergenceError(G6Error):
    pass


# --- projector algebra ------------------------------------------------------

def projector_from_samples(samples, small_sv_threshold: float = 1e-6,
                           min_gap: float = 10.0) -> np.ndarray:
    """Projector onto the subspace spanned (to within noise) by ``samples``.

    Right singular vectors whose singular values fall below
    ``small_sv_threshold`` times the largest are taken as normals ``A``; the
    result is ``I - A^T A``.
    """
    X = np.atleast_2d(np.asarray(samples, dtype=float))
    if X.shape[0] < 6 or X.shape[1] != 6:
        raise InsufficientSamplesError(
            f"need at least 6 samples of length 6, got shape {X.shape}")
    _, s, vt = np.linalg.svd(X, full_matrices=True)
    if s[0] == 0:
        raise InsufficientSamplesError("all samples are zero")
    small = s < small_sv_threshold * s[0]
    k = int(np.count_nonzero(small))
    if 0 < k < 6:
        big, tiny = s[5 - k], s[6 - k]
        if tiny > 0 and big / tiny < min_gap:
            raise RankAmbiguityError(
                f"no clear singular-value gap (ratio {big / tiny:.3g} < {min_gap})")
    A = vt[6 - k:] if k else np.zeros((0, 6))
    P = np.eye(6) - A.T @ A
    return (P + P.T) / 2


def converge_product(mats, tol: float = SQUARING_TOL,
                     max_squarings: int = MAX_SQUARINGS) -> np.ndarray:
    """Square the product of projectors until it is idempotent."""
    P = np.eye(6)
    for m in mats:
        P = P @ m
    for _ in range(max_squarings + 1):
        if np.linalg.norm(P @ P - P) <= tol:
            return (P + P.T) / 2
        P = P @ P
    raise ProjectorConvergenceError(
        f"projector product not idempotent after {max_squarings} squarings")


def _normal_projector(n) -> np.ndarray:
    n = np.asarray(n, dtype=float)
    n = n / np.linalg.norm(n)
    return np.eye(6) - np.outer(n, n)


def case_projector_factors(cases) -> list[np.ndarray]:
    """Per-case projectors with the flat-boundary substitution applied.

    When both halves of a flat pair occur, the second is replaced by the
    projector onto the plane dividing them.
    """
    ids = parse_case_list(cases)
    cat = catalog()
    factors = []
    for i, cid in enumerate(ids):
        division = None
        for pair, normal in FLAT_PAIRS.items():
            if cid in pair:
                other = next(iter(pair - {cid}))
                if other in ids[:i]:
                    division = normal
        factors.append(_normal_projector(division) if division is not None
                       else cat[cid].P_float)
    return factors


def intersect_projectors(cases, extra_normals=()) -> np.ndarray:
    """Projector onto the intersection of the cases' hyperplanes.

    ``extra_normals`` adds further hyperplanes (e.g. primed conditions).
    """
    ids = parse_case_list(cases)
    if not ids and not len(extra_normals):
        raise ValueError("need at least one case")
    mats = case_projector_factors(ids) + [_normal_projector(n) for n in extra_normals]
    if len(mats) == 1:
        return mats[0].copy()
    return converge_product(mats)


def projector_dimension(p, tol: float = EIGEN_TOL) -> int:
    p = np.asarray(p, dtype=float)
    eig = np.linalg.eigvalsh((p + p.T) / 2)
    ones = int(np.sum(np.abs(eig - 1) <= tol))
    trace = int(round(float(np.trace(p))))
    if ones != trace:
        raise RankAmbiguityError(
            f"eigenvalue count {ones} disagrees with rounded trace {trace}")
    return ones


def span_projector(vectors) -> np.ndarray:
    V = np.atleast_2d(np.asarray(vectors, dtype=float))
    _, s, vt = np.linalg.svd(V)
    rank = int(np.sum(s > 1e-10 * s[0]))
    B = vt[:rank]
    return B.T @ B


# --- exact face lattice -----------------------------------------------------

def _v(*c):
    return np.array(c, dtype=np.int64)


# Facets of the two closed branch cones, as rows L with L.g >= 0.
CONE_PLUS = [_v(1, 0, 0, 0, 0, 0), _v(-1, 1, 0, 0, 0, 0), _v(0, -1, 1, 0, 0, 0),
             _v(0, 0, 0, 1, 0, 0), _v(0, 0, 0, 0, 1, 0), _v(0, 0, 0, 0, 0, 1),
             _v(0, 1, 0, -1, 0, 0), _v(1, 0, 0, 0, -1, 0), _v(1, 0, 0, 0, 0, -1)]
CONE_MINUS = [_v(1, 0, 0, 0, 0, 0), _v(-1, 1, 0, 0, 0, 0), _v(0, -1, 1, 0, 0, 0),
              _v(0, 0, 0, -1, 0, 0), _v(0, 0, 0, 0, -1, 0), _v(0, 0, 0, 0, 0, -1),
              _v(0, 1, 0, 1, 0, 0), _v(1, 0, 0, 0, 1, 0), _v(1, 0, 0, 0, 0, 1),
              _v(1, 1, 0, 1, 1, 1)]
# The qualifier planes split faces of the + cone; their cuts are added as rays.
_PLUS_CUTS = [_v(0, 0, 0, 0, 1, -1), _v(0, 0, 0, 1, 0, -1), _v(0, 0, 0, 1, -1, 0)]


def _extreme_rays(ineqs, extra_planes):
    planes = ineqs + extra_planes
    found = set()
    for combo in itertools.combinations(range(len(planes)), 5):
        ns = sympy.Matrix([list(map(int, planes[i])) for i in combo]).nullspace()
        if len(ns) != 1:
            continue
        v = ns[0]
        den = sympy.ilcm(*[x.q for x in v])
        v = [int(x * den) for x in v]
        g = functools.reduce(sympy.igcd, v)
        v = np.array([x // g for x in v], dtype=np.int64)
        for s in (1, -1):
            w = s * v
            if all(L @ w >= 0 for L in ineqs):
                found.add(tuple(int(x) for x in w))
    return sorted(found)


@functools.lru_cache(maxsize=1)
def cone_rays():
    """(rays, branches): integer generators of both closed branch cones."""
    plus = _extreme_rays(CONE_PLUS, _PLUS_CUTS)
    minus = _extreme_rays(CONE_MINUS, [])
    R = np.array(plus + minus, dtype=np.int64)
    br = np.array([PLUS] * len(plus) + [MINUS] * len(minus))
    R.setflags(write=False)
    br.setflags(write=False)
    return R, br


@functools.lru_cache(maxsize=1)
def case_ray_masks() -> dict[str, int]:
    """Bitmask over :func:`cone_rays` of the rays lying on each closed case."""
    R, br = cone_rays()
    out = {}
    for cid, c in catalog().items():
        sel = R @ np.array(c.normal) == 0
        if c.qualifier is not None:
            sel &= R @ np.array(c.qualifier) >= 0
        if c.branch != "both":
            sel &= br == c.branch
        out[cid] = sum((1 << int(i) for i in np.nonzero(sel)[0]), 0)
    return out


def _bits(mask):
    return [i for i in range(mask.bit_length()) if mask >> i & 1]


def _closure(mask) -> str:
    return "".join(cid for cid, m in case_ray_masks().items() if m & mask == mask)


@dataclass(frozen=True)
class Region:
    key: str
    ray_mask: int
    dimension: int


class RegionStatus:
    OK = "ok"
    EMPTY = "empty"
    ZERO_EDGE = "zero-edge"


def region_of(cases) -> tuple[str, Region | None]:
    """Classify a case set: ``(status, region)``."""
    ids = parse_case_list(cases)
    masks = case_ray_masks()
    mask = (1 << len(cone_rays()[0])) - 1
    for cid in ids:
        mask &= masks[cid]
    if not mask:
        return RegionStatus.EMPTY, None
    rays = cone_rays()[0][_bits(mask)]
    if np.all(rays[:, 0] == 0):
        return RegionStatus.ZERO_EDGE, None
    dim = int(np.linalg.matrix_rank(rays.astype(float)))
    return RegionStatus.OK, Region(_closure(mask), mask, dim)


def region_rays(region: Region) -> np.ndarray:
    return cone_rays()[0][_bits(region.ray_mask)]


def forces_zero_edge(p, tol: float = 1e-9) -> bool:
    """Symbolic zero-edge test: does the projector image force g1, g2 or g3 to 0?"""
    p = np.asarray(p, dtype=float)
    return bool(np.any(np.linalg.norm(p[:3], axis=1) <= tol))


# --- subspace patterns ------------------------------------------------------

PARAMS = sympy.symbols("r s t u v w")


def pattern_from_basis(vectors) -> str:
    """Symbolic form such as ``(r, r, s, r, r, r)`` of the span of ``vectors``."""
    M, pivots = sympy.Matrix([list(map(sympy.Rational, v)) for v in vectors]).rref()
    M = M[:len(pivots), :]
    expr = [sum(PARAMS[i] * M[i, j] for i in range(len(pivots))) for j in range(6)]
    return format_pattern(expr)


def format_pattern(exprs) -> str:
    return "(" + ", ".join(str(sympy.sympify(e)).replace("*", "").replace(" ", "")
                           for e in exprs) + ")"


def parse_pattern(text: str):
    """Parse a pattern string into (list of sympy exprs, free symbols)."""
    body = text.strip().replace("−", "-").strip("()")
    loc = {str(p): p for p in PARAMS}
    parts = []
    for item in body.split(","):
        # juxtaposition like 2r/3 means 2*r/3
        item = item.strip()
        item = "".join(ch if not (ch.isalpha() and i and item[i - 1].isdigit()) else "*" + ch
                       for i, ch in enumerate(item))
        parts.append(sympy.sympify(item, locals=loc))
    if len(parts) != 6:
        raise ValueError(f"pattern needs 6 components: {text!r}")
    free = sorted(set().union(*(e.free_symbols for e in parts)), key=PARAMS.index)
    return parts, free


def pattern_basis(text: str) -> np.ndarray:
    exprs, free = parse_pattern(text)
    return np.array([[float(sympy.diff(e, p)) for e in exprs] for p in free])


def pattern_key(text: str) -> str:
    """Normal form of a pattern string, so equal subspaces compare equal."""
    return pattern_from_basis(pattern_basis(text).tolist()) if pattern_basis(text).size else "()"


# --- enumeration ------------------------------------------------------------

@dataclass
class PolytopeRecord:
    generators: str
    dimension: int
    canonical_projector: np.ndarray
    subspace_pattern: str
    equivalents: list[str] = field(default_factory=list)
    branches: tuple = ()
    populated: bool | None = None
    witness: np.ndarray | None = None
    witness_counts: dict = field(default_factory=dict)
    matrices: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {"generators": self.generators,
                "dimension": self.dimension,
                "pattern": self.subspace_pattern,
                "branches": list(self.branches),
                "equivalents": sorted(self.equivalents, key=_case_sort_key),
                "populated": self.populated}


def _case_sort_key(s):
    return (len(s), [CASE_IDS.index(c) for c in s])


@dataclass
class EnumerationResult:
    records: list[PolytopeRecord]
    subsets_examined: int
    nondegenerate_subsets: int
    rejected_empty: int
    rejected_zero_edge: int
    warnings: list[str]

    @property
    def census(self) -> dict[int, int]:
        c = Counter(r.dimension for r in self.records)
        return {d: c.get(d, 0) for d in (5, 4, 3, 2, 1)}

    def by_generators(self) -> dict[str, PolytopeRecord]:
        return {r.generators: r for r in self.records}

    def class_of(self, cases) -> PolytopeRecord | None:
        status, region = region_of(cases)
        return self.by_generators().get(region.key) if region else None


def _witness_point(region: Region):
    """A point in the relative interior of one branch piece of the region."""
    R, br = cone_rays()
    idx = _bits(region.ray_mask)
    for branch in (PLUS, MINUS):
        sel = [i for i in idx if br[i] == branch]
        if sel and np.linalg.matrix_rank(R[sel].astype(float)) == region.dimension:
            rays = R[sel].astype(float)
            rays /= np.linalg.norm(rays, axis=1)[:, None]
            # unequal weights keep the point off any accidental sub-face
            w = np.arange(1, len(sel) + 1, dtype=float) ** 0.5
            return (w[:, None] * rays).sum(axis=0) / w.sum(), branch
    raise AssertionError(f"region {region.key} has no full-rank branch piece")


def witness_probe(point, budget: int, rng: np.random.Generator, *,
                  scale: float = 1e-4, step_back: float = 2e-5, tol: float = 1e-9,
                  chunk: int = 20000):
    """Perturb a boundary point; count reduced/unreduced neighbors and matrices.

    The point is first moved a fraction ``step_back`` of its norm toward the
    branch interior, then perturbed on a sphere of radius ``scale * |g|``.
    """
    point = np.asarray(point, dtype=float)
    counts = Counter()
    matrices = Counter()
    done = 0
    while done < budget:
        n = min(chunk, budget - done)
        starts = np.tile(point, (n, 1))
        noise = rng.standard_normal((n, 6))
        mats = np.zeros((n, 36), dtype=np.int64)
        flags = np.zeros(n, dtype=np.int64)
        probes = np.zeros((n, 6))
        _kernels.probe_chunk(starts, noise, scale, tol, 1000, step_back, True, False,
                             CENTER_PLUS / np.linalg.norm(CENTER_PLUS),
                             CENTER_MINUS / np.linalg.norm(CENTER_MINUS),
                             mats, flags, probes)
        for f, c in zip(*np.unique(flags, return_counts=True)):
            counts[int(f)] += int(c)
        sel = mats[flags == _kernels.COUNTED]
        if len(sel):
            keys, cnt = np.unique(sel, axis=0, return_counts=True)
            for k, c in zip(keys, cnt):
                matrices[tuple(int(x) for x in k)] += int(c)
        done += n
    return {"reduced": counts[_kernels.IDENTITY],
            "unreduced": counts[_kernels.COUNTED],
            "invalid": counts[_kernels.INVALID_PERTURBED],
            "failed": counts[_kernels.REDUCE_FAILED]}, matrices


def enumerate_polytopes(probe_budget: int = 2000, tol: float = 1e-9, *, seed: int = 0,
                        max_size: int = 8, threads: int | None = None,
                        scale: float = 1e-4, step_back: float = 2e-5) -> EnumerationResult:
    """Enumerate all boundary polytopes reachable from 1..max_size cases.

    ``probe_budget`` is the number of witness probes per polytope; 0 skips
    witness probing (every region is kept and ``populated`` is None).
    """
    found: dict[str, tuple[Region, list[str]]] = {}
    examined = nondeg = empty = zero = 0
    for k in range(1, max_size + 1):
        for subset in itertools.combinations(CASE_IDS, k):
            examined += 1
            status, region = region_of(subset)
            if status == RegionStatus.EMPTY:
                empty += 1
                continue
            if status == RegionStatus.ZERO_EDGE:
                zero += 1
                continue
            nondeg += 1
            found.setdefault(region.key, (region, []))[1].append("".join(subset))

    keys = sorted(found, key=lambda key: (-found[key][0].dimension, _case_sort_key(key)))
    records = []
    for key in keys:
        region, subs = found[key]
        rays = region_rays(region)
        _, br = cone_rays()
        branches = tuple(b for b in (PLUS, MINUS)
                         if b in set(br[_bits(region.ray_mask)]))
        records.append(PolytopeRecord(
            generators=key, dimension=region.dimension,
            canonical_projector=intersect_projectors(key),
            subspace_pattern=pattern_from_basis(rays.tolist()),
            equivalents=sorted(subs, key=_case_sort_key), branches=branches))

    notes = []
    if probe_budget > 0:
        seq = np.random.SeedSequence(seed)

        def probe(i):
            rec = records[i]
            point, _ = _witness_point(found[rec.generators][0])
            rng = np.random.default_rng(np.random.SeedSequence(seq.entropy, spawn_key=(i,)))
            counts, mats = witness_probe(point, probe_budget, rng, scale=scale,
                                         step_back=step_back, tol=tol)
            return i, point, counts, mats

        with ThreadPoolExecutor(max_workers=threads or 1) as pool:
            for i, point, counts, mats in pool.map(probe, range(len(records))):
                rec = records[i]
                rec.witness = point
                rec.witness_counts = counts
                rec.matrices = sorted(mats.items(), key=lambda kv: (-kv[1], kv[0]))
                rec.populated = counts["reduced"] > 0
                if not rec.populated or counts["unreduced"] == 0:
                    notes.append(f"witness probing inconclusive for {rec.generators}: {counts}")
        kept = [r for r in records if r.populated]
        if len(kept) != len(records):
            notes.append(f"{len(records) - len(kept)} polytopes without reduced neighbors dropped")
        records = kept
        for note in notes:
            warnings.warn(note, RuntimeWarning, stacklevel=2)
    return EnumerationResult(records, examined, nondeg, empty, zero, notes)


# --- reference data ---------------------------------------------------------

@dataclass(frozen=True)
class OneDEntry:
    generators: str
    pattern: str
    equivalents: tuple = ()


_ONE_D = [
    ("12679ACD", "(r, r, r, r, r, r)", ()),
    ("12345", "(r, r, r, 0, 0, 0)", ()),
    ("1234CD", "(r, r, r, 0, 0, r)", ("1234C", "1234D", "123CD", "124CD")),
    ("1234E", "(r, r, r, 0, 0, −r)", ()),
    ("12359A", "(r, r, r, 0, r, 0)", ("12359", "1235A", "1239A", "1259A")),
    ("1235B", "(r, r, r, 0, −r, 0)", ()),
    ("123AD", "(r, r, r, 0, r, r)", ()),
    ("123BEF", "(r, r, r, 0, −r, −r)",
     ("123BE", "123BF", "123EF", "12BEF", "23BEF")),
    ("124567", "(r, r, r, r, 0, 0)", ("12456", "12457", "12467", "12567")),
    ("12458", "(r, r, r, −r, 0, 0)", ()),
    ("1247C", "(r, r, r, r, 0, r)", ()),
    ("1248EF", "(r, r, r, −r, 0, −r)", ("1248E", "1248F", "124EF", "128EF")),
    ("12569", "(r, r, r, r, r, 0)", ()),
    ("1258BF", "(r, r, r, −r, −r, 0)", ("1258B", "1258F", "125BF", "128BF")),
]


def one_d_catalog() -> list[OneDEntry]:
    """The fourteen one-dimensional boundary polytopes with their patterns."""
    return [OneDEntry(g, p, e) for g, p, e in _ONE_D]


# --- golden catalog ---------------------------------------------------------

def catalog_to_json(result: EnumerationResult) -> dict:
    return {"census": {str(k): v for k, v in result.census.items()},
            "total": len(result.records),
            "records": [r.to_json() for r in result.records]}


def golden_path():
    from importlib import resources
    return resources.files("g6niggli") / "data" / "catalog.json"


def load_golden(path=None) -> dict:
    if path is None:
        return json.loads(golden_path().read_text())
    with open(path) as fh:
        return json.load(fh)


def compare_golden(result: EnumerationResult, golden: dict) -> list[str]:
    """Differences between a computed catalog and a stored one (empty if equal)."""
    diffs = []
    mine = {r["generators"]: r for r in catalog_to_json(result)["records"]}
    theirs = {r["generators"]: r for r in golden["records"]}
    for key in sorted(set(mine) - set(theirs), key=_case_sort_key):
        diffs.append(f"extra polytope {key}")
    for key in sorted(set(theirs) - set(mine), key=_case_sort_key):
        diffs.append(f"missing polytope {key}")
    for key in sorted(set(mine) & set(theirs), key=_case_sort_key):
        for fld in ("dimension", "pattern", "equivalents"):
            if mine[key][fld] != theirs[key][fld]:
                diffs.append(f"{key}: {fld} differs ({mine[key][fld]} != {theirs[key][fld]})")
    want = {int(k): v for k, v in golden["census"].items()}
    if want != result.census:
        diffs.append(f"census {result.census} != {want}")
    return diffs
