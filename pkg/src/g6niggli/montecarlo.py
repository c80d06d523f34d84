"""Monte Carlo probing of the Niggli cone boundary.

A probe draws a random cell, reduces it, perturbs the reduced vector slightly
and reduces again.  When the perturbation crosses the boundary the second
reduction needs a non-identity transform; censusing those transforms (as
exact integer 6x6 matrices) reveals the boundary polytopes and their relative
sizes.

Trials are split into fixed-size chunks, each with its own seed derived from
``(seed, chunk index)``, so results do not depend on the thread count.
"""
from __future__ import annotations

import math
import os
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import DegenerateVarianceError, ProbeError
from .polytope_lab import CENTER_MINUS, CENTER_PLUS

DEFAULT_SEED = 20140601
CHUNK = 50_000
SEED_ENV = "NIGGLI_SEED"


def effective_seed(seed: int | None = None) -> int:
    """NIGGLI_SEED wins over ``seed``, which wins over the built-in default."""
    env = os.environ.get(SEED_ENV)
    if env not in (None, ""):
        try:
            return int(env)
        except ValueError:
            raise ProbeError(f"{SEED_ENV} must be an integer, got {env!r}") from None
    return DEFAULT_SEED if seed is None else int(seed)


@dataclass(frozen=True)
class ProbeConfig:
    seed: int = DEFAULT_SEED
    trials: int = 100_000
    perturbation_scale: float = 1e-4
    edge_range: tuple = (1.0, 100.0)
    angle_range: tuple = (0.0, 180.0)
    boundary_projector: np.ndarray | None = None
    step_back: float | None = None
    threads: int = 1
    chunk_size: int = CHUNK
    tol: float = 1e-9
    keep_probes: int = 4

    def validate(self) -> "ProbeConfig":
        if not (isinstance(self.trials, (int, np.integer)) and self.trials > 0):
            raise ProbeError(f"trials must be a positive integer, got {self.trials!r}")
        if not self.perturbation_scale > 0:
            raise ProbeError("perturbation_scale must be > 0")
        lo, hi = self.edge_range
        if not 0 < lo <= hi:
            raise ProbeError(f"bad edge range {self.edge_range}")
        alo, ahi = self.angle_range
        if not 0 <= alo < ahi <= 180:
            raise ProbeError(f"bad angle range {self.angle_range}")
        if self.step_back is not None and not self.step_back >= 0:
            raise ProbeError("step_back must be >= 0")
        if self.boundary_projector is not None:
            p = np.asarray(self.boundary_projector, dtype=float)
            if p.shape != (6, 6):
                raise ProbeError("boundary_projector must be 6x6")
        if self.chunk_size < 1 or self.threads < 1:
            raise ProbeError("chunk_size and threads must be >= 1")
        return self


def matrix_key(m) -> tuple:
    return tuple(int(x) for x in np.asarray(m).reshape(36))


def key_matrix(key) -> np.ndarray:
    return np.array(key, dtype=np.int64).reshape(6, 6)


@dataclass
class MatrixCensus:
    counts: Counter = field(default_factory=Counter)
    total_trials: int = 0
    identity: int = 0
    invalid_start: int = 0
    invalid_perturbed: int = 0
    failed: int = 0
    # a few (pre-reduction probe, chunk) examples per matrix, for re-checking
    probes: dict = field(default_factory=dict)

    @property
    def discarded_count(self) -> int:
        return self.identity + self.invalid_start + self.invalid_perturbed + self.failed

    def merge(self, other: "MatrixCensus", keep_probes: int = 4) -> "MatrixCensus":
        out = MatrixCensus(self.counts + other.counts,
                           self.total_trials + other.total_trials,
                           self.identity + other.identity,
                           self.invalid_start + other.invalid_start,
                           self.invalid_perturbed + other.invalid_perturbed,
                           self.failed + other.failed,
                           {k: list(v) for k, v in self.probes.items()})
        for k, v in other.probes.items():
            lst = out.probes.setdefault(k, [])
            lst.extend(v[:max(0, keep_probes - len(lst))])
        return out

    def ranked(self) -> list[tuple[tuple, int]]:
        """(matrix key, count), most populous first; ties by key for determinism."""
        return sorted(self.counts.items(), key=lambda kv: (-kv[1], kv[0]))

    def top_matrices(self, n: int) -> list[np.ndarray]:
        return [key_matrix(k) for k, _ in self.ranked()[:n]]

    def to_json(self) -> dict:
        return {"total_trials": self.total_trials,
                "discarded": self.discarded_count,
                "identity": self.identity,
                "invalid_start": self.invalid_start,
                "invalid_perturbed": self.invalid_perturbed,
                "failed": self.failed,
                "populations": [{"matrix": key_matrix(k).tolist(), "count": c}
                                for k, c in self.ranked()]}


def random_cells(rng: np.random.Generator, n: int, edge_range=(1.0, 100.0),
                 angle_range=(0.0, 180.0)):
    """Draw ``n`` candidate cells; returns (G6 vectors of the valid ones, rejected count)."""
    edges = rng.uniform(*edge_range, size=(n, 3))
    ang = rng.uniform(*angle_range, size=(n, 3))
    tot = ang.sum(axis=1)
    ok = (ang > 0).all(axis=1) & (ang < 180).all(axis=1) & (tot < 360)
    ok &= (2 * ang < tot[:, None]).all(axis=1)
    a, b, c = edges[ok].T
    al, be, ga = np.radians(ang[ok]).T
    g = np.stack([a * a, b * b, c * c,
                  2 * b * c * np.cos(al), 2 * a * c * np.cos(be), 2 * a * b * np.cos(ga)], axis=1)
    # angle inequalities are necessary but rounding can still leave a singular metric
    pd = _positive_definite(g)
    return np.ascontiguousarray(g[pd]), int(n - pd.sum())


def _positive_definite(G, tol=1e-12):
    g1, g2, g3, g4, g5, g6 = G.T
    s = np.max(np.abs(G), axis=1)
    det = (g1 * (g2 * g3 - g4 * g4 / 4) - g6 / 2 * (g6 / 2 * g3 - g4 / 2 * g5 / 2)
           + g5 / 2 * (g6 / 2 * g4 / 2 - g2 * g5 / 2))
    return (g1 > tol * s) & (g1 * g2 - g6 * g6 / 4 > tol * s * s) & (det > tol * s ** 3)


def _run_chunk(cfg: ProbeConfig, index: int, n: int) -> MatrixCensus:
    rng = np.random.default_rng(np.random.SeedSequence(cfg.seed, spawn_key=(index,)))
    starts, rejected = random_cells(rng, n, cfg.edge_range, cfg.angle_range)
    census = MatrixCensus(total_trials=n, invalid_start=rejected)
    if cfg.boundary_projector is not None:
        P = np.asarray(cfg.boundary_projector, dtype=float)
        proj = starts @ P.T
        ok = _positive_definite(proj)
        census.invalid_start += int((~ok).sum())
        starts = np.ascontiguousarray(proj[ok])
    m = len(starts)
    noise = rng.standard_normal((m, 6))
    mats = np.zeros((m, 36), dtype=np.int64)
    flags = np.zeros(m, dtype=np.int64)
    probes = np.zeros((m, 6))
    step = float(cfg.step_back or 0.0)
    spherical = cfg.step_back is not None
    _kernels.probe_chunk(starts, noise, float(cfg.perturbation_scale), float(cfg.tol), 1000,
                         step, spherical, True,
                         CENTER_PLUS / np.linalg.norm(CENTER_PLUS),
                         CENTER_MINUS / np.linalg.norm(CENTER_MINUS),
                         mats, flags, probes)
    census.identity = int((flags == _kernels.IDENTITY).sum())
    census.invalid_perturbed = int((flags == _kernels.INVALID_PERTURBED).sum())
    census.failed = int((flags == _kernels.REDUCE_FAILED).sum())
    sel = np.nonzero(flags == _kernels.COUNTED)[0]
    if len(sel):
        keys, first, cnt = np.unique(mats[sel], axis=0, return_index=True, return_counts=True)
        for k, f, c in zip(keys, first, cnt):
            key = tuple(int(x) for x in k)
            census.counts[key] += int(c)
            rows = sel[np.all(mats[sel] == k, axis=1)][:cfg.keep_probes]
            census.probes[key] = [probes[r].copy() for r in rows]
    return census


def run_probes(cfg: ProbeConfig) -> MatrixCensus:
    cfg.validate()
    sizes = [cfg.chunk_size] * (cfg.trials // cfg.chunk_size)
    if cfg.trials % cfg.chunk_size:
        sizes.append(cfg.trials % cfg.chunk_size)
    with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
        parts = list(pool.map(lambda a: _run_chunk(cfg, *a), enumerate(sizes)))
    total = MatrixCensus()
    for part in parts:
        total = total.merge(part, cfg.keep_probes)
    _check_starvation(cfg, total)
    return total


def _check_starvation(cfg: ProbeConfig, census: MatrixCensus):
    if census.invalid_start > 0.99 * census.total_trials:
        if cfg.boundary_projector is not None:
            raise ProbeError("projection onto the boundary invalidated more than 99% "
                             "of the start vectors")
        raise ProbeError("cell generator starved: more than 99% of random cells invalid")


def probe_5d(config: ProbeConfig) -> MatrixCensus:
    """Random short lines from reduced cells; census of boundary-crossing transforms."""
    if config.boundary_projector is not None:
        raise ProbeError("probe_5d takes no boundary projector; use probe_boundary")
    return run_probes(config)


def probe_boundary(config: ProbeConfig) -> MatrixCensus:
    """As :func:`probe_5d`, with start vectors projected onto a boundary first."""
    if config.boundary_projector is None:
        raise ProbeError("probe_boundary needs a boundary projector")
    return run_probes(config)


# --- population statistics --------------------------------------------------

@dataclass(frozen=True)
class ZScoreReport:
    keys: list
    populations: list[int]
    cutoff_index: int
    mean: float
    sigma: float
    z: list[float]

    @property
    def flagged(self) -> list[int]:
        """Indices with z < -1 (worth a closer look)."""
        return [i for i, z in enumerate(self.z) if z < -1]


def zscore_analysis(census, drop: float = 10.0) -> ZScoreReport:
    """Cut the sorted populations at the first drop by more than ``drop``x.

    ``census`` is a :class:`MatrixCensus` or a plain sequence of populations.
    """
    if isinstance(census, MatrixCensus):
        ranked = census.ranked()
        keys = [k for k, _ in ranked]
        pops = [c for _, c in ranked]
    else:
        pops = sorted((int(x) for x in census), reverse=True)
        keys = list(range(len(pops)))
    if not pops:
        raise ProbeError("empty census")
    cut = len(pops)
    for i in range(1, len(pops)):
        if pops[i - 1] > drop * pops[i]:
            cut = i
            break
    head = np.array(pops[:cut], dtype=float)
    if len(head) < 2:
        raise DegenerateVarianceError("fewer than two populations above the cutoff")
    mu = float(head.mean())
    sigma = float(head.std(ddof=1))
    if sigma == 0 or not math.isfinite(sigma):
        raise DegenerateVarianceError("retained populations have zero variance")
    return ZScoreReport(keys[:cut], pops[:cut], cut, mu, sigma,
                        [(float(t) - mu) / sigma for t in head])


def separation_ratio(census: MatrixCensus, n: int) -> float:
    """Population of the n-th entry divided by that of the (n+1)-th."""
    ranked = census.ranked()
    if len(ranked) < n:
        return 0.0
    if len(ranked) == n:
        return math.inf
    return ranked[n - 1][1] / ranked[n][1]
