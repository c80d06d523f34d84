"""Acceptance criteria, one check each, at the stated tolerances.

Each check returns ``(passed, detail)``.  Under pytest every result is also
collected and printed as a PASS/FAIL line in the terminal summary; running
this file directly prints the same lines.
"""
import itertools
import json
import math
import pathlib
import sys
import time

import numpy as np
import pytest
import sympy

from g6niggli import boundaries, characters, montecarlo, polytope_lab, reduction
from g6niggli.g6_core import g6_matrices_from_bases

DATA = pathlib.Path(__file__).parent / "data"
RESULTS = {}

TITLES = {
    1: "catalog count 216 with census {5:15, 4:53, 3:79, 2:55, 1:14}",
    2: "top-15 transform populations are the catalog, separation >= 30x",
    3: "M and P matrices equal the printed values",
    4: "one-dimensional catalog and fcc presentations",
    5: "reduction oracle and unimodular invariance",
    6: "character round trip and degrees of freedom",
    7: "projector laws",
    8: "flat-boundary substitution",
}


def _rel(a, b):
    a, b = np.asarray(a, float), np.asarray(b, float)
    return float(np.max(np.abs(a - b)) / max(np.max(np.abs(b)), 1e-300))


# --- 1 ----------------------------------------------------------------------

def check_catalog_count():
    t0 = time.perf_counter()
    result = polytope_lab.enumerate_polytopes(probe_budget=100_000, seed=0)
    secs = time.perf_counter() - t0
    want = {5: 15, 4: 53, 3: 79, 2: 55, 1: 14}
    total = len(result.records)
    ok = total == 216 and result.census == want and secs <= 600
    return ok, f"total {total}, census {result.census}, {secs:.0f} s"


# --- 2 ----------------------------------------------------------------------

# Edges kept within one decade and a small perturbation: with edges down to 1
# the skinniest random cells make spurious double-crossing transforms.
POPULATION_CONFIG = dict(trials=10_000_000, edge_range=(10.0, 100.0), perturbation_scale=3e-6)


def check_population_structure():
    cfg = montecarlo.ProbeConfig(seed=montecarlo.DEFAULT_SEED, **POPULATION_CONFIG)
    t0 = time.perf_counter()
    census = montecarlo.probe_5d(cfg)
    secs = time.perf_counter() - t0
    catalog = {montecarlo.matrix_key(np.rint(c.M_float).astype(np.int64))
               for c in boundaries.catalog().values()}
    top = {k for k, _ in census.ranked()[:15]}
    sep = montecarlo.separation_ratio(census, 15)
    ok = top == catalog and sep >= 30 and secs <= 300
    return ok, (f"top 15 == catalog: {top == catalog}, separation {sep:.3g}, "
                f"{len(census.counts)} distinct, {secs:.0f} s")


# --- 3 ----------------------------------------------------------------------

def _fixture_matrix(rows):
    return sympy.Matrix([[sympy.Rational(x) for x in row] for row in rows])


def check_matrix_fidelity():
    printed = json.loads((DATA / "printed_matrices.json").read_text())["matrices"]
    bad = []
    for cid, case in boundaries.catalog().items():
        if sympy.Matrix(case.M) != _fixture_matrix(printed["M" + cid]):
            bad.append(f"M{cid}")
        if sympy.Matrix(case.P) != _fixture_matrix(printed["P" + cid]):
            bad.append(f"P{cid}")
        if sympy.Matrix(boundaries.e3_g6_matrix(cid)) != sympy.Matrix(case.M):
            bad.append(f"E3 {cid}")
    distinct = len({tuple(c.P) for c in boundaries.catalog().values()})
    return not bad, f"mismatches {bad or 'none'}; {distinct} distinct P among 15"


# --- 4 ----------------------------------------------------------------------

def check_one_d():
    result = polytope_lab.enumerate_polytopes(probe_budget=0)
    ones = {r.generators: r for r in result.records if r.dimension == 1}
    problems = []
    ref = polytope_lab.one_d_catalog()
    if set(ones) != {e.generators for e in ref}:
        problems.append(f"generator sets differ: {sorted(set(ones) ^ {e.generators for e in ref})}")
    for e in ref:
        rec = ones.get(e.generators)
        if rec is None:
            continue
        if polytope_lab.pattern_key(rec.subspace_pattern) != polytope_lab.pattern_key(e.pattern):
            problems.append(f"{e.generators} pattern {rec.subspace_pattern}")
        if not set(e.equivalents) <= set(rec.equivalents):
            problems.append(f"{e.generators} missing equivalents")
    hr = json.loads((DATA / "hr_presentations.json").read_text())["presentations"]
    fcc = set()
    for p in hr:
        _, region = polytope_lab.region_of("2" + p)
        if region is not None and region.key == "12679ACD":
            fcc.add("".join(sorted("2" + p, key=boundaries.CASE_IDS.index)))
    if len(fcc) != 82:
        problems.append(f"only {len(fcc)} fcc presentations from the hR list")
    for three in ("26D", "27A"):
        if three not in fcc:
            problems.append(f"{three} not an fcc presentation")
    return not problems, (f"{len(ones)} 1-D classes, {len(fcc)} fcc presentations; "
                          f"problems: {problems or 'none'}")


# --- 5 ----------------------------------------------------------------------

def check_reduction_oracle():
    rng = np.random.default_rng(5)
    worst, compared = 0.0, 0
    while compared < 500:
        starts, _ = montecarlo.random_cells(rng, 200, (1.0, 10.0))
        red, ms, status = reduction.reduce_many(starts)
        for g, r, m, st in zip(starts, red, ms, status):
            # the oracle only searches transforms with entries in [-2, 2]
            if st != 0 or np.abs(m).max() > 2 or compared >= 500:
                continue
            b = reduction.brute_force_reduce(g, entry_bound=2)
            worst = max(worst, _rel(r, b))
            compared += 1
    uni = reduction.unimodular_bases(2)
    starts = np.zeros((0, 6))
    while len(starts) < 1000:
        more, _ = montecarlo.random_cells(rng, 1000, (1.0, 10.0))
        starts = np.vstack([starts, more])
    starts = starts[:1000]
    red, _, _ = reduction.reduce_many(starts)
    worst_u = 0.0
    for g in red:
        picks = uni[rng.integers(0, len(uni), 20)]
        disguised = np.einsum("kij,j->ki", g6_matrices_from_bases(picks).astype(float), g)
        again, _, st = reduction.reduce_many(disguised)
        worst_u = max(worst_u, max(_rel(x, g) for x in again))
    ok = compared == 500 and len(red) == 1000 and worst <= 1e-9 and worst_u <= 1e-9
    return ok, (f"oracle worst rel {worst:.2e} over {compared} cells; "
                f"disguise worst rel {worst_u:.2e} over {len(red)}x20")


# --- 6 ----------------------------------------------------------------------

def check_character_round_trip():
    rng = np.random.default_rng(6)
    problems = []
    table = characters.character_table()
    for e in table:
        dim = polytope_lab.projector_dimension(e.projector)
        if dim != e.free_params:
            problems.append(f"{e.roof_symbol}/{e.it_character} dim {dim} != {e.free_params}")
        same = {x.index for x in table
                if np.abs(x.projector - e.projector).max() <= 1e-9}
        samples = characters.synthetic_samples(e, 100, rng)
        if len(samples) < 100:
            problems.append(f"{e.roof_symbol}/{e.it_character}: {len(samples)} samples")
        for g in samples:
            g = reduction.niggli_reduce(g).reduced
            c = characters.classify(g)
            hit = min(d for x, d in c.ranked if x.index in same)
            if not hit <= 1e-9 * c.scale:
                problems.append(f"{e.roof_symbol}/{e.it_character} at {hit:.2e}")
                break
    return not problems, f"{len(table)} entries; problems: {problems or 'none'}"


# --- 7 ----------------------------------------------------------------------

def _projector_faults(p):
    faults = []
    if np.abs(p - p.T).max() > 1e-12:
        faults.append("symmetry")
    if np.linalg.norm(p @ p - p) > 1e-9:
        faults.append("idempotence")
    eig = np.linalg.eigvalsh(p)
    if np.max(np.minimum(np.abs(eig), np.abs(eig - 1))) > 1e-6:
        faults.append("eigenvalues")
    return faults


def check_projector_laws():
    rng = np.random.default_rng(7)
    faults = []
    for cid, case in boundaries.catalog().items():
        faults += [f"P{cid} {f}" for f in _projector_faults(case.P_float)]
    worst_perm = 0.0
    for _ in range(200):
        k = int(rng.integers(2, 7))
        cases = list(rng.choice(list(boundaries.CASE_IDS), size=k, replace=False))
        p = polytope_lab.intersect_projectors(cases)
        faults += [f"{''.join(cases)} {f}" for f in _projector_faults(p)]
        for _ in range(3):
            q = polytope_lab.intersect_projectors(list(rng.permutation(cases)))
            worst_perm = max(worst_perm, float(np.abs(p - q).max()))
    ok = not faults and worst_perm <= 1e-9
    return ok, f"faults {faults[:5] or 'none'}; worst permutation difference {worst_perm:.1e}"


# --- 8 ----------------------------------------------------------------------

def check_flat_substitution():
    direct = {"67": [(0, 1, 0, -1, 0, 0), (0, 0, 0, 0, 1, -1)],
              "9A": [(1, 0, 0, 0, -1, 0), (0, 0, 0, 1, 0, -1)],
              "CD": [(1, 0, 0, 0, 0, -1), (0, 0, 0, 1, -1, 0)]}
    out = []
    ok = True
    for pair, normals in direct.items():
        p = polytope_lab.intersect_projectors(pair)
        q = boundaries.subspace_projector(normals)
        diff = float(np.abs(p - q).max())
        dim = polytope_lab.projector_dimension(p)
        ok &= dim == 4 and diff <= 1e-9
        out.append(f"{pair}: dim {dim}, diff {diff:.1e}")
    return ok, "; ".join(out)


CHECKS = {1: check_catalog_count, 2: check_population_structure, 3: check_matrix_fidelity,
          4: check_one_d, 5: check_reduction_oracle, 6: check_character_round_trip,
          7: check_projector_laws, 8: check_flat_substitution}


def _run(n):
    ok, detail = CHECKS[n]()
    RESULTS[n] = (ok, detail)
    return ok, detail


def line(n):
    ok, detail = RESULTS[n]
    return f"criterion {n} {'PASS' if ok else 'FAIL'}: {TITLES[n]} ({detail})"


@pytest.mark.slow
def test_criterion_1_catalog_count():
    ok, detail = _run(1)
    assert ok, detail


@pytest.mark.slow
def test_criterion_2_population_structure():
    ok, detail = _run(2)
    assert ok, detail


def test_criterion_3_matrix_fidelity():
    ok, detail = _run(3)
    assert ok, detail


def test_criterion_4_one_d_catalog():
    ok, detail = _run(4)
    assert ok, detail


@pytest.mark.slow
def test_criterion_5_reduction_oracle():
    ok, detail = _run(5)
    assert ok, detail


def test_criterion_6_character_round_trip():
    ok, detail = _run(6)
    assert ok, detail


def test_criterion_7_projector_laws():
    ok, detail = _run(7)
    assert ok, detail


def test_criterion_8_flat_substitution():
    ok, detail = _run(8)
    assert ok, detail


if __name__ == "__main__":
    wanted = [int(a) for a in sys.argv[1:]] or sorted(CHECKS)
    failed = 0
    for n in wanted:
        _run(n)
        print(line(n), flush=True)
        failed += not RESULTS[n][0]
    sys.exit(1 if failed else 0)
