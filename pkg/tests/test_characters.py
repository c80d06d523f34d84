import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from g6niggli import characters as C
from g6niggli.errors import NotReducedError
from g6niggli.polytope_lab import intersect_projectors, pattern_key, projector_dimension
from g6niggli.reduction import niggli_reduce


def test_table_size_and_duplicates():
    t = C.character_table()
    assert len(t) == 42
    assert sorted(e.it_character for e in t) == sorted(set(range(1, 45)) - {31, 44})
    assert pattern_key(C.lookup(10)[0].subspace_pattern) == pattern_key(C.lookup(14)[0].subspace_pattern)
    assert pattern_key(C.lookup(20)[0].subspace_pattern) == pattern_key(C.lookup(25)[0].subspace_pattern)


def test_lookups():
    (e,) = C.lookup("44A")
    assert (e.it_character, e.bravais, e.subspace_pattern, e.generators) == \
        (3, "cP", "(r, r, r, 0, 0, 0)", "12345")
    (e,) = C.lookup("49B")
    assert (e.it_character, e.bravais, e.generators) == (9, "hR", "1679ACD")
    (e,) = C.lookup("57A")
    assert e.it_character == 43 and e.generator_expression == "FF′ = F̂"
    assert [x.it_character for x in C.lookup("45D")] == [6, 7]


@pytest.mark.parametrize("entry", C.character_table(), ids=lambda e: f"{e.roof_symbol}-{e.it_character}")
def test_generators_span_pattern(entry):
    from g6niggli.polytope_lab import span_projector
    assert np.abs(entry.projector - span_projector(entry.pattern_basis)).max() <= 1e-9
    assert projector_dimension(entry.projector) == entry.free_params


def test_dof_examples():
    assert C.lookup("44A")[0].free_params == 1
    assert C.lookup("45A")[0].free_params == 2
    assert C.lookup("50C")[0].free_params == 3
    assert C.lookup("53A")[0].free_params == 4


def test_hat_and_prime_forms_agree():
    assert np.abs(C.generator_projector("12F̂") - C.generator_projector("12FF′")).max() <= 1e-9
    assert np.abs(C.generator_projector("2ÂD") - C.generator_projector("2ADA'")).max() <= 1e-9
    assert np.abs(C.generator_projector("29C") - C.generator_projector("2AD")).max() <= 1e-9


@pytest.mark.parametrize("cid, g", [(3, (1, 1, 1, 0, 0, 0)), (1, (1,) * 6), (5, (3, 3, 3, -2, -2, -2))])
def test_zero_distance(cid, g):
    assert C.character_distance(C.lookup(cid)[0], g) <= 1e-12


def test_infeasible_is_inf():
    g = np.array([34.723, 36.883, 41.728, -21.374, -12.708, -1.897])
    e = C.lookup(29)[0]
    assert not C.in_closed_cone(e.projector @ g)
    assert C.character_distance(e, g) == float("inf")


def test_classify_examples():
    top = C.classify((1, 1, 1, 0, 0, 0)).ranked[0]
    assert top[0].it_character == 3 and top[1] == 0
    assert C.classify((1, 1, 2, 1, 1, 1)).ranked[0][0].it_character == 9
    generic = C.classify((1, 1.7, 2.9, -0.2, -0.4, -0.1))
    assert generic.matches == []
    assert all(d > 1e-6 * 2.9 for _, d in generic.ranked)


def test_classify_reports_both_duplicates():
    g = C.lookup(10)[0].build([1.0, 2.5, -0.3, -0.4])
    assert [e.it_character for e, _ in C.classify(g).matches] == [10, 14]


def test_classify_requires_reduced():
    with pytest.raises(NotReducedError) as info:
        C.classify((2, 1, 3, 0, 0, 0))
    assert "g1 <= g2" in str(info.value)


def test_ordering_invariant():
    c = C.classify((1, 1, 1.5, 0.3, 0.3, 0.2))
    lim = c.tol * c.scale
    flags = [d <= lim for _, d in c.ranked]
    assert flags == sorted(flags, reverse=True)
    rest = [d for _, d in c.ranked if d > lim]
    # ties closer than 1e-12 relative are ordered by specificity, not by float noise
    assert all(b >= a * (1 - 1e-12) for a, b in zip(rest, rest[1:]))


@settings(max_examples=40, deadline=None)
@given(st.floats(0.01, 1000))
def test_scaling_invariance(lam):
    g = np.array([1, 1, 1.5, 0.3, 0.3, 0.2])
    a = [e.index for e, _ in C.classify(g).ranked]
    b = [e.index for e, _ in C.classify(lam * g).ranked]
    assert a == b


def test_hosoya():
    assert C.hosoya_conditions((1,) * 6) == (True, True, True, True, True, False)
    assert C.hosoya_conditions((1, 1, 1, 0, 0, 0)) == (False, False, False, True, True, True)


def test_hosoya_four_is_case_one_prime():
    from g6niggli.boundaries import get_case
    assert tuple(get_case("1").primed_normals[0]) == C.HOSOYA[3][1]


def test_hr_projector_spot_check(data_dir):
    hr = json.loads((data_dir / "hr_presentations.json").read_text())["presentations"]
    P = C.lookup(9)[0].projector
    # presentations whose hyperplanes alone already cut out the 2-D subspace
    linear = [p for p in hr if projector_dimension(intersect_projectors(p)) == 2]
    assert len(linear) >= 10
    for p in linear[:: max(1, len(linear) // 10)][:10]:
        assert np.abs(intersect_projectors(p) - P).max() <= 1e-9


def test_round_trip_sample():
    rng = np.random.default_rng(0)
    e = C.lookup("49E")[0]
    for g in C.synthetic_samples(e, 20, rng):
        c = C.classify(niggli_reduce(g).reduced)
        assert any(x.index == e.index for x, _ in c.matches)
