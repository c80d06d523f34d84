import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from g6niggli.errors import InvalidCellError, NonConvergenceError
from g6niggli.g6_core import CellParams, cell_to_g6, g6_matrix_from_basis, metric_determinant
from g6niggli.montecarlo import random_cells
from g6niggli.reduction import (CONDITIONS, MINUS, PLUS, brute_force_reduce, is_niggli_reduced,
                                niggli_reduce, reduce_many, unimodular_bases)


def test_reduced_example():
    r = is_niggli_reduced((1, 2, 3, -0.5, -0.3, -0.2))
    assert r.satisfied and r.branch == MINUS and r.failed_conditions == []


def test_order_violation_named():
    r = is_niggli_reduced((2, 1, 3, 0, 0, 0))
    assert not r.satisfied
    assert "g1 <= g2" in r.failed_conditions


def test_fcc_reduced():
    r = is_niggli_reduced((1, 1, 1, 1, 1, 1))
    assert r.satisfied and r.branch == PLUS


def test_condition_count():
    assert len(CONDITIONS) == 17


def test_already_reduced_is_fixed():
    r = niggli_reduce((1, 2, 3, -0.5, -0.3, -0.2))
    assert np.allclose(r.reduced, (1, 2, 3, -0.5, -0.3, -0.2))
    assert (r.basis_transform == np.eye(3)).all()


def test_swap():
    r = niggli_reduce((2, 1, 3, 0, 0, 0))
    assert np.allclose(r.reduced, (1, 2, 3, 0, 0, 0))
    assert r.steps[0].startswith("N1")


def test_invalid_input():
    with pytest.raises(InvalidCellError):
        niggli_reduce((1, 1, 1, 3, 0, 0))


def test_iteration_cap():
    with pytest.raises(NonConvergenceError) as info:
        skew = g6_matrix_from_basis(np.array([[1, 0, 0], [30, 1, 0], [7, 40, 1]]))
        niggli_reduce(skew @ np.array([1.0, 2.0, 3.0, 0.1, 0.2, 0.3]), max_iter=2)
    assert len(info.value.last_steps) <= 3


def test_brute_force_examples():
    assert np.allclose(brute_force_reduce((4, 9, 16, 0, 0, 0)), (4, 9, 16, 0, 0, 0))
    assert np.allclose(brute_force_reduce((1, 2, 3, -0.5, -0.3, -0.2)), (1, 2, 3, -0.5, -0.3, -0.2))


def test_unimodular_bases():
    u = unimodular_bases(1)
    assert all(round(np.linalg.det(m)) == 1 for m in u[::97])
    assert np.abs(u).max() == 1


def _cells(n, seed):
    g, _ = random_cells(np.random.default_rng(seed), 2 * n, (1, 30))
    return g[:n]


def test_transform_consistency_and_volume():
    for g in _cells(300, 1):
        r = niggli_reduce(g)
        assert is_niggli_reduced(r.reduced).satisfied
        assert (r.g6_transform == g6_matrix_from_basis(r.basis_transform)).all()
        assert np.allclose(r.g6_transform @ g, r.reduced, rtol=0, atol=1e-9 * np.abs(g).max())
        assert metric_determinant(r.reduced) == pytest.approx(metric_determinant(g), rel=1e-9)


def test_idempotence():
    red, _, st = reduce_many(_cells(10000, 2))
    again, ms, st2 = reduce_many(red)
    assert (st == 0).all() and (st2 == 0).all()
    assert np.allclose(again, red, rtol=1e-12, atol=0)


def test_oracle_agrees_where_applicable():
    checked = 0
    for g in _cells(200, 3):
        r = niggli_reduce(g)
        if np.abs(r.basis_transform).max() > 2:
            continue
        b = brute_force_reduce(g)
        assert np.max(np.abs(b - r.reduced)) <= 1e-9 * np.abs(r.reduced).max()
        checked += 1
    assert checked > 50


@settings(max_examples=100, deadline=None)
@given(st.tuples(st.floats(1, 20), st.floats(1, 20), st.floats(1, 20),
                 st.floats(50, 130), st.floats(50, 130), st.floats(50, 130)))
def test_reduction_output_is_reduced(cell):
    try:
        g = cell_to_g6(CellParams(*cell))
    except InvalidCellError:
        return
    r = niggli_reduce(g)
    assert is_niggli_reduced(r.reduced).satisfied


@settings(max_examples=60, deadline=None)
@given(st.integers(0, len(unimodular_bases(2)) - 1))
def test_uniqueness_under_disguise(i):
    g = np.array([4.0, 5.0, 7.0, -1.2, -0.9, -2.1])
    base = niggli_reduce(g).reduced
    h = g6_matrix_from_basis(unimodular_bases(2)[i]) @ g
    assert np.allclose(niggli_reduce(h).reduced, base, rtol=0, atol=1e-9 * 7)
