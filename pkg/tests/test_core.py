"""Data container, objective evaluation, and the small report helpers."""

import numpy as np
import pytest

from l1line import (
    ContractError,
    DataMatrix,
    LineFit,
    discordance,
    evaluate_objective,
    l0_count,
    reconstruct,
)

from conftest import FIVE_POINTS, raw_objective


def test_matrix_shape_and_accessors(five):
    assert five.n == 5
    assert five.m == 4
    assert np.array_equal(five.column(2), FIVE_POINTS[:, 2])
    assert five.usable_columns() == [0, 1, 2, 3]


def test_matrix_rejects_bad_input():
    with pytest.raises(ContractError):
        DataMatrix(np.zeros((0, 3)))
    with pytest.raises(ContractError):
        DataMatrix(np.ones((4,)))
    with pytest.raises(ContractError):
        DataMatrix(np.ones((3, 1)))
    with pytest.raises(ContractError):
        DataMatrix(np.array([[1.0, np.nan], [0.0, 1.0]]))
    with pytest.raises(ContractError):
        DataMatrix(np.array([[1.0, np.inf], [0.0, 1.0]]))


def test_usable_columns_skips_all_zero_columns():
    d = DataMatrix(np.array([[0.0, 1.0, 0.0], [0.0, 2.0, 3.0]]))
    assert d.usable_columns() == [1, 2]


def test_objective_matches_direct_summation(five):
    v = np.array([-2.0 / 3.0, 1.0 / 3.0, -0.5, 1.0])
    alpha = FIVE_POINTS[:, 3]
    for lam in (0.0, 1.0, 2.5):
        got = evaluate_objective(five, v, alpha, lam)
        assert got == pytest.approx(raw_objective(FIVE_POINTS, v, alpha, lam), abs=1e-12)


def test_objective_hand_value(five):
    # preserved column 4, lam 0: residuals add up to 34.5 exactly
    v = np.array([-2.0 / 3.0, 1.0 / 3.0, -0.5, 1.0])
    assert evaluate_objective(five, v, FIVE_POINTS[:, 3], 0.0) == pytest.approx(34.5, abs=1e-12)


def test_objective_rejects_negative_penalty(five):
    with pytest.raises(ContractError):
        evaluate_objective(five, np.ones(4), np.ones(5), -0.5)


def test_reconstruct_rank_one(five):
    fit = LineFit(
        v=np.array([1.0, 0.0, 0.0, 0.0]),
        preserved=0,
        alpha=FIVE_POINTS[:, 0].copy(),
        z=41.0,
    )
    rec = reconstruct(five, fit)
    assert rec.x.shape == (5, 4)
    assert np.array_equal(rec.x[:, 0], FIVE_POINTS[:, 0])
    assert np.all(rec.x[:, 1:] == 0.0)


def test_discordance_is_one_minus_abs_cosine():
    v = np.array([1.0, 0.0])
    assert discordance(v, np.array([1.0, 0.0])) == pytest.approx(0.0, abs=1e-15)
    assert discordance(v, np.array([-1.0, 0.0])) == pytest.approx(0.0, abs=1e-15)
    assert discordance(v, np.array([0.0, 1.0])) == pytest.approx(1.0, abs=1e-15)
    # scale of either argument must not matter
    assert discordance(3.0 * v, np.array([5.0, 5.0])) == pytest.approx(
        1.0 - 1.0 / np.sqrt(2.0), abs=1e-12
    )


def test_discordance_rejects_zero_vector():
    with pytest.raises(ContractError):
        discordance(np.zeros(3), np.ones(3))


def test_l0_count_uses_tolerance():
    v = np.array([1.0, 1e-13, -2.0, 0.0])
    assert l0_count(v) == 2
    assert l0_count(v, tol=1e-14) == 3
