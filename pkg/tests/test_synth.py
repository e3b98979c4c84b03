"""Synthetic draws, penalty summaries, and the simulation harness."""

import dataclasses

import numpy as np
import pytest

from l1line import (
    ContractError,
    DataMatrix,
    SimConfig,
    build_path,
    discordance,
    fit_line,
    generate,
    lambda_summaries,
    run_simulation,
    union_lambda_summaries,
)


def test_generate_shapes_and_unit_direction():
    data, v_true = generate(SimConfig(n=30, m=7, seed=1))
    assert data.x.shape == (30, 7)
    assert np.linalg.norm(v_true) == pytest.approx(1.0, abs=1e-12)


def test_generate_is_deterministic_per_seed():
    cfg = SimConfig(n=15, m=4, nc=3, mc=2, seed=9)
    a, va = generate(cfg)
    b, vb = generate(cfg)
    assert np.array_equal(a.x, b.x)
    assert np.array_equal(va, vb)
    c, _ = generate(dataclasses.replace(cfg, seed=10))
    assert not np.array_equal(a.x, c.x)


def test_contamination_touches_exactly_the_configured_cells():
    clean_cfg = SimConfig(n=25, m=6, seed=3)
    dirty_cfg = SimConfig(n=25, m=6, nc=5, mc=2, seed=3)
    clean, v_clean = generate(clean_cfg)
    dirty, v_dirty = generate(dirty_cfg)
    # the model draw is independent of the contamination stream
    assert np.array_equal(v_clean, v_dirty)
    diff = clean.x != dirty.x
    touched_rows = np.flatnonzero(diff.any(axis=1))
    assert touched_rows.shape[0] == 5
    assert np.all(diff[touched_rows].sum(axis=1) == 2)
    mags = np.abs(dirty.x[diff])
    scale = dirty_cfg.outlier_scale
    assert np.all(mags >= scale / 2.0) and np.all(mags <= scale)


def test_outlier_scale_defaults_to_fifty_noise_scales():
    assert SimConfig(n=5, m=3, noise_scale=0.2).outlier_scale == pytest.approx(10.0)


def test_config_validation():
    with pytest.raises(ContractError):
        SimConfig(n=0, m=3)
    with pytest.raises(ContractError):
        SimConfig(n=5, m=1)
    with pytest.raises(ContractError):
        SimConfig(n=5, m=3, nc=6)
    with pytest.raises(ContractError):
        SimConfig(n=5, m=3, mc=4)
    with pytest.raises(ContractError):
        SimConfig(n=5, m=3, noise_scale=0.0)


def test_vanishing_noise_recovers_the_planted_direction():
    data, v_true = generate(SimConfig(n=40, m=5, noise_scale=1e-12, seed=5))
    fit = fit_line(data, 0.0)
    assert discordance(fit.v, v_true) == pytest.approx(0.0, abs=1e-6)


def test_breakpoint_summaries_of_the_reference_path(five):
    s = lambda_summaries(build_path(five))
    assert not s.degenerate
    assert s.lambda_min == pytest.approx(3.0, abs=1e-9)
    assert s.lambda_avg == pytest.approx(17.5 / 3.0, abs=1e-9)
    assert s.lambda_max == pytest.approx(11.0, abs=1e-9)


def test_union_summaries_count_every_span_endpoint(five):
    s = union_lambda_summaries(five)
    assert not s.degenerate
    assert s.lambda_min == pytest.approx(1.0, abs=1e-12)
    assert s.lambda_avg == pytest.approx(54.0 / 13.0, abs=1e-9)
    assert s.lambda_max == pytest.approx(11.0, abs=1e-12)


def test_degenerate_summary_when_nothing_ever_changes():
    p = build_path(DataMatrix(np.zeros((2, 2))))
    s = lambda_summaries(p)
    assert s.degenerate
    assert (s.lambda_min, s.lambda_avg, s.lambda_max) == (0.0, 0.0, 0.0)


def test_simulation_report_frozen_smoke():
    report = run_simulation(SimConfig(n=40, m=6, nc=4, mc=2, seed=7), reps=2)
    assert report.reps == 2
    labels = [row.label for row in report.rows]
    assert labels == ["l2-baseline", "lambda=0", "lambda=min", "lambda=avg", "lambda=max"]
    by = {row.label: row for row in report.rows}
    assert by["l2-baseline"].discordance_mean == pytest.approx(0.206329512788, abs=1e-9)
    assert by["lambda=0"].discordance_mean == pytest.approx(0.0560393979695, abs=1e-9)
    assert by["lambda=max"].l0_mean == 1.0
    assert report.lambda_stats["degenerate_reps"] == 0


def test_simulation_is_thread_invariant():
    cfg = SimConfig(n=25, m=5, nc=2, mc=1, seed=13)
    a = run_simulation(cfg, reps=3, threads=1)
    b = run_simulation(cfg, reps=3, threads=3)
    assert a.rows == b.rows
    assert a.lambda_stats == b.lambda_stats


def test_simulation_rejects_zero_reps():
    with pytest.raises(ContractError):
        run_simulation(SimConfig(n=10, m=3), reps=0)