import math
from dataclasses import replace

import numpy as np
import pytest

from mimorelay import montecarlo
from mimorelay.channel import ChannelSet, Dimensions, variance_profile
from mimorelay.errors import DiscardBudgetExceeded
from mimorelay.montecarlo import (ExperimentConfig, PointConfig, default_workers,
                                  evaluate_realization, run_point, run_sweep)
from mimorelay.schemes import PowerBudget, SchemeId

from oracles import draw_reference, proposed_design_direct, scalar_rates

SMALL = PointConfig(dims=Dimensions.square(2), realizations=40, master_seed=3)


def test_single_realization():
    res = run_point(replace(SMALL, realizations=1))
    sample = evaluate_realization(SMALL, 0)
    for i, scheme in enumerate(SMALL.schemes):
        st = res.stats[scheme]
        assert st.mean_sum_exact == sample[i, 0] and st.mean_sum_lower == sample[i, 1]
        assert st.stderr_exact == 0 and st.stderr_lower == 0


def test_run_point_is_deterministic():
    a, b = run_point(SMALL), run_point(SMALL)
    assert np.array_equal(a.samples, b.samples)
    assert a.stats == b.stats


def test_worker_count_invariance():
    serial = run_point(SMALL, workers=1)
    parallel = run_point(SMALL, workers=3)
    assert np.array_equal(serial.samples, parallel.samples)
    assert serial.stats == parallel.stats


def test_default_workers_env(monkeypatch):
    monkeypatch.delenv(montecarlo.WORKERS_ENV, raising=False)
    assert default_workers() == 1
    monkeypatch.setenv(montecarlo.WORKERS_ENV, '3')
    assert default_workers() == 3
    monkeypatch.setenv(montecarlo.WORKERS_ENV, 'zero')
    with pytest.raises(ValueError):
        default_workers()


def test_stats_definitions():
    res = run_point(SMALL)
    for i, scheme in enumerate(SMALL.schemes):
        x = res.samples[:, i, 0]
        y = res.samples[:, i, 1]
        st = res.stats[scheme]
        assert st.mean_sum_exact == pytest.approx(x.mean(), rel=1e-15)
        assert st.stderr_exact == pytest.approx(x.std(ddof=1) / math.sqrt(len(x)), rel=1e-12)
        assert st.stderr_lower == pytest.approx(y.std(ddof=1) / math.sqrt(len(y)), rel=1e-12)
        assert st.mean_gap == pytest.approx(np.mean(x - y), rel=1e-12, abs=1e-15)
        assert st.bound_violation_fraction == np.mean(y > x + 1e-9)
        assert st.realizations == 40 and st.discards == 0


def test_paired_comparison(monkeypatch):
    seen = []
    real = montecarlo.build_design

    def spy(scheme, ch, budget, options):
        seen.append((scheme, ch.digest()))
        return real(scheme, ch, budget, options)

    monkeypatch.setattr(montecarlo, 'build_design', spy)
    pt = replace(SMALL, realizations=6)
    run_point(pt)
    n_s = len(pt.schemes)
    assert len(seen) == 6 * n_s
    digests = set()
    for i in range(6):
        group = seen[i * n_s:(i + 1) * n_s]
        assert [s for s, _ in group] == list(pt.schemes)
        assert len({d for _, d in group}) == 1
        digests.add(group[0][1])
    assert len(digests) == 6


def _degenerate_at(monkeypatch, bad_indices):
    """Zero out G for selected realization indices (singular G P for the proposed scheme)."""
    real = montecarlo.draw_channels
    used = []

    def fake(dims, geometry, noise_var, seed):
        used.append(seed.realization_index)
        ch = real(dims, geometry, noise_var, seed)
        if seed.realization_index in bad_indices:
            return ChannelSet(ch.h1, np.zeros_like(ch.g), ch.h2, ch.noise_var)
        return ch

    monkeypatch.setattr(montecarlo, 'draw_channels', fake)
    return used


def test_discard_and_redraw(monkeypatch):
    pt = replace(SMALL, realizations=2000)
    used = _degenerate_at(monkeypatch, {5, 2000})
    res = run_point(pt)
    # index 5 fails, aux 2000 fails too, aux 2001 replaces it
    assert res.discards == 2
    assert used[-2:] == [2000, 2001]
    expected = evaluate_realization(pt, 2001)
    np.testing.assert_array_equal(res.samples[5], expected)
    assert all(st.discards == 2 for st in res.stats.values())


def test_discard_budget(monkeypatch):
    _degenerate_at(monkeypatch, {1, 2, 3})
    with pytest.raises(DiscardBudgetExceeded, match='degenerate'):
        run_point(replace(SMALL, realizations=2000))
    with pytest.raises(DiscardBudgetExceeded):
        run_point(replace(SMALL, realizations=100))


def test_stderr_scales_with_sqrt_n():
    pt = PointConfig(schemes=(SchemeId.PROPOSED_RZF_ZFRZF,), realizations=500, master_seed=17)
    se_small = run_point(pt).stats[SchemeId.PROPOSED_RZF_ZFRZF].stderr_exact
    se_big = run_point(replace(pt, realizations=2000)).stats[SchemeId.PROPOSED_RZF_ZFRZF].stderr_exact
    assert 0.8 * 0.5 <= se_big / se_small <= 1.2 * 0.5


def test_mean_matches_independent_reimplementation():
    """Package pipeline vs. a script using numpy's own sampler and explicit inverses."""
    pt = PointConfig(schemes=(SchemeId.PROPOSED_RZF_ZFRZF,), realizations=2000, master_seed=99)
    ours = run_point(pt).stats[SchemeId.PROPOSED_RZF_ZFRZF]
    rng = np.random.default_rng(12345)
    sig = variance_profile(pt.geometry)
    vals = []
    for _ in range(2000):
        h1, g, h2 = draw_reference(rng, 4, sig)
        p, f, f_t, rho_s, rho_r = proposed_design_direct(h1, g, h2, 1.0, pt.budget.p_s, pt.budget.p_r)
        vals.append(sum(r[2] for r in scalar_rates(h1, h2, p, f, f_t, rho_s, rho_r, 1.0)))
    vals = np.array(vals)
    ref_mean = vals.mean()
    ref_se = vals.std(ddof=1) / math.sqrt(len(vals))
    assert abs(ours.mean_sum_exact - ref_mean) <= 2 * math.hypot(ours.stderr_exact, ref_se)


def test_experiment_config_validation():
    with pytest.raises(ValueError):
        ExperimentConfig(sweep_axis='power', sweep_values=())
    with pytest.raises(ValueError):
        ExperimentConfig(sweep_axis='power', sweep_values=(10.0, 10.0))
    with pytest.raises(ValueError):
        ExperimentConfig(sweep_axis='rs_position', sweep_values=(0.0, 0.5))
    with pytest.raises(ValueError):
        ExperimentConfig(sweep_axis='users', sweep_values=(2.5,))
    with pytest.raises(ValueError):
        ExperimentConfig(sweep_axis='speed', sweep_values=(1.0,))
    with pytest.raises(ValueError):
        PointConfig(realizations=0)


def test_sweep_points_apply_axis():
    cfg = ExperimentConfig(sweep_axis='power', sweep_values=(10.0, 20.0))
    (_, a), (_, b) = cfg.points()
    assert a.budget == PowerBudget.from_db(10, 10) and b.budget == PowerBudget.from_db(20, 20)
    cfg = ExperimentConfig(sweep_axis='users', sweep_values=(2, 3))
    assert [pt.dims.k for _, pt in cfg.points()] == [2, 3]
    cfg = ExperimentConfig(sweep_axis='rs_position', sweep_values=(0.1, 0.9))
    assert [pt.geometry.rs_pos for _, pt in cfg.points()] == [0.1, 0.9]


def test_single_point_sweep_equals_run_point():
    cfg = ExperimentConfig(dims=Dimensions.square(2), realizations=20, sweep_axis='rs_position',
                           sweep_values=(0.3,))
    sweep = run_sweep(cfg)
    direct = run_point(cfg.points()[0][1])
    assert sweep.points[0][1].stats == direct.stats
    assert sweep.get(0.3, 'proposed') == direct.stats[SchemeId.PROPOSED_RZF_ZFRZF]


def test_disjoint_sweeps_concatenate():
    base = dict(dims=Dimensions.square(2), realizations=15, sweep_axis='rs_position')
    left = run_sweep(ExperimentConfig(sweep_values=(0.2, 0.4), **base))
    right = run_sweep(ExperimentConfig(sweep_values=(0.6,), **base))
    both = run_sweep(ExperimentConfig(sweep_values=(0.2, 0.4, 0.6), **base))
    assert [(v, r.stats) for v, r in left.points + right.points] == \
        [(v, r.stats) for v, r in both.points]


def test_power_sweep_reuses_draws_position_sweep_does_not(monkeypatch):
    seen = []
    real = montecarlo.draw_channels

    def spy(*args):
        ch = real(*args)
        seen.append(ch.digest())
        return ch

    monkeypatch.setattr(montecarlo, 'draw_channels', spy)
    base = dict(dims=Dimensions.square(2), realizations=3, schemes=(SchemeId.SVD_MF,))
    run_sweep(ExperimentConfig(sweep_axis='power', sweep_values=(10.0, 20.0), **base))
    assert seen[:3] == seen[3:]
    seen.clear()
    run_sweep(ExperimentConfig(sweep_axis='rs_position', sweep_values=(0.3, 0.6), **base))
    assert not set(seen[:3]) & set(seen[3:])
