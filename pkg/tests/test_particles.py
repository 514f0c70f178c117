import numpy as np
import pytest

from qsd.chains import FiniteAbsorbedChain, evolve_conditioned, qsd_spectral
from qsd.measures import coarsen_histogram, tv_distance
from qsd.models import ConstantIsotropic, DiffusionModel, LinearDrift, brownian_interval
from qsd.domains import Interval
from qsd.particles import (
    ExtinctionError,
    conditional_rejection,
    conditioned_law_series,
    fleming_viot_run,
    lambda0_estimate,
)
from qsd.simulate import ZeroSurvivorError

from oracles import ground_profile_hist

PI = np.pi


def test_rejection_one_step_concentrates_at_start():
    model = brownian_interval(0, PI)
    dt = 1e-3
    hist, surv = conditional_rejection(model, [PI / 2], dt, 2000, 64, 5, dt=dt)
    # one Euler step of size sqrt(dt): everything stays in the central bins
    centers = hist.support.centers()[:, 0]
    occupied = centers[hist.weights > 0]
    assert np.abs(occupied - PI / 2).max() < 0.2
    assert surv == 1.0


def test_rejection_reproducible_for_fixed_seed():
    model = brownian_interval(0, PI)
    h1, s1 = conditional_rejection(model, [1.0], 0.5, 2000, 32, 9, dt=1e-3)
    h2, s2 = conditional_rejection(model, [1.0], 0.5, 2000, 32, 9, dt=1e-3)
    assert np.array_equal(h1.weights, h2.weights)
    assert s1 == s2


def test_rejection_zero_survivors_raises():
    model = brownian_interval(0, 0.05)  # lambda0 ~ 1974: nothing survives t=1
    with pytest.raises(ZeroSurvivorError):
        conditional_rejection(model, [0.025], 1.0, 200, 8, 3, dt=1e-4)


def test_rejection_converges_to_sin_profile():
    model = brownian_interval(0, PI)
    hist, surv = conditional_rejection(model, [PI / 2], 3.0, 40_000, 32, 11, dt=1e-3)
    oracle = ground_profile_hist(0, PI, 32)
    assert tv_distance(hist.weights, oracle) < 0.08


def test_fv_frozen_drift_flow_never_rebirths():
    # zero diffusion, inward drift: particles follow the flow, no absorption
    model = DiffusionModel(
        domain=Interval(0.0, 1.0),
        drift=LinearDrift(-1.0, (0.5,)),
        diffusion=ConstantIsotropic(0.0),
        sigma_min2=0.0,
        sigma_max2=0.0,
        drift_bound=0.5,
    )
    init = np.array([[0.3], [0.8]])
    res = fleming_viot_run(model, 2, 1.0, 16, 21, dt=1e-2, init=init)
    assert res.total_rebirths == 0
    # the flow contracts toward 0.5
    assert np.abs(res.cloud.positions - 0.5).max() < np.abs(init - 0.5).max()


def test_fv_extinction_error():
    model = brownian_interval(0, 0.02)
    init = np.full((4, 1), 0.01)
    with pytest.raises(ExtinctionError):
        fleming_viot_run(model, 4, 1.0, 8, 2, dt=0.5, init=init)


def test_fv_occupation_close_to_sin_profile_small_run():
    model = brownian_interval(0, PI)
    res = fleming_viot_run(model, 2000, 4.0, 32, 31, dt=1e-3, burn_in=2.0)
    oracle = ground_profile_hist(0, PI, 32)
    assert tv_distance(res.occupation.weights, oracle) < 0.08
    fit = lambda0_estimate(res.rebirth_times, res.rebirth_rates, kind="rebirth", window=(2.0, 4.0))
    assert fit.lambda0 == pytest.approx(0.5, rel=0.2)


def test_fv_exchangeability_under_stream_permutation():
    # permuting the seed-indexed streams = running with another seed; the
    # binned occupation aggregate keeps the same distribution
    model = brownian_interval(0, PI)
    r1 = fleming_viot_run(model, 1500, 3.0, 16, 41, dt=2e-3, burn_in=1.5)
    r2 = fleming_viot_run(model, 1500, 3.0, 16, 42, dt=2e-3, burn_in=1.5)
    assert tv_distance(r1.occupation, r2.occupation) < 0.1


def test_rejection_and_fv_agree():
    model = brownian_interval(0, PI)
    hist, _ = conditional_rejection(model, [PI / 2], 3.0, 40_000, 16, 51, dt=1e-3)
    fv = fleming_viot_run(model, 2000, 4.0, 16, 52, dt=1e-3, burn_in=2.0)
    assert tv_distance(hist, fv.occupation) < 0.1


def test_conditioned_tv_decays_along_geometric_grid():
    model = brownian_interval(0, PI)
    times = [0.25, 0.5, 1.0, 2.0]
    hx, _ = conditioned_law_series(model, [PI / 4], times, 40_000, 16, 61, dt=1e-3)
    hy, _ = conditioned_law_series(model, [3 * PI / 4], times, 40_000, 16, 62, dt=1e-3)
    tvs = [tv_distance(a, b) for a, b in zip(hx, hy)]
    assert all(a > b for a, b in zip(tvs, tvs[1:]))


def test_lambda0_exact_exponential_series():
    t = np.linspace(0.1, 3.0, 10)
    fit = lambda0_estimate(t, np.exp(-0.5 * t))
    assert fit.lambda0 == pytest.approx(0.5, abs=1e-12)
    assert fit.r_squared == pytest.approx(1.0, abs=1e-12)


def test_lambda0_chain_survival_is_spectral_identity():
    chain = FiniteAbsorbedChain(np.array([[0.4, 0.2], [0.2, 0.4]]))
    spec = qsd_spectral(chain)
    ts = np.arange(1, 11, dtype=float)
    survs = np.array([evolve_conditioned(chain, spec.alpha, int(t))[1] for t in ts])
    fit = lambda0_estimate(ts, survs)
    assert fit.lambda0 == pytest.approx(spec.lambda0, abs=1e-12)
    assert fit.r_squared == pytest.approx(1.0, abs=1e-12)


def test_lambda0_rejects_bad_input():
    with pytest.raises(ValueError):
        lambda0_estimate(np.arange(5.0), np.array([1.0, 0.5, 0.0, 0.2, 0.1]))
    with pytest.raises(ValueError):
        lambda0_estimate(np.arange(3.0), np.exp(-np.arange(3.0)))


def test_lambda0_bm_unit_interval():
    model = brownian_interval(0, 1)
    times = np.linspace(0.1, 0.8, 8)
    hists, survs = conditioned_law_series(model, [0.5], times, 40_000, 8, 71, dt=5e-4)
    fit = lambda0_estimate(times, survs, window=(0.2, 0.8))
    oracle = PI**2 / 2
    assert fit.lambda0 == pytest.approx(oracle, rel=0.05)


def test_coarsened_rejection_histogram_nests():
    model = brownian_interval(0, PI)
    hist, _ = conditional_rejection(model, [1.0], 1.0, 20_000, 32, 81, dt=1e-3)
    coarse = coarsen_histogram(hist, 2)
    assert coarse.support.size == 16
    assert coarse.weights.sum() == pytest.approx(1.0)
