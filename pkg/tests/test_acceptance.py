"""Acceptance suite: one test per criterion, each printing a pass line.

Monte-Carlo criteria run at the settings fixed below; every tolerance is
pinned here, none is tuned at runtime.
"""

import time
from pathlib import Path

import numpy as np

from qsd.certificates import gradient_profile
from qsd.chains import (
    FiniteAbsorbedChain,
    check_condition_A_prime,
    fit_two_sided,
    survival_ratio,
    verify_theorem_2_1,
)
from qsd.cli import main as cli_main
from qsd.measures import tv_distance
from qsd.models import brownian_interval
from qsd.particles import conditioned_law_series, fleming_viot_run, lambda0_estimate
from qsd.scale1d import escape_bounds_check, expected_exit_time, green_constants, lemma32_verify

from oracles import (
    exit_time_quad,
    fd_dirichlet,
    green_constant_quad,
    ground_profile_hist,
    random_positive_chain,
)

PI = np.pi
ROOT = Path(__file__).resolve().parent.parent

CHAIN_SUITE_SEED = 20260808
N_CHAINS = 100


def chain_suite():
    rng = np.random.default_rng(CHAIN_SUITE_SEED)
    return [FiniteAbsorbedChain(random_positive_chain(rng, 5, 0.9)) for _ in range(N_CHAINS)]


def report(name: str, ok: bool, detail: str):
    print(f"ACCEPTANCE {name}: {'PASS' if ok else 'FAIL'} - {detail}")
    assert ok, detail


def test_criterion_1_theorem_2_1_exact_suite():
    t_start = time.monotonic()
    violations = 0
    for k, chain in enumerate(chain_suite()):
        cert = fit_two_sided(chain, 1)
        rep = verify_theorem_2_1(chain, cert, n_pairs=10, t_max=50, seed=k, tol=1e-10)
        violations += rep.n_failed
    elapsed = time.monotonic() - t_start
    report(
        "1 theorem-2.1 exact suite",
        violations == 0 and elapsed < 10.0,
        f"{N_CHAINS} chains, {violations} violations, {elapsed:.2f}s (< 10 s)",
    )


def test_criterion_2_condition_a_prime_exact_suite():
    violations = 0
    for chain in chain_suite():
        res = check_condition_A_prime(chain, np.arange(5), 1, horizon=100, tol=1e-10)
        violations += res.report.n_failed
    report(
        "2 condition (A') exact suite",
        violations == 0,
        f"{N_CHAINS} chains, K=E, t1=1, TV <= 2(1-c1'c2')^floor(t/4) for t <= 100, {violations} violations",
    )


def test_criterion_3_pair_contraction_improvement():
    rng = np.random.default_rng(CHAIN_SUITE_SEED + 1)
    worst_margin = np.inf
    for chain in chain_suite():
        cert = fit_two_sided(chain, 1)
        c1c2 = cert.c1 * cert.c2
        for _ in range(3):
            p1 = rng.exponential(size=5)
            p1 /= p1.sum()
            p2 = rng.exponential(size=5)
            p2 /= p2.sum()
            c_1 = survival_ratio(chain, p1, 120).c
            c_2 = survival_ratio(chain, p2, 120).c
            base = tv_distance(p1, p2) / max(c_1, c_2)
            d1, d2 = p1, p2
            for t in range(0, 61):
                lhs = tv_distance(d1, d2)
                worst_margin = min(worst_margin, (1 - c1c2) ** t * base - lhs)
                d1 = d1 @ chain.kernel
                d1 /= d1.sum()
                d2 = d2 @ chain.kernel
                d2 /= d2.sum()
    holds = worst_margin >= -1e-10

    # non-vacuity: heterogeneous row sums split the survival profiles, so
    # max beats min strictly on at least one generated instance
    strict = False
    for trial in range(20):
        q = rng.uniform(size=(5, 5))
        q *= rng.uniform(0.4, 0.95, size=(5, 1)) / q.sum(axis=1, keepdims=True)
        het = FiniteAbsorbedChain(q)
        p1 = rng.exponential(size=5)
        p1 /= p1.sum()
        p2 = rng.exponential(size=5)
        p2 /= p2.sum()
        c_1 = survival_ratio(het, p1, 200).c
        c_2 = survival_ratio(het, p2, 200).c
        if max(c_1, c_2) > min(c_1, c_2) + 1e-9:
            strict = True
            break
    report(
        "3 pair-contraction improvement",
        holds and strict,
        f"max-denominator contraction margin {worst_margin:.3e} >= -1e-10; strict max>min instance found: {strict}",
    )


def test_criterion_4_bm_pi_qsd_estimators():
    t_start = time.monotonic()
    model = brownian_interval(0.0, PI)

    # oracle: 1024-point finite-difference Dirichlet eigensolver
    _, vals, _, _ = fd_dirichlet(0.0, PI, 1024, 2)
    lam0_oracle = float(vals[0])
    sin64 = ground_profile_hist(0.0, PI, 64)
    sin32 = ground_profile_hist(0.0, PI, 32)

    fv = fleming_viot_run(model, 10_000, 10.0, 64, 1001, dt=1e-4, burn_in=5.0)
    tv_fv = tv_distance(fv.occupation.weights, sin64)

    times = [0.5 * k for k in range(1, 11)]
    hists, survs = conditioned_law_series(
        model, [PI / 2], times, 100_000, 32, 1002, dt=1e-3
    )
    tv_rej = tv_distance(hists[-1].weights, sin32)

    lam_rej = lambda0_estimate(np.array(times), survs, window=(1.0, 5.0)).lambda0
    lam_fv = fv.mean_rebirth_rate(5.0, 10.0)
    elapsed = time.monotonic() - t_start

    ok = (
        tv_fv <= 0.05
        and tv_rej <= 0.05
        and abs(lam_rej - lam0_oracle) <= 0.1 * lam0_oracle
        and abs(lam_fv - lam0_oracle) <= 0.1 * lam0_oracle
        and elapsed < 300.0
    )
    report(
        "4 BM(0,pi) QSD estimators",
        ok,
        f"FV TV={tv_fv:.4f} (<=0.05), rejection TV={tv_rej:.4f} (<=0.05), "
        f"lambda0 rej={lam_rej:.4f} fv={lam_fv:.4f} (oracle {lam0_oracle:.4f} +-10%), "
        f"{elapsed:.0f}s (< 300 s)",
    )


def test_criterion_5_decay_rate_shape():
    model = brownian_interval(0.0, PI)
    _, vals, _, _ = fd_dirichlet(0.0, PI, 1024, 2)
    gap_oracle = float(vals[1] - vals[0])

    times = np.arange(0.5, 3.01, 0.25)
    n = 500_000
    hx, _ = conditioned_law_series(model, [PI / 4], times, n, 16, 2001, dt=1e-3)
    hy, _ = conditioned_law_series(model, [3 * PI / 4], times, n, 16, 2002, dt=1e-3)
    tvs = np.array([tv_distance(a, b) for a, b in zip(hx, hy)])
    A = np.vstack([times, np.ones_like(times)]).T
    slope, _ = np.linalg.lstsq(A, -np.log(tvs), rcond=None)[0]
    ok = abs(slope - gap_oracle) <= 0.25 * gap_oracle
    report(
        "5 decay-rate shape",
        ok,
        f"fitted rate {slope:.4f} within 25% of oracle gap {gap_oracle:.4f}; TV(0.5)={tvs[0]:.3f} TV(3)={tvs[-1]:.4f}",
    )


def test_criterion_6_gradient_estimate_shape():
    model = brownian_interval(0.0, 1.0)
    pts = np.array([[0.005], [0.01], [0.02], [0.05], [0.1], [0.3], [0.5]])
    small = gradient_profile(
        model,
        [1e-3, 1e-2, 1e-1],
        pts,
        100_000,
        3001,
        dts=[1e-5, 1e-4, 1e-3],
        shape_factor=2.0,
    )
    shaped = small.lipschitz * np.sqrt(small.times)
    spread_small = shaped.max() / shaped.min()

    pts_late = np.array([[0.05], [0.1], [0.2], [0.3], [0.4], [0.5]])
    late = gradient_profile(
        model,
        [1.0, 2.0, 4.0],
        pts_late,
        20_000,
        3002,
        dts=[1e-3, 1e-3, 1e-3],
        windows=[0.5, 0.5, 0.5],
        shape_factor=2.0,
    )
    ratios = late.lipschitz / late.max_survival
    spread_late = ratios.max() / ratios.min()
    ok = small.report.passed and late.report.passed and spread_small <= 2.0 and spread_late <= 2.0
    report(
        "6 gradient-estimate shape",
        ok,
        f"L*sqrt(t) spread {spread_small:.3f} (<=2) over {{1e-3,1e-2,1e-1}}; "
        f"L/max-survival spread {spread_late:.3f} (<=2) over {{1,2,4}}",
    )


def test_criterion_7_lemma_3_2_bound():
    model = brownian_interval(0.0, 1.0)
    xs = [round(0.01 * k, 2) for k in range(1, 11)]
    rep = lemma32_verify(model, xs, 100_000, 4001, eps=0.25, t1=0.1, dt=2e-4)
    lower = next(c for c in rep.checks if c.name == "min-ratio-lower-ci").measured
    report(
        "7 lemma-3.2 boundary return",
        rep.passed and lower > 0,
        f"min_x lower-CI of P_x(T_eps <= t1 < tau)/rho(x) = {lower:.3f} > 0 at N=1e5",
    )


def test_criterion_8_scale_speed_exactness():
    rng = np.random.default_rng(5001)
    worst_green = 0.0
    for _ in range(20):
        a = float(rng.uniform(0.05, 2.0))
        eps1 = float(rng.uniform(0.2, 2.0))
        worst_green = max(worst_green, abs(green_constants(a, eps1)[0] - green_constant_quad(a, eps1)))
    worst_exit = 0.0
    for _ in range(20):
        a = float(rng.uniform(0.05, 2.0))
        L = float(rng.uniform(0.3, 2.0))
        u = float(rng.uniform(0.01, 0.99)) * L
        worst_exit = max(worst_exit, abs(expected_exit_time(a, u, L) - exit_time_quad(a, u, L)))
    worst_bm = 0.0
    for _ in range(20):
        L = float(rng.uniform(0.3, 2.0))
        u = float(rng.uniform(0.0, 1.0)) * L
        worst_bm = max(worst_bm, abs(expected_exit_time(0.0, u, L) - u * (L - u)))
    esc = escape_bounds_check(0.5, 1.0, [0.1, 0.2, 0.3, 0.4], 50_000, 5002, dt=1e-4)
    ok = worst_green <= 1e-12 and worst_exit <= 1e-12 and worst_bm <= 1e-12 and esc.passed
    report(
        "8 scale/speed exactness",
        ok,
        f"green |err|={worst_green:.2e} exit |err|={worst_exit:.2e} bm-identity |err|={worst_bm:.2e} (<=1e-12); "
        f"escape/tail bounds within 3 SE: {esc.passed}",
    )


def test_criterion_9_reproducibility(tmp_path):
    runs = [
        ("finite-verify", ROOT / "configs" / "finite_verify_sym2.cfg",
         ("report.csv", "certificate.csv", "spectral.csv")),
        ("fleming-viot", ROOT / "configs" / "fleming_viot_bm_pi.cfg",
         ("report.csv", "occupation.csv", "final.csv", "rebirth_series.csv")),
        ("scale1d", ROOT / "configs" / "scale1d.cfg",
         ("report.csv", "green.csv", "exit_time.csv")),
        ("simulate", ROOT / "configs" / "simulate_bm.cfg",
         ("report.csv", "survival_series.csv", "path.csv")),
    ]
    all_same = True
    for kind, cfg, artifacts in runs:
        d1 = tmp_path / f"{kind}-1"
        d2 = tmp_path / f"{kind}-2"
        assert cli_main([kind, "--config", str(cfg), "--out", str(d1)]) == 0
        assert cli_main([kind, "--config", str(cfg), "--out", str(d2)]) == 0
        for name in artifacts:
            if (d1 / name).read_bytes() != (d2 / name).read_bytes():
                all_same = False
    report(
        "9 reproducibility",
        all_same,
        f"{len(runs)} experiment kinds rerun with fixed seeds produce byte-identical CSVs",
    )
