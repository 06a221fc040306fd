"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

The Monte Carlo criteria (1, 2, 3, 10) pin AVE/MAD reference values with
factor-of-two bands at 500 replications under oracle-window initialization;
criteria 4 to 9 check asymptotic-theory properties.  Every criterion is
asserted exactly as pinned.
"""
import io
import time

import numpy as np
import pytest

from chirpfit import (
    ExperimentConfig,
    empirical_cf,
    gamma_inverse,
    gamma_matrix,
    hessian_limit_check,
    limiting_cf,
    preset_model,
    rate_check,
    run_experiment,
    sample_sas,
    scaling_d2,
    theoretical_cf,
    trig_limit_check,
)
from chirpfit.model import ChirpComponent
from chirpfit.noise import StableNoiseSpec

MASTER_SEED = 20260809
REPS = 500

XI1 = ChirpComponent(A=2.5, B=2.5, theta1=1.5, theta2=0.1)


def announce(num: int, clauses: dict) -> None:
    ok = all(clauses.values())
    detail = "; ".join(f"{name}={'ok' if good else 'FAIL'}" for name, good in clauses.items())
    print(f"[criterion {num}] {'PASS' if ok else 'FAIL'}: {detail}")


def within_factor2(value: float, reference: float) -> bool:
    return reference / 2.0 <= value <= reference * 2.0


@pytest.fixture(scope="module")
def crit1_run():
    cfg = ExperimentConfig(
        model=preset_model("model1"),
        alphas=(1.5,),
        sigmas=(0.1,),
        ns=(250,),
        replications=REPS,
        methods=("lse",),
        init_mode="window",
        master_seed=MASTER_SEED,
    )
    t0 = time.time()
    result = run_experiment(cfg)
    return cfg, result, time.time() - t0


@pytest.fixture(scope="module")
def crit9_run():
    cfg = ExperimentConfig(
        model=preset_model("model1"),
        alphas=(1.5,),
        sigmas=(0.1,),
        ns=(500,),
        replications=REPS,
        methods=("lse",),
        init_mode="window",
        master_seed=MASTER_SEED,
    )
    return cfg, run_experiment(cfg)


def test_criterion_1_single_chirp_lse_reference_cell(crit1_run):
    cfg, result, elapsed = crit1_run
    table = result.table
    ave1 = table.lookup("lse", 1.5, 0.1, 250, "theta1").ave
    mad1 = table.lookup("lse", 1.5, 0.1, 250, "theta1").mad
    mad2 = table.lookup("lse", 1.5, 0.1, 250, "theta2").mad
    clauses = {
        f"AVE(theta1)={ave1:.6f} in [1.4995, 1.5005]": 1.4995 <= ave1 <= 1.5005,
        f"MAD(theta1)={mad1:.4g} within 2x of 1.6988e-4": within_factor2(mad1, 1.6988e-4),
        f"MAD(theta2)={mad2:.4g} within 2x of 8.5680e-7": within_factor2(mad2, 8.5680e-7),
        f"runtime={elapsed:.1f}s < 120s": elapsed < 120.0,
    }
    announce(1, clauses)
    assert all(clauses.values()), clauses


def test_criterion_2_single_chirp_alse_reference_cell():
    cfg = ExperimentConfig(
        model=preset_model("model1"),
        alphas=(1.9,),
        sigmas=(1.0,),
        ns=(1000,),
        replications=REPS,
        methods=("alse",),
        init_mode="window",
        master_seed=MASTER_SEED,
    )
    t0 = time.time()
    table = run_experiment(cfg).table
    elapsed = time.time() - t0
    mad1 = table.lookup("alse", 1.9, 1.0, 1000, "theta1").mad
    mad2 = table.lookup("alse", 1.9, 1.0, 1000, "theta2").mad
    clauses = {
        f"MAD(theta1)={mad1:.4g} within 2x of 1.4178e-4": within_factor2(mad1, 1.4178e-4),
        f"MAD(theta2)={mad2:.4g} within 2x of 1.7226e-7": within_factor2(mad2, 1.7226e-7),
        f"runtime={elapsed:.1f}s < 600s": elapsed < 600.0,
    }
    announce(2, clauses)
    assert all(clauses.values()), clauses


def test_criterion_3_two_component_lse_reference_cell():
    cfg = ExperimentConfig(
        model=preset_model("model2"),
        alphas=(1.5,),
        sigmas=(0.1,),
        ns=(250,),
        replications=REPS,
        methods=("lse",),
        init_mode="window",
        master_seed=MASTER_SEED,
    )
    t0 = time.time()
    table = run_experiment(cfg).table
    elapsed = time.time() - t0
    mad11 = table.lookup("lse", 1.5, 0.1, 250, "theta1_1").mad
    mad21 = table.lookup("lse", 1.5, 0.1, 250, "theta1_2").mad
    clauses = {
        f"MAD(freq comp1)={mad11:.4g} within 2x of 3.8164e-5": within_factor2(mad11, 3.8164e-5),
        f"MAD(freq comp2)={mad21:.4g} within 2x of 6.9776e-5": within_factor2(mad21, 6.9776e-5),
        f"runtime={elapsed:.1f}s < 600s": elapsed < 600.0,
    }
    announce(3, clauses)
    assert all(clauses.values()), clauses


def test_criterion_4_rate_slopes():
    cfg = ExperimentConfig(
        model=preset_model("model1"),
        alphas=(1.9,),
        sigmas=(0.1,),
        ns=(250, 500, 1000),
        replications=REPS,
        methods=("lse",),
        init_mode="window",
        master_seed=MASTER_SEED,
    )
    table = run_experiment(cfg).table
    slope1 = rate_check(table, "theta1", "lse", 1.9, 0.1)
    slope2 = rate_check(table, "theta2", "lse", 1.9, 0.1)
    clauses = {
        f"slope(theta1)={slope1:.3f} in [-1.9, -1.1]": -1.9 <= slope1 <= -1.1,
        f"slope(theta2)={slope2:.3f} in [-2.9, -2.1]": -2.9 <= slope2 <= -2.1,
    }
    announce(4, clauses)
    assert all(clauses.values()), clauses


def test_criterion_5_noise_characteristic_function():
    clauses = {}
    for alpha in (1.5, 1.7, 1.9):
        for sigma in (0.1, 1.0):
            spec = StableNoiseSpec(alpha=alpha, sigma=sigma, seed=MASTER_SEED)
            sample = sample_sas(spec, 100_000)
            worst = max(
                abs(empirical_cf(sample, t) - theoretical_cf(alpha, sigma, t))
                for t in (0.5, 1.0, 2.0)
            )
            clauses[f"alpha={alpha},sigma={sigma}: max|ecf-tcf|={worst:.4f} < 0.05"] = worst < 0.05
    announce(5, clauses)
    assert all(clauses.values()), clauses


def test_criterion_6_gamma_inverse_closed_form():
    rng = np.random.default_rng(MASTER_SEED)
    worst = 0.0
    count = 0
    while count < 100:
        a, b = rng.uniform(-8, 8, size=2)
        if a * a + b * b < 0.05:
            continue
        count += 1
        gap = np.abs(gamma_matrix(a, b) @ gamma_inverse(a, b) - np.eye(4)).max()
        worst = max(worst, gap)
    clauses = {f"max|Gamma Gamma^-1 - I|={worst:.3g} < 1e-9": worst < 1e-9}
    announce(6, clauses)
    assert all(clauses.values()), clauses


def test_criterion_7_scaled_hessian_limit():
    _, gap = hessian_limit_check(XI1, 2000)
    clauses = {f"max-abs gap={gap:.4f} < 0.05 at n=2000": gap < 0.05}
    announce(7, clauses)
    assert all(clauses.values()), clauses


def test_criterion_8_trigonometric_limit_suite():
    clauses = {}
    for theta in ((1.5, 0.1), (2.5, 0.2)):
        for k in (0, 1, 2):
            report = trig_limit_check(theta, 10_000, k)
            sq = max(report["cos_sq"]["gap"], report["sin_sq"]["gap"])
            rest = max(
                report["cross"]["gap"],
                report["cos_plain"]["gap"],
                report["sin_plain"]["gap"],
            )
            clauses[f"theta={theta},k={k}: squares {sq:.4f}<0.01, plain/cross {rest:.4f}<0.02"] = (
                sq < 0.01 and rest < 0.02
            )
    announce(8, clauses)
    assert all(clauses.values()), clauses


def test_criterion_9_limiting_cf_of_scaled_errors(crit9_run):
    cfg, result = crit9_run
    alpha, sigma, n = 1.5, 0.1, 500
    truth = {"A": 2.5, "B": 2.5, "theta1": 1.5, "theta2": 0.1}
    order = ["A", "B", "theta1", "theta2"]
    per_rep: dict[int, dict[str, float]] = {}
    for rec in result.raw:
        per_rep.setdefault(rec.replication, {})[rec.parameter] = rec.estimate
    errors = np.array(
        [[per_rep[r][name] - truth[name] for name in order] for r in sorted(per_rep)]
    )
    scaled = errors / scaling_d2(n, alpha)

    clauses = {}
    for k in range(4):
        t4 = np.zeros(4)
        t4[k] = 0.2
        ecf = np.mean(np.exp(1j * scaled @ t4))
        lcf = limiting_cf(t4, XI1, alpha, sigma, n_approx=100_000)
        diff = abs(ecf - lcf)
        clauses[f"axis {order[k]}: |ecf-lcf|={diff:.4f} < 0.1"] = diff < 0.1
    announce(9, clauses)
    assert all(clauses.values()), clauses


def test_criterion_10_experiment_determinism(crit1_run):
    cfg, first, _ = crit1_run
    second = run_experiment(cfg)
    buf1, buf2 = io.StringIO(), io.StringIO()
    first.table.to_csv(buf1)
    second.table.to_csv(buf2)
    identical = buf1.getvalue() == buf2.getvalue()
    clauses = {"re-run summary CSV byte-identical": identical}
    announce(10, clauses)
    assert all(clauses.values()), clauses
