import io

import numpy as np
import pytest

from chirpfit import (
    ChirpComponent,
    ChirpModel,
    ExperimentConfig,
    SummaryTable,
    preset_model,
    rate_check,
    run_experiment,
    summarize,
)
from chirpfit.montecarlo import SummaryRow, parameter_names
import chirpfit.montecarlo as mc


SMALL_MODEL = ChirpModel(components=(ChirpComponent(A=1.5, B=-1.0, theta1=1.1, theta2=0.4),))


def small_config(**overrides):
    kwargs = dict(
        model=SMALL_MODEL,
        alphas=(1.7,),
        sigmas=(0.1,),
        ns=(64,),
        replications=6,
        methods=("lse",),
        init_mode="window",
        master_seed=321,
    )
    kwargs.update(overrides)
    return ExperimentConfig(**kwargs)


def test_summarize_symmetric_pair():
    assert summarize([1.4, 1.6], 1.5) == (1.5, pytest.approx(0.1))


def test_summarize_degenerate_constant():
    ave, mad = summarize([2.0, 2.0, 2.0], 2.0)
    assert ave == 2.0 and mad == 0.0


def test_summarize_hand_computed():
    ave, mad = summarize([1.0, 2.0, 3.0], 2.5)
    assert ave == pytest.approx(2.0)
    assert mad == pytest.approx((1.5 + 0.5 + 0.5) / 3.0)


def test_summarize_rejects_empty():
    with pytest.raises(ValueError):
        summarize([], 0.0)


def test_parameter_names():
    assert parameter_names(1) == ["A", "B", "theta1", "theta2"]
    assert parameter_names(2)[4:] == ["A_2", "B_2", "theta1_2", "theta2_2"]


def test_rate_check_exact_power_law():
    rows = []
    for n in (250, 500, 1000):
        rows.append(
            SummaryRow(method="lse", alpha=1.9, sigma=0.1, n=n,
                       parameter="theta1", ave=1.5, mad=2.0 * n**-1.5, failures=0)
        )
    table = SummaryTable(rows=tuple(rows))
    slope = rate_check(table, "theta1", "lse", 1.9, 0.1)
    assert slope == pytest.approx(-1.5, abs=1e-10)


def test_rate_check_needs_two_sizes():
    table = SummaryTable(
        rows=(SummaryRow("lse", 1.9, 0.1, 250, "theta1", 1.5, 1e-4, 0),)
    )
    with pytest.raises(ValueError):
        rate_check(table, "theta1", "lse", 1.9, 0.1)


def test_run_experiment_deterministic():
    cfg = small_config()
    a = run_experiment(cfg)
    b = run_experiment(cfg)
    buf_a, buf_b = io.StringIO(), io.StringIO()
    a.table.to_csv(buf_a)
    b.table.to_csv(buf_b)
    assert buf_a.getvalue() == buf_b.getvalue()
    assert a.raw == b.raw


def test_cell_results_independent_of_cell_order():
    cfg_fwd = small_config(alphas=(1.5, 1.9), replications=4)
    cfg_rev = small_config(alphas=(1.9, 1.5), replications=4)
    fwd = run_experiment(cfg_fwd).table
    rev = run_experiment(cfg_rev).table
    for alpha in (1.5, 1.9):
        for name in parameter_names(1):
            row_f = fwd.lookup("lse", alpha, 0.1, 64, name)
            row_r = rev.lookup("lse", alpha, 0.1, 64, name)
            assert row_f == row_r


def test_noise_free_configuration_recovers_exactly():
    cfg = small_config(sigmas=(0.0,), replications=3)
    table = run_experiment(cfg).table
    for name in parameter_names(1):
        assert table.lookup("lse", 1.7, 0.0, 64, name).mad < 1e-7


def test_threads_do_not_change_results():
    base = run_experiment(small_config(replications=4)).table
    parallel = run_experiment(small_config(replications=4, threads=2)).table
    assert base == parallel


def test_summary_csv_round_trip(tmp_path):
    table = run_experiment(small_config(replications=3)).table
    path = tmp_path / "summary.csv"
    table.to_csv(path)
    back = SummaryTable.from_csv(path)
    assert back.rows == table.rows


def test_raw_dump_schema(tmp_path):
    result = run_experiment(small_config(replications=3))
    path = tmp_path / "raw.csv"
    result.write_raw_csv(path)
    lines = path.read_text().strip().split("\n")
    assert lines[0] == "method,alpha,sigma,n,replication,parameter,estimate,converged"
    # 3 replications x 4 parameters
    assert len(lines) == 1 + 12


def test_cell_abort_on_error_fraction(monkeypatch):
    calls = {"count": 0}
    real = mc.estimate_multi

    def flaky(y, p, method="lse", inits=None, simplex=None):
        calls["count"] += 1
        if calls["count"] % 2 == 0:
            raise mc.DegenerateDesignError("synthetic failure")
        return real(y, p, method=method, inits=inits, simplex=simplex)

    monkeypatch.setattr(mc, "estimate_multi", flaky)
    monkeypatch.setattr(mc, "DegenerateDesignError", Exception, raising=False)
    result = run_experiment(small_config(replications=6))
    assert len(result.table.aborted) == 1
    cell = result.table.aborted[0]
    assert cell.errors == 3 and cell.replications == 6
    assert result.table.rows == ()


def test_failures_column_counts_nonconverged():
    # one-iteration simplex cannot converge; estimates are still summarized
    from chirpfit.optim import SimplexConfig

    cfg = small_config(replications=3, simplex=SimplexConfig(max_iterations=1))
    table = run_experiment(cfg).table
    row = table.lookup("lse", 1.7, 0.1, 64, "theta1")
    assert row.failures == 3
    assert np.isfinite(row.ave) and row.mad >= 0


def test_config_validation():
    with pytest.raises(ValueError, match="replications"):
        small_config(replications=1)
    with pytest.raises(ValueError, match="alpha"):
        small_config(alphas=(2.3,))
    with pytest.raises(ValueError, match="sigma"):
        small_config(sigmas=(-0.5,))
    with pytest.raises(ValueError, match="8p"):
        small_config(ns=(4,))
    with pytest.raises(ValueError, match="methods"):
        small_config(methods=("mle",))
    with pytest.raises(ValueError, match="init_mode"):
        small_config(init_mode="oracle")
    with pytest.raises(ValueError, match="decrease"):
        model = ChirpModel(
            components=(
                ChirpComponent(A=1.0, B=0.0, theta1=1.0, theta2=0.3),
                ChirpComponent(A=2.0, B=0.0, theta1=2.0, theta2=0.5),
            )
        )
        small_config(model=model, ns=(64,))


def test_preset_models():
    m1 = preset_model("model1")
    assert m1.p == 1 and m1.components[0].A == 2.5
    m2 = preset_model("model2")
    assert m2.p == 2 and m2.components[1].theta1 == 2.5
    with pytest.raises(ValueError):
        preset_model("model3")
