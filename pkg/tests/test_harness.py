"""Harness tests: sampling, bounds, aggregation, reproducibility."""

import json
import math

import numpy as np
import pytest

from hallab.harness import (
    ExperimentConfig,
    LearnerConfig,
    complexity_curve,
    required_n,
    run_trials,
    sample_from,
    wilson_interval,
)
from hallab.measures import Dist, Universe
from hallab.rng import derive_key, derive_int, generator


def small_config(**overrides):
    base = dict(
        construction="theorem3",
        params={"d": 4, "eps_prime": 0.3, "explicit_class": True},
        learner=LearnerConfig(kind="improper_max_info", measure_kind="out_of_sample", eps=0.1),
        n_values=(25,),
        trials=30,
        epsilon=0.1,
        delta=0.1,
        base_seed=11,
    )
    base.update(overrides)
    return ExperimentConfig(**base)


# ---------------------------------------------------------------------------
# sampling
# ---------------------------------------------------------------------------

def test_sample_from_edge_cases():
    u = Universe(5)
    q = Dist.point(u, 2)
    assert sample_from(q, 0, seed=1).points == ()
    s = sample_from(q, 10, seed=1)
    assert s.points == (2,) * 10


def test_sample_from_frequencies_match_weights():
    u = Universe(4)
    q = Dist(u, [0.1, 0.2, 0.3, 0.4])
    n = 1_000_000
    s = sample_from(q, n, seed=123)
    counts = np.bincount(np.array(s.points), minlength=4)
    for atom in range(4):
        p = q.w[atom]
        sigma = math.sqrt(p * (1 - p) / n)
        assert abs(counts[atom] / n - p) <= 3.5 * sigma


def test_sample_from_deterministic():
    u = Universe(6)
    q = Dist.uniform(u)
    assert sample_from(q, 40, seed=7).points == sample_from(q, 40, seed=7).points
    assert sample_from(q, 40, seed=7).points != sample_from(q, 40, seed=8).points


def test_rng_key_separation():
    assert derive_key(1, 2, 3) != derive_key(1, 3, 2)
    assert derive_int(0, b"a") != derive_int(1, b"a")
    g1 = generator(5, 1)
    g2 = generator(5, 1)
    assert g1.random(4).tolist() == g2.random(4).tolist()


# ---------------------------------------------------------------------------
# closed-form bounds
# ---------------------------------------------------------------------------

def test_required_n_frozen_value():
    # independent recomputation of the explicit formula
    expect = math.ceil((4 / 0.1) * (8 * math.log2(16 / 0.1) + math.log2(2 / 0.1)))
    assert expect == 2516
    assert required_n(8, 0.1, 0.1) == 2516


def test_required_n_monotonicity():
    assert required_n(8, 0.05, 0.1) > required_n(8, 0.1, 0.1)
    assert required_n(12, 0.1, 0.1) > required_n(8, 0.1, 0.1)
    assert required_n(8, 0.1, 0.05) > required_n(8, 0.1, 0.1)
    # halving eps more than doubles the requirement
    assert required_n(8, 0.05, 0.1) > 2 * required_n(8, 0.1, 0.1)


def test_required_n_validation():
    with pytest.raises(ValueError):
        required_n(0, 0.1, 0.1)
    with pytest.raises(ValueError):
        required_n(4, 1.5, 0.1)


def test_wilson_interval_contains_point_estimate():
    for s, n in ((0, 50), (10, 50), (50, 50)):
        lo, hi = wilson_interval(s, n)
        assert 0.0 <= lo <= s / n <= hi <= 1.0


def test_wilson_interval_coverage():
    rng = np.random.default_rng(17)
    p_true = 0.3
    n = 200
    covered = 0
    streams = 2000
    for _ in range(streams):
        s = int(rng.binomial(n, p_true))
        lo, hi = wilson_interval(s, n)
        covered += lo <= p_true <= hi
    assert 0.92 <= covered / streams <= 0.985


# ---------------------------------------------------------------------------
# trial running
# ---------------------------------------------------------------------------

def test_run_trials_reproducible_bytes():
    cfg = small_config()
    r1 = run_trials(cfg)
    r2 = run_trials(cfg)
    assert r1.jsonl() == r2.jsonl()
    assert r1.summary_csv() == r2.summary_csv()


def test_run_trials_worker_invariance():
    cfg = small_config(trials=20)
    serial = run_trials(cfg, workers=1)
    parallel = run_trials(cfg, workers=2)
    assert serial.jsonl() == parallel.jsonl()


def test_run_trials_seed_schedule():
    cfg = small_config(trials=5)
    result = run_trials(cfg)
    for rec in result.records:
        assert rec.seed == derive_int(cfg.base_seed, f"{rec.n}:{rec.trial_index}".encode())


def test_failing_trials_recorded_not_raised():
    # tilde_size below the birthday threshold makes the construction raise
    cfg = ExperimentConfig(
        construction="theorem1",
        params={"atoms_per_side": 5000, "tilde_size": 10},
        learner=LearnerConfig(kind="fixed"),
        n_values=(20,),
        trials=4,
        epsilon=0.1,
        delta=0.1,
        base_seed=0,
    )
    result = run_trials(cfg)
    assert all(r.error is not None for r in result.records)
    assert result.summaries[0].failures == 4
    assert result.summaries[0].trials == 0


def test_outputs_written(tmp_path):
    out = tmp_path / "exp"
    cfg = small_config(trials=6, output_dir=str(out))
    result = run_trials(cfg)
    assert (out / "trials.jsonl").read_text() == result.jsonl()
    assert (out / "summary.csv").read_text() == result.summary_csv()
    assert json.loads((out / "config.json").read_text())["trials"] == 6
    plot_files = sorted(p.name for p in (out / "plot").iterdir())
    assert "hall_ge_eps_vs_n.dat" in plot_files
    first = (out / "plot" / "mean_hall_vs_n.dat").read_text().split()
    assert int(first[0]) == 25


def test_jsonl_rows_have_no_wall_time():
    cfg = small_config(trials=3)
    row = json.loads(run_trials(cfg).jsonl().splitlines()[0])
    assert "wall_time" not in row
    assert {"trial_index", "seed", "n", "hall_value", "error"} <= set(row)


def test_complexity_curve_matches_single_runs():
    cfg = small_config(n_values=(10, 25), trials=15)
    curve = complexity_curve(cfg)
    assert [s.n for s in curve.summaries] == [10, 25]
    single = run_trials(small_config(n_values=(10,), trials=15))
    assert curve.summaries[0] == single.summaries[0]


def test_complexity_curve_requires_increasing_n():
    with pytest.raises(ValueError):
        complexity_curve(small_config(n_values=(25, 10)))


def test_complexity_curve_stays_high_in_the_small_sample_regime():
    # information-dominant budget on the anchored ensemble: with n at or
    # below d / (4 eps'), the failure rate sits far above epsilon
    d, eps, eps_prime = 8, 0.02, 0.22
    n_cap = int(d / (4 * eps_prime))  # 9
    cfg = ExperimentConfig(
        construction="theorem3",
        params={"d": d, "eps_prime": eps_prime, "explicit_class": True},
        learner=LearnerConfig(kind="improper_max_info", measure_kind="out_of_sample", eps=eps_prime),
        n_values=(max(1, n_cap // 2), n_cap),
        trials=60,
        epsilon=eps,
        delta=eps,
        base_seed=21,
    )
    curve = complexity_curve(cfg)
    for row in curve.summaries:
        assert row.hall_ge_eps_rate >= eps
        assert row.mean_hall >= 3 * eps_prime / 16 - 3 * row.se_hall


def test_config_json_roundtrip():
    cfg = small_config()
    back = ExperimentConfig.from_json(cfg.to_json())
    assert back == cfg
    with pytest.raises(ValueError):
        ExperimentConfig.from_json({**cfg.to_json(), "schema": "v2"})


def test_config_validation():
    with pytest.raises(ValueError):
        small_config(trials=0)
    with pytest.raises(ValueError):
        small_config(epsilon=1.5)
    with pytest.raises(ValueError):
        small_config(gamma=1.0)
    with pytest.raises(ValueError):
        small_config(construction="mystery")


def test_empirical_learner_never_hallucinates_in_harness():
    cfg = small_config(
        learner=LearnerConfig(kind="empirical"), trials=40, n_values=(15,)
    )
    result = run_trials(cfg)
    assert all(r.hall_value == 0.0 for r in result.records)
    assert result.summaries[0].hall_ge_eps_rate == 0.0
