import json
import math

import numpy as np
import pytest

from survmart.mc import (
    ExperimentConfig,
    default_workers,
    replication_rng,
    run_experiment,
    sample_latent,
)
from survmart.model import NSD, U2, Observation


def test_sample_size_checked():
    with pytest.raises(ValueError):
        sample_latent(U2, 0, replication_rng(1, 0))
    with pytest.raises(ValueError):
        ExperimentConfig(U2, 0, 10, (1,))
    with pytest.raises(ValueError):
        ExperimentConfig(U2, 10, 0, (1,))


def test_t_points_must_be_grid_times():
    with pytest.raises(ValueError, match="grid"):
        ExperimentConfig(U2, 10, 10, ("3/2",))


def test_sampling_is_reproducible():
    a = sample_latent(U2, 500, replication_rng(42, 3))
    b = sample_latent(U2, 500, replication_rng(42, 3))
    c = sample_latent(U2, 500, replication_rng(42, 4))
    assert a.counts == b.counts
    assert a.counts != c.counts


def test_substreams_are_counter_jumps():
    g = np.random.Philox(key=5)
    assert replication_rng(5, 0).random() == np.random.Generator(g).random()
    state = replication_rng(5, 2).bit_generator.state["state"]["counter"]
    assert state[2] == 2


def test_law_of_large_numbers_u2():
    n = 100_000
    s = sample_latent(U2, n, replication_rng(2024, 0))
    for o, p in ((Observation(1, 1), 0.5), (Observation(1, 0), 0.25), (Observation(2, 1), 0.25)):
        assert abs(s.counts[o] / n - p) < 3 * math.sqrt(p * (1 - p) / n)


def test_single_replication_flags():
    res = run_experiment(ExperimentConfig(U2, 50, 1, (1,), seed=3))
    assert res.per_t["1"]["variance"] is None
    assert res.per_t["1"]["coverage"] in (0.0, 1.0)
    assert res.criteria["variance[t=1]"]["pass"] is None


def test_deterministic_and_worker_invariant():
    cfg = dict(law=NSD, n=200, replications=40, t_points=(1, 2), seed=11)
    a = json.dumps(run_experiment(ExperimentConfig(**cfg)).to_dict())
    b = json.dumps(run_experiment(ExperimentConfig(**cfg)).to_dict())
    c = json.dumps(run_experiment(ExperimentConfig(**cfg, workers=3)).to_dict())
    assert a == b == c


def test_population_references():
    res = run_experiment(ExperimentConfig(NSD, 100, 20, (1, 2, 3), seed=0))
    assert res.population["sigma2"]["1"]["exact"] == "1/4"
    assert res.population["sigma2_st"]["1,2"]["exact"] == "1/4"
    assert res.population["sigma2_st"]["1,3"]["exact"] == "0/1"
    # zero asymptotic variance at t=3: coverage is not judged
    assert res.criteria["coverage[t=3]"]["pass"] is None


def test_moderate_run_meets_invariants():
    B = 400
    res = run_experiment(ExperimentConfig(U2, 2000, B, (1,), seed=99))
    t = res.per_t["1"]
    assert abs(t["mean"]) < 4 * math.sqrt(0.25 / B)
    assert t["variance"] >= 0
    assert 0 <= t["coverage"] <= 1


def test_thread_env(monkeypatch):
    monkeypatch.setenv("SURVMART_THREADS", "4")
    assert default_workers() == 4
    monkeypatch.setenv("SURVMART_THREADS", "many")
    with pytest.raises(ValueError):
        default_workers()
