from __future__ import annotations

import csv
import io
import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from statsmodels.stats.proportion import proportion_confint

from tdurn.ensemble import (
    CSV_COLUMNS,
    EnsembleConfig,
    ks_against_uniform,
    run_ensemble,
    sample_theta,
    trial_seed,
    trial_seeds,
    wilson_interval,
)
from tdurn.sequence import SequenceSpec, log_tau
from tdurn.theory import product_never_white
from tdurn.urn import mix64, simulate

CONST = SequenceSpec.constant(1.0, 2.0)
GEO = SequenceSpec.geometric(2.0, 2.0)


def test_wilson_examples():
    assert wilson_interval(0, 40)[0] == 0.0
    assert wilson_interval(40, 40)[1] == 1.0
    lo, hi = wilson_interval(50, 100)
    assert lo == pytest.approx(0.4038, abs=5e-4) and hi == pytest.approx(0.5962, abs=5e-4)
    with pytest.raises(ValueError):
        wilson_interval(0, 0)
    with pytest.raises(ValueError):
        wilson_interval(5, 4)


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 100_000), st.data(), st.sampled_from([0.9, 0.95, 0.99]))
def test_wilson_matches_statsmodels(n, data, level):
    k = data.draw(st.integers(0, n))
    lo, hi = wilson_interval(k, n, level)
    ref = proportion_confint(k, n, alpha=1 - level, method="wilson")
    assert lo == pytest.approx(ref[0], abs=1e-12)
    assert hi == pytest.approx(ref[1], abs=1e-12)
    assert 0 <= lo <= k / n <= hi <= 1


def _ks_brute(x):
    x = np.sort(np.asarray(x, dtype=float))
    n = x.size
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - x), np.max(x - (i - 1) / n)))


def test_ks_examples():
    k = 999
    grid = np.arange(1, k + 1) / (k + 1)
    assert ks_against_uniform(grid) <= 1 / (k + 1) + 1e-15
    assert ks_against_uniform([0.5] * 10) == pytest.approx(0.5)
    with pytest.raises(ValueError):
        ks_against_uniform([])


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(0.0, 1.0), min_size=1, max_size=300))
def test_ks_matches_brute_force(xs):
    assert ks_against_uniform(xs) == pytest.approx(_ks_brute(xs), abs=1e-12)


def test_trial_seed_formula():
    G, M = 0x9E3779B97F4A7C15, 2 ** 64
    for base, k, stream in ((0, 0, 0), (12345, 77, 0), (2 ** 64 - 1, 3, 5)):
        root = mix64((base + stream * G) % M)
        assert trial_seed(base, k, stream) == mix64((root + (k + 1) * G) % M)
    seeds = trial_seeds(9, 5000)
    assert np.unique(seeds).size == 5000
    assert not np.intersect1d(seeds, trial_seeds(9, 5000, stream=1)).size


def test_sample_theta_matches_single_runs():
    th = sample_theta(CONST, 1.0, 40, 5, seed=3, stream=2)
    ref = [simulate(CONST, 1.0, 40, int(s), windows=[]).final_theta for s in trial_seeds(3, 5, 2)]
    assert th.tolist() == ref
    assert np.all(sample_theta(CONST, 1.0, 0, 3, 0) == 0.5)


def test_absorbed_ensemble():
    rep = run_ensemble(EnsembleConfig(GEO, 0.0, 100, 100))
    assert rep.monopoly_freq == 1.0 and rep.domination_freq == 1.0
    assert rep.final.never_white_freq == 1.0


def test_report_structure():
    cfg = EnsembleConfig(CONST, 1.0, 400, 3000, base_seed=5)
    rep = run_ensemble(cfg)
    assert [c.horizon for c in rep.checkpoints] == [100, 200, 400]
    assert sum(rep.theta_histogram) == 3000 and len(rep.theta_histogram) == 100
    d = json.loads(rep.to_json())
    for c in d["checkpoints"]:
        for key in ("monopoly", "domination", "never_white"):
            f, (lo, hi) = c[key + "_freq"], c[key + "_ci"]
            assert 0 <= lo <= f <= hi <= 1
    assert d["provenance"]["config"]["trials"] == 3000
    assert d["provenance"]["config"]["checkpoints"] == "100,200,400"
    assert d["theta_partial_sum"]["min"] >= sum(1 / (2 + n) for n in range(1, 401)) * (1 - 1e-12)
    assert d["theta_mean"] == pytest.approx(0.5, abs=4 * d["theta_std"] / math.sqrt(3000))


def test_csv_output():
    rep = run_ensemble(EnsembleConfig(CONST, 1.0, 200, 500, checkpoints=(50,)))
    rows = list(csv.reader(io.StringIO(rep.to_csv())))
    assert tuple(rows[0]) == CSV_COLUMNS
    assert [int(r[4]) for r in rows[1:]] == [50, 200]
    assert rows[1][0] == "constant" and rows[1][1] == "c=1.0"
    assert float(rows[-1][7]) == rep.monopoly_freq


def test_schedule_determinism():
    cfg = EnsembleConfig(SequenceSpec.power_law(1.0, 2.0), 1.0, 300, 5000, base_seed=11)
    one = run_ensemble(cfg, workers=1).to_json()
    assert run_ensemble(cfg, workers=3).to_json() == one
    assert run_ensemble(cfg, workers=1).to_json() == one


def test_never_white_matches_product():
    N, trials = 60, 40_000
    for spec in (CONST, SequenceSpec.power_law(1.0, 2.0), GEO):
        rep = run_ensemble(EnsembleConfig(spec, 1.0, N, trials, base_seed=1))
        p = product_never_white(spec, 1.0, N)
        se = math.sqrt(p * (1 - p) / trials)
        assert abs(rep.final.never_white_freq - p) <= 4 * se


def test_proxy_consistency():
    rep = run_ensemble(EnsembleConfig(GEO, 1.0, 200, 2000))
    c = rep.final
    assert c.proxy_consistency_eps == pytest.approx(math.exp(log_tau(GEO, 100) - log_tau(GEO, 200)))
    assert c.proxy_consistency_eps <= rep.config.eps
    assert c.monopoly_not_domination == 0
    assert c.monopoly_count <= c.domination_count


def test_dump_guard(tmp_path):
    cfg = EnsembleConfig(CONST, 1.0, 10_000, 10_000, dump_paths=True, dump_dir=str(tmp_path))
    with pytest.raises(ValueError, match="budget"):
        run_ensemble(cfg)
    cfg = EnsembleConfig(CONST, 1.0, 30, 3, dump_paths=True, dump_dir=str(tmp_path / "p"))
    run_ensemble(cfg)
    files = sorted((tmp_path / "p").iterdir())
    assert [f.name for f in files] == ["trial_0000000.csv", "trial_0000001.csv", "trial_0000002.csv"]
    assert len(files[0].read_text().splitlines()) == 32


@pytest.mark.parametrize("kw", [dict(trials=0), dict(eps=0.5), dict(t0=3.0), dict(checkpoints=(0,)),
                                dict(mono_cut=1.0)])
def test_config_validation(kw):
    base = dict(spec=CONST, t0=1.0, horizon=100, trials=10)
    base.update(kw)
    with pytest.raises(ValueError):
        EnsembleConfig(**base)
