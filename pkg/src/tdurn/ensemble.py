"""Deterministic Monte Carlo ensembles of urn trajectories.

Trial ``k`` of an ensemble with base seed ``b`` (and stream ``j``, used to
keep independent estimates apart) runs with seed::

    trial_seed(b, k, j) = mix64(mix64(b + j * GOLDEN) + (k + 1) * GOLDEN)

``mix64`` is the SplitMix64 finaliser from :mod:`tdurn.urn`.  Trials are cut
into fixed chunks, the chunks may run in any order on any number of worker
processes, and results are reassembled by trial index before any reduction,
so a report depends only on its configuration.
"""

from __future__ import annotations

import concurrent.futures
import csv
import io
import json
import math
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
from scipy import stats

from . import __version__
from .sequence import SequenceSpec
from .urn import GOLDEN, mix64, simulate_batch, write_path_csv

__all__ = [
    "EnsembleConfig",
    "EnsembleReport",
    "CheckpointStats",
    "run_ensemble",
    "trial_seed",
    "trial_seeds",
    "wilson_interval",
    "ks_against_uniform",
    "sample_theta",
    "CSV_COLUMNS",
]

_MASK = (1 << 64) - 1
CHUNK = 2048
HIST_BINS = 100
RNG_DESCRIPTION = "splitmix64 counter stream; trial_seed = mix64(mix64(base + stream*G) + (k+1)*G)"
CSV_COLUMNS = ("family", "params", "tau0", "t0", "horizon", "trials", "eps", "monopoly_freq", "mono_lo",
               "mono_hi", "domination_freq", "dom_lo", "dom_hi", "ks_stat")


def trial_seed(base_seed: int, k: int, stream: int = 0) -> int:
    root = mix64((int(base_seed) + int(stream) * GOLDEN) & _MASK)
    return mix64((root + (int(k) + 1) * GOLDEN) & _MASK)


def trial_seeds(base_seed: int, trials: int, stream: int = 0) -> np.ndarray:
    return np.array([trial_seed(base_seed, k, stream) for k in range(trials)], dtype=np.uint64)


def wilson_interval(successes: int, trials: int, level: float = 0.95) -> tuple:
    """Wilson score interval for a binomial proportion."""
    if trials <= 0:
        raise ValueError("trials must be positive")
    if not 0 <= successes <= trials:
        raise ValueError("need 0 <= successes <= trials")
    z = float(stats.norm.ppf(0.5 + level / 2.0))
    p = successes / trials
    z2n = z * z / trials
    centre = (p + z2n / 2.0) / (1.0 + z2n)
    half = z * math.sqrt(p * (1.0 - p) / trials + z2n / (4.0 * trials)) / (1.0 + z2n)
    lo, hi = centre - half, centre + half
    if successes == 0:
        lo = 0.0
    if successes == trials:
        hi = 1.0
    return max(0.0, lo), min(1.0, hi)


def ks_against_uniform(samples: Sequence[float]) -> float:
    """Kolmogorov-Smirnov distance between the sample and Uniform(0, 1)."""
    x = np.asarray(samples, dtype=float)
    if x.size == 0:
        raise ValueError("need at least one sample")
    return float(stats.kstest(x, "uniform").statistic)


# ---------------------------------------------------------------------------
# chunked execution


def _chunk_job(args):
    spec, t0, horizon, seeds, checkpoints, dump = args
    res = simulate_batch(spec, t0, horizon, seeds, checkpoints=checkpoints, record_path=dump is not None)
    if dump is not None:
        first, directory = dump
        for k in range(len(seeds)):
            write_path_csv(Path(directory) / f"trial_{first + k:07d}.csv", res.summary(k))
    return {
        "final_theta": res.final_theta,
        "theta_partial_sum": res.theta_partial_sum,
        "theta_at": res.theta_at,
        "last_flip_at": res.last_flip_at,
        "last_white_at": res.last_white_at,
        "checkpoints": res.checkpoints,
    }


def _resolve_workers(workers: int) -> int:
    if workers is None or workers == 0:
        return os.cpu_count() or 1
    if workers < 0:
        raise ValueError("workers must be >= 0")
    return int(workers)


def _run_chunks(spec, t0, horizon, seeds, checkpoints, workers=1, dump_dir=None, chunk=CHUNK) -> dict:
    jobs = []
    for first in range(0, len(seeds), chunk):
        dump = None if dump_dir is None else (first, str(dump_dir))
        jobs.append((spec, t0, horizon, seeds[first:first + chunk], tuple(checkpoints), dump))
    workers = _resolve_workers(workers)
    if workers == 1 or len(jobs) == 1:
        parts = [_chunk_job(j) for j in jobs]
    else:
        with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_chunk_job, jobs))
    out = {key: np.concatenate([p[key] for p in parts]) for key in parts[0] if key != "checkpoints"}
    out["checkpoints"] = parts[0]["checkpoints"]
    return out


def sample_theta(spec: SequenceSpec, t0: float, n: int, trials: int, seed: int, *, stream: int = 0,
                 workers: int = 1) -> np.ndarray:
    """Independent draws of ``theta_n``, one per trial."""
    if n == 0:
        return np.full(trials, t0 / spec.tau0)
    seeds = trial_seeds(seed, trials, stream)
    return _run_chunks(spec, t0, n, seeds, (), workers)["final_theta"]


# ---------------------------------------------------------------------------
# ensembles


@dataclass(frozen=True)
class EnsembleConfig:
    spec: SequenceSpec
    t0: float
    horizon: int
    trials: int
    base_seed: int = 0
    eps: float = 1e-3
    checkpoints: Optional[tuple] = None
    mono_cut: float = 0.5
    dump_paths: bool = False
    dump_dir: Optional[str] = None
    dump_budget_bytes: int = 64 * 1024 * 1024

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.horizon < 1:
            raise ValueError("horizon must be >= 1")
        if not 0.0 < self.eps < 0.5:
            raise ValueError("eps must lie in (0, 1/2)")
        if not 0.0 < self.mono_cut < 1.0:
            raise ValueError("mono_cut must lie in (0, 1)")
        if not 0.0 <= self.t0 <= self.spec.tau0:
            raise ValueError("t0 must lie in [0, tau0]")
        cps = self.resolved_checkpoints()
        if cps[0] < 1 or cps[-1] > self.horizon:
            raise ValueError("checkpoints must lie in [1, horizon]")

    def resolved_checkpoints(self) -> tuple:
        if self.checkpoints is None:
            raw = {max(1, self.horizon // 4), max(1, self.horizon // 2), self.horizon}
        else:
            raw = set(int(c) for c in self.checkpoints) | {self.horizon}
        return tuple(sorted(raw))

    def dump_bytes(self) -> int:
        # one "n,theta,i_n" row is at most ~32 bytes
        return self.trials * (self.horizon + 2) * 32

    def echo(self) -> dict:
        """Flat key/value view used for provenance and config files."""
        d = {
            "family": self.spec.family.value,
            "tau0": self.spec.tau0,
            "t0": self.t0,
            "horizon": self.horizon,
            "trials": self.trials,
            "seed": self.base_seed,
            "eps": self.eps,
            "checkpoints": ",".join(str(c) for c in self.resolved_checkpoints()),
            "mono_cut": self.mono_cut,
        }
        d.update(self.spec.p)
        return d


@dataclass
class CheckpointStats:
    horizon: int
    monopoly_count: int
    domination_count: int
    never_white_count: int
    monopoly_not_domination: int
    trials: int
    proxy_consistency_eps: float
    ks_uniform_stat: float

    @property
    def monopoly_freq(self) -> float:
        return self.monopoly_count / self.trials

    @property
    def domination_freq(self) -> float:
        return self.domination_count / self.trials

    @property
    def never_white_freq(self) -> float:
        return self.never_white_count / self.trials

    def to_dict(self) -> dict:
        mono = wilson_interval(self.monopoly_count, self.trials)
        dom = wilson_interval(self.domination_count, self.trials)
        nw = wilson_interval(self.never_white_count, self.trials)
        return {
            "horizon": self.horizon,
            "monopoly_freq": self.monopoly_freq, "monopoly_ci": list(mono),
            "domination_freq": self.domination_freq, "domination_ci": list(dom),
            "never_white_freq": self.never_white_freq, "never_white_ci": list(nw),
            "monopoly_not_domination": self.monopoly_not_domination,
            "proxy_consistency_eps": self.proxy_consistency_eps,
            "ks_uniform_stat": self.ks_uniform_stat,
        }


@dataclass
class EnsembleReport:
    config: EnsembleConfig
    checkpoints: list
    theta_histogram: list
    theta_mean: float
    theta_std: float
    partial_sum: dict
    ks_uniform_stat: float
    provenance: dict = field(default_factory=dict)

    @property
    def final(self) -> CheckpointStats:
        return self.checkpoints[-1]

    @property
    def monopoly_freq(self) -> float:
        return self.final.monopoly_freq

    @property
    def domination_freq(self) -> float:
        return self.final.domination_freq

    def to_dict(self) -> dict:
        return {
            "checkpoints": [c.to_dict() for c in self.checkpoints],
            "monopoly_freq": self.monopoly_freq,
            "monopoly_ci": list(wilson_interval(self.final.monopoly_count, self.final.trials)),
            "domination_freq": self.domination_freq,
            "domination_ci": list(wilson_interval(self.final.domination_count, self.final.trials)),
            "eps": self.config.eps,
            "theta_histogram": {"bins": HIST_BINS, "range": [0.0, 1.0], "counts": self.theta_histogram},
            "theta_mean": self.theta_mean,
            "theta_std": self.theta_std,
            "theta_partial_sum": self.partial_sum,
            "ks_uniform_stat": self.ks_uniform_stat,
            "provenance": self.provenance,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def csv_rows(self) -> list:
        spec = self.config.spec
        rows = []
        for c in self.checkpoints:
            mono = wilson_interval(c.monopoly_count, c.trials)
            dom = wilson_interval(c.domination_count, c.trials)
            rows.append([spec.family.value, spec.params_string(), spec.tau0, self.config.t0, c.horizon, c.trials,
                         self.config.eps, c.monopoly_freq, mono[0], mono[1], c.domination_freq, dom[0], dom[1],
                         c.ks_uniform_stat])
        return rows

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for row in self.csv_rows():
            w.writerow([repr(v) if isinstance(v, float) else v for v in row])
        return buf.getvalue()


def _consistency_eps(spec: SequenceSpec, cut: float, horizon: int) -> float:
    # constant draws on [m, N] move theta by at most tau_m / tau_N towards 0 or 1
    from .sequence import log_tau

    m = int(math.floor(cut * horizon))
    return math.exp(log_tau(spec, m) - log_tau(spec, horizon))


def run_ensemble(config: EnsembleConfig, workers: int = 1) -> EnsembleReport:
    """Simulate ``config.trials`` trajectories and aggregate proxy frequencies.

    ``workers`` sets the process count (0 = all CPUs); it never changes the
    report.
    """
    if config.dump_paths:
        need = config.dump_bytes()
        if need > config.dump_budget_bytes:
            raise ValueError(f"path dump needs ~{need} bytes, over the budget of {config.dump_budget_bytes}")
        if config.dump_dir is None:
            raise ValueError("dump_paths requires dump_dir")
        Path(config.dump_dir).mkdir(parents=True, exist_ok=True)
    cps = config.resolved_checkpoints()
    seeds = trial_seeds(config.base_seed, config.trials)
    raw = _run_chunks(config.spec, config.t0, config.horizon, seeds, cps, workers,
                      dump_dir=config.dump_dir if config.dump_paths else None)
    col = {c: i for i, c in enumerate(raw["checkpoints"])}
    eps = config.eps
    checkpoint_stats = []
    for c in cps:
        i = col[c]
        th = raw["theta_at"][:, i]
        lf = raw["last_flip_at"][:, i]
        mono = (lf == 0) | (lf <= config.mono_cut * c)
        dom = (th <= eps) | (th >= 1.0 - eps)
        checkpoint_stats.append(CheckpointStats(
            horizon=c,
            monopoly_count=int(mono.sum()),
            domination_count=int(dom.sum()),
            never_white_count=int((raw["last_white_at"][:, i] == 0).sum()),
            monopoly_not_domination=int((mono & ~dom).sum()),
            trials=config.trials,
            proxy_consistency_eps=_consistency_eps(config.spec, config.mono_cut, c),
            ks_uniform_stat=ks_against_uniform(th),
        ))
    final = raw["final_theta"]
    hist, _ = np.histogram(final, bins=HIST_BINS, range=(0.0, 1.0))
    ps = raw["theta_partial_sum"]
    n = final.size
    mean = math.fsum(final.tolist()) / n
    var = math.fsum(((final - mean) ** 2).tolist()) / max(1, n - 1)
    ps_mean = math.fsum(ps.tolist()) / n
    ps_var = math.fsum(((ps - ps_mean) ** 2).tolist()) / max(1, n - 1)
    provenance = {
        "config": config.echo(),
        "spec": config.spec.describe(),
        "version": __version__,
        "rng": RNG_DESCRIPTION,
    }
    return EnsembleReport(
        config=config,
        checkpoints=checkpoint_stats,
        theta_histogram=[int(h) for h in hist],
        theta_mean=mean,
        theta_std=math.sqrt(var),
        partial_sum={"mean": ps_mean, "std": math.sqrt(ps_var), "min": float(ps.min()), "max": float(ps.max())},
        ks_uniform_stat=checkpoint_stats[-1].ks_uniform_stat,
        provenance=provenance,
    )
