"""Trajectory simulation of the time-dependent urn.

The state is the white fraction ``theta`` only; it evolves as::

    I_n     = 1{U_n < theta_{n-1}}
    theta_n = r_n * theta_{n-1} + s_n * I_n

with ``(s_n, r_n)`` from :func:`tdurn.sequence.step_ratios`.  Ball counts are
never formed, so fast-growing sequences do not overflow.  A white draw is
evaluated as ``1 - r_n (1 - theta_{n-1})``, the same quantity because
``s_n + r_n = 1``: both branches are then exact at the absorbing states,
never leave ``[0, 1]`` and are monotone in ``theta`` under rounding, which
keeps the shared-uniform coupling exact.

Random numbers
--------------
Each trajectory owns a counter-based stream keyed by its integer seed.  The
uniform for step ``n`` is::

    U_n = mix64(key + n * GOLDEN) >> 11  scaled to [0, 1)
    key = mix64(seed)

where ``mix64`` is the SplitMix64 finaliser.  Because ``U_n`` is a pure
function of ``(seed, n)`` a batch of trajectories is simulated column-wise
with numpy and each row is bit-identical to the same seed run alone.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from .sequence import SequenceSpec, tables

__all__ = [
    "UrnState",
    "TrajectorySummary",
    "BatchResult",
    "simulate",
    "simulate_batch",
    "advance",
    "initial_state",
    "window_count",
    "monopoly_proxy",
    "domination_proxy",
    "uniforms",
    "write_path_csv",
]

_MASK = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_TWO53 = 1.0 / (1 << 53)

# rounding slack allowed before theta is clamped back into [0, 1]
CLAMP_TOL = 1e-15

# bytes of (uniform, theta, draw) scratch per block of one trial chunk
_BLOCK_BYTES = 32 * 1024 * 1024


def _mix64_array(z: np.ndarray) -> np.ndarray:
    z = z.copy()
    z ^= z >> np.uint64(30)
    z *= _M1
    z ^= z >> np.uint64(27)
    z *= _M2
    z ^= z >> np.uint64(31)
    return z


def mix64(z: int) -> int:
    """SplitMix64 finaliser on a Python int (result in ``[0, 2**64)``)."""
    z &= _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


def stream_key(seed: int) -> int:
    return mix64(int(seed))


def uniforms(keys: np.ndarray, start: int, count: int) -> np.ndarray:
    """Uniforms ``U_start .. U_{start+count-1}`` for each stream key; shape ``(len(keys), count)``."""
    keys = np.asarray(keys, dtype=np.uint64).reshape(-1, 1)
    steps = (np.arange(start, start + count, dtype=np.uint64) * np.uint64(GOLDEN)).reshape(1, -1)
    z = _mix64_array(keys + steps)
    return (z >> np.uint64(11)).astype(np.float64) * _TWO53


@dataclass(frozen=True)
class UrnState:
    n: int
    theta: float
    log_tau: float


def initial_state(spec: SequenceSpec, t0: float) -> UrnState:
    _check_t0(spec, t0)
    return UrnState(0, t0 / spec.tau0, math.log(spec.tau0))


def advance(spec: SequenceSpec, state: UrnState, u: float) -> tuple:
    """One step from ``state`` with uniform ``u``; returns ``(new_state, draw)``."""
    n = state.n + 1
    t = tables(spec, n)
    draw = 1 if u < state.theta else 0
    r = float(t.r[n])
    theta = _clamp_scalar(1.0 - r * (1.0 - state.theta) if draw else r * state.theta)
    return UrnState(n, theta, float(t.log_tau[n])), draw


def _clamp_scalar(theta: float) -> float:
    if theta > 1.0:
        if theta > 1.0 + CLAMP_TOL:
            raise FloatingPointError(f"theta left [0, 1] by {theta - 1.0:.3g}")
        return 1.0
    return theta


def _check_t0(spec: SequenceSpec, t0: float) -> None:
    if not (0.0 <= t0 <= spec.tau0):
        raise ValueError(f"t0 must lie in [0, tau0] = [0, {spec.tau0}], got {t0}")


@dataclass
class TrajectorySummary:
    """Diagnostics of one trajectory up to its horizon.

    Index fields use 0 internally for "never"; the public attributes are
    ``None`` in that case.
    """

    final_theta: float
    last_flip: Optional[int]
    last_white: Optional[int]
    last_black: Optional[int]
    theta_partial_sum: float
    min_theta_after: float
    max_theta_after: float
    window_counts: list
    seed: int
    horizon: int
    path_theta: Optional[np.ndarray] = field(default=None, repr=False)
    path_draws: Optional[np.ndarray] = field(default=None, repr=False)

    def to_dict(self) -> dict:
        return {
            "final_theta": self.final_theta,
            "last_flip": self.last_flip,
            "last_white": self.last_white,
            "last_black": self.last_black,
            "theta_partial_sum": self.theta_partial_sum,
            "min_theta_after": self.min_theta_after,
            "max_theta_after": self.max_theta_after,
            "window_counts": [list(w) for w in self.window_counts],
            "seed": self.seed,
            "horizon": self.horizon,
        }


@dataclass
class BatchResult:
    """Column arrays for a batch of trajectories (row k is seed ``seeds[k]``).

    ``*_at`` arrays have one column per checkpoint; index arrays use 0 for
    "never".  ``windows`` maps ``(n, g)`` to white counts on ``(n, n*g]``.
    """

    seeds: np.ndarray
    horizon: int
    checkpoints: tuple
    final_theta: np.ndarray
    theta_partial_sum: np.ndarray
    min_theta_after: np.ndarray
    max_theta_after: np.ndarray
    theta_at: np.ndarray
    last_flip_at: np.ndarray
    last_white_at: np.ndarray
    last_black_at: np.ndarray
    whites_at: np.ndarray
    windows: dict
    path_theta: Optional[np.ndarray] = None
    path_draws: Optional[np.ndarray] = None

    @property
    def last_flip(self) -> np.ndarray:
        return self.last_flip_at[:, -1]

    @property
    def last_white(self) -> np.ndarray:
        return self.last_white_at[:, -1]

    @property
    def last_black(self) -> np.ndarray:
        return self.last_black_at[:, -1]

    def summary(self, k: int) -> TrajectorySummary:
        def opt(v):
            return None if v == 0 else int(v)

        wins = [(n, n * g, int(c[k])) for (n, g), c in self.windows.items()]
        return TrajectorySummary(
            final_theta=float(self.final_theta[k]),
            last_flip=opt(self.last_flip[k]),
            last_white=opt(self.last_white[k]),
            last_black=opt(self.last_black[k]),
            theta_partial_sum=float(self.theta_partial_sum[k]),
            min_theta_after=float(self.min_theta_after[k]),
            max_theta_after=float(self.max_theta_after[k]),
            window_counts=wins,
            seed=int(self.seeds[k]),
            horizon=self.horizon,
            path_theta=None if self.path_theta is None else self.path_theta[k],
            path_draws=None if self.path_draws is None else self.path_draws[k],
        )


def _last_true(mask: np.ndarray) -> tuple:
    """Per row: (any, column index of the last True)."""
    any_ = mask.any(axis=1)
    idx = mask.shape[1] - 1 - np.argmax(mask[:, ::-1], axis=1)
    return any_, idx


def simulate_batch(spec: SequenceSpec, t0: float, horizon: int, seeds: Sequence[int], *,
                   checkpoints: Iterable[int] = (), windows: Iterable[tuple] = (),
                   record_path: bool = False) -> BatchResult:
    """Simulate one trajectory per seed, vectorised across seeds.

    ``checkpoints`` are extra horizons (``<= horizon``) at which theta, the
    last flip/white/black indices and the white count are snapshotted; the
    final horizon is always appended.  ``windows`` lists ``(n, g)`` pairs for
    white counts on ``(n, n*g]``.
    """
    _check_t0(spec, t0)
    horizon = int(horizon)
    if horizon < 0:
        raise ValueError("horizon must be non-negative")
    seeds = np.asarray([int(s) & _MASK for s in seeds], dtype=np.uint64)
    K = seeds.size
    cps = tuple(sorted({int(c) for c in checkpoints} | {horizon}))
    if cps[0] < 0 or cps[-1] > horizon:
        raise ValueError("checkpoints must lie in [0, horizon]")
    wins = [(int(n), int(g)) for n, g in windows]
    for n, g in wins:
        if n < 0 or g < 1 or n * g > horizon:
            raise ValueError(f"window ({n}, {n}*{g}] exceeds horizon {horizon}")
    marks = sorted({n for n, _ in wins} | {n * g for n, g in wins})
    keys = np.array([stream_key(int(s)) for s in seeds], dtype=np.uint64)
    tab = tables(spec, max(horizon, 1))
    s_tab, r_tab = tab.s, tab.r

    theta = np.full(K, t0 / spec.tau0)
    psum = np.zeros(K)
    half = horizon // 2
    mn = np.full(K, np.inf)
    mx = np.full(K, -np.inf)
    last_flip = np.zeros(K, dtype=np.int64)
    last_white = np.zeros(K, dtype=np.int64)
    last_black = np.zeros(K, dtype=np.int64)
    whites = np.zeros(K, dtype=np.int64)
    prev_draw = np.zeros(K, dtype=bool)

    C = len(cps)
    theta_at = np.empty((K, C))
    flip_at = np.zeros((K, C), dtype=np.int64)
    white_at = np.zeros((K, C), dtype=np.int64)
    black_at = np.zeros((K, C), dtype=np.int64)
    whites_at = np.zeros((K, C), dtype=np.int64)
    mark_counts = {}
    if record_path:
        path_theta = np.empty((K, horizon + 1))
        path_theta[:, 0] = theta
        path_draws = np.zeros((K, horizon), dtype=np.int8)
    ci = 0
    while ci < C and cps[ci] == 0:
        theta_at[:, ci] = theta
        ci += 1
    if 0 in marks:
        mark_counts[0] = whites.copy()

    block = max(1, min(horizon, _BLOCK_BYTES // max(1, 17 * K)))
    start = 1
    while start <= horizon:
        b = min(block, horizon - start + 1)
        if K == 1:
            # same arithmetic in Python floats; numpy per-step overhead dominates for one row
            u_row = uniforms(keys, start, b)[0].tolist()
            r_blk = r_tab[start:start + b].tolist()
            s_blk = s_tab[start:start + b].tolist()
            th = float(theta[0])
            acc = float(psum[0])
            raw = [0.0] * b
            drw = [False] * b
            for j in range(b):
                d = u_row[j] < th
                if d:
                    th = 1.0 - r_blk[j] * (1.0 - th)
                else:
                    th = th * r_blk[j]
                raw[j] = th
                acc += th
                drw[j] = d
            theta[0] = th
            psum[0] = acc
            TH = np.array(raw).reshape(b, 1)
            D = np.array(drw, dtype=bool).reshape(b, 1)
        else:
            U = uniforms(keys, start, b).T.copy()
            TH = np.empty((b, K))
            D = np.empty((b, K), dtype=bool)
            for j in range(b):
                n = start + j
                draw = D[j]
                np.less(U[j], theta, out=draw)
                # I - r (I - theta): exact sign flip when I = 0
                np.subtract(draw, theta, out=theta)
                theta *= r_tab[n]
                np.subtract(draw, theta, out=theta)
                TH[j] = theta
                psum += theta
        if TH.size and not (TH.min() >= 0.0 and TH.max() <= 1.0 + CLAMP_TOL):
            raise FloatingPointError("theta left [0, 1]")
        np.minimum(TH, 1.0, out=TH)
        TH = TH.T
        D = D.T
        stop = start + b - 1
        # extrema over n > horizon/2
        lo_col = max(0, half + 1 - start)
        if lo_col < b:
            mn = np.minimum(mn, TH[:, lo_col:].min(axis=1))
            mx = np.maximum(mx, TH[:, lo_col:].max(axis=1))
        # flips: column j compares with j-1 (or the previous block's last draw)
        prevcol = prev_draw.reshape(-1, 1)
        F = np.concatenate((prevcol, D[:, :-1]), axis=1) != D
        if start == 1:
            F[:, 0] = False
        cum_w = np.cumsum(D, axis=1, dtype=np.int64)

        def state_upto(col):
            """(last_flip, last_white, last_black, whites) using columns [0, col]."""
            sub = slice(0, col + 1)
            out = []
            for mat, cur in ((F[:, sub], last_flip), (D[:, sub], last_white), (~D[:, sub], last_black)):
                any_, idx = _last_true(mat)
                out.append(np.where(any_, start + idx, cur))
            out.append(whites + cum_w[:, col])
            return out

        while ci < C and cps[ci] <= stop:
            col = cps[ci] - start
            lf, lw, lb, wc = state_upto(col)
            theta_at[:, ci] = TH[:, col]
            flip_at[:, ci], white_at[:, ci], black_at[:, ci], whites_at[:, ci] = lf, lw, lb, wc
            ci += 1
        for m in marks:
            if start <= m <= stop:
                mark_counts[m] = whites + cum_w[:, m - start]
        last_flip, last_white, last_black, whites = state_upto(b - 1)
        prev_draw = D[:, -1].copy()
        if record_path:
            path_theta[:, start:stop + 1] = TH
            path_draws[:, start - 1:stop] = D
        start = stop + 1

    if horizon == 0:
        mn = theta.copy()
        mx = theta.copy()
    win_counts = {(n, g): mark_counts[n * g] - mark_counts[n] for n, g in wins}
    return BatchResult(
        seeds=seeds, horizon=horizon, checkpoints=cps, final_theta=theta, theta_partial_sum=psum,
        min_theta_after=mn, max_theta_after=mx, theta_at=theta_at, last_flip_at=flip_at,
        last_white_at=white_at, last_black_at=black_at, whites_at=whites_at, windows=win_counts,
        path_theta=path_theta if record_path else None,
        path_draws=path_draws if record_path else None,
    )


def default_windows(horizon: int) -> list:
    """``(n, g(n)=n)`` windows ``(n, n**2]`` that fit inside the horizon."""
    return [(n, n) for n in (10, 100, 1000) if n * n <= horizon]


def simulate(spec: SequenceSpec, t0: float, horizon: int, seed: int, *,
             windows: Optional[Iterable[tuple]] = None, record_path: bool = False) -> TrajectorySummary:
    """Run one trajectory for ``horizon`` steps; a pure function of its arguments."""
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    if windows is None:
        windows = default_windows(horizon)
    res = simulate_batch(spec, t0, horizon, [seed], windows=windows, record_path=record_path)
    return res.summary(0)


def window_count(draws: Sequence[int], n: int, g_of_n: int) -> int:
    """Number of white draws among ``I_{n+1} .. I_{n*g}``; ``draws[0]`` is ``I_1``."""
    draws = np.asarray(draws)
    end = int(n) * int(g_of_n)
    if n < 0 or g_of_n < 1:
        raise ValueError("need n >= 0 and g >= 1")
    if end > draws.size:
        raise ValueError(f"window ({n}, {end}] exceeds the recorded horizon {draws.size}")
    return int(np.count_nonzero(draws[n:end]))


def monopoly_proxy(summary: TrajectorySummary, cut: float = 0.5) -> bool:
    """Draw colour constant after ``cut * horizon`` (over-estimates the asymptotic event)."""
    return summary.last_flip is None or summary.last_flip <= cut * summary.horizon


def domination_proxy(summary_or_theta, eps: float = 1e-3) -> bool:
    """Final theta within ``eps`` of 0 or 1."""
    if not 0.0 < eps < 0.5:
        raise ValueError("eps must lie in (0, 1/2)")
    th = summary_or_theta.final_theta if isinstance(summary_or_theta, TrajectorySummary) else float(summary_or_theta)
    return th <= eps or th >= 1.0 - eps


def write_path_csv(path, summary: TrajectorySummary) -> None:
    """Write ``n, theta, i_n`` rows (``i_n`` empty at ``n = 0``)."""
    if summary.path_theta is None:
        raise ValueError("trajectory was simulated without record_path=True")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["n", "theta", "i_n"])
        w.writerow([0, repr(float(summary.path_theta[0])), ""])
        for n in range(1, summary.horizon + 1):
            w.writerow([n, repr(float(summary.path_theta[n])), int(summary.path_draws[n - 1])])
