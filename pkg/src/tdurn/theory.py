"""Regime classification and analytic oracles.

The classifier maps condition verdicts from :mod:`tdurn.sequence` to a small
lattice of statements about ``P(M)`` (draws eventually constant) and ``P(D)``
(limit proportion in ``{0, 1}``).  Rules, by id:

=====================================  ==========================================
rule id                                conclusion
=====================================  ==========================================
``vanishing-reinforcement``            ``sigma_n -> 0``: both Zero
``summable-inverse-mass``              ``sum 1/tau_n < inf``: P(M) positive
``summable-inverse-mass+liminf``       ... and ``liminf sigma_n/tau_n > 0``: both One
``square-sum-divergence``              ``sum (sigma_{n+1}/tau_n)**2 = inf``: P(D) One
``square-sum-convergence``             square sum finite: P(D) < 1
``divergent-inverse-mass``             ``sum 1/tau_n = inf``: P(M) Zero
``divergent-inverse-mass+regularity``  ... with RC1 and RC2: P(D) Zero
=====================================  ==========================================

Resulting regime table for the built-in families:

============  =============  =============
family        P(M)           P(D)
============  =============  =============
Constant      Zero           Zero
LogPower a>1  PositiveLtOne  PositiveLtOne
LogPower a<=1 Zero           Zero
PowerLaw      PositiveLtOne  PositiveLtOne
Geometric     One            One
ExpSqrt       PositiveLeOne  One
DecayPower    Zero           Zero
============  =============  =============

The Monte Carlo checks are falsification tests: a true inequality estimated on
both sides should essentially never fail at four combined standard errors.
"""

from __future__ import annotations

import enum
import json
import math
import time
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

import numpy as np

from .ensemble import sample_theta, trial_seeds, EnsembleConfig, run_ensemble, ks_against_uniform
from .sequence import (
    Condition,
    Family,
    InconclusiveError,
    SequenceSpec,
    Verdict,
    delta_tail,
    evaluate_all,
    evaluate_condition,
    inverse_tau_tail,
    log_tau,
    step_ratios,
    tables,
)
from .urn import simulate_batch, uniforms, stream_key

__all__ = [
    "PMonopoly",
    "PDomination",
    "RegimeVerdict",
    "classify",
    "lattice_consistent",
    "product_never_white",
    "LemmaCReport",
    "find_lemma_c",
    "LEMMA_C",
    "exact_theta_distribution",
    "laplace_mc",
    "LaplaceCheck",
    "check_laplace_recursion",
    "DeltaBoundReport",
    "proposition_delta_bound",
    "HypothesisError",
    "martingale_step_check",
    "coupling_violations",
    "CheckResult",
    "verify_suite",
]

SIGMAS = 4.0
LEMMA_C = 0.5


class HypothesisError(ValueError):
    """The hypotheses of a check are not met, so it is refused."""


# ---------------------------------------------------------------------------
# classifier


class PMonopoly(str, enum.Enum):
    ZERO = "Zero"
    POSITIVE_LT_ONE = "PositiveLtOne"
    POSITIVE_LE_ONE = "PositiveLeOne"
    ONE = "One"
    UNKNOWN = "Unknown"


class PDomination(str, enum.Enum):
    ZERO = "Zero"
    POSITIVE_LT_ONE = "PositiveLtOne"
    ONE = "One"
    UNKNOWN = "Unknown"


@dataclass
class RegimeVerdict:
    p_monopoly: PMonopoly
    p_domination: PDomination
    fired: list = field(default_factory=list)
    notes: list = field(default_factory=list)
    conditions: dict = field(default_factory=dict)

    def to_dict(self, *, evidence: bool = False) -> dict:
        out = {
            "p_monopoly": self.p_monopoly.value,
            "p_domination": self.p_domination.value,
            "fired": [{"rule": r, "conditions": list(c)} for r, c in self.fired],
            "notes": list(self.notes),
            "conditions": {k.value: v.value.value for k, v in self.conditions.items()},
        }
        if evidence:
            out["evidence"] = {k.value: v.evidence for k, v in self.conditions.items()}
        return out

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(**kw), indent=2, sort_keys=True)


# rank of "how sure" a statement is that the event happens
_M_RANK = {PMonopoly.ZERO: 0, PMonopoly.POSITIVE_LT_ONE: 1, PMonopoly.POSITIVE_LE_ONE: 1, PMonopoly.ONE: 2}
_D_RANK = {PDomination.ZERO: 0, PDomination.POSITIVE_LT_ONE: 1, PDomination.ONE: 2}


def lattice_consistent(v: RegimeVerdict) -> bool:
    """``M`` is contained in ``D``: P(M) may never be stated stronger than P(D)."""
    if v.p_monopoly is PMonopoly.ONE and v.p_domination is not PDomination.ONE:
        return False
    if v.p_domination is PDomination.ZERO and v.p_monopoly is not PMonopoly.ZERO:
        return False
    if v.p_monopoly is PMonopoly.UNKNOWN or v.p_domination is PDomination.UNKNOWN:
        return True
    return _M_RANK[v.p_monopoly] <= _D_RANK[v.p_domination] or (
        v.p_monopoly is PMonopoly.POSITIVE_LT_ONE and v.p_domination is PDomination.POSITIVE_LT_ONE)


def classify(spec: SequenceSpec, *, probe_max: int = 1024) -> RegimeVerdict:
    """Apply the rule table of the module docstring to ``spec``."""
    C, H, F, I = Condition, Verdict.HOLDS, Verdict.FAILS, Verdict.INCONCLUSIVE
    conds = evaluate_all(spec, probe_max=probe_max)
    v = {c: conds[c].value for c in C}
    pm, pd = PMonopoly.UNKNOWN, PDomination.UNKNOWN
    fired, notes = [], []

    if v[C.SIGMA_VANISHES] is H:
        pm, pd = PMonopoly.ZERO, PDomination.ZERO
        fired.append(("vanishing-reinforcement", [C.SIGMA_VANISHES.value]))
    elif v[C.HARMONIC_TAU_DIVERGES] is F:
        pm = PMonopoly.POSITIVE_LE_ONE
        fired.append(("summable-inverse-mass", [C.HARMONIC_TAU_DIVERGES.value]))
        if v[C.LIMINF_RATIO_POSITIVE] is H:
            pm, pd = PMonopoly.ONE, PDomination.ONE
            fired.append(("summable-inverse-mass+liminf",
                          [C.HARMONIC_TAU_DIVERGES.value, C.LIMINF_RATIO_POSITIVE.value]))
        elif v[C.SQUARE_SUM_DIVERGES] is H:
            pd = PDomination.ONE
            fired.append(("square-sum-divergence", [C.SQUARE_SUM_DIVERGES.value]))
        elif v[C.SQUARE_SUM_DIVERGES] is F:
            pm, pd = PMonopoly.POSITIVE_LT_ONE, PDomination.POSITIVE_LT_ONE
            fired.append(("square-sum-convergence", [C.SQUARE_SUM_DIVERGES.value]))
        else:
            notes.append("square-sum condition inconclusive; P(D) undecided")
    elif v[C.HARMONIC_TAU_DIVERGES] is H:
        pm = PMonopoly.ZERO
        fired.append(("divergent-inverse-mass", [C.HARMONIC_TAU_DIVERGES.value]))
        if v[C.RC1] is H and v[C.RC2] is H:
            pd = PDomination.ZERO
            fired.append(("divergent-inverse-mass+regularity",
                          [C.HARMONIC_TAU_DIVERGES.value, C.RC1.value, C.RC2.value]))
        elif v[C.SQUARE_SUM_DIVERGES] is H:
            pd = PDomination.ONE
            fired.append(("square-sum-divergence", [C.SQUARE_SUM_DIVERGES.value]))
        elif v[C.SQUARE_SUM_DIVERGES] is F:
            fired.append(("square-sum-convergence", [C.SQUARE_SUM_DIVERGES.value]))
            notes.append("P(D) < 1 but positivity is not decided by the available rules")
        else:
            notes.append("square-sum condition inconclusive; P(D) undecided")
    else:
        notes.append("inverse-mass summability inconclusive; no rule applies")

    if I in v.values():
        bad = sorted(c.value for c in C if v[c] is I)
        notes.append("inconclusive conditions: " + ", ".join(bad))
    if pm is not PMonopoly.UNKNOWN and pm is not PMonopoly.ZERO and pd is PDomination.UNKNOWN:
        notes.append("P(D) >= P(M) > 0")
    verdict = RegimeVerdict(pm, pd, fired, notes, conds)
    if not lattice_consistent(verdict):
        raise AssertionError(f"classifier produced an inconsistent verdict {verdict.to_dict()}")
    return verdict


# ---------------------------------------------------------------------------
# product oracle


def _log_product(spec: SequenceSpec, t0: float, stop: int) -> float:
    """``sum_{n < stop} log(1 - t0/tau_n)``."""
    t = tables(spec, max(stop - 1, 1))
    x = t0 * np.exp(-t.log_tau[:stop])
    return math.fsum(np.log1p(-x).tolist())


def product_never_white(spec: SequenceSpec, t0: float, horizon=math.inf, tol: float = 1e-12, *,
                        with_note: bool = False, max_terms: int = 1 << 22):
    """``prod_{n < horizon} (1 - t0 / tau_n)``.

    At a finite horizon this is the exact probability that none of the first
    ``horizon`` draws is white.  At ``horizon = inf`` it is a lower bound on
    the monopoly probability: zero when ``sum 1/tau_n`` diverges, otherwise
    computed to absolute error ``tol`` using the family's bound on
    ``sum_{n>M} 1/tau_n``.
    """
    if not 0.0 <= t0 <= spec.tau0:
        raise ValueError(f"t0 must lie in [0, tau0], got {t0}")

    def ret(val, note=""):
        return (val, note) if with_note else val

    if t0 == 0.0:
        return ret(1.0)
    if t0 == spec.tau0:
        return ret(0.0, "t0 = tau0: the urn holds only white mass, so the first draw is white")
    if math.isfinite(horizon):
        N = int(horizon)
        if N < 0:
            raise ValueError("horizon must be non-negative")
        return ret(math.exp(_log_product(spec, t0, N)) if N else 1.0)
    harm = evaluate_condition(spec, Condition.HARMONIC_TAU_DIVERGES, probe_max=64)
    if harm.value is Verdict.INCONCLUSIVE:
        raise InconclusiveError("cannot decide summability of 1/tau_n")
    if harm.value is Verdict.HOLDS:
        return ret(0.0, "sum 1/tau_n diverges, so the product is 0")
    M = 1024
    while True:
        head = _log_product(spec, t0, M)
        x_M = t0 * math.exp(-log_tau(spec, M))
        # -log(1 - x) <= x / (1 - x_M) for x <= x_M
        eps = t0 * (math.exp(-log_tau(spec, M)) + inverse_tau_tail(spec, M)) / (1.0 - x_M)
        if eps / 2.0 <= tol:
            return ret(math.exp(head - eps / 2.0))
        if M >= max_terms:
            raise ValueError(f"product tail bound {eps:.3g} still above tol={tol} after {M} factors")
        M = min(4 * M, max_terms)


# ---------------------------------------------------------------------------
# lemma constant


@dataclass
class LemmaCReport:
    c_min: float
    c_checked: float
    grid: dict
    margin: float
    violations: int
    points: int

    def to_dict(self) -> dict:
        return asdict(self)


def _h(x: np.ndarray) -> np.ndarray:
    # (x - 1 + e^{-x}) / x^2, Taylor series near 0
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    small = x < 1e-2
    xs = x[small]
    out[small] = 0.5 - xs / 6.0 + xs ** 2 / 24.0 - xs ** 3 / 120.0 + xs ** 4 / 720.0
    xl = x[~small]
    out[~small] = (xl + np.expm1(-xl)) / xl ** 2
    return out


def lemma_slack(p: np.ndarray, x: np.ndarray, c: float) -> np.ndarray:
    """``(-p x + c p x^2) - log(1 - p + p e^{-x})``; non-negative where the inequality holds."""
    p, x = np.broadcast_arrays(np.asarray(p, dtype=float), np.asarray(x, dtype=float))
    q = p * np.expm1(-x)
    far = q < -0.5
    lhs = np.empty_like(q)
    lhs[~far] = np.log1p(q[~far])
    # near p = 1 the sum 1 + q cancels; use log((1 - p) + p e^{-x}) directly
    with np.errstate(divide="ignore"):
        lhs[far] = np.logaddexp(np.log1p(-p[far]), np.log(p[far]) - x[far])
    return (-p * x + c * p * x * x) - lhs


def find_lemma_c(x_max: float = 50.0, grid_density: int = 10_000, *, safety: float = 0.0) -> LemmaCReport:
    """Locate ``c_min = sup_{x>0} (x - 1 + e^{-x}) / x^2`` and check the two-variable inequality.

    ``h`` is evaluated at ``x = 0`` (by continuity) and on a log grid of
    ``grid_density`` points up to ``x_max``.  The inequality
    ``1 - p + p e^{-x} <= exp(-p x + c p x^2)`` is then checked in log form at
    ``c = c_min + safety`` on a ``sqrt(grid_density)``-square ``(p, x)`` grid.
    """
    if x_max <= 0 or grid_density < 4:
        raise ValueError("need x_max > 0 and grid_density >= 4")
    xs = np.concatenate([[0.0], np.geomspace(1e-12, x_max, grid_density)])
    c_min = float(_h(xs).max())
    c = c_min + safety
    k = max(2, int(round(math.sqrt(grid_density))))
    P, X = np.meshgrid(np.linspace(0.0, 1.0, k), np.geomspace(1e-6, x_max, k), indexing="ij")
    slack = lemma_slack(P, X, c)
    scale = np.abs(P * X) + np.abs(c * P * X * X)
    violations = int(np.count_nonzero(slack < -1e-13 * np.maximum(scale, 1e-300)))
    return LemmaCReport(
        c_min=c_min,
        c_checked=c,
        grid={"h_points": int(xs.size), "x_max": float(x_max), "pairs": int(P.size), "p": [0.0, 1.0],
              "x": [1e-6, float(x_max)]},
        margin=float(slack.min()),
        violations=violations,
        points=int(P.size),
    )


# ---------------------------------------------------------------------------
# Laplace transform checks


def exact_theta_distribution(spec: SequenceSpec, t0: float, n: int) -> tuple:
    """All ``2**n`` values of ``theta_n`` with their probabilities (``n <= 22``)."""
    if n > 22:
        raise ValueError("exact enumeration limited to n <= 22")
    theta = np.array([t0 / spec.tau0])
    prob = np.array([1.0])
    for k in range(1, n + 1):
        _, r = step_ratios(spec, k)
        theta, prob = (np.concatenate([1.0 - r * (1.0 - theta), r * theta]),
                       np.concatenate([prob * theta, prob * (1.0 - theta)]))
    return theta, prob


def _exact_laplace(spec, t0, n, lam) -> float:
    th, pr = exact_theta_distribution(spec, t0, n)
    return float(np.dot(pr, np.exp(-lam * th)))


def laplace_mc(spec: SequenceSpec, t0: float, n: int, lam: float, trials: int, seed: int, *,
               stream: int = 0, workers: int = 1) -> tuple:
    """Monte Carlo ``E exp(-lam * theta_n)``: ``(mean, standard error)``."""
    if lam < 0:
        raise ValueError("lambda must be >= 0")
    if lam == 0:
        return 1.0, 0.0
    if n == 0:
        return math.exp(-lam * t0 / spec.tau0), 0.0
    th = sample_theta(spec, t0, n, trials, seed, stream=stream, workers=workers)
    v = np.exp(-lam * th)
    mean = math.fsum(v.tolist()) / v.size
    se = float(v.std(ddof=1) / math.sqrt(v.size)) if v.size > 1 else 0.0
    return mean, se


@dataclass
class LaplaceCheck:
    n: int
    lam: float
    lam_prev: float
    lhs: Optional[float]
    lhs_se: float
    rhs: Optional[float]
    rhs_se: float
    passed: Optional[bool]
    precondition_ok: bool
    exact: bool
    note: str = ""

    def to_dict(self) -> dict:
        return asdict(self)


def check_laplace_recursion(spec: SequenceSpec, t0: float, n: int, lam: float, trials: int, seed: int, *,
                            c: float = LEMMA_C, exact_max: int = 12, workers: int = 1) -> LaplaceCheck:
    """Check ``f_n(lam) <= f_{n-1}(lam - c s_n^2 lam^2)`` with ``f_k(l) = E exp(-l theta_k)``.

    Small ``n`` is evaluated exactly by path enumeration; otherwise each side
    is a Monte Carlo estimate on its own stream and the check allows four
    combined standard errors.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    s, _ = step_ratios(spec, n)
    lam_prev = lam - c * s * s * lam * lam
    if not lam_prev > 0:
        return LaplaceCheck(n, lam, lam_prev, None, 0.0, None, 0.0, None, False, False,
                            "precondition violated: lam - c s_n^2 lam^2 <= 0")
    if n <= exact_max:
        lhs, rhs = _exact_laplace(spec, t0, n, lam), _exact_laplace(spec, t0, n - 1, lam_prev)
        return LaplaceCheck(n, lam, lam_prev, lhs, 0.0, rhs, 0.0, lhs <= rhs * (1 + 1e-12), True, True)
    lhs, lse = laplace_mc(spec, t0, n, lam, trials, seed, stream=1, workers=workers)
    rhs, rse = laplace_mc(spec, t0, n - 1, lam_prev, trials, seed, stream=2, workers=workers)
    ok = lhs <= rhs + SIGMAS * math.hypot(lse, rse)
    return LaplaceCheck(n, lam, lam_prev, lhs, lse, rhs, rse, bool(ok), True, False)


@dataclass
class DeltaBoundReport:
    m: int
    delta_m: float
    lam_m: float
    bound: float
    bound_se: float
    rows: list
    passed: bool

    def to_dict(self) -> dict:
        return asdict(self)


def proposition_delta_bound(spec: SequenceSpec, t0: float, m: int, trials: int, seed: int, *,
                            ns: Optional[Sequence[int]] = None, c: float = LEMMA_C,
                            workers: int = 1) -> DeltaBoundReport:
    """Check ``f_n(lam_m) <= E exp(-theta_m / (4 c delta_m))`` for several ``n > m``.

    ``lam_m = 1 / (2 c delta_m)``.  Refuses with :class:`HypothesisError`
    when ``delta_m`` is infinite.
    """
    d = delta_tail(spec, m)
    if not math.isfinite(d):
        raise HypothesisError(f"delta_{m} is infinite: the square sum diverges")
    lam = 1.0 / (2.0 * c * d)
    if ns is None:
        ns = (2 * m, 10 * m, 100 * m) if m > 0 else (1, 10, 100)
    ns = [int(n) for n in ns]
    if any(n <= m for n in ns):
        raise ValueError("every n must exceed m")
    bound, bse = laplace_mc(spec, t0, m, lam / 2.0, trials, seed, stream=10, workers=workers)
    rows, ok = [], True
    for j, n in enumerate(ns):
        f, fse = laplace_mc(spec, t0, n, lam, trials, seed, stream=11 + j, workers=workers)
        passed = f <= bound + SIGMAS * math.hypot(fse, bse)
        ok &= passed
        rows.append({"n": n, "f_n": f, "se": fse, "passed": bool(passed)})
    return DeltaBoundReport(m, d, lam, bound, bse, rows, bool(ok))


# ---------------------------------------------------------------------------
# process properties


def martingale_step_check(spec: SequenceSpec, n: int, theta: float, draws: int, seed: int) -> dict:
    """Mean of ``theta_n`` over ``draws`` one-step draws from ``theta_{n-1} = theta``."""
    s, r = step_ratios(spec, n)
    u = uniforms(np.array([stream_key(seed)], dtype=np.uint64), 0, draws)[0]
    nxt = r * theta + s * (u < theta)
    mean = float(nxt.mean())
    se = float(nxt.std(ddof=1) / math.sqrt(draws))
    return {"n": n, "theta": theta, "mean": mean, "se": se,
            "passed": bool(abs(mean - theta) <= SIGMAS * max(se, 1e-300))}


def coupling_violations(spec: SequenceSpec, t0_low: float, t0_high: float, horizon: int, pairs: int,
                        seed: int) -> int:
    """Number of paired paths where the larger start falls below the smaller one at some step."""
    if t0_high < t0_low:
        raise ValueError("need t0_high >= t0_low")
    seeds = trial_seeds(seed, pairs, stream=7)
    lo = simulate_batch(spec, t0_low, horizon, seeds, record_path=True).path_theta
    hi = simulate_batch(spec, t0_high, horizon, seeds, record_path=True).path_theta
    return int(np.count_nonzero((hi < lo).any(axis=1)))


# ---------------------------------------------------------------------------
# self-check suite


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: dict

    def to_dict(self) -> dict:
        return {"name": self.name, "passed": bool(self.passed), "detail": self.detail}


def _check(name, fn) -> CheckResult:
    t = time.perf_counter()
    try:
        passed, detail = fn()
    except Exception as exc:  # a crashing oracle is a failed check
        passed, detail = False, {"error": f"{type(exc).__name__}: {exc}"}
    detail = dict(detail)
    detail["seconds"] = round(time.perf_counter() - t, 3)
    return CheckResult(name, bool(passed), detail)


def verify_suite(*, quick: bool = True, seed: int = 0, workers: int = 1) -> list:
    """Run the oracle suite; every check is a falsification test."""
    trials = 20_000 if quick else 100_000
    const = SequenceSpec.constant(1.0, 2.0)
    power = SequenceSpec.power_law(1.0, 2.0)
    geo = SequenceSpec.geometric(2.0, 2.0)
    out = []

    def lemma():
        r = find_lemma_c()
        return abs(r.c_min - 0.5) <= 1e-6 and r.violations == 0, r.to_dict()

    def product_geo():
        v = product_never_white(geo, 1.0, math.inf, 1e-12)
        ref = math.prod(1.0 - 2.0 ** -(k + 1) for k in range(80))
        return abs(v - ref) <= 1e-10, {"value": v, "direct_product": ref}

    def product_mc():
        rows = []
        for spec, N in ((const, 100), (power, 100), (geo, 50)):
            rep = run_ensemble(EnsembleConfig(spec, 1.0, N, trials, base_seed=seed), workers=workers)
            p = product_never_white(spec, 1.0, N)
            f = rep.final.never_white_freq
            se = math.sqrt(p * (1 - p) / trials)
            rows.append({"family": spec.family.value, "product": p, "freq": f, "se": se,
                         "passed": abs(f - p) <= SIGMAS * se})
        return all(r["passed"] for r in rows), {"rows": rows}

    def delta0():
        d = delta_tail(const, 0)
        return abs(d - (math.pi ** 2 / 6 - 1.25)) <= 1e-9, {"delta_0": d}

    def laplace():
        rows = []
        for spec in (const, power):
            d100 = delta_tail(spec, 100)
            for n, lam in ((1, 1.0), (50, 3.0), (100, 1.0 / (2 * LEMMA_C * d100))):
                r = check_laplace_recursion(spec, 1.0, n, lam, trials, seed, workers=workers)
                rows.append({"family": spec.family.value, **r.to_dict()})
            b = proposition_delta_bound(spec, 1.0, 10, trials // 4, seed, ns=(20, 100), workers=workers)
            rows.append({"family": spec.family.value, "delta_bound": b.to_dict()})
        ok = all(r.get("passed", True) is not False and r.get("delta_bound", {}).get("passed", True) for r in rows)
        return ok, {"rows": rows}

    def classifier():
        rows = []
        specs = [const, SequenceSpec.log_power(2.0), SequenceSpec.log_power(0.5), power, geo,
                 SequenceSpec.exp_sqrt(), SequenceSpec.decay_power(0.5), SequenceSpec.decay_power(2.0)]
        ok = True
        for spec in specs:
            v = classify(spec, probe_max=256)
            sq = v.conditions[Condition.SQUARE_SUM_DIVERGES].value is Verdict.HOLDS
            good = lattice_consistent(v) and v.p_monopoly is not PMonopoly.UNKNOWN and v.fired
            good = bool(good and (not sq or v.p_domination is PDomination.ONE))
            ok &= good
            rows.append({"spec": spec.describe(), **v.to_dict(), "passed": good})
        return ok, {"rows": rows}

    def martingale():
        rows = [martingale_step_check(const, n, th, 200_000 if quick else 1_000_000, seed + n)
                for n, th in ((1, 0.5), (10, 0.2), (1000, 0.9))]
        return all(r["passed"] for r in rows), {"rows": rows}

    def coupling():
        v = coupling_violations(const, 0.5, 1.5, 200, 200 if quick else 1000, seed)
        return v == 0, {"violations": v}

    def ks():
        rep = run_ensemble(EnsembleConfig(const, 1.0, 1000 if quick else 10_000, 5000 if quick else 10_000,
                                          base_seed=seed), workers=workers)
        return rep.ks_uniform_stat <= 0.03, {"ks": rep.ks_uniform_stat}

    for name, fn in (("lemma_constant", lemma), ("product_infinite_geometric", product_geo),
                     ("product_vs_monte_carlo", product_mc), ("delta_constant", delta0),
                     ("laplace_inequalities", laplace), ("classifier_consistency", classifier),
                     ("martingale_step", martingale), ("monotone_coupling", coupling),
                     ("classical_uniform_limit", ks)):
        out.append(_check(name, fn))
    return out
