"""Reinforcement sequences for the time-dependent urn.

A :class:`SequenceSpec` fixes the added masses ``sigma_n`` (``n >= 1``) and the
initial mass ``tau_0``.  Everything else in the package derives ``tau_n``,
the step ratios ``s_n = sigma_n / tau_n`` and ``r_n = tau_{n-1} / tau_n`` and
the square tail ``delta_n = sum_{i>n} s_i**2`` from here.

Numerics
--------
Tables are built in linear scale with compensated summation while ``tau``
stays far from overflow.  Past that point (``Geometric`` and ``ExpSqrt`` at
large ``n``) the running total is accumulated as a log-sum-exp and the ratios
come from the log gap ``d_n = log sigma_n - log tau_{n-1}``::

    s_n = expit(d_n),   r_n = expit(-d_n)

so ``s_n + r_n == 1`` to rounding no matter how large ``tau_n`` is.

Condition table
---------------
Built-in families are classified from their closed-form asymptotics
(``sigma_n`` for each family is listed on :class:`Family`):

============  ======  ========  =======  ======  ======  =======
family        sq-sum  1/tau     liminf   RC1     RC2     vanish
============  ======  ========  =======  ======  ======  =======
Constant      Fails   Holds     Fails    Holds   Holds   Fails
LogPower a    Fails   a <= 1    Fails    Holds   Holds   Fails
PowerLaw a    Fails   Fails     Fails    Holds   Fails   Fails
Geometric r   Holds   Fails     Holds    Fails   Fails   Fails
ExpSqrt       Holds   Fails     Fails    Fails   Fails   Fails
DecayPower a  Fails   Holds     Fails    a < 1   Fails   Holds
============  ======  ========  =======  ======  ======  =======

"sq-sum" is divergence of ``sum (sigma_{n+1}/tau_n)**2``, "1/tau" is
divergence of ``sum 1/tau_n``, "liminf" is ``liminf sigma_n/tau_n > 0``,
RC1 is ``sigma_n/tau_n`` of exact order ``1/n``, RC2 is the window bound
``alpha < sigma_i/sigma_n < beta`` for ``n <= i <= n g(n)`` and "vanish" is
``sigma_n -> 0``.  RC2 fails for PowerLaw and DecayPower under every
unbounded window, since ``sigma_{n g(n)} / sigma_n = g(n)**(+-a)``.

Custom sequences are a tabulated prefix plus an optional extrapolation rule.
The rule decides the asymptotic class; the table is probed for agreement with
the rule and the verdict is ``Inconclusive`` if they disagree or no rule is
given.
"""

from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import integrate, special

__all__ = [
    "Family",
    "Extrapolation",
    "SequenceSpec",
    "Condition",
    "Verdict",
    "ConditionVerdict",
    "InconclusiveError",
    "sigma",
    "log_sigma",
    "log_sigma_array",
    "tau",
    "log_tau",
    "step_ratios",
    "tables",
    "Tables",
    "delta_tail",
    "evaluate_condition",
    "evaluate_all",
    "read_custom_table",
]

# log tau above which linear tables are abandoned for log-space ones
_LINEAR_LOG_LIMIT = 690.0


class InconclusiveError(ValueError):
    """A Custom sequence cannot be classified well enough for the request."""


class Family(str, enum.Enum):
    CONSTANT = "constant"  # sigma_n = c
    LOG_POWER = "logpower"  # sigma_n = log(n + 2)**a
    POWER_LAW = "powerlaw"  # sigma_n = n**a, a > 0
    GEOMETRIC = "geometric"  # sigma_n = r**n, r > 1
    EXP_SQRT = "expsqrt"  # sigma_n = exp(sqrt(n))
    DECAY_POWER = "decaypower"  # sigma_n = n**-a, a > 0
    CUSTOM = "custom"


class Condition(str, enum.Enum):
    SQUARE_SUM_DIVERGES = "SquareSumDiverges"
    HARMONIC_TAU_DIVERGES = "HarmonicTauDiverges"
    LIMINF_RATIO_POSITIVE = "LiminfRatioPositive"
    RC1 = "RC1"
    RC2 = "RC2"
    SIGMA_VANISHES = "SigmaVanishes"


class Verdict(str, enum.Enum):
    HOLDS = "Holds"
    FAILS = "Fails"
    INCONCLUSIVE = "Inconclusive"


_REQUIRED_PARAMS = {
    Family.CONSTANT: ("c",),
    Family.LOG_POWER: ("a",),
    Family.POWER_LAW: ("a",),
    Family.GEOMETRIC: ("r",),
    Family.EXP_SQRT: (),
    Family.DECAY_POWER: ("a",),
    Family.CUSTOM: (),
}

_EXTRAPOLATION_KINDS = ("constant", "power", "logpower", "geometric", "expsqrt")


@dataclass(frozen=True)
class Extrapolation:
    """How a Custom table continues past its last entry ``L``.

    The continuation is anchored at ``sigma_L``:

    - ``constant``: ``sigma_n = sigma_L``
    - ``power``: ``sigma_n = sigma_L * (n / L)**param`` (negative ``param`` decays)
    - ``logpower``: ``sigma_n = sigma_L * (log(n + 2) / log(L + 2))**param``
    - ``geometric``: ``sigma_n = sigma_L * param**(n - L)``
    - ``expsqrt``: ``sigma_n = sigma_L * exp(sqrt(n) - sqrt(L))``
    """

    kind: str
    param: float = 0.0

    def __post_init__(self):
        if self.kind not in _EXTRAPOLATION_KINDS:
            raise ValueError(f"unknown extrapolation kind {self.kind!r}")
        if self.kind == "geometric" and not self.param > 1.0:
            raise ValueError("geometric extrapolation needs ratio > 1")
        if self.kind == "logpower" and not self.param > 0.0:
            raise ValueError("logpower extrapolation needs exponent > 0")

    def reference(self, tau0: float) -> "SequenceSpec":
        """Built-in spec with the same asymptotic class."""
        if self.kind == "constant" or (self.kind == "power" and self.param == 0.0):
            return SequenceSpec.constant(1.0, tau0)
        if self.kind == "power":
            if self.param > 0:
                return SequenceSpec.power_law(self.param, tau0)
            return SequenceSpec.decay_power(-self.param, tau0)
        if self.kind == "logpower":
            return SequenceSpec.log_power(self.param, tau0)
        if self.kind == "geometric":
            return SequenceSpec.geometric(self.param, tau0)
        return SequenceSpec.exp_sqrt(tau0)


@dataclass(frozen=True)
class SequenceSpec:
    """Immutable description of ``(sigma_n)`` and ``tau_0``.

    Use the named constructors (``SequenceSpec.geometric(2.0, tau0=2.0)``) or
    :meth:`from_name` for config-driven construction.
    """

    family: Family
    params: tuple = ()
    tau0: float = 1.0
    table: tuple = field(default=(), repr=False)
    extrapolation: Optional[Extrapolation] = None

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        object.__setattr__(self, "params", tuple(sorted((str(k), float(v)) for k, v in dict(self.params).items())))
        object.__setattr__(self, "tau0", float(self.tau0))
        object.__setattr__(self, "table", tuple(float(x) for x in self.table))
        if not (self.tau0 > 0 and math.isfinite(self.tau0)):
            raise ValueError("tau0 must be a positive finite number")
        names = set(dict(self.params))
        required = set(_REQUIRED_PARAMS[self.family])
        if names != required:
            raise ValueError(f"{self.family.value} takes parameters {sorted(required)}, got {sorted(names)}")
        p = dict(self.params)
        fam = self.family
        if fam is Family.CONSTANT and not p["c"] > 0:
            raise ValueError("constant family needs c > 0")
        if fam in (Family.LOG_POWER, Family.POWER_LAW, Family.DECAY_POWER) and not p["a"] > 0:
            raise ValueError(f"{fam.value} needs a > 0")
        if fam is Family.GEOMETRIC and not p["r"] > 1:
            raise ValueError("geometric family needs r > 1")
        if fam is Family.CUSTOM:
            if not self.table:
                raise ValueError("custom sequence needs a non-empty table")
            if not all(x > 0 and math.isfinite(x) for x in self.table):
                raise ValueError("custom table entries must be positive and finite")
        elif self.table or self.extrapolation is not None:
            raise ValueError("table/extrapolation are only valid for the custom family")

    # -- constructors -----------------------------------------------------
    @classmethod
    def constant(cls, c: float = 1.0, tau0: float = 2.0) -> "SequenceSpec":
        return cls(Family.CONSTANT, {"c": c}, tau0)

    @classmethod
    def log_power(cls, a: float, tau0: float = 2.0) -> "SequenceSpec":
        return cls(Family.LOG_POWER, {"a": a}, tau0)

    @classmethod
    def power_law(cls, a: float, tau0: float = 2.0) -> "SequenceSpec":
        return cls(Family.POWER_LAW, {"a": a}, tau0)

    @classmethod
    def geometric(cls, r: float, tau0: float = 2.0) -> "SequenceSpec":
        return cls(Family.GEOMETRIC, {"r": r}, tau0)

    @classmethod
    def exp_sqrt(cls, tau0: float = 2.0) -> "SequenceSpec":
        return cls(Family.EXP_SQRT, {}, tau0)

    @classmethod
    def decay_power(cls, a: float, tau0: float = 2.0) -> "SequenceSpec":
        return cls(Family.DECAY_POWER, {"a": a}, tau0)

    @classmethod
    def custom(cls, table: Sequence[float], tau0: float, extrapolation: Optional[Extrapolation] = None) -> "SequenceSpec":
        return cls(Family.CUSTOM, {}, tau0, tuple(table), extrapolation)

    @classmethod
    def from_name(cls, family: str, tau0: float, **params: float) -> "SequenceSpec":
        """Build a built-in family from its config name, e.g. ``from_name("geometric", 2.0, r=2.0)``."""
        fam = Family(family.lower())
        if fam is Family.CUSTOM:
            raise ValueError("use SequenceSpec.custom or read_custom_table for custom sequences")
        return cls(fam, params, tau0)

    @property
    def p(self) -> dict:
        return dict(self.params)

    def describe(self) -> dict:
        out = {"family": self.family.value, "params": self.p, "tau0": self.tau0}
        if self.family is Family.CUSTOM:
            out["table_length"] = len(self.table)
            out["extrapolation"] = None if self.extrapolation is None else {
                "kind": self.extrapolation.kind, "param": self.extrapolation.param}
        return out

    def params_string(self) -> str:
        if self.family is Family.CUSTOM:
            ext = self.extrapolation
            tail = "none" if ext is None else f"{ext.kind}:{ext.param!r}"
            return f"table={len(self.table)};extrapolation={tail}"
        return ";".join(f"{k}={v!r}" for k, v in self.params)


def read_custom_table(path, tau0: float) -> SequenceSpec:
    """Load a Custom spec from a two-column ``n sigma_n`` text table.

    Rows must list ``n = 1, 2, ..., L`` in order.  Blank lines and ``#``
    comments are skipped, except for an extrapolation stanza of the form
    ``# extrapolate: power -0.5`` (kind, then optional parameter).
    """
    values = []
    ext = None
    with open(path, encoding="utf-8") as fh:
        for raw in fh:
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line.lstrip("#").strip()
                if body.lower().startswith("extrapolate:"):
                    parts = body.split(":", 1)[1].split()
                    if not parts:
                        raise ValueError("empty extrapolation stanza")
                    ext = Extrapolation(parts[0], float(parts[1]) if len(parts) > 1 else 0.0)
                continue
            cols = line.replace(",", " ").split()
            if len(cols) != 2:
                raise ValueError(f"expected two columns, got {line!r}")
            n, val = int(cols[0]), float(cols[1])
            if n != len(values) + 1:
                raise ValueError(f"table rows must be n = 1, 2, ...; got n={n} at row {len(values) + 1}")
            values.append(val)
    return SequenceSpec.custom(values, tau0, ext)


# ---------------------------------------------------------------------------
# sigma


def _check_index(n: int) -> int:
    if isinstance(n, bool) or int(n) != n:
        raise TypeError("index must be an integer")
    n = int(n)
    if n < 1:
        raise ValueError("sigma is defined for n >= 1")
    return n


def _builtin_sigma_scalar(fam: Family, p: dict, n: int) -> float:
    try:
        if fam is Family.CONSTANT:
            return p["c"]
        if fam is Family.LOG_POWER:
            return math.log(n + 2) ** p["a"]
        if fam is Family.POWER_LAW:
            return float(n) ** p["a"]
        if fam is Family.GEOMETRIC:
            return p["r"] ** n
        if fam is Family.EXP_SQRT:
            return math.exp(math.sqrt(n))
        if fam is Family.DECAY_POWER:
            return float(n) ** -p["a"]
    except OverflowError:
        return math.inf
    raise AssertionError(fam)


def _extrap_log_factor(ext: Extrapolation, L: int, n: np.ndarray) -> np.ndarray:
    """log(sigma_n / sigma_L) for n > L under the extrapolation rule."""
    n = np.asarray(n, dtype=float)
    if ext.kind == "constant":
        return np.zeros_like(n)
    if ext.kind == "power":
        return ext.param * (np.log(n) - math.log(L))
    if ext.kind == "logpower":
        return ext.param * (np.log(np.log(n + 2.0)) - math.log(math.log(L + 2.0)))
    if ext.kind == "geometric":
        return (n - L) * math.log(ext.param)
    return np.sqrt(n) - math.sqrt(L)


def sigma(spec: SequenceSpec, n: int) -> float:
    """Added mass at step ``n >= 1``.

    Returns ``inf`` if the value overflows a double; use :func:`log_sigma`
    for fast-growing families.
    """
    n = _check_index(n)
    if spec.family is Family.CUSTOM:
        L = len(spec.table)
        if n <= L:
            return spec.table[n - 1]
        if spec.extrapolation is None:
            raise InconclusiveError(f"custom table has {L} entries and no extrapolation rule (asked for n={n})")
        lf = float(_extrap_log_factor(spec.extrapolation, L, np.array([n]))[0])
        try:
            return spec.table[-1] * math.exp(lf)
        except OverflowError:
            return math.inf
    return _builtin_sigma_scalar(spec.family, spec.p, n)


def log_sigma_array(spec: SequenceSpec, n) -> np.ndarray:
    """``log sigma_n`` for an array of indices (all ``>= 1``).

    Where ``sigma_n`` is representable the log of the linear value is used,
    so two specs with equal ``sigma`` values get equal logs.
    """
    n = np.asarray(n)
    if n.size and n.min() < 1:
        raise ValueError("sigma is defined for n >= 1")
    nf = n.astype(float)
    fam, p = spec.family, spec.p
    with np.errstate(over="ignore", divide="ignore"):
        if fam is Family.CONSTANT:
            return np.full(nf.shape, math.log(p["c"]))
        if fam is Family.LOG_POWER:
            return np.log(np.log(nf + 2.0) ** p["a"])
        if fam is Family.POWER_LAW:
            return np.log(nf ** p["a"])
        if fam is Family.DECAY_POWER:
            return np.log(nf ** -p["a"])
        if fam is Family.GEOMETRIC:
            lin = np.power(p["r"], nf)
            return np.where(np.isfinite(lin), np.log(lin), nf * math.log(p["r"]))
        if fam is Family.EXP_SQRT:
            return np.sqrt(nf)
    # custom
    L = len(spec.table)
    tab = np.log(np.asarray(spec.table))
    out = np.empty(nf.shape)
    inside = n <= L
    out[inside] = tab[n[inside] - 1]
    if (~inside).any():
        if spec.extrapolation is None:
            raise InconclusiveError(f"custom table has {L} entries and no extrapolation rule")
        lf = _extrap_log_factor(spec.extrapolation, L, n[~inside])
        with np.errstate(over="ignore"):
            lin = spec.table[-1] * np.exp(lf)
        out[~inside] = np.where(np.isfinite(lin), np.log(lin), tab[-1] + lf)
    return out


def log_sigma(spec: SequenceSpec, n: int) -> float:
    n = _check_index(n)
    return float(log_sigma_array(spec, np.array([n]))[0])


def _sigma_array(spec: SequenceSpec, n: np.ndarray) -> np.ndarray:
    """Linear-scale sigma for an index array; inf where it overflows."""
    nf = n.astype(float)
    fam, p = spec.family, spec.p
    with np.errstate(over="ignore"):
        if fam is Family.CONSTANT:
            return np.full(nf.shape, p["c"])
        if fam is Family.LOG_POWER:
            return np.log(nf + 2.0) ** p["a"]
        if fam is Family.POWER_LAW:
            return nf ** p["a"]
        if fam is Family.DECAY_POWER:
            return nf ** -p["a"]
        if fam is Family.GEOMETRIC:
            return np.power(p["r"], nf)
        if fam is Family.EXP_SQRT:
            return np.exp(np.sqrt(nf))
        L = len(spec.table)
        out = np.empty(nf.shape)
        inside = n <= L
        out[inside] = np.asarray(spec.table)[n[inside] - 1]
        if (~inside).any():
            if spec.extrapolation is None:
                raise InconclusiveError(f"custom table has {L} entries and no extrapolation rule")
            out[~inside] = spec.table[-1] * np.exp(_extrap_log_factor(spec.extrapolation, L, n[~inside]))
        return out


# ---------------------------------------------------------------------------
# tau and ratio tables


@dataclass(frozen=True)
class Tables:
    """Per-step quantities for ``n = 0..N``; index 0 of the ratio arrays is unused (NaN).

    ``tau`` is the linear total mass, saturated to the largest double where it
    overflows (``saturated`` marks those entries).
    """

    horizon: int
    log_sigma: np.ndarray
    sigma: np.ndarray
    log_tau: np.ndarray
    tau: np.ndarray
    s: np.ndarray
    r: np.ndarray
    saturated: np.ndarray
    log_space: bool


def _compensated_cumsum(start: float, values: np.ndarray) -> np.ndarray:
    """Running ``start + sum(values[:k])`` with Neumaier compensation."""
    out = np.empty(values.size + 1)
    total, comp = start, 0.0
    out[0] = start
    for k, v in enumerate(values.tolist(), 1):
        t = total + v
        if abs(total) >= abs(v):
            comp += (total - t) + v
        else:
            comp += (v - t) + total
        total = t
        out[k] = total + comp
    return out


@functools.lru_cache(maxsize=16)
def tables(spec: SequenceSpec, horizon: int) -> Tables:
    """Build (and cache) sigma, tau and step-ratio tables up to ``horizon``."""
    horizon = int(horizon)
    if horizon < 0:
        raise ValueError("horizon must be non-negative")
    idx = np.arange(1, horizon + 1)
    ls = np.empty(horizon + 1)
    ls[0] = np.nan
    ls[1:] = log_sigma_array(spec, idx)
    log_tau = np.logaddexp.accumulate(np.concatenate(([math.log(spec.tau0)], ls[1:])))
    log_space = bool(log_tau[-1] > _LINEAR_LOG_LIMIT)
    sig = np.empty(horizon + 1)
    sig[0] = np.nan
    sig[1:] = _sigma_array(spec, idx)
    s = np.full(horizon + 1, np.nan)
    r = np.full(horizon + 1, np.nan)
    if not log_space:
        tau_lin = _compensated_cumsum(spec.tau0, sig[1:])
        log_tau = np.log(tau_lin)
        s[1:] = sig[1:] / tau_lin[1:]
        r[1:] = tau_lin[:-1] / tau_lin[1:]
        saturated = np.zeros(horizon + 1, dtype=bool)
    else:
        d = ls[1:] - log_tau[:-1]
        s[1:] = special.expit(d)
        r[1:] = special.expit(-d)
        with np.errstate(over="ignore"):
            tau_lin = np.exp(log_tau)
        saturated = ~np.isfinite(tau_lin)
        tau_lin[saturated] = np.finfo(float).max
    for arr in (ls, sig, log_tau, tau_lin, s, r, saturated):
        arr.setflags(write=False)
    return Tables(horizon, ls, sig, log_tau, tau_lin, s, r, saturated, log_space)


def _check_nonneg(n: int) -> int:
    if isinstance(n, bool) or int(n) != n or n < 0:
        raise ValueError("index must be a non-negative integer")
    return int(n)


def tau(spec: SequenceSpec, n: int, *, with_flag: bool = False):
    """Total mass ``tau_n = tau_0 + sum_{i<=n} sigma_i``.

    With ``with_flag=True`` returns ``(value, saturated)``; a saturated value
    is the largest double and :func:`log_tau` holds the real magnitude.
    """
    n = _check_nonneg(n)
    if n == 0:
        return (spec.tau0, False) if with_flag else spec.tau0
    t = tables(spec, n)
    val = float(t.tau[n])
    return (val, bool(t.saturated[n])) if with_flag else val


def log_tau(spec: SequenceSpec, n: int) -> float:
    n = _check_nonneg(n)
    if n == 0:
        return math.log(spec.tau0)
    return float(tables(spec, n).log_tau[n])


def step_ratios(spec: SequenceSpec, n: int) -> tuple:
    """``(sigma_n / tau_n, tau_{n-1} / tau_n)`` for ``n >= 1``."""
    n = _check_index(n)
    t = tables(spec, n)
    return float(t.s[n]), float(t.r[n])


# ---------------------------------------------------------------------------
# continuous extensions used by tail bounds


def _sigma_cont(spec: SequenceSpec, x: float) -> float:
    """sigma as a function of a real argument ``x >= 1`` (past the table for Custom)."""
    fam, p = spec.family, spec.p
    if fam is Family.CONSTANT:
        return p["c"]
    if fam is Family.LOG_POWER:
        return math.log(x + 2.0) ** p["a"]
    if fam is Family.POWER_LAW:
        return x ** p["a"]
    if fam is Family.DECAY_POWER:
        return x ** -p["a"]
    if fam is Family.GEOMETRIC:
        return p["r"] ** x
    if fam is Family.EXP_SQRT:
        return math.exp(math.sqrt(x))
    L = len(spec.table)
    return spec.table[-1] * math.exp(float(_extrap_log_factor(spec.extrapolation, L, np.array([x]))[0]))


def _sigma_trend(spec: SequenceSpec) -> str:
    fam = spec.family
    if fam is Family.CONSTANT:
        return "flat"
    if fam is Family.DECAY_POWER:
        return "down"
    if fam is Family.CUSTOM:
        ext = spec.extrapolation
        if ext.kind == "constant" or (ext.kind == "power" and ext.param == 0.0):
            return "flat"
        if ext.kind == "power" and ext.param < 0:
            return "down"
    return "up"


def _envelope_integrals(spec: SequenceSpec, M: int, tau_M: float, *, decades: float = 14.0):
    """Integrate tail quantities over ``x in [M, M * 10**decades]``.

    ``tau_x`` for real ``x >= M`` is bracketed from the exact ``tau_M``: for
    nondecreasing sigma the sum over ``(M, x]`` lies between the integrals of
    sigma over ``[M, x]`` and ``[M+1, x+1]``; the roles swap for decreasing
    sigma.  With ``lo_tau``/``hi_tau`` those envelopes, the ODE in
    ``v = log(x / M)`` accumulates::

        hi_sq  = int (sigma / lo_tau)**2 dx      (majorant of s_x**2)
        lo_sq  = int (sigma / hi_tau)**2 dx      (minorant of s_x**2)
        inv    = int 1 / lo_tau dx

    Returns the solution object, or None if the solver failed.
    """
    down = _sigma_trend(spec) == "down"

    def rhs(v, y):
        x = M * math.exp(v)
        a_int, b_int = y[0], y[1]
        sx = _sigma_cont(spec, x)
        lo_tau = tau_M + (b_int if down else a_int)
        hi_tau = tau_M + (a_int if down else b_int)
        return [x * sx, x * _sigma_cont(spec, x + 1.0),
                x * (sx / lo_tau) ** 2, x * (sx / hi_tau) ** 2, x / lo_tau]

    # B starts at int_{M+1}^{M+1} = 0, A at int_M^M = 0
    v_end = decades * math.log(10.0)
    atol = [1e-14 * tau_M, 1e-14 * tau_M, 1e-22, 1e-22, 1e-22]
    try:
        sol = integrate.solve_ivp(rhs, (0.0, v_end), [0.0] * 5, method="DOP853", rtol=1e-12, atol=atol)
    except OverflowError:
        return None
    if not sol.success:
        return None
    return sol


def _envelope_ratio(spec: SequenceSpec, M: int, tau_M: float, sol, which: str) -> np.ndarray:
    down = _sigma_trend(spec) == "down"
    xs = M * np.exp(sol.t)
    sig = np.array([_sigma_cont(spec, x) for x in xs])
    a_int, b_int = sol.y[0], sol.y[1]
    if which == "g":
        return sig / (tau_M + (b_int if down else a_int))
    return sig / (tau_M + (a_int if down else b_int))


def _nonincreasing(vals: np.ndarray) -> bool:
    return bool(np.all(vals[1:] <= vals[:-1] * (1 + 1e-12)))


def _delta_bracket(spec: SequenceSpec, M: int, tau_M: float) -> Optional[tuple]:
    """Bounds ``(lo, hi)`` on ``sum_{i>M} s_i**2``, or None if not yet usable at this ``M``.

    Needs the majorant ``g`` and minorant ``h`` of ``s_x`` to be nonincreasing
    on ``[M, inf)`` (checked on the solver grid), so that
    ``sum_{i>M} g(i)**2 <= int_M^inf g**2`` and
    ``sum_{i>M} h(i)**2 >= int_M^inf h**2 - h(M)**2``.  Past the integration
    end ``X`` (14 decades beyond ``M``) the majorant's remainder is bounded by
    ``K**2 / X`` with ``K`` twice the largest ``x g(x)`` seen on the grid.
    """
    sol = _envelope_integrals(spec, M, tau_M)
    if sol is None:
        return None
    g = _envelope_ratio(spec, M, tau_M, sol, "g")
    h = _envelope_ratio(spec, M, tau_M, sol, "h")
    xs = M * np.exp(sol.t)
    if not (_nonincreasing(g) and _nonincreasing(h)):
        return None
    K = 2.0 * float(np.max(xs * g))
    hi = float(sol.y[2, -1] + K * K / xs[-1])
    lo = float(sol.y[3, -1] - h[0] ** 2)
    return max(lo, 0.0), hi


def _delta_constant(spec: SequenceSpec, n: int) -> float:
    # sum_{i>n} (c / (tau0 + c i))**2 = trigamma(n + 1 + tau0 / c)
    c = spec.p["c"]
    return float(special.polygamma(1, n + 1 + spec.tau0 / c))


def delta_tail(spec: SequenceSpec, n: int, tol: float = 1e-10, *, max_terms: int = 1 << 24) -> float:
    """``delta_n = sum_{i>n} (sigma_i / tau_i)**2`` to absolute error ``< tol``.

    Returns ``inf`` when the square sum diverges.  Constant sequences use the
    trigamma closed form.  Otherwise the terms are summed exactly up to some
    ``M`` and the rest is bracketed by integrals of ``(sigma / tau)**2`` with
    ``tau`` replaced by its lower and upper integral envelopes; ``M`` grows
    until half the bracket width is below ``tol``, and the midpoint is
    returned.
    """
    n = _check_nonneg(n)
    if not tol > 0:
        raise ValueError("tol must be positive")
    verdict = evaluate_condition(spec, Condition.SQUARE_SUM_DIVERGES)
    if verdict.value is Verdict.INCONCLUSIVE:
        raise InconclusiveError("cannot decide whether the square sum converges: " + verdict.evidence.get("reason", ""))
    if verdict.value is Verdict.HOLDS:
        return math.inf
    if spec.family is Family.CONSTANT:
        return _delta_constant(spec, n)
    M = max(n, 64, len(spec.table))
    while True:
        t = tables(spec, M)
        partial = math.fsum((t.s[n + 1:M + 1] ** 2).tolist())
        bracket = _delta_bracket(spec, M, float(t.tau[M]))
        if bracket is not None:
            lo, hi = bracket
            if (hi - lo) / 2.0 < tol:
                return partial + (hi + lo) / 2.0
        if M >= max_terms:
            raise ValueError(f"delta_{n} could not be bracketed to tol={tol} within {max_terms} terms")
        M = min(4 * M, max_terms)


def inverse_tau_tail(spec: SequenceSpec, M: int) -> float:
    """Upper bound on ``sum_{k>M} 1 / tau_k``; finite only when that series converges."""
    t = tables(spec, M)
    if t.saturated[M]:
        return 0.0
    tau_M = float(t.tau[M])
    fam = spec.family
    ext = spec.extrapolation
    if fam is Family.GEOMETRIC or (fam is Family.CUSTOM and ext is not None and ext.kind == "geometric"):
        # tau_{M+j} >= sigma_{M+j} = sigma_M r**j
        ratio = spec.p["r"] if fam is Family.GEOMETRIC else ext.param
        return math.exp(-float(t.log_sigma[M])) / (ratio - 1.0)
    if fam is Family.EXP_SQRT:
        # tau_k >= sigma_k = exp(sqrt(k)); sum_{k>M} <= int_M^inf exp(-sqrt(x)) dx
        rt = math.sqrt(M)
        return 2.0 * (rt + 1.0) * math.exp(-rt)
    if fam is Family.CUSTOM and ext is not None and ext.kind == "expsqrt":
        rt = math.sqrt(M)
        return 2.0 * (rt + 1.0) * math.exp(-rt) * math.exp(math.sqrt(len(spec.table))) / spec.table[-1]
    sol = _envelope_integrals(spec, M, tau_M)
    if sol is None:
        return math.inf
    xs = M * np.exp(sol.t)
    inv = _envelope_ratio(spec, M, tau_M, sol, "g") / np.array([_sigma_cont(spec, x) for x in xs])
    # remainder past X = xs[-1]: if 1/lo_tau decays like x**-p with p > 1 there,
    # int_X^inf <= X / ((p - 1) lo_tau(X)); p is read off the last solver steps
    tail = slice(-4, None)
    slopes = -np.diff(np.log(inv[tail])) / np.diff(np.log(xs[tail]))
    p_loc = float(slopes.min()) if slopes.size else 0.0
    if not p_loc > 1.0 + 1e-6:
        return math.inf
    rem = xs[-1] * inv[-1] / (p_loc - 1.0)
    return float(sol.y[4, -1] + rem)


# ---------------------------------------------------------------------------
# conditions


@dataclass(frozen=True)
class ConditionVerdict:
    condition_id: Condition
    value: Verdict
    evidence: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"condition_id": self.condition_id.value, "value": self.value.value, "evidence": self.evidence}


def _builtin_table(fam: Family, p: dict) -> dict:
    H, F = Verdict.HOLDS, Verdict.FAILS
    C = Condition
    if fam is Family.CONSTANT:
        row = dict(sq=F, harm=H, liminf=F, rc1=H, rc2=H, vanish=F)
    elif fam is Family.LOG_POWER:
        row = dict(sq=F, harm=H if p["a"] <= 1 else F, liminf=F, rc1=H, rc2=H, vanish=F)
    elif fam is Family.POWER_LAW:
        row = dict(sq=F, harm=F, liminf=F, rc1=H, rc2=F, vanish=F)
    elif fam is Family.GEOMETRIC:
        row = dict(sq=H, harm=F, liminf=H, rc1=F, rc2=F, vanish=F)
    elif fam is Family.EXP_SQRT:
        row = dict(sq=H, harm=F, liminf=F, rc1=F, rc2=F, vanish=F)
    elif fam is Family.DECAY_POWER:
        row = dict(sq=F, harm=H, liminf=F, rc1=H if p["a"] < 1 else F, rc2=F, vanish=H)
    else:
        raise AssertionError(fam)
    return {
        C.SQUARE_SUM_DIVERGES: row["sq"],
        C.HARMONIC_TAU_DIVERGES: row["harm"],
        C.LIMINF_RATIO_POSITIVE: row["liminf"],
        C.RC1: row["rc1"],
        C.RC2: row["rc2"],
        C.SIGMA_VANISHES: row["vanish"],
    }


def _analytic_liminf(spec: SequenceSpec) -> Optional[float]:
    if spec.family is Family.GEOMETRIC:
        r = spec.p["r"]
        return (r - 1.0) / r
    if spec.family is Family.CUSTOM and spec.extrapolation is not None and spec.extrapolation.kind == "geometric":
        r = spec.extrapolation.param
        return (r - 1.0) / r
    if spec.family is Family.CUSTOM:
        return None
    return 0.0


def _probe_points(n_max: int, count: int = 25) -> np.ndarray:
    return np.unique(np.geomspace(1, n_max, count).astype(np.int64))


def _safe_exp(x: float) -> float:
    return math.exp(x) if x < 709.0 else math.inf


def _evidence(spec: SequenceSpec, cond: Condition, probe_max: int, g: Callable[[int], int]) -> dict:
    pts = _probe_points(probe_max)
    if cond is Condition.RC2:
        # ratios sigma_i / sigma_n over the window [n, n g(n)], log space
        lo, hi = math.inf, -math.inf
        n_top = max(2, int(math.isqrt(probe_max)))
        for n in _probe_points(n_top, 12):
            end = max(int(n), int(n) * int(g(int(n))))
            ii = np.unique(np.geomspace(n, end, 16).astype(np.int64))
            diff = log_sigma_array(spec, ii) - log_sigma(spec, int(n))
            lo, hi = min(lo, float(diff.min())), max(hi, float(diff.max()))
        return {"alpha_envelope": _safe_exp(lo), "beta_envelope": _safe_exp(hi), "log_alpha": lo,
                "log_beta": hi, "probe_max_n": n_top, "witness": "n*g(n)"}
    t = tables(spec, probe_max)
    if cond is Condition.SQUARE_SUM_DIVERGES:
        # terms (sigma_{n+1} / tau_n)**2 = (s/(1-s))**2 evaluated at n+1
        s = t.s[1:]
        terms = (s / t.r[1:]) ** 2
        cums = np.cumsum(terms)
        return {"partial_sums": {int(k): float(cums[k - 1]) for k in pts}}
    if cond is Condition.HARMONIC_TAU_DIVERGES:
        cums = np.cumsum(np.exp(-t.log_tau[1:]))
        return {"partial_sums": {int(k): float(cums[k - 1]) for k in pts}}
    if cond is Condition.LIMINF_RATIO_POSITIVE:
        tail = t.s[max(1, probe_max // 2):]
        out = {"tail_min_ratio": float(tail.min()), "ratio_at_probe_max": float(t.s[probe_max])}
        lim = _analytic_liminf(spec)
        if lim is not None:
            out["liminf"] = lim
        return out
    if cond is Condition.RC1:
        ns = t.s[1:] * np.arange(1, probe_max + 1)
        pmin, pmax = float(ns.min()), float(ns.max())
        return {"probe_min": pmin, "probe_max": pmax, "a": pmin / 2.0, "b": 2.0 * pmax,
                "tail_n_times_ratio": float(ns[-1])}
    ls = t.log_sigma[1:]
    return {"sigma_at_probe_max": float(math.exp(ls[-1])) if ls[-1] < 700 else math.inf,
            "log_sigma_at_probe_max": float(ls[-1])}


def _custom_agreement(spec: SequenceSpec, rtol: float) -> tuple:
    """Check that the table's last quarter is consistent with the extrapolation rule."""
    L = len(spec.table)
    if L < 8:
        return True, 0.0
    anchor = (3 * L) // 4
    ref_log = math.log(spec.table[anchor - 1])
    ns = np.arange(anchor, L + 1)
    # predict sigma_n from sigma_anchor with the rule's shape
    pred = ref_log + _extrap_log_factor(spec.extrapolation, anchor, ns)
    actual = np.log(np.asarray(spec.table[anchor - 1:]))
    err = float(np.max(np.abs(np.expm1(actual - pred))))
    return err <= rtol, err


def evaluate_condition(spec: SequenceSpec, condition_id, *, g: Optional[Callable[[int], int]] = None,
                       probe_max: int = 4096, probe_rtol: float = 0.05) -> ConditionVerdict:
    """Classify one summability/regularity condition for ``spec``.

    Built-in families are decided from the table in the module docstring;
    the evidence is numeric probing and never decides the verdict.  ``g`` is
    the RC2 window witness (default ``g(n) = n``).
    """
    cond = Condition(condition_id)
    if g is None:
        g = _default_witness
    if spec.family is not Family.CUSTOM:
        value = _builtin_table(spec.family, spec.p)[cond]
        return ConditionVerdict(cond, value, _evidence(spec, cond, probe_max, g))
    L = len(spec.table)
    if spec.extrapolation is None:
        ev = _evidence(spec, cond, L, g) if cond is not Condition.RC2 else {}
        ev["reason"] = "no extrapolation rule; a finite table cannot decide an asymptotic condition"
        return ConditionVerdict(cond, Verdict.INCONCLUSIVE, ev)
    ok, err = _custom_agreement(spec, probe_rtol)
    ev = _evidence(spec, cond, max(probe_max, L), g)
    ev["extrapolation"] = {"kind": spec.extrapolation.kind, "param": spec.extrapolation.param}
    ev["table_rule_discrepancy"] = err
    if not ok:
        ev["reason"] = f"table tail departs from the extrapolation rule by {err:.3g} (> {probe_rtol})"
        return ConditionVerdict(cond, Verdict.INCONCLUSIVE, ev)
    value = _builtin_table(spec.extrapolation.reference(spec.tau0).family,
                           spec.extrapolation.reference(spec.tau0).p)[cond]
    return ConditionVerdict(cond, value, ev)


def _default_witness(n: int) -> int:
    return n


def evaluate_all(spec: SequenceSpec, **kwargs) -> dict:
    return {c: evaluate_condition(spec, c, **kwargs) for c in Condition}
