from __future__ import annotations

import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tdurn.sequence import (
    Condition,
    Extrapolation,
    Family,
    InconclusiveError,
    SequenceSpec,
    Verdict,
    delta_tail,
    evaluate_all,
    evaluate_condition,
    inverse_tau_tail,
    log_tau,
    read_custom_table,
    sigma,
    step_ratios,
    tables,
    tau,
)

BUILTINS = [
    SequenceSpec.constant(1.0, 2.0),
    SequenceSpec.constant(3.5, 0.7),
    SequenceSpec.log_power(2.0),
    SequenceSpec.log_power(0.5),
    SequenceSpec.power_law(1.0),
    SequenceSpec.power_law(0.5, 1.0),
    SequenceSpec.geometric(2.0),
    SequenceSpec.geometric(1.1, 5.0),
    SequenceSpec.exp_sqrt(),
    SequenceSpec.decay_power(0.5),
    SequenceSpec.decay_power(2.0),
]


def test_sigma_examples():
    assert sigma(SequenceSpec.constant(1.0), 5) == 1
    assert sigma(SequenceSpec.geometric(2.0), 3) == 8
    assert sigma(SequenceSpec.decay_power(2.0), 4) == 0.0625


def test_sigma_rejects_zero():
    with pytest.raises(ValueError):
        sigma(SequenceSpec.constant(1.0), 0)


def test_tau_examples():
    assert tau(SequenceSpec.constant(1.0, 2.0), 3) == 5
    assert tau(SequenceSpec.geometric(2.0, 2.0), 3) == 16
    for spec in BUILTINS:
        assert tau(spec, 0) == spec.tau0


def test_step_ratio_examples():
    s, r = step_ratios(SequenceSpec.constant(1.0, 2.0), 3)
    assert s == pytest.approx(0.2, abs=1e-15) and r == pytest.approx(0.8, abs=1e-15)
    s, r = step_ratios(SequenceSpec.geometric(2.0, 2.0), 3)
    assert s == 0.5 and r == 0.5


def test_geometric_far_out_no_overflow():
    spec = SequenceSpec.geometric(2.0, 2.0)
    s, r = step_ratios(spec, 2000)
    assert math.isfinite(s) and math.isfinite(r)
    # exact: 2^n / (2^{n+1}) with tau_n = 2^{n+1}
    assert s == pytest.approx(0.5, abs=1e-15) and r == pytest.approx(0.5, abs=1e-15)
    assert log_tau(spec, 2000) == pytest.approx(2001 * math.log(2), rel=1e-14)
    value, saturated = tau(spec, 2000, with_flag=True)
    assert saturated and value == np.finfo(float).max


def _exact_sigma(spec, n):
    p = spec.p
    if spec.family is Family.CONSTANT:
        return Fraction(p["c"])
    if spec.family is Family.GEOMETRIC:
        return Fraction(p["r"]) ** n
    if spec.family is Family.POWER_LAW:
        return Fraction(n) ** int(p["a"])
    if spec.family is Family.DECAY_POWER:
        return 1 / Fraction(n) ** int(p["a"])
    raise NotImplementedError


@pytest.mark.parametrize("spec", [
    SequenceSpec.constant(1.0, 2.0),
    SequenceSpec.geometric(2.0, 2.0),
    SequenceSpec.geometric(3.0, 0.5),
    SequenceSpec.power_law(2.0, 1.0),
    SequenceSpec.decay_power(2.0, 2.0),
])
def test_ratios_match_rational_arithmetic(spec):
    T = Fraction(spec.tau0)
    for n in range(1, 61):
        sig = _exact_sigma(spec, n)
        prev, T = T, T + sig
        s, r = step_ratios(spec, n)
        assert s == pytest.approx(float(sig / T), rel=1e-14)
        assert r == pytest.approx(float(prev / T), rel=1e-14)


@pytest.mark.parametrize("spec", BUILTINS, ids=lambda s: s.family.value + s.params_string())
def test_ratio_identity_and_ranges(spec):
    t = tables(spec, 10_000)
    s, r = t.s[1:], t.r[1:]
    assert np.all(np.abs(s + r - 1.0) <= 1e-12)
    assert np.all((s > 0) & (s < 1) & (r > 0) & (r <= 1))
    assert np.all(np.isfinite(t.log_tau))
    assert np.all(np.diff(t.log_tau) > 0)


@pytest.mark.parametrize("spec", BUILTINS, ids=lambda s: s.family.value + s.params_string())
def test_additivity(spec):
    t = tables(spec, 10_000)
    n = np.arange(1, 10_001)
    if spec.family in (Family.GEOMETRIC, Family.EXP_SQRT):
        # log tau_n = logaddexp(log tau_{n-1}, log sigma_n)
        lhs = t.log_tau[1:]
        rhs = np.logaddexp(t.log_tau[:-1], t.log_sigma[1:])
        assert np.max(np.abs(lhs - rhs) / np.abs(lhs)) <= 1e-12
    else:
        diff = t.tau[1:] - t.tau[:-1]
        sig = np.array([sigma(spec, int(k)) for k in n[::97]])
        assert np.max(np.abs(diff[::97] - sig) / t.tau[1:][::97]) <= 1e-12


def test_delta_constant_closed_form():
    # sum_{i>=1} 1/(i+2)^2 = pi^2/6 - 1 - 1/4
    d = delta_tail(SequenceSpec.constant(1.0, 2.0), 0, 1e-9)
    assert d == pytest.approx(math.pi ** 2 / 6 - 1.25, abs=1e-12)
    assert abs(d - 0.394934) <= 1e-6


def test_delta_constant_direct_sum():
    # brute force to 10^6 plus the integral bounds on the rest
    i = np.arange(1, 1_000_001, dtype=float)
    head = math.fsum((1.0 / (i + 2.0) ** 2).tolist())
    d = delta_tail(SequenceSpec.constant(1.0, 2.0), 0)
    assert head + 1 / (1_000_003) <= d + 1e-12
    assert d <= head + 1 / (1_000_002) + 1e-12


def test_delta_geometric_infinite():
    assert delta_tail(SequenceSpec.geometric(2.0, 2.0), 0) == math.inf
    assert delta_tail(SequenceSpec.exp_sqrt(), 3) == math.inf


def _mp_delta(term, n):
    # Richardson extrapolation misjudges half-integer power tails; use Euler-Maclaurin
    mpmath.mp.dps = 30
    return float(mpmath.nsum(term, [n + 1, mpmath.inf], method="euler-maclaurin"))


def test_delta_power_law_against_mpmath():
    # sigma_i / tau_i = i / (2 + i (i + 1) / 2)
    ref = _mp_delta(lambda i: (i / (2 + i * (i + 1) / 2)) ** 2, 0)
    assert delta_tail(SequenceSpec.power_law(1.0, 2.0), 0) == pytest.approx(ref, abs=1e-9)


def test_delta_decay_power_against_mpmath():
    # tau_i = 2 + zeta(2) - psi_1(i + 1)
    z2 = mpmath.zeta(2)
    ref = _mp_delta(lambda i: (i ** -2 / (2 + z2 - mpmath.psi(1, i + 1))) ** 2, 5)
    assert delta_tail(SequenceSpec.decay_power(2.0, 2.0), 5) == pytest.approx(ref, abs=1e-10)
    zh = mpmath.zeta(0.5)
    ref = _mp_delta(lambda i: (i ** -0.5 / (2 + zh - mpmath.zeta(0.5, i + 1))) ** 2, 0)
    assert delta_tail(SequenceSpec.decay_power(0.5, 2.0), 0) == pytest.approx(ref, abs=1e-9)


def test_delta_log_power_bracketed_by_brute_force():
    spec = SequenceSpec.log_power(2.0, 2.0)
    N = 2_000_000
    i = np.arange(1, N + 1, dtype=float)
    sig = np.log(i + 2.0) ** 2
    tau_ = 2.0 + np.cumsum(sig)
    head = math.fsum(((sig / tau_) ** 2).tolist())
    # terms after N are below (4 / i)^2 for this family once i is large
    d = delta_tail(spec, 0)
    assert head <= d <= head + 16.0 / N


def test_delta_decreasing_example():
    spec = SequenceSpec.decay_power(2.0, 2.0)
    d4, d5 = delta_tail(spec, 4, 1e-10), delta_tail(spec, 5, 1e-10)
    assert 0 < d5 < d4
    assert d4 - d5 == pytest.approx(step_ratios(spec, 5)[0] ** 2, rel=1e-6)


@settings(max_examples=12, deadline=None)
@given(st.sampled_from([SequenceSpec.constant(2.0, 1.0), SequenceSpec.power_law(1.5, 2.0),
                        SequenceSpec.decay_power(0.5, 2.0)]), st.integers(0, 400))
def test_delta_monotone(spec, n):
    a, b = delta_tail(spec, n), delta_tail(spec, n + 1)
    assert a >= b >= 0


def test_delta_rejects_bad_tol():
    with pytest.raises(ValueError):
        delta_tail(SequenceSpec.constant(1.0), 0, 0.0)


def test_condition_examples():
    c = evaluate_condition(SequenceSpec.constant(1.0, 2.0), Condition.HARMONIC_TAU_DIVERGES)
    assert c.value is Verdict.HOLDS
    c = evaluate_condition(SequenceSpec.power_law(1.0, 2.0), Condition.HARMONIC_TAU_DIVERGES)
    assert c.value is Verdict.FAILS
    c = evaluate_condition(SequenceSpec.geometric(2.0, 2.0), Condition.LIMINF_RATIO_POSITIVE)
    assert c.value is Verdict.HOLDS
    # sigma_n / tau_n = 2^n / 2^{n+1} exactly for n <= 60
    exact = [Fraction(2) ** n / (Fraction(2) ** (n + 1)) for n in range(1, 61)]
    assert c.evidence["liminf"] == float(min(exact)) == 0.5


def test_rc1_envelope_for_constant():
    c = evaluate_condition(SequenceSpec.constant(1.0, 2.0), Condition.RC1, probe_max=1000)
    assert c.value is Verdict.HOLDS
    # n * sigma_n / tau_n = n / (n + 2), smallest at n = 1
    assert c.evidence["probe_min"] == pytest.approx(1 / 3)
    assert c.evidence["a"] == pytest.approx(1 / 6)
    assert 1.0 <= c.evidence["b"] < 2.0


def test_rc2_evidence_envelope():
    c = evaluate_condition(SequenceSpec.constant(1.0), Condition.RC2)
    assert c.evidence["alpha_envelope"] == c.evidence["beta_envelope"] == 1.0
    c = evaluate_condition(SequenceSpec.power_law(1.0), Condition.RC2)
    assert c.value is Verdict.FAILS and c.evidence["beta_envelope"] > 10
    c = evaluate_condition(SequenceSpec.geometric(2.0), Condition.RC2)
    assert c.evidence["beta_envelope"] == math.inf


def test_custom_witness_changes_evidence():
    spec = SequenceSpec.power_law(1.0)
    narrow = evaluate_condition(spec, Condition.RC2, g=lambda n: 2)
    assert narrow.evidence["beta_envelope"] == pytest.approx(2.0, rel=0.05)


@pytest.mark.parametrize("spec", BUILTINS, ids=lambda s: s.family.value + s.params_string())
def test_builtins_never_inconclusive(spec):
    for v in evaluate_all(spec, probe_max=256).values():
        assert v.value is not Verdict.INCONCLUSIVE


@settings(max_examples=25, deadline=None)
@given(st.sampled_from(["logpower", "powerlaw", "decaypower"]), st.floats(0.05, 4.0), st.floats(0.1, 10.0))
def test_builtin_grid_never_inconclusive(name, a, tau0):
    spec = SequenceSpec.from_name(name, tau0, a=a)
    for c in Condition:
        assert evaluate_condition(spec, c, probe_max=64).value is not Verdict.INCONCLUSIVE


def test_inverse_tau_tail_bounds():
    spec = SequenceSpec.geometric(2.0, 2.0)
    # sum_{k > 10} 2^{-(k+1)} = 2^{-11}
    assert inverse_tau_tail(spec, 10) >= 2.0 ** -11
    assert inverse_tau_tail(spec, 10) <= 2.0 ** -10
    spec = SequenceSpec.power_law(1.0, 2.0)
    k = np.arange(1001, 5_000_001, dtype=float)
    head = math.fsum((1.0 / (2.0 + k * (k + 1) / 2)).tolist())
    assert inverse_tau_tail(spec, 1000) >= head
    assert inverse_tau_tail(spec, 1000) <= 2.0 / 1000 * 1.01
    assert inverse_tau_tail(SequenceSpec.constant(1.0), 1000) == math.inf


def test_custom_prefix_matches_builtin():
    ref = SequenceSpec.power_law(1.0, 2.0)
    custom = SequenceSpec.custom([float(n) for n in range(1, 201)], 2.0, Extrapolation("power", 1.0))
    a, b = tables(ref, 200), tables(custom, 200)
    assert np.array_equal(a.tau, b.tau)
    assert np.array_equal(a.s[1:], b.s[1:]) and np.array_equal(a.r[1:], b.r[1:])
    for n in (1, 17, 200):
        assert sigma(custom, n) == sigma(ref, n)


def test_custom_extrapolation_continues_shape():
    custom = SequenceSpec.custom([float(n) for n in range(1, 51)], 2.0, Extrapolation("power", 1.0))
    assert sigma(custom, 80) == pytest.approx(80.0, rel=1e-12)
    geo = SequenceSpec.custom([2.0 ** n for n in range(1, 21)], 2.0, Extrapolation("geometric", 2.0))
    assert sigma(geo, 30) == pytest.approx(2.0 ** 30, rel=1e-12)


def test_custom_verdicts():
    ones = SequenceSpec.custom([1.0] * 100, 2.0, Extrapolation("constant"))
    assert evaluate_condition(ones, Condition.HARMONIC_TAU_DIVERGES).value is Verdict.HOLDS
    bare = SequenceSpec.custom([1.0] * 100, 2.0)
    assert all(v.value is Verdict.INCONCLUSIVE for v in evaluate_all(bare).values())
    with pytest.raises(InconclusiveError):
        delta_tail(bare, 0)
    # table grows linearly but the rule claims constant
    liar = SequenceSpec.custom([float(n) for n in range(1, 101)], 2.0, Extrapolation("constant"))
    assert evaluate_condition(liar, Condition.RC2).value is Verdict.INCONCLUSIVE


def test_custom_delta_matches_builtin():
    custom = SequenceSpec.custom([1.0] * 64, 2.0, Extrapolation("constant"))
    assert delta_tail(custom, 0) == pytest.approx(math.pi ** 2 / 6 - 1.25, abs=1e-9)


def test_read_custom_table(tmp_path):
    f = tmp_path / "seq.txt"
    f.write_text("# demo\n# extrapolate: power -0.5\n" + "".join(f"{n} {n ** -0.5!r}\n" for n in range(1, 41)))
    spec = read_custom_table(f, 2.0)
    assert spec.extrapolation == Extrapolation("power", -0.5)
    assert sigma(spec, 100) == pytest.approx(0.1, rel=1e-12)
    assert evaluate_condition(spec, Condition.SIGMA_VANISHES).value is Verdict.HOLDS
    f.write_text("1 1.0\n3 1.0\n")
    with pytest.raises(ValueError):
        read_custom_table(f, 2.0)


@pytest.mark.parametrize("bad", [
    lambda: SequenceSpec.constant(0.0),
    lambda: SequenceSpec.geometric(1.0),
    lambda: SequenceSpec.power_law(-1.0),
    lambda: SequenceSpec.constant(1.0, tau0=0.0),
    lambda: SequenceSpec.custom([1.0, -1.0], 1.0),
    lambda: SequenceSpec.from_name("geometric", 2.0, a=2.0),
])
def test_spec_validation(bad):
    with pytest.raises(ValueError):
        bad()


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(BUILTINS), st.integers(1, 3000))
def test_scalar_accessors_agree_with_tables(spec, n):
    s, r = step_ratios(spec, n)
    assert abs(s + r - 1.0) <= 1e-12
    assert log_tau(spec, n) > log_tau(spec, n - 1)
