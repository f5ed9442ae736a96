import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dirtyperiod.circuit import CircuitError
from dirtyperiod.lowering import fit_slope
from dirtyperiod.shor import (FactoringFailure, ShorParams, allocate, apply_fixup,
                              build_period_finding, classical_precheck, continued_fractions,
                              count_program, factor, multiplicative_order, sample_phase)


def _convergent_denominators(s: int, N: int, R: int) -> list:
    """Brute-force oracle: best approximations of the second kind are the convergents."""
    x = Fraction(s, N)
    best, out = None, []
    for q in range(1, R):
        d = min(abs(q * x - p) for p in (math.floor(q * x), math.floor(q * x) + 1))
        if best is None or d < best:
            best = d
            out.append(q)
    return sorted({q for q in out if q > 1}, reverse=True)


# -- layout and budget --------------------------------------------------------

@pytest.mark.parametrize("n", [2, 4, 5, 6])
def test_budget_is_n_plus_two_clean_and_n_minus_one_dirty(n):
    layout, budget = allocate(n)
    assert (budget.clean, budget.dirty, budget.total) == (n + 2, n - 1, 2 * n + 1)
    wires = {layout.phase, *layout.work, *layout.ancilla}
    assert len(wires) == layout.width == 2 * n + 1


@pytest.mark.parametrize("R, B", [(15, 5), (14, 3), (15, 1), (15, 15), (1, 2)])
def test_params_validation(R, B):
    with pytest.raises(CircuitError):
        ShorParams(R, B)


def test_default_phase_bits_are_twice_the_register():
    assert ShorParams(21, 2).bits == 10
    assert ShorParams(21, 2, p=6).bits == 6


def test_rounds_run_from_the_largest_power_down():
    program = build_period_finding(ShorParams(21, 2, p=4), lazy=True)
    assert program.multipliers == [pow(2, 8, 21), pow(2, 4, 21), 4, 2]


# -- continued fractions ------------------------------------------------------

def test_continued_fraction_examples():
    assert continued_fractions(192, 256, 15) == [4]
    assert continued_fractions(128, 256, 15) == [2]
    assert continued_fractions(0, 256, 15) == []


def test_period_six_is_recovered_for_21():
    # 1/6 and 5/6 of the 10-bit phase range
    assert 6 in continued_fractions(171, 1024, 21)
    assert 6 in continued_fractions(853, 1024, 21)
    assert pow(2, 6, 21) == 1


def test_continued_fractions_reject_out_of_range_sample():
    with pytest.raises(ValueError):
        continued_fractions(256, 256, 15)


@given(st.sampled_from([15, 21, 33, 35, 55, 63]), st.integers(4, 12), st.data())
@settings(max_examples=200, deadline=None)
def test_continued_fractions_match_brute_force(R, p, data):
    N = 1 << p
    s = data.draw(st.integers(0, N - 1))
    assert continued_fractions(s, N, R) == _convergent_denominators(s, N, R)


@pytest.mark.parametrize("B, R, order", [(2, 15, 4), (7, 15, 4), (2, 21, 6), (4, 21, 3),
                                         (2, 55, 20), (14, 15, 2)])
def test_multiplicative_order(B, R, order):
    assert multiplicative_order(B, R) == order


# -- factoring ---------------------------------------------------------------

def test_factor_15():
    res = factor(15, max_trials=10, seed=0)
    assert res.factors == (3, 5)


def test_factor_21():
    res = factor(21, max_trials=20, seed=2)
    assert res.factors == (3, 7)


def test_gcd_shortcut_needs_no_period():
    # some seed draws a base sharing a factor with 21
    for seed in range(50):
        res = factor(21, max_trials=20, seed=seed)
        if res.method == "gcd":
            assert len(res.periods) == res.trials - 1
            assert math.gcd(res.bases[-1], 21) > 1
            return
    pytest.fail("no seed in 0..49 drew a shared-factor base")


def test_classical_precheck():
    assert classical_precheck(22).factors == (2, 11)
    assert classical_precheck(27).factors == (3, 9)
    assert classical_precheck(49).method == "prime power"
    assert classical_precheck(15) is None
    with pytest.raises(ValueError):
        classical_precheck(13)


def test_factor_refuses_large_moduli():
    with pytest.raises(ValueError):
        factor(65)


def test_exhausted_trials_raise_with_samples():
    with pytest.raises(FactoringFailure) as err:
        factor(21, max_trials=1, seed=0, p=1)
    assert isinstance(err.value.samples, list)


# -- dirty ancilla restoration -------------------------------------------------

@pytest.mark.parametrize("R", [15, 21])
def test_fixup_restores_every_dirty_value(R):
    program = build_period_finding(ShorParams(R, 2))
    lay = program.layout
    for v in range(1 << (len(lay.ancilla) - 1)):
        for seed in range(64 if R == 15 else 8):
            state = sample_phase(program, seed, dirty_value=v).state
            assert state.register_distribution(lay.ancilla)[v] == pytest.approx(1.0)
            assert state.register_distribution(lay.work)[0] == pytest.approx(1.0)
            assert state.probability_one(lay.phase) == pytest.approx(0.0)


def test_fixup_of_one_is_only_a_reset():
    program = build_period_finding(ShorParams(15, 2), lazy=True)
    ops = apply_fixup(program, 1)
    assert len(ops) == 1


def test_fixup_rejects_non_invertible_value():
    program = build_period_finding(ShorParams(15, 2), lazy=True)
    with pytest.raises(CircuitError):
        apply_fixup(program, 5)


def test_ancilla_msb_must_start_clean():
    program = build_period_finding(ShorParams(15, 2))
    with pytest.raises(CircuitError):
        sample_phase(program, 0, dirty_value=8)


def test_zero_phase_bits_measure_nothing():
    program = build_period_finding(ShorParams(15, 2, p=0))
    res = sample_phase(program, 0, dirty_value=5)
    assert res.bits("phase") == []
    assert res.state.register_distribution(program.layout.ancilla)[5] == pytest.approx(1.0)


# -- spectrum ------------------------------------------------------------------

def _near_peaks(samples, N, order, tol=2):
    peaks = [k * N / order for k in range(order + 1)]
    return np.mean([min(abs(s - c) for c in peaks) <= tol for s in samples])


def test_spectrum_of_15_sits_on_multiples_of_64():
    program = build_period_finding(ShorParams(15, 2))
    rng = np.random.default_rng(5)
    samples = [sample_phase(program, rng).value("phase") for _ in range(4096)]
    assert _near_peaks(samples, 256, 4) >= 0.7
    assert pow(2, 4, 15) == 1


def test_spectrum_of_21_sits_near_sixths():
    program = build_period_finding(ShorParams(21, 2))
    rng = np.random.default_rng(6)
    samples = [sample_phase(program, rng).value("phase") for _ in range(1024)]
    assert _near_peaks(samples, 1024, 6) >= 0.7


# -- scaling -----------------------------------------------------------------

def test_program_gate_count_grows_below_n_to_the_3_5():
    sizes, moduli = [4, 6, 8], [13, 55, 221]
    counts = [count_program(ShorParams(R, 2)).gate_count for R in moduli]
    assert fit_slope(sizes, counts) <= 3.5
