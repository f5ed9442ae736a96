from math import gcd

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from dirtyperiod import modular
from dirtyperiod.circuit import Builder, CircuitError
from dirtyperiod.registry import Params, build_instance, instance
from dirtyperiod.sim import check_contract, extract_permutation, register_values

from test_arith import _run


def _perm_on(inst, reg_name: str) -> np.ndarray:
    """Permutation a single-register instance induces on its register, spare wires at 0."""
    perm = extract_permutation(inst.circuit)
    reg = inst.operands[reg_name]
    states = np.zeros(1 << len(reg), dtype=np.int64)
    for i, w in enumerate(reg):
        states |= ((np.arange(1 << len(reg)) >> i) & 1) << w
    return register_values(perm[states], reg)


# -- flips ------------------------------------------------------------------

def test_bi_flip_example():
    assert _run(instance("bi_flip", Params(n=3, K=4)), {"t": 1}) == {"t": 2}


def test_bi_flip_is_self_inverse_and_preserves_side():
    for K in range(17):
        f = _perm_on(instance("bi_flip", Params(n=4, K=K)), "t")
        assert np.array_equal(f[f], np.arange(16))
        t = np.arange(16)
        assert np.array_equal(t < K, f < K)


def test_pivot_flip_at_four():
    f = _perm_on(instance("pivot_flip", Params(n=3, K=4)), "t")
    assert list(f) == [3, 2, 1, 0, 4, 5, 6, 7]


@pytest.mark.parametrize("K", [0, 1])
def test_trivial_pivots_emit_nothing(K):
    b = Builder(5)
    modular.pivot_flip(b, K, (0, 1, 2))
    assert not b.gates


def test_pivot_flip_exhaustive_m4_with_controls():
    for K in range(17):
        for c in (0, 1):
            assert instance("pivot_flip", Params(n=4, K=K, c=c)).verify()


def test_register_pivot_flip_target_larger_than_pivot():
    assert instance("pivot_flip", Params(n=4, m=2, c=1)).verify()
    with pytest.raises(CircuitError):
        modular.pivot_flip(Builder(8), (0, 1, 2), (3, 4))


# -- modular offset / addition ---------------------------------------------

def test_mod_offset_example():
    assert _run(instance("mod_offset", Params(R=7, K=3)), {"t": 5}) == {"t": 1}


def test_mod_offset_uses_two_dirty_wires():
    inst = instance("mod_offset", Params(R=7, K=3))
    assert inst.extra == 2
    assert inst.verify().checked == 7 * 4


def test_mod_offset_zero_is_identity():
    b = Builder(6)
    modular.mod_offset(b, 0, 7, (0, 1, 2))
    assert not b.gates


@pytest.mark.parametrize("R", [5, 7, 9, 15])
def test_mod_offset_exhaustive(R):
    for K in range(R):
        for flag in (False, True):
            n = modular.register_size(R)
            b = Builder(n + 3)
            t, c = tuple(range(n)), (n,)
            with b.op(t, c):
                modular.mod_offset(b, K, R, t, c, biflip_at_modulus=flag)
            circ = b.build()
            extract_permutation(circ)  # bijective on the whole space
            v = check_contract(circ, {"t": t}, lambda d: {"t": (d["t"] + K) % R},
                               lambda d: d["t"] < R, c)
            assert v, (R, K, flag)


def test_three_pivot_flips_compose_to_modular_offset():
    R, n = 11, 4
    for K in range(R):
        f1 = _perm_on(instance("pivot_flip", Params(n=n, K=R - K)), "t")
        f2 = _perm_on(instance("pivot_flip", Params(n=n, K=R)), "t")
        f3 = _perm_on(instance("pivot_flip", Params(n=n, K=K)), "t")
        x = np.arange(R)
        assert np.array_equal(f3[f2[f1[x]]], (x + K) % R)


def test_mod_offset_pairs_cancel():
    R = 13
    for K in range(1, R):
        a = _perm_on(instance("mod_offset", Params(R=R, K=K)), "t")
        b = _perm_on(instance("mod_offset", Params(R=R, K=R - K)), "t")
        x = np.arange(R)
        assert np.array_equal(b[a[x]], x)


def test_mod_add_example():
    inst = instance("mod_add", Params(R=7))
    assert _run(inst, {"x": 4, "y": 5}) == {"x": 4, "y": 2}


@pytest.mark.parametrize("R", [5, 7])
def test_mod_add_exhaustive(R):
    for c in (0, 1):
        assert instance("mod_add", Params(R=R, c=c)).verify()


def test_mod_add_dirty_need_does_not_grow_with_controls():
    for c in range(4):
        inst = instance("mod_add", Params(R=7, c=c))
        assert inst.extra == 2 and inst.circuit.ledger.dirty_highwater == 2
    assert inst.verify()


# -- negation, doubling -------------------------------------------------------

@pytest.mark.parametrize("t, out", [(2, 5), (0, 0)])
def test_mod_negate_examples(t, out):
    assert _run(instance("mod_negate", Params(R=7)), {"t": t}) == {"t": out}


@pytest.mark.parametrize("R", [5, 7, 15])
def test_mod_negate_exhaustive_and_self_inverse(R):
    inst = instance("mod_negate", Params(R=R, c=1))
    assert inst.verify()
    f = _perm_on(instance("mod_negate", Params(R=R)), "t")
    x = np.arange(R)
    assert np.array_equal(f[f[x]], x)


def test_mod_double_examples():
    inst = instance("mod_double", Params(R=7))
    assert _run(inst, {"t": 5}) == {"t": 3}
    assert _run(inst, {"t": 0}) == {"t": 0}


@pytest.mark.parametrize("R", [5, 7, 9, 15])
def test_mod_double_and_halve_exhaustive(R):
    for c in (0, 1):
        assert instance("mod_double", Params(R=R, c=c)).verify()
        assert instance("mod_halve", Params(R=R, c=c)).verify()
    d = _perm_on(instance("mod_double", Params(R=R)), "t")
    h = _perm_on(instance("mod_halve", Params(R=R)), "t")
    x = np.arange(R)
    assert np.array_equal(h[d[x]], x)


def test_mod_double_rejects_wrong_register():
    with pytest.raises(CircuitError):
        modular.mod_double(Builder(6), 7, (0, 1, 2, 3))
    with pytest.raises(CircuitError):
        modular.mod_double(Builder(6), 8, (0, 1, 2))


# -- scaled addition and bimultiplication -----------------------------------

def test_mod_scale_add_example():
    inst = instance("mod_scale_add", Params(R=7, K=3))
    assert _run(inst, {"x": 2, "y": 1}) == {"x": 2, "y": 0}


def test_mod_scale_add_zero_is_empty():
    b = Builder(6)
    modular.mod_scale_add(b, 0, 7, (0, 1, 2), (3, 4, 5))
    assert not b.gates


@pytest.mark.parametrize("R", [5, 7])
def test_mod_scale_add_exhaustive(R):
    for K in range(R):
        assert instance("mod_scale_add", Params(R=R, K=K)).verify()


def _scale_add_gates(n: int) -> int:
    R = (1 << n) - 3
    b = Builder(2 * n)
    x, y = tuple(range(n)), tuple(range(n, 2 * n))
    with b.op(x, y):
        modular.mod_scale_add(b, R // 3, R, x, y)
    return len(b.build().gates)


def test_mod_scale_add_gate_bound():
    # n offsets of O(n lg n) each; the ratio to n^2 lg n must stay bounded
    ratios = [_scale_add_gates(n) / (n * n * np.log2(n)) for n in (4, 8, 16)]
    assert max(ratios) <= 200
    assert ratios[-1] / ratios[0] <= 1.25


def test_bimultiply_example():
    inst = instance("mod_bimultiply", Params(R=15, K=7))
    assert _run(inst, {"x": 2, "y": 3}) == {"x": 14, "y": 9}


def test_bimultiply_fits_in_its_own_registers():
    # negation and offsets borrow from the idle partner register
    inst = build_instance("mod_bimultiply", Params(R=15, K=7), extra=0)
    assert inst.circuit.width == 8


def test_bimultiply_by_one_is_empty():
    b = Builder(6)
    modular.mod_bimultiply(b, 1, 7, (0, 1, 2), (3, 4, 5))
    assert not b.gates


def test_bimultiply_rejects_non_invertible():
    with pytest.raises(modular.NonInvertibleMultiplier) as err:
        modular.mod_bimultiply(Builder(8), 6, 15, (0, 1, 2, 3), (4, 5, 6, 7))
    assert err.value.factor == 3


@pytest.mark.parametrize("R, Ks", [(5, [2, 3, 4]), (7, [2, 3, 6]), (15, [2, 7, 11, 14])])
def test_bimultiply_exhaustive(R, Ks):
    for K in Ks:
        for c in (0, 1):
            assert instance("mod_bimultiply", Params(R=R, K=K, c=c)).verify()


def test_bimultiply_then_inverse_is_identity():
    R, K = 11, 4
    a = extract_permutation(instance("mod_bimultiply", Params(R=R, K=K)).circuit)
    b = extract_permutation(instance("mod_bimultiply", Params(R=R, K=pow(K, -1, R))).circuit)
    ops = instance("mod_bimultiply", Params(R=R, K=K)).operands
    s = np.arange(len(a))
    ok = (register_values(s, ops["x"]) < R) & (register_values(s, ops["y"]) < R)
    assert np.array_equal(b[a[s[ok]]], s[ok])


@given(st.integers(5, 10), st.data())
@settings(max_examples=25, deadline=None)
def test_mod_offset_random_moduli(n, data):
    R = data.draw(st.integers((1 << (n - 1)) + 1, 1 << n).filter(lambda r: r % 2))
    K = data.draw(st.integers(0, R - 1))
    inst = build_instance("mod_offset", Params(R=R, K=K, c=1), extra=2)
    t = data.draw(st.integers(0, R - 1))
    assert _run(inst, {"t": t}, data.draw(st.integers(0, 3))) == {"t": (t + K) % R}


@given(st.integers(5, 7), st.data())
@settings(max_examples=10, deadline=None)
def test_bimultiply_random_moduli(n, data):
    R = data.draw(st.integers((1 << (n - 1)) + 1, (1 << n) - 1).filter(lambda r: r % 2))
    K = data.draw(st.integers(2, R - 1))
    assume(gcd(K, R) == 1)
    inst = build_instance("mod_bimultiply", Params(R=R, K=K, c=1), extra=0)
    x, y = data.draw(st.integers(0, R - 1)), data.draw(st.integers(0, R - 1))
    assert _run(inst, {"x": x, "y": y}) == {"x": K * x % R, "y": pow(K, -1, R) * y % R}
