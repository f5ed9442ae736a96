"""Modular arithmetic from pivot-flips.

All modular operations assume operand registers hold values below the
modulus ``R``.  Outside that domain the circuits are still permutations
but their effect is unspecified.
"""
from __future__ import annotations

from math import gcd
from typing import Sequence, Union

from .arith import (add_reg, bit_rotate, compare_lt_const_toggle, compare_lt_toggle,
                    decrement, increment, multi_not, offset, subtract_reg)
from .circuit import Builder, CircuitError

Pivot = Union[int, Sequence[int]]


class NonInvertibleMultiplier(CircuitError):
    """The multiplier shares a factor with the modulus."""

    def __init__(self, k: int, modulus: int):
        self.factor = gcd(k, modulus)
        super().__init__(f"{k} has no inverse mod {modulus} (gcd {self.factor})")


def register_size(modulus: int) -> int:
    """Smallest n with modulus <= 2**n."""
    return (modulus - 1).bit_length()


def _pivot_wires(pivot: Pivot) -> tuple:
    return () if isinstance(pivot, int) else tuple(pivot)


def _check_modulus(modulus: int, t: Sequence[int]) -> None:
    if modulus < 1:
        raise CircuitError(f"modulus must be positive, got {modulus}")
    if modulus > 1 << len(t):
        raise CircuitError(f"modulus {modulus} does not fit in {len(t)} bits")


def _add_pivot(b: Builder, pivot: Pivot, t: tuple, sign: int) -> None:
    if isinstance(pivot, int):
        offset(b, sign * pivot, t)
    elif sign > 0:
        add_reg(b, pivot, t)
    else:
        subtract_reg(b, pivot, t)


def bi_flip(b: Builder, pivot: Pivot, t: Sequence[int],
            controls: Sequence[int] = ()) -> None:
    """``t <- NOT(t - pivot)``, which reverses both sides of the pivot.

    The pivot is a constant or a register no larger than ``t``.
    """
    t, controls = tuple(t), tuple(controls)
    pw = _pivot_wires(pivot)
    if len(pw) > len(t):
        raise CircuitError("bi-flip pivot register larger than target")
    with b.op(t, pw, controls):
        if not controls:
            multi_not(b, (), t)
            _add_pivot(b, pivot, t, +1)
            return
        # S(-p) . X_c . S(p) on (dirty, t) acts as NOT(t - p) on t and
        # toggles the dirty bit, which is toggled back afterwards.
        with b.dirty(1, t + pw + controls) as (d,):
            ext = (d,) + t
            _add_pivot(b, pivot, ext, -1)
            multi_not(b, controls, ext)
            _add_pivot(b, pivot, ext, +1)
            multi_not(b, controls, (d,))


def pivot_flip(b: Builder, pivot: Pivot, t: Sequence[int],
               controls: Sequence[int] = ()) -> None:
    """Reverse the order of the states below ``pivot``; others are fixed."""
    t, controls = tuple(t), tuple(controls)
    pw = _pivot_wires(pivot)
    if isinstance(pivot, int):
        if pivot > 1 << len(t):
            raise CircuitError(f"pivot {pivot} exceeds the {len(t)}-bit range")
        if pivot <= 1:
            return
    with b.op(t, pw, controls):
        with b.dirty(1, t + pw + controls) as (w,):
            for _ in range(2):
                if isinstance(pivot, int):
                    compare_lt_const_toggle(b, pivot, t, w)
                else:
                    compare_lt_toggle(b, pw, t, w)
                bi_flip(b, pivot, t, controls + (w,))


def mod_offset(b: Builder, k: int, modulus: int, t: Sequence[int],
               controls: Sequence[int] = (), biflip_at_modulus: bool = False) -> None:
    """``t <- t + k (mod modulus)`` as pivot-flips at R-k, R and k."""
    t, controls = tuple(t), tuple(controls)
    _check_modulus(modulus, t)
    if not 0 <= k < modulus:
        raise CircuitError(f"offset {k} outside [0, {modulus})")
    if k == 0:
        return
    with b.op(t, controls):
        pivot_flip(b, modulus - k, t, controls)
        if biflip_at_modulus:
            bi_flip(b, modulus, t, controls)
        else:
            pivot_flip(b, modulus, t, controls)
        pivot_flip(b, k, t, controls)


def mod_add_reg(b: Builder, a: Sequence[int], modulus: int, t: Sequence[int],
                controls: Sequence[int] = ()) -> None:
    """``t <- t + a (mod modulus)``; ``a`` is restored."""
    a, t, controls = tuple(a), tuple(t), tuple(controls)
    _check_modulus(modulus, t)
    if len(a) != len(t):
        raise CircuitError("modular addition needs equal register sizes")
    with b.op(a, t, controls):
        # NOT(a) + R + 1 == R - a (mod 2**n)
        multi_not(b, (), a)
        offset(b, modulus + 1, a)
        pivot_flip(b, a, t, controls)
        offset(b, -(modulus + 1), a)
        multi_not(b, (), a)
        pivot_flip(b, modulus, t, controls)
        pivot_flip(b, a, t, controls)


def mod_negate(b: Builder, modulus: int, t: Sequence[int],
               controls: Sequence[int] = ()) -> None:
    """``t <- -t (mod modulus)``."""
    t, controls = tuple(t), tuple(controls)
    _check_modulus(modulus, t)
    with b.op(t, controls):
        decrement(b, t)
        pivot_flip(b, modulus - 1, t, controls)
        increment(b, t)


def mod_double(b: Builder, modulus: int, t: Sequence[int],
               controls: Sequence[int] = ()) -> None:
    """``t <- 2t (mod modulus)`` for odd ``modulus`` filling the register."""
    t, controls = tuple(t), tuple(controls)
    if modulus % 2 == 0 or modulus < 3:
        raise CircuitError(f"modular doubling needs an odd modulus >= 3, got {modulus}")
    if len(t) != register_size(modulus):
        raise CircuitError(f"modular doubling needs a {register_size(modulus)}-bit register")
    half = (modulus + 1) // 2
    msb = t[-1]
    with b.op(t, controls):
        offset(b, -half, t, controls)
        offset(b, half, t[:-1], controls + (msb,))
        multi_not(b, controls, (msb,))
        bit_rotate(b, t, 1, controls)


def mod_halve(b: Builder, modulus: int, t: Sequence[int],
              controls: Sequence[int] = ()) -> None:
    with b.reversed_block():
        mod_double(b, modulus, t, controls)


def mod_scale_add(b: Builder, k: int, modulus: int, x: Sequence[int], y: Sequence[int],
                  controls: Sequence[int] = ()) -> None:
    """``y <- y + k*x (mod modulus)`` by halving then shift-and-add."""
    x, y, controls = tuple(x), tuple(y), tuple(controls)
    if modulus % 2 == 0:
        raise CircuitError("modular scaled addition needs an odd modulus")
    k %= modulus
    if k == 0:
        return
    with b.op(x, y, controls):
        for _ in range(len(y) - 1):
            mod_halve(b, modulus, y)
        # most significant input bit first: it sees the most doublings
        for i in reversed(range(len(x))):
            mod_offset(b, k, modulus, y, controls + (x[i],))
            if i:
                mod_double(b, modulus, y)


def mod_scale_sub(b: Builder, k: int, modulus: int, x: Sequence[int], y: Sequence[int],
                  controls: Sequence[int] = ()) -> None:
    with b.reversed_block():
        mod_scale_add(b, k, modulus, x, y, controls)


def controlled_swap(b: Builder, x: Sequence[int], y: Sequence[int],
                    controls: Sequence[int] = ()) -> None:
    controls = tuple(controls)
    for p, q in zip(x, y):
        b.cx(q, p)
        b.x(q, controls + (p,))
        b.cx(q, p)


def mod_bimultiply(b: Builder, k: int, modulus: int, x: Sequence[int], y: Sequence[int],
                   controls: Sequence[int] = ()) -> None:
    """``(x, y) <- (k*x, k^-1 * y) (mod modulus)``.

    The second register may hold anything below the modulus, which is what
    lets it be dirty.
    """
    x, y, controls = tuple(x), tuple(y), tuple(controls)
    k %= modulus
    if gcd(k, modulus) != 1:
        raise NonInvertibleMultiplier(k, modulus)
    if k == 1:
        return
    k_inv = pow(k, -1, modulus)
    with b.op(x, y, controls):
        mod_scale_add(b, k, modulus, x, y, controls)
        mod_scale_sub(b, k_inv, modulus, y, x, controls)
        mod_scale_add(b, k, modulus, x, y, controls)
        controlled_swap(b, x, y, controls)
        mod_negate(b, modulus, y, controls)
