"""Non-modular reversible arithmetic built from NOT, CNOT and Toffoli gates.

Every function emits into a :class:`~dirtyperiod.circuit.Builder`.  Registers
are tuples of wires, LSB first; ``controls`` is a tuple of wires that must
all be on for the operation to act.  Workspace is always borrowed dirty and
returned in its original state.
"""
from __future__ import annotations

from functools import lru_cache
from typing import Callable, Sequence

from .circuit import (Builder, Circuit, CircuitError, Gate, InsufficientFreeWires,
                      make_gate)

__all__ = [
    "multi_not", "mcx_gates", "lower_mcx", "lower_mcx_circuit", "bit_reverse",
    "bit_rotate", "add_reg", "subtract_reg", "offset", "carry_toggle",
    "increment", "decrement", "compare_lt_toggle", "compare_lt_const_toggle",
    "control_via_commutator",
]


# ---------------------------------------------------------------------------
# multi-not and multi-controlled NOT reduction

def multi_not(b: Builder, controls: Sequence[int], targets: Sequence[int]) -> None:
    """Toggle every target iff all controls are on."""
    controls, targets = tuple(controls), tuple(targets)
    if not targets:
        return
    if set(controls) & set(targets):
        raise CircuitError("multi-not controls overlap targets")
    if len(controls) <= 1:
        for t in targets:
            b.x(t, controls)
        return
    first, rest = targets[0], targets[1:]
    # toggle-control the remaining targets off the first one
    for t in rest:
        b.cx(first, t)
    b.x(first, controls)
    for t in rest:
        b.cx(first, t)


def mcx_gates(controls: Sequence[int], target: int, free: Sequence[int]) -> list:
    """Reduce a many-controlled NOT to Toffolis using dirty ``free`` wires.

    With ``len(controls) - 2`` free wires the ladder costs exactly
    ``4c - 8`` Toffolis.  With fewer, the controls are split in two around a
    single borrowed wire and each half is reduced recursively.
    """
    controls = tuple(controls)
    c = len(controls)
    if c <= 2:
        return [make_gate(target, controls)]
    free = [w for w in free if w != target and w not in controls]
    if len(free) >= c - 2:
        x, a = controls, free[:c - 2]
        half = [Gate((x[c - 1], a[c - 3]), target)]
        half += [Gate((x[i], a[i - 2]), a[i - 1]) for i in range(c - 2, 1, -1)]
        half.append(Gate((x[0], x[1]), a[0]))
        half += [Gate((x[i], a[i - 2]), a[i - 1]) for i in range(2, c - 1)]
        return half + half
    if not free:
        raise InsufficientFreeWires(f"{c}-controlled NOT needs a free wire")
    a, others = free[0], free[1:]
    k = (c + 1) // 2
    c1, c2 = controls[:k], controls[k:]
    first = mcx_gates(c1, a, list(c2) + [target] + others)
    second = mcx_gates(c2 + (a,), target, list(c1) + others)
    return first + second + first + second


def lower_mcx(gate: Gate, width: int) -> list:
    """Lower one gate, borrowing the lowest-indexed wires it does not touch."""
    if len(gate.controls) <= 2:
        return [gate]
    used = set(gate.wires)
    free = [w for w in range(width) if w not in used]
    return mcx_gates(gate.controls, gate.target, free)


def lower_mcx_circuit(circuit: Circuit) -> Circuit:
    if circuit.max_controls <= 2:
        return circuit
    gates = []
    for g in circuit.gates:
        if len(g.controls) <= 2:
            gates.append(g)
        else:
            gates.extend(lower_mcx(g, circuit.width))
    return Circuit(circuit.width, tuple(gates), circuit.ledger, circuit.clean_wires)


# ---------------------------------------------------------------------------
# bit permutations

def bit_reverse(b: Builder, reg: Sequence[int], controls: Sequence[int] = ()) -> None:
    """Swap bit i with bit n-1-i using three layers of independent XORs."""
    reg, controls = tuple(reg), tuple(controls)
    pairs = [(reg[i], reg[-1 - i]) for i in range(len(reg) // 2)]
    for lo, hi in pairs:
        b.cx(hi, lo)
    for lo, hi in pairs:
        b.x(hi, controls + (lo,))
    for lo, hi in pairs:
        b.cx(hi, lo)


def bit_rotate(b: Builder, reg: Sequence[int], shift: int,
               controls: Sequence[int] = ()) -> None:
    """Left-rotate the bits of ``reg`` by ``shift`` positions."""
    reg = tuple(reg)
    n = len(reg)
    if not 0 <= shift < max(n, 1):
        raise CircuitError(f"shift {shift} outside [0, {n})")
    if shift == 0:
        return
    bit_reverse(b, reg, controls)
    bit_reverse(b, reg[:shift], controls)
    bit_reverse(b, reg[shift:], controls)


# ---------------------------------------------------------------------------
# commutator controlling

def control_via_commutator(b: Builder, g: Callable[[], None],
                           h: Callable[[Sequence[int]], None],
                           controls: Sequence[int]) -> None:
    """Emit ``G, H_c, G^-1, H_c``.

    When ``H`` conjugates ``G`` into its inverse this realises a controlled
    ``G^2`` while only ``H`` carries the controls.
    """
    start = b.mark()
    g()
    stop = b.mark()
    h(controls)
    b.replay_inverse(start, stop)
    h(controls)


# ---------------------------------------------------------------------------
# addition

def _add_same_size(b: Builder, a: tuple, t: tuple) -> None:
    # ancilla-free ripple adder; the input register holds the carries
    n = len(a)
    if n == 1:
        b.cx(a[0], t[0])
        return
    for i in range(1, n):
        b.cx(a[i], t[i])
    for i in range(n - 2, 0, -1):
        b.cx(a[i], a[i + 1])
    for i in range(n - 1):
        b.ccx(t[i], a[i], a[i + 1])
    for i in range(n - 1, 0, -1):
        b.cx(a[i], t[i])
        b.ccx(t[i - 1], a[i - 1], a[i])
    for i in range(1, n - 1):
        b.cx(a[i], a[i + 1])
    for i in range(n):
        b.cx(a[i], t[i])


def _add_into_larger(b: Builder, a: tuple, t: tuple) -> None:
    n = len(a)
    top = a[-1]
    upper = t[n - 1:]
    if n == 1:
        increment(b, t, (top,))
        return
    # With the input MSB on, the carry wire below reads as its complement;
    # framing the upper increment with NOTs turns that into +carry-1 and a
    # final +2 settles the MSB's own contribution.
    multi_not(b, (top,), upper)
    for i in range(1, n - 1):
        b.cx(a[i], t[i])
    for i in range(n - 2, 0, -1):
        b.cx(a[i], a[i + 1])
    for i in range(n - 1):
        b.ccx(t[i], a[i], a[i + 1])
    increment(b, upper, (top,))
    b.ccx(t[n - 2], a[n - 2], top)
    for i in range(n - 2, 0, -1):
        b.cx(a[i], t[i])
        b.ccx(t[i - 1], a[i - 1], a[i])
    for i in range(1, n - 1):
        b.cx(a[i], a[i + 1])
    for i in range(n - 1):
        b.cx(a[i], t[i])
    multi_not(b, (top,), upper)
    increment(b, t[n:], (top,))


def add_reg(b: Builder, a: Sequence[int], t: Sequence[int],
            controls: Sequence[int] = ()) -> None:
    """``t += a (mod 2**len(t))`` with ``len(t) >= len(a)``."""
    a, t, controls = tuple(a), tuple(t), tuple(controls)
    if len(t) < len(a):
        raise CircuitError(f"target size {len(t)} smaller than input size {len(a)}")
    if set(a) & set(t):
        raise CircuitError("adder input and target overlap")
    if not a:
        return
    with b.op(a, t, controls):
        if not controls:
            if len(a) == len(t):
                _add_same_size(b, a, t)
            else:
                _add_into_larger(b, a, t)
            return
        # adding a into (dirty, t) twice moves t by exactly a
        with b.dirty(1, a + t + controls) as (d,):
            ext = (d,) + t
            control_via_commutator(
                b, lambda: _add_into_larger(b, a, ext),
                lambda cs: multi_not(b, cs, ext), controls)


def subtract_reg(b: Builder, a: Sequence[int], t: Sequence[int],
                 controls: Sequence[int] = ()) -> None:
    with b.reversed_block():
        add_reg(b, a, t, controls)


# ---------------------------------------------------------------------------
# offsets

def carry_toggle(b: Builder, k: int, x: Sequence[int], flag: int,
                 work: Sequence[int]) -> None:
    """``flag ^= carry-out(x + k)`` using ``len(x) - 1`` dirty ``work`` wires.

    Each work wire accumulates one carry in a dirty ladder; the ladder is
    walked twice so every work wire is toggled an even number of times.
    """
    x = tuple(x)
    n = len(x)
    k &= (1 << n) - 1
    if n == 1:
        if k & 1:
            b.cx(x[0], flag)
        return
    a = tuple(work[:n - 1])
    if len(a) < n - 1:
        raise InsufficientFreeWires(f"carry over {n} bits needs {n - 1} work wires")
    kb = [(k >> i) & 1 for i in range(n)]
    # carry_{i+1} = x_i OR c_i where k_i = 1; with x_i negated that is
    # x_i XOR (NOT x_i AND c_i), so every stage is an AND plus a fixed toggle.
    negated = [x[i] for i in range(1, n) if kb[i]]
    for w in negated:
        b.x(w)

    def ladder():
        for j in range(n - 2, 0, -1):
            b.ccx(x[j], a[j - 1], a[j])
        if kb[0]:
            b.cx(x[0], a[0])
        for j in range(1, n - 1):
            if kb[j]:
                b.cx(x[j], a[j])
                b.x(a[j])
            b.ccx(x[j], a[j - 1], a[j])

    for _ in range(2):
        b.ccx(x[n - 1], a[n - 2], flag)
        ladder()
    if kb[n - 1]:
        b.cx(x[n - 1], flag)
        b.x(flag)
    for w in negated:
        b.x(w)


def _add_carry(b: Builder, k: int, low: tuple, high: tuple, g: int) -> None:
    """``high += carry(low + k)`` where ``g`` is dirty."""
    work = high[:len(low) - 1]
    toggle = lambda: carry_toggle(b, k, low, g, work)
    try:
        reg = tuple(b.borrow_dirty(len(high), low + high + (g,)))
    except InsufficientFreeWires:
        increment(b, high, (g,))
        multi_not(b, (g,), high)
        toggle()
        increment(b, high, (g,))
        toggle()
        multi_not(b, (g,), high)
        return
    # h - r, complemented on g, plus r + (g^c), complemented on g again:
    # h + c whatever g and r hold.  Two additions instead of the four
    # inside a pair of controlled increments.
    flip = lambda: multi_not(b, (g,), reg + high)
    try:
        subtract_reg(b, reg, high)
        flip()
        toggle()
        _add_with_carry_in(b, reg, high, g)
        toggle()
        flip()
    finally:
        b.release(reg)


def _add_with_carry_in(b: Builder, a: tuple, t: tuple, cin: int) -> None:
    """``t += a + cin`` with equal sizes; ``a`` and ``cin`` are restored."""
    # majority ripple up, unmajority-and-add back down
    n = len(a)
    carries = (cin,) + a[:-1]
    for i in range(n - 1):
        b.cx(a[i], t[i])
        b.cx(a[i], carries[i])
        b.ccx(carries[i], t[i], a[i])
    b.cx(a[n - 1], t[n - 1])
    b.cx(carries[n - 1], t[n - 1])
    for i in reversed(range(n - 1)):
        b.ccx(carries[i], t[i], a[i])
        b.cx(a[i], carries[i])
        b.cx(carries[i], t[i])


def _offset_uncontrolled(b: Builder, k: int, t: tuple) -> None:
    n = len(t)
    k &= (1 << n) - 1
    if k == 0:
        return
    low_zeros = (k & -k).bit_length() - 1
    if low_zeros:
        _offset_uncontrolled(b, k >> low_zeros, t[low_zeros:])
        return
    if n == 1:
        b.x(t[0])
        return
    split = (n + 1) // 2
    low, high = t[:split], t[split:]
    k_low, k_high = k & ((1 << split) - 1), k >> split
    with b.op(t):
        if k_low:
            # high += carry(low + k_low), steered through one dirty wire
            with b.dirty(1, t) as (g,):
                _add_carry(b, k_low, low, high, g)
            if k_high:
                nl, nh = _offset_helpers(len(low)), _offset_helpers(len(high))
                free = b.free_wires(t)
                if len(free) >= nl + nh:
                    # disjoint helpers let the two halves overlap in time
                    with b.reserve(high + tuple(free[nl:])):
                        _offset_uncontrolled(b, k_low, low)
                    with b.reserve(low + tuple(free[:nl])):
                        _offset_uncontrolled(b, k_high, high)
                    return
            _offset_uncontrolled(b, k_low, low)
        if k_high:
            _offset_uncontrolled(b, k_high, high)


@lru_cache(maxsize=None)
def _offset_helpers(n: int) -> int:
    """Outside wires an n-bit offset can use without falling back or serialising."""
    if n <= 1:
        return 0
    split = (n + 1) // 2
    return max(1 + (n - split), _offset_helpers(split) + _offset_helpers(n - split))


def offset(b: Builder, k: int, t: Sequence[int], controls: Sequence[int] = ()) -> None:
    """``t += k (mod 2**len(t))`` for a compile-time constant ``k``."""
    t, controls = tuple(t), tuple(controls)
    n = len(t)
    if n == 0:
        return
    k %= 1 << n
    if k == 0:
        return
    with b.op(t, controls):
        if not controls:
            _offset_uncontrolled(b, k, t)
            return
        with b.dirty(1, t + controls) as (d,):
            ext = (d,) + t
            control_via_commutator(
                b, lambda: _offset_uncontrolled(b, k, ext),
                lambda cs: multi_not(b, cs, ext), controls)


# ---------------------------------------------------------------------------
# increments

def _increment_many(b: Builder, t: tuple, g: tuple, controls: tuple) -> None:
    # t - g - (-g - 1) == t + 1, whatever g holds
    if not controls:
        subtract_reg(b, g, t)
        for w in g:
            b.x(w)
        subtract_reg(b, g, t)
        for w in g:
            b.x(w)
        return
    control_via_commutator(
        b, lambda: subtract_reg(b, g, t),
        lambda cs: multi_not(b, cs, g + t), controls)


def _increment_single(b: Builder, t: tuple, controls: tuple) -> None:
    n = len(t)
    if n <= 2:
        if n == 2:
            multi_not(b, controls + (t[0],), t[1:])
        multi_not(b, controls, t[:1])
        return
    if n % 2 == 0:
        _increment_single(b, t[1:], controls + (t[0],))
        multi_not(b, controls, t[:1])
        return
    k = (n + 1) // 2
    low, high = t[:k], t[k:]
    with b.dirty(1, t + controls) as (d,):
        ext = (d,) + high
        # ext += 2 exactly when low is all ones: subtracting -1 twice
        subtract_reg(b, low, ext)
        multi_not(b, low + controls, ext)
        add_reg(b, low, ext)
        multi_not(b, low + controls, ext)
        _increment_many(b, low, ext, controls)


def increment(b: Builder, t: Sequence[int], controls: Sequence[int] = (),
              variant: str | None = None) -> None:
    """``t += 1 (mod 2**len(t))``.

    ``variant`` is ``"many"`` (borrow ``len(t)`` dirty wires), ``"single"``
    (one dirty wire) or ``None`` to pick ``"many"`` whenever enough wires are
    free.
    """
    t, controls = tuple(t), tuple(controls)
    n = len(t)
    if n == 0:
        return
    if variant not in (None, "many", "single"):
        raise ValueError(f"unknown increment variant {variant!r}")
    with b.op(t, controls):
        if n == 1:
            multi_not(b, controls, t)
            return
        if variant != "single":
            try:
                g = b.borrow_dirty(n, t + controls)
            except InsufficientFreeWires:
                if variant == "many":
                    raise
            else:
                try:
                    _increment_many(b, t, tuple(g), controls)
                finally:
                    b.release(g)
                return
        _increment_single(b, t, controls)


def decrement(b: Builder, t: Sequence[int], controls: Sequence[int] = (),
              variant: str | None = None) -> None:
    with b.reversed_block():
        increment(b, t, controls, variant)


# ---------------------------------------------------------------------------
# comparisons

def _toggle_through(b: Builder, excluded: tuple, controls: tuple, flag: int,
                    compute: Callable[[int], None]) -> None:
    # flag ^= controls AND predicate, via a dirty wire toggled by the predicate
    with b.dirty(1, excluded + controls + (flag,)) as (w,):
        b.x(flag, controls + (w,))
        compute(w)
        b.x(flag, controls + (w,))
        compute(w)


def _compare_reg(b: Builder, a: tuple, y: tuple, flag: int) -> None:
    ext = y + (flag,)
    subtract_reg(b, a, ext)
    add_reg(b, a, y)


def compare_lt_toggle(b: Builder, a: Sequence[int], y: Sequence[int], flag: int,
                      controls: Sequence[int] = ()) -> None:
    """``flag ^= [y < a]``; needs ``len(y) >= len(a)``."""
    a, y, controls = tuple(a), tuple(y), tuple(controls)
    if len(y) < len(a):
        raise CircuitError("comparison target smaller than input")
    if flag in a or flag in y:
        raise CircuitError("flag overlaps the compared registers")
    with b.op(a, y, controls, (flag,)):
        if not controls:
            _compare_reg(b, a, y, flag)
        else:
            _toggle_through(b, a + y, controls, flag,
                            lambda w: _compare_reg(b, a, y, w))


def _compare_const(b: Builder, k: int, y: tuple, flag: int) -> None:
    m = len(y)
    if k <= 0:
        return
    if k >= 1 << m:
        b.x(flag)
        return
    with b.op(y, (flag,)):
        try:
            work = b.borrow_dirty(m - 1, y + (flag,))
        except InsufficientFreeWires:
            work = None
        if work is not None:
            # y < k  <=>  no carry out of y + (2**m - k)
            try:
                carry_toggle(b, (1 << m) - k, y, flag, work)
                b.x(flag)
            finally:
                b.release(work)
            return
        ext = y + (flag,)
        offset(b, -k, ext)
        offset(b, k, y)


def compare_lt_const_toggle(b: Builder, k: int, y: Sequence[int], flag: int,
                            controls: Sequence[int] = ()) -> None:
    """``flag ^= [y < k]`` for a constant ``k``."""
    y, controls = tuple(y), tuple(controls)
    if flag in y:
        raise CircuitError("flag overlaps the compared register")
    with b.op(y, controls, (flag,)):
        if not controls:
            _compare_const(b, k, y, flag)
        elif k >= 1 << len(y):
            b.x(flag, controls)
        elif k > 0:
            _toggle_through(b, y, controls, flag,
                            lambda w: _compare_const(b, k, y, w))

