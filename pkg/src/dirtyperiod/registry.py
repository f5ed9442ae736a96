"""Named constructions with their classical oracles.

Each entry lays out operand registers from wire 0, then the controls, then
``extra`` spare wires for the ancilla broker, and pairs the lowered circuit
with the arithmetic it is supposed to perform.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

from . import arith, modular
from .circuit import Builder, CircuitError, CleanPoolExhausted, Circuit, InsufficientFreeWires
from .sim import Verdict, check_contract

MAX_EXTRA_WIRES = 24


@dataclass(frozen=True)
class Params:
    """Knobs shared by every construction; each entry reads what it needs.

    ``n`` is the target size, ``m`` the second register size where one
    exists (input of an adder, pivot register, comparison target).
    """
    n: int = 4
    m: int | None = None
    K: int = 1
    R: int | None = None
    c: int = 0
    shift: int = 1
    variant: str | None = None


@dataclass
class Instance:
    name: str
    circuit: Circuit
    operands: dict
    oracle: Callable[[dict], dict]
    domain: Callable[[dict], bool] = field(default=lambda v: True)
    controls: tuple = ()

    @property
    def extra(self) -> int:
        used = sum(len(r) for r in self.operands.values()) + len(self.controls)
        return self.circuit.width - used

    def verify(self) -> Verdict:
        return check_contract(self.circuit, self.operands, self.oracle,
                              self.domain, self.controls)


class _Layout:
    def __init__(self):
        self.next = 0

    def take(self, k: int) -> tuple:
        reg = tuple(range(self.next, self.next + k))
        self.next += k
        return reg


def _modulus(p: Params) -> tuple[int, int]:
    if p.R is None:
        raise CircuitError("this construction needs a modulus R")
    if p.R < 1:
        raise CircuitError(f"modulus must be positive, got {p.R}")
    return p.R, max(modular.register_size(p.R), 1)


# Each recipe returns (operands, emit, oracle, domain); domain None means all values.

def _add(p: Params, lay: _Layout, sign: int):
    m = p.n if p.m is None else p.m
    a, t = lay.take(m), lay.take(p.n)
    mask = (1 << p.n) - 1
    fn = arith.add_reg if sign > 0 else arith.subtract_reg
    return ({"a": a, "t": t}, lambda b, cs: fn(b, a, t, cs),
            lambda v: {"t": (v["t"] + sign * v["a"]) & mask}, None)


def _offset(p: Params, lay: _Layout):
    t = lay.take(p.n)
    mask = (1 << p.n) - 1
    return ({"t": t}, lambda b, cs: arith.offset(b, p.K, t, cs),
            lambda v: {"t": (v["t"] + p.K) & mask}, None)


def _step(p: Params, lay: _Layout, sign: int):
    t = lay.take(p.n)
    mask = (1 << p.n) - 1
    fn = arith.increment if sign > 0 else arith.decrement
    return ({"t": t}, lambda b, cs: fn(b, t, cs, p.variant),
            lambda v: {"t": (v["t"] + sign) & mask}, None)


def _compare(p: Params, lay: _Layout):
    m = p.n if p.m is None else p.m
    a, y, f = lay.take(p.n), lay.take(m), lay.take(1)
    return ({"a": a, "y": y, "flag": f},
            lambda b, cs: arith.compare_lt_toggle(b, a, y, f[0], cs),
            lambda v: {"flag": v["flag"] ^ int(v["y"] < v["a"])}, None)


def _compare_const(p: Params, lay: _Layout):
    y, f = lay.take(p.n), lay.take(1)
    return ({"y": y, "flag": f},
            lambda b, cs: arith.compare_lt_const_toggle(b, p.K, y, f[0], cs),
            lambda v: {"flag": v["flag"] ^ int(v["y"] < p.K)}, None)


def _multi_not(p: Params, lay: _Layout):
    t = lay.take(p.n)
    mask = (1 << p.n) - 1
    return ({"t": t}, lambda b, cs: arith.multi_not(b, cs, t),
            lambda v: {"t": v["t"] ^ mask}, None)


def _mcx(p: Params, lay: _Layout):
    t = lay.take(1)
    return ({"t": t}, lambda b, cs: b.x(t[0], cs), lambda v: {"t": v["t"] ^ 1}, None)


def _rotate(p: Params, lay: _Layout):
    t = lay.take(p.n)
    n, s = p.n, p.shift

    def rot(v):
        x = v["t"]
        return {"t": ((x << s) | (x >> (n - s))) & ((1 << n) - 1)}
    return {"t": t}, lambda b, cs: arith.bit_rotate(b, t, s, cs), rot, None


def _reverse(p: Params, lay: _Layout):
    t = lay.take(p.n)
    n = p.n
    rev = lambda v: {"t": int(format(v["t"], f"0{n}b")[::-1], 2) if n else 0}
    return {"t": t}, lambda b, cs: arith.bit_reverse(b, t, cs), rev, None


def _flip_oracle(kind: str, n: int):
    mask = (1 << n) - 1

    def apply(x: int, k: int) -> int:
        if kind == "bi":
            return ~(x - k) & mask
        return k - 1 - x if x < k else x
    return apply


def _flip(p: Params, lay: _Layout, kind: str):
    fn = modular.bi_flip if kind == "bi" else modular.pivot_flip
    apply = _flip_oracle(kind, p.n)
    if p.m is None:
        t = lay.take(p.n)
        return ({"t": t}, lambda b, cs: fn(b, p.K, t, cs),
                lambda v: {"t": apply(v["t"], p.K)}, None)
    k, t = lay.take(p.m), lay.take(p.n)
    return ({"k": k, "t": t}, lambda b, cs: fn(b, k, t, cs),
            lambda v: {"t": apply(v["t"], v["k"])}, None)


def _mod_unary(p: Params, lay: _Layout, kind: str):
    R, n = _modulus(p)
    t = lay.take(n)
    if kind == "mod_offset":
        emit = lambda b, cs: modular.mod_offset(b, p.K % R, R, t, cs)
        fn = lambda x: (x + p.K) % R
    elif kind == "mod_negate":
        emit = lambda b, cs: modular.mod_negate(b, R, t, cs)
        fn = lambda x: -x % R
    elif kind == "mod_double":
        emit = lambda b, cs: modular.mod_double(b, R, t, cs)
        fn = lambda x: 2 * x % R
    else:
        emit = lambda b, cs: modular.mod_halve(b, R, t, cs)
        fn = lambda x: x * pow(2, -1, R) % R
    return {"t": t}, emit, lambda v: {"t": fn(v["t"])}, lambda v: v["t"] < R


def _mod_binary(p: Params, lay: _Layout, kind: str):
    R, n = _modulus(p)
    x, y = lay.take(n), lay.take(n)
    k = p.K % R
    if kind == "mod_add":
        emit = lambda b, cs: modular.mod_add_reg(b, x, R, y, cs)
        fn = lambda v: {"y": (v["y"] + v["x"]) % R}
    elif kind == "mod_scale_add":
        emit = lambda b, cs: modular.mod_scale_add(b, k, R, x, y, cs)
        fn = lambda v: {"y": (v["y"] + k * v["x"]) % R}
    else:
        emit = lambda b, cs: modular.mod_bimultiply(b, k, R, x, y, cs)
        k_inv = pow(k, -1, R) if k else 0
        fn = lambda v: {"x": k * v["x"] % R, "y": k_inv * v["y"] % R}
    return {"x": x, "y": y}, emit, fn, lambda v: v["x"] < R and v["y"] < R


REGISTRY: dict[str, Callable] = {
    "add": lambda p, lay: _add(p, lay, +1),
    "subtract": lambda p, lay: _add(p, lay, -1),
    "offset": _offset,
    "increment": lambda p, lay: _step(p, lay, +1),
    "decrement": lambda p, lay: _step(p, lay, -1),
    "compare": _compare,
    "compare_const": _compare_const,
    "multi_not": _multi_not,
    "mcx": _mcx,
    "bit_rotate": _rotate,
    "bit_reverse": _reverse,
    "bi_flip": lambda p, lay: _flip(p, lay, "bi"),
    "pivot_flip": lambda p, lay: _flip(p, lay, "pivot"),
    "mod_offset": lambda p, lay: _mod_unary(p, lay, "mod_offset"),
    "mod_negate": lambda p, lay: _mod_unary(p, lay, "mod_negate"),
    "mod_double": lambda p, lay: _mod_unary(p, lay, "mod_double"),
    "mod_halve": lambda p, lay: _mod_unary(p, lay, "mod_halve"),
    "mod_add": lambda p, lay: _mod_binary(p, lay, "mod_add"),
    "mod_scale_add": lambda p, lay: _mod_binary(p, lay, "mod_scale_add"),
    "mod_bimultiply": lambda p, lay: _mod_binary(p, lay, "mod_bimultiply"),
}

# spare wires that unlock the intended construction rather than a fallback
PREFERRED_EXTRA: dict[str, Callable[[Params], int]] = {
    "mcx": lambda p: max(p.c - 2, 0),
}

ALIASES = {"bimultiply": "mod_bimultiply", "scale_add": "mod_scale_add"}


def canonical_name(name: str) -> str:
    name = ALIASES.get(name, name)
    if name not in REGISTRY:
        raise KeyError(f"unknown construction {name!r}; known: {', '.join(sorted(REGISTRY))}")
    return name


def build_instance(name: str, params: Params, extra: int) -> Instance:
    """Lay out and lower ``name`` with exactly ``extra`` spare wires."""
    name = canonical_name(name)
    lay = _Layout()
    operands, emit, oracle, domain = REGISTRY[name](params, lay)
    controls = lay.take(params.c)
    width = lay.next + extra
    b = Builder(width)
    with b.op(*operands.values(), controls):
        emit(b, controls)
    circuit = b.build()
    return Instance(name, circuit, operands, oracle,
                    domain or (lambda v: True), controls)


def instance(name: str, params: Params | None = None, extra: int | None = None,
             max_extra: int = MAX_EXTRA_WIRES) -> Instance:
    """Build ``name``; with ``extra=None`` use the fewest spare wires that work.

    Multi-controlled NOTs default to the ``c - 2`` wires of the linear ladder.
    """
    params = params or Params()
    name = canonical_name(name)
    if extra is None and name in PREFERRED_EXTRA:
        extra = PREFERRED_EXTRA[name](params)
    if extra is not None:
        return build_instance(name, params, extra)
    last = None
    for e in range(max_extra + 1):
        try:
            return build_instance(name, params, e)
        except (InsufficientFreeWires, CleanPoolExhausted) as exc:
            last = exc
    raise InsufficientFreeWires(f"{name} did not build with up to {max_extra} spare wires: {last}")
