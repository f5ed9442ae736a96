"""Wires, gates, circuits and the ancilla broker.

Wires are plain integers indexing a global pool; registers are tuples of
wires, least significant bit first.  A :class:`Builder` accumulates gates
in temporal order and hands out borrowed wires.
"""
from __future__ import annotations

from collections import Counter
from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import Iterable, Iterator, NamedTuple, Sequence

Register = tuple  # tuple[int, ...], LSB first


class CircuitError(Exception):
    """Base class for construction errors."""


class InsufficientFreeWires(CircuitError):
    """The wire pool cannot satisfy a dirty borrow."""


class CleanPoolExhausted(CircuitError):
    """No clean wires are left to hand out."""


class LedgerViolation(CircuitError):
    """An ancilla was not returned in the state it was lent in."""


class Gate(NamedTuple):
    controls: tuple
    target: int

    @property
    def kind(self) -> str:
        c = len(self.controls)
        if c <= 2:
            return ("X", "CX", "CCX")[c]
        return "MCX"

    @property
    def wires(self) -> tuple:
        return self.controls + (self.target,)

    def __str__(self) -> str:
        return " ".join([self.kind, *map(str, self.wires)])


def make_gate(target: int, controls: Iterable[int] = ()) -> Gate:
    controls = tuple(controls)
    if target in controls:
        raise CircuitError(f"target {target} also used as control")
    if len(set(controls)) != len(controls):
        raise CircuitError(f"duplicate controls {controls}")
    return Gate(controls, target)


@dataclass
class AncillaLedger:
    """Borrow accounting.

    ``dirty_highwater`` only counts wires taken from outside the outermost
    operation being built; wires an operation lends to its own
    sub-operations are free.  ``dirty_highwater_total`` counts everything.
    """

    clean_highwater: int = 0
    dirty_highwater: int = 0
    dirty_highwater_total: int = 0
    active_borrows: dict = field(default_factory=dict)  # wire -> "clean" | "dirty"

    def copy(self) -> "AncillaLedger":
        return AncillaLedger(self.clean_highwater, self.dirty_highwater,
                             self.dirty_highwater_total, dict(self.active_borrows))


@dataclass(frozen=True)
class Circuit:
    width: int
    gates: tuple
    ledger: AncillaLedger = field(default_factory=AncillaLedger, compare=False)
    clean_wires: tuple = field(default=(), compare=False)

    def __post_init__(self):
        for g in self.gates:
            for w in g.wires:
                if not 0 <= w < self.width:
                    raise CircuitError(f"wire {w} outside width {self.width}")

    def __len__(self) -> int:
        return len(self.gates)

    def __iter__(self) -> Iterator[Gate]:
        return iter(self.gates)

    @property
    def max_controls(self) -> int:
        return max((len(g.controls) for g in self.gates), default=0)

    def inverse(self) -> "Circuit":
        # every gate in the set is self-inverse
        return Circuit(self.width, tuple(reversed(self.gates)), self.ledger, self.clean_wires)

    def to_text(self) -> str:
        lines = [f"# width {self.width}"]
        lines.extend(str(g) for g in self.gates)
        return "\n".join(lines) + "\n"


def parse_gate_list(text: str) -> Circuit:
    """Inverse of :meth:`Circuit.to_text`."""
    width = None
    gates = []
    arity = {"X": 0, "CX": 1, "CCX": 2}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            parts = line[1:].split()
            if len(parts) == 2 and parts[0] == "width":
                width = int(parts[1])
            continue
        name, *args = line.split()
        wires = [int(a) for a in args]
        if name in arity:
            if len(wires) != arity[name] + 1:
                raise CircuitError(f"line {lineno}: {name} takes {arity[name] + 1} wires")
        elif name != "MCX":
            raise CircuitError(f"line {lineno}: unknown gate {name!r}")
        gates.append(make_gate(wires[-1], wires[:-1]))
    if width is None:
        width = 1 + max((max(g.wires) for g in gates), default=-1)
    return Circuit(width, tuple(gates))


class Builder:
    """Mutable gate accumulator with an ancilla broker.

    Parameters
    ----------
    width:
        Size of the wire pool.
    clean:
        Wires known to start in state 0 that may be lent out by
        :meth:`borrow_clean`.
    """

    def __init__(self, width: int, clean: Iterable[int] = ()):
        self.width = width
        self.gates: list = []
        self.ledger = AncillaLedger()
        self._clean_pool = sorted(clean)
        self._clean_all = tuple(self._clean_pool)
        self._scopes: list = []
        self._reserved: list = []
        self._lent: Counter = Counter()

    # -- emission -------------------------------------------------------
    def emit(self, gate: Gate) -> None:
        for w in gate.wires:
            if not 0 <= w < self.width:
                raise CircuitError(f"wire {w} outside width {self.width}")
        self.gates.append(gate)

    def x(self, target: int, controls: Iterable[int] = ()) -> None:
        self.emit(make_gate(target, controls))

    def cx(self, control: int, target: int) -> None:
        self.emit(Gate((control,), target))

    def ccx(self, c1: int, c2: int, target: int) -> None:
        self.emit(make_gate(target, (c1, c2)))

    def mark(self) -> int:
        return len(self.gates)

    @contextmanager
    def reversed_block(self) -> Iterator[None]:
        """Gates emitted inside the block are replaced by their inverse."""
        start = len(self.gates)
        yield
        self.gates[start:] = self.gates[start:][::-1]

    def replay_inverse(self, start: int, stop: int) -> None:
        self.gates.extend(self.gates[start:stop][::-1])

    # -- scoping and borrowing -------------------------------------------
    @contextmanager
    def op(self, *wire_groups: Iterable[int]) -> Iterator[frozenset]:
        wires = frozenset(w for grp in wire_groups for w in grp)
        self._scopes.append(wires)
        try:
            yield wires
        finally:
            self._scopes.pop()

    @contextmanager
    def reserve(self, wires: Iterable[int]) -> Iterator[None]:
        """Hide ``wires`` from the broker without borrowing them.

        Used to keep independent sub-operations on disjoint wires so they
        can run side by side.
        """
        self._reserved.append(frozenset(wires))
        try:
            yield
        finally:
            self._reserved.pop()

    def free_wires(self, excluded: Iterable[int] = ()) -> list:
        return self._free(frozenset(excluded))

    def _free(self, excluded: frozenset) -> list:
        held = self.ledger.active_borrows
        busy = excluded | {w for w, k in held.items() if k == "clean"}
        for r in self._reserved:
            busy = busy | r
        free = [w for w in range(self.width) if w not in busy]
        inner = set().union(*self._scopes) if self._scopes else set()
        # a wire already lent out dirty may be lent again to a sub-operation
        # that leaves it alone; such wires go last, enclosing operands first
        return sorted(free, key=lambda w: (w in held, w not in inner, w))

    def borrow_dirty(self, count: int, excluded: Iterable[int] = ()) -> list:
        excluded = frozenset(excluded)
        if count <= 0:
            return []
        free = self._free(excluded)
        if len(free) < count:
            raise InsufficientFreeWires(
                f"need {count} dirty wires, {len(free)} available "
                f"(width {self.width}, {len(excluded)} excluded)")
        got = free[:count]
        for w in got:
            self.ledger.active_borrows[w] = "dirty"
            self._lent[w] += 1
        self._update_highwater()
        return got

    def borrow_clean(self, count: int) -> list:
        if count <= 0:
            return []
        if len(self._clean_pool) < count:
            raise CleanPoolExhausted(f"need {count} clean wires, {len(self._clean_pool)} left")
        got, self._clean_pool = self._clean_pool[:count], self._clean_pool[count:]
        for w in got:
            self.ledger.active_borrows[w] = "clean"
        in_use = sum(1 for k in self.ledger.active_borrows.values() if k == "clean")
        self.ledger.clean_highwater = max(self.ledger.clean_highwater, in_use)
        return got

    def release(self, wires: Iterable[int]) -> None:
        for w in wires:
            if self._lent[w] > 1:
                self._lent[w] -= 1
                continue
            self._lent.pop(w, None)
            kind = self.ledger.active_borrows.pop(w)
            if kind == "clean":
                self._clean_pool.append(w)
                self._clean_pool.sort()

    @contextmanager
    def dirty(self, count: int, excluded: Iterable[int] = ()) -> Iterator[list]:
        got = self.borrow_dirty(count, excluded)
        try:
            yield got
        finally:
            self.release(got)

    def _update_highwater(self) -> None:
        dirty = [w for w, k in self.ledger.active_borrows.items() if k == "dirty"]
        outer = self._scopes[0] if self._scopes else frozenset()
        external = sum(1 for w in dirty if w not in outer)
        lg = self.ledger
        lg.dirty_highwater = max(lg.dirty_highwater, external)
        lg.dirty_highwater_total = max(lg.dirty_highwater_total, len(dirty))

    # -- completion ------------------------------------------------------
    def build(self, lower: bool = True) -> Circuit:
        if self.ledger.active_borrows:
            raise LedgerViolation(f"unreleased borrows {sorted(self.ledger.active_borrows)}")
        circ = Circuit(self.width, tuple(self.gates), self.ledger.copy(), self._clean_all)
        if lower:
            from .arith import lower_mcx_circuit
            circ = lower_mcx_circuit(circ)
        return circ


def as_register(wires: Sequence[int]) -> Register:
    reg = tuple(wires)
    if len(set(reg)) != len(reg):
        raise CircuitError(f"duplicate wires in register {reg}")
    return reg
