"""Operation nodes, recursive lowering and resource reports."""
from __future__ import annotations

import json
from collections import Counter
from dataclasses import asdict, dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from . import arith, modular
from .circuit import Builder, Circuit, CircuitError, Gate


@dataclass(frozen=True)
class OpNode:
    """A high-level arithmetic operation awaiting lowering.

    ``params`` holds the compile-time constants (``K``, ``R``, ``shift``,
    ``variant``); ``operands`` the registers in the order the construction
    takes them.
    """

    kind: str
    operands: tuple = ()
    params: dict = field(default_factory=dict, hash=False)
    controls: tuple = ()

    def __post_init__(self):
        used = {w for reg in self.operands for w in reg}
        if used & set(self.controls):
            raise CircuitError(f"{self.kind}: controls overlap operands")
        if self.kind not in LOWERINGS:
            raise CircuitError(f"unknown operation {self.kind!r}")


def _pivot(node: OpNode):
    return node.params["K"] if "K" in node.params else node.operands[0]


def _target(node: OpNode):
    return node.operands[-1]


LOWERINGS: dict[str, Callable[[OpNode, Builder], None]] = {
    "add": lambda n, b: arith.add_reg(b, n.operands[0], n.operands[1], n.controls),
    "subtract": lambda n, b: arith.subtract_reg(b, n.operands[0], n.operands[1], n.controls),
    "offset": lambda n, b: arith.offset(b, n.params["K"], _target(n), n.controls),
    "increment": lambda n, b: arith.increment(b, _target(n), n.controls, n.params.get("variant")),
    "decrement": lambda n, b: arith.decrement(b, _target(n), n.controls, n.params.get("variant")),
    "compare": lambda n, b: arith.compare_lt_toggle(
        b, n.operands[0], n.operands[1], n.operands[2][0], n.controls),
    "compare_const": lambda n, b: arith.compare_lt_const_toggle(
        b, n.params["K"], n.operands[0], n.operands[1][0], n.controls),
    "multi_not": lambda n, b: arith.multi_not(b, n.controls, _target(n)),
    "mcx": lambda n, b: b.x(_target(n)[0], n.controls),
    "bit_rotate": lambda n, b: arith.bit_rotate(b, _target(n), n.params.get("shift", 1), n.controls),
    "bit_reverse": lambda n, b: arith.bit_reverse(b, _target(n), n.controls),
    "bi_flip": lambda n, b: modular.bi_flip(b, _pivot(n), _target(n), n.controls),
    "pivot_flip": lambda n, b: modular.pivot_flip(b, _pivot(n), _target(n), n.controls),
    "mod_offset": lambda n, b: modular.mod_offset(
        b, n.params["K"], n.params["R"], _target(n), n.controls,
        n.params.get("biflip_at_modulus", False)),
    "mod_add": lambda n, b: modular.mod_add_reg(
        b, n.operands[0], n.params["R"], n.operands[1], n.controls),
    "mod_negate": lambda n, b: modular.mod_negate(b, n.params["R"], _target(n), n.controls),
    "mod_double": lambda n, b: modular.mod_double(b, n.params["R"], _target(n), n.controls),
    "mod_halve": lambda n, b: modular.mod_halve(b, n.params["R"], _target(n), n.controls),
    "mod_scale_add": lambda n, b: modular.mod_scale_add(
        b, n.params["K"], n.params["R"], n.operands[0], n.operands[1], n.controls),
    "mod_bimultiply": lambda n, b: modular.mod_bimultiply(
        b, n.params["K"], n.params["R"], n.operands[0], n.operands[1], n.controls),
}


def lower(node: OpNode, builder: Builder) -> None:
    """Emit ``node`` into ``builder``.

    Multi-controlled gates stay in the builder until
    :meth:`Builder.build` runs the final Toffoli reduction.
    """
    LOWERINGS[node.kind](node, builder)


def lower_to_circuit(node: OpNode, width: int) -> Circuit:
    b = Builder(width)
    with b.op(*node.operands, node.controls):
        lower(node, b)
    return b.build()


# ---------------------------------------------------------------------------
# resources

@dataclass
class ResourceReport:
    not_count: int
    cnot_count: int
    toffoli_count: int
    depth: int
    clean_highwater: int
    dirty_highwater: int
    total_width: int

    @property
    def gate_count(self) -> int:
        return self.not_count + self.cnot_count + self.toffoli_count

    def to_text(self) -> str:
        return "".join(f"{k}={v}\n" for k, v in asdict(self).items())

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2)

    @classmethod
    def from_text(cls, text: str) -> "ResourceReport":
        pairs = dict(line.split("=", 1) for line in text.split() if "=" in line)
        return cls(**{k: int(v) for k, v in pairs.items()})

    @classmethod
    def from_json(cls, text: str) -> "ResourceReport":
        return cls(**json.loads(text))


class DepthTracker:
    """Incremental conflict-DAG depth over a stream of gates."""

    def __init__(self, width: int):
        self.level = [0] * width
        self.depth = 0

    def feed(self, gates: Iterable[Gate]) -> None:
        level = self.level
        depth = self.depth
        for controls, target in gates:
            d = level[target]
            for c in controls:
                if level[c] > d:
                    d = level[c]
            d += 1
            level[target] = d
            for c in controls:
                level[c] = d
            if d > depth:
                depth = d
        self.depth = depth

    def touch(self, wires: Iterable[int]) -> None:
        """Account for a non-classical gate occupying ``wires``."""
        wires = tuple(wires)
        d = 1 + max(self.level[w] for w in wires)
        for w in wires:
            self.level[w] = d
        self.depth = max(self.depth, d)


def circuit_depth(gates: Iterable[Gate], width: int) -> int:
    """Longest chain of gates that pairwise share a wire (controls count)."""
    t = DepthTracker(width)
    t.feed(gates)
    return t.depth


def measure_resources(circuit: Circuit, operand_width: int | None = None) -> ResourceReport:
    if circuit.max_controls > 2:
        raise CircuitError("measure_resources expects a lowered circuit")
    counts = Counter(len(g.controls) for g in circuit.gates)
    lg = circuit.ledger
    return ResourceReport(
        not_count=counts[0], cnot_count=counts[1], toffoli_count=counts[2],
        depth=circuit_depth(circuit.gates, circuit.width),
        clean_highwater=lg.clean_highwater,
        dirty_highwater=lg.dirty_highwater,
        total_width=circuit.width if operand_width is None
        else operand_width + lg.clean_highwater + lg.dirty_highwater,
    )


class DegenerateFit(ValueError):
    pass


def fit_slope(sizes: Sequence[float], values: Sequence[float]) -> float:
    """Least-squares slope of log(values) against log(sizes)."""
    if len(sizes) < 2 or len(set(sizes)) < 2:
        raise DegenerateFit("need at least two distinct sizes")
    if min(values) <= 0:
        raise DegenerateFit("values must be positive")
    slope, _ = np.polyfit(np.log(sizes), np.log(values), 1)
    return float(slope)


def fit_scaling(measure: Callable[[int], float], sizes: Sequence[int]) -> float:
    """Empirical exponent of ``measure(n)`` over ``sizes`` (at least four)."""
    if len(sizes) < 4:
        raise DegenerateFit("fit_scaling wants at least four sizes")
    return fit_slope(list(sizes), [measure(n) for n in sizes])
