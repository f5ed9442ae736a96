"""Exhaustive classical simulation of reversible circuits."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from .circuit import Circuit, CircuitError, LedgerViolation

MAX_EXHAUSTIVE_WIDTH = 24


class NonReversibleCircuit(CircuitError):
    pass


def _check_lowered(circuit: Circuit) -> None:
    if circuit.max_controls > 2:
        raise CircuitError("circuit still contains gates with more than two controls")


def run_classical(circuit: Circuit, state: int) -> int:
    """Apply every gate of a lowered circuit to one basis state."""
    _check_lowered(circuit)
    for controls, target in circuit.gates:
        if all(state >> c & 1 for c in controls):
            state ^= 1 << target
    return state


def run_batch(gates: Sequence, states: np.ndarray) -> np.ndarray:
    """Vectorised ``run_classical`` over an array of basis states."""
    s = np.array(states, dtype=np.int64, copy=True)
    for controls, target in gates:
        if not controls:
            s ^= 1 << target
            continue
        cm = 0
        for c in controls:
            cm |= 1 << c
        s ^= ((s & cm) == cm).astype(np.int64) << target
    return s


def extract_permutation(circuit: Circuit) -> np.ndarray:
    if circuit.width > MAX_EXHAUSTIVE_WIDTH:
        raise CircuitError(f"width {circuit.width} too large for exhaustive sweep")
    perm = run_batch(circuit.gates, np.arange(1 << circuit.width, dtype=np.int64))
    seen = np.zeros(len(perm), dtype=bool)
    seen[perm] = True
    if not seen.all():
        raise NonReversibleCircuit("two basis states collide")
    return perm


def permutation_parity(perm: Sequence[int]) -> int:
    """0 for an even permutation, 1 for odd."""
    perm = np.asarray(perm)
    seen = np.zeros(len(perm), dtype=bool)
    transpositions = 0
    for start in range(len(perm)):
        if seen[start]:
            continue
        length = 0
        i = start
        while not seen[i]:
            seen[i] = True
            i = perm[i]
            length += 1
        transpositions += length - 1
    return transpositions & 1


def register_values(states: np.ndarray, reg: Sequence[int]) -> np.ndarray:
    out = np.zeros_like(states)
    for i, w in enumerate(reg):
        out |= ((states >> w) & 1) << i
    return out


def write_register(states: np.ndarray, reg: Sequence[int], values: np.ndarray) -> np.ndarray:
    out = states.copy()
    for i, w in enumerate(reg):
        out &= ~(1 << w)
        out |= ((values >> i) & 1) << w
    return out


@dataclass
class Verdict:
    passed: bool
    checked: int
    counterexample: tuple | None = None  # (input, expected, actual)
    notes: list = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.passed

    def __str__(self) -> str:
        if self.passed:
            return f"pass ({self.checked} states)"
        i, e, a = self.counterexample
        return f"fail: input={i:#b} expected={e:#b} actual={a:#b}"


def check_contract(
    circuit: Circuit,
    operands: Mapping[str, Sequence[int]],
    oracle: Callable[[dict], dict],
    domain: Callable[[dict], bool] = lambda v: True,
    controls: Sequence[int] = (),
) -> Verdict:
    """Check a lowered circuit against an arithmetic oracle.

    Every basis state of the pool is simulated.  States whose operand
    values lie in ``domain`` must map operands per ``oracle`` when all
    ``controls`` are on and stay unchanged otherwise; every wire that is
    neither an operand nor a control (borrowed ancillae, bystanders) must
    come back with its initial value.
    """
    _check_lowered(circuit)
    n = 1 << circuit.width
    states = np.arange(n, dtype=np.int64)
    out = run_batch(circuit.gates, states)
    values = {k: register_values(states, r) for k, r in operands.items()}
    cmask = sum(1 << c for c in controls)
    expected = states.copy()
    keep = np.zeros(n, dtype=bool)
    for i in range(n):
        v = {k: int(a[i]) for k, a in values.items()}
        if not domain(v):
            continue
        keep[i] = True
        if (i & cmask) != cmask:
            continue
        e = i
        for k, val in oracle(v).items():
            reg = operands[k]
            for b, w in enumerate(reg):
                e = (e & ~(1 << w)) | (((val >> b) & 1) << w)
        expected[i] = e
    bad = np.nonzero(keep & (expected != out))[0]
    if len(bad):
        i = int(bad[0])
        return Verdict(False, int(keep.sum()), (i, int(expected[i]), int(out[i])))
    return Verdict(True, int(keep.sum()))


def check_clean_restored(circuit: Circuit, clean: Sequence[int] | None = None) -> None:
    """Raise :class:`LedgerViolation` if a clean wire can come back nonzero."""
    clean = tuple(circuit.clean_wires if clean is None else clean)
    if not clean:
        return
    cm = sum(1 << w for w in clean)
    states = np.arange(1 << circuit.width, dtype=np.int64)
    states = states[(states & cm) == 0]
    out = run_batch(circuit.gates, states)
    bad = np.nonzero(out & cm)[0]
    if len(bad):
        i = int(states[bad[0]])
        raise LedgerViolation(f"clean wire left dirty for input {i:#b}")
