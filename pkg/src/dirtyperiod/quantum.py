"""Small statevector simulator with mid-circuit measurement and feedback."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence, Union

import numpy as np

from .circuit import Circuit, CircuitError
from .sim import extract_permutation

MAX_STATEVECTOR_WIDTH = 14
NORM_TOLERANCE = 1e-6

_H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)


class NormDrift(CircuitError):
    pass


class StateVector:
    """Amplitudes over ``2**width`` basis states; bit ``q`` of the index is wire ``q``."""

    def __init__(self, width: int, basis_state: int = 0):
        if width > MAX_STATEVECTOR_WIDTH:
            raise CircuitError(f"statevector width {width} exceeds {MAX_STATEVECTOR_WIDTH}")
        self.width = width
        self.amps = np.zeros(1 << width, dtype=complex)
        self.amps[basis_state] = 1.0

    @classmethod
    def from_amplitudes(cls, amps: np.ndarray) -> "StateVector":
        width = int(np.log2(len(amps)))
        sv = cls(width)
        sv.amps = np.asarray(amps, dtype=complex).copy()
        return sv

    def _split(self, q: int) -> np.ndarray:
        return self.amps.reshape(-1, 2, 1 << q)

    def norm(self) -> float:
        return float(np.vdot(self.amps, self.amps).real)

    def apply_1q(self, q: int, u: np.ndarray) -> None:
        v = self._split(q)
        self.amps = np.einsum("ab,ibj->iaj", u, v).reshape(-1)

    def h(self, q: int) -> None:
        self.apply_1q(q, _H)

    def x(self, q: int) -> None:
        v = self._split(q)
        self.amps = v[:, ::-1, :].reshape(-1).copy()

    def phase(self, q: int, theta: float, controls: Sequence[int] = ()) -> None:
        """Multiply by ``exp(i theta)`` wherever ``q`` and every control are 1."""
        mask = (1 << q) | sum(1 << c for c in controls)
        idx = np.arange(len(self.amps))
        self.amps[(idx & mask) == mask] *= np.exp(1j * theta)

    def swap(self, a: int, b: int) -> None:
        idx = np.arange(len(self.amps))
        ba, bb = (idx >> a) & 1, (idx >> b) & 1
        src = idx ^ ((ba ^ bb) << a) ^ ((ba ^ bb) << b)
        self.amps = self.amps[src]

    def permute(self, perm: np.ndarray) -> None:
        """Apply a classical permutation: basis state ``i`` moves to ``perm[i]``."""
        out = np.empty_like(self.amps)
        out[perm] = self.amps
        self.amps = out

    def probability_one(self, q: int) -> float:
        return float(np.sum(np.abs(self._split(q)[:, 1, :]) ** 2))

    def measure(self, q: int, rng: np.random.Generator) -> int:
        p1 = self.probability_one(q)
        bit = int(rng.random() < p1)
        v = self._split(q).copy()
        v[:, 1 - bit, :] = 0
        keep = p1 if bit else 1 - p1
        self.amps = v.reshape(-1) / np.sqrt(keep)
        return bit

    def reset(self, q: int, rng: np.random.Generator) -> int:
        bit = self.measure(q, rng)
        if bit:
            self.x(q)
        return bit

    def register_distribution(self, reg: Sequence[int]) -> np.ndarray:
        probs = np.abs(self.amps) ** 2
        idx = np.arange(len(probs))
        vals = np.zeros_like(idx)
        for i, w in enumerate(reg):
            vals |= ((idx >> w) & 1) << i
        return np.bincount(vals, weights=probs, minlength=1 << len(reg))


# ---------------------------------------------------------------------------
# semiclassical programs

@dataclass(frozen=True)
class Hadamard:
    wire: int


@dataclass(frozen=True)
class Phase:
    """Z-axis rotation; ``angle`` may depend on the measurement record."""
    wire: int
    angle: Union[float, Callable[[dict], float]]
    controls: tuple = ()


@dataclass(frozen=True)
class Classical:
    """A reversible block given as a circuit or a precomputed permutation."""
    block: Union[Circuit, np.ndarray]
    label: str = ""

    def permutation(self) -> np.ndarray:
        if isinstance(self.block, Circuit):
            return extract_permutation(self.block)
        return self.block


@dataclass(frozen=True)
class Measure:
    wire: int
    key: str


@dataclass(frozen=True)
class Reset:
    wire: int


@dataclass(frozen=True)
class Conditional:
    """Ops generated from the measurement record at run time."""
    make: Callable[[dict], list]


Op = Union[Hadamard, Phase, Classical, Measure, Reset, Conditional]


@dataclass
class SemiclassicalResult:
    record: dict = field(default_factory=dict)
    state: StateVector | None = None

    def bits(self, key: str) -> list:
        return self.record.get(key, [])

    def value(self, key: str) -> int:
        """Bits recorded under ``key`` read LSB first."""
        return sum(b << i for i, b in enumerate(self.bits(key)))


def run_semiclassical(program: Sequence[Op], width: int, seed=None,
                      initial: int | StateVector = 0) -> SemiclassicalResult:
    """Execute ``program``; measurement outcomes are drawn from ``seed``."""
    rng = np.random.default_rng(seed)
    sv = initial if isinstance(initial, StateVector) else StateVector(width, initial)
    result = SemiclassicalResult(state=sv)
    _run(program, sv, rng, result.record)
    return result


def _run(program, sv: StateVector, rng, record: dict) -> None:
    for op in program:
        if isinstance(op, Hadamard):
            sv.h(op.wire)
        elif isinstance(op, Phase):
            theta = op.angle(record) if callable(op.angle) else op.angle
            sv.phase(op.wire, theta, op.controls)
        elif isinstance(op, Classical):
            sv.permute(op.permutation())
        elif isinstance(op, Measure):
            record.setdefault(op.key, []).append(sv.measure(op.wire, rng))
        elif isinstance(op, Reset):
            sv.reset(op.wire, rng)
        elif isinstance(op, Conditional):
            _run(op.make(record), sv, rng, record)
        else:
            raise CircuitError(f"unknown program op {op!r}")
        if abs(sv.norm() - 1) > NORM_TOLERANCE:
            raise NormDrift(f"norm {sv.norm()} after {op!r}")


# ---------------------------------------------------------------------------
# ancilla-free increment

def qft_ops(wires: Sequence[int], inverse: bool = False) -> list:
    """QFT on ``wires`` (LSB first), bit-reversal swaps included."""
    wires = tuple(wires)
    n = len(wires)
    ops: list = []
    for j in reversed(range(n)):
        ops.append(Hadamard(wires[j]))
        for k in reversed(range(j)):
            ops.append(Phase(wires[j], np.pi / (1 << (j - k)), (wires[k],)))
    ops.extend(("swap", wires[i], wires[n - 1 - i]) for i in range(n // 2))
    if not inverse:
        return ops
    inv = []
    for op in reversed(ops):
        if isinstance(op, Phase):
            op = Phase(op.wire, -op.angle, op.controls)
        inv.append(op)
    return inv


def quantum_increment_bootstrap(target: Sequence[int]) -> list:
    """``|v> -> |v+1 mod 2^n>`` up to global phase without any ancilla.

    The Fourier transform diagonalises the increment; in between, each
    wire ``j`` gets a ``Z**(2**(j+1-n))`` phase, i.e. a column of
    fractional Z gates forming a phase gradient.
    """
    target = tuple(target)
    n = len(target)
    gradient = [Phase(w, 2 * np.pi * (1 << j) / (1 << n)) for j, w in enumerate(target)]
    return qft_ops(target) + gradient + qft_ops(target, inverse=True)


def apply_ops(sv: StateVector, ops: Sequence) -> None:
    for op in ops:
        if isinstance(op, tuple) and op[0] == "swap":
            sv.swap(op[1], op[2])
        elif isinstance(op, Hadamard):
            sv.h(op.wire)
        elif isinstance(op, Phase):
            sv.phase(op.wire, op.angle, op.controls)
        else:
            raise CircuitError(f"unsupported op {op!r}")


def unitary_of(ops: Sequence, width: int) -> np.ndarray:
    """Dense matrix of a gate sequence; column ``i`` is the image of ``|i>``."""
    cols = []
    for i in range(1 << width):
        sv = StateVector(width, i)
        apply_ops(sv, ops)
        cols.append(sv.amps)
    return np.array(cols).T


def equal_up_to_phase(u: np.ndarray, v: np.ndarray, tol: float = 1e-9) -> bool:
    k = np.unravel_index(np.argmax(np.abs(v)), v.shape)
    if abs(u[k]) < 1e-12:
        return False
    ph = u[k] / v[k]
    ph /= abs(ph)
    return bool(np.max(np.abs(u - ph * v)) < tol)


# ---------------------------------------------------------------------------
# dense reference for phase estimation

def phase_estimation_distribution(modulus: int, base: int, p: int, start: int = 1) -> np.ndarray:
    """Exact distribution of the ``p``-bit phase estimate of ``x -> base*x``.

    Textbook circuit: ``p`` phase qubits, controlled powers of the
    multiplication on a register starting at ``start``, full inverse QFT.
    """
    size = 1 << p
    values = np.empty(size, dtype=np.int64)
    v = start % modulus
    for x in range(size):
        values[x] = v
        v = v * base % modulus
    probs = np.zeros(size)
    for w in np.unique(values):
        probs += np.abs(np.fft.fft((values == w).astype(float))) ** 2
    return probs / size ** 2


def total_variation(p: np.ndarray, q: np.ndarray) -> float:
    return 0.5 * float(np.sum(np.abs(np.asarray(p) - np.asarray(q))))
