"""Period finding with one phase qubit and a mostly-dirty ancilla register.

Wire layout for an ``n``-bit modulus (width ``2n + 1``)::

    0            phase qubit (clean, reused every round)
    1 .. n       work register (clean, starts at 1)
    n+1 .. 2n-1  ancilla register, dirty part
    2n           ancilla MSB (clean)

Each round multiplies the work register by ``B**(2**k)`` and the ancilla
register by its inverse, controlled by the phase qubit.  At the end the
work register is measured and its value ``w`` drives an uncontrolled
bimultiplication that puts both registers back.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np

from .circuit import Builder, Circuit, CircuitError
from .lowering import DepthTracker
from .modular import mod_bimultiply, register_size
from .quantum import (Classical, Conditional, Hadamard, Measure, Phase, Reset,
                      run_semiclassical)
from .sim import extract_permutation

MAX_SIMULATED_MODULUS = 63


class FactoringFailure(RuntimeError):
    def __init__(self, msg: str, samples: list):
        super().__init__(msg)
        self.samples = samples


@dataclass(frozen=True)
class QubitBudget:
    clean: int
    dirty: int
    total: int


@dataclass(frozen=True)
class ShorParams:
    R: int
    B: int
    p: int | None = None
    seed: int = 0

    def __post_init__(self):
        if self.R < 3 or self.R % 2 == 0:
            raise CircuitError(f"modulus must be odd and at least 3, got {self.R}")
        if not 1 < self.B < self.R:
            raise CircuitError(f"base {self.B} outside (1, {self.R})")
        if math.gcd(self.B, self.R) != 1:
            raise CircuitError(f"base {self.B} shares factor {math.gcd(self.B, self.R)} with {self.R}")

    @property
    def n(self) -> int:
        return register_size(self.R)

    @property
    def bits(self) -> int:
        return 2 * self.n if self.p is None else self.p


@dataclass(frozen=True)
class Layout:
    phase: int
    work: tuple
    ancilla: tuple

    @property
    def width(self) -> int:
        return 2 * len(self.work) + 1

    @property
    def clean(self) -> tuple:
        return (self.phase,) + self.work + self.ancilla[-1:]


@dataclass
class PeriodProgram:
    params: ShorParams
    layout: Layout
    budget: QubitBudget
    ops: list
    multipliers: list  # in application order


@dataclass
class PeriodResult:
    samples: list
    period: int | None
    trials: int
    work_values: list = field(default_factory=list)


def allocate(n: int) -> tuple[Layout, QubitBudget]:
    """Lay out the registers through the ancilla broker and report the budget."""
    width = 2 * n + 1
    b = Builder(width, clean=(0, *range(1, n + 1), 2 * n))
    phase = b.borrow_clean(1)[0]
    work = tuple(b.borrow_clean(n))
    msb = b.borrow_clean(1)
    low = tuple(b.borrow_dirty(n - 1))
    layout = Layout(phase, work, low + tuple(msb))
    lg = b.ledger
    budget = QubitBudget(lg.clean_highwater, lg.dirty_highwater, width)
    b.release(b.ledger.active_borrows.copy())
    return layout, budget


def bimultiply_circuit(k: int, modulus: int, controlled: bool) -> Circuit:
    """Lowered (controlled) bimultiplication on the standard layout.

    The work register is the multiplied one, the ancilla register gets the
    inverse.  Only the layout's own wires are used.
    """
    n = register_size(modulus)
    layout, _ = allocate(n)
    b = Builder(layout.width)
    controls = (layout.phase,) if controlled else ()
    with b.op(layout.work, layout.ancilla, controls):
        mod_bimultiply(b, k, modulus, layout.work, layout.ancilla, controls)
    circ = b.build()
    if circ.ledger.dirty_highwater:
        raise CircuitError("bimultiplication reached outside its layout")
    return circ


@lru_cache(maxsize=256)
def _bimultiply_permutation(k: int, modulus: int, controlled: bool) -> np.ndarray:
    return extract_permutation(bimultiply_circuit(k, modulus, controlled))


def _bimultiply_block(k: int, modulus: int, controlled: bool, lazy: bool) -> Classical:
    label = f"{'c-' if controlled else ''}bimul {k} mod {modulus}"
    if lazy:
        return Classical(np.empty(0, dtype=np.int64), label)
    return Classical(_bimultiply_permutation(k, modulus, controlled), label)


def apply_fixup(program: PeriodProgram, w: int, lazy: bool = False) -> list:
    """Ops restoring the ancilla register once the work register read ``w``.

    The ancilla holds ``w**-1 * y0``; multiplying it by ``w`` returns ``y0``
    and the matching inverse takes the work register from ``w`` to 1.
    """
    R = program.params.R
    if math.gcd(w, R) != 1:
        raise CircuitError(f"work register value {w} not invertible mod {R}")
    lay = program.layout
    ops = []
    if w != 1:
        # roles swap: the ancilla is the multiplied register here
        perm = (np.empty(0, dtype=np.int64) if lazy
                else _fixup_permutation(w, R, len(lay.work)))
        ops.append(Classical(perm, f"fixup bimul {w} mod {R}"))
    ops.append(Reset(lay.work[0]))
    return ops


@lru_cache(maxsize=256)
def _fixup_permutation(w: int, modulus: int, n: int) -> np.ndarray:
    layout, _ = allocate(n)
    b = Builder(layout.width)
    with b.op(layout.ancilla, layout.work):
        mod_bimultiply(b, w, modulus, layout.ancilla, layout.work)
    return extract_permutation(b.build())


def build_period_finding(params: ShorParams, lazy: bool = False) -> PeriodProgram:
    """Semiclassical program sampling one ``p``-bit phase estimate.

    Rounds run from the largest power down, so the phase bits come out
    least significant first; each round undoes the phase contributed by
    the bits already measured.  ``lazy`` skips the permutation extraction
    (for budget and layout queries).
    """
    n, p, R = params.n, params.bits, params.R
    layout, budget = allocate(n)
    q = layout.phase
    ops: list = [_set_one(layout)]
    multipliers = []
    for j in range(p):
        k = p - 1 - j
        mult = pow(params.B, 1 << k, R)
        multipliers.append(mult)
        ops.append(Hadamard(q))
        if mult != 1:
            ops.append(_bimultiply_block(mult, R, True, lazy))
        ops.append(Phase(q, _correction(j)))
        ops.append(Hadamard(q))
        ops.append(Measure(q, "phase"))
        ops.append(Reset(q))
    for w in layout.work:
        ops.append(Measure(w, "work"))
    program = PeriodProgram(params, layout, budget, ops, multipliers)
    ops.append(Conditional(lambda rec: apply_fixup(program, _read(rec["work"]), lazy)))
    return program


def _read(bits: Sequence[int]) -> int:
    return sum(b << i for i, b in enumerate(bits))


def _set_one(layout: Layout) -> Classical:
    size = 1 << layout.width
    perm = np.arange(size, dtype=np.int64) ^ (1 << layout.work[0])
    return Classical(perm, "work <- 1")


def _correction(j: int):
    def angle(record: dict) -> float:
        bits = record.get("phase", [])
        return -2 * math.pi * sum(bits[m] / (1 << (j - m + 1)) for m in range(j))
    return angle


def sample_phase(program: PeriodProgram, seed=None, dirty_value: int = 0):
    """One run of the program; returns the semiclassical result."""
    lay = program.layout
    if dirty_value >> (len(lay.ancilla) - 1):
        raise CircuitError("the ancilla MSB must start clean")
    initial = 0
    for i, w in enumerate(lay.ancilla):
        initial |= ((dirty_value >> i) & 1) << w
    return run_semiclassical(program.ops, lay.width, seed, initial)


# ---------------------------------------------------------------------------
# resource counting

@dataclass
class ProgramCounts:
    not_count: int = 0
    cnot_count: int = 0
    toffoli_count: int = 0
    hadamard_count: int = 0
    rotation_count: int = 0
    measurement_count: int = 0
    depth: int = 0

    @property
    def gate_count(self) -> int:
        return (self.not_count + self.cnot_count + self.toffoli_count
                + self.hadamard_count + self.rotation_count)


def count_program(params: ShorParams, fixup_value: int | None = None) -> ProgramCounts:
    """Gate counts and depth of the full lowered program, streamed block by block.

    The fixup multiplier depends on a measurement; ``fixup_value``
    (default ``B``) stands in for it.
    """
    n, p, R = params.n, params.bits, params.R
    layout, _ = allocate(n)
    counts = ProgramCounts()
    depth = DepthTracker(layout.width)
    q = layout.phase

    def feed(circ: Circuit) -> None:
        for controls, _t in circ.gates:
            c = len(controls)
            if c == 0:
                counts.not_count += 1
            elif c == 1:
                counts.cnot_count += 1
            else:
                counts.toffoli_count += 1
        depth.feed(circ.gates)

    counts.not_count += 1
    depth.touch((layout.work[0],))
    for j in range(p):
        mult = pow(params.B, 1 << (p - 1 - j), R)
        counts.hadamard_count += 2
        counts.rotation_count += 1
        counts.measurement_count += 1
        depth.touch((q,))
        if mult != 1:
            feed(bimultiply_circuit(mult, R, True))
        depth.touch((q,))
        depth.touch((q,))
        depth.touch((q,))
    counts.measurement_count += n
    w = params.B if fixup_value is None else fixup_value
    b = Builder(layout.width)
    with b.op(layout.ancilla, layout.work):
        mod_bimultiply(b, w, R, layout.ancilla, layout.work)
    feed(b.build())
    counts.not_count += 1
    depth.touch((layout.work[0],))
    counts.depth = depth.depth
    return counts


# ---------------------------------------------------------------------------
# classical post-processing

def continued_fractions(s: int, N: int, R: int) -> list:
    """Denominators of the convergents of ``s/N`` below ``R``, largest first."""
    if not 0 <= s < N:
        raise ValueError(f"sample {s} outside [0, {N})")
    if s == 0:
        return []
    dens = []
    h0, h1 = 1, 0  # denominators q_{-2}, q_{-1}
    a, b = s, N
    while b:
        quot, rem = divmod(a, b)
        h0, h1 = h1, quot * h1 + h0
        if h1 >= R:
            break
        dens.append(h1)
        a, b = b, rem
    out = sorted({d for d in dens if d > 1}, reverse=True)
    return out


def multiplicative_order(base: int, modulus: int) -> int:
    """Brute-force order, used as a test oracle."""
    v, k = base % modulus, 1
    while v != 1:
        v = v * base % modulus
        k += 1
    return k


def _period_from_samples(base: int, modulus: int, candidates: Sequence[int]) -> int | None:
    # try each denominator, small multiples of it, and lcms of pairs
    tried = set()
    pool = list(candidates)
    pool += [math.lcm(a, b) for i, a in enumerate(candidates) for b in candidates[i + 1:]]
    for d in pool:
        for mult in range(1, 4):
            l = d * mult
            if l in tried or l >= modulus:
                continue
            tried.add(l)
            if pow(base, l, modulus) == 1:
                return l
    return None


def find_period(params: ShorParams, rng: np.random.Generator, max_runs: int = 2,
                program: PeriodProgram | None = None) -> PeriodResult:
    program = program or build_period_finding(params)
    N = 1 << params.bits
    samples, works, cands = [], [], []
    for run in range(1, max_runs + 1):
        res = sample_phase(program, rng, dirty_value=int(rng.integers(1 << (params.n - 1))))
        s = res.value("phase")
        samples.append(s)
        works.append(res.value("work"))
        cands.extend(continued_fractions(s, N, params.R))
        l = _period_from_samples(params.B, params.R, sorted(set(cands), reverse=True))
        if l is not None:
            return PeriodResult(samples, l, run, works)
    return PeriodResult(samples, None, max_runs, works)


def _integer_root(R: int, k: int) -> int:
    r = round(R ** (1 / k))
    for c in (r - 1, r, r + 1):
        if c > 1 and c ** k == R:
            return c
    return 0


def _is_prime(R: int) -> bool:
    return R >= 2 and all(R % d for d in range(2, math.isqrt(R) + 1))


@dataclass
class FactorResult:
    R: int
    factors: tuple
    trials: int
    method: str
    samples: list = field(default_factory=list)
    periods: list = field(default_factory=list)
    bases: list = field(default_factory=list)
    budget: QubitBudget | None = None


def classical_precheck(R: int) -> FactorResult | None:
    """Handle even moduli and prime powers without any circuit."""
    if R < 4 or _is_prime(R):
        raise ValueError(f"{R} is not composite")
    if R % 2 == 0:
        return FactorResult(R, (2, R // 2), 0, "even")
    for k in range(R.bit_length(), 1, -1):
        r = _integer_root(R, k)
        if r:
            return FactorResult(R, (r, R // r), 0, "prime power")
    return None


def factor(R: int, max_trials: int = 10, seed=0, p: int | None = None) -> FactorResult:
    """Find a nontrivial factorisation ``(a, b)`` of ``R`` with ``a <= b``."""
    pre = classical_precheck(R)
    if pre is not None:
        return pre
    if R > MAX_SIMULATED_MODULUS:
        raise ValueError(f"modulus {R} too large to simulate (limit {MAX_SIMULATED_MODULUS})")
    rng = np.random.default_rng(seed)
    result = FactorResult(R, (), 0, "period")
    result.budget = allocate(register_size(R))[1]
    for trial in range(1, max_trials + 1):
        result.trials = trial
        B = int(rng.integers(2, R - 1))
        result.bases.append(B)
        g = math.gcd(B, R)
        if g > 1:
            result.factors, result.method = tuple(sorted((g, R // g))), "gcd"
            return result
        pr = find_period(ShorParams(R, B, p), rng)
        result.samples.extend(pr.samples)
        result.periods.append(pr.period)
        l = pr.period
        if l is None or l % 2:
            continue
        half = pow(B, l // 2, R)
        if half == R - 1:
            continue
        f = math.gcd(half - 1, R)
        if 1 < f < R:
            result.factors = tuple(sorted((f, R // f)))
            return result
    raise FactoringFailure(f"no factor of {R} after {max_trials} trials", result.samples)
