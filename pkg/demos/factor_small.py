"""
Factoring 15 and 21 with a mostly dirty ancilla register
========================================================

One phase qubit is measured and reused every round.  The ancilla
register only needs its top bit clean; the rest may start in any state
and is restored once the work register has been read.
"""

# %%
import numpy as np

from dirtyperiod.quantum import phase_estimation_distribution, total_variation
from dirtyperiod.shor import ShorParams, build_period_finding, factor, sample_phase

program = build_period_finding(ShorParams(15, 2))
print("layout:", program.layout)
print("budget:", program.budget)

# %%
# Sample the phase register and compare with the textbook circuit.
rng = np.random.default_rng(0)
N = 1 << program.params.bits
hist = np.zeros(N)
for _ in range(2000):
    hist[sample_phase(program, rng).value("phase")] += 1
ref = phase_estimation_distribution(15, 2, program.params.bits)
print("peaks:", np.nonzero(hist)[0])
print("total variation vs reference:", round(total_variation(hist / hist.sum(), ref), 4))

# %%
# Whatever the dirty wires held comes back.
lay = program.layout
for v in range(8):
    res = sample_phase(program, v, dirty_value=v)
    back = int(np.argmax(res.state.register_distribution(lay.ancilla)))
    print(f"dirty in={v} out={back} phase sample={res.value('phase')}")

# %%
for R in (15, 21, 33, 35):
    r = factor(R, seed=1)
    print(R, "=", r.factors[0], "x", r.factors[1], f"({r.method}, bases {r.bases})")
