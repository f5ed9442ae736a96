"""
Modular bimultiplication from flips
====================================

Modular offsets are built from three reflections of a register, and
scaled additions from offsets.  Chaining scaled additions with a
negation gives ``x <- K x, y <- K^-1 y (mod R)`` on two registers
without any further wires.
"""

# %%
from dirtyperiod.registry import Params, instance

inst = instance("mod_bimultiply", Params(R=15, K=7))
print("width:", inst.circuit.width, "operands:", inst.operands)
print(inst.verify())

# %%
# Read a couple of values straight off the circuit.
from dirtyperiod.sim import run_classical


def load(x, y):
    return x | (y << 4)


for x, y in [(2, 3), (1, 1), (14, 0)]:
    out = run_classical(inst.circuit, load(x, y))
    print(f"x={x:2d} y={y:2d} -> x={out & 15:2d} y={out >> 4:2d}")

# %%
# Controlled, as period finding uses it, on a 32-bit modulus.
from dirtyperiod import modular
from dirtyperiod.circuit import Builder
from dirtyperiod.lowering import measure_resources

n = 32
R = (1 << n) - 5
b = Builder(2 * n + 1)
x, y, ctl = tuple(range(n)), tuple(range(n, 2 * n)), (2 * n,)
with b.op(x, y, ctl):
    modular.mod_bimultiply(b, 3, R, x, y, ctl)
rep = measure_resources(b.build())
print(f"n=32: toffolis={rep.toffoli_count:,} depth={rep.depth:,} "
      f"dirty borrowed={rep.dirty_highwater}")
