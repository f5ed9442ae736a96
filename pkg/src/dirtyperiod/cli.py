"""Command-line front end: synthesize, verify and factor.

Exit codes: 0 success, 1 verification or factoring failure, 2 usage error.
"""
from __future__ import annotations

import argparse
import math
import os
import sys
from pathlib import Path

from .circuit import CircuitError, parse_gate_list
from .lowering import measure_resources
from .registry import REGISTRY, ALIASES, Params, canonical_name, instance
from .sim import MAX_EXHAUSTIVE_WIDTH, check_contract

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _op_names() -> str:
    return ", ".join(sorted(set(REGISTRY) | set(ALIASES)))


def _add_params(p: argparse.ArgumentParser) -> None:
    p.add_argument("-n", type=int, default=None, help="target register size")
    p.add_argument("-m", type=int, default=None,
                   help="second register size (adder input, pivot register, comparison target)")
    p.add_argument("-K", type=int, default=None, help="compile-time constant")
    p.add_argument("-R", type=int, default=None, help="modulus")
    p.add_argument("-c", "--controls", type=int, default=0, dest="controls",
                   help="number of control wires")
    p.add_argument("--shift", type=int, default=1, help="rotation amount for bit_rotate")
    p.add_argument("--variant", choices=("many", "single"), default=None,
                   help="increment construction")
    p.add_argument("--extra", type=int, default=None,
                   help="spare wires for borrowing (default: fewest that work)")


def _params(args) -> Params:
    n = args.n
    if n is None:
        n = 4
        if args.R is not None and args.R > 1:
            n = (args.R - 1).bit_length()
    return Params(n=n, m=args.m, K=1 if args.K is None else args.K, R=args.R,
                  c=args.controls, shift=args.shift, variant=args.variant)


def _instance(args):
    try:
        name = canonical_name(args.op)
    except KeyError:
        raise UsageError(f"unknown construction {args.op!r}; known: {_op_names()}")
    if name.startswith("mod_") and args.R is None:
        raise UsageError(f"{name} needs -R")
    try:
        return instance(name, _params(args), args.extra)
    except (CircuitError, ValueError) as exc:
        raise UsageError(f"cannot build {name}: {exc}")


def cmd_synthesize(args) -> int:
    inst = _instance(args)
    circ = inst.circuit
    text = circ.to_text()
    if parse_gate_list(text) != circ:
        print("round-trip mismatch between serialized and built circuit", file=sys.stderr)
        return EXIT_FAIL
    if args.out:
        Path(args.out).write_text(text)
    report = measure_resources(circ)
    print(f"# {inst.name}: operands "
          + " ".join(f"{k}={list(v)}" for k, v in inst.operands.items())
          + f" controls={list(inst.controls)} spare={inst.extra}")
    print(report.to_json() if args.json else report.to_text(), end="" if not args.json else "\n")
    print("round-trip: ok")
    return EXIT_OK


def cmd_verify(args) -> int:
    target = args.target
    from_file = os.path.exists(target)
    if from_file:
        if not args.op:
            raise UsageError("verifying a gate-list file needs --op for the oracle")
    else:
        args.op = target
    inst = _instance(args)
    circ = inst.circuit
    if from_file:
        try:
            circ = parse_gate_list(Path(target).read_text())
        except (CircuitError, ValueError) as exc:
            raise UsageError(f"{target}: {exc}")
    if circ.width > MAX_EXHAUSTIVE_WIDTH:
        raise UsageError(f"width {circ.width} exceeds the exhaustive limit {MAX_EXHAUSTIVE_WIDTH}")
    if circ.width < inst.circuit.width:
        raise UsageError(f"{target}: width {circ.width} smaller than the {inst.name} layout")
    if circ.max_controls > 2:
        from .arith import lower_mcx_circuit
        circ = lower_mcx_circuit(circ)
    verdict = check_contract(circ, inst.operands, inst.oracle, inst.domain, inst.controls)
    used = {w for r in inst.operands.values() for w in r} | set(inst.controls)
    swept = [w for w in range(circ.width) if w not in used]
    print(f"{inst.name}: {verdict}")
    print(f"dirty sweep: {len(swept)} spare wire(s) {swept} over all {1 << len(swept)} initial values;"
          f" {len(inst.controls)} control(s) over all settings")
    if not verdict:
        i, e, a = verdict.counterexample
        print(f"counterexample: input={i} expected={e} actual={a}")
        return EXIT_FAIL
    return EXIT_OK


def cmd_shor(args) -> int:
    from .shor import (MAX_SIMULATED_MODULUS, FactoringFailure, ShorParams, allocate,
                       classical_precheck, count_program, factor)
    R = args.R
    if R % 2 == 0:
        raise UsageError(f"rejected: even modulus {R}")
    if R > MAX_SIMULATED_MODULUS:
        raise UsageError(f"rejected: modulus {R} exceeds the simulation limit {MAX_SIMULATED_MODULUS}")
    try:
        pre = classical_precheck(R)
    except ValueError as exc:
        raise UsageError(f"rejected: {exc}")
    if pre is not None:
        print(f"R={R}: classical factors {pre.factors[0]} x {pre.factors[1]} ({pre.method})")
        return EXIT_OK
    try:
        result = factor(R, max_trials=args.trials, seed=args.seed, p=args.p)
    except FactoringFailure as exc:
        print(f"R={R}: {exc}; samples {exc.samples}")
        return EXIT_FAIL
    budget = result.budget or allocate((R - 1).bit_length())[1]
    print(f"R={R} seed={args.seed}")
    print(f"bases: {result.bases}")
    print(f"samples: {result.samples}")
    print(f"periods: {result.periods}")
    print(f"factors: {result.factors[0]} {result.factors[1]} ({result.method}, {result.trials} trial(s))")
    print(f"budget: clean={budget.clean} dirty={budget.dirty} total={budget.total}")
    B = result.bases[-1]
    if math.gcd(B, R) == 1:
        counts = count_program(ShorParams(R, B, args.p))
        print(f"gates (base {B}): not={counts.not_count} cnot={counts.cnot_count} "
              f"toffoli={counts.toffoli_count} hadamard={counts.hadamard_count} "
              f"rotation={counts.rotation_count} measure={counts.measurement_count} "
              f"depth={counts.depth}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dirtyperiod",
        description="Reversible arithmetic on dirty ancillae and small-scale period finding.")
    sub = parser.add_subparsers(dest="command", required=True)

    syn = sub.add_parser("synthesize", help="lower a construction to a gate list")
    syn.add_argument("op", help=f"one of: {_op_names()}")
    _add_params(syn)
    syn.add_argument("--out", help="write the gate list here")
    syn.add_argument("--json", action="store_true", help="print the report as JSON")
    syn.set_defaults(func=cmd_synthesize)

    ver = sub.add_parser("verify", help="exhaustively check a construction or gate-list file")
    ver.add_argument("target", help="construction name or gate-list file")
    ver.add_argument("--op", help="construction whose oracle a file is checked against")
    _add_params(ver)
    ver.set_defaults(func=cmd_verify)

    sh = sub.add_parser("shor", help="factor a small odd composite by simulated period finding")
    sh.add_argument("-R", type=int, required=True, help="odd composite modulus <= 63")
    sh.add_argument("--trials", type=int, default=10)
    sh.add_argument("--seed", type=int, default=1)
    sh.add_argument("--p", type=int, default=None, help="phase bits (default 2n)")
    sh.set_defaults(func=cmd_shor)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
