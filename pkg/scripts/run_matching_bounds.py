#!/usr/bin/env python3
"""Reproduce the matching-bound experiments at full scale.

Runs the 32768^2 block-aligned diagonal sweep and the hexagonal sweep (side
configurable) in CountOnly fidelity and prints the measured leading rates next
to the predicted constants.  Expect a few minutes of runtime.
"""

import argparse
import math
import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from emstencil.bounds import LayoutKind, lower_bound_constant, upper_bound_leading
from emstencil.grid import GridSpec, StencilSpec
from emstencil.layouts import build_layout
from emstencil.layouts.ceilings import noncompulsory_ceiling
from emstencil.machine import Fidelity, Machine, MachineConfig
from emstencil.sweeps import make_plan, run_sweep


def run(kind, sides, s, M, B):
    t0 = time.time()
    layout = build_layout(kind, GridSpec(sides), StencilSpec(s), MachineConfig(M, B))
    machine = Machine(MachineConfig(M, B), layout, Fidelity.COUNT_ONLY)
    run_sweep(make_plan(layout), machine, layout)
    stats, complete = machine.run_report()
    n = math.prod(sides)
    nc = stats.total_noncompulsory
    predicted = upper_bound_leading(kind, len(sides), s, M, B) * n
    lower = lower_bound_constant(len(sides), s, M) * n / B
    print(f"{kind.value} {'x'.join(map(str, sides))}  m={layout.shape.m}  "
          f"[{time.time()-t0:.0f}s]")
    print(f"  complete={complete}  peak footprint {machine.max_footprint}/{M}")
    print(f"  non-compulsory {nc}  predicted leading {predicted:.0f}  "
          f"ratio {nc/predicted:.4f}")
    print(f"  ceiling {noncompulsory_ceiling(layout):.0f}  lower bound {lower:.0f}")
    print()


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--hex-side", type=int, default=1024)
    ap.add_argument("--skip-2d", action="store_true")
    args = ap.parse_args()
    if not args.skip_2d:
        run(LayoutKind.DIAGONAL_2D, (32768, 32768), 1, 4096, 16)
    run(LayoutKind.HEX_3D, (args.hex_side,) * 3, 1, 6144, 8)


if __name__ == "__main__":
    main()
