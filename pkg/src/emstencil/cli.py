"""Command line interface.

    emstencil run <config.json> [--jobs N] [--out report.csv] [--trace-dir D]
    emstencil tables
    emstencil oracle-check [--budget N]

Exit code is nonzero iff any experiment row fails its tolerance or any oracle
check finds a counterexample.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path


def _cmd_run(args) -> int:
    from emstencil import bench

    config = bench.load_config(args.config)
    rows = bench.run_experiments(config, jobs=args.jobs)
    csv = bench.rows_to_csv(rows)
    if args.out:
        Path(args.out).write_text(csv, encoding="utf-8")
        print(f"wrote {len(rows)} rows to {args.out}")
    else:
        sys.stdout.write(csv)
    if args.trace_dir:
        _dump_traces(config, args.trace_dir)
    bad = [r for r in rows if r["status"] not in ("pass", "bounds-only")]
    for r in bad:
        print(f"FAILED: {r['kind']} {r['sides']}: {r['status']}", file=sys.stderr)
    return 1 if bad else 0


def _dump_traces(config: dict, trace_dir: str) -> None:
    """Re-run the desk-scale experiments with instruction tracing enabled."""
    from emstencil import bench
    from emstencil.grid import GridSpec, StencilSpec, vertex_count
    from emstencil.layouts import build_layout
    from emstencil.machine import Fidelity, Machine, MachineConfig
    from emstencil.sweeps import make_plan, run_sweep

    out = Path(trace_dir)
    out.mkdir(parents=True, exist_ok=True)
    for i, entry in enumerate(config.get("experiments", [])):
        spec = bench.ExperimentSpec.from_dict(entry)
        grid = GridSpec(spec.sides)
        if vertex_count(grid) > bench.FULL_AUTO_LIMIT:
            continue  # tracing billions of instructions helps nobody
        layout = build_layout(spec.kind, grid, StencilSpec(spec.s), MachineConfig(spec.M, spec.B))
        trace: list[str] = []
        machine = Machine(MachineConfig(spec.M, spec.B), layout, Fidelity.COUNT_ONLY, trace=trace)
        run_sweep(make_plan(layout), machine, layout)
        name = f"{i:03d}_{spec.kind.value}_{'x'.join(map(str, spec.sides))}.trace"
        (out / name).write_text("\n".join(trace) + "\n", encoding="utf-8")
        print(f"trace: {out / name} ({len(trace)} records)")


def _cmd_tables(args) -> int:
    from emstencil import bench

    print(bench.report_tables())
    return 0


def _cmd_oracle_check(args) -> int:
    from emstencil.combinatorics import ball_weight, boundary_weight
    from emstencil.oracles import brute_ball_weights, exhaustive_isoperimetry

    failures = 0
    for n in range(1, 5):
        r_max = 8 if n <= 3 else 6
        for row in brute_ball_weights(n, r_max):
            ok = (
                row.ball == ball_weight(n, row.r)
                and row.ball - row.inner_core
                == (ball_weight(n, row.r) - (ball_weight(n, row.r - 1) if row.r else 0))
            )
            if row.r >= 1:
                ok = ok and ball_weight(n, row.r) - ball_weight(n, row.r - 1) == boundary_weight(n, row.r)
            if not ok:
                failures += 1
                print(f"FAIL ball weights n={n} r={row.r}: {row}")
        print(f"ball weights n={n}: brute force agrees up to r={r_max}")
    for k, cap in ((4, 8), (6, 5)):
        verdicts = exhaustive_isoperimetry(k, 2, cap, budget=args.budget)
        bad = [v for v in verdicts if not (v.closure_ok and v.core_ok)]
        failures += len(bad)
        for v in bad:
            print(f"FAIL isoperimetry Z_{k}^2 v={v.weight}: {v}")
        print(f"isoperimetry Z_{k}^2 weights 1..{cap}: no counterexamples")
    print("oracle-check:", "FAILED" if failures else "all checks passed")
    return 1 if failures else 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="emstencil", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a config of sweep experiments")
    p_run.add_argument("config")
    p_run.add_argument("--jobs", type=int, default=1)
    p_run.add_argument("--out", default=None)
    p_run.add_argument("--trace-dir", default=None)
    p_run.set_defaults(func=_cmd_run)

    p_tables = sub.add_parser("tables", help="print the bound comparison tables")
    p_tables.set_defaults(func=_cmd_tables)

    p_oracle = sub.add_parser("oracle-check", help="brute-force combinatorics checks")
    p_oracle.add_argument("--budget", type=int, default=10**8)
    p_oracle.set_defaults(func=_cmd_oracle_check)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
