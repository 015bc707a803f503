"""Command-line interface: `run`, `compare` and `sweep`.

All output files are CSV (plus an optional SVG chart for sweeps), written
atomically so an interrupted invocation never leaves a partial file.
Exit codes: 0 success, 1 usage error, 2 configuration error, 3 simulation
error.
"""

from __future__ import annotations

import argparse
import os
import sys
import tempfile

from .config import ConfigError, default_document, build_config, load_document, make_policy
from .energy import Constituent
from .experiment import SweepSpec, compare_policies, sweep
from .simulator import run as run_simulation

USAGE_ERROR = 1
CONFIG_ERROR = 2
SIMULATION_ERROR = 3


def fmt(x: float) -> str:
    """Floats are printed with 9 significant digits."""
    return f"{x:.9g}"


def write_atomic(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=".part")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def ledger_csv(result) -> str:
    lines = ["node_id,constituent,subcategory,joules"]
    for node_id in result.node_ids:
        for constituent, sub, joules in result.ledgers[node_id].as_rows():
            lines.append(f"{node_id},{constituent},{sub},{fmt(joules)}")
    return "\n".join(lines) + "\n"


def summary_csv(result) -> str:
    lines = ["node_id,lifetime_s,censored,individual_j,local_j,global_j,"
             "sink_j,environment_j,b_individual,b_local,b_global"]
    for node_id in result.node_ids:
        led = result.ledgers[node_id]
        counts = result.packet_counts[node_id]
        lines.append(",".join([
            str(node_id),
            fmt(result.lifetimes[node_id]),
            "1" if result.node_censored[node_id] else "0",
            fmt(led.constituent_total(Constituent.INDIVIDUAL)),
            fmt(led.constituent_total(Constituent.LOCAL)),
            fmt(led.constituent_total(Constituent.GLOBAL)),
            fmt(led.constituent_total(Constituent.SINK)),
            fmt(led.constituent_total(Constituent.ENVIRONMENT)),
            str(counts["individual"]),
            str(counts["local"]),
            str(counts["global"]),
        ]))
    return "\n".join(lines) + "\n"


def sweep_csv(result) -> str:
    lines = ["policy,param,param_value,seed,lifetime_s,censored,total_j"]
    for row in result.rows:
        lines.append(",".join([
            row.policy,
            row.param,
            fmt(row.param_value),
            str(row.seed),
            fmt(row.lifetime),
            "1" if row.censored else "0",
            fmt(row.network_total),
        ]))
    return "\n".join(lines) + "\n"


def compare_csv(report) -> str:
    lines = ["seed,monitored_node,lifetime_random_s,lifetime_selective_s,"
             "censored_random,censored_selective,"
             "b_individual_random,b_local_random,b_global_random,"
             "b_individual_selective,b_local_selective,b_global_selective"]
    for row in report.rows:
        lines.append(",".join([
            str(row.seed),
            str(row.monitored if row.monitored is not None else -1),
            fmt(row.lifetime_random),
            fmt(row.lifetime_selective),
            "1" if row.censored_random else "0",
            "1" if row.censored_selective else "0",
            str(row.counts_random[0]), str(row.counts_random[1]), str(row.counts_random[2]),
            str(row.counts_selective[0]), str(row.counts_selective[1]), str(row.counts_selective[2]),
        ]))
    return "\n".join(lines) + "\n"


def sweep_svg(result) -> str:
    """Minimal self-contained line chart: mean lifetime vs swept value,
    one polyline per policy."""
    width, height = 640, 400
    margin = 60
    curves = result.mean_lifetime
    xs = [v for v, _ in next(iter(curves.values()))]
    all_y = [y for curve in curves.values() for _, y in curve]
    x_lo, x_hi = min(xs), max(xs)
    y_lo, y_hi = 0.0, max(all_y) * 1.05 or 1.0

    def px(x: float) -> float:
        return margin + (x - x_lo) / (x_hi - x_lo) * (width - 2 * margin)

    def py(y: float) -> float:
        return height - margin - (y - y_lo) / (y_hi - y_lo) * (height - 2 * margin)

    colors = {"random": "#c0392b", "selective": "#2471a3"}
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<line x1="{margin}" y1="{height - margin}" x2="{width - margin}" '
        f'y2="{height - margin}" stroke="black"/>',
        f'<line x1="{margin}" y1="{margin}" x2="{margin}" y2="{height - margin}" '
        f'stroke="black"/>',
        f'<text x="{width / 2}" y="{height - 15}" text-anchor="middle" '
        f'font-size="14">{result.spec.param} (m)</text>',
        f'<text x="18" y="{height / 2}" text-anchor="middle" font-size="14" '
        f'transform="rotate(-90 18 {height / 2})">mean lifetime (s)</text>',
    ]
    for i in range(5):
        xv = x_lo + i * (x_hi - x_lo) / 4
        yv = y_lo + i * (y_hi - y_lo) / 4
        parts.append(f'<text x="{px(xv):.1f}" y="{height - margin + 18}" '
                     f'text-anchor="middle" font-size="11">{xv:.3g}</text>')
        parts.append(f'<text x="{margin - 6}" y="{py(yv):.1f}" text-anchor="end" '
                     f'font-size="11">{yv:.3g}</text>')
    for i, (policy, curve) in enumerate(sorted(curves.items())):
        color = colors.get(policy, "#555555")
        points = " ".join(f"{px(x):.2f},{py(y):.2f}" for x, y in curve)
        parts.append(f'<polyline fill="none" stroke="{color}" stroke-width="2" '
                     f'points="{points}"/>')
        parts.append(f'<text x="{width - margin - 4}" y="{margin + 16 * (i + 1)}" '
                     f'text-anchor="end" font-size="12" fill="{color}">{policy}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on bad usage; this artifact reserves 2 for config
    problems, so usage failures are remapped to 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(USAGE_ERROR)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="wsnsim",
                     description="Deterministic sensor-network lifetime simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="simulate once and write per-node CSVs")
    p_run.add_argument("--config", help="JSON config file (defaults apply when omitted)")
    p_run.add_argument("--seed", type=int, default=0, help="random seed (default 0)")
    p_run.add_argument("--policy", choices=("random", "selective"), default="selective",
                       help="routing policy (default selective)")
    p_run.add_argument("--trace", help="write a tab-separated event trace to this file")
    p_run.add_argument("--out", required=True, help="output directory")

    p_cmp = sub.add_parser("compare", help="run both policies on matched seeds")
    p_cmp.add_argument("--config", help="JSON config file")
    p_cmp.add_argument("--seeds", type=int, default=50,
                       help="number of matched seeds (default 50)")
    p_cmp.add_argument("--base-seed", type=int, default=0)
    p_cmp.add_argument("--jobs", type=int, default=1, help="worker processes")
    p_cmp.add_argument("--out", required=True, help="output directory")

    p_swp = sub.add_parser("sweep", help="sweep one radius over a grid")
    p_swp.add_argument("--config", help="JSON config file")
    p_swp.add_argument("--param", choices=("sensing_radius", "tx_radius"), required=True)
    p_swp.add_argument("--min", type=float, required=True, dest="min_value")
    p_swp.add_argument("--max", type=float, required=True, dest="max_value")
    p_swp.add_argument("--steps", type=int, default=8)
    p_swp.add_argument("--seeds", type=int, default=20)
    p_swp.add_argument("--base-seed", type=int, default=0)
    p_swp.add_argument("--policy", choices=("random", "selective", "both"),
                       default="both")
    p_swp.add_argument("--jobs", type=int, default=1, help="worker processes")
    p_swp.add_argument("--svg", action="store_true",
                       help="also render sweep.svg (convenience chart)")
    p_swp.add_argument("--out", required=True, help="output directory")
    return parser


def _load(args) -> "SimConfig":
    doc = load_document(args.config) if args.config else default_document()
    policy = getattr(args, "policy", None)
    if policy in (None, "both"):
        policy = "selective"
    return build_config(doc, policy)


def cmd_run(args) -> int:
    config = _load(args)
    trace_fh = open(args.trace, "w", encoding="utf-8") if args.trace else None
    try:
        result = run_simulation(config, args.seed, trace=trace_fh)
    finally:
        if trace_fh is not None:
            trace_fh.close()
    write_atomic(os.path.join(args.out, "ledger.csv"), ledger_csv(result))
    write_atomic(os.path.join(args.out, "summary.csv"), summary_csv(result))
    mon = result.monitored_node if result.monitored_node is not None else -1
    state = "censored" if result.censored else "died"
    print(f"monitored node {mon}: lifetime {fmt(result.lifetime)} s ({state}); "
          f"generated {result.generated}, delivered {result.delivered}, "
          f"dropped {result.dropped}")
    return 0


def cmd_compare(args) -> int:
    if args.seeds < 1:
        raise UsageError("--seeds must be >= 1")
    config = _load(args)
    report = compare_policies(config, args.seeds, base_seed=args.base_seed,
                              workers=args.jobs)
    write_atomic(os.path.join(args.out, "compare.csv"), compare_csv(report))
    print(f"seeds: {report.seeds}")
    for policy in ("random", "selective"):
        print(f"{policy}: mean lifetime {fmt(report.mean_lifetime[policy])} s, "
              f"median {fmt(report.median_lifetime[policy])} s")
    print(f"selective wins: {report.selective_win_rate * 100:.1f}% of seeds")
    print("packet-overhead orderings satisfied: "
          f"global {report.overhead_rates['global'] * 100:.1f}%, "
          f"local {report.overhead_rates['local'] * 100:.1f}%, "
          f"individual {report.overhead_rates['individual'] * 100:.1f}%")
    return 0


def cmd_sweep(args) -> int:
    if args.steps < 2:
        raise UsageError("--steps must be >= 2")
    if args.seeds < 1:
        raise UsageError("--seeds must be >= 1")
    if args.min_value >= args.max_value:
        raise UsageError("--min must be < --max")
    config = _load(args)
    spec = SweepSpec(param=args.param, min_value=args.min_value,
                     max_value=args.max_value, steps=args.steps,
                     seeds=args.seeds, base_seed=args.base_seed)
    policies = ("random", "selective") if args.policy == "both" else (args.policy,)
    result = sweep(config, spec, policies=policies, workers=args.jobs)
    write_atomic(os.path.join(args.out, "sweep.csv"), sweep_csv(result))
    if args.svg:
        write_atomic(os.path.join(args.out, "sweep.svg"), sweep_svg(result))
    for policy in sorted(result.mean_lifetime):
        best = result.argmax[policy]
        flag = "interior" if result.argmax_interior(policy) else "boundary"
        print(f"{policy}: best mean lifetime at {args.param} = {fmt(best)} ({flag})")
    return 0


class UsageError(ValueError):
    pass


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if exc.code is not None else 0
    try:
        if args.command == "run":
            return cmd_run(args)
        if args.command == "compare":
            return cmd_compare(args)
        return cmd_sweep(args)
    except UsageError as exc:
        print(f"wsnsim: usage error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except ConfigError as exc:
        print(f"wsnsim: config error: {exc}", file=sys.stderr)
        return CONFIG_ERROR
    except Exception as exc:  # noqa: BLE001 - simulation failures exit 3
        print(f"wsnsim: simulation error: {exc}", file=sys.stderr)
        return SIMULATION_ERROR


def console_main() -> None:
    sys.exit(main())


if __name__ == "__main__":
    console_main()
