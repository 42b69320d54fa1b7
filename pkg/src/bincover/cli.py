"""Command line interface.

Verbs:
    opt solve / opt bound        exact optimum and load upper bound
    run                          run a strategy over an instance file
    oracle                       compute advice for an instance + covering
    bench run / plotdata / kernels
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .advicetape import AdviceTape
from .bench import (
    kernel_benchmark,
    plotdata,
    rows_to_csv,
    run_experiment,
)
from .model import (
    covering_from_jsonl,
    covering_score,
    covering_to_jsonl,
    parse_instance,
    validate_covering,
)
from .opt import DEFAULT_OPT_LIMIT, canonicalize, exact_opt, load_upper_bound
from .oracle import compute_advice, eps_from_bits
from .strategies import Dh2b, strategy_from_name


def _read_instance(path: str):
    return parse_instance(Path(path).read_text())


def _cmd_opt(args) -> int:
    sizes = _read_instance(args.instance)
    if args.action == "bound":
        print(load_upper_bound(sizes))
        return 0
    result = exact_opt(sizes, limit=args.limit)
    print(f"score {result.score} method {result.method}")
    if args.dump_covering:
        Path(args.dump_covering).write_text(covering_to_jsonl(result.covering))
    return 0


def _cmd_run(args) -> int:
    sizes = _read_instance(args.instance)
    strategy = strategy_from_name(args.strategy, args.bits)
    tape = None
    if args.advice:
        tape = AdviceTape.load(Path(args.advice).read_text())
    if isinstance(strategy, Dh2b) and tape is None:
        print("error: dh2b needs --advice (and --bits matching the oracle)",
              file=sys.stderr)
        return 2

    trace = None
    if args.trace:
        def trace(i, size, bin_idx, tag):
            print(f"item {i} size {size} -> bin {bin_idx} [{tag}]")

    covering = strategy.run(sizes, tape, trace) if tape is not None \
        else strategy.run(sizes, trace=trace)
    report = validate_covering(sizes, covering)
    if not report.ok:
        print(f"error: invalid covering: {report}", file=sys.stderr)
        return 1
    print(f"score {covering_score(covering)} bins {len(covering.bins)}")
    if args.dump_covering:
        Path(args.dump_covering).write_text(covering_to_jsonl(covering))
    return 0


def _cmd_oracle(args) -> int:
    sizes = _read_instance(args.instance)
    if args.opt == "auto":
        result = exact_opt(sizes, limit=args.limit)
        reference = result.covering
    else:
        reference = covering_from_jsonl(Path(args.opt).read_text(), sizes)
    reference = canonicalize(reference, sizes, args.bits,
                             eps_from_bits(args.bits))
    tape, plan = compute_advice(sizes, reference, args.bits)
    if args.out:
        Path(args.out).write_text(tape.dump())
    if args.dump_advice:
        sys.stdout.write(tape.dump())
    if args.plan_json:
        payload = {}
        for key, value in vars(plan).items():
            if key in ("good_set",):
                payload[key] = sorted(value)
            elif key == "bit_report":
                payload[key] = None if value is None else {
                    "bits_written": value.bits_written,
                    "breakdown": list(value.breakdown)}
            else:
                payload[key] = str(value) if value is not None else None
        Path(args.plan_json).write_text(json.dumps(payload, indent=2) + "\n")
    case = "beta-large" if plan.beta_large else plan.case
    print(f"advice {tape.bits_written} bits, case {case}")
    return 0


def _load_config(path: str) -> dict:
    text = Path(path).read_bytes()
    if path.endswith(".toml"):
        try:
            import tomllib
        except ImportError:
            import tomli as tomllib
        return tomllib.loads(text.decode())
    return json.loads(text)


def _cmd_bench(args) -> int:
    if args.bench_action == "run":
        config = _load_config(args.config)
        rows = run_experiment(config, deterministic=args.deterministic,
                              jobs=args.jobs)
        csv_text = rows_to_csv(rows, config)
        Path(args.out).write_text(csv_text)
        errors = sum(1 for r in rows if r.get("error"))
        print(f"wrote {len(rows)} rows to {args.out}"
              + (f" ({errors} with errors)" if errors else ""))
        return 1 if errors else 0
    if args.bench_action == "plotdata":
        text = Path(args.results).read_text()
        sys.stdout.write(plotdata(text, args.x, args.y))
        return 0
    if args.bench_action == "kernels":
        rows = kernel_benchmark(ns=args.n, reps=args.reps)
        print(f"{'n':>4} {'reps':>5} {'compiled_s':>11} {'pure_s':>10} "
              f"{'speedup':>8}")
        for row in rows:
            compiled = (f"{row['compiled_s']:.4f}"
                        if row["compiled_s"] is not None else "n/a")
            pure = f"{row['pure_s']:.4f}" if row["pure_s"] is not None else "n/a"
            speed = f"{row['speedup']:.1f}x" if "speedup" in row else "-"
            print(f"{row['n']:>4} {row['reps']:>5} {compiled:>11} {pure:>10} "
                  f"{speed:>8}")
        return 0
    raise AssertionError


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bincover",
        description="Online bin covering with advice: strategies, oracle, "
                    "exact optimum, and benchmarks.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_opt = sub.add_parser("opt", help="exact optimum / load bound")
    p_opt.add_argument("action", choices=["solve", "bound"])
    p_opt.add_argument("instance")
    p_opt.add_argument("--limit", type=int, default=DEFAULT_OPT_LIMIT)
    p_opt.add_argument("--dump-covering", metavar="PATH")
    p_opt.set_defaults(func=_cmd_opt)

    p_run = sub.add_parser("run", help="run a strategy over an instance")
    p_run.add_argument("--strategy", required=True,
                       help="dnf | dhk:<k> | dh2b")
    p_run.add_argument("--instance", required=True)
    p_run.add_argument("--advice", help="ADV1 tape file (dh2b)")
    p_run.add_argument("--bits", type=int,
                       help="advice bit width used by the oracle (dh2b)")
    p_run.add_argument("--trace", action="store_true",
                       help="print one line per placement decision")
    p_run.add_argument("--dump-covering", metavar="PATH")
    p_run.set_defaults(func=_cmd_run)

    p_orc = sub.add_parser("oracle", help="compute an advice tape")
    p_orc.add_argument("--instance", required=True)
    p_orc.add_argument("--opt", required=True,
                       help="covering JSON-lines file, or 'auto' for exact_opt")
    p_orc.add_argument("--bits", type=int, required=True)
    p_orc.add_argument("--out", help="write the ADV1 tape here")
    p_orc.add_argument("--dump-advice", action="store_true",
                       help="print the ADV1 dump to stdout")
    p_orc.add_argument("--plan-json", metavar="PATH",
                       help="dump the oracle plan for audits")
    p_orc.add_argument("--limit", type=int, default=DEFAULT_OPT_LIMIT)
    p_orc.set_defaults(func=_cmd_oracle)

    p_bench = sub.add_parser("bench", help="experiments and benchmarks")
    bench_sub = p_bench.add_subparsers(dest="bench_action", required=True)
    p_bruns = bench_sub.add_parser("run", help="run a config of cells")
    p_bruns.add_argument("--config", required=True, help="TOML or JSON")
    p_bruns.add_argument("--out", required=True, help="results CSV path")
    p_bruns.add_argument("--jobs", type=int, default=1)
    p_bruns.add_argument("--deterministic", action="store_true",
                         help="blank the wall-time column for byte-stable output")
    p_plot = bench_sub.add_parser("plotdata", help="extract two columns")
    p_plot.add_argument("results")
    p_plot.add_argument("--x", required=True)
    p_plot.add_argument("--y", required=True)
    p_kern = bench_sub.add_parser("kernels",
                                  help="compare compiled vs pure DP kernels")
    p_kern.add_argument("--n", type=int, nargs="+", default=[12, 14, 16, 18])
    p_kern.add_argument("--reps", type=int, default=20)
    p_bench.set_defaults(func=_cmd_bench)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
