"""Command-line front end.

Subcommands: ``mc`` runs the Monte Carlo experiment from a config file,
``sweep`` does the same with grid overrides from the command line, ``cost``
prints the closed-form cost-model table, and ``oracle-check`` compares the
heuristics against the exhaustive oracle on a small instance.

Exit status is 0 on success and nonzero with a single-line error message
on stderr otherwise.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace

from .complexity import CostQuery, relative_cost
from .harness import ExperimentConfig, emit, oracle_check, run_monte_carlo
from .selectors import Algorithm


def _int_list(text: str) -> tuple[int, ...]:
    return tuple(int(t) for t in text.split(",") if t.strip())


def _float_list(text: str) -> tuple[float, ...]:
    return tuple(float(t) for t in text.split(",") if t.strip())


def _add_run_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", required=True, help="experiment config file")
    parser.add_argument("--seed", type=int, help="override the master seed")
    parser.add_argument("--trials", type=int, help="override the trial count")
    parser.add_argument("--workers", type=int, help="parallel worker processes")
    parser.add_argument("--timing", action="store_true",
                        help="emit measured wall times (off by default so "
                             "outputs are reproducible byte for byte)")
    parser.add_argument("--format", choices=("csv", "json"), help="output format")
    parser.add_argument("--out", help="output path (default: config output.path or stdout)")


def _load_config(args) -> ExperimentConfig:
    cfg = ExperimentConfig.from_file(args.config)
    updates = {}
    if args.seed is not None:
        updates["master_seed"] = args.seed
    if args.trials is not None:
        updates["trials"] = args.trials
    if args.workers is not None:
        updates["workers"] = args.workers
    if args.timing:
        updates["timing"] = True
    if args.format is not None:
        updates["output_format"] = args.format
    if args.out is not None:
        updates["output_path"] = args.out
    if updates:
        cfg = replace(cfg, **updates)
        cfg.validate()
    return cfg


def _emit_rows(rows, fmt: str, path) -> None:
    text = emit(rows, fmt, path)
    if path is None:
        sys.stdout.write(text)


def _cmd_mc(args) -> int:
    cfg = _load_config(args)
    rows = run_monte_carlo(cfg)
    _emit_rows(rows, cfg.output_format, cfg.output_path)
    return 0


def _cmd_sweep(args) -> int:
    cfg = _load_config(args)
    updates = {}
    if args.m is not None:
        updates["m_values"] = args.m
    if args.u is not None:
        updates["u_values"] = args.u
    if args.p0 is not None:
        updates["p0_dbm_values"] = args.p0
    if args.l is not None:
        updates["ssus_num_bases"] = args.l
    if args.alpha is not None:
        updates["ssus_alpha"] = args.alpha
    if updates:
        cfg = replace(cfg, **updates)
        cfg.validate()
    rows = run_monte_carlo(cfg)
    _emit_rows(rows, cfg.output_format, cfg.output_path)
    return 0


def _cmd_cost(args) -> int:
    queries = []
    for m in args.m:
        k = max(1, m // 2) if args.k_mode == "half" else m
        for method in (Algorithm.SUS, Algorithm.GZF, Algorithm.MCORE_PLUS, Algorithm.SSUS):
            queries.append(CostQuery(method=method, u=args.u, m=m, k=k, l=args.l))
    rows = relative_cost(queries)
    _write_table(
        rows,
        ("method", "u", "m", "k", "l", "cost", "relative_to_sus"),
        args.format,
        args.out,
    )
    return 0


def _cmd_oracle_check(args) -> int:
    rows = oracle_check(
        m=args.m,
        u=args.u,
        trials=args.trials,
        master_seed=args.seed,
        k_max=args.k_max,
        num_bases=args.l,
        alpha=args.alpha,
    )
    _write_table(
        rows,
        ("algorithm", "m", "u", "k_max", "trials", "mean_ratio", "min_ratio", "violations"),
        args.format,
        args.out,
    )
    violations = sum(r["violations"] for r in rows)
    if violations:
        print(f"error: {violations} trials beat the exhaustive oracle", file=sys.stderr)
        return 1
    return 0


def _write_table(rows: list[dict], columns: tuple[str, ...], fmt: str, path) -> None:
    if fmt == "json":
        text = json.dumps(rows, indent=2, default=float) + "\n"
    else:
        lines = [",".join(columns)]
        for row in rows:
            cells = []
            for col in columns:
                value = row[col]
                cells.append(f"{value:.12g}" if isinstance(value, float) else str(value))
            lines.append(",".join(cells))
        text = "\n".join(lines) + "\n"
    if path is None:
        sys.stdout.write(text)
    else:
        try:
            with open(path, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        except OSError as exc:
            raise ValueError(f"cannot write output file {path}: {exc}") from exc


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mimosel",
        description="MU-MIMO uplink user-selection simulator",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_mc = sub.add_parser("mc", help="Monte Carlo run over a config file")
    _add_run_flags(p_mc)
    p_mc.set_defaults(func=_cmd_mc)

    p_sweep = sub.add_parser("sweep", help="grid sweep with command-line overrides")
    _add_run_flags(p_sweep)
    p_sweep.add_argument("--m", type=_int_list, help="override antenna counts, e.g. 4,8")
    p_sweep.add_argument("--u", type=_int_list, help="override user-pool sizes")
    p_sweep.add_argument("--p0", type=_float_list, help="override target powers in dBm")
    p_sweep.add_argument("--l", type=_int_list, help="override basis counts")
    p_sweep.add_argument("--alpha", type=_float_list, help="override correlation thresholds")
    p_sweep.set_defaults(func=_cmd_sweep)

    p_cost = sub.add_parser("cost", help="closed-form cost-model table")
    p_cost.add_argument("--u", type=int, default=100, help="candidate pool size")
    p_cost.add_argument("--m", type=_int_list, default=(2, 4, 8, 16),
                        help="antenna counts, e.g. 2,4,8,16")
    p_cost.add_argument("--l", type=int, default=1, help="basis count for the split method")
    p_cost.add_argument("--k-mode", choices=("half", "full"), default="half",
                        help="selected users per scenario: K=M/2 or K=M")
    p_cost.add_argument("--format", choices=("csv", "json"), default="csv")
    p_cost.add_argument("--out", help="output path (default stdout)")
    p_cost.set_defaults(func=_cmd_cost)

    p_oracle = sub.add_parser("oracle-check",
                              help="compare heuristics to the exhaustive oracle")
    p_oracle.add_argument("--m", type=int, default=4)
    p_oracle.add_argument("--u", type=int, default=8)
    p_oracle.add_argument("--trials", type=int, default=50)
    p_oracle.add_argument("--seed", type=int, default=1234)
    p_oracle.add_argument("--k-max", type=int, default=None)
    p_oracle.add_argument("--l", type=int, default=10, help="basis count")
    p_oracle.add_argument("--alpha", type=float, default=0.45)
    p_oracle.add_argument("--format", choices=("csv", "json"), default="csv")
    p_oracle.add_argument("--out", help="output path (default stdout)")
    p_oracle.set_defaults(func=_cmd_oracle_check)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError, RuntimeError) as exc:
        message = " ".join(str(exc).split())
        print(f"error: {message}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
