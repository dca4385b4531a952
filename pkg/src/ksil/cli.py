"""Command-line interface.

Subcommands: ``cluster``, ``bench``, ``approx-eval``, ``gen-data``, ``sweep-p``.
Exit codes: 0 success, 1 usage error, 2 data error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

from .baselines import DEFAULT_H_GRID
from .core import DEFAULT_P_GRID, Dataset, KsilConfig, make_rng
from .data import FAMILIES, SyntheticSpec, generate_synthetic, ground_truth_k, load_csv, \
    parse_k_range, standardize, write_csv
from .engine import init_partition
from .errors import DataError, InvalidConfig, KsilError
from .protocol import ALGOS, approximation_study, run_algo, run_comparison_protocol, \
    sensitivity_sweep

log = logging.getLogger("ksil")

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _float_list(text: str) -> list:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _int_list(text: str) -> list:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _k_range(text: str) -> list:
    try:
        return parse_k_range(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected A..B, got {text!r}") from None


def _add_input(p: argparse.ArgumentParser, families: bool = True) -> None:
    p.add_argument("-i", "--input", type=Path, help="comma-separated data file")
    p.add_argument("--has-header", action="store_true", default=None,
                   help="first row is a header (auto-detected when omitted)")
    p.add_argument("--label-column", help="header name or 0-based index of a label column")
    p.add_argument("--standardize", action="store_true", help="z-score every feature first")
    if families:
        p.add_argument("--family", choices=FAMILIES, help="generate a synthetic dataset instead")
        p.add_argument("--data-seed", type=int, help="seed for --family (default: --seed)")


def _add_ksil(p: argparse.ArgumentParser) -> None:
    p.add_argument("--objective", choices=("macro", "micro", "combined"), default="macro")
    p.add_argument("--alpha", type=float, default=0.5, help="micro share of the combined objective")
    p.add_argument("--scheme", choices=("power", "exp"), default="power")
    p.add_argument("--p", type=float, help="fixed weight sensitivity (default: auto-tune)")
    p.add_argument("--auto-p", action="store_true", help="grid-search the sensitivity")
    p.add_argument("--p-grid", type=_float_list, default=list(DEFAULT_P_GRID))
    p.add_argument("--approx", action="store_true", help="use the refined silhouette approximation")
    p.add_argument("--sample-size", type=int, help="score only this many points per iteration")
    p.add_argument("--init", choices=("kmeanspp", "random"), default="kmeanspp")
    p.add_argument("--tau", type=float, default=1e-4)
    p.add_argument("--max-iter", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ksil", description="Silhouette-guided instance-weighted k-means.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("cluster", help="cluster a CSV file")
    _add_input(p, families=False)
    p.add_argument("-k", "--k", type=int, required=True)
    p.add_argument("--algo", choices=ALGOS, default="ksil")
    p.add_argument("--h", type=int, help="neighbour count for density/lof (default: tuned)")
    p.add_argument("-o", "--output", type=Path,
                   help="directory for labels.csv, centroids.csv and report.json")
    _add_ksil(p)

    p = sub.add_parser("bench", help="paired comparison of K-Sil against baselines")
    _add_input(p)
    p.add_argument("--k-range", type=_k_range, default=list(range(2, 11)))
    p.add_argument("--k-gt", type=int, help="ground-truth k (default: number of label values)")
    p.add_argument("--trials", type=int, default=30)
    p.add_argument("--algo", choices=ALGOS[1:], action="append",
                   help="baseline to compare against (repeatable; default: all)")
    p.add_argument("--h-grid", type=_int_list, default=list(DEFAULT_H_GRID))
    p.add_argument("--two-sided", action="store_true")
    p.add_argument("-o", "--output", type=Path, help="write the JSON report here")
    _add_ksil(p)

    p = sub.add_parser("approx-eval", help="compare exact, ApR and ApS silhouettes")
    p.add_argument("-i", "--input", type=Path)
    p.add_argument("--has-header", action="store_true", default=None)
    p.add_argument("--label-column")
    p.add_argument("--standardize", action="store_true")
    p.add_argument("--family", choices=FAMILIES, action="append",
                   help="synthetic family (repeatable; default s1-s4 when no --input)")
    p.add_argument("-k", "--k", type=int, help="cluster count (default: number of label values)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output", type=Path, help="write the JSON report here")

    p = sub.add_parser("gen-data", help="write a synthetic dataset to CSV")
    p.add_argument("--family", choices=FAMILIES, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n", type=int)
    p.add_argument("--d", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--sigma", type=_float_list)
    p.add_argument("--noise-fraction", type=float)
    p.add_argument("-o", "--output", type=Path, required=True)

    p = sub.add_parser("sweep-p", help="objective against weight sensitivity for both schemes")
    _add_input(p)
    p.add_argument("-k", "--k", type=int, help="cluster count (default: number of label values)")
    p.add_argument("-o", "--output", type=Path, help="CSV destination (default: stdout)")
    _add_ksil(p)
    return parser


def _load(args, family_key: Optional[str] = None) -> Dataset:
    family = family_key or getattr(args, "family", None)
    if args.input is not None:
        label = args.label_column
        if label is None and args.has_header is not False:
            label = _default_label_column(args.input)
        data = load_csv(args.input, has_header=args.has_header, label_column=label)
    elif family:
        seed = getattr(args, "data_seed", None)
        data = generate_synthetic(SyntheticSpec(family, seed=args.seed if seed is None else seed))
    else:
        raise UsageError("give --input or --family")
    return standardize(data) if getattr(args, "standardize", False) else data


def _default_label_column(path: Path) -> Optional[str]:
    # a header column literally named "label" is taken as labels
    with path.open(newline="", encoding="utf-8") as fh:
        first = next(csv.reader(fh), [])
    return "label" if "label" in [c.strip() for c in first] else None


def _config(args, k: int) -> KsilConfig:
    auto = args.auto_p or args.p is None
    return KsilConfig(
        k=k, objective=args.objective, alpha=args.alpha, init=args.init,
        scheme="exponential" if args.scheme == "exp" else "power",
        p=0.0 if args.p is None else args.p, auto_p=auto, p_grid=tuple(args.p_grid),
        sample_size=args.sample_size, approximate=args.approx, tau=args.tau,
        max_iter=args.max_iter, seed=args.seed,
    )


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True)


def cmd_cluster(args) -> int:
    data = _load(args)
    cfg = _config(args, args.k).validate(data.n)
    initial = init_partition(data, cfg.k, cfg.init, make_rng(cfg.seed))
    grid = [args.h] if args.h is not None else DEFAULT_H_GRID
    result = run_algo(data, args.algo, cfg.k, cfg.seed, initial, cfg, grid)
    part = result.best_partition
    report = {
        "dataset": {"name": data.name, "n": data.n, "d": data.d},
        "algo": args.algo,
        "k": cfg.k,
        **result.summary(),
        "cluster_sizes": part.sizes().tolist(),
    }
    ex = result.exact_report
    if ex is not None:
        report.update(S_m=ex.micro, S_M=ex.macro, combined=ex.combined)
    if args.output is None:
        print(_dump(report))
        return EXIT_OK
    args.output.mkdir(parents=True, exist_ok=True)
    with (args.output / "labels.csv").open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["index", "cluster"])
        w.writerows([i, int(c)] for i, c in enumerate(part.assignments))
    with (args.output / "centroids.csv").open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["cluster"] + [f"x{j}" for j in range(data.d)])
        w.writerows([j] + [repr(float(v)) for v in row] for j, row in enumerate(part.centroids))
    (args.output / "report.json").write_text(_dump(report) + "\n")
    print(_dump(report))
    return EXIT_OK


def cmd_bench(args) -> int:
    if args.trials < 5:
        raise UsageError("--trials must be >= 5")
    data = _load(args)
    template = _config(args, 2)
    k_gt = args.k_gt if args.k_gt is not None else ground_truth_k(data)
    algos = ["ksil"] + (args.algo or list(ALGOS[1:]))
    report = run_comparison_protocol(
        data, args.k_range, trials=args.trials, objective=args.objective, algos=algos,
        seed=args.seed, template=template, k_gt=k_gt, h_grid=args.h_grid,
        alternative="two-sided" if args.two_sided else "greater")
    text = report.to_json()
    if args.output is not None:
        args.output.write_text(text + "\n")
    else:
        print(text)
    print(report.to_table(), file=sys.stderr if args.output is None else sys.stdout)
    return EXIT_OK


def cmd_approx_eval(args) -> int:
    if args.input is not None:
        sources = [_load(args)]
    else:
        fams = args.family or ["s1", "s2", "s3", "s4"]
        sources = [generate_synthetic(SyntheticSpec(f, seed=args.seed)) for f in fams]
    rows = []
    for data in sources:
        k = args.k or ground_truth_k(data)
        if k is None:
            raise UsageError(f"{data.name}: no labels; pass -k")
        st = approximation_study(data, k, seed=args.seed)
        rows.append({"dataset": st.name, "k": st.k, "rho_apr": st.rho_apr,
                     "rho_aps": st.rho_aps, "aggregates": st.aggregates})
    out = _dump({"seed": args.seed, "datasets": rows})
    if args.output is not None:
        args.output.write_text(out + "\n")
    print(f"{'dataset':<16} {'k':>3} {'rho_ApR':>8} {'rho_ApS':>8}   exact S_m/S_M     ApR S_m/S_M      ApS S_m/S_M")
    for r in rows:
        a = r["aggregates"]
        print(f"{r['dataset']:<16} {r['k']:>3} {r['rho_apr']:8.3f} {r['rho_aps']:8.3f}   "
              + "   ".join(f"{a[m]['S_m']:.3f}/{a[m]['S_M']:.3f}  " for m in ("exact", "apr", "aps")))
    if args.output is None:
        print(out)
    return EXIT_OK


def cmd_gen_data(args) -> int:
    sigma = args.sigma[0] if args.sigma and len(args.sigma) == 1 else args.sigma
    spec = SyntheticSpec(args.family, n=args.n, d=args.d, k=args.k, sigma=sigma,
                         noise_fraction=args.noise_fraction, seed=args.seed)
    data = generate_synthetic(spec)
    write_csv(data, args.output)
    print(f"wrote {data.n} points (d={data.d}) to {args.output}")
    return EXIT_OK


def cmd_sweep_p(args) -> int:
    data = _load(args)
    k = args.k or ground_truth_k(data)
    if k is None:
        raise UsageError("no labels to infer k from; pass -k")
    cfg = _config(args, k).validate(data.n)
    rows = sensitivity_sweep(data, cfg, args.p_grid)
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=["p", "scheme", "objective_value"], lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({**r, "p": repr(r["p"]), "objective_value": repr(r["objective_value"])})
    if args.output is not None:
        args.output.write_text(buf.getvalue())
    else:
        sys.stdout.write(buf.getvalue())
    return EXIT_OK


COMMANDS = {"cluster": cmd_cluster, "bench": cmd_bench, "approx-eval": cmd_approx_eval,
            "gen-data": cmd_gen_data, "sweep-p": cmd_sweep_p}


def cli_main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError("a subcommand is required")
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        parser.print_help(sys.stderr)
        return EXIT_USAGE
    except (DataError, OSError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (InvalidConfig, KsilError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main() -> None:
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
