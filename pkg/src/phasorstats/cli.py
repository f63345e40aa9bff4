"""Command-line front end.

Subcommands: ``analyze`` (flowchart-driven analysis of a components CSV),
``extract`` (time series to components), ``simulate`` (named simulation
presets or a JSON spec), ``power`` (rate tables over d and N grids) and
``cluster`` (permutation cluster correction over per-node files).

Exit codes: 0 success, 2 input error, 3 statistical preconditions unmet.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .clusters import AdjacencyGraph, cluster_correct
from .data import Design
from .distributions import ConditionIndexDistribution
from .exceptions import (
    DegenerateCovariance,
    DesignMismatch,
    DomainError,
    EmptyUnit,
    FrequencyNotResolvable,
    InvalidGraph,
    InvalidSpec,
    LabelMismatch,
    MalformedInput,
    NonIntegerCycles,
    SingularWithinScatter,
    TooFewGroups,
    TooFewObservations,
    ZeroResidualVariance,
)
from .ingest import (
    build_dataset,
    read_components_csv,
    read_timeseries_csv,
    write_components_csv,
)
from .report import format_text, run_flowchart
from .simulate import (
    SimulationSpec,
    simulate_amplitude_skew,
    simulate_ci_distribution,
    simulate_grid,
    simulate_rates,
)

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_PRECONDITION = 3

_INPUT_ERRORS = (
    MalformedInput,
    InvalidGraph,
    NonIntegerCycles,
    FrequencyNotResolvable,
    OSError,
)
_PRECONDITION_ERRORS = (
    TooFewObservations,
    TooFewGroups,
    DegenerateCovariance,
    ZeroResidualVariance,
    SingularWithinScatter,
    LabelMismatch,
    EmptyUnit,
    DesignMismatch,
    DomainError,
    InvalidSpec,
)

_DESIGNS = {
    "one-sample": Design.ONE_SAMPLE,
    "two-sample": Design.TWO_SAMPLE_INDEPENDENT,
    "paired": Design.PAIRED,
    "oneway": Design.ONEWAY_INDEPENDENT,
    "oneway-rm": Design.ONEWAY_REPEATED,
}

_D_GRID = (0.0, 0.25, 0.5, 1.0, 2.0, 4.0)
_N_GRID = (4, 8, 16, 32, 64)

PRESETS = ("fig2", "fig3", "fig4a", "fig4b", "fig5a", "fig5b", "fig6", "outliers")


def _parse_mu(text: str) -> complex:
    parts = text.split(",")
    if len(parts) != 2:
        raise MalformedInput(f"--mu expects 'RE,IM', got {text!r}")
    try:
        return complex(float(parts[0]), float(parts[1]))
    except ValueError:
        raise MalformedInput(f"--mu expects two numbers, got {text!r}") from None


def _parse_floats(text: str, option: str) -> list[float]:
    try:
        return [float(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise MalformedInput(f"{option} expects comma-separated numbers") from None


def _parse_ints(text: str, option: str) -> list[int]:
    try:
        return [int(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise MalformedInput(f"{option} expects comma-separated integers") from None


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _csv_lines(header: list[str], rows: list[list]) -> str:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(str(v) for v in row))
    return "\n".join(lines) + "\n"


def _cmd_analyze(args) -> int:
    rows = read_components_csv(args.input)
    dataset = build_dataset(rows, _DESIGNS[args.design], _parse_mu(args.mu))
    sha = hashlib.sha256(Path(args.input).read_bytes()).hexdigest()
    report = run_flowchart(
        dataset,
        alpha=args.alpha,
        seed=args.seed,
        baseline=args.baseline,
        screen_outliers=not args.no_outlier_screen,
        outlier_threshold=args.threshold,
        input_sha256=sha,
    )
    text = report.to_json() if args.format == "json" else format_text(report)
    _emit(text, args.out)
    return EXIT_OK


def _cmd_extract(args) -> int:
    rows = read_timeseries_csv(args.input)
    _emit(write_components_csv(rows), args.out)
    return EXIT_OK


def _preset_table(name: str, reps: int, seed: int):
    base = SimulationSpec(test="T2", n_reps=reps, seed=seed)
    if name == "fig3":
        return simulate_grid(base, tests=["T2", "T2circ"], d_values=_D_GRID,
                             n_values=_N_GRID)
    if name == "fig4a":
        return simulate_grid(
            base,
            tests=["T2", "T2circ"],
            correlation_values=[-0.9, -0.6, -0.3, 0.0, 0.3, 0.6, 0.9],
        )
    if name == "fig4b":
        return simulate_grid(
            base,
            tests=["T2", "T2circ"],
            variance_ratio_values=[0.125, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0],
        )
    if name == "fig6":
        k3 = SimulationSpec(test="ANOVA2circ", k=3, n_reps=reps, seed=seed)
        return simulate_grid(k3, tests=["ANOVA2circ", "MANOVA"],
                             d_values=_D_GRID, n_values=_N_GRID)
    if name == "outliers":
        ci = SimulationSpec(test="CI_test", n=16, n_reps=reps, seed=seed)
        return simulate_grid(
            ci,
            n_values=[8, 16, 32],
            outlier_values=[0.0, 1.0, 2.0, 3.0, 4.0, 5.0],
        )
    raise InvalidSpec(f"preset {name!r} does not produce a rate table")


def _cmd_simulate(args) -> int:
    name = args.preset
    reps, seed = args.reps, args.seed
    if name in ("fig3", "fig4a", "fig4b", "fig6", "outliers"):
        table = _preset_table(name, reps, seed)
        _emit(table.to_json() if args.json else table.to_csv(), args.out)
        return EXIT_OK
    if name == "fig2":
        rows = []
        for d in _D_GRID:
            _, skew = simulate_amplitude_skew(d, reps, seed)
            rows.append([d, repr(skew), reps, seed])
        _emit(_csv_lines(["d", "skewness", "n_reps", "seed"], rows), args.out)
        return EXIT_OK
    if name == "fig5a":
        n = 4
        cis = simulate_ci_distribution(n, reps, seed)
        modified = ConditionIndexDistribution(n, "modified")
        edelman = ConditionIndexDistribution(n, "edelman")
        xs = np.linspace(1.0, 20.0, 96)
        rows = []
        for x in xs:
            rows.append(
                [
                    repr(float(x)),
                    repr(float(edelman.pdf(x))),
                    repr(float(modified.pdf(x))),
                    repr(float((cis <= x).mean())),
                ]
            )
        _emit(
            _csv_lines(
                ["x", "pdf_edelman", "pdf_modified", "empirical_cdf"], rows
            ),
            args.out,
        )
        return EXIT_OK
    if name == "fig5b":
        rows = []
        for n in _N_GRID:
            cis = simulate_ci_distribution(n, reps, seed)
            rows.append(
                [
                    n,
                    repr(ConditionIndexDistribution(n, "edelman").quantile(0.95)),
                    repr(ConditionIndexDistribution(n, "modified").quantile(0.95)),
                    repr(float(np.quantile(cis, 0.95))),
                ]
            )
        _emit(
            _csv_lines(
                ["n", "threshold_edelman", "threshold_modified", "empirical_p95"],
                rows,
            ),
            args.out,
        )
        return EXIT_OK
    # otherwise: a JSON spec file
    try:
        payload = json.loads(Path(name).read_text())
    except json.JSONDecodeError as exc:
        raise MalformedInput(f"{name}: not valid JSON ({exc})") from None
    if args.reps_given:
        payload["n_reps"] = reps
    payload.setdefault("n_reps", reps)
    payload["seed"] = seed if args.seed_given else payload.get("seed", seed)
    try:
        spec = SimulationSpec(**payload)
    except TypeError as exc:
        raise MalformedInput(f"{name}: bad spec field ({exc})") from None
    table = simulate_rates(spec)
    _emit(table.to_json() if args.json else table.to_csv(), args.out)
    return EXIT_OK


def _cmd_power(args) -> int:
    base = SimulationSpec(
        test=args.test, k=args.k, n_reps=args.reps, seed=args.seed,
        alpha=args.alpha,
    )
    table = simulate_grid(
        base,
        d_values=_parse_floats(args.d, "--d"),
        n_values=_parse_ints(args.n, "--n"),
    )
    _emit(table.to_json() if args.json else table.to_csv(), args.out)
    return EXIT_OK


def _cmd_cluster(args) -> int:
    design = _DESIGNS[args.design]
    mu = _parse_mu(args.mu)
    datasets = [
        build_dataset(read_components_csv(path), design, mu)
        for path in args.nodes
    ]
    graph = AdjacencyGraph.from_edge_list(args.edges, len(datasets))
    result = cluster_correct(
        datasets,
        graph,
        test=args.test,
        alpha_forming=args.alpha_forming,
        n_perm=args.perms,
        seed=args.seed,
    )
    _emit(json.dumps(result.to_dict(), indent=2) + "\n", args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="phasorstats",
        description="Multivariate tests for complex Fourier components.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="flowchart-driven analysis of a CSV")
    p.add_argument("input")
    p.add_argument("--design", required=True, choices=sorted(_DESIGNS))
    p.add_argument("--mu", default="0,0", help="comparison point RE,IM")
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--baseline", default=None,
                   help="restrict post-hoc tests to baseline vs the rest")
    p.add_argument("--no-outlier-screen", action="store_true")
    p.add_argument("--threshold", type=float, default=3.0,
                   help="Mahalanobis outlier threshold")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", choices=["json", "text"], default="text")
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_analyze)

    p = sub.add_parser("extract", help="time series CSV to components CSV")
    p.add_argument("input")
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_extract)

    p = sub.add_parser(
        "simulate",
        help=f"run a named preset ({', '.join(PRESETS)}) or a JSON spec file",
    )
    p.add_argument("preset")
    p.add_argument("--reps", type=int, default=10000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--json", action="store_true", help="emit JSON, not CSV")
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("power", help="rejection rates over d and N grids")
    p.add_argument("--test", default="T2circ",
                   choices=["T2", "T2circ", "ANOVA2circ", "MANOVA"])
    p.add_argument("--d", default="0,0.25,0.5,1,2,4")
    p.add_argument("--n", default="4,8,16,32,64")
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--reps", type=int, default=10000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--json", action="store_true")
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_power)

    p = sub.add_parser("cluster", help="permutation cluster correction")
    p.add_argument("nodes", nargs="+", help="one components CSV per node")
    p.add_argument("--edges", required=True, help="edge list file, 'i j' rows")
    p.add_argument("--design", required=True,
                   choices=["one-sample", "two-sample", "paired"])
    p.add_argument("--mu", default="0,0")
    p.add_argument("--test", default="T2circ", choices=["T2", "T2circ"])
    p.add_argument("--alpha-forming", type=float, default=0.05)
    p.add_argument("--perms", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_cluster)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    if argv is None:
        argv = sys.argv[1:]
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else EXIT_OK
    if args.command == "simulate":
        args.reps_given = any(a == "--reps" or a.startswith("--reps=") for a in argv)
        args.seed_given = any(a == "--seed" or a.startswith("--seed=") for a in argv)
    try:
        return args.func(args)
    except _PRECONDITION_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except _INPUT_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
