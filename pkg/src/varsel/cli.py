"""Command-line entry point.

Subcommands map one-to-one onto pipeline stages, plus ``report`` which runs
everything.  Exit codes: 0 success, 65 input parse failure, 64 invalid
configuration, 70 computation failure (argparse itself exits 2 on usage
errors).
"""

from __future__ import annotations

import argparse
import os
import sys

from .errors import (
    BudgetExceededError,
    ConfigError,
    DegenerateStepError,
    IngestError,
    InvalidSubsetError,
    RankDeficiencyError,
    VarselError,
)
from .pipeline import ALL_METHODS, IC_CRITERIA, RunConfig, run_pipeline

EXIT_OK = 0
EXIT_PARSE = 65
EXIT_VALIDATION = 64
EXIT_COMPUTATION = 70

_METHOD_ALIASES = {
    "rm1": "rm1-forward",
    "rm2": "rm2-backward",
    "rm3": "rm3-remove-max",
    "rm4": "rm4-add-max",
    "rm5": "rm5-correlation",
    "pvalue": "pvalue",
}


def _csv_list(text: str) -> list[str]:
    return [item.strip() for item in text.split(",") if item.strip()]


def _parse_methods(text: str) -> tuple[str, ...]:
    methods = []
    for name in _csv_list(text):
        canonical = _METHOD_ALIASES.get(name, name)
        if canonical not in ALL_METHODS:
            raise ConfigError(f"unknown ranking method {name!r}")
        methods.append(canonical)
    return tuple(methods)


def _parse_ints(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(v) for v in _csv_list(text))
    except ValueError:
        raise ConfigError(f"expected comma-separated integers, got {text!r}") from None


def _add_common(parser: argparse.ArgumentParser, seed_required: bool) -> None:
    parser.add_argument("--input", "-i", required=True, help="input table")
    parser.add_argument("--target", required=True, help="target column name")
    parser.add_argument("--drop", default="", help="columns to exclude (comma list)")
    parser.add_argument("--delimiter", default=",")
    parser.add_argument(
        "--normalize", default="none", choices=["none", "zscore", "minmax"]
    )
    parser.add_argument(
        "--output-dir", "-o",
        default=os.environ.get("VARSEL_OUTPUT_DIR", "."),
        help="where to write report.json and flat files "
             "(default: $VARSEL_OUTPUT_DIR or '.')",
    )
    parser.add_argument("--seed", type=int, required=seed_required, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="varsel",
        description="Variable selection toolkit for linear regression models.",
    )
    from . import __version__

    parser.add_argument("--version", action="version",
                        version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_rank = sub.add_parser("rank", help="feature rankings and error curves")
    _add_common(p_rank, seed_required=False)
    p_rank.add_argument("--methods", default=",".join(ALL_METHODS))
    p_rank.add_argument("--alpha", type=float, default=0.05,
                        help="p-value threshold")

    p_search = sub.add_parser("search", help="best subset of each size m")
    _add_common(p_search, seed_required=True)
    p_search.add_argument("--m", required=True, help="subset sizes (comma list)")
    p_search.add_argument("--runs", type=int, default=1000)
    p_search.add_argument("--max-iters", type=int, default=100)
    p_search.add_argument("--p-norm", type=float, default=1.0)
    p_search.add_argument("--cost-alpha", type=float, default=1.0)

    p_gibbs = sub.add_parser("gibbs", help="inclusion probabilities by sampling")
    _add_common(p_gibbs, seed_required=True)
    p_gibbs.add_argument("--m", required=True, help="subset sizes (comma list)")
    p_gibbs.add_argument("--eta", type=float, default=100.0)
    p_gibbs.add_argument("--sweeps", type=int, default=5000)
    p_gibbs.add_argument("--burn-in", type=int, default=None)
    p_gibbs.add_argument("--p-norm", type=float, default=1.0)
    p_gibbs.add_argument("--cost-alpha", type=float, default=1.0)

    p_select = sub.add_parser("select", help="model-order selection")
    _add_common(p_select, seed_required=False)
    p_select.add_argument("--methods", default=",".join(ALL_METHODS))
    p_select.add_argument("--criteria", default=",".join(IC_CRITERIA))
    p_select.add_argument("--alpha", type=float, default=0.05)

    p_cv = sub.add_parser("cv", help="Monte Carlo cross-validation of a subset")
    _add_common(p_cv, seed_required=True)
    p_cv.add_argument("--subset", required=True,
                      help="1-based feature indices (comma list)")
    p_cv.add_argument("--runs", type=int, default=20000)
    p_cv.add_argument("--train-fraction", type=float, default=0.8)

    p_corr = sub.add_parser("corr", help="high-correlation feature pairs")
    _add_common(p_corr, seed_required=False)
    p_corr.add_argument("--threshold", type=float, default=0.95)

    p_report = sub.add_parser("report", help="full pipeline")
    _add_common(p_report, seed_required=True)
    p_report.add_argument("--methods", default=",".join(ALL_METHODS))
    p_report.add_argument("--criteria", default=",".join(IC_CRITERIA))
    p_report.add_argument("--alpha", type=float, default=0.05)
    p_report.add_argument("--m", required=True, help="subset sizes (comma list)")
    p_report.add_argument("--runs", type=int, default=1000,
                          help="search restarts")
    p_report.add_argument("--max-iters", type=int, default=100)
    p_report.add_argument("--eta", type=float, default=100.0)
    p_report.add_argument("--sweeps", type=int, default=5000)
    p_report.add_argument("--burn-in", type=int, default=None)
    p_report.add_argument("--p-norm", type=float, default=1.0)
    p_report.add_argument("--cost-alpha", type=float, default=1.0)
    p_report.add_argument("--subset", default=None,
                          help="CV subset (default: best search subset)")
    p_report.add_argument("--cv-runs", type=int, default=20000)
    p_report.add_argument("--train-fraction", type=float, default=0.8)
    p_report.add_argument("--threshold", type=float, default=0.95,
                          help="correlation threshold")

    return parser


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    common = dict(
        dataset_path=args.input,
        target_column=args.target,
        drop_columns=tuple(_csv_list(args.drop)),
        delimiter=args.delimiter,
        normalize=args.normalize,
        output_dir=args.output_dir,
        seed=args.seed,
    )
    cmd = args.command
    if cmd == "rank":
        return RunConfig(stages=("rank",), methods=_parse_methods(args.methods),
                         alpha_threshold=args.alpha, **common)
    if cmd == "search":
        return RunConfig(stages=("search",), m_values=_parse_ints(args.m),
                         search_runs=args.runs, max_iters=args.max_iters,
                         p_norm=args.p_norm, cost_alpha=args.cost_alpha, **common)
    if cmd == "gibbs":
        return RunConfig(stages=("gibbs",), m_values=_parse_ints(args.m),
                         eta=args.eta, sweeps=args.sweeps, burn_in=args.burn_in,
                         p_norm=args.p_norm, cost_alpha=args.cost_alpha, **common)
    if cmd == "select":
        return RunConfig(stages=("select",), methods=_parse_methods(args.methods),
                         criteria=tuple(_csv_list(args.criteria)),
                         alpha_threshold=args.alpha, **common)
    if cmd == "cv":
        return RunConfig(stages=("cv",), cv_subset=_parse_ints(args.subset),
                         cv_runs=args.runs, train_fraction=args.train_fraction,
                         **common)
    if cmd == "corr":
        return RunConfig(stages=("corr",), corr_threshold=args.threshold, **common)
    if cmd == "report":
        return RunConfig(
            stages=("rank", "search", "gibbs", "select", "cv", "corr"),
            methods=_parse_methods(args.methods),
            criteria=tuple(_csv_list(args.criteria)),
            alpha_threshold=args.alpha,
            m_values=_parse_ints(args.m),
            search_runs=args.runs,
            max_iters=args.max_iters,
            eta=args.eta,
            sweeps=args.sweeps,
            burn_in=args.burn_in,
            p_norm=args.p_norm,
            cost_alpha=args.cost_alpha,
            cv_subset=None if args.subset is None else _parse_ints(args.subset),
            cv_runs=args.cv_runs,
            train_fraction=args.train_fraction,
            corr_threshold=args.threshold,
            **common,
        )
    raise ConfigError(f"unknown command {cmd!r}")


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = _config_from_args(args)
        _, written = run_pipeline(config)
    except IngestError as exc:
        print(f"varsel: parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (ConfigError, InvalidSubsetError, BudgetExceededError) as exc:
        stage = getattr(exc, "stage", args.command)
        print(f"varsel: invalid configuration ({stage}): {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (RankDeficiencyError, DegenerateStepError, VarselError) as exc:
        stage = getattr(exc, "stage", args.command)
        print(f"varsel: stage {stage!r} failed: {exc}", file=sys.stderr)
        return EXIT_COMPUTATION
    except OSError as exc:
        print(f"varsel: cannot write outputs: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    for path in written:
        print(path)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
