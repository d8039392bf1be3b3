"""Command-line frontend.

Exit codes: 0 success, 1 property/acceptance failure, 2 precondition or
validation error, 3 refusal to overwrite an output file.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import core_bounds, harness, mixing_bounds, processes, reporting, selfcheck
from .blocking import block_partition, block_summary
from .errors import ConfigError, DomainError, InputError, OutputExistsError, PreconditionError

OUT_DIR_ENV = "EBMIX_OUT_DIR"

BOUND_METHODS = ("eb", "eb_ignore_linear", "mds_empirical", "freedman", "phi", "tilde_phi", "agnostic")


def read_values(path: str) -> np.ndarray:
    """Newline-separated decimal reals; blank lines and '#' comments ignored."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read data file {path}: {exc}") from exc
    values = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        try:
            values.append(float(line))
        except ValueError:
            raise InputError(f"{path}: line {lineno}: not a number: {line!r}") from None
    if not values:
        raise InputError(f"{path}: no numeric data found")
    return np.asarray(values, dtype=float)


def _interval_payload(res: core_bounds.IntervalResult) -> dict:
    payload = {
        "center": res.center,
        "radius": res.radius,
        "level": res.level,
        "breakdown": dict(res.breakdown),
    }
    if res.flags:
        payload["flags"] = list(res.flags)
    return payload


def _print_interval(res: core_bounds.IntervalResult, fmt: str) -> None:
    if fmt == "json":
        print(json.dumps(_interval_payload(res), indent=2))
    else:
        print(f"center  {res.center!r}")
        print(f"radius  {res.radius!r}")
        print(f"level   {res.level!r}")
        for k, v in res.breakdown.items():
            print(f"  {k:<12} {v!r}")
        for flag in res.flags:
            print(f"  flag: {flag}")


def _require(args, names) -> None:
    missing = [n for n in names if getattr(args, n.replace("-", "_")) is None]
    if missing:
        raise DomainError(f"method {args.method!r} requires --" + ", --".join(missing))


def _summary_from_args(args) -> core_bounds.SampleSummary:
    if args.data is not None:
        values = read_values(args.data)
        return core_bounds.summarize(values, b=args.b if args.b is not None else 0.0)
    _require(args, ["n", "mean", "css"])
    return core_bounds.SampleSummary(
        n=args.n, mean=args.mean, css=args.css, b=args.b if args.b is not None else 0.0
    )


def _delta_from_args(args) -> float:
    if (args.delta is None) == (args.alpha is None):
        raise DomainError("exactly one of --delta and --alpha is required")
    return args.delta if args.delta is not None else 2.0 * args.alpha / 3.0


def cmd_bound(args) -> int:
    method = args.method
    if method == "freedman":
        _require(args, ["n", "sigma2", "b"])
        delta = args.delta if args.delta is not None else (
            2.0 * args.alpha / 3.0 if args.alpha is not None else None
        )
        if delta is None:
            raise DomainError("exactly one of --delta and --alpha is required")
        radius = core_bounds.freedman_radius(args.n, args.sigma2, args.b, delta)
        center = float(np.mean(read_values(args.data))) if args.data else 0.0
        res = core_bounds.IntervalResult(
            center=center,
            radius=radius,
            level=1.0 - delta,
            breakdown={
                "leading": math.sqrt(2.0 * args.sigma2 * math.log(1 / delta) / args.n),
                "linear": args.b * math.log(1 / delta) / (3.0 * args.n),
            },
        )
        _print_interval(res, args.format)
        return 0

    if method in ("eb", "eb_ignore_linear", "mds_empirical"):
        _require(args, ["b"])
        summary = _summary_from_args(args)
        if method == "eb":
            if args.alpha is not None:
                res = core_bounds.eb_interval_alpha(summary, args.alpha)
            elif args.delta is not None:
                res = core_bounds.eb_interval(summary, args.delta)
            else:
                raise DomainError("exactly one of --delta and --alpha is required")
        elif method == "eb_ignore_linear":
            delta = _delta_from_args(args)
            xi = args.xi if args.xi is not None else summary.n ** -0.25
            nu = core_bounds.inflation_factor(summary.n, delta)
            leading = (
                (1.0 + xi)
                * math.sqrt(2.0 * math.log(1.0 / delta) * summary.css)
                / summary.n
            )
            res = core_bounds.IntervalResult(
                center=summary.mean,
                radius=nu * leading,
                level=1.0 - 3.0 * delta,
                breakdown={"leading": leading, "inflation": nu},
            )
        else:  # mds_empirical: data are treated as zero-mean increments
            delta = _delta_from_args(args)
            t = math.log(1.0 / delta)
            if args.data is None:
                raise DomainError("method 'mds_empirical' requires --data (raw increments)")
            values = read_values(args.data)
            qv = float(np.sum(values * values))
            n = values.size
            variance_term = math.sqrt(2.0 * qv * t) / n
            linear_term = core_bounds.EMPIRICAL_LINEAR_CONSTANT * args.b * t / n
            res = core_bounds.IntervalResult(
                center=float(np.mean(values)),
                radius=variance_term + linear_term,
                level=1.0 - 3.0 * delta,
                breakdown={"leading": variance_term, "linear": linear_term},
            )
        _print_interval(res, args.format)
        return 0

    # block-based methods need raw data and a block length
    _require(args, ["data", "l", "range_width"])
    delta = _delta_from_args(args)
    values = read_values(args.data)
    summary = block_summary(values, block_partition(values.size, args.l))
    if method == "phi":
        _require(args, ["phi_sum"])
        budget = mixing_bounds.MixingBudget(regime="phi", phi_sum=args.phi_sum)
        res = mixing_bounds.phi_interval(summary, args.range_width, budget, delta, xi_n=args.xi)
    elif method == "tilde_phi":
        _require(args, ["phi_sum", "tv_norm"])
        budget = mixing_bounds.MixingBudget(
            regime="phi_tilde", phi_sum=args.phi_sum, tv_norm=args.tv_norm
        )
        res = mixing_bounds.tilde_phi_interval(
            summary, args.range_width, budget, delta, xi_n=args.xi
        )
    else:  # agnostic
        n = values.size
        rem = summary.partition.remainder_size
        knobs = mixing_bounds.AgnosticKnobs(
            c_n=args.c if args.c is not None else rem * args.range_width / n,
            t_n=args.t if args.t is not None else n**-0.45,
            s_n=args.s if args.s is not None else n**-0.45,
        )
        errors = None
        if args.tv_norm is not None and args.phi_sum is not None and args.phi_sum > 0:
            errors = mixing_bounds.agnostic_error_budget(
                n, summary.partition, knobs, args.tv_norm * args.phi_sum
            )
        res = mixing_bounds.agnostic_interval(summary, args.range_width, knobs, delta, errors)
    _print_interval(res, args.format)
    return 0


def cmd_simulate(args) -> int:
    if args.spec is not None:
        spec = processes.ProcessSpec.from_dict(json.loads(args.spec))
    else:
        params = json.loads(args.params) if args.params else {}
        spec = processes.ProcessSpec(kind=args.kind, params=params)
    values, truth = processes.simulate(spec, args.n, args.seed)
    lines = "\n".join(repr(float(v)) for v in values) + "\n"
    truth_payload = {
        "process": spec.label(),
        "mu": truth.mu,
        "sigma2_marginal": truth.sigma2_marginal,
        "sigma2_longrun": truth.sigma2_longrun,
        "b_range": list(truth.b_range),
        "b_abs": truth.b_abs,
        "tv_norm": truth.tv_norm,
        "m4": truth.m4,
    }
    if args.out:
        reporting.atomic_write_text(args.out, lines, force=args.force)
        print(json.dumps(truth_payload, indent=2))
    else:
        print(f"# truth: {json.dumps(truth_payload)}")
        sys.stdout.write(lines)
    return 0


def _load_config(args) -> harness.ExperimentConfig:
    if args.config is None:
        raise ConfigError("--config FILE is required")
    try:
        raw = json.loads(Path(args.config).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {args.config} is not valid JSON: {exc}") from exc
    # flat CLI overrides win over file values
    if args.n is not None:
        raw["n_grid"] = [args.n]
    if args.delta is not None:
        raw["delta"] = args.delta
        raw["alpha"] = None
    if args.alpha is not None:
        raw["alpha"] = args.alpha
        raw["delta"] = None
    if args.replications is not None:
        raw["replications"] = args.replications
    if args.seed is not None:
        raw["master_seed"] = args.seed
    if args.l is not None:
        raw["l_policy"] = {"kind": "fixed", "value": args.l}
    if args.l_exponent is not None:
        raw["l_policy"] = {"kind": "exponent", "value": args.l_exponent}
    return harness.ExperimentConfig.from_dict(raw)


def _output_paths(args, stem: str) -> tuple[Path, Path]:
    out_dir = Path(args.out_dir or os.environ.get(OUT_DIR_ENV, "."))
    csv_path = Path(args.csv) if args.csv else out_dir / f"{stem}.csv"
    json_path = Path(args.json_out) if args.json_out else out_dir / f"{stem}.json"
    return csv_path, json_path


def _run_experiment(args, runner, stem: str, csv_renderer) -> int:
    config = _load_config(args)
    report = runner(config, n_jobs=args.jobs)
    csv_path, json_path = _output_paths(args, stem)
    reporting.atomic_write_text(csv_path, csv_renderer(report), force=args.force)
    reporting.atomic_write_text(json_path, reporting.report_json(report), force=args.force)
    for line in reporting.summary_lines(report):
        print(line)
    print(f"wrote {csv_path} and {json_path}")
    return 0


def cmd_coverage(args) -> int:
    return _run_experiment(args, harness.run_coverage, "coverage", reporting.coverage_csv)


def cmd_sweep(args) -> int:
    return _run_experiment(args, harness.run_sharpness_sweep, "sweep", reporting.coverage_csv)


def cmd_sensitivity(args) -> int:
    return _run_experiment(
        args, harness.run_block_sensitivity, "sensitivity", reporting.sensitivity_csv
    )


def cmd_compare(args) -> int:
    return _run_experiment(args, harness.compare_bounds, "compare", reporting.coverage_csv)


def cmd_selfcheck(args) -> int:
    results = selfcheck.run_all(seed=args.seed, cases=args.cases, inject_fault=args.inject_fault)
    failed = False
    for res in results:
        status = "PASS" if res.passed else "FAIL"
        print(f"{status} {res.name} (cases={res.cases}): {res.detail}")
        failed = failed or not res.passed
    return 1 if failed else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ebmix",
        description="Concentration radii, process simulators, and Monte Carlo coverage experiments.",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p_bound = sub.add_parser("bound", help="evaluate one bound on supplied data or a summary")
    p_bound.add_argument("--method", required=True, choices=BOUND_METHODS)
    p_bound.add_argument("--data", help="file of newline-separated reals ('#' comments allowed)")
    p_bound.add_argument("--n", type=int)
    p_bound.add_argument("--mean", type=float)
    p_bound.add_argument("--css", type=float)
    p_bound.add_argument("--b", type=float, help="a.s. bound on |Z_i| (not the range width)")
    p_bound.add_argument("--sigma2", type=float)
    p_bound.add_argument("--delta", type=float)
    p_bound.add_argument("--alpha", type=float)
    p_bound.add_argument("--l", type=float, help="block length (block-based methods)")
    p_bound.add_argument("--range-width", type=float, dest="range_width")
    p_bound.add_argument("--phi-sum", type=float, dest="phi_sum")
    p_bound.add_argument("--tv-norm", type=float, dest="tv_norm")
    p_bound.add_argument("--xi", type=float)
    p_bound.add_argument("--t", type=float)
    p_bound.add_argument("--s", type=float)
    p_bound.add_argument("--c", type=float)
    p_bound.add_argument("--format", choices=("json", "human"), default="json")
    p_bound.set_defaults(func=cmd_bound)

    p_sim = sub.add_parser("simulate", help="draw one process path with known ground truth")
    p_sim.add_argument("--kind", choices=processes.KINDS)
    p_sim.add_argument("--params", help="JSON object of kind-specific parameters")
    p_sim.add_argument("--spec", help="full process spec as JSON (overrides --kind/--params)")
    p_sim.add_argument("--n", type=int, required=True)
    p_sim.add_argument("--seed", type=int, required=True)
    p_sim.add_argument("--out", help="write values here (default: stdout)")
    p_sim.add_argument("--force", action="store_true")
    p_sim.set_defaults(func=cmd_simulate)

    for name, fn, help_text in (
        ("coverage", cmd_coverage, "empirical coverage experiment from a config file"),
        ("sweep", cmd_sweep, "sharpness sweep over an increasing n grid"),
        ("sensitivity", cmd_sensitivity, "block-length sensitivity table"),
        ("compare", cmd_compare, "side-by-side bound comparison table"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="experiment config (JSON)")
        p.add_argument("--csv", help="CSV output path")
        p.add_argument("--json", dest="json_out", help="JSON output path")
        p.add_argument("--out-dir", help=f"output directory (default: ${OUT_DIR_ENV} or '.')")
        p.add_argument("--force", action="store_true", help="overwrite existing outputs")
        p.add_argument("--jobs", type=int, default=1)
        p.add_argument("--n", type=int, help="override: single n")
        p.add_argument("--delta", type=float)
        p.add_argument("--alpha", type=float)
        p.add_argument("--replications", type=int)
        p.add_argument("--seed", type=int)
        p.add_argument("--l", type=float, help="override: fixed block length")
        p.add_argument("--l-exponent", type=float, dest="l_exponent")
        p.set_defaults(func=fn)

    p_check = sub.add_parser("selfcheck", help="run the randomized property oracles")
    p_check.add_argument("--seed", type=int, default=0)
    p_check.add_argument("--cases", type=int, default=1000)
    p_check.add_argument("--inject-fault", action="store_true", help=argparse.SUPPRESS)
    p_check.set_defaults(func=cmd_selfcheck)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except OutputExistsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (PreconditionError, DomainError, ConfigError, InputError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
