"""Command-line front end.

Exit codes: 0 success, 1 runtime error, 2 validation failure, 64 usage error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import math
import os
import re
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .exceptions import (
    ConstraintViolation,
    DomainError,
    GridMismatch,
    InsufficientPaths,
    InvalidSign,
    TableauError,
    UnknownCase,
    VariantUnverified,
    WeakSRKError,
)
from .families import (
    ORDER22_CASES,
    dri1,
    dri1_m_variant,
    euler,
    lec_norm,
    make_order22,
    minimize_lec,
    sample_order22_params,
)
from .integrator import EvalCounters, SdeProblem, integrate_path
from .montecarlo import convergence_study, estimate, estimate_exem, write_csv
from .order_conditions import DEFAULT_TOL, classify, format_report
from .problems import PROBLEMS, get_problem
from .rng import RandomStream
from .tableau import compile_plan, dumps, find_violations, load, parse_number

EXIT_OK, EXIT_RUNTIME, EXIT_INVALID, EXIT_USAGE = 0, 1, 2, 64
OUTPUT_ENV = "WEAKSRK_OUTPUT_DIR"
BUILTIN_SCHEMES = ("dri1", "dri1m", "euler", "exem")
PROFILE_LIMITS = {"fast": (10**6, 3), "full": (10**8, None)}

VALIDATION_ERRORS = (
    TableauError, UnknownCase, ConstraintViolation, InvalidSign, DomainError,
    GridMismatch, InsufficientPaths, VariantUnverified,
)  # fmt: skip

log = logging.getLogger("weaksrk")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise UsageError(message)


_POW2 = re.compile(r"^\s*2\s*\^\s*\(?\s*([+-]?\d+)\s*\)?\s*$")


def parse_step(text: str) -> float:
    """Step size literal: a number, an arithmetic expression or ``2^-k``."""
    m = _POW2.match(text)
    if m:
        return 2.0 ** int(m.group(1))
    h = parse_number(text.replace("^", "**"))
    if not h > 0:
        raise ValueError(f"step size must be positive: {text!r}")
    return h


def parse_steps(text: str) -> list[float]:
    try:
        return [parse_step(part) for part in text.split(",") if part.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _positive_int(text: str) -> int:
    # accepts 10000000 as well as 1e7
    try:
        as_float = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if not as_float.is_integer():
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    value = int(as_float)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be positive: {text!r}")
    return value


def resolve_scheme(spec: str):
    """Built-in scheme name or tableau file path -> plan (``"exem"`` stays a string)."""
    if spec == "exem":
        return "exem"
    if spec == "dri1":
        return compile_plan(dri1())
    if spec == "dri1m":
        return compile_plan(dri1_m_variant())
    if spec == "euler":
        return compile_plan(euler())
    path = Path(spec)
    if not path.exists():
        raise UsageError(f"unknown scheme {spec!r}: not one of {BUILTIN_SCHEMES} and not a file")
    return compile_plan(load(path))


def _output_dir() -> Path:
    return Path(os.environ.get(OUTPUT_ENV, "."))


def _config_hash(config: dict) -> str:
    blob = json.dumps(config, sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def _apply_profile(args) -> tuple[int, list[float]]:
    cap_m, cap_h = PROFILE_LIMITS[args.profile]
    M, hs = args.paths, list(args.h)
    if M > cap_m:
        log.warning("profile %s caps paths at %d", args.profile, cap_m)
        M = cap_m
    if cap_h is not None and len(hs) > cap_h:
        log.warning("profile %s keeps the first %d step sizes", args.profile, cap_h)
        hs = hs[:cap_h]
    return M, hs


def _exem_options(args) -> dict:
    return {
        "gaussian": args.exem_rv == "gaussian",
        "coupling": args.exem_coupling,
        "fine_step": args.exem_step == "fine",
    }


def _run_config(args, M, hs) -> dict:
    cfg = {
        "command": args.command, "scheme": args.scheme, "problem": args.problem,
        "h": hs, "M": M, "seed": args.seed, "batches": args.batches, "profile": args.profile,
    }  # fmt: skip
    if args.scheme == "exem":
        cfg["exem"] = _exem_options(args)
    return cfg


def _csv_path(args, stem: str) -> Path:
    if args.output:
        return Path(args.output)
    return _output_dir() / f"{stem}.csv"


def _scheme_label(args) -> str:
    return args.scheme if args.scheme in BUILTIN_SCHEMES else Path(args.scheme).stem


def _stem(args) -> str:
    return f"{args.command}_{_scheme_label(args)}_{args.problem}"


def _comments(cfg: dict) -> list[str]:
    return [
        f"weaksrk {__version__}",
        f"seed={cfg['seed']} config_hash={_config_hash(cfg)}",
        "config=" + json.dumps(cfg, sort_keys=True),
    ]


def _print_estimates(estimates, out):
    out.write(f"{'h':>12} {'mu_hat':>13} {'sigma2_mu':>11} {'ci_lo':>13} {'ci_hi':>13} {'effort':>14}\n")
    for e in estimates:
        c = e.counters
        eff = c.drift_evals + c.diffusion_evals + c.rv_draws
        out.write(
            f"{e.h:12.6g} {e.mu_hat:13.5e} {e.sigma2_mu:11.3e} {e.ci_lo:13.5e} {e.ci_hi:13.5e} {eff:14d}\n"
        )


def _estimates_for(args, plan, problem, M, hs):
    threads = args.threads or os.cpu_count() or 1
    if isinstance(plan, str):
        opts = _exem_options(args)
        return [estimate_exem(problem, h, M, args.seed, args.batches, threads=threads, **opts) for h in hs]
    return [estimate(plan, problem, h, M, args.seed, args.batches, threads) for h in hs]


def cmd_bench(args, out) -> int:
    plan = resolve_scheme(args.scheme)
    problem = get_problem(args.problem)
    M, hs = _apply_profile(args)
    cfg = _run_config(args, M, hs)
    ests = _estimates_for(args, plan, problem, M, hs)
    path = _csv_path(args, _stem(args))
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        write_csv(fh, ests, comments=_comments(cfg), timing=args.timing)
    _print_estimates(ests, out)
    out.write(f"wrote {path}\n")
    return EXIT_OK


GNUPLOT_TEMPLATE = """set xlabel "log2 h"
set ylabel "log2 |mu_hat|"
set key left top
plot {plots}
"""


def cmd_converge(args, out) -> int:
    plan = resolve_scheme(args.scheme)
    problem = get_problem(args.problem)
    M, hs = _apply_profile(args)
    if len(hs) < 2:
        raise UsageError("converge needs at least two step sizes")
    cfg = _run_config(args, M, hs)
    threads = args.threads or os.cpu_count() or 1
    report = convergence_study(
        plan, problem, hs, M, args.seed, args.batches, threads,
        exem_options=_exem_options(args) if isinstance(plan, str) else None,
    )  # fmt: skip
    stem = _stem(args)
    path = _csv_path(args, stem)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        write_csv(fh, report.estimates, report, comments=_comments(cfg), timing=args.timing)
    scheme = _scheme_label(args)
    dat = path.with_name(f"{path.stem}_{scheme}.dat")
    with open(dat, "w", encoding="utf-8") as fh:
        fh.write(f"# log2(h) log2(|mu_hat|) for {scheme} on {problem.name}\n")
        for e in report.estimates:
            fh.write(f"{math.log2(e.h):.6f} {math.log2(abs(e.mu_hat)) if e.mu_hat else float('nan'):.6f}\n")
    gp = path.with_suffix(".gp")
    gp.write_text(
        GNUPLOT_TEMPLATE.format(
            plots=f'"{dat.name}" using 1:2 with linespoints title "{scheme}"'
        ),
        encoding="utf-8",
    )
    _print_estimates(report.estimates, out)
    out.write(f"slope={report.slope:.4f} stderr={report.slope_stderr:.4f} points={len(report.points_used)}\n")
    out.write(f"wrote {path}, {dat}, {gp}\n")
    return EXIT_OK


def effort_table(plan, m_values, steps: int = 1):
    """Per-step (drift, diffusion, rv) counts of a plan for each m."""
    rows = []
    for m in m_values:
        sde = SdeProblem(1, m, 0.0, [1.0], lambda t, x: x, lambda j, t, x: 0.1 * x, name=f"m{m}")
        counters = EvalCounters()
        integrate_path(plan, sde, lambda x: x[..., 0], float(steps), 1.0, RandomStream(0, 0), counters)
        rows.append((m, counters.drift_evals // steps, counters.diffusion_evals // steps, counters.rv_draws // steps))
    return rows


def affine_residual(ms, values) -> float:
    """Max absolute residual of the least-squares affine fit of values on ms."""
    X = np.column_stack([np.ones(len(ms)), np.asarray(ms, dtype=float)])
    y = np.asarray(values, dtype=float)
    coef, *_ = np.linalg.lstsq(X, y, rcond=None)
    return float(np.max(np.abs(X @ coef - y)))


def cmd_effort(args, out) -> int:
    plan = resolve_scheme(args.scheme)
    if isinstance(plan, str):
        raise UsageError("effort tables are available for tableau schemes only")
    ms = list(range(1, args.m_max + 1))
    rows = effort_table(plan, ms)
    out.write(f"{'m':>3} {'drift':>6} {'diffusion':>10} {'rv':>5} {'total':>6}\n")
    totals = []
    for m, a, b, r in rows:
        totals.append(a + b + r)
        out.write(f"{m:3d} {a:6d} {b:10d} {r:5d} {a + b + r:6d}\n")
    out.write(f"affine fit residual m=1..{args.m_max}: {affine_residual(ms, totals):.6f}\n")
    if len(ms) > 2:
        out.write(f"affine fit residual m=2..{args.m_max}: {affine_residual(ms[1:], totals[1:]):.6f}\n")
    return EXIT_OK


def cmd_tableau(args, out) -> int:
    with open(args.file, encoding="utf-8") as fh:
        raw = json.load(fh)
    problems, _ = find_violations(raw)
    if problems:
        for p in problems:
            out.write(f"violation: {p}\n")
        return EXIT_INVALID
    tab = load(args.file)
    if args.action == "validate":
        out.write(f"valid: {tab.name} (s={tab.s})\n")
        return EXIT_OK
    out.write(format_report(classify(tab, args.tol)) + "\n")
    return EXIT_OK


def cmd_families(args, out) -> int:
    if args.action == "lec":
        if args.branch == "plus":
            out.write(f"c3=n/a lec={lec_norm(branch='plus').value:.3f} (anchor)\n")
        else:
            c3, value = minimize_lec("minus")
            out.write(f"c3={c3:.6f} lec={value:.3f}\n")
        return EXIT_OK
    if args.action == "dri1":
        tab = dri1_m_variant() if args.variant == "m" else dri1()
        text = dumps(tab)
        if args.output:
            Path(args.output).write_text(text, encoding="utf-8")
            out.write(f"wrote {args.output}\n")
        else:
            out.write(text)
        return EXIT_OK
    # sample
    if args.case not in ORDER22_CASES:
        make_order22(args.case)  # raises UnknownCase with the proper message
    rng = np.random.default_rng(args.seed)
    target = Path(args.output_dir) if args.output_dir else _output_dir()
    target.mkdir(parents=True, exist_ok=True)
    for i in range(args.count):
        params = sample_order22_params(args.case, rng, c1=args.c1)
        tab = make_order22(args.case, c1=args.c1, params=params)
        path = target / f"order22_{args.case}_{i:03d}.json"
        path.write_text(dumps(tab), encoding="utf-8")
        out.write(f"{path}\n")
    return EXIT_OK


def _add_mc_args(p):
    p.add_argument("--scheme", required=True, help="dri1, dri1m, euler, exem or a tableau JSON file")
    p.add_argument("--problem", required=True, choices=sorted(PROBLEMS))
    p.add_argument("--h", required=True, type=parse_steps, help="comma list, e.g. 0.5,2^-2,1/8")
    p.add_argument("--paths", type=_positive_int, default=10**5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--batches", type=int, default=20)
    p.add_argument("--threads", type=int, default=None, help="worker threads (default: all CPUs)")
    p.add_argument("--output", help=f"CSV path (default: ${OUTPUT_ENV} or the current directory)")
    p.add_argument("--profile", choices=sorted(PROFILE_LIMITS), default="full")
    p.add_argument("--exem-rv", choices=("gaussian", "three-point"), default="gaussian")
    p.add_argument("--exem-coupling", choices=("sum", "independent"), default="sum")
    p.add_argument("--exem-step", choices=("coarse", "fine"), default="coarse",
                   help="whether h labels the coarse (default) or the fine EXEM grid")  # fmt: skip
    p.add_argument("--timing", action="store_true", help="record wall-clock seconds in the CSV")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="weaksrk", description="Weak stochastic Runge-Kutta toolkit")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser, required=True)

    p = sub.add_parser("tableau", help="validate or order-check a tableau file")
    p.add_argument("action", choices=("validate", "check"))
    p.add_argument("file")
    p.add_argument("--tol", type=float, default=DEFAULT_TOL)

    p = sub.add_parser("families", help="coefficient families")
    fam = p.add_subparsers(dest="action", parser_class=_Parser, required=True)
    q = fam.add_parser("sample", help="write random members of an order-(2,2) case")
    q.add_argument("--case", required=True)
    q.add_argument("--seed", type=int, default=0)
    q.add_argument("--count", type=_positive_int, default=1)
    q.add_argument("--c1", type=int, choices=(-1, 1), default=1)
    q.add_argument("--output-dir")
    q = fam.add_parser("dri1", help="print the DRI1 tableau")
    q.add_argument("--variant", choices=("m",), help="m: nonzero hat-stage drift matrix for m > 1")
    q.add_argument("--output")
    q = fam.add_parser("lec", help="minimized local error constant")
    q.add_argument("--branch", choices=("minus", "plus"), default="minus")

    _add_mc_args(sub.add_parser("bench", help="Monte Carlo weak error at given step sizes"))
    _add_mc_args(sub.add_parser("converge", help="empirical weak order by regression"))

    p = sub.add_parser("effort", help="per-step evaluation counts versus m")
    p.add_argument("--scheme", default="dri1")
    p.add_argument("--m-max", type=_positive_int, default=10)
    return parser


COMMANDS = {
    "tableau": cmd_tableau,
    "families": cmd_families,
    "bench": cmd_bench,
    "converge": cmd_converge,
    "effort": cmd_effort,
}


def run(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError:
        return EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        return COMMANDS[args.command](args, out)
    except UsageError as exc:
        sys.stderr.write(f"usage error: {exc}\n")
        return EXIT_USAGE
    except VALIDATION_ERRORS as exc:
        sys.stderr.write(f"invalid: {type(exc).__name__}: {exc}\n")
        return EXIT_INVALID
    except json.JSONDecodeError as exc:
        sys.stderr.write(f"invalid: not a JSON tableau: {exc}\n")
        return EXIT_INVALID
    except (WeakSRKError, OSError, ValueError, KeyError) as exc:
        sys.stderr.write(f"error: {type(exc).__name__}: {exc}\n")
        return EXIT_RUNTIME


def main(argv=None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
