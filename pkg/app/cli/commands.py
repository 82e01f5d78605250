"""
Command Line
============
`python cli.py <subcommand> ...` mirrors the HTTP surface for batch work.

Exit codes: 0 success, 1 domain or parse error, 2 non-convergence.
"""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import List, Optional

import numpy as np
import pandas as pd
from pydantic import ValidationError

from config import settings
from app.exceptions import ConvergenceError, UTDomainError
from app.utils import frame_to_markdown, sanitize_for_json
from app.dist.service import UnitTeissier, cdf, hazard, pdf, quantile, sample, sf
from app.moments.service import MAX_ORDER_N, l_moments, order_stats_table, order_stats_grid, l_moments_grid
from app.charact.service import verify_characterization
from app.estimate.service import Method, fit, fit_all
from app.gof.service import fitted_curves, gof_report, pp_frame, fit_summary_row
from app.simulate.service import StudyConfig, aggregate_ranks, render_markdown, run_study, to_frame, write_csv
from app.data_ingestion.service import parse_dataset

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_DOMAIN = 1
EXIT_CONVERGENCE = 2

DIST_FUNCTIONS = {
    "pdf": pdf,
    "cdf": cdf,
    "sf": sf,
    "hazard": hazard,
    "quantile": quantile,
}
VERIFY_POINTS = 50
DEFAULT_ORDER_N = 5
# Numeric table labels and their descriptive aliases
TABLE_CHOICES = {
    "1": "order-stats",
    "2": "l-moments",
    "12": "fit",
    "order-stats": "order-stats",
    "l-moments": "l-moments",
    "fit": "fit",
}


def _emit(text: str, out: Optional[str] = None):
    if out:
        Path(out).write_text(text, encoding="utf-8")
        logger.info(f"Wrote {out}")
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _emit_frame(df: pd.DataFrame, fmt: str, out: Optional[str] = None):
    if fmt == "csv":
        _emit(df.to_csv(index=False, float_format="%.17g"), out)
    elif fmt == "md":
        _emit(frame_to_markdown(df), out)
    else:
        _emit(json.dumps(sanitize_for_json(df.to_dict("records")), indent=2), out)


# ============================================================================
# SUBCOMMANDS
# ============================================================================

def _cmd_dist(args) -> int:
    d = UnitTeissier(args.theta)
    values = np.asarray(args.values, dtype=float)
    result = np.atleast_1d(DIST_FUNCTIONS[args.fn](d, values))
    if args.json:
        _emit(json.dumps(sanitize_for_json({
            "theta": args.theta, "fn": args.fn, "values": args.values, "result": result.tolist(),
        })))
    else:
        _emit("\n".join(f"{x:.17g}\t{y:.17g}" for x, y in zip(values, result)))
    return EXIT_OK


def _cmd_sample(args) -> int:
    draws = sample(UnitTeissier(args.theta), args.n, args.seed)
    _emit("\n".join(f"{v:.17g}" for v in draws) + "\n", args.out)
    return EXIT_OK


def _cmd_moments(args) -> int:
    d = UnitTeissier(args.theta)
    if args.l_moments:
        lm = l_moments(d)
        if args.format == "json":
            _emit(lm.model_dump_json(indent=2))
        else:
            _emit_frame(pd.DataFrame([lm.model_dump()]), args.format)
    if args.order_stats is not None or not args.l_moments:
        n_max = DEFAULT_ORDER_N if args.order_stats is None else args.order_stats
        if not 1 <= n_max <= MAX_ORDER_N:
            raise UTDomainError(f"--order-stats must be in 1..{MAX_ORDER_N}")
        _emit_frame(order_stats_table(d, n_max), args.format)
    return EXIT_OK


def _method(name: str) -> Method:
    try:
        return Method(name)
    except ValueError:
        raise UTDomainError(f"unknown method '{name}'; use all or one of " + ", ".join(m.value for m in Method))


def _fit_lines(results) -> List[str]:
    lines = []
    for r in results.values():
        se = "" if r.std_error is None else f"  se={r.std_error:.4f}"
        flag = "" if r.converged else "  (not converged)"
        lines.append(f"{r.method.value:<6} theta_hat={r.theta_hat:.4f}{se}{flag}")
    return lines


def _cmd_fit(args) -> int:
    dataset = parse_dataset(args.data)
    s = dataset.to_sample()
    if args.method.lower() == "all":
        results = fit_all(s)
    else:
        m = _method(args.method)
        results = {m: fit(m, s)}

    mle = results.get(Method.MLE)
    report = gof_report(s, mle.theta_hat) if mle is not None and mle.converged else None

    if args.json:
        payload = {"dataset": dataset.path, "n": s.n, "fits": [json.loads(r.model_dump_json()) for r in results.values()]}
        if report is not None:
            payload["gof"] = json.loads(report.model_dump_json())
        _emit(json.dumps(payload, indent=2))
    else:
        lines = [f"dataset {dataset.path}: n={s.n}"] + _fit_lines(results)
        if report is not None:
            lines += ["", report.to_text()]
        _emit("\n".join(lines))

    if not all(r.converged for r in results.values()):
        return EXIT_CONVERGENCE
    return EXIT_OK


def _cmd_gof(args) -> int:
    s = parse_dataset(args.data).to_sample()
    report = gof_report(s, args.theta)
    _emit(report.model_dump_json(indent=2) if args.json else report.to_text())
    return EXIT_OK


def _cmd_verify(args) -> int:
    if args.points < 1:
        raise UTDomainError(f"--points must be at least 1 (got {args.points})")
    d = UnitTeissier(args.theta)
    grid = np.linspace(0.02, 0.98, args.points)
    checks = verify_characterization(d, grid)
    df = pd.DataFrame([c.model_dump() for c in checks])
    _emit_frame(df, args.format)
    worst = float(df["abs_gap"].max())
    logger.info(f"Largest truncated-moment gap: {worst:.3e}")
    return EXIT_OK


def _study_config(args) -> StudyConfig:
    if args.full_grid:
        cfg = StudyConfig.full_grid()
    elif args.config:
        try:
            cfg = StudyConfig.model_validate_json(Path(args.config).read_text(encoding="utf-8"))
        except (OSError, ValidationError) as e:
            raise UTDomainError(f"cannot load study configuration {args.config}: {e}")
    else:
        raise UTDomainError("simulate needs --config FILE or --paper-grid")
    updates = {}
    if args.replications is not None:
        updates["replications"] = args.replications
    if args.seed is not None:
        updates["base_seed"] = args.seed
    try:
        return StudyConfig.model_validate({**cfg.model_dump(), **updates})
    except ValidationError as e:
        raise UTDomainError(f"invalid study configuration: {e}")


def _cmd_simulate(args) -> int:
    cfg = _study_config(args)
    rows = run_study(cfg, workers=args.workers)
    ranks = aggregate_ranks(rows)
    if args.format == "md":
        _emit(render_markdown(rows, ranks), args.out)
    elif args.out:
        write_csv(rows, args.out, ranks)
    else:
        _emit(to_frame(rows, ranks).to_csv(index=False, float_format="%.17g"))
    if any(r.failures for r in rows):
        logger.warning("⚠️  Some replications failed to converge; see the failures column")
    return EXIT_OK


def _cmd_tables(args) -> int:
    which = TABLE_CHOICES[args.which]
    if which == "order-stats":
        df = order_stats_grid()
    elif which == "l-moments":
        df = l_moments_grid()
    else:
        df = fit_summary_row(parse_dataset(args.data).to_sample())
    _emit_frame(df, args.format, args.out)
    return EXIT_OK


def _cmd_curves(args) -> int:
    s = parse_dataset(args.data).to_sample()
    theta = args.theta
    if theta is None:
        result = fit(Method.MLE, s)
        if not result.converged:
            raise ConvergenceError("MLE did not converge; pass --theta", best=result.theta_hat)
        theta = result.theta_hat
    out = Path(args.out)
    fitted_curves(s, theta, args.points).to_csv(out, index=False, float_format="%.17g")
    pp_path = out.with_name(f"{out.stem}_pp{out.suffix or '.csv'}")
    pp_frame(s, theta).to_csv(pp_path, index=False, float_format="%.17g")
    logger.info(f"Curves at theta={theta:.6g} written to {out} and {pp_path}")
    return EXIT_OK


def _cmd_serve(args) -> int:
    import uvicorn

    uvicorn.run("main:app", host=args.host, port=args.port)
    return EXIT_OK


# ============================================================================
# PARSER
# ============================================================================

class ToolkitArgumentParser(argparse.ArgumentParser):
    """Usage errors exit with the domain-error code; 2 is reserved for non-convergence."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_DOMAIN, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = ToolkitArgumentParser(prog="cli.py", description="Unit Teissier distribution toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("dist", help="evaluate pdf, cdf, sf, hazard or quantile")
    p.add_argument("--theta", type=float, required=True)
    group = p.add_mutually_exclusive_group(required=True)
    for name in DIST_FUNCTIONS:
        group.add_argument(f"--{name}", dest="fn", action="store_const", const=name)
    p.add_argument("values", type=float, nargs="+")
    p.add_argument("--json", action="store_true")
    p.set_defaults(handler=_cmd_dist)

    p = sub.add_parser("sample", help="seeded inverse-transform draws")
    p.add_argument("--theta", type=float, required=True)
    p.add_argument("-n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(handler=_cmd_sample)

    p = sub.add_parser("moments", help="order-statistic moments and L-moments")
    p.add_argument("--theta", type=float, required=True)
    p.add_argument("--order-stats", type=int, metavar="N_MAX")
    p.add_argument("--l-moments", action="store_true")
    p.add_argument("--format", choices=["csv", "md", "json"], default="csv")
    p.set_defaults(handler=_cmd_moments)

    p = sub.add_parser("fit", help="estimate theta from a dataset")
    p.add_argument("--data", required=True, help="file path or built-in tag (risk73)")
    p.add_argument("--method", default="MLE", help="all, or one of " + ", ".join(m.value for m in Method))
    p.add_argument("--json", action="store_true")
    p.set_defaults(handler=_cmd_fit)

    p = sub.add_parser("gof", help="goodness-of-fit report at a given theta")
    p.add_argument("--data", required=True)
    p.add_argument("--theta", type=float, required=True)
    p.add_argument("--json", action="store_true")
    p.set_defaults(handler=_cmd_gof)

    p = sub.add_parser("verify", help="truncated-moment characterization checks")
    p.add_argument("--theta", type=float, required=True)
    p.add_argument("--points", type=int, default=VERIFY_POINTS)
    p.add_argument("--format", choices=["csv", "md", "json"], default="csv")
    p.set_defaults(handler=_cmd_verify)

    p = sub.add_parser("simulate", help="Monte Carlo comparison of the nine estimators")
    source = p.add_mutually_exclusive_group(required=True)
    source.add_argument("--config", help="JSON StudyConfig file")
    source.add_argument("--paper-grid", "--full-grid", dest="full_grid", action="store_true",
                        help="the full published theta x n design (long-running)")
    p.add_argument("--replications", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int, default=settings.SIM_WORKERS)
    p.add_argument("--format", choices=["csv", "md"], default="csv")
    p.add_argument("--out")
    p.set_defaults(handler=_cmd_simulate)

    p = sub.add_parser("tables", help="regenerate the published tables")
    p.add_argument("--which", choices=list(TABLE_CHOICES), required=True)
    p.add_argument("--data", default="risk73")
    p.add_argument("--format", choices=["csv", "md", "json"], default="csv")
    p.add_argument("--out")
    p.set_defaults(handler=_cmd_tables)

    p = sub.add_parser("curves", help="fitted pdf/cdf/sf and pp points as CSV")
    p.add_argument("--data", required=True)
    p.add_argument("--theta", type=float)
    p.add_argument("--points", type=int, default=200)
    p.add_argument("--out", required=True)
    p.set_defaults(handler=_cmd_curves)

    p = sub.add_parser("serve", help="start the HTTP API")
    p.add_argument("--host", default=settings.HOST)
    p.add_argument("--port", type=int, default=settings.PORT)
    p.set_defaults(handler=_cmd_serve)

    return parser


def cmd_dispatch(argv: Optional[List[str]] = None) -> int:
    """Parse argv, run the subcommand and map failures to exit codes."""
    args = build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except UTDomainError as e:
        logger.error(f"❌ {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_DOMAIN
    except ConvergenceError as e:
        best = "" if e.best is None else f" (best estimate {e.best:.6g})"
        logger.error(f"❌ {e}{best}")
        print(f"error: {e}{best}", file=sys.stderr)
        return EXIT_CONVERGENCE
