"""
Monte Carlo Estimator Comparison
================================
Runs every estimator on the same seeded UT samples over a (theta, n) grid,
reports BIAS / MSE / MRE per method, ranks the methods row-wise with ties
averaged, and aggregates the partial ranks into an overall ordering.

Every replication draws from its own seed, derived from
(base_seed, theta index, n index, replication), and estimates are stored per
replication before an ordered reduction, so results do not depend on the
number of workers.
"""

import math
import logging
from concurrent.futures import ProcessPoolExecutor, as_completed
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from pydantic import BaseModel, Field, field_validator
from scipy import stats

from config import settings
from app.exceptions import IncompleteGridError, UTDomainError, UTError
from app.dist.service import UnitTeissier, sample
from app.estimate.service import FitResult, Method, Sample, fit

logger = logging.getLogger(__name__)

Fitter = Callable[[Method, Sample], FitResult]
CSV_COLUMNS = [
    "theta", "n", "method", "bias", "mse", "mre",
    "rank_bias", "rank_mse", "rank_mre", "sum_ranks", "failures",
]


# ============================================================================
# MODELS
# ============================================================================

class StudyConfig(BaseModel):
    """Simulation design: every theta crossed with every n, N replications each"""
    thetas: List[float]
    ns: List[int]
    replications: int = Field(default=settings.SIM_REPLICATIONS, ge=1)
    base_seed: int = Field(default=settings.SIM_SEED, ge=0)
    methods: List[Method] = Field(default_factory=lambda: list(Method))

    @field_validator("thetas")
    @classmethod
    def _positive_thetas(cls, v):
        if not v or any(not (t > 0 and math.isfinite(t)) for t in v):
            raise ValueError("thetas must be a non-empty list of positive finite values")
        return v

    @field_validator("ns")
    @classmethod
    def _sizes(cls, v):
        if not v or any(n < 2 for n in v):
            raise ValueError("ns must be a non-empty list of sample sizes >= 2")
        return v

    @field_validator("methods")
    @classmethod
    def _methods(cls, v):
        if not v:
            raise ValueError("at least one method is required")
        return v

    @classmethod
    def full_grid(cls, replications: int = 1000, base_seed: Optional[int] = None) -> "StudyConfig":
        """Full published design; long-running."""
        return cls(
            thetas=list(settings.SIM_GRID_THETAS),
            ns=list(settings.SIM_GRID_SAMPLE_SIZES),
            replications=replications,
            base_seed=settings.SIM_SEED if base_seed is None else base_seed,
        )


class MetricRow(BaseModel):
    theta: float
    n: int
    method: Method
    bias: float
    mse: float
    mre: float
    failures: int = 0
    replications: int = 0


class PartialRank(BaseModel):
    theta: float
    n: int
    method: Method
    rank_bias: float
    rank_mse: float
    rank_mre: float
    sum_ranks: float
    partial_rank: float


class RankTable(BaseModel):
    methods: List[Method]
    partial: List[PartialRank]
    theta_totals: Dict[str, Dict[str, float]]
    overall_total: Dict[str, float]
    overall_rank: Dict[str, float]

    def lookup(self, theta: float, n: int, method) -> PartialRank:
        method = Method(method)
        for p in self.partial:
            if p.theta == theta and p.n == n and p.method is method:
                return p
        raise KeyError((theta, n, method.value))


# ============================================================================
# SEEDING / METRICS
# ============================================================================

def replication_seed(base_seed: int, theta_index: int, n_index: int, replication: int) -> int:
    """64-bit seed for one replication, reproducible in isolation."""
    seq = np.random.SeedSequence([base_seed, theta_index, n_index, replication])
    return int(seq.generate_state(1, dtype=np.uint64)[0])


def metrics_from_estimates(theta: float, estimates: Sequence[float]) -> Tuple[float, float, float, int]:
    """(BIAS, MSE, MRE, failures) with non-finite estimates excluded and counted."""
    values = np.asarray(estimates, dtype=float)
    ok = values[np.isfinite(values)]
    failures = int(values.size - ok.size)
    if ok.size == 0:
        return math.nan, math.nan, math.nan, failures
    errors = ok - theta
    bias = math.fsum(np.abs(errors)) / ok.size
    mse = math.fsum(errors * errors) / ok.size
    return bias, mse, bias / theta, failures


# ============================================================================
# STUDY RUNNER
# ============================================================================

def _safe_estimate(fitter: Fitter, method: Method, s: Sample) -> float:
    try:
        result = fitter(method, s)
    except (UTError, ArithmeticError) as e:
        logger.debug(f"{method.value} failed: {e}")
        return math.nan
    if not result.converged or not math.isfinite(result.theta_hat):
        return math.nan
    return result.theta_hat


def simulate_cell(
    theta: float,
    n: int,
    theta_index: int,
    n_index: int,
    replications: int,
    base_seed: int,
    methods: Sequence[Method],
    fitter: Optional[Fitter] = None,
) -> np.ndarray:
    """Estimates for one (theta, n) cell, shape (replications, len(methods)); nan marks a failure."""
    fitter = fitter or fit
    d = UnitTeissier(theta)
    estimates = np.full((replications, len(methods)), np.nan)
    for r in range(replications):
        seed = replication_seed(base_seed, theta_index, n_index, r)
        s = Sample.from_values(sample(d, n, seed))
        for j, method in enumerate(methods):
            estimates[r, j] = _safe_estimate(fitter, method, s)
    return estimates


def run_study(cfg: StudyConfig, workers: Optional[int] = None, fitter: Optional[Fitter] = None) -> List[MetricRow]:
    """
    One MetricRow per (theta, n, method), in grid order.

    workers > 1 runs cells in separate processes; the fitter must then be a
    module-level function.
    """
    workers = settings.SIM_WORKERS if workers is None else workers
    methods = [Method(m) for m in cfg.methods]
    cells = [(ti, ni, theta, n) for ti, theta in enumerate(cfg.thetas) for ni, n in enumerate(cfg.ns)]
    logger.info(
        f"Simulation: {len(cfg.thetas)} thetas x {len(cfg.ns)} sizes x {len(methods)} methods, "
        f"N={cfg.replications}, seed={cfg.base_seed}, workers={workers}"
    )

    results: Dict[Tuple[int, int], np.ndarray] = {}
    if workers <= 1:
        for ti, ni, theta, n in cells:
            results[(ti, ni)] = simulate_cell(theta, n, ti, ni, cfg.replications, cfg.base_seed, methods, fitter)
            logger.info(f"Cell done: theta={theta}, n={n}")
    else:
        with ProcessPoolExecutor(max_workers=workers) as executor:
            future_to_cell = {}
            for ti, ni, theta, n in cells:
                future = executor.submit(
                    simulate_cell, theta, n, ti, ni, cfg.replications, cfg.base_seed, methods, fitter,
                )
                future_to_cell[future] = (ti, ni, theta, n)

            for future in as_completed(future_to_cell):
                ti, ni, theta, n = future_to_cell[future]
                try:
                    results[(ti, ni)] = future.result()
                    logger.info(f"Cell done: theta={theta}, n={n}")
                except Exception as e:
                    logger.error(f"❌ Cell theta={theta}, n={n} crashed: {e}")
                    raise

    rows = []
    for ti, ni, theta, n in cells:
        estimates = results[(ti, ni)]
        for j, method in enumerate(methods):
            bias, mse, mre, failures = metrics_from_estimates(theta, estimates[:, j])
            if failures:
                logger.warning(f"⚠️  {method.value} failed {failures}/{cfg.replications} times at theta={theta}, n={n}")
            rows.append(MetricRow(
                theta=theta, n=n, method=method, bias=bias, mse=mse, mre=mre,
                failures=failures, replications=cfg.replications,
            ))
    return rows


# ============================================================================
# RANKING
# ============================================================================

def rank_row(values: Sequence[float]) -> List[float]:
    """Ascending ranks, ties averaged; non-finite values rank last."""
    arr = np.asarray(values, dtype=float)
    bad = ~np.isfinite(arr)
    if np.any(bad):
        logger.warning(f"⚠️  {int(bad.sum())} non-finite value(s) ranked last")
        arr = np.where(bad, np.inf, arr)
    return [float(r) for r in stats.rankdata(arr, method="average")]


def _theta_key(theta: float) -> str:
    return f"{theta:g}"


def overall_ranks(partial: pd.DataFrame) -> Tuple[Dict[str, float], Dict[str, float]]:
    """Column totals of a (cell x method) partial-rank frame and their ranks."""
    totals = partial.sum(axis=0)
    ranks = rank_row(totals.to_numpy())
    return (
        {str(m): float(t) for m, t in totals.items()},
        {str(m): r for m, r in zip(totals.index, ranks)},
    )


def aggregate_ranks(rows: Sequence[MetricRow], decimals: Optional[int] = settings.RANK_DECIMALS) -> RankTable:
    """
    Rank BIAS, MSE and MRE across methods in every (theta, n) cell, sum the
    three ranks, re-rank the sums into the partial rank, then total the
    partial ranks per theta and overall. Metrics are rounded to `decimals`
    first, matching the displayed precision of the tables; None ranks raw
    values.
    """
    if not rows:
        raise UTDomainError("no simulation rows to rank")
    present = {row.method for row in rows}
    methods = [m for m in Method if m in present]
    thetas = sorted({row.theta for row in rows})
    ns = sorted({row.n for row in rows})

    index: Dict[Tuple[float, int, Method], MetricRow] = {}
    for row in rows:
        key = (row.theta, row.n, row.method)
        if key in index:
            raise UTDomainError(f"duplicate simulation row for theta={row.theta}, n={row.n}, {row.method.value}")
        index[key] = row
    missing = [(t, n, m.value) for t in thetas for n in ns for m in methods if (t, n, m) not in index]
    if missing:
        raise IncompleteGridError(missing)

    def prepared(value: float) -> float:
        return round(value, decimals) if decimals is not None and math.isfinite(value) else value

    partial: List[PartialRank] = []
    partial_grid = []
    for theta in thetas:
        for n in ns:
            cell = [index[(theta, n, m)] for m in methods]
            r_bias = rank_row([prepared(c.bias) for c in cell])
            r_mse = rank_row([prepared(c.mse) for c in cell])
            r_mre = rank_row([prepared(c.mre) for c in cell])
            sums = [b + m + e for b, m, e in zip(r_bias, r_mse, r_mre)]
            cell_rank = rank_row(sums)
            partial_grid.append({"theta": theta, "n": n, **{m.value: r for m, r in zip(methods, cell_rank)}})
            for j, m in enumerate(methods):
                partial.append(PartialRank(
                    theta=theta, n=n, method=m,
                    rank_bias=r_bias[j], rank_mse=r_mse[j], rank_mre=r_mre[j],
                    sum_ranks=sums[j], partial_rank=cell_rank[j],
                ))

    method_columns = [m.value for m in methods]
    frame = pd.DataFrame(partial_grid, columns=["theta", "n"] + method_columns)
    theta_totals = {
        _theta_key(theta): {col: float(v) for col, v in group[method_columns].sum(axis=0).items()}
        for theta, group in frame.groupby("theta", sort=True)
    }
    overall_total, overall_rank = overall_ranks(frame[method_columns])

    return RankTable(
        methods=methods,
        partial=partial,
        theta_totals=theta_totals,
        overall_total=overall_total,
        overall_rank=overall_rank,
    )


# ============================================================================
# OUTPUT
# ============================================================================

def to_frame(rows: Sequence[MetricRow], ranks: Optional[RankTable] = None) -> pd.DataFrame:
    """One line per (theta, n, method) in the CSV column layout."""
    ranks = ranks or aggregate_ranks(rows)
    records = []
    for row in rows:
        p = ranks.lookup(row.theta, row.n, row.method)
        records.append({
            "theta": row.theta,
            "n": row.n,
            "method": row.method.value,
            "bias": row.bias,
            "mse": row.mse,
            "mre": row.mre,
            "rank_bias": p.rank_bias,
            "rank_mse": p.rank_mse,
            "rank_mre": p.rank_mre,
            "sum_ranks": p.sum_ranks,
            "failures": row.failures,
        })
    return pd.DataFrame.from_records(records, columns=CSV_COLUMNS)


def write_csv(rows: Sequence[MetricRow], path, ranks: Optional[RankTable] = None) -> pd.DataFrame:
    frame = to_frame(rows, ranks)
    frame.to_csv(path, index=False, float_format="%.17g")
    logger.info(f"Simulation table written to {path} ({len(frame)} rows)")
    return frame


def _fmt_rank(value: float) -> str:
    return f"{value:g}"


def render_markdown(rows: Sequence[MetricRow], ranks: Optional[RankTable] = None, decimals: int = 5) -> str:
    """Per-theta tables: metric values with {rank} marks and the summed-rank line."""
    ranks = ranks or aggregate_ranks(rows)
    methods = ranks.methods
    by_key = {(r.theta, r.n, r.method): r for r in rows}
    thetas = sorted({r.theta for r in rows})
    ns = sorted({r.n for r in rows})

    blocks = []
    for theta in thetas:
        lines = [
            f"### theta = {theta:g}",
            "",
            "| n | Est. | " + " | ".join(m.value for m in methods) + " |",
            "|---|---|" + "---|" * len(methods),
        ]
        for n in ns:
            parts = [ranks.lookup(theta, n, m) for m in methods]
            cells = [by_key[(theta, n, m)] for m in methods]
            for label, attr, rank_attr in (("BIAS", "bias", "rank_bias"), ("MSE", "mse", "rank_mse"), ("MRE", "mre", "rank_mre")):
                values = [
                    f"{getattr(c, attr):.{decimals}f} {{{_fmt_rank(getattr(p, rank_attr))}}}"
                    for c, p in zip(cells, parts)
                ]
                lead = str(n) if label == "BIAS" else ""
                lines.append(f"| {lead} | {label} | " + " | ".join(values) + " |")
            sums = [f"{_fmt_rank(p.sum_ranks)} {{{_fmt_rank(p.partial_rank)}}}" for p in parts]
            lines.append("|  | ΣRanks | " + " | ".join(sums) + " |")
        blocks.append("\n".join(lines))

    overall = [
        "### Overall",
        "",
        "| | " + " | ".join(m.value for m in methods) + " |",
        "|---|" + "---|" * len(methods),
        "| ΣRanks | " + " | ".join(_fmt_rank(ranks.overall_total[m.value]) for m in methods) + " |",
        "| Overall rank | " + " | ".join(_fmt_rank(ranks.overall_rank[m.value]) for m in methods) + " |",
    ]
    blocks.append("\n".join(overall))
    return "\n\n".join(blocks) + "\n"
