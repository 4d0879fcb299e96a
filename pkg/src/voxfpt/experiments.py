"""Experiment harness: batched Monte Carlo with confidence intervals, the
matching closed-form and exact-solver estimates, coefficient re-fitting, and
CSV reproduction of the figure-level datasets.

Every run is deterministic for a fixed master seed: trial i of a batch always
uses random stream i, so results are independent of worker count, and repeated
figure reproductions produce byte-identical CSV files.
"""
from __future__ import annotations

import csv
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import formulas, oracle
from ._kernels import STATUS_CAP
from .model import (Boundary, Dimension, DiffusionRates, DomainSpec,
                    RateScaling, ReactionScheme, ValidationError, Variant)
from .ssa import DEFAULT_EVENT_CAP, SamplerModel, run_batch_into

DEFAULT_MASTER_SEED = 20240601
DEFAULT_FIGURE_TRIALS = 10_000
DEFAULT_ACCEPTANCE_TRIALS = 100_000

FIGURE_TAGS = ("fig1", "fig2", "fig-tri-sweep-h", "fig-tri-sweep-Du",
               "fig-reaction", "figB1", "figB2", "figB3")

CSV_HEADER = ["experiment_id", "figure_tag", "boundary", "L", "K", "h",
              "Du", "Dv", "Dw", "k_value", "scaling", "estimator", "mean",
              "std_error", "n_trials", "seed"]


@dataclass(frozen=True)
class SamplerSpec:
    """Everything needed to draw one first-passage sample.

    For COLLISION_2W_2D the pair diffuses with (Du, Dv); for
    COLLISION_2W_1D the pair is (Dv, Dw) and Du is ignored.
    """

    model: SamplerModel
    domain: DomainSpec
    rates: DiffusionRates
    scheme: ReactionScheme | None = None
    event_cap: int = DEFAULT_EVENT_CAP


@dataclass(frozen=True)
class EstimatorSummary:
    """Monte Carlo estimate: mean, standard error, and bookkeeping.

    Trials that hit the event cap are counted in n_capped and excluded from
    the mean; std_error is the sample standard deviation over sqrt(trials).
    """

    mean: float
    std_error: float
    n_trials: int
    master_seed: int
    n_capped: int = 0


@dataclass(frozen=True)
class FitResult:
    """Slope-pinned least-squares fit of the additive constant.

    fitted_intercept_coefficient is dimensionless: intercept = b * L^2 /
    rate_sum.
    """

    fixed_slope: float
    fitted_intercept_coefficient: float
    residual_rms: float
    n_points: int


def estimate(
    spec: SamplerSpec,
    n_trials: int,
    master_seed: int = DEFAULT_MASTER_SEED,
    n_workers: int = 1,
) -> EstimatorSummary:
    """Run n_trials independent samples of the spec.

    Trial i always consumes stream (master_seed, i); workers only partition
    the trial range, so the result is identical for any worker count.
    """
    if n_trials < 2:
        raise ValidationError(f"need at least 2 trials, got {n_trials}")
    times = np.empty(n_trials)
    jumps = np.empty(n_trials, dtype=np.int64)
    status = np.empty(n_trials, dtype=np.int64)
    if n_workers <= 1:
        run_batch_into(spec.model, spec.domain, spec.rates, spec.scheme,
                       master_seed, 0, times, jumps, status, spec.event_cap)
    else:
        bounds = np.linspace(0, n_trials, n_workers + 1).astype(int)
        chunks = [(int(a), int(b)) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]

        def _run(chunk: tuple[int, int]) -> None:
            a, b = chunk
            run_batch_into(spec.model, spec.domain, spec.rates, spec.scheme,
                           master_seed, a, times[a:b], jumps[a:b],
                           status[a:b], spec.event_cap)

        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            list(pool.map(_run, chunks))
    capped = status == STATUS_CAP
    n_capped = int(capped.sum())
    kept = times[~capped]
    if n_capped:
        warnings.warn(f"{n_capped}/{n_trials} trials hit the event cap and "
                      "were excluded from the mean", RuntimeWarning)
    if len(kept) == 0:
        raise ValidationError("every trial hit the event cap")
    mean = float(kept.mean())
    se = float(kept.std(ddof=1) / math.sqrt(len(kept))) if len(kept) > 1 else 0.0
    return EstimatorSummary(mean=mean, std_error=se, n_trials=n_trials,
                            master_seed=master_seed, n_capped=n_capped)


def fit_intercept(
    points: list[tuple[float, float]],
    L: float,
    slope: float,
    rate_sum: float,
) -> FitResult:
    """Least-squares estimate of the additive constant with the log-term
    slope held fixed.

    points are (h, mean-time) pairs; the model is
    mean = slope * log(L/h) + b * L^2 / rate_sum, and only b is fitted.
    """
    if len(points) < 3:
        raise ValidationError(f"need at least 3 points, got {len(points)}")
    h_values = np.array([p[0] for p in points], dtype=float)
    y_values = np.array([p[1] for p in points], dtype=float)
    if len(np.unique(h_values)) < 2:
        raise ValidationError("degenerate design: all h values are equal")
    if L <= 0 or rate_sum <= 0:
        raise ValidationError("need L > 0 and rate_sum > 0")
    residual_y = y_values - slope * np.log(L / h_values)
    intercept = float(residual_y.mean())
    rms = float(np.sqrt(np.mean((residual_y - intercept) ** 2)))
    return FitResult(fixed_slope=slope,
                     fitted_intercept_coefficient=intercept * rate_sum / (L * L),
                     residual_rms=rms, n_points=len(points))


# ---------------------------------------------------------------------------
# experiment records and CSV schema
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ExperimentRecord:
    """One CSV row: a parameter point evaluated by one estimator."""

    experiment_id: str
    figure_tag: str
    boundary: str
    L: float
    K: int
    h: float
    Du: float | None
    Dv: float | None
    Dw: float | None
    k_value: float | None
    scaling: str
    estimator: str          # formula | mc | oracle
    mean: float | None
    std_error: float | None
    n_trials: int | None
    seed: int | None

    def to_row(self) -> list[str]:
        return [self.experiment_id, self.figure_tag, self.boundary,
                _fmt(self.L), str(self.K), _fmt(self.h),
                _fmt(self.Du), _fmt(self.Dv), _fmt(self.Dw),
                _fmt(self.k_value), self.scaling, self.estimator,
                _fmt(self.mean), _fmt(self.std_error),
                "" if self.n_trials is None else str(self.n_trials),
                "" if self.seed is None else str(self.seed)]


def _fmt(value: float | None) -> str:
    """Reals print with 9 significant digits; absent values print empty."""
    if value is None:
        return ""
    return f"{value:.9g}"


def write_records(path: str | Path, records: list[ExperimentRecord]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for record in records:
            writer.writerow(record.to_row())
    return path


def read_rows(path: str | Path) -> list[dict[str, str]]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != CSV_HEADER:
            raise ValidationError(
                f"unexpected CSV header {reader.fieldnames}, want {CSV_HEADER}")
        return list(reader)


# ---------------------------------------------------------------------------
# figure parameter grids
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FigurePoint:
    """One parameter point of a figure grid."""

    model: SamplerModel
    boundary: Boundary
    L: float
    K: int
    rates: DiffusionRates
    k_1d: float | None = None

    @property
    def domain(self) -> DomainSpec:
        dimension = (Dimension.SQUARE_2D if self.model is SamplerModel.COLLISION_2W_2D
                     else Dimension.CHAIN_1D)
        return DomainSpec(L=self.L, K=self.K, dimension=dimension,
                          boundary=self.boundary)

    @property
    def scheme(self) -> ReactionScheme | None:
        if self.k_1d is None:
            return None
        return ReactionScheme(Variant.U_PLUS_V_PLUS_W, self.k_1d, RateScaling.ONE_D)


_PAIR_2D_SETS = [(1.0, 1.0), (2.0, 1.0), (1.0, 3.0)]
_TRI_SETS = [(0.1, 0.1, 0.1), (0.5, 0.2, 0.1), (2.5, 0.5, 0.1)]
_PAIR_2D_K = [16, 32, 64, 100]
_TRI_K = [8, 16, 32, 64]
_DU_SWEEP = [0.2, 0.5, 1.0, 2.5, 5.0, 10.0]
_FIG2_DU = [0.25, 0.5, 1.0, 2.0, 4.0, 8.0]
_REACTION_K1D = [1.0, 5.0, 25.0]
_PAIR_1D_EQUAL = [0.1, 0.2, 0.5, 1.0, 2.0]
_PAIR_1D_UNEQUAL = [(0.2, 0.1), (0.5, 0.2), (1.0, 0.3), (2.0, 0.5), (3.0, 1.0)]


def figure_points(figure_tag: str) -> list[FigurePoint]:
    """The frozen parameter grid of one figure."""
    points: list[FigurePoint] = []
    both = (Boundary.PERIODIC, Boundary.REFLECTIVE)
    if figure_tag == "fig1":
        for Du, Dv in _PAIR_2D_SETS:
            for bc in both:
                for K in _PAIR_2D_K:
                    points.append(FigurePoint(SamplerModel.COLLISION_2W_2D, bc,
                                              1.0, K, DiffusionRates(Du, Dv)))
    elif figure_tag == "fig2":
        for Du in _FIG2_DU:
            points.append(FigurePoint(SamplerModel.COLLISION_2W_2D,
                                      Boundary.REFLECTIVE, 1.0, 100,
                                      DiffusionRates(Du, 1.0)))
    elif figure_tag == "fig-tri-sweep-h":
        for rates in _TRI_SETS:
            for bc in both:
                for K in _TRI_K:
                    points.append(FigurePoint(SamplerModel.COLLISION_3W_1D, bc,
                                              1.0, K, DiffusionRates(*rates)))
    elif figure_tag == "fig-tri-sweep-Du":
        for bc in both:
            for Du in _DU_SWEEP:
                points.append(FigurePoint(SamplerModel.COLLISION_3W_1D, bc,
                                          1.0, 20, DiffusionRates(Du, 0.2, 0.1)))
    elif figure_tag == "fig-reaction":
        for k_1d in _REACTION_K1D:
            for K in _TRI_K:
                points.append(FigurePoint(SamplerModel.REACTION_3W_1D,
                                          Boundary.REFLECTIVE, 1.0, K,
                                          DiffusionRates(0.5, 0.2, 0.1),
                                          k_1d=k_1d))
    elif figure_tag == "figB1":
        for D in _PAIR_1D_EQUAL:
            points.append(FigurePoint(SamplerModel.COLLISION_2W_1D,
                                      Boundary.REFLECTIVE, 0.1, 64,
                                      DiffusionRates(0.0, D, D)))
    elif figure_tag == "figB2":
        for Dv, Dw in _PAIR_1D_UNEQUAL:
            points.append(FigurePoint(SamplerModel.COLLISION_2W_1D,
                                      Boundary.REFLECTIVE, 0.1, 64,
                                      DiffusionRates(0.0, Dv, Dw)))
    elif figure_tag == "figB3":
        for Dv, Dw in _PAIR_1D_UNEQUAL:
            points.append(FigurePoint(SamplerModel.COLLISION_2W_1D,
                                      Boundary.PERIODIC, 0.1, 128,
                                      DiffusionRates(0.0, Dv, Dw)))
    else:
        raise ValidationError(f"unknown figure tag {figure_tag!r}; "
                              f"known tags: {', '.join(FIGURE_TAGS)}")
    return points


def formula_value(point: FigurePoint) -> float:
    """The closed-form estimate matching a figure point."""
    d = point.domain
    r = point.rates
    if point.model is SamplerModel.COLLISION_2W_2D:
        return formulas.bimol_collision_2d(d.L, d.h, r.Du, r.Dv, d.boundary)
    if point.model is SamplerModel.COLLISION_3W_1D:
        return formulas.trimol_collision(d.L, d.h, r, d.boundary)
    if point.model is SamplerModel.REACTION_3W_1D:
        return formulas.trimol_reaction(d.L, d.h, r, point.scheme, d.boundary)
    return formulas.bimol_1d_limit(d.L, r.Dv, r.Dw, d.boundary)


def oracle_value(point: FigurePoint,
                 init_mode: oracle.InitMode = oracle.InitMode.UNIFORM_ALL) -> float | None:
    """The exact-solver estimate, or None when the point exceeds its
    state-space cap."""
    d = point.domain
    r = point.rates
    try:
        if point.model is SamplerModel.COLLISION_2W_2D:
            return oracle.mfpt_collision_2walkers(d, r.Du, r.Dv, init_mode).expected_time
        if point.model is SamplerModel.COLLISION_3W_1D:
            return oracle.mfpt_collision_3walkers_1d(d, r, init_mode).expected_time
        if point.model is SamplerModel.REACTION_3W_1D:
            return oracle.mean_reaction_time_3walkers_1d(
                d, r, point.scheme, init_mode).expected_time
        return oracle.mfpt_collision_2walkers(d, r.Dv, r.Dw, init_mode).expected_time
    except oracle.OracleCapError:
        return None


def _point_records(point: FigurePoint, figure_tag: str, index: int,
                   n_trials: int, master_seed: int, n_workers: int,
                   with_mc: bool, with_oracle: bool) -> list[ExperimentRecord]:
    experiment_id = f"{figure_tag}-{index:03d}"
    d = point.domain
    # columns for absent species stay empty: the 2D pair has no W, the 1D
    # pair is the (V, W) system with no U
    if point.model is SamplerModel.COLLISION_2W_2D:
        du, dv, dw = point.rates.Du, point.rates.Dv, None
    elif point.model is SamplerModel.COLLISION_2W_1D:
        du, dv, dw = None, point.rates.Dv, point.rates.Dw
    else:
        du, dv, dw = point.rates.as_tuple()
    base = dict(
        experiment_id=experiment_id,
        figure_tag=figure_tag,
        boundary=point.boundary.value,
        L=d.L, K=d.K, h=d.h,
        Du=du, Dv=dv, Dw=dw,
        k_value=point.k_1d,
        scaling="1d" if point.k_1d is not None else "",
    )
    records = [ExperimentRecord(**base, estimator="formula",
                                mean=formula_value(point), std_error=None,
                                n_trials=None, seed=None)]
    if with_mc:
        spec = SamplerSpec(point.model, d, point.rates, point.scheme)
        summary = estimate(spec, n_trials, master_seed, n_workers)
        records.append(ExperimentRecord(**base, estimator="mc",
                                        mean=summary.mean,
                                        std_error=summary.std_error,
                                        n_trials=summary.n_trials,
                                        seed=master_seed))
    if with_oracle:
        value = oracle_value(point)
        # a None mean marks the point as beyond the solver cap, on purpose
        records.append(ExperimentRecord(**base, estimator="oracle",
                                        mean=value, std_error=None,
                                        n_trials=None, seed=None))
    return records


def reproduce_figure(
    figure_tag: str,
    output_dir: str | Path,
    n_trials: int = DEFAULT_FIGURE_TRIALS,
    master_seed: int = DEFAULT_MASTER_SEED,
    n_workers: int = 1,
    with_mc: bool = True,
    with_oracle: bool = True,
) -> Path:
    """Write <figure_tag>.csv covering the figure's parameter grid with all
    feasible estimators and return its path."""
    points = figure_points(figure_tag)
    records: list[ExperimentRecord] = []
    for index, point in enumerate(points):
        records.extend(_point_records(point, figure_tag, index, n_trials,
                                      master_seed, n_workers, with_mc,
                                      with_oracle))
    return write_records(Path(output_dir) / f"{figure_tag}.csv", records)


# ---------------------------------------------------------------------------
# comparison reports
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ComparisonRow:
    experiment_id: str
    formula: float | None
    mc: float | None
    mc_se: float | None
    oracle: float | None
    formula_vs_oracle: float | None   # |formula - oracle| / oracle
    formula_vs_mc: float | None       # |formula - mc| / mc
    mc_vs_oracle_z: float | None      # |mc - oracle| / SE
    ok: bool


def compare_records(rows: list[dict[str, str]],
                    rel_tol: float = 0.10,
                    z_limit: float = 3.0) -> list[ComparisonRow]:
    """Group CSV rows by experiment id and compute per-point deviations.

    A point passes when the formula sits within rel_tol of the exact value
    (or of the Monte Carlo mean when no exact value exists) and the Monte
    Carlo mean sits within z_limit standard errors of the exact value.
    """
    groups: dict[str, dict[str, dict[str, str]]] = {}
    order: list[str] = []
    for row in rows:
        eid = row["experiment_id"]
        if eid not in groups:
            groups[eid] = {}
            order.append(eid)
        groups[eid][row["estimator"]] = row
    out: list[ComparisonRow] = []
    for eid in order:
        group = groups[eid]
        formula = _parse_float(group.get("formula", {}).get("mean"))
        mc = _parse_float(group.get("mc", {}).get("mean"))
        mc_se = _parse_float(group.get("mc", {}).get("std_error"))
        exact = _parse_float(group.get("oracle", {}).get("mean"))
        f_vs_o = (abs(formula - exact) / exact
                  if formula is not None and exact else None)
        f_vs_mc = (abs(formula - mc) / mc
                   if formula is not None and mc else None)
        z = (abs(mc - exact) / mc_se
             if mc is not None and exact is not None and mc_se else None)
        ok = True
        if f_vs_o is not None:
            ok &= f_vs_o <= rel_tol
        elif f_vs_mc is not None:
            # no exact value: allow statistical slack on top of the formula tolerance
            ok &= abs(formula - mc) <= rel_tol * mc + z_limit * (mc_se or 0.0)
        if z is not None:
            ok &= z <= z_limit
        out.append(ComparisonRow(eid, formula, mc, mc_se, exact,
                                 f_vs_o, f_vs_mc, z, bool(ok)))
    return out


def _parse_float(text: str | None) -> float | None:
    if text is None or text == "":
        return None
    return float(text)


def format_comparison(rows: list[ComparisonRow]) -> str:
    lines = [f"{'experiment_id':24s} {'formula':>12s} {'mc':>12s} "
             f"{'oracle':>12s} {'f/o dev':>9s} {'f/mc dev':>9s} {'|z|':>6s} verdict"]
    for row in rows:
        lines.append(
            f"{row.experiment_id:24s} {_col(row.formula):>12s} {_col(row.mc):>12s} "
            f"{_col(row.oracle):>12s} {_pct(row.formula_vs_oracle):>9s} "
            f"{_pct(row.formula_vs_mc):>9s} {_col(row.mc_vs_oracle_z, '{:.2f}'):>6s} "
            f"{'pass' if row.ok else 'FAIL'}")
    n_ok = sum(row.ok for row in rows)
    lines.append(f"{n_ok}/{len(rows)} points pass")
    return "\n".join(lines)


def _col(value: float | None, fmt: str = "{:.6g}") -> str:
    return "-" if value is None else fmt.format(value)


def _pct(value: float | None) -> str:
    return "-" if value is None else f"{100 * value:.2f}%"
