"""Seeded Monte Carlo risk engine and the six-table grid sweeps.

Every cell of a grid draws from its own counter-based stream keyed by
(master seed, table id, row, column group), so results are bit-identical
for a fixed master seed no matter how many workers run the sweep or which
columns are added later. A column group is the base-estimator family; the
base and its truncation-improved variant share draws, which is exactly the
common-random-numbers pairing the dominance comparisons need.
"""

from __future__ import annotations

import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.special import ndtr

from .core import (
    CovarianceSpec,
    InvalidParameterError,
    LinexOverflowError,
    LinexParams,
    MeanVectorPair,
    EXP_OVERFLOW_LIMIT,
    rng_stream,
    sample_batch,
)
from .estimators import EstimatorSpec, N3_LOG_SWITCH
from .improvement import applicable_case, case_label

#: the 11 mean-vector configurations used by every published table
THETA_CONFIGS: tuple[MeanVectorPair, ...] = tuple(
    MeanVectorPair(t1, t2)
    for t1, t2 in [
        ((0.2, 2.0), (2.0, 0.2)),
        ((0.4, 1.8), (1.8, 0.4)),
        ((0.6, 1.6), (1.6, 0.6)),
        ((0.8, 1.4), (1.4, 0.8)),
        ((1.0, 1.2), (1.2, 1.0)),
        ((0.0, 0.0), (0.0, 0.0)),
        ((1.2, 1.0), (1.0, 1.2)),
        ((1.4, 0.8), (0.8, 1.4)),
        ((1.6, 0.6), (0.6, 1.6)),
        ((1.8, 0.4), (0.4, 1.8)),
        ((2.0, 0.2), (0.2, 2.0)),
    ]
)

_GROUP_IDS = {"N1": 0, "N2": 1, "N3": 2, "N4": 3, "Bayes": 4, "Shift": 5, "Improved": 6}


def stream_group(spec: EstimatorSpec) -> int:
    """Column-group index for stream derivation; improved shares its base's group."""
    kind = spec.base.kind if spec.kind == "Improved" else spec.kind
    return _GROUP_IDS[kind]


@dataclass(frozen=True)
class SimConfig:
    means: MeanVectorPair
    cov: CovarianceSpec
    a: LinexParams
    reps: int = 20000
    master_seed: int = 0
    estimators: tuple[EstimatorSpec, ...] = ()

    def __post_init__(self) -> None:
        if self.reps < 1:
            raise InvalidParameterError(f"reps must be >= 1, got {self.reps}")


@dataclass(frozen=True)
class RiskEstimate:
    """Monte Carlo mean LINEX risk with its standard error and provenance."""

    mean_risk: float
    std_error: Optional[float]
    reps: int
    master_seed: int
    stream_key: tuple[int, ...] = ()


def _batch_summaries(x1, y1, x2, y2):
    sel1 = x1 > x2
    y_sel = np.where(sel1, y1, y2)
    y_other = np.where(sel1, y2, y1)
    x_max = np.maximum(x1, x2)
    t1 = np.minimum(x1, x2) - x_max
    t2 = y_other - y_sel
    return sel1, x_max, y_sel, y_other, t1, t2


def _batch_n3_offset(t1, t2, a: float, cov: CovarianceSpec):
    p = ndtr(t1 / math.sqrt(2.0 * cov.sigma_xx))
    z = a * t2
    out = np.empty_like(t2)
    big = z > N3_LOG_SWITCH
    small = ~big
    out[small] = np.log1p(np.expm1(z[small]) * p[small]) / a
    if big.any():
        out[big] = t2[big] + np.log(p[big] + (1.0 - p[big]) * np.exp(-z[big])) / a
    return out


def _batch_base_phi(spec: EstimatorSpec, t1, t2, a: float, cov: CovarianceSpec):
    if spec.kind == "N1":
        return np.zeros_like(t2)
    if spec.kind == "N2":
        return np.full_like(t2, -a * cov.sigma_yy / 2.0)
    if spec.kind == "N3":
        return _batch_n3_offset(t1, t2, a, cov)
    if spec.kind == "N4":
        inside = t1 > -spec.c * math.sqrt(2.0 * cov.sigma_xx)
        return np.where(inside, t2 / 2.0, 0.0)
    raise InvalidParameterError(f"no equivariant component for kind {spec.kind!r}")


def _batch_estimates(
    spec: EstimatorSpec, x_max, y_sel, y_other, t1, t2, a: float, cov: CovarianceSpec
):
    if spec.kind in ("N1", "N2", "N3", "N4"):
        return y_sel + _batch_base_phi(spec, t1, t2, a, cov)
    if spec.kind == "Shift":
        return y_sel + spec.d
    if spec.kind == "Bayes":
        prior = spec.prior
        det = cov.det
        if det <= 0:
            raise InvalidParameterError("Bayes estimator requires |rho| < 1")
        m = prior.m
        denom = m * m + m * cov.sigma_xx + m * cov.sigma_yy + det
        p_star = (
            prior.mu2 * (det + m * cov.sigma_yy)
            + m * y_sel * (m + cov.sigma_xx)
            + m * cov.sigma_xy * (prior.mu1 - x_max)
        ) / denom
        q_star = (m * m * cov.sigma_yy + m * det) / denom
        return p_star - 0.5 * a * q_star
    if spec.kind == "Improved":
        phi = _batch_base_phi(spec.base, t1, t2, a, cov)
        rho, xi = cov.rho, cov.xi
        value = t2 / 2.0 - a * cov.sigma_yy / 4.0
        margin = -a * cov.sigma_yy * (1.0 - rho * rho) / 2.0
        fin_lo = (t1 * xi - rho * t2 < 0) & (t2 - xi * rho * t1 < margin)
        fin_hi = (t1 * xi - rho * t2 > 0) & (t2 - xi * rho * t1 > margin)
        clipped = np.where(fin_lo & (phi <= value), value, phi)
        clipped = np.where(fin_hi & (phi >= value), value, clipped)
        return y_sel + clipped
    raise InvalidParameterError(f"unknown estimator kind {spec.kind!r}")


def _batch_losses(estimates, theta_sel, a: float, context: str):
    z = a * (estimates - theta_sel)
    zmax = float(z.max())
    if zmax > EXP_OVERFLOW_LIMIT:
        rep = int(z.argmax())
        raise LinexOverflowError(zmax, f"{context} rep={rep}")
    return np.expm1(z) - z


def _simulate_losses(
    config: SimConfig, specs: Sequence[EstimatorSpec], stream_key: tuple[int, ...]
) -> list[np.ndarray]:
    rng = rng_stream(config.master_seed, *stream_key)
    x1, y1, x2, y2 = sample_batch(config.means, config.cov, rng, config.reps)
    sel1, x_max, y_sel, y_other, t1, t2 = _batch_summaries(x1, y1, x2, y2)
    theta_sel = np.where(sel1, config.means.theta1[1], config.means.theta2[1])
    out = []
    for spec in specs:
        est = _batch_estimates(spec, x_max, y_sel, y_other, t1, t2, config.a.a, config.cov)
        out.append(_batch_losses(est, theta_sel, config.a.a, spec.label))
    return out


def _estimate_from_losses(
    losses: np.ndarray, config: SimConfig, stream_key: tuple[int, ...]
) -> RiskEstimate:
    mean = float(losses.mean())
    se = float(losses.std(ddof=1) / math.sqrt(config.reps)) if config.reps > 1 else None
    return RiskEstimate(
        mean_risk=mean,
        std_error=se,
        reps=config.reps,
        master_seed=config.master_seed,
        stream_key=stream_key,
    )


def simulate_risk(
    config: SimConfig, spec: EstimatorSpec, stream_key: tuple[int, ...] = ()
) -> RiskEstimate:
    """Monte Carlo LINEX risk of one estimator at the configured means.

    Each rep draws an observation pair, applies the selection rule, evaluates
    the estimator, and scores it against the realized theta_y^S. Deterministic
    for a fixed (master_seed, stream_key).
    """
    if spec.kind == "Bayes" and config.cov.det <= 0:
        raise InvalidParameterError("Bayes estimator requires |rho| < 1")
    (losses,) = _simulate_losses(config, [spec], stream_key)
    return _estimate_from_losses(losses, config, stream_key)


def simulate_all(config: SimConfig) -> dict[str, RiskEstimate]:
    """Evaluate config.estimators on one shared stream (common random numbers)."""
    if not config.estimators:
        raise InvalidParameterError("config.estimators must be nonempty")
    losses = _simulate_losses(config, config.estimators, ())
    return {
        spec.label: _estimate_from_losses(l, config, ())
        for spec, l in zip(config.estimators, losses)
    }


def paired_risk_difference(
    config: SimConfig,
    spec_a: EstimatorSpec,
    spec_b: EstimatorSpec,
    stream_key: tuple[int, ...] = (),
) -> tuple[float, float]:
    """mean(loss_a - loss_b) over identical draws, with the paired standard error."""
    loss_a, loss_b = _simulate_losses(config, [spec_a, spec_b], stream_key)
    diff = loss_a - loss_b
    mean = float(diff.mean())
    se = float(diff.std(ddof=1) / math.sqrt(config.reps)) if config.reps > 1 else 0.0
    return mean, se


@dataclass(frozen=True)
class TableSpec:
    """Config of one published risk table (or a custom grid shaped like one)."""

    table_id: int
    a: LinexParams
    cov: CovarianceSpec
    columns: tuple[tuple[str, EstimatorSpec], ...]
    rows: tuple[MeanVectorPair, ...] = THETA_CONFIGS
    c: float = 1.0


def table_columns(
    a: float, rho: float, improved_bases: Sequence[str], c: float
) -> tuple[tuple[str, EstimatorSpec], ...]:
    cols: list[tuple[str, EstimatorSpec]] = []
    base_specs = {
        "N1": EstimatorSpec.n1(),
        "N2": EstimatorSpec.n2(),
        "N3": EstimatorSpec.n3(),
        "N4": EstimatorSpec.n4(c),
    }
    for kind in ("N1", "N2", "N3", "N4"):
        cols.append((kind, base_specs[kind]))
        if kind in improved_bases:
            case_id = applicable_case(kind, a, rho)
            if case_id is None:
                raise InvalidParameterError(
                    f"no improvement case covers base {kind} at a={a}, rho={rho}"
                )
            cols.append((case_label(case_id), EstimatorSpec.improved(base_specs[kind])))
    return tuple(cols)


def _make_table(table_id: int, a: float, sigma: float, rho: float, improved: Sequence[str]) -> TableSpec:
    cov = CovarianceSpec.from_correlation(sigma, sigma, rho)
    return TableSpec(
        table_id=table_id,
        a=LinexParams(a),
        cov=cov,
        columns=table_columns(a, rho, improved, 1.0),
    )


#: the published grids: (a, sigma_xx = sigma_yy, rho, which bases carry an improved column)
TABLE_SPECS: dict[int, TableSpec] = {
    5: _make_table(5, 1.0, 2.0, 1.0, ("N1", "N2")),
    6: _make_table(6, 1.0, 2.0, -1.0, ("N1", "N2", "N3", "N4")),
    7: _make_table(7, 1.0, 2.0, 0.0, ("N3",)),
    8: _make_table(8, -1.0, 4.0, 1.0, ()),
    9: _make_table(9, -1.0, 4.0, -1.0, ("N1", "N2", "N3", "N4")),
    10: _make_table(10, -1.0, 4.0, 0.0, ("N1", "N4")),
}


@dataclass
class RiskTable:
    """Results of one grid sweep, in canonical row-major order."""

    spec: TableSpec
    reps: int
    master_seed: int
    estimates: dict[tuple[int, int], RiskEstimate] = field(default_factory=dict)

    def cell(self, row: int, col: int) -> RiskEstimate:
        return self.estimates[(row, col)]

    @property
    def flagged(self) -> list[tuple[int, str, float, float]]:
        """Cells whose standard error exceeds 5% of the mean (high variance)."""
        out = []
        for (i, j), est in sorted(self.estimates.items()):
            if est.std_error is not None and est.std_error > 0.05 * abs(est.mean_risk):
                out.append((i, self.spec.columns[j][0], est.mean_risk, est.std_error))
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("theta1_x,theta1_y,theta2_x,theta2_y,estimator,risk,std_error,reps,seed\n")
        for i, means in enumerate(self.spec.rows):
            for j, (label, _) in enumerate(self.spec.columns):
                est = self.estimates[(i, j)]
                se = "" if est.std_error is None else f"{est.std_error:.6g}"
                buf.write(
                    f"{means.theta1[0]:.6g},{means.theta1[1]:.6g},"
                    f"{means.theta2[0]:.6g},{means.theta2[1]:.6g},"
                    f"{label},{est.mean_risk:.6g},{se},{est.reps},{est.master_seed}\n"
                )
        return buf.getvalue()

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            fh.write(self.to_csv())


def risk_grid(
    table: int | TableSpec,
    reps: int = 20000,
    master_seed: int = 0,
    workers: int = 1,
) -> RiskTable:
    """Sweep a table's full factorial of mean configurations x estimator columns.

    Cells are independent tasks; draws for a cell come from the stream keyed
    (master_seed, table_id, row, column-group), so the output is byte-identical
    for any worker count and unchanged when columns from other groups are added.
    """
    if isinstance(table, int):
        if table not in TABLE_SPECS:
            raise InvalidParameterError(
                f"table id must be one of {sorted(TABLE_SPECS)}, got {table}"
            )
        spec = TABLE_SPECS[table]
    else:
        spec = table
    if reps < 1:
        raise InvalidParameterError(f"reps must be >= 1, got {reps}")
    if workers < 1:
        raise InvalidParameterError(f"workers must be >= 1, got {workers}")

    # one task per (row, column-group): all columns in a group share draws
    groups: dict[int, list[int]] = {}
    for j, (_, est_spec) in enumerate(spec.columns):
        groups.setdefault(stream_group(est_spec), []).append(j)

    table_result = RiskTable(spec=spec, reps=reps, master_seed=master_seed)

    def run_cell(row_idx: int, group_id: int) -> list[tuple[tuple[int, int], RiskEstimate]]:
        config = SimConfig(
            means=spec.rows[row_idx],
            cov=spec.cov,
            a=spec.a,
            reps=reps,
            master_seed=master_seed,
        )
        key = (spec.table_id, row_idx, group_id)
        cols = groups[group_id]
        losses = _simulate_losses(config, [spec.columns[j][1] for j in cols], key)
        return [
            ((row_idx, j), _estimate_from_losses(l, config, key))
            for j, l in zip(cols, losses)
        ]

    tasks = [(i, g) for i in range(len(spec.rows)) for g in sorted(groups)]
    if workers == 1:
        results = [run_cell(i, g) for i, g in tasks]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda t: run_cell(*t), tasks))
    for chunk in results:
        for key, est in chunk:
            table_result.estimates[key] = est
    return table_result
