"""Two-group dataset ingestion, model fitting, and the worked-example reports.

Fits per-group sample means and an equal-weight pooled covariance (n-1
denominators in each group), then treats the fitted mean vectors as the
observed pair and runs the selection rule and every applicable estimator,
reproducing the worked example's parameter and estimate tables.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from importlib import resources
from typing import Optional

import numpy as np

from .core import CovarianceSpec, LinexParams, ObservationPair
from .estimators import EstimatorSpec, PriorSpec, est_bayes, evaluate
from .improvement import applicable_case, case_label, improve
from .selection import SelectionSummary, select

#: the one corrupt cholesterol value in the published data and its repair
OUTLIER_VALUE = 1745.46
OUTLIER_REPLACEMENT = 145.46


class DatasetError(ValueError):
    """Malformed or structurally invalid input data."""


@dataclass(frozen=True)
class GroupedDataset:
    group1: tuple[tuple[float, float], ...]
    group2: tuple[tuple[float, float], ...]
    labels: tuple[str, str]
    cleaned: bool = False


@dataclass(frozen=True)
class FittedModel:
    theta_hat_1: tuple[float, float]
    theta_hat_2: tuple[float, float]
    cov_hat: CovarianceSpec
    labels: tuple[str, str]
    n_per_group: int
    cleaned: bool
    pooling: str = "mean of per-group sample covariances, n-1 denominators"

    def parameter_rows(self) -> list[tuple[str, str, float, float, float]]:
        """Fitted-parameter table: one row per (population, measure)."""
        c = self.cov_hat
        return [
            (self.labels[0], "weight", self.theta_hat_1[0], c.sigma_xx, c.sigma_xy),
            (self.labels[0], "cholesterol", self.theta_hat_1[1], c.sigma_yy, c.sigma_xy),
            (self.labels[1], "weight", self.theta_hat_2[0], c.sigma_xx, c.sigma_xy),
            (self.labels[1], "cholesterol", self.theta_hat_2[1], c.sigma_yy, c.sigma_xy),
        ]

    def parameters_csv(self) -> str:
        buf = io.StringIO()
        buf.write("population,measure,mean,variance,covariance\n")
        for pop, meas, mean, var, covv in self.parameter_rows():
            buf.write(f"{pop},{meas},{mean:.4f},{var:.4f},{covv:.4f}\n")
        return buf.getvalue()


def bundled_dataset_path() -> str:
    """Path of the packaged two-group poultry dataset."""
    return str(resources.files("linexsel").joinpath("data/poultry.csv"))


def load_dataset(path: str, clean: bool = False) -> GroupedDataset:
    """Read `group,weight,cholesterol` rows into two equal-size groups.

    Group labels are taken in order of first appearance; exactly two are
    required and both must have the same size. `clean` replaces the known
    corrupt value 1745.46 by 145.46 (off by a factor-of-10 digit slip; the
    raw value is kept verbatim otherwise).
    """
    groups: dict[str, list[tuple[float, float]]] = {}
    order: list[str] = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise DatasetError(f"{path}: empty file")
        if [h.strip().lower() for h in header] != ["group", "weight", "cholesterol"]:
            raise DatasetError(
                f"{path}: expected header 'group,weight,cholesterol', got {','.join(header)!r}"
            )
        for lineno, row in enumerate(reader, start=2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) != 3:
                raise DatasetError(f"{path}:{lineno}: expected 3 fields, got {len(row)}")
            label = row[0].strip()
            try:
                weight, chol = float(row[1]), float(row[2])
            except ValueError as exc:
                raise DatasetError(f"{path}:{lineno}: {exc}") from None
            if not (math.isfinite(weight) and math.isfinite(chol)):
                raise DatasetError(f"{path}:{lineno}: non-finite value")
            if clean and chol == OUTLIER_VALUE:
                chol = OUTLIER_REPLACEMENT
            if label not in groups:
                groups[label] = []
                order.append(label)
            groups[label].append((weight, chol))
    if len(order) != 2:
        raise DatasetError(f"{path}: expected exactly 2 groups, found {len(order)}: {order}")
    n1, n2 = len(groups[order[0]]), len(groups[order[1]])
    if n1 != n2:
        raise DatasetError(
            f"{path}: groups must have equal sizes for the pooled covariance, "
            f"got {order[0]}={n1}, {order[1]}={n2}"
        )
    return GroupedDataset(
        group1=tuple(groups[order[0]]),
        group2=tuple(groups[order[1]]),
        labels=(order[0], order[1]),
        cleaned=clean,
    )


def fit(data: GroupedDataset) -> FittedModel:
    """Per-group sample means and the pooled covariance."""
    g1 = np.asarray(data.group1, dtype=float)
    g2 = np.asarray(data.group2, dtype=float)
    if len(g1) < 2 or len(g2) < 2:
        raise DatasetError("each group needs at least 2 observations")
    m1 = g1.mean(axis=0)
    m2 = g2.mean(axis=0)
    pooled = (np.cov(g1.T, ddof=1) + np.cov(g2.T, ddof=1)) / 2.0
    if pooled[0, 0] <= 0 or pooled[1, 1] <= 0:
        raise DatasetError("zero variance in a column; covariance model is degenerate")
    cov = CovarianceSpec(pooled[0, 0], pooled[1, 1], pooled[0, 1])
    return FittedModel(
        theta_hat_1=(float(m1[0]), float(m1[1])),
        theta_hat_2=(float(m2[0]), float(m2[1])),
        cov_hat=cov,
        labels=data.labels,
        n_per_group=len(g1),
        cleaned=data.cleaned,
    )


@dataclass
class AnalysisReport:
    """Selection outcome and every applicable estimate at the fitted parameters."""

    model: FittedModel
    a: float
    c: float
    summary: SelectionSummary
    selected_label: str
    estimates: list[tuple[str, float, str]] = field(default_factory=list)  # label, value, note

    def parameter_rows(self):
        return self.model.parameter_rows()

    def parameters_csv(self) -> str:
        return self.model.parameters_csv()

    def estimates_csv(self) -> str:
        buf = io.StringIO()
        buf.write("estimator,estimate,truncated\n")
        for label, value, note in self.estimates:
            buf.write(f"{label},{value:.4f},{note}\n")
        return buf.getvalue()

    def to_text(self) -> str:
        m = self.model
        lines = [
            f"fitted parameters (n = {m.n_per_group} per group, "
            f"{'cleaned' if m.cleaned else 'raw'} data; pooled = {m.pooling})",
        ]
        for pop, meas, mean, var, covv in self.parameter_rows():
            lines.append(f"  {pop:<12} {meas:<12} mean={mean:10.4f}  var={var:10.4f}  cov={covv:9.4f}")
        cov = m.cov_hat
        lines.append(f"  rho = {cov.rho:.4f}, xi = {cov.xi:.4f}")
        lines.append(
            f"selected population: {self.selected_label} "
            f"(x_max = {self.summary.x_max:.4f}, t1 = {self.summary.t1:.4f}, "
            f"t2 = {self.summary.t2:.4f})"
        )
        lines.append(f"estimates of the selected Y-mean (a = {self.a:g}, c = {self.c:g}):")
        for label, value, note in self.estimates:
            flag = "" if note in ("", "none") else f"  [{note}]"
            lines.append(f"  {label:<8} {value:12.4f}{flag}")
        return "\n".join(lines) + "\n"


def analyze(
    model: FittedModel,
    a: LinexParams,
    c: float = 1.0,
    prior: Optional[PriorSpec] = None,
) -> AnalysisReport:
    """Plug the fitted means in as the observed pair and evaluate everything.

    Mirrors the worked example: the fitted mean vectors are used directly as
    (X_i, Y_i), selection runs on them, and each natural estimator plus its
    improvement-region variant (when one applies at the fitted (a, rho)) is
    reported. A Bayes estimate is appended when a prior is supplied.
    """
    obs = ObservationPair(model.theta_hat_1, model.theta_hat_2)
    s = select(obs)
    cov = model.cov_hat
    report = AnalysisReport(
        model=model,
        a=a.a,
        c=c,
        summary=s,
        selected_label=model.labels[s.selected - 1],
    )
    base_specs = [
        ("N1", EstimatorSpec.n1()),
        ("N2", EstimatorSpec.n2()),
        ("N3", EstimatorSpec.n3()),
        ("N4", EstimatorSpec.n4(c)),
    ]
    for kind, spec in base_specs:
        report.estimates.append((kind, evaluate(spec, s, a, cov), ""))
        case_id = applicable_case(kind, a.a, cov.rho)
        if case_id is not None:
            outcome = improve(EstimatorSpec.improved(spec), s, a, cov)
            report.estimates.append((case_label(case_id), outcome.value, outcome.truncated))
    if prior is not None:
        report.estimates.append(("Bayes", est_bayes(s, prior, a, cov), ""))
    return report
