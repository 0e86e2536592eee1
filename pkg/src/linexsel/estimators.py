"""Point estimators of the selected population's Y-mean.

Four natural estimators (the plug-in concomitant, the minimum-risk
equivariant shift, a log-transformed plug-in, and a hybrid that averages
the concomitants when the X's are close), the conjugate-prior Bayes
estimator, the constant-shift class, and a tagged-spec dispatcher.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from .core import (
    CovarianceSpec,
    InvalidParameterError,
    LinexParams,
    SingularCovarianceError,
    std_normal_cdf,
)
from .selection import SelectionSummary

N3_LOG_SWITCH = 30.0  # switch est_n3 to the log-domain rearrangement


@dataclass(frozen=True)
class PriorSpec:
    """Conjugate normal prior N2((mu1, mu2), m * I) on each mean vector."""

    mu1: float
    mu2: float
    m: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.mu1) and math.isfinite(self.mu2) and math.isfinite(self.m)):
            raise InvalidParameterError("prior parameters must be finite")
        if self.m <= 0:
            raise InvalidParameterError(f"prior variance scale m must be positive, got {self.m}")


_KINDS = ("N1", "N2", "N3", "N4", "Bayes", "Shift", "Improved")


@dataclass(frozen=True)
class EstimatorSpec:
    """Tagged description of which estimator to evaluate.

    Exactly the fields relevant to `kind` may be set: c for N4, d for Shift,
    prior for Bayes, base (one of N1..N4) for Improved.
    """

    kind: str
    c: Optional[float] = None
    d: Optional[float] = None
    prior: Optional[PriorSpec] = None
    base: Optional["EstimatorSpec"] = None

    def __post_init__(self) -> None:
        if self.kind not in _KINDS:
            raise InvalidParameterError(f"unknown estimator kind {self.kind!r}")
        wants = {"N4": "c", "Shift": "d", "Bayes": "prior", "Improved": "base"}
        for field_name in ("c", "d", "prior", "base"):
            val = getattr(self, field_name)
            if val is None:
                if wants.get(self.kind) == field_name:
                    raise InvalidParameterError(f"{self.kind} spec requires {field_name}")
            elif wants.get(self.kind) != field_name:
                raise InvalidParameterError(f"{self.kind} spec must not set {field_name}")
        if self.kind == "N4" and self.c < 0:
            raise InvalidParameterError("hybrid threshold c must be >= 0")
        if self.kind == "Shift" and not math.isfinite(self.d):
            raise InvalidParameterError("shift constant d must be finite")
        if self.kind == "Improved" and self.base.kind not in ("N1", "N2", "N3", "N4"):
            raise InvalidParameterError(
                f"Improved base must be one of N1..N4, got {self.base.kind!r}"
            )

    @classmethod
    def n1(cls) -> "EstimatorSpec":
        return cls("N1")

    @classmethod
    def n2(cls) -> "EstimatorSpec":
        return cls("N2")

    @classmethod
    def n3(cls) -> "EstimatorSpec":
        return cls("N3")

    @classmethod
    def n4(cls, c: float = 1.0) -> "EstimatorSpec":
        return cls("N4", c=c)

    @classmethod
    def bayes(cls, prior: PriorSpec) -> "EstimatorSpec":
        return cls("Bayes", prior=prior)

    @classmethod
    def shift(cls, d: float) -> "EstimatorSpec":
        return cls("Shift", d=d)

    @classmethod
    def improved(cls, base: "EstimatorSpec") -> "EstimatorSpec":
        return cls("Improved", base=base)

    @property
    def label(self) -> str:
        if self.kind == "N4":
            return f"N4(c={self.c:g})"
        if self.kind == "Shift":
            return f"Shift(d={self.d:g})"
        if self.kind == "Improved":
            return f"Improved[{self.base.label}]"
        return self.kind


def est_n1(s: SelectionSummary) -> float:
    """Plug-in estimator: the selected concomitant Y_[2]."""
    return s.y_sel


def est_n2(s: SelectionSummary, a: LinexParams, cov: CovarianceSpec) -> float:
    """Minimum risk equivariant estimator Y_[2] - a*sigma_yy/2."""
    return s.y_sel - a.a * cov.sigma_yy / 2.0


def n3_offset(t1: float, t2: float, a: LinexParams, cov: CovarianceSpec) -> float:
    """The equivariant component of est_n3.

    (1/a) * ln[1 + (exp(a*t2) - 1) * Phi(t1 / sqrt(2*sigma_xx))], rearranged
    as t2 + (1/a) * ln[P + (1-P) * exp(-a*t2)] once a*t2 > 30 so the
    exponential never overflows (the worked dataset reaches a*t2 ~ 64).
    """
    p = std_normal_cdf(t1 / math.sqrt(2.0 * cov.sigma_xx))
    z = a.a * t2
    if z > N3_LOG_SWITCH:
        return t2 + math.log(p + (1.0 - p) * math.exp(-z)) / a.a
    return math.log1p(math.expm1(z) * p) / a.a


def est_n3(s: SelectionSummary, a: LinexParams, cov: CovarianceSpec) -> float:
    """Log-transformed plug-in estimator; always between y_sel and y_sel + t2."""
    return s.y_sel + n3_offset(s.t1, s.t2, a, cov)


def est_n4(s: SelectionSummary, c: float, cov: CovarianceSpec) -> float:
    """Hybrid estimator: concomitant average when the X's are within
    c*sqrt(2*sigma_xx) of each other, else the selected concomitant.

    c = 0 degenerates to est_n1 because t1 <= 0 always.
    """
    if c < 0:
        raise InvalidParameterError("hybrid threshold c must be >= 0")
    if s.t1 > -c * math.sqrt(2.0 * cov.sigma_xx):
        return (s.y_sel + s.y_other) / 2.0
    return s.y_sel


def bayes_posterior(
    z: tuple[float, float], prior: PriorSpec, cov: CovarianceSpec
) -> tuple[float, float]:
    """Posterior mean and variance (p*, q*) of theta_y given one observation.

    Closed form for the conjugate N2(mu, m*I) prior; q* is the (2,2) entry of
    the posterior covariance (Sigma^-1 + (m*I)^-1)^-1. Requires |Sigma| > 0.
    """
    if cov.det <= 0:
        raise SingularCovarianceError("Bayes posterior needs a nonsingular covariance")
    x, y = z
    m = prior.m
    det = cov.det
    denom = m * m + m * cov.sigma_xx + m * cov.sigma_yy + det
    p_star = (
        prior.mu2 * (det + m * cov.sigma_yy)
        + m * y * (m + cov.sigma_xx)
        + m * cov.sigma_xy * (prior.mu1 - x)
    ) / denom
    q_star = (m * m * cov.sigma_yy + m * det) / denom
    return p_star, q_star


def est_bayes(
    s: SelectionSummary, prior: PriorSpec, a: LinexParams, cov: CovarianceSpec
) -> float:
    """Bayes estimator under LINEX loss: p* - (a/2) q* at the selected observation.

    Equals -(1/a) * ln M(-a) for the normal posterior of theta_y, i.e. the
    unique minimizer of the posterior risk.
    """
    p_star, q_star = bayes_posterior((s.x_max, s.y_sel), prior, cov)
    return p_star - 0.5 * a.a * q_star


def posterior_risk_constant(prior: PriorSpec, a: LinexParams, cov: CovarianceSpec) -> float:
    """Posterior (= Bayes) risk of est_bayes; independent of the data."""
    if cov.det <= 0:
        raise SingularCovarianceError("posterior risk needs a nonsingular covariance")
    m = prior.m
    det = cov.det
    num = m * m * cov.sigma_yy + det * m
    denom = det + m * m + m * cov.sigma_yy + m * cov.sigma_xx
    return 0.5 * a.a * a.a * num / denom


def est_shift(s: SelectionSummary, d: float) -> float:
    """Constant-shift estimator Y_[2] + d."""
    if not math.isfinite(d):
        raise InvalidParameterError("shift constant d must be finite")
    return s.y_sel + d


def evaluate(
    spec: EstimatorSpec, s: SelectionSummary, a: LinexParams, cov: CovarianceSpec
) -> float:
    """Dispatch on the spec tag."""
    if spec.kind == "N1":
        return est_n1(s)
    if spec.kind == "N2":
        return est_n2(s, a, cov)
    if spec.kind == "N3":
        return est_n3(s, a, cov)
    if spec.kind == "N4":
        return est_n4(s, spec.c, cov)
    if spec.kind == "Bayes":
        return est_bayes(s, spec.prior, a, cov)
    if spec.kind == "Shift":
        return est_shift(s, spec.d)
    if spec.kind == "Improved":
        from . import improvement

        return improvement.improve(spec, s, a, cov).value
    raise InvalidParameterError(f"unknown estimator kind {spec.kind!r}")
