"""Admissibility of constant-shift estimators Y_[2] + d.

Within the shift class, the risk at a parameter gap theta_x is minimized by
a closed-form shift psi(theta*); sweeping theta_x over [0, inf) sweeps psi
over an interval [d0, d1], and exactly the shifts inside that interval are
admissible within the class. Shifts outside are dominated by the nearer
endpoint.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .core import CovarianceSpec, InvalidParameterError, LinexParams, ThetaStar, std_normal_cdf

ADMISSIBLE_IN_CLASS = "admissible_in_class"
DOMINATED_BY_D0 = "dominated_by_d0"
DOMINATED_BY_D1 = "dominated_by_d1"


@dataclass(frozen=True)
class AdmissibilityBounds:
    """Endpoints of the admissible shift interval, with their inputs."""

    d0: float
    d1: float
    a: float
    cov: CovarianceSpec


def h_a(theta_x: float, a: LinexParams, cov: CovarianceSpec) -> float:
    """Phi((a*sxy + tx)/sqrt(2*sxx)) + Phi((a*sxy - tx)/sqrt(2*sxx)); in (0, 2)."""
    if theta_x < 0:
        raise InvalidParameterError("theta_x must be nonnegative")
    s = math.sqrt(2.0 * cov.sigma_xx)
    return std_normal_cdf((a.a * cov.sigma_xy + theta_x) / s) + std_normal_cdf(
        (a.a * cov.sigma_xy - theta_x) / s
    )


def psi(theta_star: ThetaStar, a: LinexParams, cov: CovarianceSpec) -> float:
    """The risk-minimizing shift at a fixed gap: -a*syy/2 - ln(h_a)/a.

    Depends on theta* only through theta_x.
    """
    return -a.a * cov.sigma_yy / 2.0 - math.log(h_a(theta_star.theta_x, a, cov)) / a.a


def _end_correction(a: LinexParams, cov: CovarianceSpec) -> float:
    # -a*syy/2 - [ln 2 + ln Phi(a*sxy/sqrt(2*sxx))]/a, the theta_x -> 0 limit
    arg = a.a * cov.sigma_xy / math.sqrt(2.0 * cov.sigma_xx)
    return -a.a * cov.sigma_yy / 2.0 - (math.log(2.0) + math.log(std_normal_cdf(arg))) / a.a


def bounds(a: LinexParams, cov: CovarianceSpec) -> AdmissibilityBounds:
    """Closed-form [d0, d1], branching on the sign of sigma_xy.

    The interval collapses to the single point -a*sigma_yy/2 when sigma_xy = 0.
    """
    base = -a.a * cov.sigma_yy / 2.0
    if cov.sigma_xy > 0:
        d0 = _end_correction(a, cov)
        d1 = base
    elif cov.sigma_xy < 0:
        d0 = base
        d1 = _end_correction(a, cov)
    else:
        d0 = d1 = base
    return AdmissibilityBounds(d0=d0, d1=d1, a=a.a, cov=cov)


def classify(d: float, a: LinexParams, cov: CovarianceSpec) -> str:
    """Place a shift relative to [d0, d1]; endpoints count as admissible."""
    if not math.isfinite(d):
        raise InvalidParameterError("shift constant d must be finite")
    b = bounds(a, cov)
    if d < b.d0:
        return DOMINATED_BY_D0
    if d > b.d1:
        return DOMINATED_BY_D1
    return ADMISSIBLE_IN_CLASS
