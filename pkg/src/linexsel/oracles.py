"""Closed-form densities, conditional MGFs, and the clip-band machinery.

These are the analytic counterparts of the simulator: the density of
W = Y_[2] - theta_y^S, the conditional law of W given the observable
differences (T1, T2), the optimal local shift varphi it induces, and the
parameter-free band [phi_inf, phi_sup] that the improvement operator clips
into. Shift-estimator risk by quadrature lives here too, as the analytic
cross-check for the Monte Carlo engine.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy.integrate import quad

from .core import (
    CovarianceSpec,
    InvalidParameterError,
    LinexParams,
    ThetaStar,
    linex_loss,
    log_sum_exp,
    std_normal_cdf,
    std_normal_pdf,
)

_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)

QUAD_ABS_TOL = 1e-12
QUAD_HALF_WIDTH = 12.0  # integration half-width in component standard deviations


def _log_std_normal_pdf(u: float) -> float:
    return -0.5 * u * u - _LOG_SQRT_2PI


def _check_t1(t1: float) -> None:
    if t1 > 0:
        raise InvalidParameterError(f"t1 must be <= 0, got {t1}")


def _check_nonsingular(cov: CovarianceSpec, what: str) -> None:
    if cov.is_singular:
        raise InvalidParameterError(f"{what} requires |rho| < 1")


def w_pdf(w: float, theta_star: ThetaStar, cov: CovarianceSpec) -> float:
    """Density of W = Y_[2] - theta_y^S at w.

    (1/sqrt(syy)) * phi(w/sqrt(syy)) * {Phi((rho*w/sqrt(syy) + tx/sqrt(sxx)) / sqrt(2-rho^2))
    + Phi((.. - tx/sqrt(sxx)) / sqrt(2-rho^2))}. The sqrt(2-rho^2) denominator stays
    finite at |rho| = 1, so the formula extends to the degenerate case as written.
    """
    s = math.sqrt(cov.sigma_yy)
    r = math.sqrt(2.0 - cov.rho * cov.rho)
    u = cov.rho * w / s
    v = theta_star.theta_x / math.sqrt(cov.sigma_xx)
    bracket = std_normal_cdf((u + v) / r) + std_normal_cdf((u - v) / r)
    return std_normal_pdf(w / s) / s * bracket


@dataclass(frozen=True)
class ConditionalWeights:
    """The two branch weights in the conditional law of T3 given (T1, T2)."""

    d1_term: float
    d2_term: float


def _log_weights(
    t1: float, t2: float, theta_star: ThetaStar, cov: CovarianceSpec
) -> tuple[float, float]:
    _check_t1(t1)
    _check_nonsingular(cov, "conditional weights")
    rho = cov.rho
    sy = math.sqrt(cov.sigma_yy)
    sx = math.sqrt(cov.sigma_xx)
    denom = math.sqrt(2.0 * (1.0 - rho * rho))
    ty, tx = theta_star.theta_y, theta_star.theta_x
    log_d1 = _log_std_normal_pdf((t2 - ty) / (math.sqrt(2.0) * sy)) + _log_std_normal_pdf(
        (rho * (t2 - ty) / sy - (t1 - tx) / sx) / denom
    )
    log_d2 = _log_std_normal_pdf((t2 + ty) / (math.sqrt(2.0) * sy)) + _log_std_normal_pdf(
        (rho * (t2 + ty) / sy - (t1 + tx) / sx) / denom
    )
    return log_d1, log_d2


def conditional_weights(
    t1: float, t2: float, theta_star: ThetaStar, cov: CovarianceSpec
) -> ConditionalWeights:
    """D1, D2 >= 0; equal when theta* = (0, 0).

    Both terms use the same inner scaling (t1 -+ theta_x)/sqrt(sigma_xx); the
    mixture consumers below work in the log domain so extreme inputs cannot
    zero both terms at once.
    """
    log_d1, log_d2 = _log_weights(t1, t2, theta_star, cov)
    return ConditionalWeights(math.exp(log_d1), math.exp(log_d2))


def _mix_log_weights(log_d1: float, log_d2: float) -> tuple[float, float]:
    norm = log_sum_exp((log_d1, log_d2))
    return log_d1 - norm, log_d2 - norm


def cond_t3_pdf(
    t3: float, t1: float, t2: float, theta_star: ThetaStar, cov: CovarianceSpec
) -> float:
    """Conditional density of T3 = Y_[2] - theta_y^S given (T1, T2).

    A two-component normal mixture with component variance sigma_yy/2,
    component means -(t2 - theta_y)/2 and -(t2 + theta_y)/2, and weights
    D1, D2 normalized.
    """
    log_d1, log_d2 = _log_weights(t1, t2, theta_star, cov)
    lw1, lw2 = _mix_log_weights(log_d1, log_d2)
    scale = math.sqrt(2.0 / cov.sigma_yy)
    k1 = scale * std_normal_pdf(scale * (t3 + (t2 - theta_star.theta_y) / 2.0))
    k2 = scale * std_normal_pdf(scale * (t3 + (t2 + theta_star.theta_y) / 2.0))
    return math.exp(lw1) * k1 + math.exp(lw2) * k2


def log_delta(t1: float, t2: float, theta_star: ThetaStar, a: LinexParams, cov: CovarianceSpec) -> float:
    """log of the weight factor Delta = (D1 e^{a ty/2} + D2 e^{-a ty/2}) / (D1 + D2)."""
    log_d1, log_d2 = _log_weights(t1, t2, theta_star, cov)
    lw1, lw2 = _mix_log_weights(log_d1, log_d2)
    half = a.a * theta_star.theta_y / 2.0
    return log_sum_exp((lw1 + half, lw2 - half))


def cond_t3_mgf(
    a: LinexParams, t1: float, t2: float, theta_star: ThetaStar, cov: CovarianceSpec
) -> float:
    """E[exp(a*T3) | T1 = t1, T2 = t2] = exp(a^2 syy/4 - a t2/2) * Delta."""
    return math.exp(
        a.a * a.a * cov.sigma_yy / 4.0 - a.a * t2 / 2.0 + log_delta(t1, t2, theta_star, a, cov)
    )


def varphi(
    t1: float, t2: float, theta_star: ThetaStar, a: LinexParams, cov: CovarianceSpec
) -> float:
    """Optimal local shift -(1/a) ln E[e^{aT3} | t1, t2] = t2/2 - a*syy/4 - ln(Delta)/a."""
    return (
        t2 / 2.0
        - a.a * cov.sigma_yy / 4.0
        - log_delta(t1, t2, theta_star, a, cov) / a.a
    )


def phi_bounds(
    t1: float, t2: float, a: LinexParams, cov: CovarianceSpec
) -> tuple[float, float]:
    """Parameter-free sandwich (phi_inf, phi_sup) around varphi.

    Each bound equals t2/2 - a*sigma_yy/4 on its own condition set and is
    infinite otherwise; the two condition sets are disjoint, so at most one
    bound is finite for any (t1, t2).
    """
    _check_t1(t1)
    rho, xi = cov.rho, cov.xi
    value = t2 / 2.0 - a.a * cov.sigma_yy / 4.0
    margin = -a.a * cov.sigma_yy * (1.0 - rho * rho) / 2.0
    lo = value if (t1 * xi - rho * t2 < 0 and t2 - xi * rho * t1 < margin) else -math.inf
    hi = value if (t1 * xi - rho * t2 > 0 and t2 - xi * rho * t1 > margin) else math.inf
    return lo, hi


def shift_risk_quadrature(
    d: float, theta_star: ThetaStar, a: LinexParams, cov: CovarianceSpec
) -> float:
    """Risk of the shift estimator Y_[2] + d by quadrature against w_pdf.

    Integrates linex_loss(w + d, 0) * f_W(w) over a window wide enough to
    cover both the density mass and the exp(a*w) tilt (whose product peaks
    near w = a*sigma_yy).
    """
    s = math.sqrt(cov.sigma_yy)
    lo = min(-QUAD_HALF_WIDTH * s, a.a * cov.sigma_yy - QUAD_HALF_WIDTH * s)
    hi = max(QUAD_HALF_WIDTH * s, a.a * cov.sigma_yy + QUAD_HALF_WIDTH * s)

    def integrand(w: float) -> float:
        return linex_loss(w + d, 0.0, a) * w_pdf(w, theta_star, cov)

    value, _ = quad(integrand, lo, hi, epsabs=QUAD_ABS_TOL, epsrel=1e-10, limit=200)
    return value
