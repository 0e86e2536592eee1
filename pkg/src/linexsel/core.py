"""Numeric kernels and shared domain types.

Everything downstream builds on the pieces here: the known 2x2 covariance
and its derived quantities, the LINEX loss, an erfc-backed standard normal
cdf (the admissibility bounds and the hybrid log-estimator take logs of
Phi, so the cdf needs to be accurate in the tails), stable log/exp helpers,
and counter-based random streams for reproducible simulation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

_SQRT_2PI = math.sqrt(2.0 * math.pi)
_SQRT2 = math.sqrt(2.0)

# exp() overflows just above 709.78; keep a little headroom
EXP_OVERFLOW_LIMIT = 700.0


class LinexError(Exception):
    """Base error for this package."""


class InvalidParameterError(LinexError, ValueError):
    """Inputs violate a documented contract (domain, shape, finiteness)."""


class SingularCovarianceError(InvalidParameterError):
    """An operation that needs |Sigma| > 0 was given a degenerate covariance."""


class LinexOverflowError(LinexError, OverflowError):
    """exp(a * (delta - theta)) left the double range.

    Carries the offending exponent so simulation drivers can report which
    estimator/parameter combination diverged instead of averaging infinities.
    """

    def __init__(self, exponent: float, context: str = ""):
        self.exponent = exponent
        msg = f"LINEX loss exponent {exponent:.6g} exceeds exp() range (saturated)"
        if context:
            msg += f" [{context}]"
        super().__init__(msg)


def _require_finite(name: str, *values: float) -> None:
    for v in values:
        if not math.isfinite(v):
            raise InvalidParameterError(f"{name} must be finite, got {v!r}")


@dataclass(frozen=True)
class CovarianceSpec:
    """The common known 2x2 variance-covariance matrix.

    rho and xi are always derived from (sigma_xx, sigma_yy, sigma_xy);
    degenerate correlation |rho| = 1 is accepted (the simulation tables use
    rho = +-1) but the Bayes path rejects it separately.
    """

    sigma_xx: float
    sigma_yy: float
    sigma_xy: float

    def __post_init__(self) -> None:
        _require_finite("covariance entries", self.sigma_xx, self.sigma_yy, self.sigma_xy)
        if self.sigma_xx <= 0 or self.sigma_yy <= 0:
            raise InvalidParameterError(
                f"variances must be positive, got sigma_xx={self.sigma_xx}, "
                f"sigma_yy={self.sigma_yy}"
            )
        bound = self.sigma_xx * self.sigma_yy
        # tiny relative slack so sigma_xy = sqrt(sigma_xx*sigma_yy) computed in
        # floats still validates as |rho| = 1
        if self.sigma_xy * self.sigma_xy > bound * (1.0 + 1e-12):
            raise InvalidParameterError(
                f"|sigma_xy| = {abs(self.sigma_xy)} exceeds sqrt(sigma_xx*sigma_yy) "
                f"= {math.sqrt(bound)}: correlation would leave [-1, 1]"
            )

    @classmethod
    def from_correlation(cls, sigma_xx: float, sigma_yy: float, rho: float) -> "CovarianceSpec":
        if not -1.0 <= rho <= 1.0:
            raise InvalidParameterError(f"rho must lie in [-1, 1], got {rho}")
        return cls(sigma_xx, sigma_yy, rho * math.sqrt(sigma_xx * sigma_yy))

    @property
    def rho(self) -> float:
        r = self.sigma_xy / math.sqrt(self.sigma_xx * self.sigma_yy)
        return max(-1.0, min(1.0, r))

    @property
    def xi(self) -> float:
        return math.sqrt(self.sigma_yy / self.sigma_xx)

    @property
    def det(self) -> float:
        """|Sigma|; clamped at 0 for |rho| = 1 computed in floats."""
        return max(self.sigma_xx * self.sigma_yy - self.sigma_xy * self.sigma_xy, 0.0)

    @property
    def is_singular(self) -> bool:
        return abs(self.rho) == 1.0

    def cholesky_factors(self) -> tuple[float, float, float]:
        """Lower-triangular factor (l_xx, l_yx, l_yy) of Sigma.

        At |rho| = 1 the factor is built as (sqrt(sxx), sign(sxy)*sqrt(syy), 0)
        so that Y is an exact affine function of X; the algebraically equal
        sigma_xy/sqrt(sigma_xx) can be off by an ulp, which matters because
        the improvement operator compares strict inequalities that sit exactly
        on a boundary for the published parameter grids.
        """
        l_xx = math.sqrt(self.sigma_xx)
        if self.is_singular:
            return l_xx, math.copysign(math.sqrt(self.sigma_yy), self.sigma_xy), 0.0
        l_yx = self.sigma_xy / l_xx
        l_yy = math.sqrt(max(self.sigma_yy - l_yx * l_yx, 0.0))
        return l_xx, l_yx, l_yy


@dataclass(frozen=True)
class MeanVectorPair:
    """Mean vectors (theta_x, theta_y) of the two populations."""

    theta1: tuple[float, float]
    theta2: tuple[float, float]

    def __post_init__(self) -> None:
        _require_finite("mean components", *self.theta1, *self.theta2)

    @property
    def theta_star(self) -> "ThetaStar":
        return ThetaStar(
            abs(self.theta1[0] - self.theta2[0]),
            abs(self.theta1[1] - self.theta2[1]),
        )

    def shifted(self, c1: float, c2: float) -> "MeanVectorPair":
        return MeanVectorPair(
            (self.theta1[0] + c1, self.theta1[1] + c2),
            (self.theta2[0] + c1, self.theta2[1] + c2),
        )


@dataclass(frozen=True)
class ThetaStar:
    """Nonnegative component gaps (theta_x, theta_y) between the two means."""

    theta_x: float
    theta_y: float

    def __post_init__(self) -> None:
        _require_finite("theta gaps", self.theta_x, self.theta_y)
        if self.theta_x < 0 or self.theta_y < 0:
            raise InvalidParameterError(
                f"theta gaps must be nonnegative, got ({self.theta_x}, {self.theta_y})"
            )


@dataclass(frozen=True)
class LinexParams:
    """Shape/location parameter of the asymmetric loss; a = 0 is excluded."""

    a: float

    def __post_init__(self) -> None:
        _require_finite("a", self.a)
        if self.a == 0:
            raise InvalidParameterError("LINEX parameter a must be nonzero")


@dataclass(frozen=True)
class ObservationPair:
    """One observation (x, y) from each population."""

    z1: tuple[float, float]
    z2: tuple[float, float]

    def __post_init__(self) -> None:
        _require_finite("observations", *self.z1, *self.z2)


def std_normal_pdf(u: float) -> float:
    """phi(u) = exp(-u^2/2) / sqrt(2*pi)."""
    return math.exp(-0.5 * u * u) / _SQRT_2PI


def std_normal_cdf(u: float) -> float:
    """Phi(u) via the complementary error function (abs error ~1e-16)."""
    if u == math.inf:
        return 1.0
    if u == -math.inf:
        return 0.0
    return 0.5 * math.erfc(-u / _SQRT2)


def std_normal_logcdf(u: float) -> float:
    """log Phi(u), stable far into the left tail."""
    if u > -8.0:
        return math.log(std_normal_cdf(u))
    # asymptotic: Phi(u) ~ phi(u)/|u| * (1 - 1/u^2 + 3/u^4)
    u2 = u * u
    return -0.5 * u2 - 0.5 * math.log(2.0 * math.pi) - math.log(-u) + math.log1p(
        -1.0 / u2 + 3.0 / (u2 * u2)
    )


def log_sum_exp(values: Iterable[float]) -> float:
    """log(sum(exp(v))) without overflow; -inf entries are ignored."""
    vals = [v for v in values if v != -math.inf]
    if not vals:
        return -math.inf
    m = max(vals)
    if m == math.inf:
        return math.inf
    return m + math.log(sum(math.exp(v - m) for v in vals))


# re-exported so callers pick the stable forms up from one place
log1p = math.log1p
expm1 = math.expm1


def linex_loss(delta: float, theta: float, params: LinexParams) -> float:
    """LINEX loss exp(a*(delta-theta)) - a*(delta-theta) - 1.

    Nonnegative, zero only at delta == theta. Raises LinexOverflowError when
    the exponential would overflow rather than returning inf silently.
    """
    _require_finite("loss arguments", delta, theta)
    z = params.a * (delta - theta)
    if z > EXP_OVERFLOW_LIMIT:
        raise LinexOverflowError(z, f"delta={delta:.6g} theta={theta:.6g} a={params.a:.6g}")
    return math.expm1(z) - z


def rng_stream(master_seed: int, *key: int) -> np.random.Generator:
    """Counter-based stream from (master seed, stream key).

    Philox generators seeded through SeedSequence spawn keys: streams for
    distinct keys are independent and reproducible regardless of the order
    in which they are created or consumed.
    """
    if master_seed < 0:
        raise InvalidParameterError("master seed must be nonnegative")
    ss = np.random.SeedSequence(master_seed, spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(ss))


def sample_pair(
    means: MeanVectorPair, cov: CovarianceSpec, rng: np.random.Generator
) -> ObservationPair:
    """Draw Z1, Z2 independently, each N2(theta_i, Sigma).

    Uses the lower-triangular factor from CovarianceSpec.cholesky_factors();
    at |rho| = 1 the second noise column is exactly zero.
    """
    l_xx, l_yx, l_yy = cov.cholesky_factors()
    g = rng.standard_normal(4)
    x1 = means.theta1[0] + l_xx * g[0]
    y1 = means.theta1[1] + l_yx * g[0] + l_yy * g[1]
    x2 = means.theta2[0] + l_xx * g[2]
    y2 = means.theta2[1] + l_yx * g[2] + l_yy * g[3]
    return ObservationPair((x1, y1), (x2, y2))


def sample_batch(
    means: MeanVectorPair, cov: CovarianceSpec, rng: np.random.Generator, n: int
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized sample_pair: n independent (x1, y1, x2, y2) draws."""
    l_xx, l_yx, l_yy = cov.cholesky_factors()
    g = rng.standard_normal((4, n))
    x1 = means.theta1[0] + l_xx * g[0]
    y1 = means.theta1[1] + l_yx * g[0] + l_yy * g[1]
    x2 = means.theta2[0] + l_xx * g[2]
    y2 = means.theta2[1] + l_yx * g[2] + l_yy * g[3]
    return x1, y1, x2, y2
