"""Natural selection rule and the order-statistic/concomitant summary.

The rule picks the population with the larger observed X; ties go to
population 2 (the weak inequality branch of the rule). Every estimator
downstream consumes the summary produced here.
"""

from __future__ import annotations

from dataclasses import dataclass

from .core import MeanVectorPair, ObservationPair


@dataclass(frozen=True)
class SelectionSummary:
    """Order statistics of X, their Y concomitants, and the differences.

    t1 = X_(1) - X_(2) <= 0 and t2 = Y_[1] - Y_[2]; y_sel is the concomitant
    of the larger X (the selected population's Y).
    """

    selected: int
    x_max: float
    x_min: float
    y_sel: float
    y_other: float
    t1: float
    t2: float


@dataclass(frozen=True)
class SelectedParameter:
    """theta_y of the population the rule picked (known only in simulation)."""

    value: float


def select(obs: ObservationPair) -> SelectionSummary:
    """Apply the natural rule: population 1 iff x1 > x2, ties to population 2."""
    (x1, y1), (x2, y2) = obs.z1, obs.z2
    if x1 > x2:
        selected, x_max, x_min, y_sel, y_other = 1, x1, x2, y1, y2
    else:
        selected, x_max, x_min, y_sel, y_other = 2, x2, x1, y2, y1
    return SelectionSummary(
        selected=selected,
        x_max=x_max,
        x_min=x_min,
        y_sel=y_sel,
        y_other=y_other,
        t1=x_min - x_max,
        t2=y_other - y_sel,
    )


def realized_parameter(obs: ObservationPair, means: MeanVectorPair) -> SelectedParameter:
    """The random target theta_y^S realized by this observation pair."""
    if obs.z1[0] > obs.z2[0]:
        return SelectedParameter(means.theta1[1])
    return SelectedParameter(means.theta2[1])
