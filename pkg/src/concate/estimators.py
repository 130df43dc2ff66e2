"""Arm-level statistics and the naive difference-in-means estimator."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateArmError, ValidationError
from .panel import PanelDataset, TreatmentAssignment
from .stats import norm_ppf

VARIANCE_MODES = ("welch", "contrast")


@dataclass(frozen=True)
class GroupStats:
    """Sufficient statistics for both treatment arms of one threshold split.

    ``treated_sorted`` / ``control_sorted`` hold the arm outcomes in
    ascending order (order statistics for quantile supports).  The
    ``*_serial`` twins keep the original panel order, which matters only
    for serial-dependence-aware variance estimates.  Variances use the
    n-1 denominator and are NaN below two observations; extrema are NaN
    for an empty arm.
    """

    n_treated: int
    n_control: int
    mean_treated: float
    mean_control: float
    var_treated: float
    var_control: float
    share_treated: float
    share_control: float
    min_treated: float
    max_treated: float
    min_control: float
    max_control: float
    treated_sorted: np.ndarray
    control_sorted: np.ndarray
    treated_serial: np.ndarray
    control_serial: np.ndarray

    @property
    def n(self) -> int:
        return self.n_treated + self.n_control

    @property
    def degenerate(self) -> bool:
        """True when either arm is empty, i.e. the treated share is 0 or 1."""
        return self.n_treated == 0 or self.n_control == 0


@dataclass(frozen=True)
class NaiveEstimate:
    """Point-identified difference in means with a Wald interval."""

    delta: float
    se: float
    ci_lower: float
    ci_upper: float
    alpha_u: float
    variance_mode: str
    multiplier: float


def _arm(values: np.ndarray) -> tuple[float, float, float, float]:
    if values.size == 0:
        return math.nan, math.nan, math.nan, math.nan
    mean = float(values.mean())
    var = float(values.var(ddof=1)) if values.size >= 2 else math.nan
    return mean, var, float(values.min()), float(values.max())


def split_arms(outcome: np.ndarray, treated: np.ndarray) -> GroupStats:
    """Build :class:`GroupStats` from raw outcome and treatment arrays."""
    y = np.asarray(outcome, dtype=float)
    z = np.asarray(treated, dtype=bool)
    if y.shape != z.shape:
        raise ValidationError("outcome and treatment arrays have different shapes")
    if y.size == 0:
        raise ValidationError("cannot split an empty sample")
    y1 = y[z]
    y0 = y[~z]
    n1, n0 = y1.size, y0.size
    n = n1 + n0
    mean1, var1, min1, max1 = _arm(y1)
    mean0, var0, min0, max0 = _arm(y0)
    return GroupStats(
        n_treated=n1,
        n_control=n0,
        mean_treated=mean1,
        mean_control=mean0,
        var_treated=var1,
        var_control=var0,
        share_treated=n1 / n,
        share_control=n0 / n,
        min_treated=min1,
        max_treated=max1,
        min_control=min0,
        max_control=max0,
        treated_sorted=np.sort(y1),
        control_sorted=np.sort(y0),
        treated_serial=y1,
        control_serial=y0,
    )


def group_stats(panel: PanelDataset, assignment: TreatmentAssignment) -> GroupStats:
    """Arm statistics for a panel under a threshold assignment."""
    return split_arms(panel.outcome, assignment.treated)


def empirical_quantile(values_sorted: np.ndarray, p: float) -> float:
    """Order-statistic quantile: the ceil(p * n)-th smallest value (1-indexed).

    ``values_sorted`` must already be in ascending order.
    """
    if not 0.0 < p < 1.0:
        raise ValidationError(f"quantile level must lie in (0, 1), got {p}")
    x = np.asarray(values_sorted, dtype=float)
    if x.size == 0:
        raise DegenerateArmError("cannot take a quantile of an empty arm")
    if x.size > 1 and np.any(np.diff(x) < 0.0):
        raise ValidationError("values must be sorted ascending")
    k = p * x.size
    nearest = round(k)
    # guard against float fuzz when p * n is an exact integer mathematically
    idx = nearest if abs(k - nearest) <= 1e-9 else math.ceil(k)
    idx = min(max(idx, 1), x.size)
    return float(x[idx - 1])


def naive_estimate(
    stats: GroupStats,
    alpha_u: float,
    variance_mode: str = "welch",
) -> NaiveEstimate:
    """Difference in means with a two-sided Wald interval at level alpha_u.

    variance_mode 'welch' uses var1/n1 + var0/n0.  Mode 'contrast' uses the
    sample variance (n - 1 denominator) of the per-observation weighted
    contributions y_i * w_i, where w_i is +1/n1 for treated and -1/n0 for
    control rows, so that the contributions sum to the estimate itself.
    """
    if not 0.0 < alpha_u < 1.0:
        raise ValidationError(f"alpha_u must lie in (0, 1), got {alpha_u}")
    if variance_mode not in VARIANCE_MODES:
        raise ValidationError(
            f"variance_mode must be one of {VARIANCE_MODES}, got {variance_mode!r}"
        )
    if stats.degenerate:
        raise DegenerateArmError("naive estimate needs both arms non-empty")
    if stats.n_treated < 2 or stats.n_control < 2:
        raise DegenerateArmError("variance needs at least 2 observations per arm")
    delta = stats.mean_treated - stats.mean_control
    if variance_mode == "welch":
        se = math.sqrt(
            stats.var_treated / stats.n_treated + stats.var_control / stats.n_control
        )
    else:
        contributions = np.concatenate(
            [
                stats.treated_serial / stats.n_treated,
                -stats.control_serial / stats.n_control,
            ]
        )
        se = math.sqrt(float(np.sum((contributions - delta) ** 2)) / (stats.n - 1))
    z = norm_ppf(1.0 - alpha_u / 2.0)
    return NaiveEstimate(
        delta=delta,
        se=se,
        ci_lower=delta - z * se,
        ci_upper=delta + z * se,
        alpha_u=alpha_u,
        variance_mode=variance_mode,
        multiplier=z,
    )
