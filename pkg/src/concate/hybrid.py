"""Hybrid band: concentration-padded supports, delta-method means and shares.

The headline construction splits alpha_u over four events: two DKW support
events (dependence-adjusted padding at budget alpha_u / 4 each) and the
two band endpoints (normal critical value at 1 - alpha_u / 4).  Support
estimation error is handled nonasymptotically, mean and share error
asymptotically, which keeps the band usable at moderate sample sizes
without the full width of the six-event construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .concentration import Paddings, Truncation, dkw_epsilon
from .errors import DataError, DegenerateArmError, ValidationError
from .estimators import GroupStats, split_arms
from .manski import (
    IdentificationRegion,
    SupportBounds,
    bound_gradients,
    delta_method_band,
    known_support,
    manski_region,
    sampling_covariance,
)
from .stats import norm_ppf

MC_DESIGNS = ("A", "B", "C", "D", "E", "F", "G")


@dataclass(frozen=True)
class HybridBand:
    """Result of the hybrid construction at one threshold."""

    lower: float
    upper: float
    alpha_u: float
    region: IdentificationRegion
    support: SupportBounds
    paddings: Paddings
    se_lower: float
    se_upper: float
    multiplier: float
    truncation: Truncation
    reduced_to_delta_method: bool = False

    @property
    def width(self) -> float:
        return self.upper - self.lower

    def contains(self, value: float) -> bool:
        return self.lower <= value <= self.upper


@dataclass(frozen=True)
class ReplicationBands:
    """Per-replication interval pair of the coverage experiment."""

    manski_lower: float
    manski_upper: float
    hybrid_lower: float
    hybrid_upper: float
    support_lower: float
    support_upper: float
    epsilon: float
    se_lower: float
    se_upper: float


def _check_truncation_consistency(stats: GroupStats, trunc: Truncation) -> None:
    observed_min = min(stats.min_treated, stats.min_control)
    observed_max = max(stats.max_treated, stats.max_control)
    if trunc.kind in ("lower", "both") and trunc.lower > observed_min:
        raise DataError(
            f"known lower limit {trunc.lower} exceeds the observed minimum {observed_min}"
        )
    if trunc.kind == "both" and trunc.upper < observed_max:
        raise DataError(
            f"known upper limit {trunc.upper} is below the observed maximum {observed_max}"
        )


def hybrid_band(
    stats: GroupStats,
    alpha_u: float,
    c_alpha: float = 0.0,
    truncation: Truncation | None = None,
) -> HybridBand:
    """Hybrid finite-sample/asymptotic band at uniform level alpha_u.

    Support padding: eps_k = (1 + 4 c_alpha) * sqrt(2 log(8 / alpha_u) /
    n_k), halved to an 8 -> 4 budget when the lower limit is known (then
    the lower supports are the known limit, unpadded).  The padded
    endpoints enter the delta-method gradients as constants and each band
    endpoint uses the normal quantile at 1 - alpha_u / 4.  With both
    limits known nothing needs padding and the construction reduces to
    the delta-method band on the known support.
    """
    if not 0.0 < alpha_u < 1.0:
        raise ValidationError(f"alpha_u must lie in (0, 1), got {alpha_u}")
    if c_alpha < 0.0:
        raise ValidationError(f"c_alpha must be nonnegative, got {c_alpha}")
    trunc = truncation if truncation is not None else Truncation.none()
    if stats.degenerate:
        raise DegenerateArmError("hybrid band needs both arms non-empty")
    if min(stats.n_treated, stats.n_control) < 2:
        raise DegenerateArmError("hybrid band needs at least 2 observations per arm")
    _check_truncation_consistency(stats, trunc)
    if trunc.kind == "both":
        support = known_support(trunc.lower, trunc.upper)
        band = delta_method_band(stats, support, alpha_u)
        return HybridBand(
            lower=band.band_lower,
            upper=band.band_upper,
            alpha_u=alpha_u,
            region=band.region,
            support=support,
            paddings=Paddings.zero(),
            se_lower=band.se_lower,
            se_upper=band.se_upper,
            multiplier=band.multiplier,
            truncation=trunc,
            reduced_to_delta_method=True,
        )
    sides = "one" if trunc.kind == "lower" else "two"
    eps1 = dkw_epsilon(alpha_u, stats.n_treated, sides=sides, budget=8.0, c_alpha=c_alpha)
    eps0 = dkw_epsilon(alpha_u, stats.n_control, sides=sides, budget=8.0, c_alpha=c_alpha)
    if trunc.kind == "lower":
        lower_treated, lower_control = trunc.lower, trunc.lower
    else:
        lower_treated = stats.min_treated - eps1
        lower_control = stats.min_control - eps0
    support = SupportBounds(
        lower_treated=lower_treated,
        upper_treated=stats.max_treated + eps1,
        lower_control=lower_control,
        upper_control=stats.max_control + eps0,
        source="padded" if trunc.kind == "none" else "padded-lower-known",
    )
    region = manski_region(stats, support)
    cov = sampling_covariance(stats)
    grad_lower, grad_upper = bound_gradients(stats, support)
    se_lower = math.sqrt(float(grad_lower @ cov @ grad_lower))
    se_upper = math.sqrt(float(grad_upper @ cov @ grad_upper))
    z = norm_ppf(1.0 - alpha_u / 4.0)
    return HybridBand(
        lower=region.lower - z * se_lower,
        upper=region.upper + z * se_upper,
        alpha_u=alpha_u,
        region=region,
        support=support,
        paddings=Paddings(
            eps_treated=eps1,
            eps_control=eps0,
            t_share_treated=0.0,
            t_share_control=0.0,
            t_mean_treated=0.0,
            t_mean_control=0.0,
        ),
        se_lower=se_lower,
        se_upper=se_upper,
        multiplier=z,
        truncation=trunc,
    )


def replication_bands(
    y0: np.ndarray,
    y: np.ndarray,
    d: np.ndarray,
    alpha: float,
    design: str,
) -> ReplicationBands:
    """One replication of the coverage experiment: plug-in and hybrid intervals.

    Supports are design-specific and shared by both arms: design G uses
    the known support (-5, 5), design F a known lower limit 0 with the
    empirical maximum of the baseline outcomes, and all other designs the
    empirical extrema of the baseline outcomes (the baseline, not the
    observed outcome, so a positive effect can fall outside the plug-in
    interval by construction).

    For design G the hybrid interval is the plug-in interval, bit for
    bit.  Otherwise the hybrid widens it by a pooled support padding
    eps = sqrt(log(C) / (2 N)), with C = 2 / alpha two-sided and C = 1 /
    alpha for the one-sided design F, plus a symmetric delta-method term
    at the normal quantile of 1 - alpha / 4 applied to the combined
    endpoint scale sqrt(se_lower^2 + se_upper^2).
    """
    if design not in MC_DESIGNS:
        raise ValidationError(f"design must be one of {MC_DESIGNS}, got {design!r}")
    if not 0.0 < alpha < 1.0:
        raise ValidationError(f"alpha must lie in (0, 1), got {alpha}")
    y0 = np.asarray(y0, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    d = np.asarray(d, dtype=bool).ravel()
    stats = split_arms(y, d)
    if stats.degenerate:
        raise DegenerateArmError("replication has an empty arm")
    if design == "G":
        a, b = -5.0, 5.0
    elif design == "F":
        a, b = 0.0, float(y0.max())
    else:
        a, b = float(y0.min()), float(y0.max())
    support = known_support(a, b)
    region = manski_region(stats, support)
    if design == "G":
        return ReplicationBands(
            manski_lower=region.lower,
            manski_upper=region.upper,
            hybrid_lower=region.lower,
            hybrid_upper=region.upper,
            support_lower=a,
            support_upper=b,
            epsilon=0.0,
            se_lower=0.0,
            se_upper=0.0,
        )
    if min(stats.n_treated, stats.n_control) < 2:
        raise DegenerateArmError("replication needs 2+ observations per arm")
    log_c = math.log(1.0 / alpha) if design == "F" else math.log(2.0 / alpha)
    epsilon = math.sqrt(log_c / (2.0 * y.size))
    cov = sampling_covariance(stats)
    grad_lower, grad_upper = bound_gradients(stats, support)
    se_lower = math.sqrt(float(grad_lower @ cov @ grad_lower))
    se_upper = math.sqrt(float(grad_upper @ cov @ grad_upper))
    se_scale = math.hypot(se_lower, se_upper)
    z = norm_ppf(1.0 - alpha / 4.0)
    return ReplicationBands(
        manski_lower=region.lower,
        manski_upper=region.upper,
        hybrid_lower=region.lower - epsilon - z * se_scale,
        hybrid_upper=region.upper + epsilon + z * se_scale,
        support_lower=a,
        support_upper=b,
        epsilon=epsilon,
        se_lower=se_lower,
        se_upper=se_upper,
    )
