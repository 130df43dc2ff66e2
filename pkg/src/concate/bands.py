"""Uniform front end over the band constructions.

Every method takes the same arm statistics and a per-look level alpha_u
and produces a :class:`BandResult`, so the threshold scan and the CLI can
treat all seven methods interchangeably.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .concentration import (
    BernsteinConstants,
    ConcentrationBand,
    PaddingConfig,
    Paddings,
    Truncation,
    iid_band,
    mixing_band,
)
from .errors import ValidationError
from .estimators import GroupStats, naive_estimate
from .hybrid import hybrid_band
from .manski import (
    SupportBounds,
    delta_method_band,
    extrema_support,
    manski_region,
    trimmed_support,
)

METHODS = ("naive", "manski-max", "manski-q05", "manski-q10", "iid", "mixing", "hybrid")

#: Methods that understand prior knowledge of the outcome support.
TRUNCATION_METHODS = ("iid", "mixing", "hybrid")


@dataclass(frozen=True)
class BandOptions:
    """Method-independent knobs, resolved once per run."""

    c_alpha: float = 0.0
    c_abs: float = 1.0
    mean_bound_treated: float | None = None
    mean_bound_control: float | None = None
    bernstein: BernsteinConstants = field(default_factory=BernsteinConstants)
    truncation: Truncation = field(default_factory=Truncation)
    variance_mode: str = "welch"


@dataclass(frozen=True)
class BandResult:
    """One method evaluated at one threshold.

    ``region_lower`` / ``region_upper`` is the plug-in identified interval
    built from the method's own unpadded supports (a point for the naive
    method); ``band_lower`` / ``band_upper`` is the confidence band.
    """

    method: str
    alpha_u: float
    n_treated: int
    n_control: int
    region_lower: float
    region_upper: float
    band_lower: float
    band_upper: float
    se_lower: float | None = None
    se_upper: float | None = None
    support: SupportBounds | None = None
    paddings: Paddings | None = None

    @property
    def excludes_zero(self) -> bool:
        return self.band_lower > 0.0 or self.band_upper < 0.0


def base_support(stats: GroupStats, truncation: Truncation) -> SupportBounds:
    """Unpadded supports consistent with the declared truncation."""
    if truncation.kind == "both":
        return SupportBounds(
            lower_treated=truncation.lower,
            upper_treated=truncation.upper,
            lower_control=truncation.lower,
            upper_control=truncation.upper,
            source="known",
        )
    if truncation.kind == "lower":
        return SupportBounds(
            lower_treated=truncation.lower,
            upper_treated=stats.max_treated,
            lower_control=truncation.lower,
            upper_control=stats.max_control,
            source="lower-known",
        )
    return extrema_support(stats)


def _concentration_result(
    stats: GroupStats, method: str, alpha_u: float, band: ConcentrationBand
) -> BandResult:
    region = manski_region(stats, base_support(stats, band.truncation))
    return BandResult(
        method=method,
        alpha_u=alpha_u,
        n_treated=stats.n_treated,
        n_control=stats.n_control,
        region_lower=region.lower,
        region_upper=region.upper,
        band_lower=band.lower,
        band_upper=band.upper,
        support=band.support,
        paddings=band.paddings,
    )


def compute_band(
    stats: GroupStats,
    method: str,
    alpha_u: float,
    options: BandOptions | None = None,
) -> BandResult:
    """Evaluate one band method at per-look level alpha_u."""
    options = options or BandOptions()
    if method not in METHODS:
        raise ValidationError(f"method must be one of {METHODS}, got {method!r}")
    if options.truncation.kind != "none" and method not in TRUNCATION_METHODS:
        raise ValidationError(
            f"truncation is only supported by {TRUNCATION_METHODS}, not {method!r}"
        )

    if method == "naive":
        est = naive_estimate(stats, alpha_u, variance_mode=options.variance_mode)
        return BandResult(
            method=method,
            alpha_u=alpha_u,
            n_treated=stats.n_treated,
            n_control=stats.n_control,
            region_lower=est.delta,
            region_upper=est.delta,
            band_lower=est.ci_lower,
            band_upper=est.ci_upper,
            se_lower=est.se,
            se_upper=est.se,
        )

    if method in ("manski-max", "manski-q05", "manski-q10"):
        if method == "manski-max":
            support = extrema_support(stats)
        else:
            support = trimmed_support(stats, 0.05 if method == "manski-q05" else 0.10)
        band = delta_method_band(stats, support, alpha_u)
        return BandResult(
            method=method,
            alpha_u=alpha_u,
            n_treated=stats.n_treated,
            n_control=stats.n_control,
            region_lower=band.region.lower,
            region_upper=band.region.upper,
            band_lower=band.band_lower,
            band_upper=band.band_upper,
            se_lower=band.se_lower,
            se_upper=band.se_upper,
            support=support,
        )

    if method in ("iid", "mixing"):
        config = PaddingConfig(
            alpha_u=alpha_u,
            c_alpha=options.c_alpha,
            mean_bound_treated=options.mean_bound_treated,
            mean_bound_control=options.mean_bound_control,
            c_abs=options.c_abs,
            bernstein=options.bernstein,
            truncation=options.truncation,
        )
        builder = iid_band if method == "iid" else mixing_band
        return _concentration_result(stats, method, alpha_u, builder(stats, config))

    band = hybrid_band(
        stats, alpha_u, c_alpha=options.c_alpha, truncation=options.truncation
    )
    region = manski_region(stats, base_support(stats, band.truncation))
    return BandResult(
        method=method,
        alpha_u=alpha_u,
        n_treated=stats.n_treated,
        n_control=stats.n_control,
        region_lower=region.lower,
        region_upper=region.upper,
        band_lower=band.lower,
        band_upper=band.upper,
        se_lower=band.se_lower,
        se_upper=band.se_upper,
        support=band.support,
        paddings=band.paddings,
    )
