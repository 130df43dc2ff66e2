"""Finite-sample paddings and fully nonasymptotic ATE bands.

Every estimated ingredient of the identification region (per-arm supports,
arm shares, arm means) is padded by a concentration bound calibrated so
that each failure event gets an equal Bonferroni share of alpha_u: six
events for the full construction, with one-sided variants halving the log
budget.  Two dependence regimes are covered: independent sampling, and
alpha-mixing with mixing constant c_alpha, where the weak-dependence
Bernstein mean bound has three competing tail terms (budget alpha_u / 18
each) and the third must be inverted numerically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ConfigurationError, DataError, DegenerateArmError, ValidationError
from .estimators import GroupStats
from .manski import SupportBounds, delta_method_band, known_support
from .stats import long_run_variance

SIDES = ("one", "two")
TRUNCATION_KINDS = ("none", "lower", "both")


@dataclass(frozen=True)
class BernsteinConstants:
    """Constants of the weak-dependence Bernstein inequality.

    The defaults (all ones, gamma = 1/2) are conservative engineering
    choices.  ``long_run_var`` overrides the data-driven truncated
    autocovariance estimate when set.
    """

    c1: float = 1.0
    c2: float = 1.0
    c3: float = 1.0
    c4: float = 1.0
    gamma: float = 0.5
    long_run_var: float | None = None

    def __post_init__(self) -> None:
        for name in ("c1", "c2", "c3", "c4"):
            if getattr(self, name) <= 0.0:
                raise ValidationError(f"Bernstein constant {name} must be positive")
        if not 0.0 < self.gamma < 1.0:
            raise ValidationError(f"gamma must lie in (0, 1), got {self.gamma}")
        if self.long_run_var is not None and self.long_run_var < 0.0:
            raise ValidationError("long-run variance override must be nonnegative")


@dataclass(frozen=True)
class Truncation:
    """What is known a priori about the outcome support."""

    kind: str = "none"
    lower: float | None = None
    upper: float | None = None

    def __post_init__(self) -> None:
        if self.kind not in TRUNCATION_KINDS:
            raise ValidationError(f"truncation kind must be one of {TRUNCATION_KINDS}")
        if self.kind in ("lower", "both") and self.lower is None:
            raise ValidationError(f"truncation kind {self.kind!r} needs a lower limit")
        if self.kind == "both":
            if self.upper is None:
                raise ValidationError("truncation kind 'both' needs an upper limit")
            if self.lower > self.upper:
                raise ValidationError(
                    f"known support has lower {self.lower} > upper {self.upper}"
                )

    @classmethod
    def none(cls) -> "Truncation":
        return cls()

    @classmethod
    def lower_known(cls, lower: float) -> "Truncation":
        return cls(kind="lower", lower=lower)

    @classmethod
    def both_known(cls, lower: float, upper: float) -> "Truncation":
        return cls(kind="both", lower=lower, upper=upper)


@dataclass(frozen=True)
class PaddingConfig:
    """Knobs of the concentration constructions.

    ``mean_bound_treated`` / ``mean_bound_control`` cap the centered
    outcomes per arm; left unset they default to the observed max absolute
    deviation from the arm mean.  ``c_abs`` is the absolute constant of
    the independent-case Bernstein inequality.
    """

    alpha_u: float
    c_alpha: float = 0.0
    mean_bound_treated: float | None = None
    mean_bound_control: float | None = None
    c_abs: float = 1.0
    bernstein: BernsteinConstants = field(default_factory=BernsteinConstants)
    truncation: Truncation = field(default_factory=Truncation)

    def __post_init__(self) -> None:
        if not 0.0 < self.alpha_u < 1.0:
            raise ValidationError(f"alpha_u must lie in (0, 1), got {self.alpha_u}")
        if self.c_alpha < 0.0:
            raise ValidationError(f"c_alpha must be nonnegative, got {self.c_alpha}")
        if self.c_abs <= 0.0:
            raise ValidationError(f"c_abs must be positive, got {self.c_abs}")
        for name in ("mean_bound_treated", "mean_bound_control"):
            value = getattr(self, name)
            if value is not None and value < 0.0:
                raise ValidationError(f"{name} must be nonnegative, got {value}")


@dataclass(frozen=True)
class Paddings:
    """Per-arm padding widths entering one band assembly."""

    eps_treated: float
    eps_control: float
    t_share_treated: float
    t_share_control: float
    t_mean_treated: float
    t_mean_control: float

    @classmethod
    def zero(cls) -> "Paddings":
        return cls(0.0, 0.0, 0.0, 0.0, 0.0, 0.0)


@dataclass(frozen=True)
class ConcentrationBand:
    """A finite-sample simultaneous band for the identified interval."""

    lower: float
    upper: float
    alpha_u: float
    regime: str
    paddings: Paddings
    support: SupportBounds
    truncation: Truncation
    reduced_to_delta_method: bool = False

    @property
    def width(self) -> float:
        return self.upper - self.lower

    def contains(self, value: float) -> bool:
        return self.lower <= value <= self.upper


def _check_level(alpha_u: float) -> None:
    if not 0.0 < alpha_u < 1.0:
        raise ValidationError(f"alpha_u must lie in (0, 1), got {alpha_u}")


def _check_size(n: int) -> None:
    if n < 1:
        raise ValidationError(f"sample size must be at least 1, got {n}")


def dkw_epsilon(
    alpha_u: float,
    n: int,
    sides: str = "two",
    budget: float = 12.0,
    c_alpha: float | None = None,
) -> float:
    """Uniform CDF padding from the DKW inequality.

    Independent case (c_alpha None): sqrt(log(budget / alpha_u) / (2 n)),
    with the one-sided variant halving the budget (12 -> 6, 8 -> 4).
    Mixing case: (1 + 4 c_alpha) * sqrt(2 log(budget / alpha_u) / n).
    """
    _check_level(alpha_u)
    _check_size(n)
    if sides not in SIDES:
        raise ValidationError(f"sides must be one of {SIDES}, got {sides!r}")
    if budget <= 1.0:
        raise ValidationError(f"budget must exceed 1, got {budget}")
    effective = budget / 2.0 if sides == "one" else budget
    log_term = math.log(effective / alpha_u)
    if c_alpha is None:
        return math.sqrt(log_term / (2.0 * n))
    if c_alpha < 0.0:
        raise ValidationError(f"c_alpha must be nonnegative, got {c_alpha}")
    return (1.0 + 4.0 * c_alpha) * math.sqrt(2.0 * log_term / n)


def hoeffding_tp(alpha_u: float, n: int, c_alpha: float | None = None) -> float:
    """Arm-share padding from Hoeffding's inequality at budget alpha_u / 6.

    Independent case: sqrt(log(12 / alpha_u) / (2 n)) with n the pooled
    sample size.  Mixing case: (1 + 4 c_alpha) * sqrt(2 log(12 / alpha_u)
    / n) with n the arm size.
    """
    _check_level(alpha_u)
    _check_size(n)
    log_term = math.log(12.0 / alpha_u)
    if c_alpha is None:
        return math.sqrt(log_term / (2.0 * n))
    if c_alpha < 0.0:
        raise ValidationError(f"c_alpha must be nonnegative, got {c_alpha}")
    return (1.0 + 4.0 * c_alpha) * math.sqrt(2.0 * log_term / n)


def bernstein_tmu_iid(alpha_u: float, n: int, m: float, c_abs: float = 1.0) -> float:
    """Arm-mean padding under independence.

    The stated min of the quadratic-regime term m * sqrt(log(12 / alpha_u)
    / (c n)) and the linear-regime term (m / (c n)) * log(12 / alpha_u).
    """
    _check_level(alpha_u)
    _check_size(n)
    if m < 0.0:
        raise ValidationError(f"mean bound m must be nonnegative, got {m}")
    if c_abs <= 0.0:
        raise ValidationError(f"c_abs must be positive, got {c_abs}")
    log_term = math.log(12.0 / alpha_u)
    return min(
        m * math.sqrt(log_term / (c_abs * n)),
        m * log_term / (c_abs * n),
    )


def _log_tail_exponent(u: float, n: int, constants: BernsteinConstants) -> float:
    """log of the exponent of the third weak-dependence tail term at u = n * t.

    Only defined for u > 1; computed in log space to dodge overflow near 1.
    """
    a = constants.gamma * (1.0 - constants.gamma)
    return (
        2.0 * math.log(u)
        - math.log(constants.c3 * n)
        + u**a / (constants.c4 * math.log(u) ** constants.gamma)
    )


def bernstein_term3_root(alpha_u: float, n: int, constants: BernsteinConstants) -> float:
    """Largest t > 0 at which the third weak-dependence tail term equals
    alpha_u / 18.

    The term exp(-g(n t)) with g(u) = (u^2 / (c3 n)) * exp(u^(gamma (1 -
    gamma)) / (c4 (log u)^gamma)) diverges as u -> 1+ and as u -> inf, so
    g is U-shaped on (1, inf) and the target level is crossed twice; the
    larger crossing is the conservative root (the term stays below budget
    for every larger t) and is the one returned.  Bisection on the
    increasing branch to 1e-12 relative.
    """
    _check_level(alpha_u)
    _check_size(n)
    target = math.log(18.0 / alpha_u)
    log_target = math.log(target)
    u_safe = math.exp(1.0 / (1.0 - constants.gamma))

    def f(u: float) -> float:
        return _log_tail_exponent(u, n, constants)

    if f(u_safe) < log_target:
        lo, hi = u_safe, 2.0 * u_safe
        for _ in range(1000):
            if f(hi) >= log_target:
                break
            hi *= 2.0
        else:
            raise ConfigurationError(
                "third Bernstein term: bracket expansion failed to reach the budget"
            )
    else:
        # the largest crossing sits below u_safe; locate the interior
        # minimum of the U-shape by ternary search, then bracket right of it
        a_, b_ = 1.0 + 1e-12, u_safe
        for _ in range(200):
            m1 = a_ + (b_ - a_) / 3.0
            m2 = b_ - (b_ - a_) / 3.0
            if f(m1) < f(m2):
                b_ = m2
            else:
                a_ = m1
        u_min = 0.5 * (a_ + b_)
        if f(u_min) >= log_target:
            raise ConfigurationError(
                "third Bernstein term never reaches its budget for this configuration"
            )
        lo, hi = u_min, u_safe
    for _ in range(200):
        if hi - lo <= 1e-12 * hi:
            break
        mid = 0.5 * (lo + hi)
        if f(mid) < log_target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi) / n


def bernstein_mixing_terms(
    alpha_u: float,
    n: int,
    constants: BernsteinConstants,
    long_run_var: float,
) -> tuple[float, float, float]:
    """The three competing mean-padding terms under alpha-mixing.

    Each is calibrated so its tail term equals alpha_u / 18:
    t1 = (c1 * log(18 n / alpha_u))^(1/gamma) / n,
    t2 = sqrt(c2 * (1 + n * V) * log(18 / alpha_u)) / n,
    t3 = the numerically inverted third-term root.
    """
    _check_level(alpha_u)
    _check_size(n)
    if long_run_var < 0.0:
        raise ValidationError("long-run variance must be nonnegative")
    t1 = (constants.c1 * math.log(18.0 * n / alpha_u)) ** (1.0 / constants.gamma) / n
    t2 = math.sqrt(constants.c2 * (1.0 + n * long_run_var) * math.log(18.0 / alpha_u)) / n
    t3 = bernstein_term3_root(alpha_u, n, constants)
    return t1, t2, t3


def bernstein_tmu_mixing(
    alpha_u: float,
    n: int,
    constants: BernsteinConstants,
    long_run_var: float,
) -> float:
    """Arm-mean padding under alpha-mixing: the max of the three terms."""
    return max(bernstein_mixing_terms(alpha_u, n, constants, long_run_var))


def padded_interval(
    mean_treated: float,
    mean_control: float,
    share_treated: float,
    share_control: float,
    support: SupportBounds,
    paddings: Paddings,
) -> tuple[float, float]:
    """Assemble the band endpoints from padded ingredients.

    The support passed here is already padded; means and shares are
    perturbed adversarially by their paddings, exactly as stated:
    lower uses (mean1 - t_mu)(p1 - t_p) + L1 (p0 - t_p) - U0 (p1 + t_p)
    - (mean0 + t_mu)(p0 + t_p), and symmetrically for the upper end.
    """
    lower = (
        (mean_treated - paddings.t_mean_treated)
        * (share_treated - paddings.t_share_treated)
        + support.lower_treated * (share_control - paddings.t_share_control)
        - support.upper_control * (share_treated + paddings.t_share_treated)
        - (mean_control + paddings.t_mean_control)
        * (share_control + paddings.t_share_control)
    )
    upper = (
        (mean_treated + paddings.t_mean_treated)
        * (share_treated + paddings.t_share_treated)
        + support.upper_treated * (share_control + paddings.t_share_control)
        - support.lower_control * (share_treated - paddings.t_share_treated)
        - (mean_control - paddings.t_mean_control)
        * (share_control - paddings.t_share_control)
    )
    return lower, upper


def _require_arms(stats: GroupStats, min_per_arm: int) -> None:
    if stats.degenerate:
        raise DegenerateArmError("band construction needs both arms non-empty")
    if min(stats.n_treated, stats.n_control) < min_per_arm:
        raise DegenerateArmError(
            f"band construction needs at least {min_per_arm} observations per arm"
        )


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


def _delta_method_reduction(
    stats: GroupStats, config: PaddingConfig, regime: str
) -> ConcentrationBand:
    """With both support limits known there is nothing left to pad: the
    band collapses to the delta-method construction on the known support."""
    support = known_support(config.truncation.lower, config.truncation.upper)
    band = delta_method_band(stats, support, config.alpha_u)
    return ConcentrationBand(
        lower=band.band_lower,
        upper=band.band_upper,
        alpha_u=config.alpha_u,
        regime=regime,
        paddings=Paddings.zero(),
        support=support,
        truncation=config.truncation,
        reduced_to_delta_method=True,
    )


def _mean_bounds(stats: GroupStats, config: PaddingConfig) -> tuple[float, float]:
    m1 = config.mean_bound_treated
    m0 = config.mean_bound_control
    if m1 is None:
        m1 = float(np.max(np.abs(stats.treated_serial - stats.mean_treated)))
    if m0 is None:
        m0 = float(np.max(np.abs(stats.control_serial - stats.mean_control)))
    return m1, m0


def _padded_supports(
    stats: GroupStats,
    trunc: Truncation,
    eps_treated: float,
    eps_control: float,
) -> SupportBounds:
    if trunc.kind == "lower":
        lower_treated, lower_control = trunc.lower, trunc.lower
    else:
        lower_treated = stats.min_treated - eps_treated
        lower_control = stats.min_control - eps_control
    return SupportBounds(
        lower_treated=lower_treated,
        upper_treated=stats.max_treated + eps_treated,
        lower_control=lower_control,
        upper_control=stats.max_control + eps_control,
        source="padded" if trunc.kind == "none" else "padded-lower-known",
    )


def iid_band(stats: GroupStats, config: PaddingConfig) -> ConcentrationBand:
    """Fully finite-sample band under independent sampling.

    Six failure events at alpha_u / 6 each: two DKW support events, two
    Hoeffding share events (pooled sample size), two Bernstein mean
    events.  A known lower limit replaces the lower supports unpadded and
    halves the DKW budget to one-sided; with both limits known the band
    reduces to the delta-method construction.
    """
    _require_arms(stats, 1)
    trunc = config.truncation
    _check_truncation_consistency(stats, trunc)
    if trunc.kind == "both":
        return _delta_method_reduction(stats, config, regime="iid")
    sides = "one" if trunc.kind == "lower" else "two"
    eps1 = dkw_epsilon(config.alpha_u, stats.n_treated, sides=sides, budget=12.0)
    eps0 = dkw_epsilon(config.alpha_u, stats.n_control, sides=sides, budget=12.0)
    t_share = hoeffding_tp(config.alpha_u, stats.n)
    m1, m0 = _mean_bounds(stats, config)
    paddings = Paddings(
        eps_treated=eps1,
        eps_control=eps0,
        t_share_treated=t_share,
        t_share_control=t_share,
        t_mean_treated=bernstein_tmu_iid(config.alpha_u, stats.n_treated, m1, config.c_abs),
        t_mean_control=bernstein_tmu_iid(config.alpha_u, stats.n_control, m0, config.c_abs),
    )
    support = _padded_supports(stats, trunc, eps1, eps0)
    lower, upper = padded_interval(
        stats.mean_treated,
        stats.mean_control,
        stats.share_treated,
        stats.share_control,
        support,
        paddings,
    )
    return ConcentrationBand(
        lower=lower,
        upper=upper,
        alpha_u=config.alpha_u,
        regime="iid",
        paddings=paddings,
        support=support,
        truncation=trunc,
    )


def mixing_band(stats: GroupStats, config: PaddingConfig) -> ConcentrationBand:
    """Finite-sample band under alpha-mixing dependence.

    Support and share paddings share the dependence-adjusted form (1 + 4
    c_alpha) * sqrt(2 log(12 / alpha_u) / n_k) on arm sizes; the support
    padding equals the share padding exactly as stated.  Mean paddings
    come from the three-term weak-dependence Bernstein bound, with the
    long-run variance estimated per arm from the serial outcome order
    unless overridden.
    """
    _require_arms(stats, 2)
    trunc = config.truncation
    _check_truncation_consistency(stats, trunc)
    if trunc.kind == "both":
        return _delta_method_reduction(stats, config, regime="mixing")
    t_share_1 = hoeffding_tp(config.alpha_u, stats.n_treated, c_alpha=config.c_alpha)
    t_share_0 = hoeffding_tp(config.alpha_u, stats.n_control, c_alpha=config.c_alpha)
    if trunc.kind == "lower":
        eps1 = dkw_epsilon(
            config.alpha_u, stats.n_treated, sides="one", budget=12.0, c_alpha=config.c_alpha
        )
        eps0 = dkw_epsilon(
            config.alpha_u, stats.n_control, sides="one", budget=12.0, c_alpha=config.c_alpha
        )
    else:
        eps1, eps0 = t_share_1, t_share_0
    v1 = v0 = config.bernstein.long_run_var
    if v1 is None:
        v1 = long_run_variance(stats.treated_serial)
        v0 = long_run_variance(stats.control_serial)
    paddings = Paddings(
        eps_treated=eps1,
        eps_control=eps0,
        t_share_treated=t_share_1,
        t_share_control=t_share_0,
        t_mean_treated=bernstein_tmu_mixing(
            config.alpha_u, stats.n_treated, config.bernstein, v1
        ),
        t_mean_control=bernstein_tmu_mixing(
            config.alpha_u, stats.n_control, config.bernstein, v0
        ),
    )
    support = _padded_supports(stats, trunc, eps1, eps0)
    lower, upper = padded_interval(
        stats.mean_treated,
        stats.mean_control,
        stats.share_treated,
        stats.share_control,
        support,
        paddings,
    )
    return ConcentrationBand(
        lower=lower,
        upper=upper,
        alpha_u=config.alpha_u,
        regime="mixing",
        paddings=paddings,
        support=support,
        truncation=trunc,
    )
