"""Fixed-n self-normalized and empirical-Bernstein radii for bounded data.

All radii here are for the martingale-difference / IID setting: the variance
input is either an oracle variance, a quadratic variation, or the centered sum
of squares of the sample itself.

Convention: ``b`` always bounds the absolute values ``|Z_i|`` (or ``|Z_i - mu|``
where an operation says so), *not* the range width ``b - a``.  Callers with
data in ``[0, 1]`` should pass ``b = 1``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, PreconditionError

# Linear-term constant of the empirical-variance radius.  Fixed literal; do
# not recompute it from its components.
EMPIRICAL_LINEAR_CONSTANT = 3.15

_RECOMPOSE_RTOL = 1e-12


def _check_count(n, name="n"):
    if n != int(n) or int(n) < 1:
        raise DomainError(f"{name} must be a positive integer, got {n!r}")
    return int(n)


def _check_prob(p, name):
    if not (0.0 < p < 1.0):
        raise DomainError(f"{name} must lie in the open interval (0, 1), got {p!r}")
    return float(p)


def _check_nonneg(x, name):
    if x < 0:
        raise DomainError(f"{name} must be nonnegative, got {x!r}")
    return float(x)


def recompose(breakdown: dict) -> float:
    """Radius implied by a term breakdown.

    Every interval in this package satisfies
    ``radius = inflation * (sum of additive terms) + remainder``
    where the additive terms are all breakdown entries except ``inflation``
    and ``remainder``.
    """
    inflation = breakdown.get("inflation", 1.0)
    remainder = breakdown.get("remainder", 0.0)
    body = sum(v for k, v in breakdown.items() if k not in ("inflation", "remainder"))
    return inflation * body + remainder


@dataclass(frozen=True)
class SampleSummary:
    """Sufficient statistics of one bounded sample.

    ``css`` is the centered sum of squares ``sum_i (z_i - mean)^2``.
    ``b`` is an a.s. bound on ``|Z_i|`` (see module docstring).
    ``range``, when present, is the pair ``(a, b)`` bounding the values.
    """

    n: int
    mean: float
    css: float
    b: float
    range: tuple[float, float] | None = None

    def __post_init__(self):
        object.__setattr__(self, "n", _check_count(self.n))
        _check_nonneg(self.css, "css")
        _check_nonneg(self.b, "b")
        if self.range is not None:
            a, hi = self.range
            if a > hi:
                raise DomainError(f"range must satisfy a <= b, got {self.range!r}")
            width = hi - a
            if self.css > self.n * width * width * (1 + 1e-9) + 1e-12:
                raise DomainError(
                    f"css={self.css!r} exceeds n*(range width)^2={self.n * width * width!r}"
                )


def summarize(values, b: float, range: tuple[float, float] | None = None) -> SampleSummary:
    """Build a SampleSummary with a shift-stabilized css accumulation.

    Values are centered at the first observation before accumulating, which
    avoids the catastrophic cancellation of the naive sum-of-squares formula
    when the mean is large relative to the spread.
    """
    x = np.asarray(values, dtype=float)
    if x.ndim != 1 or x.size < 1:
        raise DomainError("values must be a nonempty 1-d sequence")
    n = x.size
    shift = float(x[0])
    d = x - shift
    s1 = float(np.sum(d))
    s2 = float(np.sum(d * d))
    mean = shift + s1 / n
    css = max(0.0, s2 - s1 * s1 / n)
    if b > 0 and float(np.max(np.abs(x))) > b * (1 + 1e-12):
        warnings.warn(f"data exceed the declared bound b={b}", stacklevel=2)
    return SampleSummary(n=n, mean=mean, css=css, b=b, range=range)


@dataclass(frozen=True)
class IntervalResult:
    """A two-sided confidence interval ``center +/- radius``.

    ``breakdown`` maps term names to values and recomposes to ``radius``
    (see :func:`recompose`).  ``flags`` carries non-fatal warnings such as
    ``"vacuous_level"``.
    """

    center: float
    radius: float
    level: float
    breakdown: dict = field(default_factory=dict)
    flags: tuple[str, ...] = ()

    def __post_init__(self):
        _check_nonneg(self.radius, "radius")
        if self.breakdown:
            expected = recompose(self.breakdown)
            scale = max(1.0, abs(self.radius))
            if abs(expected - self.radius) > _RECOMPOSE_RTOL * scale:
                raise DomainError(
                    f"breakdown recomposes to {expected!r}, not radius {self.radius!r}"
                )

    @property
    def lo(self) -> float:
        return self.center - self.radius

    @property
    def hi(self) -> float:
        return self.center + self.radius

    def recomposed(self) -> float:
        return recompose(self.breakdown)


@dataclass(frozen=True)
class PenaltyReport:
    """Exponential coverage loss from dropping the linear term, plus the
    sample size from which the simplified radius is justified."""

    penalty: float
    threshold_n: int | None  # None means "not attained" within the scanned range
    eta: float
    xi: str


def freedman_radius(n: int, sigma2: float, b: float, delta: float) -> float:
    """Oracle Bernstein/Freedman radius for the normalized sum.

    radius = sqrt(2 sigma^2 log(1/delta) / n) + b log(1/delta) / (3 n)

    One-sided coverage at least ``1 - delta`` for bounded martingale
    differences with conditional variance ``sigma2`` and ``|Z_i| <= b``.
    """
    n = _check_count(n)
    _check_nonneg(sigma2, "sigma2")
    _check_nonneg(b, "b")
    delta = _check_prob(delta, "delta")
    log_term = math.log(1.0 / delta)
    return math.sqrt(2.0 * sigma2 * log_term / n) + b * log_term / (3.0 * n)


def mds_predictable_radius(pred_qv: float, b: float, t: float) -> float:
    """Self-normalized radius for the *unnormalized* sum M_n in terms of the
    predictable quadratic variation: sqrt(2 <M>_n t) + b t / 3.

    Two-sided coverage at least ``1 - 2 exp(-t)``.
    """
    _check_nonneg(pred_qv, "pred_qv")
    _check_nonneg(b, "b")
    _check_nonneg(t, "t")
    return math.sqrt(2.0 * pred_qv * t) + b * t / 3.0


def mds_empirical_radius(qv: float, b: float, t: float) -> float:
    """Fully empirical radius for the unnormalized sum M_n in terms of the
    observable quadratic variation: sqrt(2 [M]_n t) + 3.15 b t.

    Two-sided coverage at least ``1 - 3 exp(-t)``.
    """
    _check_nonneg(qv, "qv")
    _check_nonneg(b, "b")
    _check_nonneg(t, "t")
    return math.sqrt(2.0 * qv * t) + EMPIRICAL_LINEAR_CONSTANT * b * t


def inflation_factor(n_eff: int, delta: float) -> float:
    """Deterministic self-normalization inflation 1 / (1 - sqrt(2 log(1/delta) / n_eff)).

    Defined only when ``n_eff > 2 log(1/delta)``; always > 1.
    """
    n_eff = _check_count(n_eff, "n_eff")
    delta = _check_prob(delta, "delta")
    log_term = math.log(1.0 / delta)
    if n_eff <= 2.0 * log_term:
        raise PreconditionError(
            "inflation undefined: too few effective samples "
            f"(need n_eff > 2 log(1/delta) = {2.0 * log_term:.6g}, got {n_eff})"
        )
    return 1.0 / (1.0 - math.sqrt(2.0 * log_term / n_eff))


def eb_interval(summary: SampleSummary, delta: float) -> IntervalResult:
    """Empirical-Bernstein interval for the marginal mean at level ``1 - 3 delta``.

    radius = nu * ( sqrt(2 css log(1/delta) / n^2) + 3.15 b log(1/delta) / n )

    with ``nu = inflation_factor(n, delta)``.  ``summary.b`` must bound
    ``|Z_i|`` (not the range width).  For ``delta >= 1/3`` the nominal level
    is vacuous; the interval is still computed and flagged.
    """
    delta = _check_prob(delta, "delta")
    nu = inflation_factor(summary.n, delta)
    n = summary.n
    log_term = math.log(1.0 / delta)
    leading = math.sqrt(2.0 * summary.css * log_term) / n
    linear = EMPIRICAL_LINEAR_CONSTANT * summary.b * log_term / n
    radius = nu * (leading + linear)
    level = 1.0 - 3.0 * delta
    flags = ("vacuous_level",) if level <= 0.0 else ()
    return IntervalResult(
        center=summary.mean,
        radius=radius,
        level=level,
        breakdown={"leading": leading, "linear": linear, "inflation": nu},
        flags=flags,
    )


def eb_interval_alpha(summary: SampleSummary, alpha: float) -> IntervalResult:
    """Empirical-Bernstein interval parametrized by ``alpha``: the same as
    :func:`eb_interval` with ``delta = 2 alpha / 3`` and level ``1 - 2 alpha``."""
    if not (0.0 < alpha < 1.5):
        raise DomainError(f"alpha must lie in (0, 1.5), got {alpha!r}")
    return eb_interval(summary, delta=2.0 * alpha / 3.0)


def ignore_linear_radius(summary: SampleSummary, delta: float, xi_n: float) -> float:
    """Simplified radius with the linear b-term dropped:

    radius = nu * (1 + xi_n) * sqrt(2 log(1/delta) css / n^2)

    Valid for IID data at level ``1 - 3 delta - penalty`` once
    ``n >= burn_in_threshold(...)``; see :func:`ignorance_penalty`.
    """
    delta = _check_prob(delta, "delta")
    _check_nonneg(xi_n, "xi_n")
    nu = inflation_factor(summary.n, delta)
    n = summary.n
    log_term = math.log(1.0 / delta)
    return nu * (1.0 + xi_n) * math.sqrt(2.0 * log_term * summary.css) / n


def ignorance_penalty(n: int, sigma2: float, m4: float, b: float, eta: float) -> float:
    """Exponentially small coverage loss paid for dropping the linear term:

    exp( - n (1-eta)^2 sigma^4 / (2 (m4 + b (1-eta) sigma^2 / 3)) )

    clamped to [0, 1].  Requires a non-degenerate variable (``sigma2 > 0``);
    ``m4`` is the fourth central moment and must satisfy ``m4 >= sigma2^2``
    (Jensen) -- a violation only triggers a warning.
    """
    n = _check_count(n)
    if sigma2 <= 0:
        raise DomainError("degenerate variable excluded: sigma2 must be > 0")
    if m4 <= 0:
        raise DomainError(f"m4 must be positive, got {m4!r}")
    if b <= 0:
        raise DomainError(f"b must be positive, got {b!r}")
    eta = _check_prob(eta, "eta")
    if m4 < sigma2 * sigma2 * (1 - 1e-12):
        warnings.warn(
            f"m4={m4} is below sigma2^2={sigma2 * sigma2}; Jensen violated", stacklevel=2
        )
    one_minus = 1.0 - eta
    exponent = -(n * one_minus * one_minus * sigma2 * sigma2) / (
        2.0 * (m4 + b * one_minus * sigma2 / 3.0)
    )
    return min(1.0, math.exp(exponent))


def burn_in_threshold(delta, eta, sigma2, b, xi, n_max) -> int | None:
    """Smallest ``n <= n_max`` with ``eta sigma2 >= 5 b^2 log(1/delta) / (n xi(n)^2)``.

    Returns ``None`` when no such n exists up to ``n_max`` ("not attained");
    for sequences with ``n xi_n^2`` decreasing the set is genuinely empty.
    ``xi`` is a callable ``n -> xi_n > 0``.
    """
    delta = _check_prob(delta, "delta")
    eta = _check_prob(eta, "eta")
    if sigma2 <= 0:
        raise DomainError("sigma2 must be > 0")
    if b <= 0:
        raise DomainError("b must be > 0")
    n_max = _check_count(n_max, "n_max")
    target = eta * sigma2
    threshold = 5.0 * b * b * math.log(1.0 / delta)
    for n in range(1, n_max + 1):
        xi_n = xi(n)
        if xi_n <= 0:
            raise DomainError(f"xi({n}) = {xi_n!r} must be > 0")
        if target >= threshold / (n * xi_n * xi_n):
            return n
    return None


def penalty_report(
    n, sigma2, m4, b, eta, delta, xi, xi_label: str = "", n_max: int = 10**6
) -> PenaltyReport:
    """Bundle the ignorance penalty and burn-in threshold for reporting."""
    return PenaltyReport(
        penalty=ignorance_penalty(n, sigma2, m4, b, eta),
        threshold_n=burn_in_threshold(delta, eta, sigma2, b, xi, n_max),
        eta=float(eta),
        xi=xi_label or "user-supplied sequence",
    )
