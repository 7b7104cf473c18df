"""Mean-reverting model calibration from a real-rate series.

The recipe: the level m is the sample mean; alpha comes from a nonlinear
least-squares fit of sigma^2 * exp(-alpha*lag) to the empirical autocovariance
(biased 1/N normalization, so lag 0 equals the population-convention sample
variance); k = sigma*sqrt(2*alpha) with sigma^2 taken from lag 0.  Robustness
is probed by re-estimating m and sigma^2 on four contiguous equal blocks while
keeping the full-sample alpha (short blocks cannot support their own
autocovariance fit), and reporting the min/max of the derived quantities.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import curve_fit

from .analytics import NondimParams, prob_negative_stationary
from .errors import DomainError, FitError, InsufficientData, NonConvergence, ShortCorrelationWarning
from .pipeline import NegativeRateSummary, RateSeries, negative_rate_summary

__all__ = [
    "AutocorrFit",
    "BlockFit",
    "EstimationReport",
    "estimate_mean",
    "autocovariance",
    "fit_exponential_decay",
    "fit_autocorrelation",
    "estimate_k",
    "block_subsample_report",
    "build_report",
]

MIN_SAMPLES = 20
MIN_BLOCK_SAMPLES = 20
N_BLOCKS = 4
DEFAULT_MAX_LAG_YEARS = 20.0
MIN_POSITIVE_PREFIX = 3

# a sample variance at the rounding scale of the squared level is a constant
# series, not data (demeaning identical values leaves O(eps*|r|) residue)
_ZERO_VARIANCE_REL = 1e-24


def _is_zero_variance(sigma2: float, values: np.ndarray) -> bool:
    mean_sq = float(np.mean(np.square(values)))
    return sigma2 <= _ZERO_VARIANCE_REL * max(mean_sq, 1e-300)


@dataclass
class AutocorrFit:
    """Exponential fit to the empirical autocovariance.

    lags are in years; ``sigma2_hat`` is the empirical variance (the lag-0
    autocovariance), not the fitted amplitude; ``alpha_stderr`` is the
    least-squares standard error of the fitted decay rate.
    """

    lags: np.ndarray
    acov: np.ndarray
    alpha_hat: float
    sigma2_hat: float
    residual_sse: float
    alpha_stderr: float
    amplitude_hat: float

    def __post_init__(self) -> None:
        self.lags = np.asarray(self.lags, dtype=float)
        self.acov = np.asarray(self.acov, dtype=float)
        if len(self.lags) != len(self.acov):
            raise DomainError("lags and autocovariance must have equal length")
        if len(self.lags) == 0 or self.lags[0] != 0.0 or np.any(np.diff(self.lags) <= 0):
            raise DomainError("lags must ascend from 0")
        if not (self.alpha_hat > 0.0 and math.isfinite(self.alpha_hat)):
            raise DomainError(f"alpha_hat must be positive, got {self.alpha_hat}")
        if self.sigma2_hat < 0.0:
            raise DomainError("sigma2_hat must be >= 0")


@dataclass(frozen=True)
class BlockFit:
    """Per-block re-estimate (full-sample alpha held fixed)."""

    index: int
    n_samples: int
    m: float
    sigma2: float
    k: float
    mu: float
    kappa: float
    r_inf: float


@dataclass
class EstimationReport:
    """Fitted parameters, derived quantities and block-subsampling ranges."""

    country: str
    n_samples: int
    span_years: float
    dt: float
    m_hat: float
    alpha_hat: float
    alpha_stderr: float
    k_hat: float
    sigma2_hat: float
    mu_hat: float
    kappa_hat: float
    r_inf_hat: float
    prob_negative_model: float
    neg_fraction_empirical: float
    neg_years_empirical: float
    mean_negative_amplitude: float
    blocks: list[BlockFit] = field(default_factory=list)
    block_ranges: Optional[dict[str, tuple[float, float]]] = None
    degenerate: bool = False

    def to_dict(self) -> dict:
        """JSON-ready dict; non-finite numbers become null."""

        def num(x: float):
            x = float(x)
            return x if math.isfinite(x) else None

        out = {
            "country": self.country,
            "n_samples": self.n_samples,
            "span_years": num(self.span_years),
            "dt": num(self.dt),
            "m": num(self.m_hat),
            "alpha": num(self.alpha_hat),
            "alpha_stderr": num(self.alpha_stderr),
            "k": num(self.k_hat),
            "sigma2": num(self.sigma2_hat),
            "mu": num(self.mu_hat),
            "kappa": num(self.kappa_hat),
            "r_inf": num(self.r_inf_hat),
            "prob_negative_model": num(self.prob_negative_model),
            "neg_fraction_empirical": num(self.neg_fraction_empirical),
            "neg_years_empirical": num(self.neg_years_empirical),
            "mean_negative_amplitude": num(self.mean_negative_amplitude),
            "degenerate": self.degenerate,
            "blocks": [
                {
                    "index": b.index,
                    "n_samples": b.n_samples,
                    "m": num(b.m),
                    "sigma2": num(b.sigma2),
                    "k": num(b.k),
                    "mu": num(b.mu),
                    "kappa": num(b.kappa),
                    "r_inf": num(b.r_inf),
                }
                for b in self.blocks
            ],
            "block_ranges": None
            if self.block_ranges is None
            else {
                key: {"min": num(lo), "max": num(hi)}
                for key, (lo, hi) in self.block_ranges.items()
            },
        }
        return out


def estimate_mean(series: RateSeries) -> float:
    """Sample mean of the rate series (the stationary level estimate)."""
    if len(series) < MIN_SAMPLES:
        raise InsufficientData(f"need >= {MIN_SAMPLES} samples, got {len(series)}")
    return float(np.mean(series.r))


def autocovariance(values: np.ndarray, n_lags: int) -> np.ndarray:
    """Biased (1/N) autocovariance at lags 0..n_lags.

    The 1/N normalization keeps the estimate positive semidefinite and makes
    lag 0 exactly the population-convention sample variance.
    """
    x = np.asarray(values, dtype=float)
    n = len(x)
    if n_lags >= n:
        raise DomainError(f"n_lags={n_lags} requires more than {n_lags} samples")
    d = x - x.mean()
    return np.array([float(d[: n - lag] @ d[lag:]) / n for lag in range(n_lags + 1)])


def fit_exponential_decay(lag_times: np.ndarray, values: np.ndarray,
                          p0: tuple[float, float]) -> tuple[float, float, float, float]:
    """Nonlinear least squares of amp*exp(-alpha*t) to (lag_times, values).

    Returns (amp, alpha, alpha_stderr, residual_sse).  Raises NonConvergence
    if the iteration fails, FitError if the fitted decay rate is not positive.
    """
    model = lambda t, amp, alpha: amp * np.exp(-alpha * t)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")  # curve_fit warns on singular pcov
            popt, pcov = curve_fit(model, lag_times, values, p0=p0, maxfev=20000)
    except RuntimeError as exc:
        raise NonConvergence(f"autocovariance fit did not converge: {exc}") from exc
    amp, alpha = float(popt[0]), float(popt[1])
    if not (math.isfinite(alpha) and alpha > 0.0):
        raise FitError(f"fitted decay rate is not positive ({alpha})")
    alpha_stderr = float(np.sqrt(pcov[1, 1])) if np.isfinite(pcov[1, 1]) else math.inf
    residuals = values - model(lag_times, amp, alpha)
    return amp, alpha, alpha_stderr, float(residuals @ residuals)


def fit_autocorrelation(series: RateSeries, max_lag: float | None = None) -> AutocorrFit:
    """Estimate the reversion rate from the empirical autocovariance.

    Computes the biased autocovariance at integer lags up to ``max_lag`` years
    (default min(20, span/4)), then fits sigma^2 * exp(-alpha * lag) by
    nonlinear least squares over all computed lags, initialized from a
    log-linear regression on the positive prefix.  Fitting on the values
    rather than their logs keeps negative-autocovariance lags in the fit.
    """
    if len(series) < MIN_SAMPLES:
        raise InsufficientData(f"need >= {MIN_SAMPLES} samples, got {len(series)}")
    span = (len(series) - 1) * series.dt
    if max_lag is None:
        max_lag = min(DEFAULT_MAX_LAG_YEARS, span / 4.0)
    elif max_lag > span / 4.0 + 1e-9:
        raise DomainError(f"max_lag={max_lag} exceeds a quarter of the span ({span / 4.0})")
    n_lags = int(math.floor(max_lag / series.dt + 1e-9))
    if n_lags + 1 < MIN_POSITIVE_PREFIX:
        raise DomainError(f"max_lag={max_lag} leaves fewer than {MIN_POSITIVE_PREFIX} lags")

    acov = autocovariance(series.r, n_lags)
    lag_times = np.arange(n_lags + 1) * series.dt
    sigma2 = float(acov[0])
    if _is_zero_variance(sigma2, series.r):
        raise FitError("zero variance: the series is constant")

    positive = np.flatnonzero(acov <= 0.0)
    prefix_len = int(positive[0]) if len(positive) else len(acov)
    if prefix_len < MIN_POSITIVE_PREFIX:
        raise FitError(
            f"no positive-autocovariance prefix of length >= {MIN_POSITIVE_PREFIX}"
        )
    # log-linear initializer on the positive prefix
    coeffs = np.polyfit(lag_times[:prefix_len], np.log(acov[:prefix_len]), 1)
    alpha0 = max(-float(coeffs[0]), 1e-12)
    amp0 = float(np.exp(coeffs[1]))

    amp, alpha, alpha_stderr, sse = fit_exponential_decay(
        lag_times, acov, p0=(amp0, alpha0)
    )
    if alpha >= 1.0 / series.dt:
        warnings.warn(
            f"fitted correlation time {1.0 / alpha:.3g}y is at or below one sample "
            f"interval ({series.dt}y); the series looks white",
            ShortCorrelationWarning,
            stacklevel=2,
        )
    return AutocorrFit(
        lags=lag_times,
        acov=acov,
        alpha_hat=alpha,
        sigma2_hat=sigma2,
        residual_sse=sse,
        alpha_stderr=alpha_stderr,
        amplitude_hat=amp,
    )


def estimate_k(fit: AutocorrFit) -> float:
    """Noise amplitude k = sqrt(2 * alpha * sigma^2) from the fitted rate."""
    return math.sqrt(2.0 * fit.alpha_hat * fit.sigma2_hat)


def _derived(m: float, sigma2: float, alpha: float) -> tuple[float, float, float, float]:
    """(k, mu, kappa, r_inf) from block-level (m, sigma2) at a fixed alpha."""
    if sigma2 == 0.0:
        # no noise: r_inf equals the level regardless of alpha
        return 0.0, m / alpha, 0.0, m
    k = math.sqrt(2.0 * alpha * sigma2)
    return k, m / alpha, k / alpha ** 1.5, m - k * k / (2.0 * alpha * alpha)


def block_subsample_report(
    series: RateSeries, full_alpha: float
) -> tuple[list[BlockFit], dict[str, tuple[float, float]]]:
    """Re-estimate m and sigma^2 on four contiguous equal blocks.

    ``full_alpha`` (the full-sample reversion rate) is used for every block;
    per-block values are demeaned with the block's own mean.  Returns the
    block fits and the min/max over blocks for mu, kappa and r_inf.
    """
    if not (math.isfinite(full_alpha) and full_alpha > 0.0):
        raise DomainError(f"full_alpha must be positive, got {full_alpha}")
    if len(series) < N_BLOCKS * MIN_BLOCK_SAMPLES:
        raise InsufficientData(
            f"need >= {N_BLOCKS * MIN_BLOCK_SAMPLES} samples for "
            f"{N_BLOCKS} blocks, got {len(series)}"
        )
    blocks: list[BlockFit] = []
    for i, chunk in enumerate(np.array_split(series.r, N_BLOCKS)):
        m_b = float(np.mean(chunk))
        sigma2_b = float(np.mean((chunk - m_b) ** 2))
        k_b, mu_b, kappa_b, r_inf_b = _derived(m_b, sigma2_b, full_alpha)
        blocks.append(
            BlockFit(index=i, n_samples=len(chunk), m=m_b, sigma2=sigma2_b,
                     k=k_b, mu=mu_b, kappa=kappa_b, r_inf=r_inf_b)
        )
    ranges = {
        "mu": (min(b.mu for b in blocks), max(b.mu for b in blocks)),
        "kappa": (min(b.kappa for b in blocks), max(b.kappa for b in blocks)),
        "r_inf": (min(b.r_inf for b in blocks), max(b.r_inf for b in blocks)),
    }
    return blocks, ranges


def build_report(series: RateSeries, max_lag: float | None = None) -> EstimationReport:
    """Full estimation report for one series (one Table row).

    A zero-variance (or otherwise unfittable) autocovariance is reported as a
    degenerate record rather than an error: the level estimate survives, the
    noise amplitude is 0 when the series is constant, and alpha-dependent
    quantities are NaN.
    """
    m_hat = estimate_mean(series)
    summary: NegativeRateSummary = negative_rate_summary(series)
    try:
        fit = fit_autocorrelation(series, max_lag=max_lag)
    except FitError:
        sigma2 = float(np.mean((series.r - m_hat) ** 2))
        if _is_zero_variance(sigma2, series.r):
            sigma2 = 0.0
            kappa_hat, k_hat, r_inf_hat = 0.0, 0.0, m_hat
            prob_neg = 0.0 if m_hat > 0.0 else (1.0 if m_hat < 0.0 else 0.5)
        else:
            kappa_hat = k_hat = r_inf_hat = prob_neg = math.nan
        return EstimationReport(
            country=series.country,
            n_samples=len(series),
            span_years=series.span_years,
            dt=series.dt,
            m_hat=m_hat,
            alpha_hat=math.nan,
            alpha_stderr=math.nan,
            k_hat=k_hat,
            sigma2_hat=sigma2,
            mu_hat=math.nan,
            kappa_hat=kappa_hat,
            r_inf_hat=r_inf_hat,
            prob_negative_model=prob_neg,
            neg_fraction_empirical=summary.fraction,
            neg_years_empirical=summary.total_years,
            mean_negative_amplitude=summary.mean_negative_amplitude,
            degenerate=True,
        )

    alpha = fit.alpha_hat
    k_hat = estimate_k(fit)
    mu_hat = m_hat / alpha
    kappa_hat = k_hat / alpha ** 1.5
    r_inf_hat = m_hat - k_hat * k_hat / (2.0 * alpha * alpha)
    prob_neg = prob_negative_stationary(
        NondimParams(mu=mu_hat, kappa=kappa_hat, alpha=alpha)
    )
    blocks, ranges = block_subsample_report(series, alpha)
    return EstimationReport(
        country=series.country,
        n_samples=len(series),
        span_years=series.span_years,
        dt=series.dt,
        m_hat=m_hat,
        alpha_hat=alpha,
        alpha_stderr=fit.alpha_stderr,
        k_hat=k_hat,
        sigma2_hat=fit.sigma2_hat,
        mu_hat=mu_hat,
        kappa_hat=kappa_hat,
        r_inf_hat=r_inf_hat,
        prob_negative_model=prob_neg,
        neg_fraction_empirical=summary.fraction,
        neg_years_empirical=summary.total_years,
        mean_negative_amplitude=summary.mean_negative_amplitude,
        blocks=blocks,
        block_ranges=ranges,
        degenerate=False,
    )
