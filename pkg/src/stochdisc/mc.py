"""Monte Carlo evaluation of the discount expectation D(t) = E[exp(-int_0^t r dt')].

Paths are generated with counter-based per-path noise streams derived from
(seed, path index), so a run is bit-identical for a fixed seed regardless of
how path batches are scheduled across workers.  The integrated rate is
accumulated by the trapezoid rule; the OU transition itself is exact, so only
that integral carries an O(dt^2) bias.

Also provides the closed-form curve constructor for the OU model and an
empirical long-run classifier (least-squares slope of ln D over the final
third of the horizon).
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import _kernels
from ._kernels import philox
from .analytics import Regime, RegimeLabel, log_discount_exact
from .errors import BudgetError, CoarseStepWarning, DomainError, InconclusiveSignal, InsufficientData
from .models import FellerParams, LognormalParams, ModelKind, OuParams, validate

__all__ = [
    "McConfig",
    "DiscountCurve",
    "LongRunFit",
    "estimate_discount",
    "discount_curve_exact",
    "classify_longrun_empirical",
    "negative_rate_occupancy",
    "simulate_rate_paths",
]

# dt above this fraction of the correlation time makes the full-truncation
# square-root step visibly biased
FELLER_DT_LIMIT = 0.1

STATIONARY_BURN_IN = 5.0  # in units of the correlation time 1/alpha


@dataclass(frozen=True)
class McConfig:
    """Monte Carlo run settings.

    n_paths:  number of simulated paths (>= 2)
    dt:       step size in years
    horizon:  total simulated span in years (an integer number of steps)
    seed:     64-bit stream seed
    batch_size: paths per kernel call / work unit
    n_workers:  worker threads over batches (output independent of this)
    max_total_steps: budget cap on n_paths * n_steps
    allow_coarse_feller_dt: silence the square-root-model step-size warning
    """

    n_paths: int
    dt: float
    horizon: float
    seed: int = 0
    batch_size: int = 8192
    n_workers: int = 1
    max_total_steps: int = 2_000_000_000
    allow_coarse_feller_dt: bool = False

    def __post_init__(self) -> None:
        if self.n_paths < 2:
            raise DomainError(f"n_paths must be >= 2, got {self.n_paths}")
        if not (self.dt > 0.0):
            raise DomainError(f"dt must be > 0, got {self.dt}")
        if self.horizon < self.dt:
            raise DomainError("horizon must be at least one step")
        if self.batch_size < 1:
            raise DomainError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.n_workers < 1:
            raise DomainError(f"n_workers must be >= 1, got {self.n_workers}")
        if self.max_total_steps < 1:
            raise DomainError("max_total_steps must be >= 1")

    @property
    def n_steps(self) -> int:
        steps = round(self.horizon / self.dt)
        if abs(self.horizon / self.dt - steps) > 1e-9 * max(1.0, abs(steps)):
            raise DomainError(
                f"horizon {self.horizon} is not an integer number of steps of {self.dt}"
            )
        return int(steps)


@dataclass
class DiscountCurve:
    """Sampled discount function with per-point uncertainty.

    ``log_d`` is the primary quantity (it stays finite where exp() saturates);
    ``d_values`` = exp(log_d) and may under/overflow to 0/inf at extreme
    horizons, by design.  ``std_errors`` are 0 for closed-form curves.
    """

    times: np.ndarray
    d_values: np.ndarray
    std_errors: np.ndarray
    source: str
    model: ModelKind
    log_d: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self) -> None:
        self.times = np.asarray(self.times, dtype=float)
        self.d_values = np.asarray(self.d_values, dtype=float)
        self.std_errors = np.asarray(self.std_errors, dtype=float)
        if self.log_d is None:
            with np.errstate(divide="ignore"):
                self.log_d = np.log(self.d_values)
        self.log_d = np.asarray(self.log_d, dtype=float)
        n = len(self.times)
        if not (len(self.d_values) == len(self.std_errors) == len(self.log_d) == n):
            raise DomainError("curve arrays must have equal length")
        if n == 0 or self.times[0] != 0.0:
            raise DomainError("curve times must start at 0")
        if np.any(np.diff(self.times) <= 0.0):
            raise DomainError("curve times must be strictly increasing")
        if self.d_values[0] != 1.0:
            raise DomainError("D(0) must equal 1 exactly")
        underflowed = (self.d_values == 0.0) & (self.log_d < -700.0)
        if np.any((self.d_values <= 0.0) & ~underflowed):
            raise DomainError("discount values must be positive")
        if self.source not in ("closed-form", "monte-carlo"):
            raise DomainError(f"unknown curve source {self.source!r}")

    def __len__(self) -> int:
        return len(self.times)


@dataclass(frozen=True)
class LongRunFit:
    """Result of the empirical long-run classification of a curve."""

    label: RegimeLabel
    rate: float
    rate_stderr: float
    inconclusive: bool


def _kernel_args(model: ModelKind, dt: float, allow_coarse: bool):
    if isinstance(model, OuParams):
        return _kernels.KIND_OU, model.m, model.alpha, model.k, model.r0
    if isinstance(model, FellerParams):
        if dt > FELLER_DT_LIMIT / model.alpha and not allow_coarse:
            warnings.warn(
                f"dt={dt} exceeds {FELLER_DT_LIMIT}/alpha for the square-root model; "
                "the full-truncation step bias may be noticeable "
                "(set allow_coarse_feller_dt=True to silence)",
                CoarseStepWarning,
                stacklevel=3,
            )
        return _kernels.KIND_FELLER, model.m, model.alpha, model.k, model.r0
    if isinstance(model, LognormalParams):
        return _kernels.KIND_LOGNORMAL, model.a, model.b, 0.0, model.r0
    raise DomainError(f"not a rate model: {type(model).__name__}")


def _check_budget(cfg: McConfig, n_steps: int) -> None:
    total = cfg.n_paths * n_steps
    if total > cfg.max_total_steps:
        raise BudgetError(
            f"{cfg.n_paths} paths x {n_steps} steps = {total} exceeds the "
            f"configured cap of {cfg.max_total_steps}"
        )


def _run_batches(kind, p0, p1, p2, r0, cfg: McConfig, n_steps: int,
                 sample_idx: np.ndarray, first_counted_step: int,
                 out_x: np.ndarray) -> int:
    starts = list(range(0, cfg.n_paths, cfg.batch_size))
    seed = int(cfg.seed) & 0xFFFFFFFFFFFFFFFF

    def task(start: int) -> int:
        stop = min(start + cfg.batch_size, cfg.n_paths)
        return _kernels.simulate_block(
            kind, p0, p1, p2, r0, cfg.dt, n_steps, sample_idx, seed,
            start, stop - start, out_x[start:stop], first_counted_step,
        )

    if cfg.n_workers == 1 or len(starts) == 1:
        return sum(task(s) for s in starts)
    with ThreadPoolExecutor(max_workers=cfg.n_workers) as pool:
        return sum(pool.map(task, starts))


def _sample_indices(sample_times: Sequence[float], dt: float, n_steps: int) -> np.ndarray:
    idx = []
    for t in sample_times:
        ratio = float(t) / dt
        j = round(ratio)
        if abs(ratio - j) > 1e-9 * max(1.0, abs(ratio)):
            raise DomainError(f"sample time {t} is not a multiple of dt={dt}")
        if not (0 <= j <= n_steps):
            raise DomainError(f"sample time {t} outside the simulated horizon")
        idx.append(int(j))
    idx = sorted(set(idx))
    if not idx or idx[0] != 0:
        idx.insert(0, 0)  # the curve always reports D(0) = 1
    return np.asarray(idx, dtype=np.int64)


def _exp_mean_stats(x: np.ndarray) -> tuple[float, float, float]:
    """Mean/stderr of exp(-x) over paths, shifted so huge |x| cannot overflow."""
    neg = -x
    shift = float(neg.max())
    w = np.exp(neg - shift)
    mean_w = float(w.mean())
    sd_w = float(w.std(ddof=1))
    n = len(x)
    log_d = shift + math.log(mean_w)
    if -700.0 < shift < 700.0:
        scale = math.exp(shift)
        return scale * mean_w, scale * sd_w / math.sqrt(n), log_d
    d = math.exp(log_d) if log_d < 709.0 else math.inf
    if sd_w == 0.0:
        return d, 0.0, log_d
    log_se = shift + math.log(sd_w) - 0.5 * math.log(n)
    stderr = math.exp(log_se) if log_se < 709.0 else math.inf
    return d, stderr, log_d


def estimate_discount(model: ModelKind, cfg: McConfig,
                      sample_times: Sequence[float]) -> DiscountCurve:
    """Estimate the discount curve of ``model`` at the given sample times.

    Sample times must be multiples of cfg.dt within the horizon; t = 0 is
    always included.  D-hat(t) is the path average of exp(-x(t)) with x the
    trapezoid-integrated rate; std_errors are the sample standard deviation
    over paths divided by sqrt(n_paths).  Output is bit-identical for a fixed
    (seed, n_paths, dt, batch partition) across runs and worker counts.
    """
    model = validate(model)
    n_steps = cfg.n_steps
    _check_budget(cfg, n_steps)
    kind, p0, p1, p2, r0 = _kernel_args(model, cfg.dt, cfg.allow_coarse_feller_dt)
    sample_idx = _sample_indices(sample_times, cfg.dt, n_steps)

    out_x = np.empty((cfg.n_paths, len(sample_idx)))
    _run_batches(kind, p0, p1, p2, r0, cfg, n_steps, sample_idx,
                 n_steps + 1, out_x)

    d = np.empty(len(sample_idx))
    se = np.empty(len(sample_idx))
    ld = np.empty(len(sample_idx))
    for col in range(len(sample_idx)):
        d[col], se[col], ld[col] = _exp_mean_stats(out_x[:, col])
    return DiscountCurve(
        times=sample_idx.astype(float) * cfg.dt,
        d_values=d,
        std_errors=se,
        log_d=ld,
        source="monte-carlo",
        model=model,
    )


def discount_curve_exact(params: OuParams, times: Sequence[float]) -> DiscountCurve:
    """Closed-form OU discount curve at the given times (0 always included)."""
    t = np.asarray(sorted(set([0.0] + [float(v) for v in times])), dtype=float)
    if np.any(t < 0.0):
        raise DomainError("curve times must be >= 0")
    log_d = np.asarray(log_discount_exact(params, t), dtype=float)
    with np.errstate(over="ignore"):
        d = np.exp(log_d)
    return DiscountCurve(
        times=t,
        d_values=d,
        std_errors=np.zeros_like(t),
        log_d=log_d,
        source="closed-form",
        model=params,
    )


def classify_longrun_empirical(curve: DiscountCurve, min_points: int = 10) -> LongRunFit:
    """Fit the long-run rate from the tail of a curve and classify its sign.

    Least-squares slope of ln D over the final third of the horizon; the
    classification threshold is twice the slope's propagated standard error.
    A slope below that threshold is reported as inconclusive (warning + flag),
    with the label falling back to the asymptotically-constant regime.
    """
    t_max = float(curve.times[-1])
    mask = curve.times >= (2.0 / 3.0) * t_max - 1e-12 * max(1.0, t_max)
    if int(mask.sum()) < min_points:
        raise InsufficientData(
            f"need >= {min_points} points in the final third of the horizon, "
            f"got {int(mask.sum())}"
        )
    t = curve.times[mask]
    y = curve.log_d[mask]
    if not np.all(np.isfinite(y)):
        raise DomainError("curve tail contains saturated ln D values; shorten the horizon")

    tc = t - t.mean()
    s_tt = float(tc @ tc)
    slope = float(tc @ y) / s_tt
    # propagate per-point discount stderr into ln D: sigma_ln = stderr / D
    with np.errstate(divide="ignore", invalid="ignore"):
        sigma_ln = np.where(curve.std_errors[mask] > 0.0,
                            curve.std_errors[mask] / curve.d_values[mask], 0.0)
    slope_stderr = float(np.sqrt(((tc / s_tt) ** 2 * sigma_ln ** 2).sum()))

    threshold = 2.0 * slope_stderr
    if slope < -threshold:
        regime = Regime.EXPONENTIAL_DECAY
    elif slope > threshold:
        regime = Regime.EXPONENTIAL_GROWTH
    else:
        regime = Regime.ASYMPTOTICALLY_CONSTANT
    inconclusive = threshold > 0.0 and abs(slope) <= threshold
    if inconclusive:
        warnings.warn(
            f"tail slope {slope:.3e} is below its noise threshold {threshold:.3e}",
            InconclusiveSignal,
            stacklevel=2,
        )
    return LongRunFit(
        label=RegimeLabel(regime=regime, tol=threshold),
        rate=-slope,
        rate_stderr=slope_stderr,
        inconclusive=inconclusive,
    )


def negative_rate_occupancy(model: ModelKind, cfg: McConfig) -> float:
    """Fraction of (path, step) samples with r < 0 after a stationarity burn-in.

    The burn-in is 5 correlation times (5/alpha) for the mean-reverting
    models; the geometric model has no stationary law, so no burn-in is
    discarded there (its occupancy is 0 by positivity anyway).
    """
    model = validate(model)
    n_steps = cfg.n_steps
    _check_budget(cfg, n_steps)
    kind, p0, p1, p2, r0 = _kernel_args(model, cfg.dt, cfg.allow_coarse_feller_dt)
    if isinstance(model, LognormalParams):
        burn_in = 0.0
    else:
        burn_in = STATIONARY_BURN_IN / model.alpha
    first = int(math.floor(burn_in / cfg.dt + 1e-9)) + 1
    counted = n_steps - first + 1
    if counted < 1:
        raise DomainError(
            f"horizon {cfg.horizon} leaves no samples after the {burn_in:.3g}y burn-in"
        )
    out_x = np.empty((cfg.n_paths, 0))
    neg = _run_batches(kind, p0, p1, p2, r0, cfg, n_steps,
                       np.empty(0, dtype=np.int64), first, out_x)
    return neg / (cfg.n_paths * counted)


def simulate_rate_paths(model: ModelKind, n_paths: int, dt: float, n_steps: int,
                        seed: int = 0, path_start: int = 0) -> np.ndarray:
    """Simulate full rate paths on the engine's noise streams.

    Returns an (n_paths, n_steps + 1) array including the initial rate.
    Mainly useful for building synthetic series (estimation fixtures,
    stationarity checks); the discount estimator never materializes paths.
    """
    from .models import transition_sample, transition_step_feller, transition_step_lognormal

    model = validate(model)
    if n_paths < 1:
        raise DomainError("n_paths must be >= 1")
    z = philox.normal_matrix(int(seed) & 0xFFFFFFFFFFFFFFFF, path_start, n_paths, n_steps)
    out = np.empty((n_paths, n_steps + 1))
    out[:, 0] = model.r0
    if isinstance(model, OuParams):
        step = lambda r, zj: transition_sample(model, r, dt, zj)
    elif isinstance(model, FellerParams):
        step = lambda r, zj: transition_step_feller(model, r, dt, zj)
    else:
        step = lambda r, zj: transition_step_lognormal(model, r, dt, zj)
    for j in range(n_steps):
        out[:, j + 1] = step(out[:, j], z[:, j])
    return out
