"""Short-rate process definitions and single-step transition sampling.

Three models are supported, all with annualized decimal log-rates and time in
years:

* mean-reverting Gaussian (Ornstein-Uhlenbeck):  dr = -alpha*(r - m)*dt + k*dW
* square-root diffusion (Feller/CIR form):       dr = -alpha*(r - m)*dt + k*sqrt(r)*dW
* geometric (log-normal):                        dr = a*r*dt + b*r*dW

The OU transition is sampled exactly (no discretization bias); the square-root
model uses a positivity-preserving full-truncation Euler step; the geometric
model uses the exact log-space step.  The square-root and geometric dynamics
are this library's concrete choices for those model families - only the OU
model comes with closed-form discount results (see ``stochdisc.analytics``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .errors import DomainError

__all__ = [
    "OuParams",
    "FellerParams",
    "LognormalParams",
    "ModelKind",
    "validate",
    "stationary_stats",
    "transition_sample",
    "transition_step_feller",
    "transition_step_lognormal",
]


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise DomainError(message)


def _finite(name: str, value: float) -> None:
    _require(math.isfinite(value), f"{name} must be finite, got {value!r}")


@dataclass(frozen=True)
class OuParams:
    """Mean-reverting Gaussian rate model.

    m:     reversion level (1/year); may be negative
    alpha: reversion strength (1/year), > 0
    k:     noise amplitude (year^-3/2), >= 0
    r0:    initial rate (1/year); defaults to m
    """

    m: float
    alpha: float
    k: float
    r0: float = field(default=None)  # type: ignore[assignment]

    def __post_init__(self) -> None:
        if self.r0 is None:
            object.__setattr__(self, "r0", float(self.m))
        for name in ("m", "alpha", "k", "r0"):
            object.__setattr__(self, name, float(getattr(self, name)))
            _finite(name, getattr(self, name))
        _require(self.alpha > 0.0, f"alpha must be > 0, got {self.alpha}")
        _require(self.k >= 0.0, f"k must be >= 0, got {self.k}")


@dataclass(frozen=True)
class FellerParams:
    """Square-root diffusion rate model; rates cannot become negative.

    m:     reversion level (1/year), >= 0
    alpha: reversion strength (1/year), > 0
    k:     noise amplitude (units 1/(year*sqrt(rate))), >= 0
    r0:    initial rate (1/year), >= 0; defaults to m
    """

    m: float
    alpha: float
    k: float
    r0: float = field(default=None)  # type: ignore[assignment]

    def __post_init__(self) -> None:
        if self.r0 is None:
            object.__setattr__(self, "r0", float(self.m))
        for name in ("m", "alpha", "k", "r0"):
            object.__setattr__(self, name, float(getattr(self, name)))
            _finite(name, getattr(self, name))
        _require(self.alpha > 0.0, f"alpha must be > 0, got {self.alpha}")
        _require(self.k >= 0.0, f"k must be >= 0, got {self.k}")
        _require(self.m >= 0.0, f"m must be >= 0 for the square-root model, got {self.m}")
        _require(self.r0 >= 0.0, f"r0 must be >= 0 for the square-root model, got {self.r0}")


@dataclass(frozen=True)
class LognormalParams:
    """Geometric (log-normal) rate model; rates stay strictly positive.

    a:  drift of the log-rate (1/year)
    b:  volatility of the log-rate (year^-1/2), >= 0
    r0: initial rate (1/year), > 0
    """

    a: float
    b: float
    r0: float

    def __post_init__(self) -> None:
        for name in ("a", "b", "r0"):
            object.__setattr__(self, name, float(getattr(self, name)))
            _finite(name, getattr(self, name))
        _require(self.b >= 0.0, f"b must be >= 0, got {self.b}")
        _require(self.r0 > 0.0, f"r0 must be > 0 for the geometric model, got {self.r0}")


ModelKind = Union[OuParams, FellerParams, LognormalParams]


def validate(model: ModelKind) -> ModelKind:
    """Re-run invariant checks on a model record and return it.

    Construction already validates; this exists for records rebuilt from
    untrusted sources (JSON, mutated copies).  Raises DomainError naming the
    violated invariant.
    """
    if not isinstance(model, (OuParams, FellerParams, LognormalParams)):
        raise DomainError(f"not a rate model: {type(model).__name__}")
    model.__post_init__()
    return model


def stationary_stats(params: OuParams) -> tuple[float, float]:
    """Stationary mean and variance (m, k^2 / (2*alpha)) of the OU rate."""
    return params.m, params.k * params.k / (2.0 * params.alpha)


def transition_sample(params: OuParams, r, dt: float, noise):
    """One exact OU transition over dt years.

    Returns m + (r - m)*exp(-alpha*dt) + noise*sqrt((k^2/2alpha)*(1 - exp(-2*alpha*dt)))
    where ``noise`` is a standard-normal draw.  Exact in distribution for any
    dt; accepts scalars or numpy arrays for ``r`` and ``noise``.
    """
    _require(dt > 0.0, f"dt must be > 0, got {dt}")
    m, alpha, k = params.m, params.alpha, params.k
    decay = math.exp(-alpha * dt)
    # 1 - exp(-2*alpha*dt) via expm1 so tiny dt does not cancel
    sd = math.sqrt(k * k * (-math.expm1(-2.0 * alpha * dt)) / (2.0 * alpha))
    return m + (r - m) * decay + sd * noise


def transition_step_feller(params: FellerParams, r, dt: float, noise):
    """One full-truncation Euler step of the square-root model, clamped at 0.

    r' = r + alpha*(m - r+)*dt + k*sqrt(r+)*sqrt(dt)*noise  with r+ = max(r, 0),
    then r' is clamped at 0.  Never returns a negative rate.
    """
    _require(dt > 0.0, f"dt must be > 0, got {dt}")
    m, alpha, k = params.m, params.alpha, params.k
    r_plus = np.maximum(r, 0.0)
    step = r + alpha * (m - r_plus) * dt + k * np.sqrt(r_plus) * math.sqrt(dt) * noise
    return np.maximum(step, 0.0)


def transition_step_lognormal(params: LognormalParams, r, dt: float, noise):
    """One exact geometric step: r' = r*exp((a - b^2/2)*dt + b*sqrt(dt)*noise)."""
    _require(dt > 0.0, f"dt must be > 0, got {dt}")
    a, b = params.a, params.b
    return r * np.exp((a - 0.5 * b * b) * dt + b * math.sqrt(dt) * noise)
