"""Closed-form results for the mean-reverting Gaussian (OU) rate model.

Everything here is exact algebra on the model parameters: the log-discount
function, its long-run decay rate, the scale-free parameter pair that controls
the long-run regime, and stationary negative-rate probabilities.

With mu = m/alpha and kappa = k/alpha^(3/2),

    ln D(t) = -(r0/alpha) * (1 - e^(-alpha t))
              + (kappa^2/2) * [alpha t - 2(1 - e^(-alpha t)) + (1 - e^(-2 alpha t))/2]
              - mu * [alpha t - (1 - e^(-alpha t))]

so D decays like e^(-r_inf t) with r_inf = m - k^2/(2 alpha^2) = alpha*(mu - kappa^2/2):
noise always lowers the long-run rate below the mean level, and for
mu < kappa^2/2 the discount function eventually grows.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .models import OuParams

__all__ = [
    "NondimParams",
    "Regime",
    "RegimeLabel",
    "nondimensionalize",
    "dimensionalize",
    "log_discount_exact",
    "log_discount_slope",
    "r_infinity",
    "classify_regime",
    "prob_negative_stationary",
    "prob_below_r_infinity",
    "fluctuation_bracket",
]

DEFAULT_REGIME_TOL = 1e-9


@dataclass(frozen=True)
class NondimParams:
    """Scale-free model coordinates: mu = m/alpha, kappa = k/alpha^(3/2).

    ``alpha`` (1/year) is kept so the mapping back to dimensional parameters
    is exact.
    """

    mu: float
    kappa: float
    alpha: float

    def __post_init__(self) -> None:
        for name in ("mu", "kappa", "alpha"):
            object.__setattr__(self, name, float(getattr(self, name)))
        if not all(math.isfinite(v) for v in (self.mu, self.kappa, self.alpha)):
            raise DomainError("non-finite nondimensional parameters")
        if self.alpha <= 0.0:
            raise DomainError(f"alpha must be > 0, got {self.alpha}")
        if self.kappa < 0.0:
            raise DomainError(f"kappa must be >= 0, got {self.kappa}")


class Regime(enum.Enum):
    """Long-run behavior of the discount function."""

    EXPONENTIAL_DECAY = "exponential_decay"
    ASYMPTOTICALLY_CONSTANT = "asymptotically_constant"
    EXPONENTIAL_GROWTH = "exponential_growth"


@dataclass(frozen=True)
class RegimeLabel:
    """A regime classification together with the boundary tolerance used."""

    regime: Regime
    tol: float


def nondimensionalize(params: OuParams) -> NondimParams:
    """Map (m, alpha, k) to the scale-free pair (mu, kappa), keeping alpha."""
    a = params.alpha
    return NondimParams(mu=params.m / a, kappa=params.k / a ** 1.5, alpha=a)


def dimensionalize(nd: NondimParams, r0: float | None = None) -> OuParams:
    """Inverse of nondimensionalize; r0 defaults to the mean level."""
    m = nd.mu * nd.alpha
    k = nd.kappa * nd.alpha ** 1.5
    return OuParams(m=m, alpha=nd.alpha, k=k, r0=m if r0 is None else r0)


def fluctuation_bracket(tau):
    """g(tau) = tau - 2(1 - e^-tau) + (1 - e^-2tau)/2, the noise term of ln D.

    Nonnegative for all tau >= 0 (so noise can only raise ln D relative to the
    deterministic rate path); ~tau^3/3 for small tau, ~tau - 3/2 for large.
    """
    em = -np.expm1(-np.asarray(tau, dtype=float))
    em2 = -np.expm1(-2.0 * np.asarray(tau, dtype=float))
    # cancellation at tiny tau can leave an O(eps*tau) negative residue; the
    # true value is >= 0, so clamp it away
    out = np.maximum(np.asarray(tau, dtype=float) - 2.0 * em + 0.5 * em2, 0.0)
    return out if out.ndim else float(out)


def log_discount_exact(params: OuParams, t):
    """Exact ln D(t) for the OU model; accepts scalar or array t >= 0.

    Exponentials are evaluated expm1-style so small alpha*t does not suffer
    cancellation.  If the value exceeds the double range it saturates to
    +/-inf rather than raising.
    """
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0.0):
        raise DomainError("t must be >= 0")
    nd = nondimensionalize(params)
    with np.errstate(over="ignore"):  # saturation to +/-inf is the contract
        tau = nd.alpha * t_arr
        em = -np.expm1(-tau)
        em2 = -np.expm1(-2.0 * tau)
        bracket = tau - 2.0 * em + 0.5 * em2
        out = (
            -(params.r0 / params.alpha) * em
            + 0.5 * nd.kappa ** 2 * bracket
            - nd.mu * (tau - em)
        )
    return out if out.ndim else float(out)


def log_discount_slope(params: OuParams, t):
    """d ln D / dt, the instantaneous discount rate with flipped sign.

    Tends to -r_infinity as t grows; useful for convergence diagnostics.
    """
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0.0):
        raise DomainError("t must be >= 0")
    nd = nondimensionalize(params)
    with np.errstate(over="ignore"):
        u = np.exp(-nd.alpha * t_arr)
        one_m_u = -np.expm1(-nd.alpha * t_arr)
        out = (
            -params.r0 * u
            + 0.5 * nd.alpha * nd.kappa ** 2 * one_m_u ** 2
            - nd.mu * nd.alpha * one_m_u
        )
    return out if out.ndim else float(out)


def r_infinity(params: OuParams) -> float:
    """Long-run discount rate m - k^2/(2 alpha^2); strictly below m when k > 0."""
    return params.m - params.k * params.k / (2.0 * params.alpha * params.alpha)


def classify_regime(nd: NondimParams, tol: float = DEFAULT_REGIME_TOL) -> RegimeLabel:
    """Classify the long-run regime by the sign of mu - kappa^2/2 against tol."""
    if tol < 0.0:
        raise DomainError(f"tol must be >= 0, got {tol}")
    margin = nd.mu - 0.5 * nd.kappa ** 2
    if margin > tol:
        regime = Regime.EXPONENTIAL_DECAY
    elif margin < -tol:
        regime = Regime.EXPONENTIAL_GROWTH
    else:
        regime = Regime.ASYMPTOTICALLY_CONSTANT
    return RegimeLabel(regime=regime, tol=tol)


def prob_negative_stationary(nd: NondimParams) -> float:
    """Stationary probability of a negative rate: erfc(mu/kappa)/2.

    For kappa = 0 the stationary law is a point mass at the mean level, so the
    limit convention is 0 for mu > 0, 1 for mu < 0 and 1/2 at mu = 0.
    """
    if nd.kappa == 0.0:
        if nd.mu > 0.0:
            return 0.0
        if nd.mu < 0.0:
            return 1.0
        return 0.5
    return 0.5 * math.erfc(nd.mu / nd.kappa)


def prob_below_r_infinity(params: OuParams) -> float:
    """Stationary probability that the rate sits below the long-run rate.

    Equals erfc(sqrt((m - r_inf)/(2 alpha)))/2, which reduces to
    erfc(kappa/2)/2; exponentially small as alpha -> 0 at fixed m - r_inf.
    The k = 0 boundary (degenerate stationary law at m = r_inf) returns 1/2
    by the same limit convention as the formula.
    """
    # m - r_inf written out as k^2/(2 alpha^2): the subtraction would lose the
    # gap entirely once it is below the rounding scale of m
    gap = params.k * params.k / (2.0 * params.alpha * params.alpha)
    return 0.5 * math.erfc(math.sqrt(gap / (2.0 * params.alpha)))
