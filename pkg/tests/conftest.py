"""Shared fixtures: synthetic series and country CSV builders."""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np
import pytest

from stochdisc import OuParams, simulate_rate_paths
from stochdisc.pipeline import RateSeries


def make_rate_series(r, dt: float = 1.0, country: str = "SYN", t0: float = 1900.0) -> RateSeries:
    r = np.asarray(r, dtype=float)
    times = t0 + np.arange(len(r)) * dt
    return RateSeries(times=times, r=r, dt=dt, country=country)


def ou_series(params: OuParams, n_steps: int, dt: float, seed: int,
              country: str = "SYN") -> RateSeries:
    path = simulate_rate_paths(params, n_paths=1, dt=dt, n_steps=n_steps, seed=seed)[0]
    return make_rate_series(path, dt=dt, country=country)


def write_country_csvs(directory: Path, name: str, rates: np.ndarray, dt: float,
                       t0: float = 1900.0, T: float = 10.0,
                       inflation: float = 0.03) -> tuple[Path, Path]:
    """Write a consistent (nominal, CPI) CSV pair that reproduces ``rates``.

    CPI grows at the constant log-rate ``inflation`` and extends T years past
    the nominal series, so the reconstructed real rate equals ``rates`` up to
    float rounding.
    """
    rates = np.asarray(rates, dtype=float)
    n = len(rates)
    nominal_path = directory / f"{name.lower()}_nominal.csv"
    cpi_path = directory / f"{name.lower()}_cpi.csv"

    lines = ["time,value"]
    for i in range(n):
        t = t0 + i * dt
        open_rate = math.expm1(rates[i] + inflation)
        lines.append(f"{t!r},{open_rate!r}")
    nominal_path.write_text("\n".join(lines) + "\n", encoding="utf-8")

    lines = ["time,value"]
    n_cpi = n + round(T / dt)
    for i in range(n_cpi):
        t = t0 + i * dt
        level = 100.0 * math.exp(inflation * (t - t0))
        lines.append(f"{t!r},{level!r}")
    cpi_path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return nominal_path, cpi_path


@pytest.fixture
def usa_like() -> OuParams:
    # Mean/reversion/noise of a stable, mildly noisy series: mu ~ 0.146, kappa ~ 0.239
    return OuParams(m=0.026, alpha=1.0 / 5.6, k=0.018)
