"""Ingestion of nominal-rate and CPI series to real log-rate series.

Input CSVs carry two columns, ``time,value``: time is a decimal year (1820.0,
1820.25, ...), value is an open annual rate in decimals or a CPI index level.
Recording frequency is annual or quarterly.  Real rates are built as

    b(t) = ln(1 + open_rate(t))            nominal log-rate
    c(t) = ln(C(t+T)/C(t)) / T             T-year forward log-inflation
    r(t) = b(t) - c(t)

with T = 10 years by default; the usable output loses its last T years to the
CPI lookahead.  Gaps are never interpolated: a gapped file is split into
contiguous segments and the longest one is kept (with a warning), because
interpolation would bias the autocovariance downstream.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import AlignmentError, DomainError, InsufficientData, InsufficientSpan, SeriesGapWarning

__all__ = [
    "NOMINAL_KIND",
    "CPI_KIND",
    "RawSeries",
    "RateSeries",
    "InflationSeries",
    "NegativeRateSummary",
    "load_raw_csv",
    "to_log_rate",
    "inflation_log_rate",
    "real_rate_series",
    "negative_rate_summary",
]

NOMINAL_KIND = "nominal_open_rate"
CPI_KIND = "cpi_index"
ALLOWED_SPACINGS = (1.0, 0.25)
MIN_SERIES_LENGTH = 20
_GRID_TOL = 1e-6


def _snap_spacing(delta: float) -> float:
    for allowed in ALLOWED_SPACINGS:
        if abs(delta - allowed) <= _GRID_TOL:
            return allowed
    raise DomainError(
        f"sample spacing {delta} is neither annual (1.0) nor quarterly (0.25)"
    )


@dataclass
class RawSeries:
    """A uniformly sampled input series (open nominal rates or CPI levels)."""

    times: np.ndarray
    values: np.ndarray
    kind: str
    country: str

    def __post_init__(self) -> None:
        self.times = np.asarray(self.times, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.kind not in (NOMINAL_KIND, CPI_KIND):
            raise DomainError(f"unknown series kind {self.kind!r}")
        if len(self.times) != len(self.values):
            raise DomainError("times and values must have equal length")
        if len(self.times) < 2:
            raise DomainError("series must contain at least two samples")
        diffs = np.diff(self.times)
        if np.any(diffs <= 0.0):
            raise DomainError("times must be strictly increasing")
        delta = _snap_spacing(float(diffs[0]))
        if np.any(np.abs(diffs - delta) > _GRID_TOL):
            raise DomainError("series is not uniformly spaced")
        if not np.all(np.isfinite(self.values)):
            raise DomainError("series values must be finite")
        if self.kind == CPI_KIND and np.any(self.values <= 0.0):
            raise DomainError("CPI index levels must be positive")

    @property
    def dt(self) -> float:
        return _snap_spacing(float(self.times[1] - self.times[0]))

    def __len__(self) -> int:
        return len(self.times)


@dataclass
class RateSeries:
    """A uniformly sampled real log-rate series (1/year units)."""

    times: np.ndarray
    r: np.ndarray
    dt: float
    country: str

    def __post_init__(self) -> None:
        self.times = np.asarray(self.times, dtype=float)
        self.r = np.asarray(self.r, dtype=float)
        self.dt = float(self.dt)
        if len(self.times) != len(self.r):
            raise DomainError("times and rates must have equal length")
        if len(self.r) < MIN_SERIES_LENGTH:
            raise InsufficientData(
                f"rate series needs >= {MIN_SERIES_LENGTH} samples, got {len(self.r)}"
            )
        if self.dt <= 0.0:
            raise DomainError("dt must be positive")
        if np.any(np.abs(np.diff(self.times) - self.dt) > _GRID_TOL):
            raise DomainError("rate series is not uniformly spaced at dt")
        if not np.all(np.isfinite(self.r)):
            raise DomainError("rates must be finite")

    @property
    def span_years(self) -> float:
        """Calendar span covered by the samples (one dt per sample)."""
        return len(self.r) * self.dt

    def __len__(self) -> int:
        return len(self.r)


@dataclass(frozen=True)
class InflationSeries:
    """Forward log-inflation c(t) on the CPI grid (shortened by the lookahead)."""

    times: np.ndarray
    values: np.ndarray
    dt: float


@dataclass(frozen=True)
class NegativeRateSummary:
    """How often and how deeply a series goes negative."""

    fraction: float
    total_years: float
    mean_negative_amplitude: float


def load_raw_csv(path: str | Path, kind: str, country: str) -> RawSeries:
    """Load a ``time,value`` CSV, keeping the longest contiguous segment.

    Rows with an empty value are treated as gaps.  If the file contains gaps,
    the longest uniformly spaced segment is used and a SeriesGapWarning is
    emitted (values are never interpolated).
    """
    path = Path(path)
    times: list[float] = []
    values: list[float] = []
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip().lower() for h in header[:2]] != ["time", "value"]:
            raise DomainError(f"{path}: expected a 'time,value' header")
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) < 2:
                raise DomainError(f"{path}:{lineno}: expected two columns")
            raw_value = row[1].strip()
            if not raw_value or raw_value.lower() in ("nan", "na"):
                continue  # missing value -> gap
            try:
                t = float(row[0])
                v = float(raw_value)
            except ValueError as exc:
                raise DomainError(f"{path}:{lineno}: non-numeric entry") from exc
            times.append(t)
            values.append(v)
    if len(times) < 2:
        raise DomainError(f"{path}: fewer than two usable rows")

    t_arr = np.asarray(times)
    v_arr = np.asarray(values)
    order = np.argsort(t_arr, kind="stable")
    t_arr, v_arr = t_arr[order], v_arr[order]
    diffs = np.diff(t_arr)
    if np.any(diffs <= 0.0):
        raise DomainError(f"{path}: duplicate time stamps")
    delta = _snap_spacing(float(np.min(diffs)))
    # gaps = any jump larger than the base spacing; keep the longest segment
    breaks = np.flatnonzero(diffs > delta + _GRID_TOL)
    segments = np.split(np.arange(len(t_arr)), breaks + 1)
    longest = max(segments, key=len)
    if len(segments) > 1:
        warnings.warn(
            f"{path}: {len(segments) - 1} gap(s); keeping the longest segment "
            f"({len(longest)} of {len(t_arr)} samples)",
            SeriesGapWarning,
            stacklevel=2,
        )
    return RawSeries(times=t_arr[longest], values=v_arr[longest], kind=kind, country=country)


def to_log_rate(open_annual_rate):
    """Continuously compounded log-rate ln(1 + open_rate); scalar or array."""
    arr = np.asarray(open_annual_rate, dtype=float)
    if np.any(arr <= -1.0):
        raise DomainError("open annual rate must exceed -1")
    out = np.log1p(arr)
    return out if out.ndim else float(out)


def inflation_log_rate(cpi: RawSeries, T: float = 10.0) -> InflationSeries:
    """Forward T-year log-inflation c(t) = ln(C(t+T)/C(t)) / T.

    Defined for every t with t+T inside the series, so the output is shorter
    than the input by T/dt samples.  Invariant under CPI rescaling.
    """
    if cpi.kind != CPI_KIND:
        raise DomainError(f"expected a {CPI_KIND} series, got {cpi.kind!r}")
    if T <= 0.0:
        raise DomainError(f"T must be > 0, got {T}")
    dt = cpi.dt
    steps = round(T / dt)
    if abs(T / dt - steps) > _GRID_TOL or steps < 1:
        raise DomainError(f"T={T} must be a whole number of {dt}-year samples")
    n_out = len(cpi) - steps
    if n_out < MIN_SERIES_LENGTH:
        raise InsufficientSpan(
            f"only {max(n_out, 0)} samples remain after the {T}-year lookahead "
            f"(need >= {MIN_SERIES_LENGTH})"
        )
    log_c = np.log(cpi.values)
    c = (log_c[steps:] - log_c[:-steps]) / T
    return InflationSeries(times=cpi.times[:n_out].copy(), values=c, dt=dt)


def real_rate_series(nominal: RawSeries, cpi: RawSeries, T: float = 10.0) -> RateSeries:
    """Real log-rate series r(t) = ln(1 + open(t)) - c(t) on the common grid."""
    if nominal.kind != NOMINAL_KIND:
        raise DomainError(f"expected a {NOMINAL_KIND} series, got {nominal.kind!r}")
    if nominal.country != cpi.country:
        raise AlignmentError(
            f"country mismatch: {nominal.country!r} vs {cpi.country!r}"
        )
    if abs(nominal.dt - cpi.dt) > _GRID_TOL:
        raise AlignmentError(
            f"grid mismatch: nominal dt={nominal.dt}, cpi dt={cpi.dt}"
        )
    dt = nominal.dt
    infl = inflation_log_rate(cpi, T)

    # integer grid keys relative to a common origin make the intersection exact
    origin = min(nominal.times[0], infl.times[0])
    nom_keys = np.rint((nominal.times - origin) / dt).astype(np.int64)
    inf_keys = np.rint((infl.times - origin) / dt).astype(np.int64)
    common, nom_pos, inf_pos = np.intersect1d(nom_keys, inf_keys, return_indices=True)
    if len(common) < MIN_SERIES_LENGTH:
        raise AlignmentError(
            f"series overlap is only {len(common)} samples "
            f"(need >= {MIN_SERIES_LENGTH})"
        )
    b = to_log_rate(nominal.values[nom_pos])
    r = b - infl.values[inf_pos]
    return RateSeries(times=nominal.times[nom_pos], r=r, dt=dt, country=nominal.country)


def negative_rate_summary(series: RateSeries) -> NegativeRateSummary:
    """Fraction of time below zero, the years it amounts to, and the mean depth."""
    negative = series.r < 0.0
    count = int(negative.sum())
    fraction = count / len(series)
    mean_amp = float(np.mean(np.abs(series.r[negative]))) if count else 0.0
    return NegativeRateSummary(
        fraction=fraction,
        total_years=count * series.dt,
        mean_negative_amplitude=mean_amp,
    )
