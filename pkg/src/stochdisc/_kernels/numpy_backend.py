"""Pure-numpy simulation kernel; the import-time fallback for the compiled core.

Identical noise and identical arithmetic (up to last-ulp differences in the
transcendental functions) to ``_core.pyx``.
"""

from __future__ import annotations

import math

import numpy as np

from .philox import normal_matrix

KIND_OU = 0
KIND_FELLER = 1
KIND_LOGNORMAL = 2

BACKEND_NAME = "numpy"


def simulate_block(
    kind: int,
    p0: float,
    p1: float,
    p2: float,
    r0: float,
    dt: float,
    n_steps: int,
    sample_idx: np.ndarray,
    seed: int,
    path_start: int,
    n_paths: int,
    out_x: np.ndarray,
    first_counted_step: int,
) -> int:
    """Simulate one block of paths and record integrated rates.

    For each path, steps the rate process n_steps times and accumulates
    x(t) = integral of r dt by the trapezoid rule.  Writes x at the step
    indices in ``sample_idx`` (ascending, values in [0, n_steps]) into
    ``out_x`` (shape (n_paths, len(sample_idx))).  Returns the number of
    (path, step) samples with r < 0 among steps >= first_counted_step.

    Model parameters: OU/Feller use (p0, p1, p2) = (m, alpha, k); the
    geometric model uses (p0, p1) = (a, b).
    """
    sample_idx = np.asarray(sample_idx, dtype=np.int64)
    z = normal_matrix(seed, path_start, n_paths, n_steps)
    r = np.full(n_paths, r0)
    x = np.zeros(n_paths)
    neg = 0

    if kind == KIND_OU:
        m, alpha, k = p0, p1, p2
        decay = math.exp(-alpha * dt)
        sd = math.sqrt(k * k * (-math.expm1(-2.0 * alpha * dt)) / (2.0 * alpha))
    elif kind == KIND_FELLER:
        m, alpha, k = p0, p1, p2
        adt = alpha * dt
        sq = k * math.sqrt(dt)
    elif kind == KIND_LOGNORMAL:
        a, b = p0, p1
        gdt = (a - 0.5 * b * b) * dt
        sq = b * math.sqrt(dt)
    else:
        raise ValueError(f"unknown model kind {kind}")

    ptr = 0
    if ptr < len(sample_idx) and sample_idx[ptr] == 0:
        out_x[:, ptr] = 0.0
        ptr += 1

    half_dt = 0.5 * dt
    for j in range(1, n_steps + 1):
        zj = z[:, j - 1]
        if kind == KIND_OU:
            r_new = (m + (r - m) * decay) + sd * zj
        elif kind == KIND_FELLER:
            r_plus = np.maximum(r, 0.0)
            r_new = (r + (m - r_plus) * adt) + (sq * np.sqrt(r_plus)) * zj
            r_new = np.maximum(r_new, 0.0)
        else:
            r_new = r * np.exp(gdt + sq * zj)
        x = x + (r + r_new) * half_dt
        r = r_new
        if j >= first_counted_step:
            neg += int(np.count_nonzero(r < 0.0))
        if ptr < len(sample_idx) and sample_idx[ptr] == j:
            out_x[:, ptr] = x
            ptr += 1
    return neg
