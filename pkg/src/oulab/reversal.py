"""Time reversal, forward/backward grid integrals, and the covariation split.

For the process on [0, 1], the reversal Z-bar_s = Z_{1-s} solves an SDE
whose drift carries the explicit singular coefficient

    c(lam, s) = lam - 2 lam / (1 - e^(2 lam (s-1))) ,

finite on [0, 1) and blowing up like -1/(1-s) at the pinning time s = 1,
where the reversed path is forced back to Z_0 = 0.  On a grid the two
stochastic integrals are the endpoint Riemann sums

    forward  = sum_k b(t_k,     Z_k)     (Z_{k+1} - Z_k)
    backward = sum_k b(t_{k+1}, Z_{k+1}) (Z_{k+1} - Z_k)

whose difference is exactly the discrete covariation
sum_k [b(t_{k+1}, Z_{k+1}) - b(t_k, Z_k)] (Z_{k+1} - Z_k), the grid
version of int b'(s, Z_s) ds.  The same quantity splits into three
pieces through the reversed dynamics:

    int b' ds = -(I1 + I2 + I3),
    I1 = int b(1-s, Z-bar_s) dW-bar_s            (reversed-time Ito sum)
    I2 = int b(u, Z_u) Z_u c(lam, 1-u) du        (back in original time)
    I3 = int b(s, Z_s) dZ_s                      (forward integral)

I2's weight c(lam, 1-u) ~ -1/u is singular at u = 0 and only the
sqrt(u) decay of Z makes the integral converge, so the quadrature runs
on [t_1, 1] and the skipped head is reported through its deterministic
envelope mass (x1 + arctan x1)/sqrt(2 lam), x1 = sqrt(e^(2 lam t_1) - 1)
(the remaining factor, sup |B~_tau|/sqrt(tau) over the head clock, is
finite per path but not observable from the grid).

All integrands here are rank-one (FunctionDescriptor), so every H-valued
quantity is a scalar amplitude times the descriptor's fixed vector;
reports store the signed amplitude scaled by |vector|.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .fnlib import FunctionDescriptor
from .ousim import PathGrid, block_paths_1d
from .parallel import run_blocks

EPS_PIN = 1e-9


def reversed_drift_coefficient(lam, t):
    """c(lam, t) = lam - 2 lam / (1 - e^(2 lam (t-1))) for 0 <= t < 1."""
    lam = float(lam)
    if not math.isfinite(lam) or lam <= 0:
        raise DomainError("rate must be positive and finite")
    t_arr = np.asarray(t, dtype=np.float64)
    if not np.all(np.isfinite(t_arr)) or np.any(t_arr < 0.0):
        raise DomainError("time must be finite and nonnegative")
    if np.any(t_arr >= 1.0 - EPS_PIN):
        raise DomainError(
            f"reversed drift is singular at the pinning time t = 1 (refusing t >= 1 - {EPS_PIN:g})"
        )
    # 1 - e^(2 lam (t-1)) = -expm1(2 lam (t-1)), computed without cancellation
    return lam - 2.0 * lam / (-np.expm1(2.0 * lam * (t_arr - 1.0)))


def reversed_drift(lam, t, x):
    """Drift of the reversed process at (t, x): c(lam, t) * x."""
    return reversed_drift_coefficient(lam, t) * np.asarray(x, dtype=np.float64)


def _check_path(path: PathGrid):
    if not isinstance(path, PathGrid):
        raise DomainError("expected a PathGrid")
    if not np.all(np.isfinite(path.values)):
        raise DomainError("path values must be finite")


def forward_integral(b: FunctionDescriptor, path: PathGrid) -> np.ndarray:
    """Left-endpoint sum: sum_k b(t_k, Z_k) (Z_{k+1} - Z_k), a vector in H."""
    _check_path(path)
    phi = np.asarray(b.profile(path.times, path.values), dtype=np.float64)
    dz = np.diff(path.values)
    return float(np.sum(phi[:-1] * dz)) * b.vector


def backward_integral(b: FunctionDescriptor, path: PathGrid) -> np.ndarray:
    """Right-endpoint sum: sum_k b(t_{k+1}, Z_{k+1}) (Z_{k+1} - Z_k)."""
    _check_path(path)
    phi = np.asarray(b.profile(path.times, path.values), dtype=np.float64)
    dz = np.diff(path.values)
    return float(np.sum(phi[1:] * dz)) * b.vector


def discrete_covariation(b: FunctionDescriptor, path: PathGrid) -> np.ndarray:
    """sum_k [b(t_{k+1}, Z_{k+1}) - b(t_k, Z_k)] (Z_{k+1} - Z_k);
    equals backward - forward to rounding."""
    _check_path(path)
    phi = np.asarray(b.profile(path.times, path.values), dtype=np.float64)
    dz = np.diff(path.values)
    return float(np.sum(np.diff(phi) * dz)) * b.vector


@dataclass(frozen=True)
class DecompositionReport:
    """Signed amplitudes (scaled by |vector|) of the covariation split.

    For a single path the fields are that path's values; aggregated
    reports from covariation_check carry per-path means of the signed
    fields and means of the absolute residuals.

    residual     = |lhs + (i1 + i2 + i3)|   (the three-term split)
    cov_residual = |covariation - lhs|      (the quadrature trend)
    """

    m: int
    n_paths: int
    lhs: float
    covariation: float
    i1: float
    i2: float
    i3: float
    residual: float
    cov_residual: float
    i2_head_mass: float

    def __post_init__(self):
        for name in ("lhs", "covariation", "i1", "i2", "i3", "residual", "cov_residual", "i2_head_mass"):
            if not math.isfinite(getattr(self, name)):
                raise DomainError(f"decomposition field {name} is not finite")


def _i2_head_mass(lam, t1):
    x1 = math.sqrt(math.expm1(2.0 * lam * t1))
    return (x1 + math.atan(x1)) / math.sqrt(2.0 * lam)


def _split_arrays(b: FunctionDescriptor, lam, times, values):
    """Per-path signed amplitudes of (lhs, covariation, i1, i2, i3).

    values: (n, m+1); returns (n, 5).
    """
    m = times.size - 1
    dt = 1.0 / m
    phi = np.asarray(b.profile(times, values), dtype=np.float64)
    dphi = np.asarray(b.profile_dx(times, values), dtype=np.float64)
    dz = np.diff(values, axis=-1)

    lhs = np.trapezoid(dphi, dx=dt, axis=-1)
    cov = np.sum(np.diff(phi, axis=-1) * dz, axis=-1)
    i3 = np.sum(phi[..., :-1] * dz, axis=-1)

    # I2 in original time: weight c(lam, 1-u) on u in [t_1, 1]
    u = times[1:]
    w = reversed_drift_coefficient(lam, 1.0 - u[:-1])
    w = np.concatenate((w, [lam - 2.0 * lam / (-math.expm1(-2.0 * lam))]))  # u = 1 -> c(lam, 0)
    integrand = phi[..., 1:] * values[..., 1:] * w
    i2 = np.trapezoid(integrand, dx=dt, axis=-1)

    # I1 on the reversed path: dW-bar_k = dZ-bar_k - c(s_k) Z-bar_k ds
    zbar = values[..., ::-1]
    phibar = phi[..., ::-1]
    s_left = 1.0 - times[::-1][:-1]  # s_0 = 0, ..., s_{M-1} = 1 - dt
    c_rev = reversed_drift_coefficient(lam, s_left)
    dwbar = np.diff(zbar, axis=-1) - c_rev * zbar[..., :-1] * dt
    i1 = np.sum(phibar[..., :-1] * dwbar, axis=-1)

    return np.stack([lhs, cov, i1, i2, i3], axis=-1)


def decompose_path(b: FunctionDescriptor, path: PathGrid) -> DecompositionReport:
    """Covariation split of one path on [0, 1]; b must be smooth."""
    _check_path(path)
    if not b.smooth:
        raise DomainError(f"descriptor {b.name!r} has no derivative; the split needs b'")
    if abs(path.horizon - 1.0) > 1e-12:
        raise DomainError("the reversal formulas live on the unit interval")
    vals = _split_arrays(b, path.lam, path.times, path.values[np.newaxis, :])[0]
    scale = b.vector_norm
    lhs, cov, i1, i2, i3 = (float(v) * scale for v in vals)
    return DecompositionReport(
        m=path.m,
        n_paths=1,
        lhs=lhs,
        covariation=cov,
        i1=i1,
        i2=i2,
        i3=i3,
        residual=abs(lhs + i1 + i2 + i3),
        cov_residual=abs(cov - lhs),
        i2_head_mass=_i2_head_mass(path.lam, path.times[1]),
    )


def _covariation_block(block, count, seed, lam, m, b):
    times = np.linspace(0.0, 1.0, m + 1)
    values = block_paths_1d(lam, m, seed, b.direction, block)[:count]
    return _split_arrays(b, lam, times, values)


def covariation_check(b: FunctionDescriptor, lam, m_list, n_paths, seed, workers=1):
    """Refinement trend of the covariation identity.

    For each M, samples n_paths fresh paths, averages the split, and
    reports mean |backward - forward - int b' dt| as cov_residual.  The
    sequence of cov_residual means should decrease along m_list (the
    claim is convergence in probability; no rate is asserted).
    """
    if not b.smooth:
        raise DomainError(f"descriptor {b.name!r} has no derivative; the split needs b'")
    m_list = [int(m) for m in m_list]
    if any(m2 <= m1 for m1, m2 in zip(m_list, m_list[1:])):
        raise DomainError("m_list must be strictly increasing")
    lam = float(lam)
    reports = []
    for m in m_list:
        arr = run_blocks(_covariation_block, n_paths, workers, (seed, lam, m, b))
        scale = b.vector_norm
        lhs, cov, i1, i2, i3 = (arr[:, j] * scale for j in range(5))
        reports.append(
            DecompositionReport(
                m=m,
                n_paths=n_paths,
                lhs=float(np.mean(lhs)),
                covariation=float(np.mean(cov)),
                i1=float(np.mean(i1)),
                i2=float(np.mean(i2)),
                i3=float(np.mean(i3)),
                residual=float(np.mean(np.abs(lhs + i1 + i2 + i3))),
                cov_residual=float(np.mean(np.abs(cov - lhs))),
                i2_head_mass=_i2_head_mass(lam, 1.0 / m),
            )
        )
    return reports


def trend_decreasing(values, allowed_violations=1) -> bool:
    """Monotone-decrease check with a tolerance for MC noise."""
    violations = sum(1 for a, b in zip(values, values[1:]) if b >= a)
    return violations <= allowed_violations
