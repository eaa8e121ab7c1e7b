"""Power spectral densities and stochastic noise trajectories.

Dephasing noise beta_z(t) (rad/s) and fractional amplitude noise beta_x(t)
(dimensionless) are modelled as stationary Ornstein-Uhlenbeck processes.
The two-sided PSD convention is S(omega) = integral <b(0)b(t)> e^{-i omega t} dt,
so the OU process has the Lorentzian S(omega) = 2 sigma^2 tau_c / (1 + omega^2 tau_c^2)
and (1/2pi) integral S d omega = sigma^2.

Amplitude noise is applied multiplicatively as Omega -> (1 + beta_x(t)) Omega,
i.e. beta_x is the fractional error of the drive amplitude.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .core import TimeGrid


@dataclass(frozen=True)
class OUParams:
    """Stationary Ornstein-Uhlenbeck process parameters."""

    correlation_time: float  # seconds
    stationary_std: float  # rad/s for beta_z, dimensionless for beta_x

    def __post_init__(self) -> None:
        if self.correlation_time <= 0:
            raise ValueError("correlation_time must be > 0")
        if self.stationary_std < 0:
            raise ValueError("stationary_std must be >= 0")


@dataclass(frozen=True)
class PowerSpectralDensity:
    """Two-sided PSD.  kind: white | lorentzian | tabulated."""

    kind: str
    level: float = 0.0  # white: S(omega) = level
    ou: OUParams | None = None
    omega_table: np.ndarray | None = None
    s_table: np.ndarray | None = None

    def __call__(self, omega):
        omega = np.asarray(omega, dtype=float)
        if self.kind == "white":
            return np.full_like(omega, self.level)
        if self.kind == "lorentzian":
            tc, sig = self.ou.correlation_time, self.ou.stationary_std
            return 2 * sig**2 * tc / (1 + (omega * tc) ** 2)
        if self.kind == "tabulated":
            # symmetric in omega; linear interpolation, zero outside the table
            return np.interp(np.abs(omega), self.omega_table, self.s_table,
                             left=self.s_table[0], right=0.0)
        raise ValueError(f"unknown PSD kind {self.kind!r}")


@dataclass(frozen=True)
class NoiseTrajectory:
    samples: np.ndarray
    seed: int


def white_psd(level: float) -> PowerSpectralDensity:
    return PowerSpectralDensity("white", level=level)


def ou_psd(params: OUParams) -> PowerSpectralDensity:
    return PowerSpectralDensity("lorentzian", ou=params)


def tabulated_psd_from_csv(path: str) -> PowerSpectralDensity:
    """Load a two-column CSV (omega [rad/s], S [rad^2/s per rad/s])."""
    omegas, values = [], []
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            if not row or row[0].lstrip().startswith("#"):
                continue
            omegas.append(float(row[0]))
            values.append(float(row[1]))
    omega = np.asarray(omegas)
    vals = np.asarray(values)
    if np.any(vals < 0):
        raise ValueError("PSD values must be >= 0")
    order = np.argsort(omega)
    return PowerSpectralDensity("tabulated", omega_table=omega[order], s_table=vals[order])


def sample_ou(params: OUParams, grid: TimeGrid, seed: int) -> NoiseTrajectory:
    """Exact discrete OU update with stationary initialization.

    x_{k+1} = rho x_k + sigma sqrt(1 - rho^2) w_k,  rho = exp(-dt/tau_c),
    which is free of step-size bias for any dt.
    """
    rng = np.random.default_rng(seed)
    n = grid.num_steps + 1
    sig = params.stationary_std
    if sig == 0.0:
        return NoiseTrajectory(np.zeros(n), seed)
    rho = np.exp(-grid.dt / params.correlation_time)
    x = np.empty(n)
    x[0] = sig * rng.standard_normal()
    innov = sig * np.sqrt(1 - rho**2) * rng.standard_normal(n - 1)
    for k in range(1, n):
        x[k] = rho * x[k - 1] + innov[k - 1]
    return NoiseTrajectory(x, seed)


def ou_chi_fid(params: OUParams, t: float) -> float:
    """Free-induction-decay decoherence exponent of OU dephasing.

    chi(t) = sigma^2 tau_c^2 (t/tau_c - 1 + e^{-t/tau_c}); the quasi-static
    limit gives sigma^2 t^2 / 2 and the white limit sigma^2 tau_c t.
    """
    tc, sig = params.correlation_time, params.stationary_std
    u = t / tc
    # series for small u to avoid cancellation
    if u < 1e-4:
        core = u**2 / 2 - u**3 / 6
    else:
        core = u - 1 + np.exp(-u)
    return sig**2 * tc**2 * core


def calibrate_to_t2(t2_target: float, correlation_time: float) -> OUParams:
    """Find the OU stationary_std whose FID coherence crosses e^{-1} at
    t2_target, i.e. chi(t2_target) = 1."""
    if t2_target <= 0:
        raise ValueError("t2_target must be > 0")

    def resid(sig):
        return ou_chi_fid(OUParams(correlation_time, sig), t2_target) - 1.0

    hi = 10.0 / t2_target
    while resid(hi) < 0:
        hi *= 4
        if hi > 1e15:
            raise RuntimeError("calibration root find failed to bracket")
    sig = brentq(resid, 0.0, hi, xtol=1e-14, rtol=1e-12)
    return OUParams(correlation_time, sig)
