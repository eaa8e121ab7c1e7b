"""Shared constants and helpers for the test suite."""

from __future__ import annotations

import numpy as np
import pytest

# Default operating point used throughout: eps = 0.01, Omega_0/2pi = 40 kHz,
# delta_0 = 2 eps Omega_0, tau_0 = 2 pi / delta_0 = 1.25 ms.
EPS = 0.01
OMEGA0 = 2.0 * np.pi * 40e3
DELTA0 = 2.0 * EPS * OMEGA0
TAU0 = 2.0 * np.pi / DELTA0


@pytest.fixture(scope="session")
def two_tone_target():
    """2-tone trajectory used as the canonical chunk-matching target."""
    from robustms.mtms import solve_coefficients, tone_pst

    return tone_pst(solve_coefficients(2), EPS, OMEGA0, num_samples=8192)


def random_phase_sequence(rng, n_segments=100, omega0=OMEGA0, delta0=DELTA0):
    """Random bounded phase-modulated sequence for oracle comparisons."""
    from robustms.phasespace import ModulationSequence, Segment

    durations = rng.uniform(0.2, 1.8, n_segments)
    durations *= (2.0 * np.pi / delta0) / durations.sum()
    phases = rng.uniform(-np.pi, np.pi, n_segments)
    segs = tuple(Segment(d, phase=p) for d, p in zip(durations, phases))
    return ModulationSequence("phase", omega0, delta0, 0.0, segs)
