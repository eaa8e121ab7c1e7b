"""Phase-space trajectories, exact functionals, and infidelity models."""

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from robustms.phasespace import (
    ModeSpec,
    ModulationSequence,
    Segment,
    cat_probability,
    compute_pst,
    entangling_phase,
    heating_infidelity,
    primitive_sequence,
    quadratic_sensitivity,
    quadratic_sensitivity_fd,
    robustness_report,
    sequence_functionals,
)

from conftest import DELTA0, EPS, OMEGA0, TAU0, random_phase_sequence


def test_primitive_loop_invariants():
    mod = primitive_sequence(OMEGA0, EPS)
    mode = ModeSpec(EPS, DELTA0)
    rep = robustness_report(compute_pst(mod, mode), TAU0)
    assert rep.closure < 1e-18
    assert abs(rep.mean_square - 0.5) < 1e-12
    assert abs(rep.r_heat - 1.0) < 1e-12
    assert abs(rep.r_time - 1.0) < 1e-12
    assert abs(entangling_phase(mod, mode) - np.pi / 2.0) < 1e-12


def test_exact_functionals_vs_fine_grid_quadrature():
    rng = np.random.default_rng(3)
    mod = random_phase_sequence(rng, n_segments=100)
    mode = ModeSpec(EPS, DELTA0)
    f = sequence_functionals(mod, mode)
    traj = compute_pst(mod, mode, num_samples=400_000)
    t, a = traj.times, traj.alpha
    assert abs(a[-1] - f.alpha_end) < 1e-9
    assert abs(np.trapezoid(a, t) - f.int_alpha) < 1e-9 * TAU0
    assert abs(np.trapezoid(np.abs(a) ** 2, t) - f.int_abs2) < 1e-9 * TAU0
    area_num = np.sum(np.imag(np.conj(a[:-1] + a[1:]) / 2.0 * np.diff(a)))
    assert abs(area_num - f.area) < 1e-6
    assert abs(np.trapezoid(t * a, t) - f.int_t_alpha) < 1e-9 * TAU0**2


@given(seed=st.integers(0, 10_000))
@settings(max_examples=40, deadline=None)
def test_mirror_symmetry_with_zero_mean_implies_closure(seed):
    # phases with phi_{n-1-j} = -phi_j at constant detuning
    rng = np.random.default_rng(seed)
    half = rng.uniform(-np.pi, np.pi, 8)
    phases = np.concatenate([half, -half[::-1]])
    dur = TAU0 / len(phases)
    segs = tuple(Segment(dur, phase=float(p)) for p in phases)
    mod = ModulationSequence("phase", OMEGA0, DELTA0, 0.0, segs)
    f = sequence_functionals(mod, ModeSpec(EPS, DELTA0))
    if abs(f.int_alpha) / mod.duration < 1e-10:
        assert abs(f.alpha_end) < 1e-10


def test_mirror_symmetric_endpoint_is_real():
    # the mirror construction collapses the closure condition to a single
    # real equation: the endpoint always lies on the real axis
    rng = np.random.default_rng(11)
    for _ in range(25):
        half = rng.uniform(-np.pi, np.pi, 6)
        phases = np.concatenate([half, -half[::-1]])
        dur = TAU0 / len(phases)
        segs = tuple(Segment(dur, phase=float(p)) for p in phases)
        mod = ModulationSequence("phase", OMEGA0, DELTA0, 0.0, segs)
        f = sequence_functionals(mod, ModeSpec(EPS, DELTA0))
        assert abs(f.alpha_end.imag) < 1e-12


@given(seed=st.integers(0, 10_000))
@settings(max_examples=30, deadline=None)
def test_quadratic_sensitivity_matches_finite_differences(seed):
    rng = np.random.default_rng(seed)
    mod = random_phase_sequence(rng, n_segments=12)
    mode = ModeSpec(EPS, DELTA0)
    exact = quadratic_sensitivity(mod, mode)
    fd = quadratic_sensitivity_fd(mod, mode)
    assert abs(exact - fd) <= 0.01 * max(abs(exact), abs(fd))


def test_heating_infidelity_forms():
    assert heating_infidelity(0.5, 0.0, 1.0) == 5.0 / 8.0 - 0.5 - 0.125
    x = 0.02
    lin = heating_infidelity(1.0, x, 1.0, order="linear")
    ex = heating_infidelity(1.0, x, 1.0, order="exact")
    assert abs(lin - x) < 1e-15
    assert 0 < ex < lin
    assert abs(ex - lin) < 3.0 * x**2


def test_cat_probability_limits():
    mod = primitive_sequence(OMEGA0, EPS)
    # at a detuning far from closure the endpoint is displaced
    traj = compute_pst(mod, ModeSpec(EPS, 1.2 * DELTA0))
    p0 = cat_probability(traj, 0.0)
    p5 = cat_probability(traj, 5.0)
    assert 0.0 < p0 < 0.5
    assert p5 > p0  # monotone in n_bar at fixed displacement
    closed = compute_pst(mod, ModeSpec(EPS, DELTA0))
    assert cat_probability(closed, 0.0) < 1e-12
    # |alpha|^2 = 0.5 reference point: P = (1 - e^-1)/2
    a2 = 0.5
    assert abs(0.5 * (1 - np.exp(-2 * a2)) - 0.5 * (1 - np.exp(-1.0))) < 1e-15


def test_trajectory_csv_roundtrip(tmp_path):
    mod = primitive_sequence(OMEGA0, EPS)
    traj = compute_pst(mod, ModeSpec(EPS, DELTA0), num_samples=32)
    path = tmp_path / "traj.csv"
    traj.to_csv(str(path))
    data = np.loadtxt(path, delimiter=",", skiprows=1)
    assert np.allclose(data[:, 0], traj.times, atol=1e-15)
    assert np.allclose(data[:, 1] + 1j * data[:, 2], traj.alpha, atol=1e-11)
