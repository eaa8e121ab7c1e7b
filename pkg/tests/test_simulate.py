"""Monte-Carlo gate runner, scan containers, and analytic bounds."""

import numpy as np
import pytest

from robustms.core import SchemeParams
from robustms.noise import OUParams
from robustms.simulate import (
    GateResult,
    ScanResult,
    SimulationScenario,
    region_encloses,
    run_gate,
    spectator_mode_bound,
)

from conftest import DELTA0, EPS, OMEGA0


def _params(**kw):
    kw.setdefault("eps", EPS)
    kw.setdefault("omega0", OMEGA0)
    kw.setdefault("fock_cutoff", 12)
    return SchemeParams(**kw)


def test_noise_free_primitive_gate():
    res = run_gate(SimulationScenario(params=_params()))
    assert res.infidelity < 1e-6
    assert res.stderr == 0.0
    assert abs(res.infidelity - res.reference_infidelity) < 1e-12
    assert len(res.fidelities) == 1


def test_seed_determinism_and_ensemble_statistics():
    sc = dict(
        params=_params(fock_cutoff=6),
        noise_z=OUParams(correlation_time=1.0, stationary_std=500.0),
        ensemble=8,
    )
    a = run_gate(SimulationScenario(**sc, master_seed=1))
    b = run_gate(SimulationScenario(**sc, master_seed=1))
    c = run_gate(SimulationScenario(**sc, master_seed=2))
    assert np.array_equal(a.fidelities, b.fidelities)
    assert a.infidelity == b.infidelity and a.stderr == b.stderr
    assert not np.array_equal(a.fidelities, c.fidelities)
    assert a.stderr > 0.0
    assert a.infidelity > a.reference_infidelity


def test_scenario_validation():
    with pytest.raises(ValueError):
        SimulationScenario(scheme="other")
    with pytest.raises(ValueError):
        SimulationScenario(scheme="pdd", n_pulses=0)
    with pytest.raises(ValueError):
        SimulationScenario(pdd_variant="spiral", scheme="pdd", n_pulses=2)
    with pytest.raises(ValueError):
        SimulationScenario(ensemble=0)
    with pytest.raises(ValueError):
        SimulationScenario(n_bar=-1.0)


def test_region_encloses_logic():
    outer = np.array([[0.999, 0.999], [0.999, 0.90]])
    inner = np.array([[0.999, 0.90], [0.90, 0.90]])
    assert region_encloses(outer, inner, 1e-2)
    assert not region_encloses(inner, outer, 1e-2)
    # identical surfaces enclose themselves
    assert region_encloses(outer, outer, 1e-2)


def test_scan_result_csv(tmp_path):
    res = ScanResult(
        axes={"x": np.array([1.0, 2.0])},
        mean_infidelity=np.array([0.1, 0.2]),
        stderr=np.array([0.01, 0.02]),
        n_traj=np.array([5.0, 5.0]),
    )
    path = tmp_path / "scan.csv"
    res.to_csv(str(path), header_comment="seed: 0")
    lines = path.read_text().splitlines()
    assert lines[0] == "# seed: 0"
    assert lines[1] == "x,mean_infidelity,stderr,n_traj"
    assert lines[2] == "1,0.1,0.01,5"
    with pytest.raises(ValueError):
        ScanResult(
            axes={"x": np.array([1.0])},
            mean_infidelity=np.array([0.1, 0.2]),
            stderr=np.array([0.01, 0.02]),
            n_traj=np.array([5.0, 5.0]),
        )


def test_spectator_bound_properties():
    nu = 2.0 * np.pi * 220e3
    om = 2.0 * np.pi * 30e3
    b = spectator_mode_bound(25.0, nu, om, mode="com")
    assert b.infidelity > 0 and b.alpha_max > 0
    assert abs(b.detuning_gap - (np.sqrt(3.0) - 1.0) * nu) < 1e-6
    # quadratic in the gradient while the excitation stays small
    b2 = spectator_mode_bound(50.0, nu, om, mode="com")
    assert abs(b2.infidelity / b.infidelity - 4.0) < 0.05
    # no drive, no excitation
    assert spectator_mode_bound(25.0, nu, 0.0).infidelity == 0.0
    with pytest.raises(ValueError):
        spectator_mode_bound(-1.0, nu, om)
    with pytest.raises(ValueError):
        spectator_mode_bound(25.0, 0.0, om)


def test_gate_result_is_frozen():
    res = GateResult(0.0, 0.0, np.array([1.0]), 0.0, 0.0)
    with pytest.raises(AttributeError):
        res.infidelity = 1.0
