"""Noise-robust Molmer-Sorensen gates for trapped ions.

Library layers:

- ``core``: Hilbert-space construction, operators, states, integrators.
- ``noise``: power spectral densities and Ornstein-Uhlenbeck sampling.
- ``spin``: filter functions and analytic infidelity models for pulsed,
  continuous, and multi-level continuous dynamical decoupling.
- ``phasespace``: phase-space trajectories (PSTs) of the state-dependent
  motional displacement and their robustness functionals.
- ``mtms``: multi-tone gate coefficients and scaling factors.
- ``synthesis``: modulation-sequence generation (chunk matching and
  constrained area maximization).
- ``caldag``: calibration dependency graphs.
- ``simulate``: scenario-level Monte-Carlo and master-equation studies.
- ``cli``: config-driven command-line front end.
"""

__version__ = "0.1.0"

from .caldag import CalEdge, CalGraph, CalNode, build_preset, invalidate
from .core import SchemeParams, build_hamiltonian
from .mtms import ToneSet, solve_coefficients, tone_metrics, tone_pst
from .noise import OUParams, PowerSpectralDensity, calibrate_to_t2
from .phasespace import (
    ModeSpec,
    ModulationSequence,
    Segment,
    Trajectory,
    compute_pst,
    primitive_sequence,
    robustness_report,
)
from .simulate import (
    GateResult,
    SimulationScenario,
    run_cat_scan,
    run_gate,
    run_heating_scan,
    run_thermal_comparison,
    scan_static_shift,
)
from .spin import numeric_filter_function, static_threshold
from .synthesis import (
    MatchResult,
    OptimizedSequence,
    OptimizerConfig,
    SynthesisTarget,
    match_target_pst,
    optimize_pst,
    rebase_carrier,
)

__all__ = [
    "CalEdge",
    "CalGraph",
    "CalNode",
    "GateResult",
    "MatchResult",
    "ModeSpec",
    "ModulationSequence",
    "OptimizedSequence",
    "OptimizerConfig",
    "OUParams",
    "PowerSpectralDensity",
    "SchemeParams",
    "Segment",
    "SimulationScenario",
    "SynthesisTarget",
    "ToneSet",
    "Trajectory",
    "build_hamiltonian",
    "build_preset",
    "calibrate_to_t2",
    "compute_pst",
    "invalidate",
    "match_target_pst",
    "numeric_filter_function",
    "optimize_pst",
    "primitive_sequence",
    "rebase_carrier",
    "robustness_report",
    "run_cat_scan",
    "run_gate",
    "run_heating_scan",
    "run_thermal_comparison",
    "scan_static_shift",
    "solve_coefficients",
    "static_threshold",
    "tone_metrics",
    "tone_pst",
]
