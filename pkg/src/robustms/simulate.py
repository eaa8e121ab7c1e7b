"""Scenario-level gate simulations.

Monte-Carlo noisy gates for the pulsed, continuous, and multi-level
continuous decoupling schemes, static-shift scans with contour fits,
Lindblad heating scans, thermal primitive-vs-robust comparisons,
single-ion cat-state scans, and spectator-mode excitation bounds.

All stochastic runs derive per-trajectory seeds from a master seed via
``numpy.random.SeedSequence`` so results are bit-reproducible regardless
of how trajectories are scheduled.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from .core import (
    LVL_0P,
    LVL_M1,
    LVL_P1,
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
    SchemeParams,
    SpaceSpec,
    best_bell_fidelity,
    bell_fidelity,
    collective,
    destroy,
    embed_osc,
    heating_collapse_ops,
    ket,
    kron_all,
    mlcdd_dd_hamiltonian,
    dephasing_operator,
)
from .noise import OUParams
from .phasespace import (
    ModeSpec,
    ModulationSequence,
    Segment,
    Trajectory,
    compute_pst,
    cat_probability,
    heating_infidelity,
    primitive_sequence,
    robustness_report,
)
from .spin import flower_timing, periodic_sequence


class RotatingWaveWarning(UserWarning):
    """A parameter regime strains a rotating-wave approximation."""


# ---------------------------------------------------------------------------
# Scenario definition
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SimulationScenario:
    """One noisy-gate configuration.

    ``modulation`` drives the sideband pair; when omitted the single-loop
    constant-parameter sequence implied by ``params`` is used.  For the
    pulsed scheme the petal construction replaces the modulation and
    ``n_pulses`` sets the pulse count; ``pdd_variant`` selects petal
    ("flower"), symmetric x-axis pulses at (j - 1/2) tau / N ("echo"), or
    x-axis pulses at j tau / (N + 1) ("uniform").  The uniform layout does
    not refocus a static shift at first order for even pulse counts, which
    makes it the natural choice for static-shift robustness scans.
    """

    scheme: str = "primitive"  # primitive | pdd | cdd | mlcdd
    params: SchemeParams = field(default_factory=SchemeParams)
    modulation: ModulationSequence | None = None
    n_pulses: int = 0
    pdd_variant: str = "flower"  # flower | echo
    n_flips: int = 0  # cdd rotary-echo phase flips
    noise_z: OUParams | None = None
    noise_x: OUParams | None = None
    n_bar: float = 0.0
    ensemble: int = 200
    master_seed: int = 0
    steps_per_period: int = 24
    min_steps: int = 600

    def __post_init__(self) -> None:
        if self.scheme not in ("primitive", "pdd", "cdd", "mlcdd"):
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if self.ensemble < 1:
            raise ValueError("ensemble must be >= 1")
        if self.n_bar < 0 or self.n_pulses < 0 or self.n_flips < 0:
            raise ValueError("counts and rates must be >= 0")
        if self.scheme == "pdd" and self.n_pulses < 1:
            raise ValueError("pdd needs n_pulses >= 1")
        if self.pdd_variant not in ("flower", "echo", "uniform"):
            raise ValueError(f"unknown pdd variant {self.pdd_variant!r}")


@dataclass(frozen=True)
class GateResult:
    infidelity: float
    stderr: float
    fidelities: np.ndarray
    target_phase: float
    reference_infidelity: float


@dataclass
class ScanResult:
    """Tabular scan output: named axis columns plus per-point statistics."""

    axes: dict[str, np.ndarray]
    mean_infidelity: np.ndarray
    stderr: np.ndarray
    n_traj: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        n = len(self.mean_infidelity)
        for name, col in self.axes.items():
            if len(col) != n:
                raise ValueError(f"axis {name!r} length mismatch")
        if len(self.stderr) != n or len(self.n_traj) != n:
            raise ValueError("column length mismatch")

    def to_csv(self, path: str, header_comment: str = "") -> None:
        cols = list(self.axes.keys()) + ["mean_infidelity", "stderr", "n_traj"]
        data = list(self.axes.values()) + [
            self.mean_infidelity,
            self.stderr,
            self.n_traj,
        ]
        with open(path, "w") as fh:
            if header_comment:
                for line in header_comment.splitlines():
                    fh.write(f"# {line}\n")
            fh.write(",".join(cols) + "\n")
            for row in zip(*data):
                fh.write(",".join(f"{v:.12g}" for v in row) + "\n")


# ---------------------------------------------------------------------------
# Gate setup: matrices, coefficient functions, events
# ---------------------------------------------------------------------------


def _pi_unitary(axis_op: np.ndarray, space: SpaceSpec) -> np.ndarray:
    """Instantaneous collective pi rotation exp(-i pi sigma_axis / 2) per ion."""
    r = -1j * axis_op
    mats = [r] * space.num_ions + [np.eye(space.fock_cutoff, dtype=complex)]
    return kron_all(*mats)


def _modulation_coeff(mod: ModulationSequence, eps: float, delta_offset: float = 0.0):
    """Coefficient of the S_x a-dagger term, (eps Omega(t)/2) e^{i(theta - phi)}
    with theta(t) the accumulated detuning phase.  Returns (coeff fn, interior
    segment edges)."""
    dur, amp, det, phi = mod.arrays()
    det = det + delta_offset
    edges = np.concatenate([[0.0], np.cumsum(dur)])
    theta0 = np.concatenate([[0.0], np.cumsum(det * dur)])[:-1]
    last = len(dur) - 1

    def coeff(t: float) -> complex:
        k = min(max(int(np.searchsorted(edges, t, side="right")) - 1, 0), last)
        theta = theta0[k] + det[k] * (t - edges[k])
        return 0.5 * eps * amp[k] * np.exp(1j * (theta - phi[k]))

    return coeff, tuple(edges[1:-1])


def _flip_sign(flip_times: tuple[float, ...]):
    ft = np.asarray(flip_times)

    def sign(t: float) -> float:
        return (-1.0) ** int(np.searchsorted(ft, t, side="right"))

    return sign


def _dressed_projector(space: SpaceSpec) -> np.ndarray:
    """Isometry from the dressed two-qubit (x) oscillator space into the full
    4-level space: qubit |0> -> |0'>, qubit |1> -> |D> = (|-1>+|+1>)/sqrt(2)."""
    v = np.zeros((4, 2), dtype=complex)
    v[LVL_0P, 0] = 1.0
    v[LVL_M1, 1] = v[LVL_P1, 1] = 1.0 / np.sqrt(2.0)
    mats = [v] * space.num_ions + [np.eye(space.fock_cutoff, dtype=complex)]
    return kron_all(*mats)


def _control_field_operator(space: SpaceSpec) -> np.ndarray:
    """Per-ion (|D><D| - |0'><0'|)/2 summed over ions: a static misset of the
    dressing-field frequency as seen by the dressed qubit."""
    d = np.zeros(4, dtype=complex)
    d[LVL_M1] = d[LVL_P1] = 1.0 / np.sqrt(2.0)
    op = np.outer(d, d.conj())
    op[LVL_0P, LVL_0P] = -1.0
    return 0.5 * collective(op, space)


def _default_sequence(p: SchemeParams) -> ModulationSequence:
    """Single-loop constant-parameter sequence honoring the params' detuning
    (which may differ from 2 eps Omega_0, e.g. for the dressed-qubit RF
    drive whose effective Rabi frequency carries a 1/sqrt(2))."""
    delta0 = p.detuning
    return ModulationSequence(
        "phase", p.omega0, delta0, 0.0, (Segment(2.0 * np.pi / delta0),)
    )


@dataclass
class _GateSetup:
    space: SpaceSpec
    tau: float
    terms: list  # [(matrix, coeff fn)]
    hz: np.ndarray | None  # operator multiplied by beta_z(t)
    hx: tuple[np.ndarray, object] | None  # (matrix, coeff fn) multiplied by beta_x(t)
    psi0: np.ndarray
    events: list  # [(time, unitary)]
    cuts: tuple[float, ...]
    project: np.ndarray | None  # isometry for dressed-qubit scoring
    max_freq: float


def build_gate_setup(scenario: SimulationScenario, noise_variant: str = "b-field") -> _GateSetup:
    p = scenario.params
    eps = p.eps
    if p.omega_c >= p.nu / 3.0 and p.omega_c > 0:
        warnings.warn(
            f"omega_c = {p.omega_c:.3g} is within 3x of nu = {p.nu:.3g}; "
            "rotating-wave treatment of the carrier is strained",
            RotatingWaveWarning,
        )

    events: list = []
    if scenario.scheme == "pdd":
        if scenario.pdd_variant == "flower":
            ft = flower_timing(scenario.n_pulses, eps * p.omega0)
            mod = ModulationSequence("phase", p.omega0, ft.delta, 0.0, (Segment(ft.tau),))
            pulse_times = ft.pulse_times
            axis = SIGMA_Y
        else:
            mod = scenario.modulation or _default_sequence(p)
            n = scenario.n_pulses
            if scenario.pdd_variant == "uniform":
                timings = tuple(j / (n + 1.0) for j in range(1, n + 1))
            else:
                timings = periodic_sequence(n).timings
            pulse_times = tuple(x * mod.duration for x in timings)
            axis = SIGMA_X
    else:
        mod = scenario.modulation or _default_sequence(p)
        pulse_times = ()
        axis = None

    tau = mod.duration

    if scenario.scheme in ("primitive", "pdd", "cdd"):
        space = SpaceSpec(p.num_ions, 2, p.fock_cutoff)
        a = destroy(space.fock_cutoff)
        sx = collective(SIGMA_X, space)
        sx_ad = sx @ embed_osc(a.conj().T, space)
        cplus, mod_edges = _modulation_coeff(mod, eps)
        terms = [
            (sx_ad, cplus),
            (sx_ad.conj().T, lambda t, c=cplus: np.conj(c(t))),
        ]
        cuts = set(mod_edges)
        hz = dephasing_operator(space)
        hx = None
        if scenario.scheme == "cdd" and p.omega_c > 0:
            carrier = 0.5 * p.omega_c * sx
            if scenario.n_flips > 0:
                flips = tuple(
                    x * tau for x in periodic_sequence(scenario.n_flips).timings
                )
                sgn = _flip_sign(flips)
                cuts |= set(flips)
            else:
                sgn = lambda t: 1.0
            terms.append((carrier, sgn))
            hx = (carrier, sgn)
        if scenario.scheme == "pdd":
            u = _pi_unitary(axis, space)
            events = [(t, u) for t in pulse_times]
            cuts |= set(pulse_times)
        psi0 = ket(0, 0, 0, dims=(2, 2, space.fock_cutoff))
        project = None
        dur, amp, det, _ = mod.arrays()
        max_freq = max(float(np.max(np.abs(det))), p.omega_c, eps * float(np.max(amp)))
    elif scenario.scheme == "mlcdd":
        space = SpaceSpec(p.num_ions, 4, p.fock_cutoff)
        a = destroy(space.fock_cutoff)
        adag = a.conj().T

        def lvl(bra, kt):
            m = np.zeros((4, 4), dtype=complex)
            m[bra, kt] = 1.0
            return m

        blue = collective(lvl(LVL_P1, LVL_0P), space) @ embed_osc(adag, space)
        red = collective(lvl(LVL_M1, LVL_0P), space) @ embed_osc(a, space)
        cplus, mod_edges = _modulation_coeff(mod, eps)
        # blue rotates against the accumulated phase, red with it
        terms = [
            (blue, lambda t, c=cplus: np.conj(c(t))),
            (blue.conj().T, cplus),
            (red, cplus),
            (red.conj().T, lambda t, c=cplus: np.conj(c(t))),
        ]
        cuts = set(mod_edges)
        dressing = mlcdd_dd_hamiltonian(p, space)
        terms.append((dressing, lambda t: 1.0))
        hx = (dressing, lambda t: 1.0)
        if noise_variant == "b-field":
            hz = dephasing_operator(space)
        elif noise_variant == "control-field":
            hz = _control_field_operator(space)
        else:
            raise ValueError(f"unknown mlcdd noise variant {noise_variant!r}")
        psi0 = ket(LVL_0P, LVL_0P, 0, dims=(4, 4, space.fock_cutoff))
        project = _dressed_projector(space)
        dur, amp, det, _ = mod.arrays()
        max_freq = max(float(np.max(np.abs(det))), p.omega_c, eps * float(np.max(amp)))
    else:  # pragma: no cover - guarded by scenario validation
        raise ValueError(scenario.scheme)

    return _GateSetup(
        space=space,
        tau=tau,
        terms=terms,
        hz=hz,
        hx=hx,
        psi0=psi0,
        events=sorted(events),
        cuts=tuple(sorted(cuts)),
        project=project,
        max_freq=max_freq,
    )


# ---------------------------------------------------------------------------
# Batched noisy propagation
# ---------------------------------------------------------------------------


def _step_edges(tau: float, cuts, n_steps: int) -> np.ndarray:
    pts = np.array(sorted({0.0, tau} | {c for c in cuts if 0.0 < c < tau}))
    out = [np.array([0.0])]
    for a, b in zip(pts[:-1], pts[1:]):
        n = max(1, int(round(n_steps * (b - a) / tau)))
        out.append(np.linspace(a, b, n + 1)[1:])
    return np.concatenate(out)


def _num_steps(scenario: SimulationScenario, setup: _GateSetup) -> int:
    periods = setup.max_freq * setup.tau / (2.0 * np.pi)
    return max(scenario.min_steps, int(np.ceil(scenario.steps_per_period * periods)))


def _ou_on_edges(params: OUParams, edges: np.ndarray, rng) -> np.ndarray:
    """OU values at each step's start time (one value per step), exact
    discrete update over the nonuniform step lengths."""
    n = len(edges) - 1
    sig = params.stationary_std
    if sig == 0.0:
        return np.zeros(n)
    dts = np.diff(edges[:-1], prepend=edges[0])
    rho = np.exp(-dts / params.correlation_time)
    w = rng.standard_normal(n)
    x = np.empty(n)
    x[0] = sig * w[0]
    scale = sig * np.sqrt(1.0 - rho**2)
    for k in range(1, n):
        x[k] = rho[k] * x[k - 1] + scale[k] * w[k]
    return x


def _propagate(
    setup: _GateSetup,
    edges: np.ndarray,
    psi0: np.ndarray,
    beta_z: np.ndarray | None = None,
    beta_x: np.ndarray | None = None,
) -> np.ndarray:
    """RK4 propagation of a batch of kets (columns) under the deterministic
    terms plus per-column noise held constant over each step."""
    psi = np.array(psi0, dtype=complex)
    if psi.ndim == 1:
        psi = psi[:, None]
    terms = setup.terms
    hz, hx = setup.hz, setup.hx
    events = list(setup.events)
    ei = 0
    n = len(edges) - 1
    for k in range(n):
        t0, t1 = edges[k], edges[k + 1]
        dt = t1 - t0
        bz = beta_z[k] if beta_z is not None else None
        bx = beta_x[k] if beta_x is not None else None

        def rhs(t, p):
            out = np.zeros_like(p)
            for mat, coeff in terms:
                c = coeff(t)
                if c != 0.0:
                    out += c * (mat @ p)
            if bz is not None:
                out += (hz @ p) * bz
            if bx is not None and hx is not None:
                out += (hx[0] @ p) * (hx[1](t) * bx)
            return -1j * out

        k1 = rhs(t0, psi)
        k2 = rhs(t0 + dt / 2, psi + dt / 2 * k1)
        k3 = rhs(t0 + dt / 2, psi + dt / 2 * k2)
        k4 = rhs(t1, psi + dt * k3)
        psi = psi + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        while ei < len(events) and events[ei][0] <= t1 + 1e-15 * setup.tau:
            psi = events[ei][1] @ psi
            ei += 1
    return psi


def _score(psi: np.ndarray, setup: _GateSetup, phase: float) -> np.ndarray:
    """Bell fidelity of each ket column against the fixed target phase."""
    if setup.project is not None:
        psi = setup.project.conj().T @ psi
    fock = setup.space.fock_cutoff
    out = np.empty(psi.shape[1])
    for j in range(psi.shape[1]):
        out[j] = bell_fidelity(psi[:, j], phase, fock_cutoff=fock)
    return out


def _reference_phase(setup: _GateSetup, edges: np.ndarray | None = None) -> tuple[float, float]:
    if edges is None:
        edges = _step_edges(setup.tau, setup.cuts, 2000)
    psi = _propagate(setup, edges, setup.psi0)
    col = psi[:, 0]
    if setup.project is not None:
        col = setup.project.conj().T @ col
    f, phase = best_bell_fidelity(col, fock_cutoff=setup.space.fock_cutoff)
    return f, phase


# ---------------------------------------------------------------------------
# Monte-Carlo noisy gate
# ---------------------------------------------------------------------------


def run_gate(scenario: SimulationScenario, noise_variant: str = "b-field") -> GateResult:
    """Monte-Carlo mean Bell infidelity of a noisy gate.

    The target phase is fixed once from a noise-free reference run; each
    trajectory then samples fresh dephasing (beta_z) and fractional
    amplitude (beta_x) paths from per-trajectory seeds.
    """
    setup = build_gate_setup(scenario, noise_variant)
    edges = _step_edges(setup.tau, setup.cuts, _num_steps(scenario, setup))
    # the reference shares the ensemble's step grid so that discretization
    # error cancels out of the noise-induced excess infidelity
    f_ref, phase = _reference_phase(setup, edges)
    n_steps = len(edges) - 1

    ens = scenario.ensemble
    if scenario.noise_z is None and scenario.noise_x is None:
        ens = 1
    seeds = np.random.SeedSequence(scenario.master_seed).spawn(ens)
    bz = bx = None
    if scenario.noise_z is not None:
        bz = np.empty((n_steps, ens))
    if scenario.noise_x is not None:
        bx = np.empty((n_steps, ens))
    for j, s in enumerate(seeds):
        rng = np.random.default_rng(s)
        if bz is not None:
            bz[:, j] = _ou_on_edges(scenario.noise_z, edges, rng)
        if bx is not None:
            bx[:, j] = _ou_on_edges(scenario.noise_x, edges, rng)

    psi0 = np.tile(setup.psi0[:, None], (1, ens))
    psi = _propagate(setup, edges, psi0, beta_z=bz, beta_x=bx)
    fids = _score(psi, setup, phase)
    mean_i = float(1.0 - fids.mean())
    stderr = float(fids.std(ddof=1) / np.sqrt(ens)) if ens > 1 else 0.0
    return GateResult(
        infidelity=mean_i,
        stderr=stderr,
        fidelities=fids,
        target_phase=phase,
        reference_infidelity=float(1.0 - f_ref),
    )


# ---------------------------------------------------------------------------
# Static-shift scans and contour fits
# ---------------------------------------------------------------------------


@dataclass
class StaticScanResult:
    n_values: np.ndarray
    shifts: np.ndarray  # delta_omega / delta_0
    infidelity: np.ndarray  # shape (len(n_values), len(shifts))
    thresholds: dict  # level -> per-n largest tolerable shift (nan if absent)
    fits: dict  # level -> fit description


def _first_crossing(shifts: np.ndarray, infid: np.ndarray, level: float) -> float:
    """Largest shift below the first upward crossing of ``level``."""
    above = infid > level
    if not above.any():
        return float(shifts[-1])
    i = int(np.argmax(above))
    if i == 0:
        return float("nan")
    x0, x1 = shifts[i - 1], shifts[i]
    y0, y1 = infid[i - 1], infid[i]
    if y1 <= y0:
        return float(x0)
    # interpolate in log-infidelity
    f = (np.log(level) - np.log(max(y0, 1e-300))) / (np.log(y1) - np.log(max(y0, 1e-300)))
    return float(x0 + f * (x1 - x0))


def scan_static_shift(
    scheme: str,
    n_values,
    shifts,
    params: SchemeParams | None = None,
    variant: str = "none",
    levels=(1e-2, 1e-3, 1e-4),
    steps_per_period: int = 24,
) -> StaticScanResult:
    """Noise-free Bell-infidelity surface over (decoupling strength, static
    qubit-frequency shift), with contour thresholds and model fits.

    ``n_values`` is the pi-pulse count for pdd and the carrier-cycle count
    N = Omega_c / delta_0 for cdd/mlcdd.  ``shifts`` are normalized shifts
    delta_omega / delta_0.  ``variant`` selects the mlcdd noise channel
    ("b-field" or "control-field"); for pdd it selects the pulse layout
    ("flower", "echo" or "uniform", default uniform).
    """
    params = params or SchemeParams(fock_cutoff=8)
    n_values = np.asarray(n_values, dtype=float)
    shifts = np.asarray(shifts, dtype=float)
    delta0 = params.detuning
    surface = np.empty((len(n_values), len(shifts)))
    for i, n in enumerate(n_values):
        if scheme == "pdd":
            scen = SimulationScenario(
                scheme="pdd",
                params=params,
                n_pulses=int(round(n)),
                pdd_variant=variant
                if variant in ("flower", "echo", "uniform")
                else "uniform",
                steps_per_period=steps_per_period,
            )
            setup = build_gate_setup(scen)
        elif scheme in ("cdd", "mlcdd"):
            p = replace(params, omega_c=float(n) * delta0)
            scen = SimulationScenario(
                scheme=scheme, params=p, steps_per_period=steps_per_period
            )
            nv = variant if scheme == "mlcdd" else "b-field"
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", RotatingWaveWarning)
                setup = build_gate_setup(scen, noise_variant=nv)
        else:
            raise ValueError(f"unknown scheme {scheme!r}")
        edges = _step_edges(setup.tau, setup.cuts, _num_steps(scen, setup))
        _, phase = _reference_phase(setup, edges)
        n_steps = len(edges) - 1
        bz = np.broadcast_to(shifts * delta0, (n_steps, len(shifts)))
        psi0 = np.tile(setup.psi0[:, None], (1, len(shifts)))
        psi = _propagate(setup, edges, psi0, beta_z=bz)
        surface[i] = 1.0 - _score(psi, setup, phase)

    thresholds = {
        lv: np.array([_first_crossing(shifts, surface[i], lv) for i in range(len(n_values))])
        for lv in levels
    }
    fits = {}
    for lv, thr in thresholds.items():
        good = np.isfinite(thr)
        n, t = n_values[good], thr[good]
        if len(t) == 0:
            fits[lv] = {"model": "none"}
            continue
        if scheme == "pdd" or (scheme == "mlcdd" and variant == "b-field"):
            if len(n) < 2:
                slope, intercept = 0.0, float(t[0]) if len(t) else float("nan")
            else:
                slope, intercept = np.polyfit(n, t, 1)
            fits[lv] = {"model": "linear", "slope": float(slope), "intercept": float(intercept)}
        elif scheme == "cdd":
            coeff = float(np.sum(t * np.sqrt(n)) / np.sum(n))
            fits[lv] = {"model": "sqrt", "coefficient": coeff}
        else:  # mlcdd control-field: N-independent
            fits[lv] = {"model": "constant", "value": float(np.mean(t)), "spread": float(np.ptp(t))}
    return StaticScanResult(n_values, shifts, surface, thresholds, fits)


# ---------------------------------------------------------------------------
# Lindblad heating scan
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class HeatingEntry:
    label: str
    r_heat: float
    r_time: float
    infidelity: float
    model_infidelity: float


def run_heating_scan(
    sequences,
    n_dot: float,
    eps: float = 0.01,
    fock_cutoff: int = 14,
    num_steps: int = 1600,
) -> list[HeatingEntry]:
    """Lindblad Bell infidelity of each (label, modulation) pair under
    motional heating at rate n_dot, against the closed-form prediction
    evaluated at the sequence's own (R_heat, R_time).

    Robust sequences carry their duration stretch internally (the drive
    stays at full amplitude while the loop area shrinks), so each sequence
    is integrated as-is.
    """
    from .core import TermHamiltonian, TimeGrid, evolve_lindblad, evolve_unitary

    out = []
    for label, mod in sequences:
        delta0 = mod.delta0
        tau0 = 2.0 * np.pi / delta0
        traj = compute_pst(mod, ModeSpec(eps, delta0))
        rep = robustness_report(traj, tau0)
        model = heating_infidelity(rep.mean_square, n_dot, traj.tau)

        space = SpaceSpec(2, 2, fock_cutoff)
        a = destroy(fock_cutoff)
        sx_ad = collective(SIGMA_X, space) @ embed_osc(a.conj().T, space)
        cplus, mod_edges = _modulation_coeff(mod, eps)
        h = TermHamiltonian(space.dim, boundaries=mod_edges)
        h.add(sx_ad, cplus)
        h.add(sx_ad.conj().T, lambda t, c=cplus: np.conj(c(t)))

        psi0 = ket(0, 0, 0, dims=(2, 2, fock_cutoff))
        grid = TimeGrid(0.0, mod.duration, num_steps)
        psi_ref = evolve_unitary(h, psi0, grid)
        _, phase = best_bell_fidelity(psi_ref, fock_cutoff=fock_cutoff)

        rho0 = np.outer(psi0, psi0.conj())
        rho = evolve_lindblad(h, heating_collapse_ops(n_dot, space), rho0, grid)
        fid = bell_fidelity(rho, phase, fock_cutoff=fock_cutoff)
        out.append(
            HeatingEntry(
                label=label,
                r_heat=rep.r_heat,
                r_time=rep.r_time,
                infidelity=float(1.0 - fid),
                model_infidelity=float(model),
            )
        )
    return out


# ---------------------------------------------------------------------------
# Thermal primitive-vs-robust comparison
# ---------------------------------------------------------------------------


@dataclass
class ThermalComparisonResult:
    delta_a: np.ndarray  # qubit-frequency shifts (rad/s)
    delta_s: np.ndarray  # motional-frequency shifts (rad/s)
    surfaces: dict  # (label, n_bar) -> fidelity array (len(delta_a), len(delta_s))
    leakage: dict  # n_bar -> initial thermal truncation leakage


def _thermal_levels(n_bar: float, keep: float = 0.999) -> tuple[np.ndarray, np.ndarray, float]:
    if n_bar == 0.0:
        return np.array([0]), np.array([1.0]), 0.0
    n_max = int(np.ceil(np.log(1.0 - keep) / np.log(n_bar / (n_bar + 1.0))))
    n = np.arange(n_max + 1)
    p = np.exp(n * np.log(n_bar) - (n + 1) * np.log(n_bar + 1.0))
    leak = 1.0 - float(p.sum())
    return n, p / p.sum(), leak


def run_thermal_comparison(
    primitive_mod: ModulationSequence,
    robust_mod: ModulationSequence,
    omega_c: float,
    delta_a,
    delta_s,
    n_bars=(0.0, 5.0),
    eps: float = 0.01,
    fock_headroom: int = 12,
    steps_per_period: int = 20,
) -> ThermalComparisonResult:
    """Fidelity surfaces over (qubit shift, motional shift) for the
    constant-parameter gate and the carrier-protected modulated gate, each
    at cold and hot initial motional temperatures.

    Initial thermal states are truncated at 99.9% cumulative weight and
    renormalized; the truncation leakage is reported and warned about
    above 1e-4.
    """
    delta_a = np.asarray(delta_a, dtype=float)
    delta_s = np.asarray(delta_s, dtype=float)
    surfaces = {}
    leakages = {}
    for n_bar in n_bars:
        levels, probs, leak = _thermal_levels(float(n_bar))
        leakages[float(n_bar)] = leak
        if leak > 1e-4:
            warnings.warn(
                f"thermal truncation leakage {leak:.2e} at n_bar={n_bar}; "
                "surfaces use the renormalized truncated ensemble",
                UserWarning,
            )
        fock = int(levels[-1]) + fock_headroom
        for label, mod, oc in (
            ("primitive", primitive_mod, 0.0),
            ("robust", robust_mod, omega_c),
        ):
            p = SchemeParams(
                eps=eps, omega0=mod.omega0, delta0=mod.delta0, omega_c=oc, fock_cutoff=fock
            )
            scen = SimulationScenario(
                scheme="cdd" if oc > 0 else "primitive",
                params=p,
                modulation=mod,
                steps_per_period=steps_per_period,
            )
            surf = np.empty((len(delta_a), len(delta_s)))
            for j, ds in enumerate(delta_s):
                setup = build_gate_setup(scen)
                # motional shift enters as a common detuning offset
                cplus, _ = _modulation_coeff(mod, eps, delta_offset=float(ds))
                setup.terms[0] = (setup.terms[0][0], cplus)
                setup.terms[1] = (setup.terms[1][0], lambda t, c=cplus: np.conj(c(t)))
                edges = _step_edges(setup.tau, setup.cuts, _num_steps(scen, setup))
                _, phase = _reference_phase(setup, edges)
                n_steps = len(edges) - 1
                # batch = (qubit shift) x (initial Fock level)
                cols = []
                bz_cols = []
                for da in delta_a:
                    for n0 in levels:
                        cols.append(ket(0, 0, int(n0), dims=(2, 2, fock)))
                        bz_cols.append(da)
                psi0 = np.stack(cols, axis=1)
                bz = np.broadcast_to(np.asarray(bz_cols), (n_steps, len(cols)))
                psi = _propagate(setup, edges, psi0, beta_z=bz)
                fids = _score(psi, setup, phase).reshape(len(delta_a), len(levels))
                surf[:, j] = fids @ probs
            surfaces[(label, float(n_bar))] = surf
    return ThermalComparisonResult(delta_a, delta_s, surfaces, leakages)


def region_encloses(
    surface_outer: np.ndarray, surface_inner: np.ndarray, level: float
) -> bool:
    """True when the high-fidelity region {F >= 1-level} of ``surface_outer``
    contains that of ``surface_inner`` on the shared grid."""
    inner = surface_inner >= 1.0 - level
    outer = surface_outer >= 1.0 - level
    return bool(np.all(outer[inner]))


# ---------------------------------------------------------------------------
# Cat-state detuning scans
# ---------------------------------------------------------------------------


@dataclass
class CatScanResult:
    detunings: np.ndarray
    p_up: np.ndarray
    min_detuning: float
    min_p: float
    curvature: float  # d^2 P / d delta^2 at the minimum (per (rad/s)^2)


def run_cat_scan(
    mod: ModulationSequence,
    detunings,
    eps: float,
    n_bar: float = 0.0,
    num_samples: int = 256,
) -> CatScanResult:
    """Single-ion cat-interferometer spin-flip probability versus the actual
    sideband detuning, for a sequence designed at mod.delta0."""
    detunings = np.asarray(detunings, dtype=float)
    p = np.empty(len(detunings))
    for i, d in enumerate(detunings):
        traj = compute_pst(mod, ModeSpec(eps, float(d)), num_samples=num_samples)
        p[i] = cat_probability(traj, n_bar, at="end")
    k = int(np.argmin(p))
    if 0 < k < len(p) - 1:
        dd = detunings[1] - detunings[0]
        curv = (p[k + 1] - 2 * p[k] + p[k - 1]) / dd**2
    else:
        curv = float("nan")
    return CatScanResult(detunings, p, float(detunings[k]), float(p[k]), float(curv))


# ---------------------------------------------------------------------------
# Spectator-mode excitation bound
# ---------------------------------------------------------------------------

_HBAR = 1.054571817e-34
_AMU = 1.66053906660e-27


@dataclass(frozen=True)
class SpectatorBound:
    infidelity: float
    eps_spectator: float
    alpha_max: float
    n_bar_spectator: float
    detuning_gap: float


def spectator_mode_bound(
    gradient: float,
    nu_com: float,
    omega: float,
    mode: str = "com",
    linewidth: float = 2.0 * np.pi * 19.6e6,
    d_omega_d_b: float = 2.0 * np.pi * 1.4e10,
    ion_mass_amu: float = 171.0,
    num_ions: int = 2,
) -> SpectatorBound:
    """Upper bound on the infidelity from off-resonantly driving the unused
    motional mode of a two-ion chain.

    The spectator's spin-motion coupling uses the gradient formula
    eps_p = (d omega / d B) * gradient * b_p * sqrt(hbar / (2 m nu_p)) / nu_p
    with mode amplitude |b_p| = 1/sqrt(2), the axial stretch mode at
    sqrt(3) nu_com, Doppler occupation n_bar_p = linewidth / (2 nu_p), and
    a worst-case residual displacement of one full off-resonant circle
    diameter per spin branch, |alpha|_max = 2 eps_p Omega / Delta.
    """
    if gradient < 0 or nu_com <= 0 or omega < 0:
        raise ValueError("gradient and omega must be >= 0 and nu_com > 0")
    nu_str = np.sqrt(3.0) * nu_com
    nu_p = nu_str if mode == "com" else nu_com
    gap = abs(nu_str - nu_com)
    m = ion_mass_amu * _AMU
    z0 = np.sqrt(_HBAR / (2.0 * m * nu_p))
    eps_p = d_omega_d_b * gradient * (1.0 / np.sqrt(2.0)) * z0 / nu_p
    alpha_max = 2.0 * eps_p * omega / gap if omega > 0 else 0.0
    n_bar_p = linewidth / (2.0 * nu_p)
    term = num_ions * alpha_max**2 * (n_bar_p + 0.5)
    infid = 1.0 - max(1.0 - term, 0.0) ** 2
    return SpectatorBound(
        infidelity=float(infid),
        eps_spectator=float(eps_p),
        alpha_max=float(alpha_max),
        n_bar_spectator=float(n_bar_p),
        detuning_gap=float(gap),
    )
