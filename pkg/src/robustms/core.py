"""Hilbert-space construction, operators, states, and time evolution.

Everything runs in the interaction picture in which the two-ion
bichromatic sideband interaction reads

    H(t) = (hbar eps Omega0 / 2) S_x (a' e^{i delta t} + a e^{-i delta t}),

with S_x = sigma_x^(1) + sigma_x^(2), so no GHz-scale carrier frequencies
ever enter the integrators.  hbar = 1 throughout; all frequencies are
angular (rad/s).

Scheme conventions
------------------
- ``primitive``/``pdd``: two-level ions.  pi pulses are applied by the
  simulation layer as instantaneous unitaries.
- ``cdd``: two-level ions plus an always-on carrier drive
  (Omega_c / 2) sigma_x per ion, which commutes with the sideband term.
- ``mlcdd``: four levels per ion, ordered (|0>, |-1>, |0'>, |+1>).
  The dressing drive couples |0> to |-1> and |+1> with per-transition
  Rabi frequency Omega_c, chosen so that the dark state
  |D> = (|-1> + |+1>)/sqrt(2) is degenerate with |0'> and the bright
  states |u>, |d> split by +/- Omega_c/sqrt(2).  The bichromatic RF
  fields couple |0'> to |+1> (blue sideband) and |-1> (red sideband);
  after dropping terms rotating at nu and at the second-order Zeeman
  splitting, the retained sideband Hamiltonian is

      H_rf = (eps Omega_rf / 2) [ |+1><0'| a' e^{-i delta0 t}
                                  + |-1><0'| a e^{+i delta0 t} ] + h.c.

  which reduces, within the dressed qubit {|0'>, |D>}, to the standard
  MS interaction with Omega_0 = Omega_rf / sqrt(2).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

# ---------------------------------------------------------------------------
# Spaces, operators, states
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SpaceSpec:
    """Composite Hilbert space: ions (2 or 4 levels each) times a truncated
    oscillator."""

    num_ions: int
    levels_per_ion: int
    fock_cutoff: int

    def __post_init__(self) -> None:
        if self.num_ions < 1:
            raise ValueError("num_ions must be >= 1")
        if self.levels_per_ion not in (2, 4):
            raise ValueError("levels_per_ion must be 2 or 4")
        if self.fock_cutoff < 2:
            raise ValueError("fock_cutoff must be >= 2")

    @property
    def spin_dim(self) -> int:
        return self.levels_per_ion**self.num_ions

    @property
    def dim(self) -> int:
        return self.spin_dim * self.fock_cutoff


@dataclass(frozen=True)
class TimeGrid:
    """Uniform time grid."""

    t_start: float
    t_end: float
    num_steps: int

    def __post_init__(self) -> None:
        if self.t_end <= self.t_start:
            raise ValueError("t_end must exceed t_start")
        if self.num_steps < 2:
            raise ValueError("num_steps must be >= 2")

    @property
    def dt(self) -> float:
        return (self.t_end - self.t_start) / self.num_steps

    @property
    def times(self) -> np.ndarray:
        return np.linspace(self.t_start, self.t_end, self.num_steps + 1)


@dataclass
class QuantumState:
    """A ket or density matrix with validity checks."""

    kind: str  # "ket" | "density"
    data: np.ndarray

    def validate(self, atol: float = 1e-9) -> None:
        if self.kind == "ket":
            norm = float(np.linalg.norm(self.data))
            if abs(norm - 1.0) > 1e-8:
                raise ValueError(f"ket norm {norm} deviates from 1")
        elif self.kind == "density":
            tr = complex(np.trace(self.data))
            if abs(tr - 1.0) > 1e-8:
                raise ValueError(f"density trace {tr} deviates from 1")
            if not np.allclose(self.data, self.data.conj().T, atol=1e-9):
                raise ValueError("density matrix not Hermitian")
            eigs = np.linalg.eigvalsh(self.data)
            if eigs.min() < -1e-9:
                raise ValueError(f"density matrix has eigenvalue {eigs.min()}")
        else:
            raise ValueError(f"unknown state kind {self.kind!r}")


def destroy(cutoff: int) -> np.ndarray:
    """Truncated annihilation operator."""
    return np.diag(np.sqrt(np.arange(1, cutoff, dtype=float)), k=1).astype(complex)


def number_op(cutoff: int) -> np.ndarray:
    return np.diag(np.arange(cutoff, dtype=float)).astype(complex)


SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
# Qubit ordering: index 0 = |down> (lower level), index 1 = |up>.  With this
# ordering sigma_z |down> = +|down>; only relative signs matter here.


def kron_all(*ops: np.ndarray) -> np.ndarray:
    out = np.array([[1.0 + 0j]])
    for op in ops:
        out = np.kron(out, op)
    return out


def embed_ion(op: np.ndarray, ion: int, space: SpaceSpec) -> np.ndarray:
    """Embed a single-ion operator (identity on the oscillator)."""
    mats = []
    eye_ion = np.eye(space.levels_per_ion, dtype=complex)
    for j in range(space.num_ions):
        mats.append(op if j == ion else eye_ion)
    mats.append(np.eye(space.fock_cutoff, dtype=complex))
    return kron_all(*mats)


def embed_osc(op: np.ndarray, space: SpaceSpec) -> np.ndarray:
    """Embed an oscillator operator (identity on all ions)."""
    return kron_all(np.eye(space.spin_dim, dtype=complex), op)


def collective(op: np.ndarray, space: SpaceSpec) -> np.ndarray:
    """Sum of a single-ion operator over all ions, e.g. S_x."""
    total = np.zeros((space.dim, space.dim), dtype=complex)
    for j in range(space.num_ions):
        total += embed_ion(op, j, space)
    return total


def thermal_state(
    n_bar: float, cutoff: int, max_leakage: float = 1e-3, allow_truncation: bool = False
) -> tuple[QuantumState, float]:
    """Thermal oscillator state p(n) = n_bar^n / (n_bar+1)^(n+1), renormalized
    over the truncated space.  Returns (state, truncation leakage)."""
    if n_bar < 0:
        raise ValueError("n_bar must be >= 0")
    if cutoff < 2:
        raise ValueError("cutoff must be >= 2")
    n = np.arange(cutoff, dtype=float)
    if n_bar == 0:
        p = np.zeros(cutoff)
        p[0] = 1.0
        leakage = 0.0
    else:
        # n_bar^n / (n_bar+1)^(n+1) in log space for numerical safety
        logp = n * np.log(n_bar) - (n + 1) * np.log(n_bar + 1)
        p = np.exp(logp)
        leakage = 1.0 - float(p.sum())
    if leakage > max_leakage and not allow_truncation:
        raise ValueError(
            f"thermal truncation leakage {leakage:.3g} exceeds {max_leakage:.3g}; "
            "raise the cutoff or pass allow_truncation=True"
        )
    p = p / p.sum()
    return QuantumState("density", np.diag(p).astype(complex)), leakage


# ---------------------------------------------------------------------------
# Time-dependent Hamiltonians
# ---------------------------------------------------------------------------


@dataclass
class TermHamiltonian:
    """H(t) = sum_m c_m(t) H_m with constant matrices and scalar coefficients.

    ``boundaries`` lists interior times where coefficients are discontinuous
    (modulation-segment edges); integrators align steps to them.
    """

    dim: int
    terms: list[tuple[np.ndarray, Callable[[float], complex]]] = field(default_factory=list)
    boundaries: tuple[float, ...] = ()

    def add(self, matrix: np.ndarray, coeff: Callable[[float], complex]) -> None:
        if matrix.shape != (self.dim, self.dim):
            raise ValueError("term dimension mismatch")
        self.terms.append((np.asarray(matrix, dtype=complex), coeff))

    def __call__(self, t: float) -> np.ndarray:
        h = np.zeros((self.dim, self.dim), dtype=complex)
        for mat, coeff in self.terms:
            h += coeff(t) * mat
        return h

    def apply(self, t: float, psi: np.ndarray) -> np.ndarray:
        """H(t) @ psi without forming the summed matrix (psi may be batched)."""
        out = np.zeros_like(psi)
        for mat, coeff in self.terms:
            c = coeff(t)
            if c != 0.0:
                out += c * (mat @ psi)
        return out


@dataclass(frozen=True)
class SchemeParams:
    """Physical parameters for build_hamiltonian.

    Frequencies are angular (rad/s).  ``omega0`` is the sideband Rabi
    frequency of the bichromatic drive (per tone); for mlcdd it is the RF
    Rabi frequency Omega_rf.  ``beta_z`` / ``beta_x`` are the instantaneous
    dephasing shift (rad/s) and fractional amplitude error used when a
    static-noise snapshot is requested.
    """

    eps: float = 0.01
    omega0: float = 2 * np.pi * 40e3
    delta0: float = 0.0  # defaults to 2*eps*omega0 when zero
    omega_c: float = 0.0
    nu: float = 2 * np.pi * 380e3
    delta_omega_pm: float = 0.0
    fock_cutoff: int = 12
    num_ions: int = 2
    beta_z: float = 0.0
    beta_x: float = 0.0
    drop_fast_terms: bool = True

    @property
    def detuning(self) -> float:
        return self.delta0 if self.delta0 != 0.0 else 2.0 * self.eps * self.omega0


# MLCDD per-ion level ordering.
LVL_0, LVL_M1, LVL_0P, LVL_P1 = 0, 1, 2, 3


def _lvl(bra: int, ket: int) -> np.ndarray:
    m = np.zeros((4, 4), dtype=complex)
    m[bra, ket] = 1.0
    return m


def mlcdd_space(params: SchemeParams) -> SpaceSpec:
    return SpaceSpec(params.num_ions, 4, params.fock_cutoff)


def two_level_space(params: SchemeParams) -> SpaceSpec:
    return SpaceSpec(params.num_ions, 2, params.fock_cutoff)


def ms_hamiltonian(params: SchemeParams, space: SpaceSpec | None = None) -> TermHamiltonian:
    """Interaction-picture bichromatic sideband interaction for 2-level ions."""
    space = space or two_level_space(params)
    a = destroy(space.fock_cutoff)
    sx_adag = collective(SIGMA_X, space) @ embed_osc(a.conj().T, space)
    sx_a = collective(SIGMA_X, space) @ embed_osc(a, space)
    delta = params.detuning
    amp = params.eps * params.omega0 / 2.0
    h = TermHamiltonian(space.dim)
    h.add(sx_adag, lambda t, amp=amp, delta=delta: amp * np.exp(1j * delta * t))
    h.add(sx_a, lambda t, amp=amp, delta=delta: amp * np.exp(-1j * delta * t))
    return h


def cdd_carrier(params: SchemeParams, space: SpaceSpec) -> np.ndarray:
    """Always-on carrier drive (Omega_c/2) S_x (static term)."""
    return (params.omega_c / 2.0) * collective(SIGMA_X, space)


def dephasing_operator(space: SpaceSpec) -> np.ndarray:
    """Collective operator multiplying beta_z(t): (1/2) S_z for qubits, the
    first-order Zeeman shift (|+1><+1| - |-1><-1|)/2 summed over ions for
    4-level ions."""
    if space.levels_per_ion == 2:
        return 0.5 * collective(SIGMA_Z, space)
    zeeman = _lvl(LVL_P1, LVL_P1) - _lvl(LVL_M1, LVL_M1)
    return 0.5 * collective(zeeman, space)


def mlcdd_dd_hamiltonian(params: SchemeParams, space: SpaceSpec) -> np.ndarray:
    """Dressing drive: per-transition Rabi frequency Omega_c on |0> <-> |+-1>,
    signed so that |D> = (|-1> + |+1>)/sqrt(2) is the dark state.

    The resulting |D>-to-bright splitting is Omega_c/sqrt(2), matching the
    dressed-frame noise picture and the numeric filter-function peak.
    """
    drive = 0.5 * params.omega_c * (_lvl(LVL_0, LVL_M1) - _lvl(LVL_0, LVL_P1))
    drive = drive + drive.conj().T
    return collective(drive, space)


def mlcdd_rf_hamiltonian(params: SchemeParams, space: SpaceSpec) -> TermHamiltonian:
    """Bichromatic RF sideband interaction for 4-level ions.

    Default (drop_fast_terms=True) keeps only the sideband terms rotating at
    delta0; the full mode adds the carrier terms rotating near nu and the
    second-order-Zeeman phase delta_omega_pm on the red-tone term.
    """
    a = destroy(space.fock_cutoff)
    adag = a.conj().T
    delta = params.detuning
    amp = params.eps * params.omega0 / 2.0
    h = TermHamiltonian(space.dim)

    blue = collective(_lvl(LVL_P1, LVL_0P), space) @ embed_osc(adag, space)
    red = collective(_lvl(LVL_M1, LVL_0P), space) @ embed_osc(a, space)
    dpm = params.delta_omega_pm if not params.drop_fast_terms else 0.0
    h.add(blue, lambda t, amp=amp, d=delta: amp * np.exp(-1j * d * t))
    h.add(blue.conj().T, lambda t, amp=amp, d=delta: amp * np.exp(1j * d * t))
    h.add(red, lambda t, amp=amp, d=delta, dpm=dpm: amp * np.exp(1j * (d - dpm) * t))
    h.add(red.conj().T, lambda t, amp=amp, d=delta, dpm=dpm: amp * np.exp(-1j * (d - dpm) * t))

    if not params.drop_fast_terms:
        # Carrier terms of the bichromatic pair, rotating near nu.
        carr_b = collective(_lvl(LVL_P1, LVL_0P), space)
        carr_r = collective(_lvl(LVL_M1, LVL_0P), space)
        c_amp = params.omega0 / 2.0
        drf = params.nu + delta
        h.add(carr_b, lambda t, A=c_amp, drf=drf: A * np.exp(-1j * drf * t))
        h.add(carr_b.conj().T, lambda t, A=c_amp, drf=drf: A * np.exp(1j * drf * t))
        h.add(carr_r, lambda t, A=c_amp, drf=drf, dpm=params.delta_omega_pm:
              A * np.exp(1j * (drf - dpm) * t))
        h.add(carr_r.conj().T, lambda t, A=c_amp, drf=drf, dpm=params.delta_omega_pm:
              A * np.exp(-1j * (drf - dpm) * t))
    return h


def build_hamiltonian(scheme: str, params: SchemeParams, t: float) -> np.ndarray:
    """Instantaneous Hamiltonian snapshot for a scheme.

    Includes the static beta_z / beta_x offsets from ``params``; the
    simulation layer assembles time-dependent noise itself.
    """
    if scheme in ("primitive", "pdd", "cdd"):
        space = two_level_space(params)
        h = ms_hamiltonian(params, space)(t)
        if scheme == "cdd":
            h = h + (1.0 + params.beta_x) * cdd_carrier(params, space)
        if params.beta_z != 0.0:
            h = h + params.beta_z * dephasing_operator(space)
        return h
    if scheme == "mlcdd":
        space = mlcdd_space(params)
        h = (1.0 + params.beta_x) * mlcdd_dd_hamiltonian(params, space)
        if params.omega0 != 0.0:
            h = h + mlcdd_rf_hamiltonian(params, space)(t)
        if params.beta_z != 0.0:
            h = h + params.beta_z * dephasing_operator(space)
        return h
    raise ValueError(f"unknown scheme {scheme!r}")


# ---------------------------------------------------------------------------
# Integrators
# ---------------------------------------------------------------------------


def _segment_edges(grid: TimeGrid, boundaries: Sequence[float]) -> list[tuple[float, float, int]]:
    """Split [t_start, t_end] at interior boundaries, assigning the grid's
    step budget proportionally (at least one step per piece)."""
    pts = sorted(
        {grid.t_start, grid.t_end}
        | {b for b in boundaries if grid.t_start < b < grid.t_end}
    )
    total = grid.t_end - grid.t_start
    pieces = []
    for a, b in zip(pts[:-1], pts[1:]):
        n = max(1, int(round(grid.num_steps * (b - a) / total)))
        pieces.append((a, b, n))
    return pieces


def _rk4_step(h: TermHamiltonian, t: float, dt: float, psi: np.ndarray) -> np.ndarray:
    k1 = -1j * h.apply(t, psi)
    k2 = -1j * h.apply(t + dt / 2, psi + dt / 2 * k1)
    k3 = -1j * h.apply(t + dt / 2, psi + dt / 2 * k2)
    k4 = -1j * h.apply(t + dt, psi + dt * k3)
    return psi + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)


def evolve_unitary(
    h: TermHamiltonian,
    psi0: np.ndarray,
    grid: TimeGrid,
    store: str = "final",
) -> np.ndarray | list[np.ndarray]:
    """Fixed-step RK4 ket propagation (batched over trailing columns).

    Steps are aligned to the Hamiltonian's segment boundaries so that
    piecewise-constant modulation retains 4th-order accuracy.
    """
    psi = np.asarray(psi0, dtype=complex)
    if psi.shape[0] != h.dim:
        raise ValueError("state dimension mismatch")
    out = [psi.copy()] if store == "all" else None
    for a, b, n in _segment_edges(grid, h.boundaries):
        dt = (b - a) / n
        if dt <= 0 or not np.isfinite(dt):
            raise FloatingPointError("step-size underflow")
        for i in range(n):
            psi = _rk4_step(h, a + i * dt, dt, psi)
            if out is not None:
                out.append(psi.copy())
    return out if out is not None else psi


def _lindblad_rhs(
    h: TermHamiltonian,
    collapse: list[tuple[np.ndarray, np.ndarray, np.ndarray]],
    t: float,
    rho: np.ndarray,
) -> np.ndarray:
    ht = h(t)
    drho = -1j * (ht @ rho - rho @ ht)
    for c, cdag, cdc in collapse:
        drho += c @ rho @ cdag - 0.5 * (cdc @ rho + rho @ cdc)
    return drho


def evolve_lindblad(
    h: TermHamiltonian,
    collapse_ops: Sequence[tuple[np.ndarray, float]],
    rho0: np.ndarray,
    grid: TimeGrid,
    store: str = "final",
) -> np.ndarray | list[np.ndarray]:
    """Fixed-step RK4 master-equation propagation.

    ``collapse_ops`` is a list of (operator, rate); the jump operator used is
    sqrt(rate) * operator.  Hermiticity is enforced by symmetrization after
    every step.
    """
    rho = np.asarray(rho0, dtype=complex)
    if rho.shape != (h.dim, h.dim):
        raise ValueError("density-matrix dimension mismatch")
    collapse = []
    for op, rate in collapse_ops:
        if rate < 0:
            raise ValueError("collapse rates must be >= 0")
        c = np.sqrt(rate) * np.asarray(op, dtype=complex)
        collapse.append((c, c.conj().T, c.conj().T @ c))
    out = [rho.copy()] if store == "all" else None
    for a, b, n in _segment_edges(grid, h.boundaries):
        dt = (b - a) / n
        for i in range(n):
            t = a + i * dt
            k1 = _lindblad_rhs(h, collapse, t, rho)
            k2 = _lindblad_rhs(h, collapse, t + dt / 2, rho + dt / 2 * k1)
            k3 = _lindblad_rhs(h, collapse, t + dt / 2, rho + dt / 2 * k2)
            k4 = _lindblad_rhs(h, collapse, t + dt, rho + dt * k3)
            rho = rho + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
            rho = 0.5 * (rho + rho.conj().T)
            if out is not None:
                out.append(rho.copy())
    return out if out is not None else rho


def heating_collapse_ops(n_dot: float, space: SpaceSpec) -> list[tuple[np.ndarray, float]]:
    """Motional heating channels: equal up/down rates n_dot on a-dagger and a
    (high-temperature bath).  The net phonon gain on vacuum is exactly n_dot
    per second."""
    a = destroy(space.fock_cutoff)
    return [(embed_osc(a.conj().T, space), n_dot), (embed_osc(a, space), n_dot)]


# ---------------------------------------------------------------------------
# Fidelities
# ---------------------------------------------------------------------------


def partial_trace_osc(state: np.ndarray, spin_dim: int, fock_dim: int, kind: str) -> np.ndarray:
    """Reduced spin density matrix after tracing out the oscillator."""
    if kind == "ket":
        psi = state.reshape(spin_dim, fock_dim)
        return psi @ psi.conj().T
    rho = state.reshape(spin_dim, fock_dim, spin_dim, fock_dim)
    return np.trace(rho, axis1=1, axis2=3)


def bell_fidelity(
    state: QuantumState | np.ndarray,
    target_phase: float,
    fock_cutoff: int | None = None,
) -> float:
    """Overlap with the maximally entangled target
    (|dd> + e^{i phase} |uu>) / sqrt(2) on two qubits.

    Accepts a two-qubit state directly, or a two-qubit (x) oscillator state
    when ``fock_cutoff`` is given (the oscillator is traced out).
    """
    if isinstance(state, QuantumState):
        kind, data = state.kind, state.data
    else:
        data = np.asarray(state)
        kind = "ket" if data.ndim == 1 else "density"
    if fock_cutoff is not None:
        rho = partial_trace_osc(data, data.shape[0] // fock_cutoff, fock_cutoff, kind)
    elif kind == "ket":
        rho = np.outer(data, data.conj())
    else:
        rho = data
    if rho.shape != (4, 4):
        raise ValueError("bell_fidelity expects a two-qubit state")
    phi = np.zeros(4, dtype=complex)
    phi[0] = 1 / np.sqrt(2)
    phi[3] = np.exp(1j * target_phase) / np.sqrt(2)
    return float(np.real(phi.conj() @ rho @ phi))


def best_bell_fidelity(state, fock_cutoff: int | None = None) -> tuple[float, float]:
    """Maximize bell_fidelity over the target phase; returns (F, phase).

    Used once per noise-free reference run to fix the target phase of a
    scenario, so that noisy ensembles are scored against a deterministic
    target.
    """
    if isinstance(state, QuantumState):
        kind, data = state.kind, state.data
    else:
        data = np.asarray(state)
        kind = "ket" if data.ndim == 1 else "density"
    if fock_cutoff is not None:
        rho = partial_trace_osc(data, data.shape[0] // fock_cutoff, fock_cutoff, kind)
    elif kind == "ket":
        rho = np.outer(data, data.conj())
    else:
        rho = data
    # F(theta) = (rho00 + rho33)/2 + Re(e^{i theta} rho03), maximal at
    # theta = -arg(rho03).
    const = 0.5 * float(np.real(rho[0, 0] + rho[3, 3]))
    off = complex(rho[0, 3])
    best_phase = float(-np.angle(off)) if off != 0 else 0.0
    return const + abs(off), best_phase


def ket(*labels: int, dims: Sequence[int]) -> np.ndarray:
    """Computational basis ket for the given per-factor labels and dims."""
    if len(labels) != len(dims):
        raise ValueError("labels/dims mismatch")
    idx = 0
    for lab, d in zip(labels, dims):
        if not 0 <= lab < d:
            raise ValueError("label out of range")
        idx = idx * d + lab
    out = np.zeros(int(np.prod(dims)), dtype=complex)
    out[idx] = 1.0
    return out
