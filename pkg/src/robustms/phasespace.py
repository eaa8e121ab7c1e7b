"""Phase-space trajectories of the state-dependent motional displacement.

The trajectory of mode k under a modulated bichromatic drive is

    alpha_k(t) = eps_k int_0^t Omega(t') e^{i theta_k(t')} e^{-i phi(t')} dt',

with theta_k the accumulated detuning phase int_0^t' delta_k(t'') dt''.
For piecewise-constant modulation every functional used here (closure,
mean position, mean square, enclosed area, and the detuning-sensitivity
terms) has a closed form per segment; no sampled quadrature enters the
reported numbers.

Units: alpha is dimensionless; with the primitive relation
delta_0 = 2 eps Omega_0 the primitive loop has radius 1/2, mean square
<|alpha|^2> = 1/2, and encloses the maximally entangling area pi/2.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np
from scipy.integrate import quad

# ---------------------------------------------------------------------------
# Modulation sequences
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Segment:
    """One piecewise-constant control segment.  Unset fields inherit the
    sequence base values."""

    duration: float
    phase: float | None = None  # radians
    delta: float | None = None  # rad/s, absolute drive detuning
    amp: float | None = None  # fraction of Omega_0 in [0, 1]

    def __post_init__(self) -> None:
        if self.duration <= 0:
            raise ValueError("segment duration must be > 0")
        if self.amp is not None and not (0.0 <= self.amp <= 1.0):
            raise ValueError("amplitude fraction must lie in [0, 1]")


@dataclass(frozen=True)
class ModulationSequence:
    """Piecewise-constant phase/frequency/amplitude control of the sideband
    fields."""

    kind: str  # phase | frequency | amplitude | composite
    omega0: float  # rad/s
    delta0: float  # rad/s
    phi0: float = 0.0
    segments: tuple[Segment, ...] = ()

    def __post_init__(self) -> None:
        if self.kind not in ("phase", "frequency", "amplitude", "composite"):
            raise ValueError(f"unknown modulation kind {self.kind!r}")
        if not self.segments:
            raise ValueError("sequence needs at least one segment")

    @property
    def duration(self) -> float:
        return float(sum(s.duration for s in self.segments))

    def arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """(durations, amplitudes [rad/s], detunings [rad/s], phases)."""
        dur = np.array([s.duration for s in self.segments])
        amp = np.array(
            [self.omega0 * (s.amp if s.amp is not None else 1.0) for s in self.segments]
        )
        det = np.array([s.delta if s.delta is not None else self.delta0 for s in self.segments])
        phi = np.array([s.phase if s.phase is not None else self.phi0 for s in self.segments])
        return dur, amp, det, phi

    def to_json(self) -> str:
        return json.dumps(
            {
                "kind": self.kind,
                "base": {"omega0": self.omega0, "delta0": self.delta0, "phi0": self.phi0},
                "segments": [
                    {
                        k: v
                        for k, v in (
                            ("duration", s.duration),
                            ("phase", s.phase),
                            ("delta", s.delta),
                            ("amp", s.amp),
                        )
                        if v is not None
                    }
                    for s in self.segments
                ],
            },
            indent=2,
        )

    @staticmethod
    def from_json(text: str) -> "ModulationSequence":
        obj = json.loads(text)
        base = obj["base"]
        segs = tuple(
            Segment(
                duration=s["duration"],
                phase=s.get("phase"),
                delta=s.get("delta"),
                amp=s.get("amp"),
            )
            for s in obj["segments"]
        )
        return ModulationSequence(
            kind=obj["kind"],
            omega0=base["omega0"],
            delta0=base["delta0"],
            phi0=base.get("phi0", 0.0),
            segments=segs,
        )


def primitive_sequence(omega0: float, eps: float, loops: int = 1) -> ModulationSequence:
    """Single-loop (or k-loop) constant-parameter gate sequence with
    delta_0 = 2 sqrt(loops) eps Omega_0 and duration 2 pi loops... one loop:
    tau = 2 pi / delta_0."""
    delta0 = 2.0 * np.sqrt(loops) * eps * omega0
    tau = loops * 2.0 * np.pi / delta0
    return ModulationSequence("phase", omega0, delta0, 0.0, (Segment(tau),))


@dataclass(frozen=True)
class ModeSpec:
    """Motional mode as seen by the drive.  ``detuning`` is the drive's
    nominal detuning from this mode's sideband; for the gate mode it equals
    the sequence's delta0 and FM segments override it through
    delta_eff = segment delta + (mode detuning - delta0)."""

    eps: float
    detuning: float
    n_bar: float = 0.0

    def __post_init__(self) -> None:
        if self.eps <= 0:
            raise ValueError("eps must be > 0")
        if self.n_bar < 0:
            raise ValueError("n_bar must be >= 0")


# ---------------------------------------------------------------------------
# Exact segment functionals
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ExactFunctionals:
    """Closed-form integrals of one trajectory over its full duration."""

    tau: float
    alpha_end: complex
    int_alpha: complex  # int_0^tau alpha dt
    int_abs2: float  # int_0^tau |alpha|^2 dt
    area: float  # Im int conj(alpha) d alpha  (entangling phase)
    int_t_alpha: complex  # int_0^tau t alpha dt
    int_av: complex  # int_0^tau (int_0^t alpha dt') dt


def _eix_m1_over_ix(x: complex) -> complex:
    """(e^{ix} - 1)/(ix) with a stable small-x series."""
    if abs(x) < 1e-6:
        return 1.0 + 1j * x / 2.0 - x**2 / 6.0
    return (np.exp(1j * x) - 1.0) / (1j * x)


def piecewise_functionals(
    durations: np.ndarray,
    amps: np.ndarray,
    deltas: np.ndarray,
    phis: np.ndarray,
    eps: float,
) -> ExactFunctionals:
    """Exact trajectory functionals for piecewise-constant modulation."""
    alpha = 0.0 + 0.0j
    theta = 0.0
    t0 = 0.0
    int_alpha = 0.0 + 0.0j
    int_abs2 = 0.0
    area = 0.0
    int_t_alpha = 0.0 + 0.0j
    int_av = 0.0 + 0.0j
    av = 0.0 + 0.0j  # running int_0^t alpha dt'
    for dur, a, d, phi in zip(durations, amps, deltas, phis):
        pref = eps * a * np.exp(1j * (theta - phi))
        x = d * dur
        if abs(x) > 1e-12:
            b = pref / (1j * d)  # alpha(s) = c + b e^{i d s}
            c = alpha - b
            rot = np.exp(1j * x)
            seg_int = c * dur + b * dur * _eix_m1_over_ix(x)
            seg_abs2 = (abs(c) ** 2 + abs(b) ** 2) * dur + 2.0 * np.real(
                np.conj(c) * b * dur * _eix_m1_over_ix(x)
            )
            seg_area = float(np.imag(np.conj(c) * b * (rot - 1.0)) + abs(b) ** 2 * x)
            # int_0^dur s e^{i d s} ds
            int_s_e = (dur * rot) / (1j * d) - (rot - 1.0) / (1j * d) ** 2
            seg_s_alpha = c * dur**2 / 2.0 + b * int_s_e
            alpha_end = c + b * rot
        else:
            v = pref  # alpha(s) = alpha + v s
            seg_int = alpha * dur + v * dur**2 / 2.0
            seg_abs2 = float(
                abs(alpha) ** 2 * dur
                + np.real(np.conj(alpha) * v) * dur**2
                + abs(v) ** 2 * dur**3 / 3.0
            )
            seg_area = float(np.imag(np.conj(alpha) * v) * dur)
            seg_s_alpha = alpha * dur**2 / 2.0 + v * dur**3 / 3.0
            alpha_end = alpha + v * dur
        int_t_alpha += t0 * seg_int + seg_s_alpha
        int_av += av * dur + dur * seg_int - seg_s_alpha
        int_alpha += seg_int
        int_abs2 += float(seg_abs2)
        area += seg_area
        av += seg_int
        alpha = alpha_end
        theta += d * dur
        t0 += dur
    return ExactFunctionals(
        tau=float(t0),
        alpha_end=complex(alpha),
        int_alpha=complex(int_alpha),
        int_abs2=float(int_abs2),
        area=float(area),
        int_t_alpha=complex(int_t_alpha),
        int_av=complex(int_av),
    )


def _effective_deltas(mod: ModulationSequence, mode: ModeSpec) -> np.ndarray:
    _, _, det, _ = mod.arrays()
    return det + (mode.detuning - mod.delta0)


def sequence_functionals(mod: ModulationSequence, mode: ModeSpec) -> ExactFunctionals:
    dur, amp, _, phi = mod.arrays()
    return piecewise_functionals(dur, amp, _effective_deltas(mod, mode), phi, mode.eps)


# ---------------------------------------------------------------------------
# Trajectories
# ---------------------------------------------------------------------------


@dataclass
class Trajectory:
    """Sampled trajectory plus (when available) exact functionals."""

    times: np.ndarray
    alpha: np.ndarray
    mode: ModeSpec
    exact: ExactFunctionals | None = None

    def __post_init__(self) -> None:
        if len(self.times) != len(self.alpha):
            raise ValueError("times/alpha length mismatch")
        if abs(self.alpha[0]) > 1e-12:
            raise ValueError("trajectory must start at the origin")

    @property
    def tau(self) -> float:
        return float(self.times[-1])

    def to_csv(self, path: str) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "re_alpha", "im_alpha"])
            for t, a in zip(self.times, self.alpha):
                w.writerow([f"{t:.12e}", f"{a.real:.12e}", f"{a.imag:.12e}"])


def _sample_piecewise(
    mod: ModulationSequence, mode: ModeSpec, times: np.ndarray
) -> np.ndarray:
    dur, amp, _, phi = mod.arrays()
    det = _effective_deltas(mod, mode)
    edges = np.concatenate([[0.0], np.cumsum(dur)])
    # per-segment start values
    starts = [0.0 + 0.0j]
    thetas = [0.0]
    for i in range(len(dur)):
        pref = mode.eps * amp[i] * np.exp(1j * (thetas[i] - phi[i]))
        x = det[i] * dur[i]
        if abs(x) > 1e-12:
            b = pref / (1j * det[i])
            starts.append(starts[i] - b + b * np.exp(1j * x))
        else:
            starts.append(starts[i] + pref * dur[i])
        thetas.append(thetas[i] + det[i] * dur[i])
    out = np.empty(len(times), dtype=complex)
    idx = np.clip(np.searchsorted(edges, times, side="right") - 1, 0, len(dur) - 1)
    for i in range(len(dur)):
        sel = idx == i
        if not np.any(sel):
            continue
        s = times[sel] - edges[i]
        pref = mode.eps * amp[i] * np.exp(1j * (thetas[i] - phi[i]))
        if abs(det[i]) > 1e-12:
            b = pref / (1j * det[i])
            out[sel] = starts[i] - b + b * np.exp(1j * det[i] * s)
        else:
            out[sel] = starts[i] + pref * s
    return out


def compute_pst(mod: ModulationSequence, mode: ModeSpec, num_samples: int = 2048) -> Trajectory:
    """Exact trajectory of one mode under a modulation sequence."""
    tau = mod.duration
    times = np.linspace(0.0, tau, num_samples + 1)
    # include segment edges exactly in the sample set
    dur, _, _, _ = mod.arrays()
    edges = np.cumsum(dur)[:-1]
    times = np.unique(np.concatenate([times, edges]))
    alpha = _sample_piecewise(mod, mode, times)
    exact = sequence_functionals(mod, mode)
    return Trajectory(times, alpha, mode, exact)


# ---------------------------------------------------------------------------
# Robustness functionals and infidelity models
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RobustnessReport:
    closure: float  # |alpha(tau)|^2
    alpha_av: complex  # (1/tau) int alpha dt
    mean_square: float  # (1/tau) int |alpha|^2 dt
    r_heat: float
    r_time: float
    r_heat_scaled: float
    degenerate: bool = False


def robustness_report(traj: Trajectory, tau0: float) -> RobustnessReport:
    if tau0 <= 0:
        raise ValueError("tau0 must be > 0")
    if traj.exact is not None:
        tau = traj.exact.tau
        closure = abs(traj.exact.alpha_end) ** 2
        alpha_av = traj.exact.int_alpha / tau
        mean_square = traj.exact.int_abs2 / tau
    else:
        tau = traj.tau
        closure = abs(traj.alpha[-1]) ** 2
        alpha_av = np.trapezoid(traj.alpha, traj.times) / tau
        mean_square = float(np.trapezoid(np.abs(traj.alpha) ** 2, traj.times)) / tau
    r_heat = mean_square / 0.5
    r_time = tau / tau0
    degenerate = mean_square == 0.0
    return RobustnessReport(
        closure=float(closure),
        alpha_av=complex(alpha_av),
        mean_square=float(mean_square),
        r_heat=float(r_heat),
        r_time=float(r_time),
        r_heat_scaled=float(r_heat * r_time),
        degenerate=degenerate,
    )


def heating_infidelity(mean_square: float, n_dot: float, tau: float, order: str = "exact") -> float:
    """Bell-state infidelity from motional heating at rate n_dot."""
    if mean_square < 0 or n_dot < 0 or tau < 0:
        raise ValueError("arguments must be >= 0")
    x = n_dot * mean_square * tau
    if order == "linear":
        return x
    if order == "exact":
        return 5.0 / 8.0 - 0.5 * np.exp(-x) - 0.125 * np.exp(-4.0 * x)
    raise ValueError(f"unknown order {order!r}")


def entangling_phase(mod: ModulationSequence, mode: ModeSpec) -> float:
    """Signed geometric (enclosed-area) phase Im int conj(alpha) d alpha."""
    return sequence_functionals(mod, mode).area


def pst_infidelity(
    trajectories: Sequence[Trajectory],
    target_phases: Sequence[float],
    achieved_phases: Sequence[float],
    num_ions: int = 2,
) -> float:
    """Infidelity from imperfect trajectory closure and phase errors:

    I = 1 - | prod cos(Phi - Psi) * (1 - sum_k sum_j |alpha_k(tau)|^2 (n_bar_k + 1/2)) |^2
    """
    if len(target_phases) != len(achieved_phases):
        raise ValueError("phase lists must have equal length")
    cos_prod = float(np.prod(np.cos(np.asarray(target_phases) - np.asarray(achieved_phases))))
    residual = 0.0
    for traj in trajectories:
        aend = traj.exact.alpha_end if traj.exact is not None else traj.alpha[-1]
        residual += num_ions * abs(aend) ** 2 * (traj.mode.n_bar + 0.5)
    val = cos_prod * (1.0 - residual)
    return float(1.0 - val**2)


def cat_probability(traj: Trajectory, n_bar: float, at: str = "end"):
    """Probability of leaving the initial spin state of a single-ion
    cat-state interferometer: P = (1 - e^{-2 |alpha|^2 (1 + 2 n_bar)}) / 2."""
    if n_bar < 0:
        raise ValueError("n_bar must be >= 0")
    if at == "end":
        a2 = abs(traj.exact.alpha_end if traj.exact is not None else traj.alpha[-1]) ** 2
        return 0.5 * (1.0 - np.exp(-2.0 * a2 * (1.0 + 2.0 * n_bar)))
    a2 = np.abs(traj.alpha) ** 2
    return 0.5 * (1.0 - np.exp(-2.0 * a2 * (1.0 + 2.0 * n_bar)))


def _modulated_spectrum(mod: ModulationSequence, mode: ModeSpec, omega: np.ndarray) -> np.ndarray:
    """|int_0^tau Omega(t) e^{i(theta(t) - omega t)} e^{-i phi(t)} t dt|^2,
    the time-weighted drive spectrum entering the motional-dephasing filter.
    Exact per segment."""
    dur, amp, _, phi = mod.arrays()
    det = _effective_deltas(mod, mode)
    omega = np.asarray(omega, dtype=float)
    total = np.zeros(omega.shape, dtype=complex)
    t0 = 0.0
    theta = 0.0
    for i in range(len(dur)):
        kappa = det[i] - omega  # array
        const = theta - det[i] * t0 - phi[i]
        # integral of t e^{i kappa t} dt over [t0, t0+dur]
        t1 = t0 + dur[i]
        small = np.abs(kappa * dur[i]) < 1e-8
        with np.errstate(divide="ignore", invalid="ignore"):
            e0 = np.exp(1j * kappa * t0)
            e1 = np.exp(1j * kappa * t1)
            term = (t1 * e1 - t0 * e0) / (1j * kappa) + (e1 - e0) / kappa**2
        # small-kappa limit: int t e^{i k t} ~ (t1^2 - t0^2)/2 + i k (t1^3 - t0^3)/3
        if np.any(small):
            ks = kappa[small]
            term[small] = (t1**2 - t0**2) / 2.0 + 1j * ks * (t1**3 - t0**3) / 3.0
        total += amp[i] * np.exp(1j * const) * term
        theta += det[i] * dur[i]
        t0 = t1
    return np.abs(total) ** 2


def motional_dephasing_filter(
    mod: ModulationSequence, mode: ModeSpec, omega: np.ndarray, num_ions: int = 2
) -> np.ndarray:
    """Per-mode filter for motional-frequency noise:
    F_k(omega) = (T_k/4) (sum over ions of eps^2) |time-weighted spectrum|^2,
    with T_k = 2 (n_bar_k + 1/2)."""
    t_k = 2.0 * (mode.n_bar + 0.5)
    eps2 = num_ions * mode.eps**2
    return (t_k / 4.0) * eps2 * _modulated_spectrum(mod, mode, omega)


def motional_dephasing_infidelity(
    mod: ModulationSequence,
    modes: Sequence[ModeSpec],
    psd_delta,
    tau: float,
    num_ions: int = 2,
    omega_max: float | None = None,
) -> float:
    """I = (1/2pi) int S_delta(omega) sum_k F_k(omega) d omega."""

    def integrand(w):
        f = 0.0
        for mode in modes:
            f += float(motional_dephasing_filter(mod, mode, np.array([w]), num_ions)[0])
        return float(psd_delta(w)) * f

    w_hi = omega_max if omega_max is not None else 400.0 / tau
    period = 2 * np.pi / tau
    total = 0.0
    k = 0
    while k * period < w_hi:
        a, b = k * period, min((k + 1) * period, w_hi)
        val, _ = quad(integrand, a, b, limit=100)
        total += val
        if k > 10 and abs(val) < 1e-8 * abs(total):
            break
        k += 1
    return total / np.pi  # (1/2pi) x 2 (even in omega)


def quadratic_sensitivity(mod: ModulationSequence, mode: ModeSpec) -> complex:
    """Second derivative of the endpoint with respect to a common detuning
    shift:  d^2 alpha(tau)/d delta^2
          = -tau^2 alpha(tau) + 2 tau A(tau) - 2 int_0^tau A(t) dt,
    with A(t) = int_0^t alpha dt'."""
    f = sequence_functionals(mod, mode)
    return (
        -f.tau**2 * f.alpha_end + 2.0 * f.tau * f.int_alpha - 2.0 * f.int_av
    )


def quadratic_sensitivity_fd(mod: ModulationSequence, mode: ModeSpec, h: float | None = None) -> complex:
    """Central finite difference of alpha(tau) in the mode detuning."""
    if h is None:
        h = 1e-4 * abs(mode.detuning)
    f0 = sequence_functionals(mod, mode)
    fp = sequence_functionals(mod, replace(mode, detuning=mode.detuning + h))
    fm = sequence_functionals(mod, replace(mode, detuning=mode.detuning - h))
    return (fp.alpha_end - 2.0 * f0.alpha_end + fm.alpha_end) / h**2
