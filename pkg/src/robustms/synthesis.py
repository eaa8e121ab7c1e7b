"""Synthesis of modulation sequences that trace robust trajectories.

Two generators:

- ``match_target_pst``: greedy chunk-by-chunk fitting of a piecewise-constant
  phase/frequency/amplitude drive to a target curve.  Each chunk is an exact
  arc; its free parameter is selected on a grid by jointly matching the chunk
  endpoint to the arc-length-consistent point of the target curve and the
  post-chunk drive direction to the curve tangent there, then refined
  continuously against the interpolated curve.
- ``optimize_pst``: direct constrained maximization of the enclosed area for
  a mirror-symmetric phase-modulated sequence, subject to a zero
  time-averaged displacement and a bound on the mean-square excursion.
  For phases obeying phi_{n-1-j} = -phi_j at constant detuning, a vanishing
  mean displacement implies exact loop closure, so closure never needs its
  own constraint.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq, minimize, minimize_scalar

from .phasespace import (
    ModeSpec,
    ModulationSequence,
    Segment,
    Trajectory,
    compute_pst,
    piecewise_functionals,
)


class InfeasibleTargetError(RuntimeError):
    """Raised when no sequence satisfying the constraints could be found."""


def r_time_model(r_heat: float) -> float:
    """Circle-packing estimate of the minimal slowdown at a given
    mean-square reduction: R_time = 1 / sqrt(2 R_heat)."""
    if r_heat <= 0:
        raise ValueError("r_heat must be > 0")
    return 1.0 / np.sqrt(2.0 * r_heat)


def optimal_heating_infidelity(r_heat: float, n_dot: float, tau0: float) -> float:
    """Linearized heating infidelity of a model-optimal trajectory:
    I = (1/2) n_dot sqrt(R_heat / 2) tau0."""
    return 0.5 * n_dot * np.sqrt(r_heat / 2.0) * tau0


# ---------------------------------------------------------------------------
# Greedy chunk matching
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SynthesisTarget:
    """What to synthesize: a target curve to trace (chunk matching) or a
    mean-square-reduction goal (area maximization).  Exactly one of
    ``trajectory`` / ``r_heat`` must be set."""

    kind: str  # phase | frequency | amplitude
    trajectory: Trajectory | None = None
    r_heat: float | None = None
    chunk_fraction: float = 1.0 / 64.0  # chunk duration in units of tau0

    def __post_init__(self) -> None:
        if (self.trajectory is None) == (self.r_heat is None):
            raise ValueError("set exactly one of trajectory / r_heat")
        if self.chunk_fraction > 1.0 / 50.0:
            raise ValueError("chunk_fraction must be <= 1/50")
        if self.kind not in ("phase", "frequency", "amplitude"):
            raise ValueError(f"unsupported kind {self.kind!r}")


@dataclass(frozen=True)
class MatchResult:
    sequence: ModulationSequence
    trajectory: Trajectory
    r_time: float
    max_residual: float  # worst chunk-endpoint distance to the target curve


def _polyline_project(p: complex, pts: np.ndarray) -> tuple[float, int, float]:
    """(distance, segment index, in-segment fraction) of the closest point on
    the polyline through pts."""
    a = pts[:-1]
    d = pts[1:] - a
    denom = np.abs(d) ** 2
    t = np.clip(
        ((p - a).real * d.real + (p - a).imag * d.imag) / np.maximum(denom, 1e-300),
        0.0,
        1.0,
    )
    dist = np.abs(p - (a + t * d))
    k = int(np.argmin(dist))
    return float(dist[k]), k, float(t[k])


def _point_polyline_distance(p: complex, pts: np.ndarray) -> float:
    return _polyline_project(p, pts)[0]


def match_target_pst(
    target: SynthesisTarget,
    num_candidates: int = 361,
    alignment_weight: float = 0.5,
    max_chunks: int = 4000,
) -> MatchResult:
    """Fit a piecewise-constant drive of the requested kind to the target
    curve, traversing it monotonically.  Returns the sequence and its gate
    slowdown R_time = m t_chunk / tau0."""
    if target.trajectory is None:
        raise ValueError("chunk matching needs a target trajectory")
    traj = target.trajectory
    kind = target.kind
    eps = traj.mode.eps
    delta0 = traj.mode.detuning
    omega0 = delta0 / (2.0 * eps)
    tau0 = 2.0 * np.pi / delta0
    dt = target.chunk_fraction * tau0
    eps_om = eps * omega0
    l_chunk = eps_om * dt

    curve = np.asarray(traj.alpha)
    n_pts = len(curve)
    arc = np.concatenate([[0.0], np.cumsum(np.abs(np.diff(curve)))])
    l_tot = arc[-1]
    # unwrapped tangent direction along the curve
    psi = np.unwrap(np.angle(np.diff(curve)))
    psi = np.concatenate([psi, [psi[-1]]])
    scale = float(np.abs(curve).max())

    if kind == "phase":
        cand = np.linspace(-np.pi, np.pi, num_candidates, endpoint=False)
    elif kind == "frequency":
        # required detuning equals the tangent rotation rate at full speed
        with np.errstate(divide="ignore", invalid="ignore"):
            rate = np.diff(psi) / np.maximum(np.diff(arc), 1e-300) * eps_om
        lo = min(-4.0 * delta0, 1.3 * float(np.min(rate)))
        hi = max(4.0 * delta0, 1.3 * float(np.max(rate)))
        cand = np.linspace(lo, hi, num_candidates)
    else:
        cand = np.linspace(1.0 / num_candidates, 1.0, num_candidates)
    dp = cand[1] - cand[0]

    def clip_param(p: float) -> float:
        if kind == "phase":
            return float(np.angle(np.exp(1j * p)))
        if kind == "frequency":
            return float(np.clip(p, min(-16.0 * delta0, 2.0 * cand[0]), max(16.0 * delta0, 2.0 * cand[-1])))
        return float(np.clip(p, cand[0], 1.0))

    def chunk_end(alpha, theta, p):
        """(endpoint, new theta, arc length) of one chunk with parameter p."""
        if kind == "phase":
            pref = eps_om * np.exp(1j * (theta - p))
            b = pref / (1j * delta0)
            return alpha - b + b * np.exp(1j * delta0 * dt), theta + delta0 * dt, l_chunk
        if kind == "frequency":
            pref = eps_om * np.exp(1j * theta)
            if abs(p * dt) < 1e-9:
                return alpha + pref * dt, theta + p * dt, l_chunk
            b = pref / (1j * p)
            return alpha - b + b * np.exp(1j * p * dt), theta + p * dt, l_chunk
        pref = eps_om * p * np.exp(1j * theta)
        b = pref / (1j * delta0)
        return alpha - b + b * np.exp(1j * delta0 * dt), theta + delta0 * dt, p * l_chunk

    alpha = 0.0 + 0.0j
    theta = 0.0
    s_cur = 0.0
    i_cur = 0
    l_prev = l_chunk
    params: list[float] = []
    max_res = 0.0
    for _ in range(max_chunks):
        # vectorized grid scoring: endpoint vs arc-matched point + tangent
        ends = np.empty(num_candidates, dtype=complex)
        thetas = np.empty(num_candidates)
        lengths = np.empty(num_candidates)
        if kind == "phase":
            pref = eps_om * np.exp(1j * (theta - cand))
            b = pref / (1j * delta0)
            ends = alpha - b + b * np.exp(1j * delta0 * dt)
            thetas[:] = theta + delta0 * dt
            lengths[:] = l_chunk
        elif kind == "frequency":
            for ci, p in enumerate(cand):
                ends[ci], thetas[ci], lengths[ci] = chunk_end(alpha, theta, p)
        else:
            pref = eps_om * cand * np.exp(1j * theta)
            b = pref / (1j * delta0)
            ends = alpha - b + b * np.exp(1j * delta0 * dt)
            thetas[:] = theta + delta0 * dt
            lengths = cand * l_chunk
        s_tgt = np.minimum(s_cur + lengths, l_tot)
        tail = s_cur + 2.5 * l_prev >= l_tot
        idx = np.clip(np.searchsorted(arc, s_tgt), 0, n_pts - 1)
        if tail:
            # the drive cannot make arbitrarily small moves, so the last gap
            # is closed with a joint two-chunk solve when one can reach it
            def gap2(p):
                e1, th1, _ = chunk_end(alpha, theta, clip_param(p[0]))
                e2, _, _ = chunk_end(e1, th1, clip_param(p[1]))
                return abs(e2 - curve[-1])

            best = None
            for c1 in cand[:: max(1, num_candidates // 24)]:
                for c2 in cand[:: max(1, num_candidates // 24)]:
                    g = gap2((c1, c2))
                    if best is None or g < best[0]:
                        best = (g, c1, c2)
            r2 = minimize(gap2, [best[1], best[2]], method="Nelder-Mead",
                          options={"xatol": 1e-12, "fatol": 1e-14})
            pair = r2.x if r2.fun < best[0] else (best[1], best[2])
            final_gap = min(float(r2.fun), best[0])
            if kind != "amplitude":
                for p in pair:
                    p = clip_param(float(p))
                    alpha, theta, _ = chunk_end(alpha, theta, p)
                    params.append(p)
                max_res = max(max_res, abs(alpha - curve[-1]))
                break
            # amplitude-only control: close the gap with a bounded linear
            # least-squares solve over the next n chunk amplitudes (the
            # displacement of chunk k is amp_k * c0 * e^{i theta_k})
            from scipy.optimize import lsq_linear

            c0 = eps_om * (np.exp(1j * delta0 * dt) - 1.0) / (1j * delta0)
            best_fit = None
            for n_close in (4, 8, 16, 32, 64):
                dirs = c0 * np.exp(1j * (theta + delta0 * dt * np.arange(n_close)))
                a_mat = np.vstack([dirs.real, dirs.imag])
                gvec = curve[-1] - alpha
                sol = lsq_linear(a_mat, np.array([gvec.real, gvec.imag]),
                                 bounds=(0.0, 1.0))
                err = float(np.sqrt(sol.cost * 2.0))
                if best_fit is None or err < best_fit[0] * 0.5:
                    best_fit = (err, sol.x)
                if err < 1e-9 * max(scale, 1.0):
                    break
            for a in best_fit[1]:
                p = clip_param(float(a))
                alpha, theta, _ = chunk_end(alpha, theta, p)
                params.append(p)
            max_res = max(max_res, abs(alpha - curve[-1]))
            break
        else:
            drive_dir = thetas - (cand if kind == "phase" else 0.0)
            mis = psi[idx] - drive_dir
            if kind != "amplitude":
                mis = np.angle(np.exp(1j * mis))  # wrap to [-pi, pi)
            score = np.abs(ends - curve[idx]) + alignment_weight * l_chunk * np.abs(mis)
            ci = int(np.argmin(score))

        # continuous refinement: minimize the distance to the interpolated
        # curve near the arc-matched point (or to the endpoint in the tail)
        lo_i = max(0, i_cur - 4)
        hi_i = min(n_pts - 1, int(idx[ci]) + 120)
        local = curve[lo_i : hi_i + 1]

        def residual(p):
            e, _, _ = chunk_end(alpha, theta, p)
            if tail:
                return abs(e - curve[-1])
            return _point_polyline_distance(e, local)

        p_lo = max(cand[0], cand[ci] - dp)
        p_hi = min(cand[-1], cand[ci] + dp)
        res = minimize_scalar(residual, bounds=(p_lo, p_hi), method="bounded",
                              options={"xatol": 1e-10})
        p_best = float(res.x) if res.fun < residual(cand[ci]) else float(cand[ci])
        new_alpha, new_theta, l_best = chunk_end(alpha, theta, p_best)
        if tail and abs(new_alpha - curve[-1]) >= abs(alpha - curve[-1]) - 1e-4 * scale:
            break
        alpha, theta = new_alpha, new_theta
        params.append(p_best)
        l_prev = max(l_best, 0.05 * l_chunk)
        if tail:
            max_res = max(max_res, abs(alpha - curve[-1]))
            if abs(alpha - curve[-1]) < 1e-3 * scale:
                break
            continue
        # advance along the curve by arc length, with a bounded projection
        # correction so drift cannot accumulate
        s_est = min(s_cur + l_best, l_tot)
        i_est = int(np.clip(np.searchsorted(arc, s_est), 0, n_pts - 1))
        w_lo = max(0, i_est - 160)
        w_hi = min(n_pts - 1, i_est + 160)
        dist, k, frac = _polyline_project(alpha, curve[w_lo : w_hi + 1])
        max_res = max(max_res, dist)
        s_proj = arc[w_lo + k] + frac * (arc[w_lo + k + 1] - arc[w_lo + k])
        s_cur = max(s_cur, min(s_proj, s_est))
        i_cur = int(np.clip(np.searchsorted(arc, s_cur), 0, n_pts - 1))
        if i_cur >= n_pts - 1:
            break
    else:
        raise InfeasibleTargetError("chunk matching did not reach the curve end")

    if kind == "phase":
        segs = tuple(Segment(dt, phase=p) for p in params)
    elif kind == "frequency":
        segs = tuple(Segment(dt, delta=p) for p in params)
    else:
        segs = tuple(Segment(dt, amp=p) for p in params)
    seq = ModulationSequence(kind, omega0, delta0, 0.0, segs)
    fitted = compute_pst(seq, ModeSpec(eps, delta0))
    r_time = len(params) * dt / tau0
    return MatchResult(seq, fitted, float(r_time), max_res / scale)


def rebase_carrier(sequence: ModulationSequence, new_delta0: float) -> ModulationSequence:
    """Re-express a phase-modulated sequence on a different carrier detuning.

    The physical drive direction at each chunk centre is preserved by folding
    the detuning difference into the per-chunk phase offsets.  This is how a
    chunked sequence is programmed in practice: the rf detuning is a free
    label, and the natural choice is one full revolution over the sequence
    duration (new_delta0 = 2 pi / duration), which puts the closure minimum
    of a detuning scan at the carrier detuning itself.
    """
    if sequence.kind != "phase":
        raise ValueError("carrier rebasing applies to phase-modulated sequences")
    old = sequence.delta0
    t = 0.0
    segs = []
    for s in sequence.segments:
        centre = t + 0.5 * s.duration
        phi = s.phase - (old - new_delta0) * centre
        phi = float(np.angle(np.exp(1j * phi)))
        segs.append(Segment(s.duration, phase=phi, delta=s.delta, amp=s.amp))
        t += s.duration
    return ModulationSequence(
        "phase", sequence.omega0, new_delta0, sequence.phi0, tuple(segs)
    )


@dataclass(frozen=True)
class EnvelopeFit:
    amplitude: float
    width: float  # seconds; envelope = amplitude * sin^2(pi (t - offset) / (2 width))
    offset: float
    rms_residual: float  # rms deviation in units of the peak amplitude


def fit_sin2_envelope(times: np.ndarray, amps: np.ndarray) -> EnvelopeFit:
    """Least-squares fit of a * sin^2(pi (t - t0) / (2 w)) to an amplitude
    envelope."""
    times = np.asarray(times, dtype=float)
    amps = np.asarray(amps, dtype=float)
    span = times[-1] - times[0]

    def resid(p):
        a, w, t0 = p
        model = a * np.sin(np.pi * (times - t0) / (2.0 * w)) ** 2
        return float(np.sqrt(np.mean((amps - model) ** 2)))

    best = None
    for w0 in (span / 2.0, span / 1.6, span / 2.4):
        r = minimize(resid, [amps.max(), w0, 0.0], method="Nelder-Mead",
                     options={"xatol": 1e-10, "fatol": 1e-12, "maxiter": 4000})
        if best is None or r.fun < best.fun:
            best = r
    a, w, t0 = best.x
    return EnvelopeFit(float(a), float(w), float(t0), float(best.fun / max(abs(a), 1e-12)))


# ---------------------------------------------------------------------------
# Constrained area maximization
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class OptimizerConfig:
    n_segments: int = 32  # even
    max_iterations: int = 600
    tolerance: float = 1e-12
    eps: float = 0.01
    omega0: float = 2.0 * np.pi * 40e3
    seed: int = 0
    num_perturbed_starts: int = 2
    r_time_margin: float = 1.30  # search up to margin * model prediction

    def __post_init__(self) -> None:
        if self.n_segments % 2 != 0 or self.n_segments < 4:
            raise ValueError("n_segments must be even and >= 4")
        if self.tolerance <= 0:
            raise ValueError("tolerance must be > 0")


@dataclass(frozen=True)
class OptimizedSequence:
    sequence: ModulationSequence
    trajectory: Trajectory
    r_time: float
    r_heat: float
    area: float
    closure: float  # |alpha(tau)|


def _mirror_phases(half: np.ndarray) -> np.ndarray:
    return np.concatenate([half, -half[::-1]])


def _max_area(cfg: OptimizerConfig, r_heat_bound: float, r_time: float):
    """Maximal enclosed area at fixed duration r_time * tau0 under the mean
    and mean-square constraints over mirror-symmetric phase patterns.
    Returns (area, half-phases) or (None, None) if every start failed."""
    n = cfg.n_segments
    delta0 = 2.0 * cfg.eps * cfg.omega0
    tau = r_time * 2.0 * np.pi / delta0
    dur = np.full(n, tau / n)
    amps = np.full(n, cfg.omega0)
    dets = np.full(n, delta0)

    cache: dict[bytes, object] = {}

    def functionals(half):
        key = half.tobytes()
        if key not in cache:
            if len(cache) > 4096:
                cache.clear()
            cache[key] = piecewise_functionals(dur, amps, dets, _mirror_phases(half), cfg.eps)
        return cache[key]

    cons = [
        {
            "type": "eq",
            "fun": lambda h: (lambda f: np.array([f.int_alpha.real, f.int_alpha.imag]) / tau)(
                functionals(h)
            ),
        },
        {
            "type": "ineq",
            "fun": lambda h: r_heat_bound - (functionals(h).int_abs2 / tau) / 0.5,
        },
    ]

    rng = np.random.default_rng(cfg.seed)
    j = np.arange(n // 2)
    m0 = max(1, int(round(r_time)))
    starts = [np.zeros(n // 2)]
    for m in {max(1, m0 - 1), m0, m0 + 1}:
        ramp = (2.0 * np.pi * m / n) * (j - (n - 1) / 2.0)
        starts.append(ramp)
    for _ in range(cfg.num_perturbed_starts):
        m = int(rng.integers(max(1, m0 - 1), m0 + 2))
        ramp = (2.0 * np.pi * m / n) * (j - (n - 1) / 2.0)
        starts.append(ramp + 0.3 * rng.standard_normal(n // 2))

    best_area, best_x = None, None
    for x0 in starts:
        res = minimize(
            lambda h: -functionals(h).area,
            x0,
            method="SLSQP",
            constraints=cons,
            options={"maxiter": cfg.max_iterations, "ftol": cfg.tolerance},
        )
        if not res.success:
            continue
        f = functionals(res.x)
        if abs(f.int_alpha) / tau > 1e-7:
            continue
        if (f.int_abs2 / tau) / 0.5 > r_heat_bound * (1.0 + 1e-6):
            continue
        if best_area is None or f.area > best_area:
            best_area, best_x = f.area, res.x.copy()
    return best_area, best_x


def _polish_area(cfg: OptimizerConfig, r_heat_bound: float, r_time: float, half0: np.ndarray):
    """Re-solve at fixed duration with the area pinned to pi/2 exactly,
    minimizing the mean-square excursion."""
    n = cfg.n_segments
    delta0 = 2.0 * cfg.eps * cfg.omega0
    tau = r_time * 2.0 * np.pi / delta0
    dur = np.full(n, tau / n)
    amps = np.full(n, cfg.omega0)
    dets = np.full(n, delta0)

    def functionals(half):
        return piecewise_functionals(dur, amps, dets, _mirror_phases(half), cfg.eps)

    res = minimize(
        lambda h: (functionals(h).int_abs2 / tau) / 0.5,
        half0,
        method="SLSQP",
        constraints=[
            {
                "type": "eq",
                "fun": lambda h: (lambda f: np.array(
                    [f.int_alpha.real / tau, f.int_alpha.imag / tau, f.area - np.pi / 2.0]
                ))(functionals(h)),
            },
        ],
        options={"maxiter": cfg.max_iterations, "ftol": 1e-14},
    )
    f = functionals(res.x)
    ok = (
        abs(f.int_alpha) / tau < 1e-7
        and abs(f.area - np.pi / 2.0) < 1e-7
        and (f.int_abs2 / tau) / 0.5 <= r_heat_bound * (1.0 + 1e-3)
    )
    return res.x if ok else half0


def optimize_pst(r_heat_target: float, cfg: OptimizerConfig = OptimizerConfig()) -> OptimizedSequence:
    """Shortest mirror-symmetric phase pattern that reaches the maximally
    entangling area pi/2 within the mean-square bound r_heat_target."""
    if not (0.05 <= r_heat_target <= 1.0):
        raise ValueError("r_heat_target must lie in [0.05, 1]")
    target = np.pi / 2.0
    model = r_time_model(r_heat_target)
    lo = max(1.0, 0.98 * model)
    hi = cfg.r_time_margin * model + 0.15

    cache: dict[float, tuple] = {}

    def gap(r_time):
        if r_time not in cache:
            cache[r_time] = _max_area(cfg, r_heat_target, r_time)
        area, _ = cache[r_time]
        return (area - target) if area is not None else -np.inf

    g_lo = gap(lo)
    if g_lo >= 0:
        r_sol = lo
    else:
        g_hi = gap(hi)
        if g_hi < 0:
            raise InfeasibleTargetError(
                f"area pi/2 unreachable with r_heat {r_heat_target} below "
                f"r_time {hi:.2f} at n_segments {cfg.n_segments}"
            )
        r_sol = brentq(gap, lo, hi, xtol=5e-3, rtol=1e-4)
        if gap(r_sol) < 0:
            # land on the feasible side of the bracket
            r_sol = min(r for r in cache if cache[r][0] is not None and cache[r][0] >= target)
    area, half = cache[r_sol]
    half = _polish_area(cfg, r_heat_target, r_sol, half)
    delta0 = 2.0 * cfg.eps * cfg.omega0
    tau = r_sol * 2.0 * np.pi / delta0
    phis = _mirror_phases(half)
    segs = tuple(Segment(tau / cfg.n_segments, phase=float(p)) for p in phis)
    seq = ModulationSequence("phase", cfg.omega0, delta0, 0.0, segs)
    traj = compute_pst(seq, ModeSpec(cfg.eps, delta0))
    f = traj.exact
    return OptimizedSequence(
        sequence=seq,
        trajectory=traj,
        r_time=float(r_sol),
        r_heat=float((f.int_abs2 / f.tau) / 0.5),
        area=float(f.area),
        closure=float(abs(f.alpha_end)),
    )
