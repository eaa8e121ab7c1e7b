"""End-to-end acceptance checks.

Each test prints one CRITERION line (PASS/FAIL with the measured numbers)
and asserts the stated tolerance.  Tests that fail here reflect genuine
model/number disagreements documented in the project notes; nothing is
masked.
"""

import functools
import warnings

import numpy as np
import pytest

from robustms.caldag import build_preset, metrics
from robustms.core import SchemeParams
from robustms.mtms import envelope, solve_coefficients, tone_metrics, tone_pst
from robustms.noise import OUParams, calibrate_to_t2, ou_psd, sample_ou
from robustms.phasespace import (
    ModeSpec,
    compute_pst,
    primitive_sequence,
    quadratic_sensitivity,
    quadratic_sensitivity_fd,
    sequence_functionals,
)
from robustms.simulate import (
    SimulationScenario,
    region_encloses,
    run_cat_scan,
    run_gate,
    run_heating_scan,
    run_thermal_comparison,
    scan_static_shift,
    spectator_mode_bound,
)
from robustms.spin import (
    chi_overlap,
    cdd_dephasing_infidelity,
    dephasing_infidelity,
    flower_timing,
    mlcdd_dephasing_infidelity,
    numeric_filter_function,
    pdd_filter,
    periodic_sequence,
)
from robustms.synthesis import (
    OptimizerConfig,
    SynthesisTarget,
    fit_sin2_envelope,
    match_target_pst,
    optimize_pst,
    r_time_model,
    rebase_carrier,
)

from conftest import DELTA0, EPS, OMEGA0, TAU0, random_phase_sequence


def report(tag: str, ok: bool, detail: str) -> None:
    print(f"\nCRITERION {tag}: {'PASS' if ok else 'FAIL'} — {detail}")
    assert ok, f"criterion {tag}: {detail}"


@functools.lru_cache(maxsize=None)
def _opt(r_heat: float):
    return optimize_pst(r_heat, OptimizerConfig(eps=EPS, omega0=OMEGA0))


@functools.lru_cache(maxsize=None)
def _two_tone_match():
    target = tone_pst(solve_coefficients(2), EPS, OMEGA0)
    return match_target_pst(SynthesisTarget("phase", trajectory=target))


# ---------------------------------------------------------------------------
# 1. multi-tone coefficient table
# ---------------------------------------------------------------------------

# reference values printed to the listed number of decimals; tolerance per
# coefficient is 1e-3 plus half an ulp of the printed precision
_TONE_TABLE = {
    1: ([(1.0, 12)], 1.0, 1.0, 1.0),
    2: ([(-1.0 / np.sqrt(3.0), 12), (2.0 / np.sqrt(3.0), 12)], 0.33, 1.73, 0.57),
    3: ([(-0.132, 3), (-0.719, 3), (1.474, 3)], 0.19, 2.06, 0.40),
    4: ([(-0.06, 2), (-0.204, 3), (-0.804, 3), (1.74, 2)], 0.14, 2.4, 0.33),
    5: (
        [(-0.036, 3), (-0.104, 3), (-0.256, 3), (-0.872, 3), (1.972, 3)],
        0.11,
        2.66,
        0.28,
    ),
}


def test_criterion_1_tone_table():
    misses = []
    ok = True
    for n, (coeffs, rh, rt, rs) in _TONE_TABLE.items():
        tones = solve_coefficients(n)
        m = tone_metrics(tones)
        for j, (c, (ref, dp)) in enumerate(zip(tones.coefficients, coeffs), start=1):
            tol = 1e-3 + 0.5 * 10.0 ** (-dp)
            if abs(c - ref) > tol:
                ok = False
                misses.append(f"N={n} c_{j}: {c:.4f} vs printed {ref:g} (|d|={abs(c - ref):.4f})")
        ok &= abs(m.r_heat - rh) <= 0.01
        ok &= abs(m.r_time - rt) <= 0.05
        ok &= abs(m.r_heat_scaled - rs) <= 0.01
    detail = "N=1..5 coefficients and scaling factors within tolerance"
    if misses:
        # the reference table's N=4/5 entries violate their own closure and
        # normalization constraints by ~5e-3; the computed coefficients
        # satisfy both to 1e-13 and match the closed-form expression
        # c_j = 4jb/(1 - j*lambda) exactly, so the residual mismatch is a
        # rounding defect of the reference values, not of the solver
        detail = (
            "scaling factors all within 0.01/0.05/0.01, but printed "
            "coefficients deviate beyond 1e-3+rounding: " + "; ".join(misses)
        )
    report("1", ok, detail)


# ---------------------------------------------------------------------------
# 2. two-tone drive envelope
# ---------------------------------------------------------------------------


def test_criterion_2_two_tone_envelope():
    tones = solve_coefficients(2)
    t = np.linspace(0.0, TAU0, 4097)
    env = envelope(tones, DELTA0, t)
    model = (5.0 - 4.0 * np.cos(DELTA0 * t)) / 3.0
    err = np.max(np.abs(np.abs(env) ** 2 - model))
    peak = np.abs(envelope(tones, DELTA0, np.array([np.pi / DELTA0])))[0]
    ok = err < 1e-9 and abs(peak - np.sqrt(3.0)) < 1e-9
    report("2", ok, f"|f2|^2 matches (5-4cos)/3 to {err:.1e}; peak {peak:.6f}")


# ---------------------------------------------------------------------------
# 3. static-shift robustness scans versus the empirical threshold models
# ---------------------------------------------------------------------------


def test_criterion_3a_static_pdd():
    res = scan_static_shift(
        "pdd",
        n_values=[6, 10, 20, 40, 100],
        shifts=np.geomspace(0.01, 4.0, 28),
        variant="uniform",
    )
    paper = {1e-2: (3.2e-2, 2.8e-2), 1e-3: (1.0e-2, 0.8e-2), 1e-4: (0.3e-2, 0.3e-2)}
    ok = True
    lines = []
    for lv, (ps, pi) in paper.items():
        fit = res.fits[lv]
        ok &= fit["model"] == "linear"
        ok &= abs(fit["slope"] - ps) <= 0.25 * ps
        lines.append(f"{lv:g}: slope {fit['slope']:.3g} (model {ps:.3g})")
    thr10 = res.thresholds[1e-3][list(res.n_values).index(10)]
    thr100 = res.thresholds[1e-3][list(res.n_values).index(100)]
    ok &= abs(thr10 - 0.108) <= 0.20 * 0.108
    ok &= abs(thr100 - 1.008) <= 0.20 * 1.008
    report(
        "3a",
        ok,
        "pdd linear fits "
        + "; ".join(lines)
        + f"; spot thresholds {thr10:.3f} (0.108), {thr100:.3f} (1.008)",
    )


def test_criterion_3b_static_cdd():
    res = scan_static_shift(
        "cdd",
        n_values=[10, 20, 40, 100],
        shifts=np.geomspace(0.05, 4.0, 24),
        steps_per_period=64,
    )
    paper = {1e-2: 0.22, 1e-3: 0.13, 1e-4: 0.07}
    ok = True
    lines = []
    for lv, pc in paper.items():
        fit = res.fits[lv]
        ok &= fit["model"] == "sqrt"
        ok &= abs(fit["coefficient"] - pc) <= 0.25 * pc
        lines.append(f"{lv:g}: {fit['coefficient']:.3f} (model {pc})")
    report("3b", ok, "cdd sqrt coefficients " + "; ".join(lines))


def test_criterion_3c_static_mlcdd_control_field():
    res = scan_static_shift(
        "mlcdd",
        n_values=[100, 200],
        shifts=np.geomspace(5e-4, 0.05, 20),
        params=SchemeParams(
            eps=EPS, omega0=np.sqrt(2.0) * OMEGA0, delta0=DELTA0, fock_cutoff=10
        ),
        variant="control-field",
        steps_per_period=48,
    )
    paper = {1e-2: 2.8e-2, 1e-3: 0.9e-2, 1e-4: 0.3e-2}
    ok = True
    lines = []
    for lv, pc in paper.items():
        fit = res.fits[lv]
        ok &= fit["model"] == "constant"
        ok &= abs(fit["value"] - pc) <= 0.25 * pc
        lines.append(f"{lv:g}: {fit['value']:.3g} (model {pc:.3g})")
    report("3c", ok, "mlcdd control-field constants " + "; ".join(lines))


def test_criterion_3d_static_mlcdd_b_field():
    # the doubled dressing of the multi-level construction means a carrier
    # cycle count of 2N in the simulation corresponds to N in the threshold
    # model; fits are made against the model axis
    res = scan_static_shift(
        "mlcdd",
        n_values=[40, 80, 140, 200],
        shifts=np.geomspace(0.3, 70.0, 30),
        params=SchemeParams(
            eps=EPS, omega0=np.sqrt(2.0) * OMEGA0, delta0=DELTA0, fock_cutoff=6
        ),
        variant="b-field",
        steps_per_period=48,
    )
    n_model = res.n_values / 2.0
    paper = {1e-2: 0.30, 1e-3: 0.17, 1e-4: 0.10}
    ok = True
    lines = []
    for lv, ps in paper.items():
        thr = res.thresholds[lv]
        good = np.isfinite(thr)
        if good.sum() < 2:
            ok = False
            lines.append(f"{lv:g}: threshold below scan floor")
            continue
        slope = np.polyfit(n_model[good], thr[good], 1)[0]
        ok &= abs(slope - ps) <= 0.25 * ps
        lines.append(f"{lv:g}: slope {slope:.3f} (model {ps})")
    report("3d", ok, "mlcdd b-field linear slopes " + "; ".join(lines))


# ---------------------------------------------------------------------------
# 4. Monte-Carlo dephasing versus the filter-overlap models
# ---------------------------------------------------------------------------


def test_criterion_4_monte_carlo_vs_analytic():
    ok = True
    lines = []
    wgrid = np.array([0.0, 1.0])
    for t2 in (2e-3, 12e-3):
        # pulsed decoupling, tau_c = 50 us
        ou = calibrate_to_t2(t2, 50e-6)
        psd = ou_psd(ou)
        for n in (4, 8, 16):
            ft = flower_timing(n, EPS * OMEGA0)
            chi = chi_overlap(psd, pdd_filter(periodic_sequence(n), ft.tau, wgrid).fn, ft.tau)
            ana = dephasing_infidelity(chi, "pdd")
            r = run_gate(
                SimulationScenario(
                    scheme="pdd",
                    params=SchemeParams(fock_cutoff=8),
                    n_pulses=n,
                    noise_z=ou,
                )
            )
            ex = r.infidelity - r.reference_infidelity
            good = ex <= 2.0 * ana + 3.0 * r.stderr and ex >= ana / 2.0 - 3.0 * r.stderr
            ok &= good
            lines.append(f"pdd N={n} T2={t2 * 1e3:g}ms ratio {ex / ana:.2f}")
        # multi-level concatenated scheme, tau_c = 50 us
        for n in (10, 30):
            ana = mlcdd_dephasing_infidelity(psd, n * DELTA0, TAU0)
            r = run_gate(
                SimulationScenario(
                    scheme="mlcdd",
                    params=SchemeParams(
                        eps=EPS,
                        omega0=np.sqrt(2.0) * OMEGA0,
                        delta0=DELTA0,
                        omega_c=n * DELTA0,
                        fock_cutoff=6,
                    ),
                    noise_z=ou,
                )
            )
            ex = r.infidelity - r.reference_infidelity
            good = ex <= 2.0 * ana + 3.0 * r.stderr and ex >= ana / 2.0 - 3.0 * r.stderr
            ok &= good
            lines.append(f"mlcdd N={n} T2={t2 * 1e3:g}ms ratio {ex / ana:.2f}")
        # continuous scheme, tau_c = 20 us
        ou20 = calibrate_to_t2(t2, 20e-6)
        psd20 = ou_psd(ou20)
        for n in (10, 30):
            ana = cdd_dephasing_infidelity(psd20, n * DELTA0, TAU0)
            r = run_gate(
                SimulationScenario(
                    scheme="cdd",
                    params=SchemeParams(
                        eps=EPS, omega0=OMEGA0, omega_c=n * DELTA0, fock_cutoff=8
                    ),
                    noise_z=ou20,
                )
            )
            ex = r.infidelity - r.reference_infidelity
            good = ex <= 2.0 * ana + 3.0 * r.stderr and ex >= ana / 2.0 - 3.0 * r.stderr
            ok &= good
            lines.append(f"cdd N={n} T2={t2 * 1e3:g}ms ratio {ex / ana:.2f}")
    report("4", ok, "excess/analytic within [1/2, 2] at 3 sigma: " + "; ".join(lines))


# ---------------------------------------------------------------------------
# 5. rotary-echo suppression of drive-amplitude noise
# ---------------------------------------------------------------------------


def test_criterion_5_rotary_echo():
    p = SchemeParams(eps=EPS, omega0=OMEGA0, omega_c=10.0 * DELTA0, fock_cutoff=8)
    ou = OUParams(correlation_time=1.0, stationary_std=5e-3)
    excess = {}
    stderr = {}
    for n_flips in (0, 32):
        r = run_gate(
            SimulationScenario(scheme="cdd", params=p, noise_x=ou, n_flips=n_flips)
        )
        excess[n_flips] = r.infidelity - r.reference_infidelity
        stderr[n_flips] = r.stderr
    reduction = excess[0] / max(excess[32], 3.0 * stderr[32])
    ok = reduction >= 10.0
    report(
        "5",
        ok,
        f"amplitude-noise infidelity {excess[0]:.2e} -> {excess[32]:.2e} "
        f"with 32 phase flips (>= {reduction:.0f}x reduction)",
    )


# ---------------------------------------------------------------------------
# 6. Lindblad heating versus the mean-square model
# ---------------------------------------------------------------------------


def test_criterion_6_heating():
    entries = run_heating_scan(
        [("primitive", primitive_sequence(OMEGA0, EPS))]
        + [(f"pst-{rh}", _opt(rh).sequence) for rh in (0.4, 0.2, 0.1)],
        n_dot=40.0,
    )
    ok = True
    lines = []
    for e in entries:
        rel = e.infidelity / e.model_infidelity - 1.0
        ok &= abs(rel) <= 0.10
        lines.append(f"{e.label}: {e.infidelity:.4f} vs model {e.model_infidelity:.4f}")
    prim = entries[0]
    ok &= abs(prim.infidelity - 0.024) < 0.0015
    report("6", ok, "Lindblad within 10% of model — " + "; ".join(lines))


# ---------------------------------------------------------------------------
# 7. optimizer time-cost frontier
# ---------------------------------------------------------------------------


def test_criterion_7_optimizer_frontier():
    rhs = (0.4, 0.2, 0.1, 0.06)
    results = {rh: _opt(rh) for rh in rhs}
    ok = True
    lines = []
    for rh in rhs:
        model = r_time_model(rh)
        rt = results[rh].r_time
        ok &= model <= rt <= 1.25 * model
        ok &= results[rh].r_heat <= rh * 1.02
        lines.append(f"R_heat {rh}: R_time {rt:.3f} (model {model:.3f})")
    ok &= results[0.4].r_time <= 1.25
    ok &= results[0.06].r_time <= 3.5
    rts = [results[rh].r_time for rh in rhs]
    ok &= all(b > a for a, b in zip(rts, rts[1:]))
    report("7", ok, "frontier monotone, within 1.25x of model — " + "; ".join(lines))


# ---------------------------------------------------------------------------
# 8. modulation-kind comparison for traced multi-tone curves
# ---------------------------------------------------------------------------


def test_criterion_8_modulation_kinds():
    ok = True
    lines = []
    fine = tone_pst(solve_coefficients(2), EPS, OMEGA0, num_samples=16384)
    for kind in ("phase", "frequency"):
        res = match_target_pst(
            SynthesisTarget(kind, trajectory=fine, chunk_fraction=1.0 / 100.0)
        )
        ok &= abs(res.r_time - 1.23) <= 0.03
        lines.append(f"{kind[:2]} R_time {res.r_time:.3f}")
    am2 = None
    for n in range(2, 6):
        target = tone_pst(solve_coefficients(n), EPS, OMEGA0, num_samples=8192)
        ph = match_target_pst(SynthesisTarget("phase", trajectory=target))
        am = match_target_pst(SynthesisTarget("amplitude", trajectory=target))
        ok &= am.r_time > ph.r_time
        lines.append(f"N={n}: am {am.r_time:.2f} > pm {ph.r_time:.2f}")
        if n == 2:
            am2 = am
    amps = np.array([s.amp for s in am2.sequence.segments])
    seg = am2.sequence.segments[0].duration
    tmid = (np.arange(len(amps)) + 0.5) * seg
    fit = fit_sin2_envelope(tmid, amps)
    ok &= fit.rms_residual < 0.05
    lines.append(f"am sin^2 rms residual {fit.rms_residual:.3f}")
    report("8", ok, "; ".join(lines))


# ---------------------------------------------------------------------------
# 9. carrier filter-function peak locations
# ---------------------------------------------------------------------------


def test_criterion_9_filter_peaks():
    oc = 2.0 * np.pi * 30e3
    tau = 1.25e-3
    grid_c = 2.0 * np.pi * np.linspace(20e3, 40e3, 21)
    ff_c = numeric_filter_function("cdd", oc, tau, grid_c)
    peak_c = grid_c[np.argmax(ff_c.values)]
    bin_c = grid_c[1] - grid_c[0]
    grid_m = 2.0 * np.pi * np.linspace(12e3, 30e3, 19)
    ff_m = numeric_filter_function("mlcdd", oc, tau, grid_m)
    peak_m = grid_m[np.argmax(ff_m.values)]
    bin_m = grid_m[1] - grid_m[0]
    ok = abs(peak_c - oc) <= bin_c and abs(peak_m - oc / np.sqrt(2.0)) <= bin_m
    report(
        "9",
        ok,
        f"cdd peak {peak_c / 2e3 / np.pi:.1f} kHz (carrier 30.0), "
        f"mlcdd peak {peak_m / 2e3 / np.pi:.1f} kHz (carrier/sqrt2 21.2), "
        "each within one bin",
    )


# ---------------------------------------------------------------------------
# 10. cat-interferometer detuning minima
# ---------------------------------------------------------------------------


def test_criterion_10_cat_scan():
    tau = 3.115e-3
    d0 = 2.0 * np.pi / tau
    om0 = d0 / (2.0 * EPS)
    target = tone_pst(solve_coefficients(2), EPS, om0)
    m = match_target_pst(SynthesisTarget("phase", trajectory=target))
    robust = rebase_carrier(m.sequence, 2.0 * np.pi / m.sequence.duration)
    rscan = run_cat_scan(robust, 2.0 * np.pi * np.linspace(230.0, 300.0, 281), EPS)
    prim = primitive_sequence(om0, EPS)
    pscan = run_cat_scan(prim, 2.0 * np.pi * np.linspace(290.0, 350.0, 241), EPS)
    f_r = rscan.min_detuning / (2.0 * np.pi)
    f_p = pscan.min_detuning / (2.0 * np.pi)
    ok = abs(f_r - 264.0) <= 0.025 * 264.0
    ok &= abs(f_p - 321.0) <= 0.025 * 321.0
    ok &= rscan.min_p < 1e-3 and pscan.min_p < 1e-3
    ok &= rscan.curvature < pscan.curvature
    report(
        "10",
        ok,
        f"minima at {f_r:.1f} Hz (264 +- 2.5%) and {f_p:.1f} Hz (321 +- 2.5%); "
        f"P_min {rscan.min_p:.1e}/{pscan.min_p:.1e}; curvature "
        f"{rscan.curvature:.2e} < {pscan.curvature:.2e}",
    )


# ---------------------------------------------------------------------------
# 11. hot robust gate encloses the cold constant-parameter gate
# ---------------------------------------------------------------------------


def test_criterion_11_thermal_enclosure():
    prim = primitive_sequence(OMEGA0, EPS)
    m = _two_tone_match()
    oc = 12.0 * 2.0 * np.pi / m.sequence.duration
    shifts = np.linspace(-0.25, 0.25, 7) * DELTA0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        res = run_thermal_comparison(
            prim, m.sequence, omega_c=oc, delta_a=shifts, delta_s=shifts
        )
    hot_robust = res.surfaces[("robust", 5.0)]
    cold_prim = res.surfaces[("primitive", 0.0)]
    ok = region_encloses(hot_robust, cold_prim, 1e-3)
    report(
        "11",
        ok,
        "hot (n_bar=5) carrier-protected 1e-3 region encloses the cold "
        f"constant-parameter region on a 7x7 shift grid "
        f"(leakage {res.leakage[5.0]:.1e} renormalized)",
    )


# ---------------------------------------------------------------------------
# 12. calibration-graph bookkeeping
# ---------------------------------------------------------------------------


def test_criterion_12_calibration_graphs():
    expected = {"pdd": (12, 12, 10), "cdd": (12, 10, 8), "mlcdd": (22, 20, 14)}
    ok = True
    lines = []
    for scheme, counts in expected.items():
        g = build_preset(scheme)
        got = metrics(g)
        order = g.topological_order()
        ok &= got == counts and len(order) == len(g.nodes)
        lines.append(f"{scheme}: {got}")
    report("12", ok, "counts and acyclicity — " + "; ".join(lines))


# ---------------------------------------------------------------------------
# 13. structural property suite
# ---------------------------------------------------------------------------


def test_criterion_13_property_suite():
    ok = True
    notes = []

    # tone-coefficient constraint residuals
    worst = 0.0
    for n in range(2, 17):
        c = solve_coefficients(n).coefficients
        j = np.arange(1, n + 1)
        worst = max(worst, abs(np.sum(c**2 / j) - 1.0), abs(np.sum(c / j)))
    ok &= worst < 1e-9
    notes.append(f"constraint residuals < {worst:.1e}")

    # noise sampling is seed-deterministic
    from robustms.core import TimeGrid

    p = OUParams(correlation_time=1e-3, stationary_std=10.0)
    grid = TimeGrid(0.0, 1e-3, 64)
    ok &= np.array_equal(sample_ou(p, grid, seed=3).samples, sample_ou(p, grid, seed=3).samples)
    notes.append("seeded sampling reproducible")

    # mirror-symmetric phase patterns put the endpoint on the real axis,
    # and the optimizer's zero-mean mirror solutions close
    rng = np.random.default_rng(0)
    from robustms.phasespace import ModulationSequence, Segment

    for _ in range(10):
        half = rng.uniform(-np.pi, np.pi, 6)
        phases = np.concatenate([half, -half[::-1]])
        segs = tuple(Segment(TAU0 / 12.0, phase=float(ph)) for ph in phases)
        f = sequence_functionals(
            ModulationSequence("phase", OMEGA0, DELTA0, 0.0, segs), ModeSpec(EPS, DELTA0)
        )
        ok &= abs(f.alpha_end.imag) < 1e-12
    ok &= _opt(0.4).closure < 1e-8
    notes.append("mirror symmetry closes the loop")

    # analytic quadratic sensitivity agrees with finite differences
    worst = 0.0
    for seed in range(8):
        mod = random_phase_sequence(np.random.default_rng(seed), n_segments=12)
        exact = quadratic_sensitivity(mod, ModeSpec(EPS, DELTA0))
        fd = quadratic_sensitivity_fd(mod, ModeSpec(EPS, DELTA0))
        worst = max(worst, abs(exact - fd) / max(abs(exact), abs(fd)))
    ok &= worst <= 0.01
    notes.append(f"quadratic sensitivity vs FD within {worst:.2%}")

    # state norm preserved by the integrator
    r = run_gate(SimulationScenario(params=SchemeParams(fock_cutoff=8)))
    ok &= abs(r.fidelities[0]) <= 1.0 + 1e-9
    notes.append("propagation bounded")

    report("13", ok, "; ".join(notes))


# ---------------------------------------------------------------------------
# 14. spectator-mode excitation bounds
# ---------------------------------------------------------------------------


def test_criterion_14_spectator_bounds():
    nu = 2.0 * np.pi * 220e3
    om = 2.0 * np.pi * 30e3
    b_com = spectator_mode_bound(25.0, nu, om, mode="com")
    b_str = spectator_mode_bound(150.0, nu, om, mode="stretch")
    ref_com, ref_str = 2e-7, 7e-4
    ok_com = ref_com / 10.0 <= b_com.infidelity <= 10.0 * ref_com
    ok_str = ref_str / 10.0 <= b_str.infidelity <= 10.0 * ref_str
    report(
        "14",
        ok_com and ok_str,
        f"com-gate bound {b_com.infidelity:.2e} vs reference {ref_com:.0e} "
        f"({b_com.infidelity / ref_com:.0f}x), stretch-gate bound "
        f"{b_str.infidelity:.2e} vs reference {ref_str:.0e} "
        f"({b_str.infidelity / ref_str:.0f}x); both outside the 10x window",
    )
