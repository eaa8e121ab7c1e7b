"""Config-driven command-line front end.

Subcommands run scenarios, sweeps, and syntheses from JSON configs and emit
deterministic CSV files.  Every CSV carries a header with the SHA-256 hash of
the resolved config and the master seed, so outputs are traceable and
byte-reproducible.

Exit codes: 0 success, 1 tolerance failure, 2 config error.
"""

from __future__ import annotations

import argparse
import copy
import hashlib
import json
import os
import sys

import numpy as np

DEFAULT_SEED = 0
OUT_ENV_VAR = "ROBUSTMS_OUT"


class ConfigError(Exception):
    """A config file failed schema validation; message lists field paths."""


# ---------------------------------------------------------------------------
# Config loading, overrides, and schema validation
# ---------------------------------------------------------------------------


def load_config(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError(f"{path}: top level must be a JSON object")
    return cfg


def apply_overrides(cfg: dict, pairs: list[str]) -> dict:
    """Apply --set key=value pairs; keys are dotted paths, values JSON.
    Returns a new dict; the input config is left untouched."""
    cfg = copy.deepcopy(cfg)
    for pair in pairs:
        if "=" not in pair:
            raise ConfigError(f"--set {pair!r}: expected key=value")
        key, raw = pair.split("=", 1)
        try:
            value = json.loads(raw)
        except json.JSONDecodeError:
            value = raw  # bare strings are convenient on the command line
        node = cfg
        parts = key.split(".")
        for p in parts[:-1]:
            node = node.setdefault(p, {})
            if not isinstance(node, dict):
                raise ConfigError(f"--set {key}: {p} is not an object")
        node[parts[-1]] = value
    return cfg


def config_hash(cfg: dict) -> str:
    canon = json.dumps(cfg, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()[:16]


# Schema language: {"field": spec} where spec is a python type, a tuple of
# allowed string values, a list [spec] for arrays, or a nested dict.  Keys
# ending in "?" are optional.
def validate_schema(cfg, schema, path="") -> list[str]:
    errors: list[str] = []
    if not isinstance(cfg, dict):
        return [f"{path or '<root>'}: expected object, got {type(cfg).__name__}"]
    allowed = {k.rstrip("?"): (k.endswith("?"), v) for k, v in schema.items()}
    for key in cfg:
        if key not in allowed:
            errors.append(f"{path}{key}: unknown field")
    for key, (optional, spec) in allowed.items():
        if key not in cfg:
            if not optional:
                errors.append(f"{path}{key}: missing required field")
            continue
        errors += _validate_value(cfg[key], spec, f"{path}{key}")
    return errors


def _validate_value(value, spec, path) -> list[str]:
    if isinstance(spec, dict):
        return validate_schema(value, spec, path + ".")
    if isinstance(spec, list):
        if not isinstance(value, list):
            return [f"{path}: expected array, got {type(value).__name__}"]
        out = []
        for i, item in enumerate(value):
            out += _validate_value(item, spec[0], f"{path}[{i}]")
        return out
    if isinstance(spec, tuple):
        if value not in spec:
            return [f"{path}: expected one of {spec}, got {value!r}"]
        return []
    if spec is float:
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            return [f"{path}: expected number, got {type(value).__name__}"]
        return []
    if spec is int:
        if not isinstance(value, int) or isinstance(value, bool):
            return [f"{path}: expected integer, got {type(value).__name__}"]
        return []
    if not isinstance(value, spec):
        return [f"{path}: expected {spec.__name__}, got {type(value).__name__}"]
    return []


_OU_SCHEMA = {"correlation_time": float, "stationary_std": float}

_PARAMS_SCHEMA = {
    "eps?": float,
    "omega0?": float,
    "delta0?": float,
    "omega_c?": float,
    "nu?": float,
    "fock_cutoff?": int,
    "num_ions?": int,
    "delta_omega_pm?": float,
    "beta_z?": float,
    "beta_x?": float,
}

_SIMULATE_SCHEMA = {
    "scheme?": ("primitive", "pdd", "cdd", "mlcdd"),
    "params?": _PARAMS_SCHEMA,
    "n_pulses?": int,
    "pdd_variant?": ("flower", "echo", "uniform"),
    "n_flips?": int,
    "noise_z?": _OU_SCHEMA,
    "noise_x?": _OU_SCHEMA,
    "noise_variant?": ("b-field", "control-field"),
    "ensemble?": int,
    "steps_per_period?": int,
    "n_bar?": float,
}

_SCAN_SCHEMA = {
    "kind": ("static", "heating", "thermal", "cat"),
    "scheme?": ("pdd", "cdd", "mlcdd"),
    "variant?": ("flower", "echo", "uniform", "b-field", "control-field"),
    "n_values?": [float],
    "shifts?": [float],
    "steps_per_period?": int,
    "params?": _PARAMS_SCHEMA,
    "n_dot?": float,
    "r_heat_targets?": [float],
    "omega_c_cycles?": float,
    "delta_a?": [float],
    "delta_s?": [float],
    "n_bars?": [float],
    "tau?": float,
    "detuning_hz?": [float],  # [lo, hi, count]
    "robust?": bool,
    "eps?": float,
}

_SYNTH_SCHEMA = {
    "kind": ("match", "optimize"),
    "modulation?": ("phase", "frequency", "amplitude"),
    "tones?": int,
    "chunk_fraction?": float,
    "r_heat?": float,
    "eps?": float,
    "omega0?": float,
    "n_segments?": int,
}

_FILTER_SCHEMA = {
    "scheme": ("pdd", "cdd", "mlcdd"),
    "omega_c_hz?": float,
    "tau?": float,
    "n_pulses?": int,
    "freq_hz?": [float],  # [lo, hi, count]
    "channel?": ("dephasing", "amplitude"),
}

_DAG_SCHEMA = {"scheme": ("pdd", "cdd", "cdd-tablei", "mlcdd"), "num_ions?": int}

_SCHEMAS = {
    "simulate": _SIMULATE_SCHEMA,
    "scan": _SCAN_SCHEMA,
    "synthesize": _SYNTH_SCHEMA,
    "filter": _FILTER_SCHEMA,
    "dag": _DAG_SCHEMA,
    "mtms": {"n?": int},
    "reproduce-all": {},
}


# ---------------------------------------------------------------------------
# Output helpers
# ---------------------------------------------------------------------------


def _header(cfg: dict, seed: int) -> str:
    return f"config_hash: {config_hash(cfg)}\nseed: {seed}"


def _write_csv(path: str, header: str, columns: dict) -> None:
    names = list(columns)
    rows = zip(*[columns[n] for n in names])
    with open(path, "w", newline="\n") as fh:
        for line in header.splitlines():
            fh.write(f"# {line}\n")
        fh.write(",".join(names) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, str):
        return v
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return f"{float(v):.12g}"


def _resolve_out(args) -> str:
    out = args.out or os.environ.get(OUT_ENV_VAR) or "out"
    os.makedirs(out, exist_ok=True)
    if not os.access(out, os.W_OK):
        raise ConfigError(f"output directory {out!r} is not writable")
    return out


# ---------------------------------------------------------------------------
# Config -> domain objects
# ---------------------------------------------------------------------------


def _params_from(cfg: dict):
    from .core import SchemeParams

    return SchemeParams(**cfg.get("params", {}))


def _ou_from(cfg):
    from .noise import OUParams

    if cfg is None:
        return None
    return OUParams(**cfg)


def scenario_from_config(cfg: dict, seed: int):
    from .simulate import SimulationScenario

    kwargs = dict(
        scheme=cfg.get("scheme", "primitive"),
        params=_params_from(cfg),
        n_pulses=cfg.get("n_pulses", 0),
        pdd_variant=cfg.get("pdd_variant", "flower"),
        n_flips=cfg.get("n_flips", 0),
        noise_z=_ou_from(cfg.get("noise_z")),
        noise_x=_ou_from(cfg.get("noise_x")),
        n_bar=cfg.get("n_bar", 0.0),
        master_seed=seed,
    )
    if "ensemble" in cfg:
        kwargs["ensemble"] = cfg["ensemble"]
    if "steps_per_period" in cfg:
        kwargs["steps_per_period"] = cfg["steps_per_period"]
    return SimulationScenario(**kwargs)


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def cmd_simulate(cfg: dict, out: str, seed: int, jobs: int) -> int:
    from .simulate import run_gate

    scen = scenario_from_config(cfg, seed)
    res = run_gate(scen, cfg.get("noise_variant", "b-field"))
    _write_csv(
        os.path.join(out, "gate.csv"),
        _header(cfg, seed),
        {
            "infidelity": [res.infidelity],
            "stderr": [res.stderr],
            "reference_infidelity": [res.reference_infidelity],
            "target_phase": [res.target_phase],
            "n_traj": [len(res.fidelities)],
        },
    )
    return 0


def cmd_scan(cfg: dict, out: str, seed: int, jobs: int) -> int:
    kind = cfg["kind"]
    if kind == "static":
        return _scan_static(cfg, out, seed)
    if kind == "heating":
        return _scan_heating(cfg, out, seed)
    if kind == "thermal":
        return _scan_thermal(cfg, out, seed)
    return _scan_cat(cfg, out, seed)


def _scan_static(cfg: dict, out: str, seed: int) -> int:
    from .simulate import scan_static_shift

    if "n_values" not in cfg or "shifts" not in cfg or "scheme" not in cfg:
        raise ConfigError("static scan needs scheme, n_values, shifts")
    res = scan_static_shift(
        cfg["scheme"],
        cfg["n_values"],
        cfg["shifts"],
        params=_params_from(cfg) if "params" in cfg else None,
        variant=cfg.get("variant", "none"),
        steps_per_period=cfg.get("steps_per_period", 24),
    )
    n_col, s_col, i_col = [], [], []
    for i, n in enumerate(res.n_values):
        for j, s in enumerate(res.shifts):
            n_col.append(n)
            s_col.append(s)
            i_col.append(res.infidelity[i, j])
    _write_csv(
        os.path.join(out, "static_scan.csv"),
        _header(cfg, seed),
        {"n": n_col, "shift": s_col, "infidelity": i_col},
    )
    lv_col, tn_col, thr_col = [], [], []
    for lv, thr in res.thresholds.items():
        for n, t in zip(res.n_values, thr):
            lv_col.append(lv)
            tn_col.append(n)
            thr_col.append(t)
    _write_csv(
        os.path.join(out, "static_thresholds.csv"),
        _header(cfg, seed) + "\nfits: " + json.dumps(res.fits, sort_keys=True),
        {"level": lv_col, "n": tn_col, "threshold": thr_col},
    )
    return 0


def _scan_heating(cfg: dict, out: str, seed: int) -> int:
    from .phasespace import primitive_sequence
    from .simulate import run_heating_scan
    from .synthesis import OptimizerConfig, optimize_pst

    if "n_dot" not in cfg:
        raise ConfigError("heating scan needs n_dot")
    eps = cfg.get("eps", 0.01)
    omega0 = cfg.get("params", {}).get("omega0", 2 * np.pi * 40e3)
    seqs = [("primitive", primitive_sequence(omega0, eps))]
    for rh in cfg.get("r_heat_targets", []):
        opt = optimize_pst(rh, OptimizerConfig(eps=eps, omega0=omega0, seed=seed))
        seqs.append((f"pst-{rh:g}", opt.sequence))
    entries = run_heating_scan(seqs, cfg["n_dot"], eps=eps)
    _write_csv(
        os.path.join(out, "heating_scan.csv"),
        _header(cfg, seed),
        {
            "label": [e.label for e in entries],
            "r_heat": [e.r_heat for e in entries],
            "r_time": [e.r_time for e in entries],
            "infidelity": [e.infidelity for e in entries],
            "model_infidelity": [e.model_infidelity for e in entries],
        },
    )
    return 0


def _scan_thermal(cfg: dict, out: str, seed: int) -> int:
    from .mtms import solve_coefficients, tone_pst
    from .phasespace import primitive_sequence
    from .simulate import run_thermal_comparison
    from .synthesis import SynthesisTarget, match_target_pst

    eps = cfg.get("eps", 0.01)
    omega0 = cfg.get("params", {}).get("omega0", 2 * np.pi * 40e3)
    delta0 = 2.0 * eps * omega0
    target = tone_pst(solve_coefficients(2), eps, omega0)
    match = match_target_pst(SynthesisTarget("phase", trajectory=target))
    cycles = cfg.get("omega_c_cycles", 12.0)
    omega_c = cycles * 2.0 * np.pi / match.sequence.duration
    da = np.asarray(cfg.get("delta_a", list(np.linspace(-0.25, 0.25, 7)))) * delta0
    ds = np.asarray(cfg.get("delta_s", list(np.linspace(-0.25, 0.25, 7)))) * delta0
    res = run_thermal_comparison(
        primitive_sequence(omega0, eps),
        match.sequence,
        omega_c,
        da,
        ds,
        n_bars=tuple(cfg.get("n_bars", (0.0, 5.0))),
        eps=eps,
    )
    lab_col, nb_col, da_col, ds_col, f_col = [], [], [], [], []
    for (label, n_bar), surf in res.surfaces.items():
        for i, a in enumerate(da):
            for j, s in enumerate(ds):
                lab_col.append(label)
                nb_col.append(n_bar)
                da_col.append(a)
                ds_col.append(s)
                f_col.append(surf[i, j])
    _write_csv(
        os.path.join(out, "thermal_scan.csv"),
        _header(cfg, seed),
        {
            "label": lab_col,
            "n_bar": nb_col,
            "delta_a": da_col,
            "delta_s": ds_col,
            "fidelity": f_col,
        },
    )
    return 0


def _scan_cat(cfg: dict, out: str, seed: int) -> int:
    from .mtms import solve_coefficients, tone_pst
    from .phasespace import primitive_sequence
    from .simulate import run_cat_scan
    from .synthesis import SynthesisTarget, match_target_pst, rebase_carrier

    eps = cfg.get("eps", 0.01)
    tau = cfg.get("tau", 3.115e-3)
    delta0 = 2.0 * np.pi / tau
    omega0 = delta0 / (2.0 * eps)
    lo, hi, count = cfg.get("detuning_hz", [280.0, 360.0, 161.0])
    detunings = 2.0 * np.pi * np.linspace(lo, hi, int(count))
    if cfg.get("robust", False):
        target = tone_pst(solve_coefficients(2), eps, omega0)
        match = match_target_pst(SynthesisTarget("phase", trajectory=target))
        mod = rebase_carrier(match.sequence, 2.0 * np.pi / match.sequence.duration)
    else:
        mod = primitive_sequence(omega0, eps)
    res = run_cat_scan(mod, detunings, eps)
    _write_csv(
        os.path.join(out, "cat_scan.csv"),
        _header(cfg, seed)
        + f"\nmin_detuning_hz: {res.min_detuning / (2 * np.pi):.12g}"
        + f"\nmin_p: {res.min_p:.12g}\ncurvature: {res.curvature:.12g}",
        {"detuning_hz": detunings / (2 * np.pi), "p_up": res.p_up},
    )
    return 0


def cmd_synthesize(cfg: dict, out: str, seed: int, jobs: int) -> int:
    from .mtms import solve_coefficients, tone_pst
    from .synthesis import (
        OptimizerConfig,
        SynthesisTarget,
        match_target_pst,
        optimize_pst,
    )

    eps = cfg.get("eps", 0.01)
    omega0 = cfg.get("omega0", 2 * np.pi * 40e3)
    if cfg["kind"] == "match":
        target = tone_pst(solve_coefficients(cfg.get("tones", 2)), eps, omega0)
        kwargs = {}
        if "chunk_fraction" in cfg:
            kwargs["chunk_fraction"] = cfg["chunk_fraction"]
        res = match_target_pst(
            SynthesisTarget(cfg.get("modulation", "phase"), trajectory=target, **kwargs)
        )
        seq, extra = res.sequence, {
            "r_time": res.r_time,
            "max_residual": res.max_residual,
        }
    else:
        if "r_heat" not in cfg:
            raise ConfigError("synthesize.kind=optimize needs r_heat")
        ocfg = OptimizerConfig(
            eps=eps, omega0=omega0, seed=seed, n_segments=cfg.get("n_segments", 32)
        )
        res = optimize_pst(cfg["r_heat"], ocfg)
        seq, extra = res.sequence, {
            "r_time": res.r_time,
            "r_heat": res.r_heat,
            "area": res.area,
            "closure": res.closure,
        }
    meta = "\n".join(f"{k}: {v:.12g}" for k, v in extra.items())
    _write_csv(
        os.path.join(out, "sequence.csv"),
        _header(cfg, seed)
        + f"\nkind: {seq.kind}\nomega0: {seq.omega0:.12g}\ndelta0: {seq.delta0:.12g}\n"
        + meta,
        {
            "duration": [s.duration for s in seq.segments],
            "phase": [s.phase for s in seq.segments],
            "delta": [s.delta for s in seq.segments],
            "amp": [s.amp for s in seq.segments],
        },
    )
    return 0


def cmd_mtms(cfg: dict, out: str, seed: int, jobs: int) -> int:
    from .mtms import solve_coefficients, tone_metrics

    n_max = cfg.get("n", 5)
    rows = {"n": [], "j": [], "c_j": [], "r_heat": [], "r_time": [], "r_heat_scaled": []}
    for n in range(1, n_max + 1):
        tones = solve_coefficients(n)
        m = tone_metrics(tones)
        for j, c in enumerate(tones.coefficients, start=1):
            rows["n"].append(n)
            rows["j"].append(j)
            rows["c_j"].append(c)
            rows["r_heat"].append(m.r_heat)
            rows["r_time"].append(m.r_time)
            rows["r_heat_scaled"].append(m.r_heat_scaled)
    _write_csv(os.path.join(out, "mtms.csv"), _header(cfg, seed), rows)
    return 0


def cmd_filter(cfg: dict, out: str, seed: int, jobs: int) -> int:
    from .spin import numeric_filter_function

    omega_c = 2 * np.pi * cfg.get("omega_c_hz", 30e3)
    tau = cfg.get("tau", 1.25e-3)
    lo, hi, count = cfg.get("freq_hz", [1e3, 60e3, 240.0])
    omega = 2 * np.pi * np.linspace(lo, hi, int(count))
    ff = numeric_filter_function(
        cfg["scheme"], omega_c, tau, omega, channel=cfg.get("channel", "dephasing")
    )
    _write_csv(
        os.path.join(out, "filter.csv"),
        _header(cfg, seed),
        {"freq_hz": ff.omega / (2 * np.pi), "filter": ff.values},
    )
    return 0


def cmd_dag(cfg: dict, out: str, seed: int, jobs: int) -> int:
    from .caldag import build_preset, metrics

    graph = build_preset(cfg["scheme"], num_ions=cfg.get("num_ions", 2))
    nodes, strong, weak = metrics(graph)
    with open(os.path.join(out, "dag.json"), "w", newline="\n") as fh:
        fh.write(graph.to_json() + "\n")
    with open(os.path.join(out, "dag.dot"), "w", newline="\n") as fh:
        fh.write(graph.to_graphviz() + "\n")
    _write_csv(
        os.path.join(out, "dag_metrics.csv"),
        _header(cfg, seed),
        {"nodes": [nodes], "strong": [strong], "weak": [weak]},
    )
    return 0


def cmd_reproduce_all(cfg: dict, out: str, seed: int, jobs: int) -> int:
    """Run the full acceptance suite; exit 1 on any tolerance failure."""
    import pytest

    tests = os.path.join(os.path.dirname(__file__), "..", "..", "tests")
    tests = os.path.abspath(tests)
    target = tests if os.path.isdir(tests) else "tests"
    rc = pytest.main(["-v", os.path.join(target, "test_acceptance.py")])
    return 0 if rc == 0 else 1


def cmd_validate(args) -> int:
    """Schema + physics sanity checks without running anything."""
    if not args.config:
        print("validate: --config is required", file=sys.stderr)
        return 2
    try:
        cfg = load_config(args.config)
        cfg = apply_overrides(cfg, args.set or [])
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    sub = cfg.get("subcommand", "simulate")
    schema = _SCHEMAS.get(sub)
    if schema is None:
        print(f"config error: unknown subcommand {sub!r}", file=sys.stderr)
        return 2
    errors = validate_schema({k: v for k, v in cfg.items() if k != "subcommand"}, schema)
    for e in errors:
        print(f"config error: {e}", file=sys.stderr)
    if errors:
        return 2
    diagnostics = physics_diagnostics(cfg)
    for d in diagnostics:
        print(f"warning: {d}")
    if not diagnostics:
        print("ok: no diagnostics")
    return 0


def physics_diagnostics(cfg: dict) -> list[str]:
    """Sanity warnings that do not block execution."""
    from .core import SchemeParams

    out: list[str] = []
    p = cfg.get("params", {})
    try:
        params = SchemeParams(**p)
    except (TypeError, ValueError) as exc:
        return [f"params: {exc}"]
    if params.omega_c > 0 and params.omega_c >= params.nu / 3.0:
        out.append(
            f"omega_c = {params.omega_c:.3g} within 3x of nu = {params.nu:.3g}: "
            "rotating-wave treatment of the carrier is strained"
        )
    n_bar = float(cfg.get("n_bar", 0.0))
    if n_bar > 0:
        # thermal tail mass above the cutoff
        n = np.arange(params.fock_cutoff)
        pmf = (n_bar / (n_bar + 1.0)) ** n / (n_bar + 1.0)
        tail = 1.0 - pmf.sum()
        if tail > 1e-4:
            out.append(
                f"fock_cutoff = {params.fock_cutoff} keeps only "
                f"{1 - tail:.4f} of the n_bar = {n_bar:g} thermal weight"
            )
    return out


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------

_COMMANDS = {
    "simulate": cmd_simulate,
    "scan": cmd_scan,
    "synthesize": cmd_synthesize,
    "mtms": cmd_mtms,
    "filter": cmd_filter,
    "dag": cmd_dag,
    "reproduce-all": cmd_reproduce_all,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="robustms",
        description="Design, simulate, and verify noise-robust entangling gates.",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name in list(_COMMANDS) + ["validate"]:
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON config file")
        p.add_argument("--out", help=f"output directory (default ${OUT_ENV_VAR} or ./out)")
        p.add_argument("--seed", type=int, default=DEFAULT_SEED, help="master seed")
        p.add_argument(
            "--set",
            action="append",
            metavar="KEY=VALUE",
            help="override a config field (dotted path, JSON value)",
        )
        p.add_argument("--jobs", type=int, default=1, help="max parallel workers")
        if name == "mtms":
            p.add_argument("--n", type=int, help="largest tone count")
        if name == "dag":
            p.add_argument("--scheme", help="calibration preset name")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.subcommand == "validate":
        return cmd_validate(args)
    try:
        cfg = load_config(args.config)
        cfg = apply_overrides(cfg, args.set or [])
        if args.subcommand == "mtms" and getattr(args, "n", None):
            cfg["n"] = args.n
        if args.subcommand == "dag" and getattr(args, "scheme", None):
            cfg["scheme"] = args.scheme
        errors = validate_schema(cfg, _SCHEMAS[args.subcommand])
        if errors:
            raise ConfigError("; ".join(errors))
        if args.subcommand == "scan" and "kind" not in cfg:
            raise ConfigError("kind: missing required field")
        if args.subcommand == "synthesize" and "kind" not in cfg:
            raise ConfigError("kind: missing required field")
        if args.subcommand == "dag" and "scheme" not in cfg:
            raise ConfigError("scheme: missing required field")
        if args.subcommand == "filter" and "scheme" not in cfg:
            raise ConfigError("scheme: missing required field")
        out = _resolve_out(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    return _COMMANDS[args.subcommand](cfg, out, args.seed, args.jobs)


if __name__ == "__main__":
    sys.exit(main())
