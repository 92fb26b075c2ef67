"""Reproducible batch experiments driven by versioned YAML configs.

Every bundled scenario exercises one slice of the library end-to-end and
writes deterministic artifacts (CSV or JSON) plus a manifest recording the
config hash, seed, package and git versions, and a timestamp.  Same config
and seed always produce byte-identical data files; only the manifest's
timestamp varies.
"""
from __future__ import annotations

import csv
import datetime
import hashlib
import importlib.resources
import json
import subprocess
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import jsonschema
import numpy as np
import yaml

from . import comb, estimation, noise, protocols, pulses, raman
from .errors import ScenarioConfigError

SCHEMA_VERSION = 1

SCENARIO_KINDS = (
    "rwa_validity",
    "closed_forms",
    "permutation_optimality",
    "table1_scaling",
    "crlb_saturation",
    "resolution_extrapolation",
    "raman_three_level",
    "error_models",
    "refine_fiber",
    "visibility_budget",
)

CONFIG_SCHEMA = {
    "type": "object",
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "name": {"type": "string", "minLength": 1},
        "kind": {"enum": list(SCENARIO_KINDS)},
        "description": {"type": "string"},
        "tags": {"type": "array", "items": {"type": "string"}},
        "seed": {"type": "integer", "minimum": 0},
        "params": {"type": "object"},
    },
    "required": ["schema_version", "name", "kind"],
    "additionalProperties": False,
}


@dataclass(frozen=True)
class ScenarioConfig:
    name: str
    kind: str
    description: str = ""
    tags: tuple = ()
    seed: int = 0
    params: dict = field(default_factory=dict)
    source_text: str = ""


def _validate(raw) -> None:
    try:
        jsonschema.validate(raw, CONFIG_SCHEMA)
    except jsonschema.ValidationError as e:
        raise ScenarioConfigError(f"invalid scenario config: {e.message}") from e


def load_scenario_config(path) -> ScenarioConfig:
    text = Path(path).read_text()
    raw = yaml.safe_load(text)
    if not isinstance(raw, dict):
        raise ScenarioConfigError("scenario config must be a mapping")
    _validate(raw)
    return ScenarioConfig(
        name=raw["name"],
        kind=raw["kind"],
        description=raw.get("description", ""),
        tags=tuple(raw.get("tags", ())),
        seed=int(raw.get("seed", 0)),
        params=dict(raw.get("params", {})),
        source_text=text,
    )


def _bundle_dir():
    return importlib.resources.files("combphase") / "scenarios"


def list_scenarios(tag: str | None = None) -> list[dict]:
    """Bundled scenarios: name, kind, description and tags, sorted by name."""
    out = []
    for entry in sorted(_bundle_dir().iterdir(), key=lambda e: e.name):
        if not entry.name.endswith(".yaml"):
            continue
        raw = yaml.safe_load(entry.read_text())
        _validate(raw)
        info = {
            "name": raw["name"],
            "kind": raw["kind"],
            "description": raw.get("description", ""),
            "tags": list(raw.get("tags", ())),
        }
        if tag is None or tag in info["tags"]:
            out.append(info)
    return out


def find_scenario(name_or_path) -> Path:
    """Resolve a bundled scenario name or an explicit config path."""
    p = Path(name_or_path)
    if p.exists():
        return p
    candidate = _bundle_dir() / f"{name_or_path}.yaml"
    if candidate.is_file():
        return Path(str(candidate))
    raise ScenarioConfigError(f"no scenario named or at {name_or_path!r}")


def _git_rev() -> str:
    try:
        return subprocess.run(
            ["git", "rev-parse", "HEAD"],
            capture_output=True, text=True, timeout=5,
            cwd=Path(__file__).parent,
        ).stdout.strip() or "unknown"
    except OSError:
        return "unknown"


def _write_rows(path: Path, header, rows, fmt: str) -> Path:
    """Serialize rows deterministically; floats via repr for exact round-trip."""
    def enc(x):
        return repr(float(x)) if isinstance(x, (float, np.floating)) else x

    if fmt == "json":
        path = path.with_suffix(".json")
        payload = [dict(zip(header, [enc(x) for x in r])) for r in rows]
        path.write_text(json.dumps(payload, indent=2) + "\n")
    else:
        path = path.with_suffix(".csv")
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            for r in rows:
                w.writerow([enc(x) for x in r])
    return path


def _seed_map(fn, seeds, threads: int):
    """Order-preserving map over seeds; reduction is order-independent anyway."""
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            return list(ex.map(fn, seeds))
    return [fn(s) for s in seeds]


# --- runners ---------------------------------------------------------------


def _run_rwa_validity(cfg, out, fmt, threads):
    p = cfg.params
    cycles = p.get("cycles", [5, 10, 20, 30, 60])
    theta = p.get("theta", np.pi / 4)
    envelope = p.get("envelope", "gaussian")
    w = 2.0 * np.pi * p.get("carrier_hz", 1.0)
    rows = []
    for c in cycles:
        spec = pulses.PulseSpec(envelope, theta, c / p.get("carrier_hz", 1.0), w, w, 0.3)
        u = pulses.integrate_pulse(
            spec,
            tol=p.get("integration_tol", 1e-8),
            max_refinements=p.get("max_refinements", 6),
        )
        f = pulses.unitary_fidelity(u, pulses.rwa_unitary(spec))
        rows.append((c, f, 1.0 - f))
    path = _write_rows(out / "rwa_validity", ["cycles", "fidelity", "infidelity"], rows, fmt)
    return [path], {"monotone": bool(np.all(np.diff([r[1] for r in rows]) > 0))}


def _run_closed_forms(cfg, out, fmt, threads):
    p = cfg.params
    rng = np.random.default_rng(cfg.seed)
    rows = []
    worst = 0.0
    for case in range(p.get("n_cases", 200)):
        kind = ["1B", "2B", "phase_ref"][case % 3]
        n = 2 * int(rng.integers(1, p.get("n_max", 10_000) // 2))
        nd = int(rng.integers(1, 64)) if kind == "2B" else 0
        dphi = float(rng.uniform(-0.5, 0.5))
        train = comb.PulseTrain(
            times=np.arange(n) * 1e-8,
            phases=np.arange(n) * dphi,
            thetas=np.full(n, np.pi / 2),
        )
        if kind == "2B":
            u = protocols.closed_form_2b(dphi, n, nd).matrix
            spec = protocols.ProtocolSpec("2B", n, nd, 0.0, np.pi / 2)
            v = protocols.ramsey_model(spec).train_unitary(np.pi / 2, dphi)
        elif kind == "phase_ref":
            u = protocols.phase_reference_sequence(train).matrix
            spec = protocols.ProtocolSpec("phase_ref", n, 0, 0.0, np.pi / 2)
            v = protocols.ramsey_model(spec).train_unitary(np.pi / 2, dphi)
        else:
            u = protocols.closed_form_1b(train.phases).matrix
            spec = protocols.ProtocolSpec("1B", n, 0, 0.0, np.pi / 2)
            v = protocols.ramsey_model(spec).train_unitary(np.pi / 2, dphi)
        err = 1.0 - pulses.matrix_fidelity(u, v)
        worst = max(worst, err)
        rows.append((case, kind, n, nd, dphi, err))
    path = _write_rows(
        out / "closed_forms",
        ["case", "kind", "n", "n_delay", "dphi", "fidelity_error"],
        rows, fmt,
    )
    return [path], {"worst_fidelity_error": worst}


def _run_permutation(cfg, out, fmt, threads):
    p = cfg.params
    rng = np.random.default_rng(cfg.seed)
    rows = []
    for n in p.get("sizes", [4, 6, 8, 10]):
        for trial in range(p.get("trials", 5)):
            phases = rng.uniform(0.0, 2.0 * np.pi, size=n)
            brute = protocols.brute_force_permutation_phase(phases)
            analytic, _ = protocols.optimal_permutation_phase(phases)
            rows.append((n, trial, brute, analytic, abs(brute - analytic)))
    path = _write_rows(
        out / "permutation_optimality",
        ["n", "trial", "brute_force", "analytic", "abs_difference"],
        rows, fmt,
    )
    return [path], {"max_difference": max(r[4] for r in rows)}


def _run_table1_scaling(cfg, out, fmt, threads):
    p = cfg.params
    artifacts = []
    slopes = {}
    for kind_cfg in p.get("scans", [
        {"kind": "1B", "n_values": [100, 1000, 10000]},
        {"kind": "2B", "n_values": [10, 32, 100], "n_delay_values": [10, 32, 100]},
    ]):
        res = estimation.sensitivity_scan(
            kind_cfg["kind"],
            kind_cfg["n_values"],
            m_shots=p.get("m_shots", 10_000),
            n_seeds=p.get("n_seeds", 500),
            n_delay_values=kind_cfg.get("n_delay_values"),
            seed=cfg.seed,
        )
        base = out / f"scaling_{kind_cfg['kind']}"
        estimation.scan_to_csv(res, base.with_suffix(".csv"), base.with_suffix(".slope.json"))
        artifacts += [base.with_suffix(".csv"), base.with_suffix(".slope.json")]
        slopes[kind_cfg["kind"]] = res.slope
    return artifacts, {"slopes": slopes}


def _run_crlb_saturation(cfg, out, fmt, threads):
    p = cfg.params
    n_seeds = p.get("n_seeds", 500)
    rows = []
    for i, pt in enumerate(p["points"]):
        spec = protocols.ProtocolSpec(
            pt["kind"], pt["n"], pt.get("n_delay", 0), 0.0, pt.get("theta", np.pi / 2)
        )
        dphi = pt["dphi"]
        xi = estimation.optimize_reference_phase(spec, spec.theta, dphi, grid=64)
        model = protocols.ramsey_model(replace(spec, reference_phase=xi))
        m_shots = pt.get("m_shots", 10_000)

        def one(seed, model=model, spec=spec, dphi=dphi, m_shots=m_shots):
            rec = estimation.sample_record(model, spec.theta, dphi, m_shots, seed)
            return estimation.ml_estimate(rec, model, (spec.theta, 0.0), fix_theta=True).dphi_hat

        base_seed = cfg.seed + pt.get("seed_offset", 1000 * i)
        ests = _seed_map(one, range(base_seed, base_seed + n_seeds), threads)
        var = float(np.var(ests, ddof=1))
        bound = estimation.crlb(
            estimation.fisher_matrix(model, spec.theta, dphi, m_shots)
        ).variances[1]
        rows.append((pt["kind"], pt["n"], pt.get("n_delay", 0), dphi, m_shots, var, bound, var / bound))
    path = _write_rows(
        out / "crlb_saturation",
        ["kind", "n", "n_delay", "dphi", "m_shots", "variance", "crlb", "ratio"],
        rows, fmt,
    )
    return [path], {"ratios": [r[7] for r in rows]}


def _run_resolution(cfg, out, fmt, threads):
    """Offset-frequency resolution: verified scaling at desk scale, then
    arithmetic extrapolation to configurations far beyond simulation."""
    p = cfg.params
    rows = []
    # reduced-scale consistency: sigma * chi * sqrt(M) should be flat
    consts = []
    for idx, (n, nd) in enumerate(p.get("reduced_points", [[8, 4], [16, 8], [32, 16]])):
        spec = protocols.ProtocolSpec("2B", n, nd, 0.0, np.pi / 2)
        chi = spec.enhancement
        dphi = 0.2 / chi
        xi = estimation.optimize_reference_phase(spec, np.pi / 2, dphi, grid=64)
        model = protocols.ramsey_model(replace(spec, reference_phase=xi))
        m_shots = p.get("m_shots", 2000)

        def one(seed, model=model, dphi=dphi, m_shots=m_shots):
            rec = estimation.sample_record(model, np.pi / 2, dphi, m_shots, seed)
            return estimation.ml_estimate(rec, model, (np.pi / 2, 0.0), fix_theta=True).dphi_hat

        start = cfg.seed + 10_000 * idx
        ests = _seed_map(one, range(start, start + p.get("n_seeds", 100)), threads)
        sigma = float(np.std(ests, ddof=1))
        consts.append(sigma * chi * np.sqrt(m_shots))
        rows.append(("simulated", n, nd, sigma, sigma * chi * np.sqrt(m_shots)))
    for case in p.get("extrapolations", [
        {"rep_rate_hz": 1e8, "n": 500_000, "n_delay": 500_000},
    ]):
        res = estimation.offset_resolution(case["rep_rate_hz"], case["n"], case["n_delay"])
        rows.append(("extrapolated", case["n"], case["n_delay"], res, 0.0))
    path = _write_rows(
        out / "resolution",
        ["row_kind", "n", "n_delay", "value", "scaled_constant"],
        rows, fmt,
    )
    spread = float(np.ptp(consts) / np.mean(consts))
    return [path], {"scaling_constant_spread": spread}


def _run_raman(cfg, out, fmt, threads):
    p = cfg.params
    omega_at = 2.0 * np.pi * p.get("transition_hz", 100.0)

    def make(delta):
        return raman.LambdaSpec(
            rabi=p.get("rabi", 12.0),
            duration=p.get("duration", 1.0),
            laser_freq=omega_at * (1.0 - delta),
            excited_energy=omega_at,
        )

    # Raman regime: strongly detuned pulse must leave the excited state empty.
    _, pop_c = raman.integrate_lambda(make(p.get("detuning_fraction_population", 0.2)))
    # Phase fidelity: weakly detuned pulse maps the leg phase almost one-to-one.
    grid = np.linspace(0.0, 2.0 * np.pi, p.get("grid_points", 25))
    pm = raman.phase_map(make(p.get("detuning_fraction_map", 0.02)), grid)
    path = Path(out) / "raman_phase_map.csv"
    raman.phase_map_to_csv(pm, path)
    summary = {
        "excited_population": pop_c,
        "max_curve_deviation": pm.max_curve_deviation,
        "max_identity_deviation": pm.max_identity_deviation,
        "monotone": pm.monotone,
    }
    spath = Path(out) / "raman_summary.json"
    spath.write_text(json.dumps(summary, indent=2) + "\n")
    return [path, spath], summary


def _run_error_models(cfg, out, fmt, threads):
    p = cfg.params
    gap = p.get("pair_gap_s", 10e-12)
    deph = noise.ac_stark_preset(seed=cfg.seed)
    therm = noise.be_doppler_preset()
    therm_co = noise.be_doppler_preset(copropagating=True)
    rows = [
        ("dephasing_phase_error_rad", noise.expected_dephasing_error(deph, gap)),
        ("doppler_velocity_m_per_s", noise.doppler_velocity(therm)),
        ("doppler_phase_error_rad", noise.doppler_phase_error(therm, gap)),
        ("doppler_copropagating_rad", noise.doppler_phase_error(therm_co, gap)),
        ("spin_echo_constant_field_rad", noise.spin_echo_residual([1.0] * 6, [gap] * 6)),
    ]
    path = _write_rows(out / "error_models", ["quantity", "value"], rows, fmt)
    return [path], dict(rows)


def _run_refine(cfg, out, fmt, threads):
    p = cfg.params
    c = comb.fiber_comb_preset()
    # 200 kHz-class offset as the prior bound; prior_scale < 1 models an
    # operator underestimating the offset, which must abort with a wrap error
    prior = abs(c.phase_step) * p.get("prior_scale", 1.0)
    config = estimation.RefineConfig(
        m_shots=p.get("m_shots", 5000),
        growth=p.get("growth", 4),
        max_stages=p.get("max_stages", 6),
        prior_bound=prior,
        seed=cfg.seed,
    )
    n_seeds = p.get("n_seeds", 100)

    true_bound = abs(c.phase_step)

    def one(seed):
        rng = np.random.default_rng(seed)
        true = float(rng.uniform(-true_bound, true_bound))
        tr = estimation.iterative_refine(true, replace(config, seed=seed * 13 + cfg.seed))
        return true, tr

    results = _seed_map(one, range(cfg.seed, cfg.seed + n_seeds), threads)
    rows = []
    for seed_i, (true, tr) in enumerate(results):
        last = tr.stages[-1]
        rows.append(
            (seed_i, true, len(tr.stages), last.n, last.residual, tr.final_crlb_sigma,
             abs(last.residual) / tr.final_crlb_sigma, int(tr.locked))
        )
    path = _write_rows(
        out / "refine_fiber",
        ["seed", "true_dphi", "stages", "final_n", "residual", "final_crlb_sigma",
         "residual_over_crlb", "locked"],
        rows, fmt,
    )
    trace_rows = [
        (s.n, s.dphi_hat, s.residual, s.crlb_sigma) for s in results[0][1].stages
    ]
    tpath = _write_rows(
        out / "refine_trace_seed0",
        ["n", "dphi_hat", "residual", "crlb_sigma"],
        trace_rows, fmt,
    )
    return [path, tpath], {
        "all_locked": bool(all(r[7] for r in rows)),
        "worst_residual_ratio": max(r[6] for r in rows),
    }


def _run_visibility(cfg, out, fmt, threads):
    p = cfg.params
    budget = raman.visibility_budget(
        gamma=1.0 / p.get("lifetime_s", 8e-9),
        t_e=p.get("excited_window_s", 100e-12),
        epsilon=p.get("epsilon", 0.1),
    )
    path = _write_rows(out / "visibility_budget", ["quantity", "value"],
                       [("pulse_budget", float(budget))], fmt)
    return [path], {"pulse_budget": budget}


_RUNNERS = {
    "rwa_validity": _run_rwa_validity,
    "closed_forms": _run_closed_forms,
    "permutation_optimality": _run_permutation,
    "table1_scaling": _run_table1_scaling,
    "crlb_saturation": _run_crlb_saturation,
    "resolution_extrapolation": _run_resolution,
    "raman_three_level": _run_raman,
    "error_models": _run_error_models,
    "refine_fiber": _run_refine,
    "visibility_budget": _run_visibility,
}


def run_scenario(
    name_or_path,
    out_dir,
    seed: int | None = None,
    fmt: str = "csv",
    threads: int = 1,
) -> dict:
    """Run one scenario; returns {'artifacts': [...], 'summary': {...}}.

    Writes ``manifest.json`` beside the artifacts.  Deterministic data files
    for a fixed config + seed.
    """
    if fmt not in ("csv", "json"):
        raise ScenarioConfigError(f"unsupported output format {fmt!r}")
    cfg = load_scenario_config(find_scenario(name_or_path))
    if seed is not None:
        cfg = replace(cfg, seed=int(seed))
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    started = datetime.datetime.now(datetime.timezone.utc).isoformat()
    artifacts, summary = _RUNNERS[cfg.kind](cfg, out, fmt, threads)
    from . import __version__

    manifest = {
        "scenario": cfg.name,
        "schema_version": SCHEMA_VERSION,
        "seed": cfg.seed,
        "git_rev": _git_rev(),
        "started_at": started,
        "config_sha256": hashlib.sha256(cfg.source_text.encode()).hexdigest(),
        "package_version": __version__,
        "numpy_version": np.__version__,
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    return {
        "artifacts": [str(a) for a in artifacts] + [str(out / "manifest.json")],
        "summary": _jsonable(summary),
    }


def _jsonable(x):
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    return x
