"""Scenario configuration, orchestration and CSV/JSON output.

A scenario is a JSON document. Quantum scenarios describe a Hamiltonian as
``[coefficient, "PAULI"]`` pairs and channels as
``{"op": label, "rate": g, "bath_temperature": T}``; a channel with a bath
temperature expands into a detailed-balance emission/absorption pair.
Channel operators are normalized to unit Hilbert-Schmidt norm before the rate
is applied.
"""

from __future__ import annotations

import csv
import json
import math
import time
from dataclasses import asdict, dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import classical, erasure, hilbert, ledger
from .dynamics import (
    DissipationChannel,
    Generator,
    bath_channels,
    normalized,
    propagate,
    validate_generator,
)
from .errors import ConfigError, QThermoError
from .hilbert import DensityMatrix, HamiltonianSpec, SpaceLayout

KINDS = (
    "closed-bipartite-exchange",
    "qubit-thermal-bath",
    "engine-cycle",
    "classical-comparator",
    "erasure",
)

THERMO_COLUMNS = ("t", "S", "diS_dt", "deS_dt", "dQ_dt", "dW_dt", "E", "T_gen", "conv_ep_rate")
BIPARTITE_COLUMNS = ("S_A", "S_B", "S_AB", "S_C", "Q_A", "Q_B", "T_gen_A", "T_gen_B")


@dataclass
class ScenarioConfig:
    kind: str
    name: str
    layout: SpaceLayout | None = None
    hamiltonian: list = field(default_factory=list)
    channels: list = field(default_factory=list)
    initial_state: dict = field(default_factory=dict)
    t0: float = 0.0
    t1: float = 1.0
    h_step: float = 1e-3
    split: list = field(default_factory=list)
    bath_temperature: float | None = None
    csv_path: str = ""
    json_path: str = ""
    seed: int = 0
    params: dict = field(default_factory=dict)


@dataclass
class RunSummary:
    scenario: str
    name: str
    seed: int
    samples: int = 0
    h_step: float | None = None
    regime: str | None = None
    max_abs_interior_rate: float | None = None
    ledger_closure_residual: float | None = None
    ledger_closure_tolerance: float | None = None
    first_law_residual: float | None = None
    correlation_sum_rule_residual: float | None = None
    correlation_temperature_residual: float | None = None
    unallocated_interaction_energy: float | None = None
    conventional_ep_min: float | None = None
    conventional_ep_max: float | None = None
    efficiency: dict | None = None
    classical: dict | None = None
    erasure: dict | None = None
    checks: dict = field(default_factory=dict)
    outputs: dict = field(default_factory=dict)
    wall_clock: float = 0.0


# --- config parsing -------------------------------------------------------


def _get(doc: dict, key: str, path: str, kind=None, default=...):
    if key not in doc:
        if default is ...:
            raise ConfigError(f"{path}{key}", "missing required field")
        return default
    value = doc[key]
    wrong_type = kind is not None and not isinstance(value, kind)
    if wrong_type or (isinstance(value, bool) and kind is not bool):
        raise ConfigError(f"{path}{key}", f"expected {getattr(kind, '__name__', kind)}, got {type(value).__name__}")
    return value


def _number(doc, key, path, default=..., positive=False):
    value = _get(doc, key, path, (int, float), default)
    if value is None:
        return None
    value = float(value)
    if not math.isfinite(value):
        raise ConfigError(f"{path}{key}", "must be finite")
    if positive and not value > 0:
        raise ConfigError(f"{path}{key}", "must be positive")
    return value


def _block(doc, key, path="") -> dict:
    return _get(doc, key, path, dict, {})


def parse_config(doc: Any) -> ScenarioConfig:
    """Validate a decoded JSON document; errors name the offending field."""
    if not isinstance(doc, dict):
        raise ConfigError("$", "config must be a JSON object")
    kind = _get(doc, "scenario", "", str)
    if kind not in KINDS:
        raise ConfigError("scenario", f"unknown scenario kind {kind!r}; expected one of {', '.join(KINDS)}")
    name = _get(doc, "name", "", str, kind)
    seed = _get(doc, "seed", "", int, 0)
    out = _block(doc, "output")
    cfg = ScenarioConfig(
        kind=kind,
        name=name,
        seed=seed,
        csv_path=_get(out, "csv", "output.", str, f"{name}.csv"),
        json_path=_get(out, "json", "output.", str, f"{name}.json"),
    )
    if kind == "classical-comparator":
        p = _block(doc, "classical")
        cfg.params = {
            "heat_capacity_a": _number(p, "heat_capacity_a", "classical.", 1.0, True),
            "heat_capacity_b": _number(p, "heat_capacity_b", "classical.", 1.0, True),
            "temperature_a": _number(p, "temperature_a", "classical.", 300.0, True),
            "temperature_b": _number(p, "temperature_b", "classical.", 400.0, True),
            "dq": _number(p, "dq", "classical.", 1e-3, True),
            "max_steps": _get(p, "max_steps", "classical.", int, 10_000_000),
        }
        if cfg.params["max_steps"] <= 0:
            raise ConfigError("classical.max_steps", "must be positive")
        return cfg
    if kind == "erasure":
        p = _block(doc, "erasure")
        probs = _get(p, "probabilities", "erasure.", list)
        if not probs or not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in probs):
            raise ConfigError("erasure.probabilities", "expected a non-empty list of numbers")
        cfg.params = {
            "probabilities": [float(x) for x in probs],
            "n_atoms": _get(p, "n_atoms", "erasure.", int, 1),
            "temperature": _number(p, "temperature", "erasure.", 1.0, True),
            "volume": _number(p, "volume", "erasure.", 1.0, True),
        }
        try:
            erasure.ErasureSpec(**cfg.params)
        except (QThermoError, ValueError) as exc:
            raise ConfigError("erasure", str(exc)) from None
        return cfg

    integ = _get(doc, "integration", "", dict)
    cfg.t0 = _number(integ, "t0", "integration.", 0.0)
    cfg.h_step = _number(integ, "h_step", "integration.", 1e-3, True)
    cfg.initial_state = _get(doc, "initial_state", "", dict, {"kind": "maximally_mixed"})
    cfg.bath_temperature = _number(doc, "bath_temperature", "", None, True)

    if kind == "engine-cycle":
        p = _block(doc, "engine")
        e = {
            key: _number(p, key, "engine.", default, True)
            for key, default in (
                ("omega_hot", 2.0),
                ("omega_cold", 1.0),
                ("temperature_hot", 4.0),
                ("temperature_cold", 1.0),
                ("gamma", 2.0),
                ("stroke_time", 5.0),
                ("ramp_time", 1.0),
            )
        }
        e["cycles"] = _get(p, "cycles", "engine.", int, 2)
        if e["cycles"] < 1:
            raise ConfigError("engine.cycles", "must be at least 1")
        cfg.params = e
        cfg.layout = SpaceLayout((2,))
        if "initial_state" not in doc:
            cfg.initial_state = {"kind": "gibbs", "temperature": e["temperature_cold"]}
        try:
            build_initial_state(cfg, engine_generator(e, cfg.t0).h)
        except ConfigError:
            raise
        except (QThermoError, ValueError, TypeError, KeyError) as exc:
            raise ConfigError("initial_state", str(exc)) from None
        cfg.t1 = cfg.t0 + e["cycles"] * engine_period(e)
        return cfg

    cfg.t1 = _number(integ, "t1", "integration.")
    if not cfg.t1 > cfg.t0:
        raise ConfigError("integration.t1", "must exceed t0")
    dims = _get(doc, "layout", "", list)
    if not dims or not all(isinstance(d, int) and not isinstance(d, bool) and d > 0 for d in dims):
        raise ConfigError("layout", "expected a non-empty list of positive integers")
    cfg.layout = SpaceLayout(tuple(dims))
    terms = _get(doc, "hamiltonian", "", list)
    if not terms:
        raise ConfigError("hamiltonian", "at least one term is required")
    for i, term in enumerate(terms):
        path = f"hamiltonian[{i}]"
        if not (isinstance(term, list) and len(term) == 2 and isinstance(term[1], str)
                and isinstance(term[0], (int, float)) and not isinstance(term[0], bool)):
            raise ConfigError(path, 'expected [coefficient, "PAULI"]')
        _check_label(term[1], cfg.layout, path, hermitian=True)
        cfg.hamiltonian.append((float(term[0]), term[1]))
    for i, ch in enumerate(_get(doc, "channels", "", list, [])):
        path = f"channels[{i}]."
        if not isinstance(ch, dict):
            raise ConfigError(f"channels[{i}]", "expected an object")
        label = _get(ch, "op", path, str)
        _check_label(label, cfg.layout, f"{path}op")
        rate = _number(ch, "rate", path)
        temp = _number(ch, "bath_temperature", path, None, True)
        cfg.channels.append({"op": label, "rate": rate, "bath_temperature": temp})
    temps = {c["bath_temperature"] for c in cfg.channels if c["bath_temperature"] is not None}
    if cfg.bath_temperature is None and len(temps) == 1:
        cfg.bath_temperature = temps.pop()
    if kind == "closed-bipartite-exchange":
        if len(dims) < 2:
            raise ConfigError("layout", "a bipartite scenario needs at least two subsystems")
        split = _get(doc, "split", "", list, [0])
        try:
            cfg.layout.complement(split)
        except QThermoError as exc:
            raise ConfigError("split", str(exc)) from None
        cfg.split = sorted(split)
    _check_initial(cfg)
    return cfg


def _check_label(label: str, layout: SpaceLayout, path: str, hermitian: bool = False) -> None:
    if any(d != 2 for d in layout.subsystem_dims):
        raise ConfigError(path, "operator labels require an all-qubit layout")
    if len(label) != layout.n_subsystems:
        raise ConfigError(path, f"label {label!r} has length {len(label)}, layout has {layout.n_subsystems} subsystems")
    allowed = "IXYZ" if hermitian else "IXYZ+-"
    bad = [ch for ch in label if ch not in allowed]
    if bad:
        raise ConfigError(path, f"invalid operator letter {bad[0]!r}; allowed: {allowed}")


def _check_initial(cfg: ScenarioConfig) -> None:
    try:
        build_initial_state(cfg, HamiltonianSpec(cfg.layout, cfg.hamiltonian))
    except ConfigError:
        raise
    except (QThermoError, ValueError, TypeError, KeyError) as exc:
        raise ConfigError("initial_state", str(exc)) from None


def build_initial_state(cfg: ScenarioConfig, h: HamiltonianSpec) -> DensityMatrix:
    spec = cfg.initial_state
    kind = spec.get("kind")
    layout = h.layout
    if kind == "basis":
        return hilbert.basis_state(layout, str(spec["label"]))
    if kind == "diag":
        return hilbert.diagonal_state(layout, spec["populations"])
    if kind == "matrix":
        m = np.asarray(spec["real"], dtype=np.float64) + 1j * np.asarray(spec.get("imag", 0.0), dtype=np.float64)
        return DensityMatrix(layout, m)
    if kind == "pure":
        amps = np.asarray(spec["real"], dtype=np.float64) + 1j * np.asarray(spec.get("imag", 0.0), dtype=np.float64)
        return hilbert.make_pure(layout, amps)
    if kind == "gibbs":
        return hilbert.gibbs_state(h, cfg.t0, float(spec["temperature"]))
    if kind == "random":
        return hilbert.random_state(layout, np.random.default_rng(cfg.seed), spec.get("rank"))
    if kind == "maximally_mixed":
        return hilbert.maximally_mixed(layout)
    raise ConfigError("initial_state.kind", f"unknown initial state kind {kind!r}")


def build_generator(cfg: ScenarioConfig) -> Generator:
    h = HamiltonianSpec(cfg.layout, cfg.hamiltonian)
    channels = []
    for i, ch in enumerate(cfg.channels):
        op = hilbert.pauli_string(ch["op"])
        try:
            if ch["bath_temperature"] is None:
                channels.append(DissipationChannel(ch["rate"], normalized(op), ch["op"]))
            else:
                channels.extend(bath_channels(h, op, [(ch["rate"], ch["bath_temperature"])], ch["op"]))
        except (QThermoError, ValueError) as exc:
            raise ConfigError(f"channels[{i}]", str(exc)) from None
    try:
        return Generator(h, channels)
    except (QThermoError, ValueError) as exc:
        raise ConfigError("channels", str(exc)) from None


# --- engine cycle ---------------------------------------------------------


def smootherstep(x: float) -> float:
    x = min(max(x, 0.0), 1.0)
    return x * x * x * (x * (6.0 * x - 15.0) + 10.0)


def engine_period(e: dict) -> float:
    return 2.0 * e["stroke_time"] + 2.0 * e["ramp_time"]


def _envelope(u: float, start: float, length: float) -> float:
    """Smooth on/off window over ``[start, start + length]``."""
    edge = length / 4.0
    x = u - start
    if x <= 0.0 or x >= length:
        return 0.0
    return smootherstep(x / edge) * smootherstep((length - x) / edge)


def engine_generator(e: dict, t0: float = 0.0) -> Generator:
    """Qubit Otto-type cycle: hot contact, gap ramp, cold contact, gap ramp.

    Within one period the gap is ``omega_hot`` during the hot stroke and
    ``omega_cold`` during the cold stroke; bath couplings switch on and off
    smoothly inside their strokes, so rates and Hamiltonian are C2 in time.
    """
    tau, ramp = e["stroke_time"], e["ramp_time"]
    period = engine_period(e)
    w_h, w_c = e["omega_hot"], e["omega_cold"]

    def phase(t):
        return math.fmod(t - t0, period)

    def omega(t):
        u = phase(t)
        if u < tau:
            return w_h
        if u < tau + ramp:
            return w_h + (w_c - w_h) * smootherstep((u - tau) / ramp)
        if u < 2 * tau + ramp:
            return w_c
        return w_c + (w_h - w_c) * smootherstep((u - 2 * tau - ramp) / ramp)

    def z_coefficient(t):
        return -0.5 * omega(t)

    h = HamiltonianSpec(SpaceLayout((2,)), [(z_coefficient, "Z")])
    hot = (lambda t: e["gamma"] * _envelope(phase(t), 0.0, tau), e["temperature_hot"])
    cold = (lambda t: e["gamma"] * _envelope(phase(t), tau + ramp, tau), e["temperature_cold"])
    return Generator(h, bath_channels(h, hilbert.PAULI["-"], [hot, cold], "baths"))


def engine_strokes(samples, e: dict, t0: float = 0.0):
    """Split the last cycle of an engine trajectory into (hot, cold, whole) sample lists."""
    tau, ramp = e["stroke_time"], e["ramp_time"]
    period = engine_period(e)
    start = t0 + (e["cycles"] - 1) * period
    eps = 1e-9

    def window(a, b):
        return [s for s in samples if start + a - eps <= s.t <= start + b + eps]

    return window(0.0, tau), window(tau + ramp, 2 * tau + ramp), window(0.0, period)


# --- output ---------------------------------------------------------------


def _fmt(value) -> str:
    # adding 0.0 folds -0.0 into 0.0
    return "" if value is None else format(float(value) + 0.0, ".17g")


def emit_trajectory(samples: Sequence[ledger.ThermoSample], path, bipartite=None) -> Path:
    """Write per-sample ledgers as CSV (UTF-8, LF, 17 significant digits).

    Undefined temperatures and not-applicable ledgers are empty fields.
    """
    if not samples:
        raise ValueError("no samples to write")
    if bipartite is not None and len(bipartite) != len(samples):
        raise ValueError("bipartite samples do not align with thermo samples")
    path = Path(path)
    header = list(THERMO_COLUMNS) + (list(BIPARTITE_COLUMNS) if bipartite is not None else [])
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for i, s in enumerate(samples):
            row = [
                s.t,
                s.entropy,
                s.interior_rate,
                s.exterior_rate,
                s.heat_rate,
                s.work_rate,
                s.energy,
                s.generalized_temperature,
                s.conventional_ep_rate,
            ]
            if bipartite is not None:
                b = bipartite[i]
                row += [b.s_a, b.s_b, b.s_ab, b.s_c, b.q_a, b.q_b, b.t_a, b.t_b]
            writer.writerow([_fmt(v) for v in row])
    return path


def read_trajectory(path) -> list[dict]:
    """Parse an emitted CSV back into dicts of floats (``None`` for empty fields)."""
    with Path(path).open(encoding="utf-8", newline="") as fh:
        return [
            {k: (float(v) if v != "" else None) for k, v in row.items()}
            for row in csv.DictReader(fh)
        ]


def _write_csv(path: Path, header, rows) -> None:
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def _jsonable(value):
    if isinstance(value, np.generic):
        return value.item()
    raise TypeError(f"cannot serialize {type(value).__name__}")


def _write_json(path: Path, summary: RunSummary) -> None:
    text = json.dumps(asdict(summary), indent=2, sort_keys=True, default=_jsonable)
    path.write_text(text + "\n", encoding="utf-8")


# --- orchestration --------------------------------------------------------


def _quantum_summary(summary: RunSummary, samples, traj) -> None:
    closure = ledger.ledger_closure_residuals(samples)
    tol = ledger.closure_tolerance(traj.h_step)
    summary.samples = len(samples)
    summary.h_step = traj.h_step
    summary.regime = traj.metadata["regime"]
    summary.max_abs_interior_rate = max(abs(s.interior_rate) for s in samples)
    summary.ledger_closure_residual = float(closure.max()) if closure.size else 0.0
    summary.ledger_closure_tolerance = tol
    summary.first_law_residual = ledger.first_law_residual(samples)
    conv = [s.conventional_ep_rate for s in samples if s.conventional_ep_rate is not None]
    if conv:
        summary.conventional_ep_min = min(conv)
        summary.conventional_ep_max = max(conv)
        summary.checks["conventional_ep_nonnegative"] = summary.conventional_ep_min >= -1e-9
    summary.checks["interior_rate"] = summary.max_abs_interior_rate <= ledger.INTERIOR_TOL
    summary.checks["ledger_closure"] = summary.ledger_closure_residual <= tol
    summary.checks["first_law"] = summary.first_law_residual <= 1e-6


def run_config(cfg: ScenarioConfig, out_dir=".") -> RunSummary:
    """Run a validated scenario, write its CSV and JSON, and return the summary."""
    started = time.perf_counter()
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / cfg.csv_path
    json_path = out_dir / cfg.json_path
    summary = RunSummary(cfg.kind, cfg.name, cfg.seed)

    if cfg.kind == "classical-comparator":
        p = cfg.params
        a = classical.ClassicalBody(p["heat_capacity_a"], p["temperature_a"])
        b = classical.ClassicalBody(p["heat_capacity_b"], p["temperature_b"])
        steps, a_f, b_f = classical.run_equilibration(a, b, p["dq"], p["max_steps"])
        rows, cum = [], 0.0
        for i, entry in enumerate(steps):
            cum += entry.di_s_total
            rows.append((i + 1, entry.heat_to_a, entry.de_s_a, entry.de_s_b, entry.di_s_total, cum))
        _write_csv(csv_path, ("step", "Q_to_A", "deS_A", "deS_B", "diS_total", "diS_cumulative"), rows)
        exact = classical.equilibration_entropy(a, b)
        summary.samples = len(steps)
        summary.classical = {
            "steps": len(steps),
            "final_temperature_a": a_f.temperature,
            "final_temperature_b": b_f.temperature,
            "total_entropy_production": cum,
            "closed_form": exact,
            "discrepancy": abs(cum - exact),
        }
        summary.checks["production_nonnegative"] = all(s.di_s_total >= -1e-12 for s in steps)
    elif cfg.kind == "erasure":
        spec = erasure.ErasureSpec(**cfg.params)
        report = erasure.erasure_accounting(spec)
        rows = [
            (i + 1, p, v, w)
            for i, (p, v, w) in enumerate(zip(spec.probabilities, report.species_volume, report.species_work))
        ]
        _write_csv(csv_path, ("species", "p", "V_i", "W_i"), rows)
        rho = hilbert.diagonal_state(SpaceLayout((len(spec.probabilities),)), spec.probabilities)
        entropy = hilbert.von_neumann_entropy(rho)
        summary.samples = len(rows)
        summary.erasure = {
            "work_per_particle": report.work_per_particle,
            "entropy_change_per_particle": report.entropy_change_per_particle,
            "recovered_entropy": report.recovered_entropy,
            "von_neumann_entropy": entropy,
            "total_work": report.total_work,
            "total_work_energy": report.total_work_energy,
        }
        summary.checks["recovered_matches_von_neumann"] = abs(report.recovered_entropy - entropy) <= 1e-12
    elif cfg.kind == "engine-cycle":
        e = cfg.params
        gen = engine_generator(e, cfg.t0)
        rho0 = build_initial_state(cfg, gen.h)
        traj = propagate(gen, rho0, cfg.t0, cfg.t1, cfg.h_step)
        samples = ledger.thermo_samples(traj)
        _quantum_summary(summary, samples, traj)
        hot, cold, whole = engine_strokes(samples, e, cfg.t0)
        report = ledger.engine_efficiency(hot, cold, ledger.stroke_work(whole))
        summary.efficiency = asdict(report)
        summary.efficiency["otto"] = 1.0 - e["omega_cold"] / e["omega_hot"]
        summary.efficiency["carnot"] = 1.0 - e["temperature_cold"] / e["temperature_hot"]
        summary.checks["engine_forms_agree"] = report.discrepancy <= 1e-4
        summary.checks["engine_first_law"] = report.first_law_residual <= 1e-6
        emit_trajectory(samples, csv_path)
    else:
        gen = build_generator(cfg)
        rho0 = build_initial_state(cfg, gen.h)
        traj = propagate(gen, rho0, cfg.t0, cfg.t1, cfg.h_step)
        samples = ledger.thermo_samples(traj, cfg.bath_temperature)
        _quantum_summary(summary, samples, traj)
        bip = None
        if cfg.kind == "closed-bipartite-exchange":
            bip = ledger.bipartite_ledger(traj, cfg.split)
            summary.correlation_sum_rule_residual = float(ledger.sum_rule_residuals(bip).max())
            resid = [abs(b.correlation_residual) for b in bip if b.correlation_residual is not None]
            summary.correlation_temperature_residual = max(resid) if resid else None
            summary.unallocated_interaction_energy = bip[-1].interaction_energy
            if not gen.channels:
                summary.checks["correlation_sum_rule"] = summary.correlation_sum_rule_residual <= 1e-5
        emit_trajectory(samples, csv_path, bip)

    summary.outputs = {"csv": str(csv_path), "json": str(json_path)}
    summary.wall_clock = time.perf_counter() - started
    _write_json(json_path, summary)
    return summary


def load_config(path) -> dict:
    text = Path(path).read_text(encoding="utf-8")
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("$", f"invalid JSON: {exc}") from None


def run_scenario(config, out_dir=".", seed: int | None = None) -> RunSummary:
    """Run from a path or an already-decoded config document."""
    doc = load_config(config) if isinstance(config, (str, Path)) else config
    cfg = parse_config(doc)
    if seed is not None:
        cfg.seed = seed
        if cfg.layout is not None:
            _check_initial(cfg)
    return run_config(cfg, out_dir)


def preset_names() -> list[str]:
    root = resources.files("qthermo") / "presets"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def preset_path(name: str) -> Path:
    path = Path(str(resources.files("qthermo") / "presets" / f"{name}.json"))
    if not path.exists():
        raise ConfigError("$", f"no preset named {name!r}")
    return path


__all__ = [
    "KINDS",
    "RunSummary",
    "ScenarioConfig",
    "emit_trajectory",
    "engine_generator",
    "parse_config",
    "read_trajectory",
    "run_config",
    "run_scenario",
    "validate_generator",
]
