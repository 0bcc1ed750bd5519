"""Config-driven experiment runner.

Configs are JSON objects::

    {
      "experiment": "cz-truth-table",
      "model": "effective",
      "condition": "calibrated",
      "params": {"delta": 1.0},
      "sweep": {"parameter": "kappa_t", "start": 0.0, "stop": 6.28, "points": 64}
    }

``params`` entries not given fall back to per-experiment defaults; the
resolved config is echoed into ``report.json`` under ``inputs`` so a
report can be fed back as a config. Gate experiments use natural units
(delta = 1 by default); ``params-estimate`` works in SI units.
"""
from __future__ import annotations

import copy
import csv
import json
import math
import platform
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

import numpy as np
import scipy

from . import __version__
from .effective_dynamics import (
    SQRT2,
    calibrated_gate_condition,
    gate_condition,
    two_photon_rabi_frequency,
)
from .feasibility import DeviceParams, params_estimate
from .fock_space import DopantLevelSet, ModeSet, enumerate_basis
from .gates_circuits import (
    CZ,
    MODELS,
    cz_device,
    gate_fidelity,
    mzi_circuit,
    mzi_probabilities,
    optimize_cz,
    truth_table,
)
from .hamiltonians import DISPERSIVE_REGIME_FACTOR, EffectiveParams
from .plotting import plot_csv
from .pulse import crow_pulse_sim, write_trajectory_csv
from .validation import effective_vs_cascade, fit_rabi_frequency, two_photon_rabi_trace

EXIT_OK, EXIT_CONFIG, EXIT_TOLERANCE = 0, 2, 3
REQUIRED = object()
CONDITIONS = ("paper", "calibrated", "custom")


class ConfigError(ValueError):
    """Invalid config; ``path`` names the offending field (``params.g1``)."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


# --------------------------------------------------------------------------- #
#                               parameter checks                              #
# --------------------------------------------------------------------------- #

def _number(path, value, *, positive=False, nonneg=False, integer=False, optional=False):
    if value is None and optional:
        return None
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(path, f"expected a number, got {value!r}")
    if not math.isfinite(value):
        raise ConfigError(path, "must be finite")
    if integer:
        if float(value) != int(value):
            raise ConfigError(path, "must be an integer")
        value = int(value)
    else:
        value = float(value)
    if positive and value <= 0:
        raise ConfigError(path, "must be positive")
    if nonneg and value < 0:
        raise ConfigError(path, "must be non-negative")
    return value


def _choice(options):
    def check(path, value):
        if value not in options:
            raise ConfigError(path, f"must be one of {list(options)}, got {value!r}")
        return value
    return check


def _pair(path, value):
    if not isinstance(value, (list, tuple)) or len(value) != 2:
        raise ConfigError(path, "expected a [low, high] pair")
    lo, hi = (_number(f"{path}[{k}]", v) for k, v in enumerate(value))
    if lo > hi:
        raise ConfigError(path, "low must not exceed high")
    return [lo, hi]


def _int_pair(path, value):
    if not isinstance(value, (list, tuple)) or len(value) != 2:
        raise ConfigError(path, "expected a pair of integers")
    return [_number(f"{path}[{k}]", v, positive=True, integer=True) for k, v in enumerate(value)]


def _dopant_list(path, value):
    if not isinstance(value, list):
        raise ConfigError(path, "expected a list of 'cascade' / 'two-level'")
    for k, v in enumerate(value):
        _choice(("cascade", "two-level"))(f"{path}[{k}]", v)
    return list(value)


def num(**kw):
    return lambda path, value: _number(path, value, **kw)


GATE_PARAMS = {
    "delta": (1.0, num()),
    "g1": (None, num(positive=True, optional=True)),
    "g2": (None, num(positive=True, optional=True)),
    "kappa_t": (math.pi, num(nonneg=True)),
    "J": (1.0, num(positive=True)),
    "second_coupler": ("inverse", _choice(("inverse", "same"))),
    "n_dopants": (1, num(positive=True, integer=True)),
}


@dataclass(frozen=True)
class ExperimentSpec:
    run: Callable
    params: dict
    models: tuple[str, ...] = ()
    needs_condition: bool = False
    sweep: dict | None = None  # default sweep; None means no sweep axis
    sweep_parameters: tuple[str, ...] = ()
    csv_columns: str = ""
    summary: str = ""


REGISTRY: dict[str, ExperimentSpec] = {}


def experiment(name, **kw):
    def register(fn):
        REGISTRY[name] = ExperimentSpec(run=fn, **kw)
        return fn
    return register


@dataclass
class ExperimentConfig:
    experiment: str
    params: dict
    model: str | None = None
    condition: str | None = None
    sweep: dict | None = None
    output_dir: str | None = None

    @classmethod
    def from_dict(cls, raw: Any) -> "ExperimentConfig":
        if not isinstance(raw, dict):
            raise ConfigError("<root>", "config must be a JSON object")
        known = {"experiment", "model", "condition", "params", "sweep", "output_dir"}
        unknown = sorted(set(raw) - known)
        if unknown:
            raise ConfigError(unknown[0], "unknown top-level key")
        name = raw.get("experiment")
        if name is None:
            raise ConfigError("experiment", "missing")
        if name not in REGISTRY:
            raise ConfigError("experiment", f"unknown experiment {name!r}; choose from {sorted(REGISTRY)}")
        spec = REGISTRY[name]

        model = raw.get("model")
        if spec.models:
            if model is None:
                raise ConfigError("model", f"required; one of {list(spec.models)}")
            _choice(spec.models)("model", model)
        elif model is not None:
            raise ConfigError("model", f"{name} takes no model")

        condition = raw.get("condition")
        if spec.needs_condition:
            if condition is None:
                raise ConfigError("condition", f"required; one of {list(CONDITIONS)}")
            _choice(CONDITIONS)("condition", condition)
        elif condition is not None:
            raise ConfigError("condition", f"{name} takes no gate condition")

        given = raw.get("params", {})
        if not isinstance(given, dict):
            raise ConfigError("params", "expected an object")
        extra = sorted(set(given) - set(spec.params))
        if extra:
            raise ConfigError(f"params.{extra[0]}", f"not a parameter of {name}")
        params = {}
        for key, (default, check) in spec.params.items():
            value = given.get(key, default)
            if value is REQUIRED:
                raise ConfigError(f"params.{key}", "required")
            params[key] = check(f"params.{key}", value)

        sweep = None
        if spec.sweep is not None:
            sweep = dict(spec.sweep)
            raw_sweep = raw.get("sweep", {})
            if not isinstance(raw_sweep, dict):
                raise ConfigError("sweep", "expected an object")
            bad = sorted(set(raw_sweep) - {"parameter", "start", "stop", "points"})
            if bad:
                raise ConfigError(f"sweep.{bad[0]}", "unknown sweep key")
            sweep.update(raw_sweep)
            _choice(spec.sweep_parameters)("sweep.parameter", sweep["parameter"])
            sweep["start"] = _number("sweep.start", sweep["start"])
            sweep["stop"] = _number("sweep.stop", sweep["stop"])
            sweep["points"] = _number("sweep.points", sweep["points"], positive=True, integer=True)
        elif "sweep" in raw:
            raise ConfigError("sweep", f"{name} takes no sweep")

        output_dir = raw.get("output_dir")
        if output_dir is not None and not isinstance(output_dir, str):
            raise ConfigError("output_dir", "expected a path string")
        cfg = cls(name, params, model, condition, sweep, output_dir)
        _cross_checks(cfg)
        return cfg

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        try:
            with open(path, encoding="utf-8") as fh:
                raw = json.load(fh)
        except FileNotFoundError:
            raise ConfigError("<file>", f"config file {path} not found") from None
        except json.JSONDecodeError as exc:
            raise ConfigError("<file>", f"invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None
        return cls.from_dict(raw)

    def to_dict(self) -> dict:
        out = {"experiment": self.experiment, "params": copy.deepcopy(self.params)}
        for key in ("model", "condition", "sweep", "output_dir"):
            value = getattr(self, key)
            if value is not None:
                out[key] = copy.deepcopy(value)
        return out


def _cross_checks(cfg: ExperimentConfig):
    p = cfg.params
    if "disorder" in p and p["disorder"] > 0 and p.get("seed") is None:
        raise ConfigError("params.seed", "required when disorder > 0")
    if "delta" in p and p["delta"] == 0:
        raise ConfigError("params.delta", "must be non-zero")
    if cfg.condition == "custom" and (p.get("g1") is None or p.get("g2") is None):
        missing = "g1" if p.get("g1") is None else "g2"
        raise ConfigError(f"params.{missing}", "required for the custom condition")
    if cfg.condition == "paper" and p.get("g1") is not None:
        raise ConfigError("params.g1", "condition 'paper' fixes g1 = 2 sqrt(2) g2; set g2 only")
    if cfg.condition == "calibrated" and p.get("g2") is not None:
        raise ConfigError("params.g2", "the calibrated condition fixes g2 = sqrt(2) g1; set g1 only")


def regime_violation(cfg: ExperimentConfig) -> str | None:
    """Message when |delta| < 10 max(g1, g2) for the couplings this run uses."""
    p = cfg.params
    if cfg.experiment == "optimize-cz":
        g2 = abs(p["delta"]) / 50.0 if p["g2"] is None else p["g2"]
        couplings = [g2, p["ratio_range"][1] * g2]
    elif REGISTRY[cfg.experiment].needs_condition:
        c = resolve_condition(cfg)
        couplings = [c["g1"], c["g2"]]
    elif "delta" in p:
        couplings = [p["g1"], p["g2"]]
    else:
        return None
    worst = max(couplings)
    if abs(p["delta"]) < DISPERSIVE_REGIME_FACTOR * worst:
        return (f"|delta| = {abs(p['delta']):g} is below {DISPERSIVE_REGIME_FACTOR:g} x max coupling "
                f"({worst:g}); the effective model is not valid here")
    return None


def resolve_condition(cfg: ExperimentConfig) -> dict:
    """Couplings and interaction time for the named gate condition."""
    p = cfg.params
    delta = p["delta"]
    if cfg.condition == "paper":
        c = gate_condition(abs(delta) / 50.0 if p["g2"] is None else p["g2"], delta)
        g1, g2 = c.g1, c.g2
    elif cfg.condition == "calibrated":
        c = calibrated_gate_condition(delta, p["g1"])
        g1, g2 = c.g1, c.g2
    else:
        g1, g2 = p["g1"], p["g2"]
    kappa = abs(EffectiveParams(g1, g2, delta).kappa)
    return {"g1": g1, "g2": g2, "delta": delta, "kappa": kappa, "t": p["kappa_t"] / kappa}


# --------------------------------------------------------------------------- #
#                                  reporting                                  #
# --------------------------------------------------------------------------- #

def _cell(value):
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def write_csv(path: Path, columns: list[str], rows) -> None:
    """RFC-4180 CSV with shortest round-trip float formatting."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\r\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([_cell(v) for v in row])


def jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        value = float(obj)
        return value if math.isfinite(value) else repr(value)
    return obj


@dataclass
class Checks:
    items: list = field(default_factory=list)

    def add(self, name: str, value: float, threshold: float, kind: str = "max"):
        """``kind="max"``: pass if value <= threshold; ``"min"``: value >= threshold."""
        ok = value <= threshold if kind == "max" else value >= threshold
        self.items.append({"name": name, "value": value, "threshold": threshold, "kind": kind, "passed": bool(ok)})

    @property
    def passed(self) -> bool:
        return all(c["passed"] for c in self.items)


@dataclass
class RunContext:
    config: ExperimentConfig
    out: Path
    threads: int = 1
    checks: Checks = field(default_factory=Checks)
    files: list = field(default_factory=list)
    plots: list = field(default_factory=list)

    def csv(self, name: str, columns: list[str], rows) -> Path:
        path = self.out / name
        write_csv(path, columns, rows)
        self.files.append(name)
        return path

    def plot(self, csv_path: Path, x: str, ys: list[str], **labels):
        svg = csv_path.with_suffix(".svg")
        try:
            plot_csv(csv_path, svg, x, ys, **labels)
            self.plots.append(svg.name)
        except Exception as exc:  # plots never decide the outcome
            self.plots.append(f"{svg.name}: failed ({exc})")

    def map(self, fn, items):
        items = list(items)
        if self.threads > 1 and len(items) > 1:
            with ThreadPoolExecutor(self.threads) as pool:
                return list(pool.map(fn, items))
        return [fn(x) for x in items]


def _sweep_values(sweep: dict) -> np.ndarray:
    return np.linspace(sweep["start"], sweep["stop"], sweep["points"])


# --------------------------------------------------------------------------- #
#                                 experiments                                 #
# --------------------------------------------------------------------------- #

@experiment(
    "basis-info",
    params={
        "modes": (2, num(positive=True, integer=True)),
        "n_max": (2, num(nonneg=True, integer=True)),
        "dopants": ([], _dopant_list),
        "excitation_cap": (None, num(nonneg=True, integer=True, optional=True)),
    },
    csv_columns="basis.csv: index,label,photons,excitations",
    summary="enumerate a truncated photon/dopant basis",
)
def run_basis_info(ctx: RunContext) -> dict:
    p = ctx.config.params
    dopants = [DopantLevelSet.cascade() if d == "cascade" else DopantLevelSet.two_level() for d in p["dopants"]]
    basis = enumerate_basis(ModeSet(p["modes"], p["n_max"]), dopants, excitation_cap=p["excitation_cap"])
    ctx.csv("basis.csv", ["index", "label", "photons", "excitations"],
            ((k, basis.label(k), basis.photon_numbers[k], basis.excitation_numbers[k])
             for k in range(basis.dimension)))
    return {"dimension": basis.dimension}


@experiment(
    "mzi-sweep",
    params={"J": (1.0, num(positive=True)), "phase_rail": (1, _choice((0, 1))),
            "tolerance": (1e-8, num(positive=True))},
    sweep={"parameter": "phi", "start": 0.0, "stop": 2 * math.pi, "points": 64},
    sweep_parameters=("phi",),
    csv_columns="mzi_sweep.csv: phi,p0,p1,p0_theory,p1_theory",
    summary="single-qubit interferometer output vs. arm phase",
)
def run_mzi_sweep(ctx: RunContext) -> dict:
    p = ctx.config.params
    phis = _sweep_values(ctx.config.sweep)

    def point(phi):
        elements, qubits = mzi_circuit(float(phi), p["J"], p["phase_rail"])
        col = truth_table(elements, qubits).matrix[:, 0]
        return float(abs(col[0]) ** 2), float(abs(col[1]) ** 2)

    probs = ctx.map(point, phis)
    rows = []
    err = 0.0
    for phi, (p0, p1) in zip(phis, probs):
        t0, t1 = mzi_probabilities(float(phi))
        if p["phase_rail"] == 0:
            t0, t1 = t1, t0
        err = max(err, abs(p0 - t0), abs(p1 - t1))
        rows.append((float(phi), p0, p1, t0, t1))
    path = ctx.csv("mzi_sweep.csv", ["phi", "p0", "p1", "p0_theory", "p1_theory"], rows)
    ctx.plot(path, "phi", ["p0", "p1", "p0_theory", "p1_theory"], title="interferometer sweep",
             ylabel="probability")
    ctx.checks.add("max_abs_error", err, p["tolerance"])
    return {"max_abs_error": err, "points": len(rows)}


@experiment(
    "two-photon-rabi",
    params={
        "g1": (REQUIRED, num(positive=True)),
        "g2": (REQUIRED, num(positive=True)),
        "delta": (1.0, num()),
        "n_dopants": (1, num(positive=True, integer=True)),
        "periods": (4.0, num(positive=True)),
        "points": (1601, num(positive=True, integer=True)),
        "sign": (1, _choice((1, -1))),
        "tolerance": (None, num(positive=True, optional=True)),
    },
    models=("effective", "cascade"),
    csv_columns="two_photon_rabi.csv: t,p_g2,p_e0",
    summary="|g,2> <-> |e,0> oscillation; fitted vs. closed-form frequency",
)
def run_two_photon_rabi(ctx: RunContext) -> dict:
    p = ctx.config.params
    model = ctx.config.model
    times, p_g2, p_e0 = two_photon_rabi_trace(model, p["g1"], p["g2"], p["delta"], periods=p["periods"],
                                              points=p["points"], n_dopants=p["n_dopants"], sign=p["sign"])
    scale = math.sqrt(p["n_dopants"])
    theory = two_photon_rabi_frequency(p["g1"] * scale, p["g2"] * scale, p["delta"])
    fitted = fit_rabi_frequency(times, p_e0, guess=theory)
    rel = abs(fitted - theory) / theory
    tol = p["tolerance"] if p["tolerance"] is not None else (1e-3 if model == "effective" else 0.1)
    path = ctx.csv("two_photon_rabi.csv", ["t", "p_g2", "p_e0"], zip(times, p_g2, p_e0))
    ctx.plot(path, "t", ["p_g2", "p_e0"], title=f"two-photon oscillation ({model})", ylabel="population")
    ctx.checks.add("rabi_rel_error", rel, tol)
    return {"rabi_fitted": fitted, "rabi_theory": theory, "rabi_rel_error": rel,
            "max_p_e0": float(np.max(p_e0))}


def _table_rows(matrix: np.ndarray, labels: list[str]):
    for j, inp in enumerate(labels):
        for i, outp in enumerate(labels):
            a = complex(matrix[i, j])
            yield (inp, outp, a.real, a.imag, abs(a), math.atan2(a.imag, a.real))


def _device_table(cfg: ExperimentConfig, cond: dict, kappa_t: float | None = None, g1_over_g2: float | None = None):
    p = cfg.params
    g1, g2 = cond["g1"], cond["g2"]
    if g1_over_g2 is not None:
        g1 = g1_over_g2 * g2
    params = EffectiveParams(g1, g2, cond["delta"])
    kappa = abs(params.kappa)
    t = (p["kappa_t"] if kappa_t is None else kappa_t) / kappa
    elements, qubits = cz_device(cfg.model, params, t, J=p["J"], second_coupler=p["second_coupler"],
                                 n_dopants=p["n_dopants"])
    return truth_table(elements, qubits), {"g1": g1, "g2": g2, "t": t}


@experiment(
    "cz-truth-table",
    params={**GATE_PARAMS, "min_fidelity": (None, num(optional=True)), "exact_tolerance": (1e-10, num(positive=True))},
    models=MODELS,
    needs_condition=True,
    csv_columns="cz_truth_table.csv: input,output,re,im,abs,phase",
    summary="two-qubit device truth table and CZ fidelity",
)
def run_cz_truth_table(ctx: RunContext) -> dict:
    cfg, p = ctx.config, ctx.config.params
    cond = resolve_condition(cfg)
    table, used = _device_table(cfg, cond)
    ctx.csv("cz_truth_table.csv", ["input", "output", "re", "im", "abs", "phase"],
            _table_rows(table.matrix, table.labels))
    free = gate_fidelity(table, CZ, True)
    fixed = gate_fidelity(table, CZ, False)
    out = {
        "couplings": used,
        "kappa_t": p["kappa_t"],
        "g2_over_g1": used["g2"] / used["g1"],
        "matrix": table.matrix,
        "labels": table.labels,
        "success_probability": table.success_probability,
        "fidelity_local_phases": free.fidelity,
        "fidelity_no_local_phases": fixed.fidelity,
        "local_phases": list(free.local_phases),
        "max_abs_error_vs_cz": float(np.max(np.abs(table.matrix - CZ))),
    }
    if cfg.model == "paper" and cfg.condition == "paper" and p["second_coupler"] == "inverse":
        ctx.checks.add("max_abs_error_vs_cz", out["max_abs_error_vs_cz"], p["exact_tolerance"])
    if p["min_fidelity"] is not None:
        ctx.checks.add("fidelity_local_phases", free.fidelity, p["min_fidelity"], kind="min")
    return out


@experiment(
    "cz-fidelity-sweep",
    params=dict(GATE_PARAMS),
    models=MODELS,
    needs_condition=True,
    sweep={"parameter": "kappa_t", "start": 0.0, "stop": 2 * math.pi, "points": 41},
    sweep_parameters=("kappa_t", "ratio"),
    csv_columns="cz_fidelity_sweep.csv: value,fidelity,fidelity_no_local_phases,min_success",
    summary="CZ fidelity along kappa_t or g1/g2 with the other held at the condition",
)
def run_cz_fidelity_sweep(ctx: RunContext) -> dict:
    cfg = ctx.config
    cond = resolve_condition(cfg)
    axis = cfg.sweep["parameter"]
    values = _sweep_values(cfg.sweep)

    def point(v):
        v = float(v)
        table, _ = _device_table(cfg, cond, **({"kappa_t": v} if axis == "kappa_t" else {"g1_over_g2": v}))
        return (v, gate_fidelity(table, CZ, True).fidelity, gate_fidelity(table, CZ, False).fidelity,
                float(np.min(table.success_probability)))

    rows = ctx.map(point, values)
    path = ctx.csv("cz_fidelity_sweep.csv", ["value", "fidelity", "fidelity_no_local_phases", "min_success"], rows)
    ctx.plot(path, "value", ["fidelity", "fidelity_no_local_phases", "min_success"], title=f"CZ fidelity vs {axis}",
             xlabel=axis)
    best = max(range(len(rows)), key=lambda k: (rows[k][1], -k))
    return {"axis": axis, "best_value": rows[best][0], "best_fidelity": rows[best][1], "points": len(rows)}


@experiment(
    "optimize-cz",
    params={
        "delta": (1.0, num()),
        "g2": (None, num(positive=True, optional=True)),
        "ratio_range": ([0.35, 3.0], _pair),
        "kappa_t_range": ([0.5 * math.pi, 1.5 * math.pi], _pair),
        "grid": ([25, 25], _int_pair),
        "min_fidelity": (0.9999, num()),
        "recovery_tolerance": (0.01, num(positive=True)),
    },
    models=("effective", "cascade"),
    csv_columns="optimize_cz.csv: g1_over_g2,g2_over_g1,kappa_t,rabi_t,g1,g2,t,fidelity,alpha,beta",
    summary="grid + Nelder-Mead search for the CZ condition",
)
def run_optimize_cz(ctx: RunContext) -> dict:
    cfg, p = ctx.config, ctx.config.params
    res = optimize_cz(p["delta"], tuple(p["ratio_range"]), tuple(p["kappa_t_range"]), g2=p["g2"],
                      model=cfg.model, grid=tuple(p["grid"]), threads=ctx.threads)
    rabi_t = two_photon_rabi_frequency(res.g1, res.g2, res.delta) * res.t
    alpha, beta = res.report.local_phases
    ctx.csv("optimize_cz.csv", ["g1_over_g2", "g2_over_g1", "kappa_t", "rabi_t", "g1", "g2", "t", "fidelity",
                                "alpha", "beta"],
            [(res.ratio, res.g2_over_g1, res.kappa_t, rabi_t, res.g1, res.g2, res.t, res.report.fidelity,
              alpha, beta)])
    ctx.checks.add("fidelity", res.report.fidelity, p["min_fidelity"], kind="min")
    ratio_err = abs(res.g2_over_g1 - SQRT2) / SQRT2
    rabi_err = abs(rabi_t - math.pi) / math.pi
    if cfg.model == "effective":
        ctx.checks.add("g2_over_g1_rel_error", ratio_err, p["recovery_tolerance"])
        ctx.checks.add("rabi_t_rel_error", rabi_err, p["recovery_tolerance"])
    return {"g1_over_g2": res.ratio, "g2_over_g1": res.g2_over_g1, "kappa_t": res.kappa_t, "rabi_t": rabi_t,
            "g1": res.g1, "g2": res.g2, "t": res.t, "fidelity": res.report.fidelity,
            "local_phases": [alpha, beta], "evaluations": res.evaluations,
            "g2_over_g1_rel_error": ratio_err, "rabi_t_rel_error": rabi_err}


_DEVICE_DEFAULTS = DeviceParams()


@experiment(
    "params-estimate",
    params={
        "Q": (_DEVICE_DEFAULTS.Q, num(positive=True)),
        "omega": (_DEVICE_DEFAULTS.omega, num(positive=True)),
        "g": (_DEVICE_DEFAULTS.g, num(positive=True)),
        "N": (_DEVICE_DEFAULTS.N, num(positive=True, integer=True)),
        "Delta": (_DEVICE_DEFAULTS.Delta, num(positive=True)),
        "v_g": (_DEVICE_DEFAULTS.v_g, num(positive=True)),
        "length": (_DEVICE_DEFAULTS.length, num(positive=True)),
        "lattice_constant": (_DEVICE_DEFAULTS.lattice_constant, num(positive=True)),
        "g1": (None, num(positive=True, optional=True)),
        "g2": (None, num(positive=True, optional=True)),
    },
    csv_columns="params_estimate.csv: quantity,seconds,flag",
    summary="SI feasibility estimate: T1, phase and gate times, crossing time",
)
def run_params_estimate(ctx: RunContext) -> dict:
    report = params_estimate(DeviceParams(**ctx.config.params))
    quantities = ["T1", "T1_quoted", "pi_phase_time_N", "pi_phase_time_sqrtN", "two_photon_gate_time_N",
                  "two_photon_gate_time_sqrtN", "gate_time_quoted", "crossing_time"]
    ctx.csv("params_estimate.csv", ["quantity", "seconds", "flag"],
            ((q, report[q], report["flags"].get(q, "")) for q in quantities))
    report.pop("inputs")
    return report


@experiment(
    "crow-pulse",
    params={
        "length": (128, num(integer=True)),
        "J": (1.0, num(positive=True)),
        "omega0": (0.0, num()),
        "disorder": (0.0, num(nonneg=True)),
        "seed": (None, num(nonneg=True, integer=True, optional=True)),
        "center": (None, num(optional=True)),
        "width": (6.0, num()),
        "k": (math.pi / 2, num()),
        "t_max": (None, num(positive=True, optional=True)),
        "n_steps": (200, num(positive=True, integer=True)),
        "tolerance": (0.05, num(positive=True)),
    },
    csv_columns="trajectory.csv: t,centroid,site_0..site_{L-1}",
    summary="single-photon wavepacket on a coupled-cavity chain; fitted group velocity",
)
def run_crow_pulse(ctx: RunContext) -> dict:
    p = dict(ctx.config.params)
    tol = p.pop("tolerance")
    try:
        res = crow_pulse_sim(**p)
    except ValueError as exc:
        raise ConfigError("params", str(exc)) from None
    path = ctx.out / "trajectory.csv"
    write_trajectory_csv(res, path)
    ctx.files.append(path.name)
    ctx.plot(path, "t", ["centroid"], title="wavepacket centroid", ylabel="site")
    out = {"v_group": res.v_group, "v_theory": res.v_theory, "flagged": res.flagged,
           "fit_window": list(res.fit_window)}
    # error measured against the band's maximum slope 2J so k = 0 is checkable
    if res.flagged:
        ctx.checks.add("pulse_reached_boundary", 1.0, 0.0)
    elif p["disorder"] == 0:
        err = abs(res.v_group - res.v_theory) / (2 * p["J"])
        out["velocity_error"] = err
        ctx.checks.add("velocity_error", err, tol)
    return out


@experiment(
    "effective-vs-cascade",
    params={
        "g1": (REQUIRED, num(positive=True)),
        "g2": (REQUIRED, num(positive=True)),
        "delta": (1.0, num()),
        "n_dopants": (1, num(positive=True, integer=True)),
        "sign": (1, _choice((1, -1))),
        "tolerance": (0.1, num(positive=True)),
    },
    csv_columns="effective_vs_cascade.csv: quantity,theory,effective,cascade,rel_error",
    summary="two-photon Rabi frequency and dispersive phase rate, effective vs. full cascade",
)
def run_effective_vs_cascade(ctx: RunContext) -> dict:
    p = ctx.config.params
    r = effective_vs_cascade(p["g1"], p["g2"], p["delta"], n_dopants=p["n_dopants"], sign=p["sign"])
    ctx.csv("effective_vs_cascade.csv", ["quantity", "theory", "effective", "cascade", "rel_error"], [
        ("two_photon_rabi", r["kappa_theory"], r["rabi_effective"], r["rabi_cascade"], r["rabi_rel_error"]),
        ("phase_rate", r["phi_rate_theory"], r["phi_rate_effective"], r["phi_rate_cascade"],
         r["phi_rate_rel_error"]),
    ])
    ctx.checks.add("rabi_rel_error", r["rabi_rel_error"], p["tolerance"])
    ctx.checks.add("phi_rate_rel_error", r["phi_rate_rel_error"], p["tolerance"])
    return r


# --------------------------------------------------------------------------- #
#                                    driver                                   #
# --------------------------------------------------------------------------- #

def software_versions() -> dict:
    return {"crowgates": __version__, "numpy": np.__version__, "scipy": scipy.__version__,
            "python": platform.python_version()}


def execute(cfg: ExperimentConfig, out_dir, *, threads: int = 1, allow_nonperturbative: bool = False) -> tuple[int, dict]:
    """Run a validated config; returns (exit code, report)."""
    violation = regime_violation(cfg)
    if violation and not allow_nonperturbative:
        raise ConfigError("params.delta", violation)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    ctx = RunContext(cfg, out, threads=max(int(threads), 1))
    results = REGISTRY[cfg.experiment].run(ctx)
    report = {
        "experiment": cfg.experiment,
        "inputs": cfg.to_dict(),
        "results": jsonable(results),
        "software": software_versions(),
        "nonperturbative": bool(violation),
        "tolerance": {"passed": ctx.checks.passed, "checks": jsonable(ctx.checks.items)},
        "files": ctx.files,
        "plots": ctx.plots,
    }
    if violation:
        report["regime_warning"] = violation
    with open(out / "report.json", "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=2, sort_keys=True, ensure_ascii=False)
        fh.write("\n")
    return (EXIT_OK if ctx.checks.passed else EXIT_TOLERANCE), report


def run_experiment(config_path, out_dir=None, *, threads: int = 1, allow_nonperturbative: bool = False,
                   stderr=None) -> int:
    """Load, validate and run a config file. Exit codes: 0 ok, 2 config error, 3 tolerance failure."""
    try:
        cfg = ExperimentConfig.load(config_path)
        target = out_dir or cfg.output_dir
        if target is None:
            raise ConfigError("output_dir", "no output directory given (config or --out)")
        code, _ = execute(cfg, target, threads=threads, allow_nonperturbative=allow_nonperturbative)
    except ConfigError as exc:
        if stderr is not None:
            print(f"config error: {exc}", file=stderr)
        return EXIT_CONFIG
    return code


def describe_experiments() -> str:
    lines = []
    for name in sorted(REGISTRY):
        spec = REGISTRY[name]
        lines.append(f"{name}: {spec.summary}")
        if spec.models:
            lines.append(f"    model: {' | '.join(spec.models)}")
        if spec.needs_condition:
            lines.append(f"    condition: {' | '.join(CONDITIONS)}")
        if spec.sweep:
            lines.append(f"    sweep.parameter: {' | '.join(spec.sweep_parameters)}")
        lines.append(f"    csv: {spec.csv_columns}")
    return "\n".join(lines)
