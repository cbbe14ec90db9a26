"""Scenario files: strict, versioned JSON configs for the pipeline.

A scenario fixes every physical and statistical parameter of one run plus
its output paths. Parsing is strict: the ``schema`` version must match,
unknown keys anywhere are errors (a typo must never silently change the
physics), and all randomness derives from ``base_seed``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Optional

import numpy as np

from .composite import InteractionConfig
from .ensemble import EnsembleSpec
from .errors import ScenarioError
from .sectors import (
    AmplitudeProfile,
    CompartmentSpec,
    GaussianProfile,
    PointProfile,
    TableProfile,
    UniformProfile,
)
from .statespace import MeterBasis, MeterState

SCHEMA_VERSION = 1

_TOP_REQUIRED = {
    "schema", "name", "meter", "psi0", "compartments", "profile",
    "n_copies", "t_decohere", "mu", "R", "base_seed",
}
_TOP_OPTIONAL = {"interaction", "output", "checks", "sweep"}


@dataclass(frozen=True)
class OutputPaths:
    report: str
    histogram: str
    snapshot: Optional[str] = None
    outcomes: Optional[str] = None
    sweep: Optional[str] = None


@dataclass(frozen=True)
class BornCheck:
    targets: tuple[float, ...]


@dataclass(frozen=True)
class SweepSpec:
    t_max: float
    n_steps: int


@dataclass(frozen=True, eq=False)
class Scenario:
    name: str
    ensemble: EnsembleSpec
    output: OutputPaths
    checks: tuple[BornCheck, ...]
    sweep: SweepSpec


def _check_keys(d: dict, required: set[str], optional: set[str], where: str) -> None:
    if not isinstance(d, dict):
        raise ScenarioError(f"{where} must be an object")
    missing = required - d.keys()
    if missing:
        raise ScenarioError(f"{where} is missing keys: {sorted(missing)}")
    unknown = d.keys() - required - optional
    if unknown:
        raise ScenarioError(f"{where} has unknown keys: {sorted(unknown)}")


def _number(d: dict, key: str, where: str) -> float:
    v = d[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ScenarioError(f"{where}.{key} must be a number")
    return float(v)


def _integer(d: dict, key: str, where: str) -> int:
    v = d[key]
    if isinstance(v, bool) or not isinstance(v, int):
        raise ScenarioError(f"{where}.{key} must be an integer")
    return v


def _complex_entry(v: Any, where: str) -> complex:
    if isinstance(v, (int, float)) and not isinstance(v, bool):
        return complex(float(v), 0.0)
    if isinstance(v, list) and len(v) == 2 and all(
        isinstance(x, (int, float)) and not isinstance(x, bool) for x in v
    ):
        return complex(float(v[0]), float(v[1]))
    raise ScenarioError(f"{where} entries must be numbers or [re, im] pairs")


def _parse_meter(d: dict) -> MeterBasis:
    _check_keys(d, {"eigenvalues"}, {"labels"}, "meter")
    eig = d["eigenvalues"]
    if not isinstance(eig, list) or not eig:
        raise ScenarioError("meter.eigenvalues must be a non-empty list")
    labels = d.get("labels")
    if labels is not None:
        if not isinstance(labels, list) or not all(isinstance(s, str) for s in labels):
            raise ScenarioError("meter.labels must be a list of strings")
        labels = tuple(labels)
    try:
        return MeterBasis(tuple(float(m) for m in eig), labels)
    except (TypeError, ValueError) as exc:
        raise ScenarioError(f"meter: {exc}") from exc


def _parse_psi0(v: Any, basis: MeterBasis) -> MeterState:
    if not isinstance(v, list):
        raise ScenarioError("psi0 must be a list of amplitudes")
    amps = np.array([_complex_entry(x, "psi0") for x in v], dtype=complex)
    try:
        state = MeterState(amps, basis)
    except Exception as exc:
        raise ScenarioError(f"psi0: {exc}") from exc
    if not state.is_normalized(1e-6):
        raise ScenarioError("psi0 must be normalized (|sum of squares - 1| < 1e-6)")
    return state.normalized()


def _parse_compartments(d: dict) -> CompartmentSpec:
    _check_keys(d, {"q_min", "q_max", "n_q", "kappa", "n_v"}, {"v_center"}, "compartments")
    try:
        return CompartmentSpec(
            q_min=_number(d, "q_min", "compartments"),
            q_max=_number(d, "q_max", "compartments"),
            n_q=_integer(d, "n_q", "compartments"),
            kappa=_number(d, "kappa", "compartments"),
            n_v=_integer(d, "n_v", "compartments"),
            v_center=_number(d, "v_center", "compartments") if "v_center" in d else 0.0,
        )
    except ValueError as exc:
        raise ScenarioError(f"compartments: {exc}") from exc


def _parse_profile(d: dict) -> AmplitudeProfile:
    if not isinstance(d, dict) or "kind" not in d:
        raise ScenarioError("profile must be an object with a 'kind' key")
    kind = d["kind"]
    try:
        if kind == "gaussian":
            _check_keys(d, {"kind", "q0", "sigma_q", "v0", "sigma_v"}, set(), "profile")
            return GaussianProfile(
                q0=_number(d, "q0", "profile"),
                sigma_q=_number(d, "sigma_q", "profile"),
                v0=_number(d, "v0", "profile"),
                sigma_v=_number(d, "sigma_v", "profile"),
            )
        if kind == "uniform":
            _check_keys(d, {"kind"}, set(), "profile")
            return UniformProfile()
        if kind == "point":
            _check_keys(d, {"kind", "iq", "iv"}, set(), "profile")
            return PointProfile(iq=_integer(d, "iq", "profile"), iv=_integer(d, "iv", "profile"))
        if kind == "table":
            _check_keys(d, {"kind", "rows"}, set(), "profile")
            rows = d["rows"]
            if not isinstance(rows, list) or not all(
                isinstance(r, list) and len(r) == 4 for r in rows
            ):
                raise ScenarioError("profile.rows must be a list of [iq, iv, re, im]")
            return TableProfile(tuple(tuple(r) for r in rows))
    except ValueError as exc:
        raise ScenarioError(f"profile: {exc}") from exc
    raise ScenarioError(f"profile.kind {kind!r} is not one of gaussian/uniform/point/table")


def _parse_interaction(d: Optional[dict]) -> InteractionConfig:
    if d is None:
        return InteractionConfig()
    _check_keys(d, set(), {"lambda", "hbar", "neglect_kinetic"}, "interaction")
    kwargs = {}
    if "lambda" in d:
        kwargs["coupling"] = _number(d, "lambda", "interaction")
    if "hbar" in d:
        kwargs["hbar"] = _number(d, "hbar", "interaction")
    if "neglect_kinetic" in d:
        if not isinstance(d["neglect_kinetic"], bool):
            raise ScenarioError("interaction.neglect_kinetic must be a boolean")
        kwargs["neglect_kinetic"] = d["neglect_kinetic"]
    try:
        return InteractionConfig(**kwargs)
    except ValueError as exc:
        raise ScenarioError(f"interaction: {exc}") from exc


def _parse_output(d: Optional[dict], name: str) -> OutputPaths:
    defaults = OutputPaths(
        report=f"{name}_report.json",
        histogram=f"{name}_histogram.csv",
        sweep=f"{name}_decoherence.csv",
    )
    if d is None:
        return defaults
    _check_keys(d, set(), {"report", "histogram", "snapshot", "outcomes", "sweep"}, "output")
    for key, value in d.items():
        if not isinstance(value, str) or not value:
            raise ScenarioError(f"output.{key} must be a non-empty path string")
    return OutputPaths(
        report=d.get("report", defaults.report),
        histogram=d.get("histogram", defaults.histogram),
        snapshot=d.get("snapshot"),
        outcomes=d.get("outcomes"),
        sweep=d.get("sweep", defaults.sweep),
    )


def _parse_checks(v: Any, dim: int) -> tuple[BornCheck, ...]:
    if v is None:
        return ()
    if not isinstance(v, list):
        raise ScenarioError("checks must be a list")
    out = []
    for i, c in enumerate(v):
        where = f"checks[{i}]"
        _check_keys(c, {"kind"}, {"targets"}, where)
        if c["kind"] != "born":
            raise ScenarioError(f"{where}.kind {c['kind']!r} is not supported (only 'born')")
        targets = c.get("targets")
        if not isinstance(targets, list) or len(targets) != dim:
            raise ScenarioError(f"{where}.targets must list one probability per eigenvalue")
        probs = tuple(float(t) for t in targets)
        if any(p < 0 for p in probs) or abs(sum(probs) - 1.0) > 1e-6:
            raise ScenarioError(f"{where}.targets must be a probability vector")
        out.append(BornCheck(targets=probs))
    return tuple(out)


def _parse_sweep(d: Optional[dict], t_decohere: float) -> SweepSpec:
    default_t = t_decohere if t_decohere > 0 else 1.0
    if d is None:
        return SweepSpec(t_max=default_t, n_steps=50)
    _check_keys(d, set(), {"t_max", "n_steps"}, "sweep")
    t_max = _number(d, "t_max", "sweep") if "t_max" in d else default_t
    n_steps = _integer(d, "n_steps", "sweep") if "n_steps" in d else 50
    if t_max <= 0 or n_steps < 1:
        raise ScenarioError("sweep needs t_max > 0 and n_steps >= 1")
    return SweepSpec(t_max=t_max, n_steps=n_steps)


def parse_scenario(data: dict, seed_override: Optional[int] = None) -> Scenario:
    """Validate a scenario dict and build the typed spec.

    ``seed_override`` replaces base_seed (command line beats environment
    beats file; the caller resolves that precedence).
    """
    _check_keys(data, _TOP_REQUIRED, _TOP_OPTIONAL, "scenario")
    if data["schema"] != SCHEMA_VERSION:
        raise ScenarioError(f"schema must be {SCHEMA_VERSION}, got {data['schema']!r}")
    name = data["name"]
    if not isinstance(name, str) or not name:
        raise ScenarioError("name must be a non-empty string")

    basis = _parse_meter(data["meter"])
    psi0 = _parse_psi0(data["psi0"], basis)
    compartments = _parse_compartments(data["compartments"])
    profile = _parse_profile(data["profile"])
    interaction = _parse_interaction(data.get("interaction"))
    base_seed = seed_override if seed_override is not None else _integer(data, "base_seed", "scenario")

    try:
        ensemble = EnsembleSpec(
            n_copies=_integer(data, "n_copies", "scenario"),
            psi0=psi0,
            grid_profile=profile,
            compartments=compartments,
            interaction=interaction,
            t_decohere=_number(data, "t_decohere", "scenario"),
            mu=_number(data, "mu", "scenario"),
            R=_number(data, "R", "scenario"),
            base_seed=base_seed,
        )
    except ValueError as exc:
        raise ScenarioError(str(exc)) from exc

    return Scenario(
        name=name,
        ensemble=ensemble,
        output=_parse_output(data.get("output"), name),
        checks=_parse_checks(data.get("checks"), basis.dim),
        sweep=_parse_sweep(data.get("sweep"), ensemble.t_decohere),
    )


def load_scenario(path: str | Path, seed_override: Optional[int] = None) -> Scenario:
    p = Path(path)
    if not p.is_file():
        raise ScenarioError(f"scenario file not found: {p}")
    try:
        data = json.loads(p.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"scenario file is not valid JSON: {exc}") from exc
    return parse_scenario(data, seed_override)


def resolved_dict(sc: Scenario) -> dict:
    """Canonical defaults-expanded form of a scenario, for report embedding."""
    ens = sc.ensemble
    profile: dict[str, Any] = {}
    p = ens.grid_profile
    if isinstance(p, GaussianProfile):
        profile = {"kind": "gaussian", "q0": p.q0, "sigma_q": p.sigma_q,
                   "v0": p.v0, "sigma_v": p.sigma_v}
    elif isinstance(p, UniformProfile):
        profile = {"kind": "uniform"}
    elif isinstance(p, PointProfile):
        profile = {"kind": "point", "iq": p.iq, "iv": p.iv}
    elif isinstance(p, TableProfile):
        profile = {"kind": "table", "rows": [list(r) for r in p.rows]}
    return {
        "schema": SCHEMA_VERSION,
        "name": sc.name,
        "meter": {
            "eigenvalues": list(ens.psi0.basis.eigenvalues),
            "labels": list(ens.psi0.basis.labels) if ens.psi0.basis.labels else None,
        },
        "psi0": [[c.real, c.imag] for c in ens.psi0.amplitudes.tolist()],
        "compartments": {
            "q_min": ens.compartments.q_min,
            "q_max": ens.compartments.q_max,
            "n_q": ens.compartments.n_q,
            "kappa": ens.compartments.kappa,
            "n_v": ens.compartments.n_v,
            "v_center": ens.compartments.v_center,
        },
        "profile": profile,
        "interaction": {
            "lambda": ens.interaction.coupling,
            "hbar": ens.interaction.hbar,
            "neglect_kinetic": ens.interaction.neglect_kinetic,
        },
        "n_copies": ens.n_copies,
        "t_decohere": ens.t_decohere,
        "mu": ens.mu,
        "R": ens.R,
        "base_seed": ens.base_seed,
        "output": {
            "report": sc.output.report,
            "histogram": sc.output.histogram,
            "snapshot": sc.output.snapshot,
            "outcomes": sc.output.outcomes,
            "sweep": sc.output.sweep,
        },
        "checks": [{"kind": "born", "targets": list(c.targets)} for c in sc.checks],
        "sweep": {"t_max": sc.sweep.t_max, "n_steps": sc.sweep.n_steps},
    }
